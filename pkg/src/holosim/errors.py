"""Exception types shared across the simulator.

Every contract violation raises one of these rather than a bare ValueError,
so callers (and the CLI) can tell configuration mistakes from numerical
failures.
"""


class HolosimError(Exception):
    """Base class for all package-specific errors."""


class NonHermitianInputError(HolosimError):
    """A matrix that must be Hermitian is not, beyond tolerance."""


class NonUnitaryInputError(HolosimError):
    """A matrix that must be unitary is not, beyond tolerance."""


class DimensionMismatchError(HolosimError):
    """Operands have incompatible shapes for the requested operation."""


class OutOfRangeError(HolosimError):
    """A scalar parameter lies outside its documented domain."""


class ZeroAreaError(HolosimError):
    """An envelope with zero integral cannot be normalized to a target area."""


class BadTransitionError(HolosimError):
    """A pulse segment addresses a transition the Hamiltonian does not drive."""


class NegativeRateError(HolosimError):
    """A decay or dephasing rate is negative."""


class StepTooLargeError(HolosimError):
    """Integration step produced an unphysical state (trace or norm drift)."""


class BadShotCountError(HolosimError):
    """Shot count must be a positive integer (or None for exact values)."""


class SingularInputSpanError(HolosimError):
    """Tomography input states do not span the operator space."""


class ConvergenceFailureError(HolosimError):
    """An iterative reconstruction ran out of iterations.

    Carries the best iterate found so the caller can inspect how close the
    solver got.
    """

    def __init__(self, message, best=None):
        super().__init__(message)
        self.best = best


class ZeroCouplingError(HolosimError):
    """Both effective couplings of a cavity gate are zero."""


class FitDivergenceError(HolosimError):
    """A least-squares fit failed to converge or the model is degenerate."""


class RatioOutOfRangeError(HolosimError):
    """Interleaved/reference decay ratio is outside the physical range."""


class ConfigError(HolosimError):
    """A run configuration is invalid.

    ``path`` points at the offending key, e.g. ``sweep.n_epsilon``.
    """

    def __init__(self, message, path=""):
        super().__init__(f"{path}: {message}" if path else message)
        self.path = path


class IoError(HolosimError):
    """Filesystem problem while writing or reading run artifacts."""

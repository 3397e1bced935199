"""Operator-space primitives for the three-level (g, e, f) transmon.

Basis order is always (|g>, |e>, |f>) = (0, 1, 2). Kets are unit-norm complex
vectors of shape (3,) and density matrices are (3, 3) arrays; no wrapper
classes. The two operator bases used by the tomography stack live here:

* the Gell-Mann set (with lambda_0 = identity) for state reconstruction,
* the gf-block process set {I_gf, sx_gf, -i sy_gf, sz_gf, sx_ge, -i sy_ge,
  sx_ef, -i sy_ef, I_e} for process matrices.

The -i factor on the sigma_y elements keeps ideal process matrices real for
rotations about axes in the xz plane.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Iterator

import numpy as np

from .errors import (
    DimensionMismatchError,
    NonHermitianInputError,
    NonUnitaryInputError,
)

DIM = 3
HERMITICITY_TOL = 1e-10
UNITARITY_TOL = 1e-9


# ---- element-wise building blocks ----

def ketbra(i: int, j: int, dim: int = DIM) -> np.ndarray:
    """|i><j| in a dim-dimensional space."""
    m = np.zeros((dim, dim), dtype=complex)
    m[i, j] = 1.0
    return m


def basis_ket(i: int, dim: int = DIM) -> np.ndarray:
    v = np.zeros(dim, dtype=complex)
    v[i] = 1.0
    return v


def normalized(vec) -> np.ndarray:
    v = np.asarray(vec, dtype=complex)
    n = np.linalg.norm(v)
    if n == 0:
        raise DimensionMismatchError("cannot normalize the zero vector")
    return v / n


def dagger(a: np.ndarray) -> np.ndarray:
    return np.conjugate(np.swapaxes(a, -1, -2))


# ---- predicates and validators ----

def is_hermitian(a: np.ndarray, tol: float = HERMITICITY_TOL) -> bool:
    a = np.asarray(a)
    return a.shape[-1] == a.shape[-2] and bool(
        np.all(np.abs(a - dagger(a)) <= tol)
    )


def is_unitary(a: np.ndarray, tol: float = UNITARITY_TOL) -> bool:
    a = np.asarray(a)
    if a.shape[-1] != a.shape[-2]:
        return False
    eye = np.eye(a.shape[-1])
    return bool(np.all(np.abs(dagger(a) @ a - eye) <= tol))


def require_hermitian(a: np.ndarray, tol: float = HERMITICITY_TOL, what: str = "matrix") -> np.ndarray:
    a = np.asarray(a, dtype=complex)
    if not is_hermitian(a, tol):
        dev = float(np.max(np.abs(a - dagger(a))))
        raise NonHermitianInputError(f"{what} deviates from Hermiticity by {dev:.3e}")
    return a


def require_unitary(a: np.ndarray, tol: float = UNITARITY_TOL, what: str = "matrix") -> np.ndarray:
    a = np.asarray(a, dtype=complex)
    if not is_unitary(a, tol):
        raise NonUnitaryInputError(f"{what} is not unitary within {tol:.1e}")
    return a


def is_density_matrix(rho: np.ndarray, tol: float = 1e-8) -> bool:
    rho = np.asarray(rho)
    if rho.shape[0] != rho.shape[1] or not is_hermitian(rho, tol):
        return False
    if abs(np.trace(rho).real - 1.0) > tol:
        return False
    evals = np.linalg.eigvalsh((rho + dagger(rho)) / 2)
    return bool(evals.min() > -tol)


# ---- operator bases ----

@dataclass(frozen=True)
class OperatorBasis:
    """An ordered, pairwise HS-orthogonal set of matrices with labels."""

    name: str
    labels: tuple[str, ...]
    elements: tuple[np.ndarray, ...]

    def __post_init__(self):
        if len(self.labels) != len(self.elements):
            raise DimensionMismatchError("labels and elements differ in length")

    def __len__(self) -> int:
        return len(self.elements)

    def __getitem__(self, k: int) -> np.ndarray:
        return self.elements[k]

    def __iter__(self) -> Iterator[np.ndarray]:
        return iter(self.elements)

    @property
    def dim(self) -> int:
        return self.elements[0].shape[0]

    def hs_norms_squared(self) -> np.ndarray:
        """Tr(E_m^dag E_m) for each element."""
        return np.array([np.trace(dagger(e) @ e).real for e in self.elements])

    def gram(self) -> np.ndarray:
        """Hilbert-Schmidt Gram matrix Tr(E_m^dag E_n)."""
        n = len(self)
        g = np.empty((n, n), dtype=complex)
        for m, em in enumerate(self.elements):
            for k, ek in enumerate(self.elements):
                g[m, k] = np.trace(dagger(em) @ ek)
        return g

    def max_cross_overlap(self) -> float:
        g = self.gram()
        return float(np.max(np.abs(g - np.diag(np.diag(g)))))


def gellmann_basis() -> OperatorBasis:
    """Gell-Mann matrices prefixed with the identity (lambda_0 = I).

    lambda_1..3 act on (g,e), lambda_4..5 on (g,f), lambda_6..7 on (e,f);
    lambda_3 = diag(1,-1,0) and lambda_8 = diag(1,1,-2)/sqrt(3). All of
    lambda_1..8 are traceless with Tr(lambda_i lambda_j) = 2 delta_ij.
    """
    l0 = np.eye(3, dtype=complex)
    l1 = ketbra(0, 1) + ketbra(1, 0)
    l2 = -1j * ketbra(0, 1) + 1j * ketbra(1, 0)
    l3 = np.diag([1.0, -1.0, 0.0]).astype(complex)
    l4 = ketbra(0, 2) + ketbra(2, 0)
    l5 = -1j * ketbra(0, 2) + 1j * ketbra(2, 0)
    l6 = ketbra(1, 2) + ketbra(2, 1)
    l7 = -1j * ketbra(1, 2) + 1j * ketbra(2, 1)
    l8 = np.diag([1.0, 1.0, -2.0]).astype(complex) / np.sqrt(3.0)
    labels = tuple(f"lambda_{i}" for i in range(9))
    return OperatorBasis("gellmann", labels, (l0, l1, l2, l3, l4, l5, l6, l7, l8))


def process_basis_gf() -> OperatorBasis:
    """Nine-element process basis built around the (g, f) computational block.

    Order: I_gf, sx_gf, -i sy_gf, sz_gf, sx_ge, -i sy_ge, sx_ef, -i sy_ef,
    I_e. The first four span operators on the gf block; the middle four
    connect it to |e>; I_e completes the identity (I_gf + I_e = I).
    """
    i_gf = np.diag([1.0, 0.0, 1.0]).astype(complex)
    sx_gf = ketbra(0, 2) + ketbra(2, 0)
    misy_gf = -ketbra(0, 2) + ketbra(2, 0)
    sz_gf = np.diag([1.0, 0.0, -1.0]).astype(complex)
    sx_ge = ketbra(0, 1) + ketbra(1, 0)
    misy_ge = -ketbra(0, 1) + ketbra(1, 0)
    sx_ef = ketbra(1, 2) + ketbra(2, 1)
    misy_ef = -ketbra(1, 2) + ketbra(2, 1)
    i_e = ketbra(1, 1)
    labels = ("I_gf", "X_gf", "-iY_gf", "Z_gf", "X_ge", "-iY_ge", "X_ef", "-iY_ef", "I_e")
    return OperatorBasis(
        "process_gf",
        labels,
        (i_gf, sx_gf, misy_gf, sz_gf, sx_ge, misy_ge, sx_ef, misy_ef, i_e),
    )


def qubit_pauli_basis() -> OperatorBasis:
    """{I, X, -iY, Z} on a two-level system, same -iY convention as above."""
    i2 = np.eye(2, dtype=complex)
    sx = np.array([[0, 1], [1, 0]], dtype=complex)
    misy = np.array([[0, -1], [1, 0]], dtype=complex)
    sz = np.diag([1.0, -1.0]).astype(complex)
    return OperatorBasis("qubit_pauli", ("I", "X", "-iY", "Z"), (i2, sx, misy, sz))


def decompose(a: np.ndarray, basis: OperatorBasis) -> np.ndarray:
    """Coefficients c with a = sum_m c_m E_m (basis must be orthogonal)."""
    a = np.asarray(a, dtype=complex)
    if a.shape != (basis.dim, basis.dim):
        raise DimensionMismatchError(
            f"matrix shape {a.shape} does not match basis dimension {basis.dim}"
        )
    norms = basis.hs_norms_squared()
    return np.array(
        [np.trace(dagger(e) @ a) / n for e, n in zip(basis.elements, norms)]
    )


# ---- embeddings and exponentials ----

def embed_gf(u2: np.ndarray) -> np.ndarray:
    """Embed a 2x2 operator on the (g, f) block of the qutrit, identity on |e>.

    diag(a, d) on (g, f) becomes diag(a, 1, d) on (g, e, f).
    """
    u2 = np.asarray(u2, dtype=complex)
    if u2.shape != (2, 2):
        raise DimensionMismatchError(f"expected a 2x2 block, got {u2.shape}")
    out = np.eye(3, dtype=complex)
    out[0, 0] = u2[0, 0]
    out[0, 2] = u2[0, 1]
    out[2, 0] = u2[1, 0]
    out[2, 2] = u2[1, 1]
    return out


def gf_block(u3: np.ndarray) -> np.ndarray:
    """The 2x2 (g, f) block of a qutrit operator (inverse of embed_gf)."""
    u3 = np.asarray(u3, dtype=complex)
    return u3[np.ix_((0, 2), (0, 2))]


def expm_hermitian(h: np.ndarray, prefactor: complex = -1j) -> np.ndarray:
    """exp(prefactor * h) for Hermitian h via eigendecomposition.

    Accepts stacked input of shape (..., d, d) and exponentiates every slice;
    this is the hot path of the unitary propagator.
    """
    h = np.asarray(h, dtype=complex)
    if not is_hermitian(h, HERMITICITY_TOL * 100):
        raise NonHermitianInputError("expm_hermitian requires a Hermitian matrix")
    evals, vecs = np.linalg.eigh(h)
    phases = np.exp(prefactor * evals)
    return np.einsum("...ij,...j,...kj->...ik", vecs, phases, vecs.conj())


# ---- phase-insensitive comparisons ----

def phase_aligned_distance(u: np.ndarray, v: np.ndarray) -> float:
    """min over phi of ||u - e^{i phi} v||_F, via phi* = arg Tr(v^dag u)."""
    u = np.asarray(u, dtype=complex)
    v = np.asarray(v, dtype=complex)
    if u.shape != v.shape:
        raise DimensionMismatchError(f"shape mismatch {u.shape} vs {v.shape}")
    tr = np.trace(dagger(v) @ u)
    phase = np.exp(1j * np.angle(tr)) if abs(tr) > 0 else 1.0
    return float(np.linalg.norm(u - phase * v, ord="fro"))


def unitary_infidelity(u: np.ndarray, target: np.ndarray) -> float:
    """1 - |Tr(target^dag u)|^2 / d^2, insensitive to global phase.

    u need not be exactly unitary (a leaky block is fine); target must be.
    """
    target = require_unitary(target, what="target")
    u = np.asarray(u, dtype=complex)
    if u.shape != target.shape:
        raise DimensionMismatchError(f"shape mismatch {u.shape} vs {target.shape}")
    d = u.shape[0]
    overlap = abs(np.trace(dagger(target) @ u)) ** 2 / d**2
    return float(1.0 - overlap)

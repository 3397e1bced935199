"""Time evolution: unitary propagators, Lindblad integration, channels.

Two integrators, both fixed-step with the step budget defaulting to
duration/4096:

* unitary: product of midpoint-rule exponentials, U = prod_k
  exp(-i H(t_k + dt/2) dt) ordered latest-left, with every step
  exponential done by a batched Hermitian eigendecomposition;
* Lindblad: classic RK4 on d rho/dt = -i[H, rho] + sum_k D[L_k] rho,
  or on the full channel superoperator when the whole linear map is
  needed (tomography, benchmarking).

Schedules are integrated piecewise between segment boundaries so envelope
kinks never fall inside a step; otherwise the integrator order degrades
silently. Channels and unitaries are cached by a content hash of
(builder, schedule, error, noise, step budget), which is what makes
hundred-sequence benchmarking runs cheap.

vec convention is row-major: vec(rho) = rho.reshape(-1), so the channel of
a unitary U is kron(U, conj(U)).
"""

from __future__ import annotations

import hashlib
import threading
from dataclasses import dataclass

import numpy as np

from . import model
from .errors import (
    DimensionMismatchError,
    NonHermitianInputError,
    OutOfRangeError,
    StepTooLargeError,
)
from .operators import dagger, expm_hermitian, is_hermitian
from .pulses import GateSchedule

DEFAULT_STEPS = 4096
TRACE_TOL = 1e-6

#: Hamiltonian builders addressable by name: (callable, dimension)
SPACES = {
    "qutrit": (model.qutrit_drive_hamiltonian, 3),
    "cavity_effective": (model.cavity_effective_hamiltonian, 3),
    "two_qubit": (model.two_qubit_hamiltonian, 6),
    "cavity_full": (model.six_level_cavity_hamiltonian, 6),
}


@dataclass(frozen=True)
class TimeGrid:
    """Uniform integration grid on [t0, t1] with at least 10 steps."""

    t0: float
    t1: float
    steps: int

    def __post_init__(self):
        if self.t1 <= self.t0:
            raise OutOfRangeError("t1 must exceed t0")
        if self.steps < 10:
            raise OutOfRangeError(f"at least 10 steps required, got {self.steps}")

    @property
    def dt(self) -> float:
        return (self.t1 - self.t0) / self.steps

    @classmethod
    def for_duration(cls, duration: float, steps: int = DEFAULT_STEPS) -> "TimeGrid":
        return cls(0.0, duration, steps)


@dataclass(frozen=True)
class Trajectory:
    """Density-matrix history rho(t_k) on the integration nodes."""

    times: np.ndarray
    states: np.ndarray  # (N+1, d, d)

    @property
    def final(self) -> np.ndarray:
        return self.states[-1]

    def populations(self) -> np.ndarray:
        return np.real(np.einsum("tii->ti", self.states))

    def to_csv(self, path) -> None:
        """Write populations and coherence magnitudes, one row per node.

        Values use repr formatting (shortest round-trip), so identical runs
        produce byte-identical files.
        """
        d = self.states.shape[-1]
        pops = self.populations()
        header = ["time_s"] + [f"p_{i}" for i in range(d)]
        pairs = [(i, j) for i in range(d) for j in range(i + 1, d)]
        header += [f"abs_rho_{i}{j}" for i, j in pairs]
        lines = [",".join(header)]
        for k, t in enumerate(self.times):
            row = [repr(float(t))] + [repr(float(p)) for p in pops[k]]
            row += [repr(float(abs(self.states[k][i, j]))) for i, j in pairs]
            lines.append(",".join(row))
        with open(path, "w") as fh:
            fh.write("\n".join(lines) + "\n")


def _eval_hamiltonian(h, times: np.ndarray, dim: int) -> np.ndarray:
    """Evaluate h on an array of times, accepting vectorized or scalar h."""
    out = np.asarray(h(times))
    if out.shape == (times.size, dim, dim):
        return out.astype(complex)
    # non-vectorized callable: fall back to a loop
    stack = np.empty((times.size, dim, dim), dtype=complex)
    for k, t in enumerate(times):
        stack[k] = h(float(t))
    return stack


def _probe_dim(h, t: float) -> int:
    m = np.asarray(h(t))
    if m.ndim != 2 or m.shape[0] != m.shape[1]:
        raise DimensionMismatchError(f"hamiltonian returned shape {m.shape}")
    return m.shape[0]


def _ordered_product(mats: np.ndarray) -> np.ndarray:
    """prod_k mats[k] with mats[-1] leftmost, by pairwise tree reduction."""
    acc = mats[::-1]  # acc[0] is the leftmost factor
    while acc.shape[0] > 1:
        n = acc.shape[0]
        paired = np.matmul(acc[0 : n - n % 2 : 2], acc[1 : n - n % 2 + 1 : 2])
        acc = np.concatenate([paired, acc[n - n % 2 :]], axis=0) if n % 2 else paired
    return acc[0]


def propagate_unitary(h, grid: TimeGrid, check: bool = True) -> np.ndarray:
    """Midpoint-rule unitary propagator over the grid.

    h(t) must be Hermitian at every node; each step is the exact exponential
    of the midpoint Hamiltonian, so the result is unitary to rounding even
    for coarse grids (accuracy, not unitarity, is what dt buys).
    """
    dim = _probe_dim(h, grid.t0)
    mids = grid.t0 + grid.dt * (np.arange(grid.steps) + 0.5)
    h_mid = _eval_hamiltonian(h, mids, dim)
    if check and not is_hermitian(h_mid, 1e-8):
        raise NonHermitianInputError("hamiltonian is not Hermitian on the grid")
    steps = expm_hermitian(h_mid, prefactor=-1j * grid.dt)
    u = _ordered_product(steps)
    if check:
        drift = np.max(np.abs(dagger(u) @ u - np.eye(dim)))
        if drift > 1e-9:
            raise StepTooLargeError(f"propagator unitarity drift {drift:.2e}")
    return u


# ---- Lindblad right-hand side ----

class _Liouville:
    """Precomputed pieces of the Liouvillian for fast repeated evaluation."""

    def __init__(self, collapse_ops, dim: int):
        self.dim = dim
        self.ops = [np.asarray(c, dtype=complex) for c in collapse_ops]
        for c in self.ops:
            if c.shape != (dim, dim):
                raise DimensionMismatchError(
                    f"collapse operator shape {c.shape}, expected {(dim, dim)}"
                )
        self.anti = sum(
            (dagger(c) @ c for c in self.ops), np.zeros((dim, dim), dtype=complex)
        )

    def apply(self, ht: np.ndarray, rho: np.ndarray) -> np.ndarray:
        """d rho/dt for a single density matrix."""
        out = -1j * (ht @ rho - rho @ ht)
        out -= 0.5 * (self.anti @ rho + rho @ self.anti)
        for c in self.ops:
            out += c @ rho @ dagger(c)
        return out

    def dissipator_matrix(self) -> np.ndarray:
        """Constant part of the superoperator (row-major vec)."""
        d = self.dim
        eye = np.eye(d)
        sup = np.zeros((d * d, d * d), dtype=complex)
        for c in self.ops:
            sup += np.kron(c, c.conj())
        sup -= 0.5 * (np.kron(self.anti, eye) + np.kron(eye, self.anti.T))
        return sup


def _rk4_nodes(grid: TimeGrid) -> tuple[np.ndarray, np.ndarray]:
    nodes = grid.t0 + grid.dt * np.arange(grid.steps + 1)
    mids = nodes[:-1] + 0.5 * grid.dt
    return nodes, mids


def propagate_lindblad(h, collapse_ops, rho0: np.ndarray, grid: TimeGrid) -> Trajectory:
    """Fixed-step RK4 integration of the Lindblad equation.

    Returns the full trajectory on the grid nodes. Raises StepTooLargeError
    if the trace drifts by more than 1e-6 anywhere along the way.
    """
    rho = np.asarray(rho0, dtype=complex).copy()
    dim = rho.shape[0]
    if rho.shape != (dim, dim):
        raise DimensionMismatchError(f"rho0 shape {rho.shape} is not square")
    if not is_hermitian(rho, 1e-9):
        raise NonHermitianInputError("rho0 must be Hermitian")
    liou = _Liouville(collapse_ops, dim)
    nodes, mids = _rk4_nodes(grid)
    h_nodes = _eval_hamiltonian(h, nodes, dim)
    h_mids = _eval_hamiltonian(h, mids, dim)
    dt = grid.dt
    states = np.empty((grid.steps + 1, dim, dim), dtype=complex)
    states[0] = rho
    for k in range(grid.steps):
        k1 = liou.apply(h_nodes[k], rho)
        k2 = liou.apply(h_mids[k], rho + 0.5 * dt * k1)
        k3 = liou.apply(h_mids[k], rho + 0.5 * dt * k2)
        k4 = liou.apply(h_nodes[k + 1], rho + dt * k3)
        rho = rho + (dt / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4)
        states[k + 1] = rho
    traces = np.real(np.einsum("tii->t", states))
    drift = float(np.max(np.abs(traces - traces[0])))
    if drift > TRACE_TOL:
        raise StepTooLargeError(
            f"trace drifted by {drift:.2e} (> {TRACE_TOL}); refine the grid"
        )
    return Trajectory(times=nodes, states=states)


def channel_superoperator(h, collapse_ops, grid: TimeGrid) -> np.ndarray:
    """RK4 integration of the full (d^2, d^2) channel superoperator.

    The Lindblad equation is linear, so propagating the identity
    superoperator gives exactly the same map as propagating every input
    state separately, at a fraction of the cost when the map is reused.
    """
    dim = _probe_dim(h, grid.t0)
    liou = _Liouville(collapse_ops, dim)
    diss = liou.dissipator_matrix()
    nodes, mids = _rk4_nodes(grid)
    h_nodes = _eval_hamiltonian(h, nodes, dim)
    h_mids = _eval_hamiltonian(h, mids, dim)
    dt = grid.dt
    d2 = dim * dim
    s = np.eye(d2, dtype=complex)

    def rhs(ht: np.ndarray, m: np.ndarray) -> np.ndarray:
        x = m.reshape(dim, dim, d2)
        comm = np.einsum("ab,bcm->acm", ht, x) - np.einsum("abm,bc->acm", x, ht)
        return (-1j) * comm.reshape(d2, d2) + diss @ m

    for k in range(grid.steps):
        k1 = rhs(h_nodes[k], s)
        k2 = rhs(h_mids[k], s + 0.5 * dt * k1)
        k3 = rhs(h_mids[k], s + 0.5 * dt * k2)
        k4 = rhs(h_nodes[k + 1], s + dt * k3)
        s = s + (dt / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4)
    return s


def unitary_superoperator(u: np.ndarray) -> np.ndarray:
    return np.kron(u, u.conj())


def apply_channel(sup: np.ndarray, rho: np.ndarray) -> np.ndarray:
    d = rho.shape[0]
    out = (sup @ np.asarray(rho, dtype=complex).reshape(-1)).reshape(d, d)
    return out


# ---- schedule-level drivers with piecewise grids and caching ----

def _piece_grids(schedule: GateSchedule, steps: int):
    """Split the schedule at segment boundaries, allocating the step budget
    proportionally (>= 4 steps per piece)."""
    bounds = schedule.boundaries()
    pieces = []
    for a, b in zip(bounds[:-1], bounds[1:]):
        if b - a < 1e-15:
            continue
        n = max(4, int(round(steps * (b - a) / schedule.duration)))
        pieces.append((float(a), float(b), n))
    return pieces


_cache: dict[str, np.ndarray] = {}
_cache_lock = threading.Lock()


def clear_cache() -> None:
    with _cache_lock:
        _cache.clear()


def _key(*parts) -> str:
    text = "|".join(repr(p) for p in parts)
    return hashlib.sha256(text.encode()).hexdigest()


def schedule_unitary(
    schedule: GateSchedule,
    err: model.ControlError = model.NO_ERROR,
    steps: int = DEFAULT_STEPS,
    space: str = "qutrit",
) -> np.ndarray:
    """Noiseless propagator of a whole schedule (cached)."""
    builder, dim = SPACES[space]
    key = _key("unitary", space, schedule, err, steps)
    with _cache_lock:
        if key in _cache:
            return _cache[key]
    u = np.eye(dim, dtype=complex)
    for a, b, n in _piece_grids(schedule, steps):
        grid = TimeGrid(a, b, max(n, 10))
        piece = propagate_unitary(lambda t: builder(schedule, err, t), grid)
        u = piece @ u
    with _cache_lock:
        _cache[key] = u
    return u


def schedule_channel(
    schedule: GateSchedule,
    noise: model.NoiseModel = model.NO_NOISE,
    err: model.ControlError = model.NO_ERROR,
    steps: int = DEFAULT_STEPS,
    space: str = "qutrit",
    cavity_noise: model.CavityNoise = model.NO_CAVITY_NOISE,
) -> np.ndarray:
    """Channel superoperator of a whole schedule (cached).

    Trivial noise reduces to the unitary channel. Cavity noise only applies
    to the six-level spaces.
    """
    builder, dim = SPACES[space]
    trivial = noise.is_trivial and (
        dim == 3 or (cavity_noise.gamma_loss == 0 and cavity_noise.gamma_phi == 0)
    )
    if trivial:
        return unitary_superoperator(schedule_unitary(schedule, err, steps, space))
    key = _key("channel", space, schedule, err, noise, cavity_noise, steps)
    with _cache_lock:
        if key in _cache:
            return _cache[key]
    if dim == 3:
        collapse = model.collapse_operators(noise)
    else:
        collapse = model.six_level_collapse_operators(noise, cavity_noise)
    s = np.eye(dim * dim, dtype=complex)
    for a, b, n in _piece_grids(schedule, steps):
        grid = TimeGrid(a, b, max(n, 10))
        piece = channel_superoperator(lambda t: builder(schedule, err, t), collapse, grid)
        s = piece @ s
    with _cache_lock:
        _cache[key] = s
    return s


def process_map(
    schedule: GateSchedule,
    noise: model.NoiseModel,
    states,
    err: model.ControlError = model.NO_ERROR,
    steps: int = DEFAULT_STEPS,
    space: str = "qutrit",
) -> list[np.ndarray]:
    """Evolve a list of kets or density matrices through one gate schedule."""
    _, dim = SPACES[space]
    sup = schedule_channel(schedule, noise, err, steps, space)
    out = []
    for st in states:
        st = np.asarray(st, dtype=complex)
        rho = np.outer(st, st.conj()) if st.ndim == 1 else st
        if rho.shape != (dim, dim):
            raise DimensionMismatchError(f"state shape {rho.shape} in {dim}-dim space")
        out.append(apply_channel(sup, rho))
    return out

"""Dense propagation and gate-comparison primitives.

Everything here works on plain ``numpy`` arrays. A unitary is just a square
complex array; helpers such as :func:`unitarity_error` check the invariants
where it matters.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from typing import Callable

import numpy as np
from scipy import linalg as sla

__all__ = [
    "I2", "X", "Y", "Z", "PAULIS",
    "DimensionError", "GridError", "ModelError",
    "TimeGrid", "HamiltonianSampler",
    "matrix_exp", "propagate", "propagate_checkpointed", "step_unitaries",
    "average_gate_fidelity", "gate_infidelity", "equal_up_to_global_phase",
    "global_phase", "unitarity_error", "adjoint_rep", "DEFAULT_STEPS",
]

I2 = np.eye(2, dtype=complex)
X = np.array([[0, 1], [1, 0]], dtype=complex)
Y = np.array([[0, -1j], [1j, 0]], dtype=complex)
Z = np.array([[1, 0], [0, -1]], dtype=complex)
PAULIS = (X, Y, Z)

DEFAULT_STEPS = 2000
# Below this dimension the cumulative product uses a vectorised doubling scan.
_SCAN_MAX_DIM = 4


class DimensionError(ValueError):
    """Operands have incompatible shapes."""


class GridError(ValueError):
    """Invalid time grid."""


class ModelError(ValueError):
    """A Hamiltonian sample violates its contract (e.g. not Hermitian)."""


@dataclass(frozen=True)
class TimeGrid:
    """Uniform grid of ``n_steps`` intervals on ``[t_start, t_end]``."""

    t_end: float
    n_steps: int = DEFAULT_STEPS
    t_start: float = 0.0

    def __post_init__(self):
        if int(self.n_steps) != self.n_steps or self.n_steps < 1:
            raise GridError(f"n_steps must be a positive integer, got {self.n_steps!r}")
        if not np.isfinite(self.t_end) or not self.t_end > self.t_start:
            raise GridError(f"need t_end > t_start, got [{self.t_start}, {self.t_end}]")

    @property
    def duration(self) -> float:
        return self.t_end - self.t_start

    @property
    def dt(self) -> float:
        return self.duration / self.n_steps

    @property
    def times(self) -> np.ndarray:
        return np.linspace(self.t_start, self.t_end, self.n_steps + 1)

    @property
    def midpoints(self) -> np.ndarray:
        return self.t_start + (np.arange(self.n_steps) + 0.5) * self.dt

    def __len__(self):
        return self.n_steps + 1


@dataclass(frozen=True)
class HamiltonianSampler:
    """Time-dependent Hamiltonian of fixed dimension.

    ``fn`` maps a 1-D array of times to a stack of ``(len(t), dim, dim)``
    matrices. Calling the sampler with a scalar returns a single matrix.
    """

    dim: int
    fn: Callable[[np.ndarray], np.ndarray] = field(repr=False)

    def sample(self, times) -> np.ndarray:
        times = np.atleast_1d(np.asarray(times, dtype=float))
        H = np.asarray(self.fn(times), dtype=complex)
        if H.shape != (times.size, self.dim, self.dim):
            raise DimensionError(
                f"sampler returned shape {H.shape}, expected {(times.size, self.dim, self.dim)}")
        return H

    def __call__(self, t: float) -> np.ndarray:
        return self.sample([t])[0]

    def __add__(self, other: "HamiltonianSampler") -> "HamiltonianSampler":
        if other.dim != self.dim:
            raise DimensionError(f"cannot add samplers of dim {self.dim} and {other.dim}")
        return HamiltonianSampler(self.dim, lambda t: self.fn(t) + other.fn(t))

    @classmethod
    def constant(cls, H) -> "HamiltonianSampler":
        H = np.asarray(H, dtype=complex)
        if H.ndim != 2 or H.shape[0] != H.shape[1]:
            raise DimensionError(f"expected a square matrix, got shape {H.shape}")
        return cls(H.shape[0], lambda t: np.broadcast_to(H, (len(t),) + H.shape))


def _check_square(A: np.ndarray) -> None:
    if A.ndim != 2 or A.shape[0] != A.shape[1]:
        raise DimensionError(f"expected a square matrix, got shape {A.shape}")


def matrix_exp(A) -> np.ndarray:
    """Matrix exponential of a square matrix (Padé scaling and squaring)."""
    A = np.asarray(A, dtype=complex)
    _check_square(A)
    return sla.expm(A)


def _hermiticity_check(H: np.ndarray, times: np.ndarray) -> None:
    scale = max(1.0, float(np.abs(H).max(initial=0.0)))
    err = np.abs(H - H.conj().transpose(0, 2, 1)).max(axis=(1, 2))
    bad = np.flatnonzero(err > 1e-12 * scale)
    if bad.size:
        k = bad[0]
        raise ModelError(f"Hamiltonian not Hermitian at t={times[k]:.6g} (deviation {err[k]:.3e})")


def step_unitaries(H: HamiltonianSampler, grid: TimeGrid) -> np.ndarray:
    """Midpoint-rule step propagators ``exp(-i H(t_k + dt/2) dt)``."""
    times = grid.midpoints
    Hs = H.sample(times)
    _hermiticity_check(Hs, times)
    Hs = 0.5 * (Hs + Hs.conj().transpose(0, 2, 1))
    w, v = np.linalg.eigh(Hs)
    return (v * np.exp(-1j * grid.dt * w)[:, None, :]) @ v.conj().transpose(0, 2, 1)


def _cumulative(steps: np.ndarray) -> np.ndarray:
    """Left-multiplied running products ``P[k] = steps[k] @ ... @ steps[0]``."""
    n, d, _ = steps.shape
    if d <= _SCAN_MAX_DIM:
        P = steps.copy()
        k = 1
        while k < n:
            P[k:] = P[k:] @ P[:-k]
            k *= 2
        return P
    P = np.empty_like(steps)
    acc = np.eye(d, dtype=complex)
    for k in range(n):
        acc = steps[k] @ acc
        P[k] = acc
    return P


def propagate_checkpointed(H: HamiltonianSampler, grid: TimeGrid) -> np.ndarray:
    """Time-ordered propagators at every grid point.

    Returns an array of shape ``(n_steps + 1, dim, dim)`` whose first entry is
    the identity.
    """
    steps = step_unitaries(H, grid)
    out = np.empty((grid.n_steps + 1, H.dim, H.dim), dtype=complex)
    out[0] = np.eye(H.dim)
    out[1:] = _cumulative(steps)
    return out


def propagate(H: HamiltonianSampler, grid: TimeGrid) -> np.ndarray:
    """Time-ordered propagator ``U(t_end)`` from piecewise-constant midpoint exponentials.

    Second-order accurate in ``grid.dt`` and unitary to rounding error.
    """
    steps = step_unitaries(H, grid)
    if H.dim <= _SCAN_MAX_DIM:
        return _cumulative(steps)[-1]
    acc = np.eye(H.dim, dtype=complex)
    for s in steps:
        acc = s @ acc
    return acc


def _pair(U, V) -> tuple[np.ndarray, np.ndarray]:
    U = np.asarray(U, dtype=complex)
    V = np.asarray(V, dtype=complex)
    _check_square(U)
    if U.shape != V.shape:
        raise DimensionError(f"dimension mismatch: {U.shape} vs {V.shape}")
    return U, V


def average_gate_fidelity(U, V) -> float:
    """Average gate fidelity ``(d + |Tr V^dag U|^2) / (d (d + 1))``."""
    U, V = _pair(U, V)
    d = U.shape[0]
    overlap = abs(np.trace(V.conj().T @ U)) ** 2
    return float(min(1.0, (d + overlap) / (d * (d + 1))))


def gate_infidelity(U, V) -> float:
    """``1 - F`` evaluated from the eigenphases of ``V^dag U``.

    With ``V^dag U`` having eigenphases ``theta_k``,
    ``d^2 - |Tr V^dag U|^2 = sum_jk 2 sin^2((theta_j - theta_k) / 2)``. Using
    phases alone keeps the result accurate far below the ``1e-12`` level where
    the trace formula is swamped by rounding-level non-unitarity.
    """
    U, V = _pair(U, V)
    d = U.shape[0]
    theta = np.angle(np.linalg.eigvals(V.conj().T @ U))
    diff = theta[:, None] - theta[None, :]
    return float(2.0 * np.sum(np.sin(0.5 * diff) ** 2) / (d * (d + 1)))


def global_phase(U, V) -> float:
    """Phase ``alpha`` such that ``U ~ exp(i alpha) V``, read from the largest entry of ``V^dag U``."""
    U, V = _pair(U, V)
    M = V.conj().T @ U
    idx = np.unravel_index(np.argmax(np.abs(M)), M.shape)
    return float(np.angle(M[idx]))


def equal_up_to_global_phase(U, V, tol: float = 1e-10) -> bool:
    U, V = _pair(U, V)
    alpha = global_phase(U, V)
    return bool(np.abs(U - np.exp(1j * alpha) * V).max() <= tol)


def unitarity_error(U) -> float:
    """``max |U^dag U - I|``."""
    U = np.asarray(U, dtype=complex)
    _check_square(U)
    return float(np.abs(U.conj().T @ U - np.eye(U.shape[0])).max())


def adjoint_rep(U) -> np.ndarray:
    """Adjoint representation ``R_ij = Tr(U^dag s_i U s_j) / 2`` of a 2x2 unitary."""
    U = np.asarray(U, dtype=complex)
    if U.shape != (2, 2):
        raise DimensionError(f"adjoint_rep needs a 2x2 unitary, got {U.shape}")
    R = np.empty((3, 3))
    for i, si in enumerate(PAULIS):
        conj = U.conj().T @ si @ U
        for j, sj in enumerate(PAULIS):
            R[i, j] = 0.5 * np.trace(conj @ sj).real
    return R

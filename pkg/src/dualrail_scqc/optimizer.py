"""Synthesis of dephasing- and crosstalk-robust ancilla pulses.

Two designs are supported:

* ZZ(pi/2) step: one ancilla waveform that, under detuning ``+chi/2`` and
  ``-chi/2``, implements ``R_z(-pi/2)`` and ``R_z(+pi/2)`` with closed error
  curves in both sectors.
* Swap-step ancilla: a waveform implementing ``Z2`` with a closed error curve
  whose tangent is orthogonal (overlap matrix ``M = 0``) to the tangent of the
  beam-splitter swap curve.

Each cost has a residual vector whose squared norm equals the cost, so the
search can use a trust-region least-squares polish.
"""
from __future__ import annotations

from dataclasses import asdict, dataclass, field
from typing import Callable

import numpy as np
from scipy.optimize import least_squares, minimize

from .crosstalk import PulsePair, tangent_overlap_matrix
from .dualrail import BeamSplitterDrive
from .geometry import (
    ControlPulse, closure_gap, error_curve, evolution, first_order_error, pulse_hamiltonian,
    tangents_from_unitaries, vector_area,
)
from .linalg import PAULIS, Z, TimeGrid, gate_infidelity, propagate
from .protocols import rz, shifted_pulse, swap_as_pulse

__all__ = [
    "OptimizationError", "PulseAnsatz", "CostWeights", "OptimizeResult", "SynthesisResult",
    "CONVERGENCE_TOL", "VERIFY_TOL", "optimize", "cost_zz_half", "residuals_zz_half",
    "cost_swap_ancilla", "residuals_swap_ancilla", "synthesize_zz_half_pulse",
    "synthesize_swap_ancilla_pulse", "verify_zz_half_pulse", "verify_swap_ancilla_pulse",
    "ZZ_HALF_TARGETS",
]

CONVERGENCE_TOL = 1e-8
# verifier thresholds sit below the acceptance thresholds
VERIFY_TOL = 1e-7

# H+ (detuning +chi/2) and H- (detuning -chi/2) targets
ZZ_HALF_TARGETS = {1: rz(-np.pi / 2), -1: rz(np.pi / 2)}


class OptimizationError(RuntimeError):
    """The cost became non-finite during the search."""


@dataclass(frozen=True)
class PulseAnsatz:
    """Endpoint-vanishing sine series for ``Omega2`` and an optional cosine series for ``Delta2``.

    ``Omega2(t) = sum_k c_k sin(k pi t / T_g)`` for ``k = 1..K`` and
    ``Delta2(t) = sum_k d_k cos(k pi t / T_g)`` for ``k = 0..len(d)-1``.
    Negative ``Omega2`` is realised with phase ``pi``.
    """

    T_g: float
    coefficients: tuple
    detuning: tuple = ()
    n_steps: int = 2000

    def __post_init__(self):
        if not self.T_g > 0:
            raise ValueError(f"T_g must be positive, got {self.T_g}")
        object.__setattr__(self, "coefficients", tuple(float(c) for c in self.coefficients))
        object.__setattr__(self, "detuning", tuple(float(c) for c in self.detuning))
        if not self.coefficients:
            raise ValueError("ansatz needs at least one sine coefficient")

    @property
    def K(self) -> int:
        return len(self.coefficients)

    @property
    def grid(self) -> TimeGrid:
        return TimeGrid(self.T_g, self.n_steps)

    @classmethod
    def from_vector(cls, T_g: float, x, K: int, n_steps: int = 2000) -> "PulseAnsatz":
        x = np.asarray(x, dtype=float)
        return cls(T_g, tuple(x[:K]), tuple(x[K:]), n_steps)

    def vector(self) -> np.ndarray:
        return np.array(self.coefficients + self.detuning)

    def omega(self, t) -> np.ndarray:
        k = np.arange(1, self.K + 1)
        return np.sin(np.pi * np.outer(t, k) / self.T_g) @ np.array(self.coefficients)

    def delta(self, t) -> np.ndarray:
        if not self.detuning:
            return np.zeros_like(np.asarray(t, dtype=float))
        k = np.arange(len(self.detuning))
        return np.cos(np.pi * np.outer(t, k) / self.T_g) @ np.array(self.detuning)

    def pulse(self) -> ControlPulse:
        t = self.grid.times
        return ControlPulse.from_signed(self.grid, self.omega(t), self.delta(t))


@dataclass(frozen=True)
class CostWeights:
    w_gate: float = 1.0
    w_closure: float = 10.0
    w_area: float = 0.0
    w_ortho: float = 10.0

    def __post_init__(self):
        vals = asdict(self).values()
        if any(not (w >= 0 and np.isfinite(w)) for w in vals):
            raise ValueError(f"weights must be finite and non-negative: {self}")
        if not any(w > 0 for w in vals):
            raise ValueError("at least one weight must be positive")


@dataclass(frozen=True)
class OptimizeResult:
    coefficients: np.ndarray
    final_cost: float
    converged: bool
    seed: int
    budget: int
    evaluations: int
    restart: int

    def report(self) -> dict:
        return {"seed": self.seed, "budget": self.budget, "final_cost": self.final_cost,
                "converged": self.converged, "coefficients": self.coefficients.tolist(),
                "evaluations": self.evaluations, "restart": self.restart}


class _Exhausted(Exception):
    pass


class _Tracker:
    """Counts evaluations against a budget and remembers the best point seen."""

    def __init__(self, fn, budget: int, to_cost: Callable[[np.ndarray], float]):
        self.fn = fn
        self.budget = budget
        self.to_cost = to_cost
        self.count = 0
        self.best_x = None
        self.best_cost = np.inf

    def __call__(self, x):
        if self.count >= self.budget:
            raise _Exhausted
        self.count += 1
        val = self.fn(x)
        c = self.to_cost(val)
        if not np.isfinite(c):
            raise OptimizationError(f"non-finite cost at evaluation {self.count}, x = {np.asarray(x).tolist()}")
        if c < self.best_cost:
            self.best_cost = c
            self.best_x = np.array(x, dtype=float)
        return val


def optimize(cost: Callable[[np.ndarray], float], initial, seed: int = 0, budget: int = 5000, *,
             restarts: int = 8, residuals: Callable[[np.ndarray], np.ndarray] | None = None,
             init_scale: float = 1.0, tol: float = CONVERGENCE_TOL) -> OptimizeResult:
    """Derivative-free search with seeded restarts.

    Restart 0 starts at ``initial``; restart ``i`` starts at
    ``initial + N(0, init_scale)`` drawn from ``numpy.random.default_rng(seed)``.
    Each restart may spend ``budget`` evaluations. Without ``residuals`` a
    Nelder-Mead simplex minimizes ``cost``; with ``residuals`` a trust-region
    least-squares search with finite-difference Jacobians minimizes
    ``||residuals||^2``. The best point over all restarts (ties broken by
    restart index) is re-scored with ``cost``. ``converged`` iff that cost is
    below ``tol``; later restarts are skipped once a restart converges.
    """
    if budget < 1:
        raise ValueError(f"budget must be >= 1, got {budget}")
    x0 = np.asarray(initial, dtype=float)
    rng = np.random.default_rng(seed)
    starts = [x0] + [x0 + rng.normal(0.0, init_scale, x0.shape) for _ in range(restarts - 1)]
    best = None
    total = 0
    for i, start in enumerate(starts):
        if residuals is None:
            tr = _Tracker(cost, budget, float)
            try:
                minimize(tr, start, method="Nelder-Mead",
                         options={"maxfev": budget, "xatol": 1e-14, "fatol": 1e-16,
                                  "adaptive": x0.size > 4})
            except _Exhausted:
                pass
        else:
            tr = _Tracker(residuals, budget, lambda r: float(np.dot(r, r)))
            try:
                least_squares(tr, start, method="trf", x_scale="jac", ftol=1e-15, xtol=1e-15,
                              gtol=1e-15, max_nfev=budget)
            except _Exhausted:
                pass
        total += tr.count
        if tr.best_x is None:
            continue
        c = float(cost(tr.best_x))
        if not np.isfinite(c):
            raise OptimizationError(f"non-finite cost at restart {i}")
        if best is None or c < best[0]:
            best = (c, i, tr.best_x)
        if c < tol:
            break
    c, i, x = best
    return OptimizeResult(x, c, bool(c < tol), int(seed), int(budget), total, i)


# ---------------------------------------------------------------- ZZ(pi/2) step

def _vector_part(W: np.ndarray) -> np.ndarray:
    v = np.array([np.trace(W @ s) / 2 for s in PAULIS])
    return np.concatenate([v.real, v.imag])


def cost_zz_half(ansatz: PulseAnsatz, chi: float, weights: CostWeights = CostWeights()) -> float:
    """Gate, closure and area cost of a ZZ(pi/2)-step pulse summed over both sectors."""
    pulse = ansatz.pulse()
    total = 0.0
    for s, target in ZZ_HALF_TARGETS.items():
        eff = shifted_pulse(pulse, s * chi / 2)
        U = propagate(pulse_hamiltonian(eff), eff.grid)
        total += weights.w_gate * gate_infidelity(U, target)
        if weights.w_closure or weights.w_area:
            curve = error_curve(eff)
            total += weights.w_closure * closure_gap(curve) ** 2
            total += weights.w_area * float(np.sum(vector_area(curve) ** 2))
    return float(total)


def residuals_zz_half(ansatz: PulseAnsatz, chi: float,
                      weights: CostWeights = CostWeights()) -> np.ndarray:
    """Residual vector with ``||r||^2`` equal to :func:`cost_zz_half` up to discretization.

    For a 2x2 unitary ``W = V^dag U`` with Pauli components ``w_k``,
    ``1 - F = (2/3) sum_k |w_k|^2``.
    """
    pulse = ansatz.pulse()
    out = []
    for s, target in ZZ_HALF_TARGETS.items():
        Us = evolution(pulse, s * chi / 2)
        T = tangents_from_unitaries(Us)
        r = np.trapezoid(T, pulse.times, axis=0)
        out.append(np.sqrt(weights.w_gate * 2 / 3) * _vector_part(target.conj().T @ Us[-1]))
        out.append(np.sqrt(weights.w_closure) * r)
        if weights.w_area:
            rs = np.cumsum(np.vstack([np.zeros(3), 0.5 * (T[1:] + T[:-1]) * pulse.grid.dt]), axis=0)
            out.append(np.sqrt(weights.w_area) * 0.5 * np.cross(rs[:-1], rs[1:]).sum(axis=0))
    return np.concatenate(out)


@dataclass(frozen=True)
class SynthesisResult:
    """A verified pulse, or ``pulse=None`` with diagnostics when synthesis failed."""

    pulse: ControlPulse | None
    ansatz: PulseAnsatz
    result: OptimizeResult
    verification: dict = field(default_factory=dict)

    @property
    def ok(self) -> bool:
        return self.pulse is not None

    def report(self) -> dict:
        rep = self.result.report()
        rep.update({"T_g": self.ansatz.T_g, "K": self.ansatz.K,
                    "K_detuning": len(self.ansatz.detuning), "n_steps": self.ansatz.n_steps,
                    "verification": self.verification, "ok": self.ok})
        return rep


def verify_zz_half_pulse(pulse: ControlPulse, chi: float) -> dict:
    """Independent checks: per-sector gate infidelity and first-order dephasing error."""
    out = {}
    for s, name in ((1, "plus"), (-1, "minus")):
        eff = shifted_pulse(pulse, s * chi / 2)
        U = propagate(pulse_hamiltonian(eff), eff.grid)
        out[f"infidelity_{name}"] = gate_infidelity(U, ZZ_HALF_TARGETS[s])
        out[f"first_order_error_{name}"] = first_order_error(eff)
    out["passed"] = bool(all(v < VERIFY_TOL for v in out.values()))
    return out


def synthesize_zz_half_pulse(chi: float, T_g: float | None = None, K: int = 6, seed: int = 0,
                             budget: int = 5000, restarts: int = 8,
                             weights: CostWeights = CostWeights(), n_steps: int = 2000,
                             initial=None) -> SynthesisResult:
    """Search the sine ansatz for a robust ZZ(pi/2)-step pulse.

    ``T_g`` defaults to ``6 pi / chi``. ``initial`` warm-starts restart 0
    (shorter vectors are zero-padded, so a ``K`` solution seeds a ``2K`` search).
    """
    T_g = 6 * np.pi / chi if T_g is None else float(T_g)
    x0 = np.random.default_rng(seed).normal(0.0, chi, K) if initial is None else \
        np.pad(np.asarray(initial, dtype=float), (0, K - len(initial)))

    def make(x):
        return PulseAnsatz.from_vector(T_g, x, K, n_steps)

    res = optimize(lambda x: cost_zz_half(make(x), chi, weights), x0, seed, budget,
                   restarts=restarts, residuals=lambda x: residuals_zz_half(make(x), chi, weights),
                   init_scale=chi)
    ansatz = make(res.coefficients)
    pulse = ansatz.pulse()
    ver = verify_zz_half_pulse(pulse, chi)
    ok = res.converged and ver["passed"]
    return SynthesisResult(pulse if ok else None, ansatz, res, ver)


# ---------------------------------------------------------------- swap-step ancilla

def _swap_tangents(drive: BeamSplitterDrive) -> np.ndarray:
    return tangents_from_unitaries(evolution(swap_as_pulse(drive)))


def cost_swap_ancilla(ansatz: PulseAnsatz, drive: BeamSplitterDrive,
                      weights: CostWeights = CostWeights()) -> float:
    """Gate (``Z2``), closure, area and orthogonality cost of a swap-step ancilla pulse.

    The overlap matrix is taken on normalized time ``[0, 1]``.
    """
    pulse = ansatz.pulse()
    if pulse.grid != drive.grid:
        raise ValueError("ancilla ansatz and swap drive must share a grid")
    U = propagate(pulse_hamiltonian(pulse), pulse.grid)
    curve = error_curve(pulse)
    M = tangent_overlap_matrix(PulsePair(swap_as_pulse(drive), pulse))
    return float(weights.w_gate * gate_infidelity(U, Z)
                 + weights.w_closure * closure_gap(curve) ** 2
                 + weights.w_area * float(np.sum(vector_area(curve) ** 2))
                 + weights.w_ortho * float(np.sum(M ** 2)))


def residuals_swap_ancilla(ansatz: PulseAnsatz, drive: BeamSplitterDrive, T_swap: np.ndarray,
                           weights: CostWeights = CostWeights()) -> np.ndarray:
    pulse = ansatz.pulse()
    Us = evolution(pulse)
    T = tangents_from_unitaries(Us)
    t = pulse.times
    r = np.trapezoid(T, t, axis=0)
    M = np.trapezoid(T_swap[:, :, None] * T[:, None, :], t / pulse.grid.duration, axis=0)
    out = [np.sqrt(weights.w_gate * 2 / 3) * _vector_part(Z @ Us[-1]),
           np.sqrt(weights.w_closure) * r, np.sqrt(weights.w_ortho) * M.ravel()]
    if weights.w_area:
        rs = np.cumsum(np.vstack([np.zeros(3), 0.5 * (T[1:] + T[:-1]) * pulse.grid.dt]), axis=0)
        out.append(np.sqrt(weights.w_area) * 0.5 * np.cross(rs[:-1], rs[1:]).sum(axis=0))
    return np.concatenate(out)


def verify_swap_ancilla_pulse(pulse: ControlPulse, drive: BeamSplitterDrive) -> dict:
    """Independent checks: ``Z2`` fidelity, first-order dephasing error and overlap norm."""
    U = propagate(pulse_hamiltonian(pulse), pulse.grid)
    M = tangent_overlap_matrix(PulsePair(swap_as_pulse(drive), pulse))
    out = {"infidelity": gate_infidelity(U, Z), "first_order_error": first_order_error(pulse),
           "overlap_norm": float(np.linalg.norm(M))}
    out["passed"] = bool(all(v < VERIFY_TOL for v in out.values()))
    return out


def synthesize_swap_ancilla_pulse(drive: BeamSplitterDrive, K: int = 6, K_detuning: int = 6,
                                  seed: int = 0, budget: int = 5000, restarts: int = 8,
                                  weights: CostWeights = CostWeights(),
                                  initial=None) -> SynthesisResult:
    """Search sine ``Omega2`` plus cosine ``Delta2`` for a crosstalk-robust ``Z2`` pulse.

    The ancilla pulse lives on the swap drive's grid. The design is
    independent of ``chi``: the residual dispersive term is treated as the
    perturbation being cancelled.
    """
    T_g = drive.grid.duration
    n_steps = drive.grid.n_steps
    if drive.grid.t_start != 0.0:
        raise ValueError("swap drive grid must start at t = 0")
    scale = 10.0 / T_g
    n = K + K_detuning
    x0 = np.random.default_rng(seed).normal(0.0, scale, n) if initial is None else \
        np.pad(np.asarray(initial, dtype=float), (0, n - len(initial)))
    T_swap = _swap_tangents(drive)

    def make(x):
        return PulseAnsatz.from_vector(T_g, x, K, n_steps)

    res = optimize(lambda x: cost_swap_ancilla(make(x), drive, weights), x0, seed, budget,
                   restarts=restarts,
                   residuals=lambda x: residuals_swap_ancilla(make(x), drive, T_swap, weights),
                   init_scale=scale)
    ansatz = make(res.coefficients)
    pulse = ansatz.pulse()
    ver = verify_swap_ancilla_pulse(pulse, drive)
    ok = res.converged and ver["passed"]
    return SynthesisResult(pulse if ok else None, ansatz, res, ver)

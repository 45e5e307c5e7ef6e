"""First-order cancellation of quasi-static ZZ crosstalk between two driven qubits.

With ``H = H1 + H2 + xi Z1 Z2`` the leading Magnus term is
``xi sum_ij M_ij s1_i s2_j`` where ``M = int_0^1 T1(t) T2(t)^T dt`` is the
outer-product integral of the two error-curve tangents on the common
normalized time ``[0, 1]``. ``M = 0`` cancels the crosstalk to first order.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .geometry import (
    ControlPulse, SpaceCurve, arc_length_reparametrize, derivative, evolution,
    pulse_hamiltonian, tangents_from_unitaries,
)
from .linalg import (
    I2, Z, DimensionError, HamiltonianSampler, TimeGrid, gate_infidelity, propagate,
    propagate_checkpointed,
)
from .sweep import SweepTable, run_sweep

__all__ = [
    "PulsePair", "overlap_matrix", "tangent_overlap_matrix", "curve_overlap_matrix",
    "square_pulse_pair", "two_qubit_crosstalk_hamiltonian", "two_qubit_unitary",
    "first_order_crosstalk_operator", "crosstalk_sweep", "ZZ",
]

ZZ = np.kron(Z, Z)


@dataclass(frozen=True)
class PulsePair:
    """Two single-qubit pulses on a shared grid normalized to ``T_g = 1``."""

    pulse1: ControlPulse
    pulse2: ControlPulse

    def __post_init__(self):
        p1 = _normalized(self.pulse1)
        p2 = _normalized(self.pulse2)
        if p1.grid != p2.grid:
            raise DimensionError(
                f"pulse grids differ after normalization: {p1.grid} vs {p2.grid}")
        object.__setattr__(self, "pulse1", p1)
        object.__setattr__(self, "pulse2", p2)

    @property
    def grid(self) -> TimeGrid:
        return self.pulse1.grid

    def swapped(self) -> "PulsePair":
        return PulsePair(self.pulse2, self.pulse1)


def _normalized(pulse: ControlPulse) -> ControlPulse:
    if pulse.grid.t_start == 0.0 and pulse.grid.t_end == 1.0:
        return pulse
    return pulse.rescaled(1.0)


def overlap_matrix(T1, T2, times) -> np.ndarray:
    """``M_ij = int T1_i T2_j dt`` by the trapezoidal rule."""
    T1 = np.asarray(T1, dtype=float)
    T2 = np.asarray(T2, dtype=float)
    if T1.shape != T2.shape or T1.shape[1:] != (3,) or T1.shape[0] != len(times):
        raise DimensionError(f"tangent arrays {T1.shape} and {T2.shape} do not match the grid")
    return np.trapezoid(T1[:, :, None] * T2[:, None, :], times, axis=0)


def tangent_overlap_matrix(pair: PulsePair) -> np.ndarray:
    """Crosstalk matrix of a pulse pair from the propagated tangents ``U^dag Z U``."""
    T1 = tangents_from_unitaries(evolution(pair.pulse1))
    T2 = tangents_from_unitaries(evolution(pair.pulse2))
    return overlap_matrix(T1, T2, pair.grid.times)


def curve_overlap_matrix(curve1: SpaceCurve, curve2: SpaceCurve) -> np.ndarray:
    """Crosstalk matrix of two curves after unit-length arc-length normalization."""
    c1 = arc_length_reparametrize(curve1, normalize=True)
    c2 = arc_length_reparametrize(curve2, normalize=True)
    if c1.grid != c2.grid:
        raise DimensionError("curves must share the number of samples")
    T1 = derivative(c1.r, c1.grid.dt)
    T2 = derivative(c2.r, c2.grid.dt)
    return overlap_matrix(T1, T2, c1.times)


def square_pulse_pair(kappa1: float, kappa2: float, n_steps: int = 2000) -> PulsePair:
    """Constant Rabi rates ``kappa1``, ``kappa2`` on ``[0, 1]`` with zero phase and detuning.

    Each pulse alone is an x rotation by its ``kappa``.
    """
    if kappa1 == 0 or kappa2 == 0:
        raise ValueError("square pulses need non-zero curvature")
    return PulsePair(ControlPulse.square(1.0, abs(kappa1), n_steps),
                     ControlPulse.square(1.0, abs(kappa2), n_steps))


def two_qubit_crosstalk_hamiltonian(pair: PulsePair, xi: float) -> HamiltonianSampler:
    """``H1 (x) I + I (x) H2 + xi Z (x) Z``."""
    h1 = pulse_hamiltonian(pair.pulse1)
    h2 = pulse_hamiltonian(pair.pulse2)

    def fn(t):
        a, b = h1.fn(t), h2.fn(t)
        H = np.einsum("kij,ab->kiajb", a, I2).reshape(len(t), 4, 4)
        H = H + np.einsum("ij,kab->kiajb", I2, b).reshape(len(t), 4, 4)
        return H + xi * ZZ

    return HamiltonianSampler(4, fn)


def two_qubit_unitary(pair: PulsePair, xi: float = 0.0) -> np.ndarray:
    return propagate(two_qubit_crosstalk_hamiltonian(pair, xi), pair.grid)


def first_order_crosstalk_operator(pair: PulsePair) -> np.ndarray:
    """``int_0^1 U0^dag (Z (x) Z) U0 dt`` from the noiseless two-qubit propagation."""
    Us = propagate_checkpointed(two_qubit_crosstalk_hamiltonian(pair, 0.0), pair.grid)
    toggled = Us.conj().transpose(0, 2, 1) @ ZZ @ Us
    return np.trapezoid(toggled, pair.grid.times, axis=0)


def crosstalk_sweep(pair: PulsePair, target, xi_grid, threads: int = 1) -> SweepTable:
    """Infidelity ``1 - F(U(xi), target)`` over ``xi_grid`` with the small-xi log-log slope."""
    target = np.asarray(target, dtype=complex)

    def point(xi):
        return gate_infidelity(two_qubit_unitary(pair, xi), target)

    return run_sweep(point, xi_grid, axis="xi", metric="infidelity", threads=threads)

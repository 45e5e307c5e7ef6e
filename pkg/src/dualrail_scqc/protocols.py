"""Joint-parity erasure checks and the logical ZZ construction.

Step unitaries of the three-step protocol act on ``q4 (x) ancilla`` where
``q4 = span{|00>, |01>, |10>, |11>}``; the single-shot baseline acts on the
full truncated space. Ancilla pulses are stored in the frame where the
drive detuning already contains the ``chi/2`` offset, so a pulse with
``delta = 0`` corresponds to ``Delta2 = chi/2`` in the native Hamiltonian.
"""
from __future__ import annotations

import warnings
from dataclasses import dataclass, field
from typing import Callable, Sequence

import numpy as np

from .dualrail import (
    CODESPACE_Q4, Q4_LABELS, X1_Q4, Z1_Q4, BeamSplitterDrive, DualRailParams,
    NoiseSample, basis_index, native_hamiltonian, photon_sector_indices,
)
from .geometry import ControlPulse, first_order_error, pulse_hamiltonian
from .linalg import (
    I2, X, Y, Z, DimensionError, HamiltonianSampler, TimeGrid, gate_infidelity, global_phase,
    matrix_exp, propagate,
)
from .sweep import SweepTable, run_sweep

__all__ = [
    "RobustnessWarning", "TruncationWarning", "AncillaLeakError",
    "ProtocolStep", "JointParityResult", "ErasureCheckStats",
    "rz", "zz_gate", "ideal_zz_half", "ideal_swap", "ideal_joint_parity", "compose_three_step",
    "ideal_single_shot", "single_shot_joint_parity", "shifted_pulse", "zz_half_step",
    "naive_zz_half_pulse", "gaussian_swap_drive", "naive_swap_ancilla_pulse",
    "swap_as_pulse", "swap_step", "simulate_step", "three_step_joint_parity",
    "q4_sectors", "sector_phases", "equal_per_sector",
    "erasure_check_stats", "logical_zz", "ideal_logical_zz", "concurrence",
    "noise_sweep_protocol", "ANCILLA_PRE", "ANCILLA_POST",
]


class RobustnessWarning(UserWarning):
    """A step pulse does not satisfy its first-order robustness precheck."""


class TruncationWarning(UserWarning):
    """The Fock cutoff is too small for a faithful two-photon simulation."""


class AncillaLeakError(RuntimeError):
    """The ancilla did not return to ``|g>`` at the end of a sequence."""


# exp(-i pi/4 Y2) and its inverse, the sandwich of the erasure circuit
ANCILLA_PRE = np.cos(np.pi / 4) * I2 - 1j * np.sin(np.pi / 4) * Y
ANCILLA_POST = ANCILLA_PRE.conj().T

_P_NA0 = np.diag([1.0, 1.0, 0.0, 0.0]).astype(complex)
_P_NA1 = np.diag([0.0, 0.0, 1.0, 1.0]).astype(complex)
_P00 = np.diag([1.0, 0, 0, 0]).astype(complex)
_P11 = np.diag([0, 0, 0, 1.0]).astype(complex)
_I4 = np.eye(4, dtype=complex)


def rz(theta: float) -> np.ndarray:
    """``R_z(theta) = exp(i theta Z / 2)``."""
    return np.diag([np.exp(0.5j * theta), np.exp(-0.5j * theta)])


def zz_gate(theta: float) -> np.ndarray:
    """``ZZ(theta) = exp(-i theta/2 Z (x) Z)`` on two qubits."""
    return np.diag(np.exp(-0.5j * theta * np.array([1, -1, -1, 1], dtype=float)))


# ---------------------------------------------------------------- ideal algebra

def ideal_zz_half(s: int = 1) -> np.ndarray:
    """Ideal ZZ(pi/2) step on ``q4 (x) ancilla``.

    ``s=+1`` gives ``R_z(pi/2)`` on the ``n_a = 0`` blocks and
    ``R_z(-pi/2)`` on ``n_a = 1``; on the codespace this is ``ZZ(pi/2)``.
    ``s=-1`` swaps the two rotations, which is what the physical step with
    ``Delta2 = chi/2`` produces.
    """
    return np.kron(_P_NA0, rz(s * np.pi / 2)) + np.kron(_P_NA1, rz(-s * np.pi / 2))


def ideal_swap() -> np.ndarray:
    """``(|00><00| + |11><11| + X1) (x) Z2``."""
    return np.kron(_P00 + _P11 + X1_Q4, Z)


def compose_three_step(V1, V2, V3) -> np.ndarray:
    """``V3 V2 V1`` after a dimension check."""
    mats = [np.asarray(V, dtype=complex) for V in (V1, V2, V3)]
    shapes = {m.shape for m in mats}
    if len(shapes) != 1 or mats[0].ndim != 2 or mats[0].shape[0] != mats[0].shape[1]:
        raise DimensionError(f"step unitaries have incompatible shapes {[m.shape for m in mats]}")
    return mats[2] @ mats[1] @ mats[0]


def ideal_joint_parity(s: int = 1) -> np.ndarray:
    """``X1 (x) Z2 + i s (|00><00| - |11><11|) (x) I2``, the composition of ideal steps."""
    return np.kron(X1_Q4, Z) + 1j * s * np.kron(_P00 - _P11, I2)


def ideal_single_shot(params: DualRailParams, n_total_max: int = 2) -> np.ndarray:
    """``1 (x) |g><g| + exp(i pi N) (x) |f><f|`` restricted to ``N <= n_total_max``."""
    idx = np.concatenate([photon_sector_indices(params, n) for n in range(n_total_max + 1)])
    idx.sort()
    diag = []
    for k in idx:
        cav, anc = divmod(int(k), 2)
        na, nb = divmod(cav, params.cavity_dim)
        diag.append(1.0 if anc == 0 else (-1.0) ** (na + nb))
    return np.diag(np.asarray(diag, dtype=complex))


# ---------------------------------------------------------------- single-shot baseline

@dataclass(frozen=True)
class JointParityResult:
    """Protocol unitary plus bookkeeping.

    ``frame`` names a logical Pauli left on the DR qubit that is tracked in
    software rather than undone (``"X1"`` for the three-step protocol).
    ``sector_phases`` maps a sector label to the phase of the simulated block
    relative to the ideal one.
    """

    unitary: np.ndarray
    space: str
    frame: str | None = None
    sector_phases: dict = field(default_factory=dict)
    diagnostics: dict = field(default_factory=dict)


def _low_photon_indices(params: DualRailParams, n_total_max: int = 2) -> np.ndarray:
    idx = np.concatenate([photon_sector_indices(params, n) for n in range(n_total_max + 1)])
    idx.sort()
    return idx


def _single_shot_full(params: DualRailParams, noise: NoiseSample) -> np.ndarray:
    T = 2 * np.pi / params.chi
    grid = TimeGrid(T, 1)
    drive = BeamSplitterDrive(grid, np.sqrt(3) / 2 * params.chi, 0.0, 0.0)
    H = native_hamiltonian(params, drive, None, noise)(0.0)
    return matrix_exp(-1j * T * H)


def single_shot_joint_parity(params: DualRailParams, noise: NoiseSample | None = None,
                             reference_n_max: int = 6) -> JointParityResult:
    """Constant beam splitter ``g = sqrt(3)/2 chi`` for ``T = 2 pi / chi`` on the full space.

    The Hamiltonian is time independent, so the propagator is one matrix
    exponential. With ``n_max < 4`` a :class:`TruncationWarning` is issued and
    ``diagnostics["truncation_error"]`` holds the largest deviation of the
    ``N <= 2`` block from the same block at ``reference_n_max``.
    """
    noise = noise or NoiseSample()
    U = _single_shot_full(params, noise)
    idx = _low_photon_indices(params)
    block = U[np.ix_(idx, idx)]
    ideal = ideal_single_shot(params)
    phases = {}
    for n in range(3):
        sel = np.searchsorted(idx, photon_sector_indices(params, n))
        phases[f"N={n}"] = global_phase(block[np.ix_(sel, sel)], ideal[np.ix_(sel, sel)])
    diagnostics = {}
    if params.n_max < 4:
        ref_params = DualRailParams(params.chi, reference_n_max)
        ref_U = _single_shot_full(ref_params, noise)
        ref_idx = _low_photon_indices(ref_params)
        err = float(np.abs(ref_U[np.ix_(ref_idx, ref_idx)] - block).max())
        diagnostics["truncation_error"] = err
        warnings.warn(f"n_max={params.n_max} < 4: two-photon block deviates by {err:.3e} "
                      f"from n_max={reference_n_max}", TruncationWarning, stacklevel=2)
    return JointParityResult(U, "full", None, phases, diagnostics)


# ---------------------------------------------------------------- ZZ(pi/2) steps

def shifted_pulse(pulse: ControlPulse, detuning: float) -> ControlPulse:
    """Same pulse with ``detuning`` added to its detuning samples."""
    return ControlPulse(pulse.grid, pulse.omega, pulse.phi, pulse.delta + detuning)


def naive_zz_half_pulse(chi: float, n_steps: int = 2000) -> ControlPulse:
    """``Omega2 = 0`` for ``T = pi / chi``: exact ``R_z(-+pi/2)`` blocks, no robustness."""
    return ControlPulse(TimeGrid(np.pi / chi, n_steps), 0.0, 0.0, 0.0)


def _q4_ancilla_blockdiag(U_na0: np.ndarray, U_na1: np.ndarray) -> np.ndarray:
    return np.kron(_P_NA0, U_na0) + np.kron(_P_NA1, U_na1)


def zz_half_step(pulse: ControlPulse, chi: float, gamma: float = 0.0, sign: int = 1,
                 check: bool = True, tol: float = 1e-6) -> np.ndarray:
    """ZZ(pi/2) step on ``q4 (x) ancilla``.

    Blocks with ``n_a = 0`` evolve under ``H+ = pulse + sign chi/4 Z2 + gamma/2 Z2``
    and blocks with ``n_a = 1`` under ``H-`` with the opposite ``chi`` sign.
    ``sign=+1`` is the physical assignment; a target of ``R_z(-pi/2)`` on
    ``H+`` then matches :func:`ideal_zz_half` with ``s=-1``.
    With ``check`` a :class:`RobustnessWarning` is issued when either effective
    pulse leaves its first-order dephasing error above ``tol``.
    """
    if sign not in (1, -1):
        raise ValueError(f"sign must be +1 or -1, got {sign}")
    half = sign * chi / 2
    if check:
        worst = max(first_order_error(shifted_pulse(pulse, s * half)) for s in (1, -1))
        if worst > tol:
            warnings.warn(f"ZZ step pulse is not dephasing robust (first-order error {worst:.3e})",
                          RobustnessWarning, stacklevel=2)
    U_plus = propagate(pulse_hamiltonian(pulse, gamma + half), pulse.grid)
    U_minus = propagate(pulse_hamiltonian(pulse, gamma - half), pulse.grid)
    return _q4_ancilla_blockdiag(U_plus, U_minus)


# ---------------------------------------------------------------- swap step

def gaussian_swap_drive(T: float, sigma_ratio: float = 0.2, n_steps: int = 2000) -> BeamSplitterDrive:
    """Truncated Gaussian beam splitter centred at ``T/2`` with area ``pi``."""
    if not T > 0:
        raise ValueError(f"T must be positive, got {T}")
    if not 0 < sigma_ratio <= 0.5:
        raise ValueError(f"sigma_ratio must lie in (0, 0.5], got {sigma_ratio}")
    grid = TimeGrid(T, n_steps)
    t = grid.times
    shape = np.exp(-0.5 * ((t - T / 2) / (sigma_ratio * T)) ** 2)
    g = np.pi * shape / np.trapezoid(shape, t)
    return BeamSplitterDrive(grid, g, 0.0, 0.0)


def naive_swap_ancilla_pulse(drive: BeamSplitterDrive) -> ControlPulse:
    """``Omega2 = 0`` with ``Delta2 = pi / T``: exact ``Z2`` up to phase, no robustness."""
    return ControlPulse(drive.grid, 0.0, 0.0, np.pi / drive.grid.duration)


def swap_as_pulse(drive: BeamSplitterDrive) -> ControlPulse:
    """The DR-qubit view of a beam splitter: ``(g/2)(cos phi X1 - sin phi Y1) + (delta/2) Z1``."""
    return ControlPulse(drive.grid, drive.g, -drive.varphi, drive.delta)


def _swap_sampler(drive: BeamSplitterDrive, ancilla_pulse: ControlPulse, xi: float,
                  gamma: float) -> HamiltonianSampler:
    ts = drive.grid.times
    anc = pulse_hamiltonian(ancilla_pulse, gamma)
    up = np.zeros((4, 4), dtype=complex)
    up[2, 1] = 1.0  # a^dag b |01> = |10>
    na = _P_NA1
    static = -0.25 * xi * np.kron(Z1_Q4, Z)

    def fn(t):
        c = np.interp(t, ts, drive.g * np.cos(drive.varphi)) \
            + 1j * np.interp(t, ts, drive.g * np.sin(drive.varphi))
        cav = 0.5 * (c[:, None, None] * up + np.conj(c)[:, None, None] * up.T)
        cav = cav + np.interp(t, ts, drive.delta)[:, None, None] * na
        H = np.einsum("kij,ab->kiajb", cav, I2).reshape(len(t), 8, 8)
        H = H + np.einsum("ij,kab->kiajb", _I4, anc.fn(t)).reshape(len(t), 8, 8)
        return H + static

    return HamiltonianSampler(8, fn)


def swap_step(drive: BeamSplitterDrive, ancilla_pulse: ControlPulse, xi: float = 0.0,
              gamma: float = 0.0, area_tol: float = 1e-6) -> np.ndarray:
    """Swap step ``(g/2) X1 + H2~ + gamma/2 Z2 - xi/4 Z1 Z2`` on ``q4 (x) ancilla``.

    ``Z1`` is extended to ``q4`` as ``2 n_a - 1``. With ``xi = chi`` this is
    the exact projection of the native Hamiltonian.
    """
    if drive.grid != ancilla_pulse.grid:
        raise DimensionError(f"drive grid {drive.grid} differs from ancilla grid {ancilla_pulse.grid}")
    if abs(drive.area - np.pi) > area_tol:
        raise ValueError(f"swap drive area {drive.area:.9f} is not pi")
    return propagate(_swap_sampler(drive, ancilla_pulse, xi, gamma), drive.grid)


# ---------------------------------------------------------------- three-step protocol

@dataclass(frozen=True)
class ProtocolStep:
    """One step of the three-step joint-parity protocol."""

    label: str
    ancilla_pulse: ControlPulse
    drive: BeamSplitterDrive | None = None

    def __post_init__(self):
        if self.label not in ("zz_half_1", "swap", "zz_half_3"):
            raise ValueError(f"unknown step label {self.label!r}")
        if self.label == "swap":
            if self.drive is None:
                raise ValueError("swap step needs a beam-splitter drive")
        elif self.drive is not None and np.any(self.drive.g != 0):
            raise ValueError(f"{self.label} must have g = 0")

    @property
    def duration(self) -> float:
        return self.ancilla_pulse.grid.duration


def simulate_step(step: ProtocolStep, chi: float, noise: NoiseSample, sign: int = 1,
                  check: bool = False) -> np.ndarray:
    if step.label == "swap":
        return swap_step(step.drive, step.ancilla_pulse, noise.xi, noise.gamma)
    return zz_half_step(step.ancilla_pulse, chi, noise.gamma, sign, check=check)


def q4_sectors() -> dict[str, np.ndarray]:
    """Index sets of ``q4 (x) ancilla`` grouped by total photon number."""
    def idx(states):
        return np.array([2 * s + a for s in states for a in (0, 1)])
    return {"N=0": idx([0]), "N=1": idx(list(CODESPACE_Q4)), "N=2": idx([3])}


def sector_phases(U, V, sectors: dict[str, np.ndarray] | None = None) -> dict[str, float]:
    """Phase of each diagonal block of ``U`` relative to the same block of ``V``."""
    sectors = sectors or q4_sectors()
    U = np.asarray(U)
    V = np.asarray(V)
    return {k: global_phase(U[np.ix_(s, s)], V[np.ix_(s, s)]) for k, s in sectors.items()}


def equal_per_sector(U, V, tol: float = 1e-6, sectors: dict[str, np.ndarray] | None = None) -> float:
    """Largest entrywise deviation after aligning each photon-number block's phase.

    Off-block entries of ``U`` count towards the deviation. Returns the
    deviation; compare it against ``tol`` at the call site.
    """
    sectors = sectors or q4_sectors()
    U = np.asarray(U)
    V = np.asarray(V)
    phases = sector_phases(U, V, sectors)
    aligned = np.zeros_like(U)
    for k, s in sectors.items():
        aligned[np.ix_(s, s)] = np.exp(1j * phases[k]) * V[np.ix_(s, s)]
    return float(np.abs(U - aligned).max())


def three_step_joint_parity(steps: Sequence[ProtocolStep], chi: float,
                            noise: NoiseSample | None = None, sign: int = 1) -> JointParityResult:
    """Simulate ``V3 V2 V1`` on ``q4 (x) ancilla``.

    ``sign`` is passed to :func:`zz_half_step`. Per-sector phases are
    reported against :func:`ideal_joint_parity` with ``s = -sign``.
    """
    labels = [s.label for s in steps]
    if labels != ["zz_half_1", "swap", "zz_half_3"]:
        raise ValueError(f"expected steps zz_half_1, swap, zz_half_3; got {labels}")
    noise = noise or NoiseSample()
    V = [simulate_step(s, chi, noise, sign) for s in steps]
    U = compose_three_step(*V)
    return JointParityResult(U, "q4", "X1", sector_phases(U, ideal_joint_parity(-sign)))


# ---------------------------------------------------------------- erasure statistics

@dataclass(frozen=True)
class ErasureCheckStats:
    """Misclassification probabilities averaged over the input set."""

    false_erase_prob: float
    missed_leak_prob: float

    @property
    def worst_case(self) -> float:
        return max(self.false_erase_prob, self.missed_leak_prob)

    def as_dict(self) -> dict:
        return {"false_erase_prob": self.false_erase_prob,
                "missed_leak_prob": self.missed_leak_prob, "worst_case": self.worst_case}


def erasure_check_stats(U, inputs: Sequence[tuple[int, int]] = Q4_LABELS,
                        params: DualRailParams | None = None,
                        odd_outcome: str = "f") -> ErasureCheckStats:
    """Simulate the erasure-check circuit for each cavity basis input.

    The ancilla starts in ``|g>``, is rotated by ``exp(-i pi/4 Y2)``, the
    protocol ``U`` acts, the rotation is undone and the ancilla is measured.
    An outcome equal to ``odd_outcome`` means "odd parity, no erasure".
    ``U`` acts on ``q4 (x) ancilla`` when ``params`` is None, otherwise on the
    full space described by ``params``.
    """
    if odd_outcome not in ("g", "f"):
        raise ValueError(f"odd_outcome must be 'g' or 'f', got {odd_outcome!r}")
    U = np.asarray(U, dtype=complex)
    dim = 8 if params is None else params.dim
    if U.shape != (dim, dim):
        raise DimensionError(f"protocol unitary has shape {U.shape}, expected {(dim, dim)}")
    pre = np.kron(np.eye(dim // 2), ANCILLA_PRE)
    post = np.kron(np.eye(dim // 2), ANCILLA_POST)
    circuit = post @ U @ pre
    keep = 1 if odd_outcome == "f" else 0
    false_erase, missed = [], []
    for na, nb in inputs:
        k = Q4_LABELS.index((na, nb)) * 2 if params is None else basis_index(params, na, nb, 0)
        psi = circuit[:, k]
        p_odd = float(np.sum(np.abs(psi[keep::2]) ** 2))
        if (na + nb) % 2:
            false_erase.append(1.0 - p_odd)
        else:
            missed.append(p_odd)
    fe = float(np.clip(np.mean(false_erase), 0, 1)) if false_erase else 0.0
    ml = float(np.clip(np.mean(missed), 0, 1)) if missed else 0.0
    return ErasureCheckStats(fe, ml)


# ---------------------------------------------------------------- logical ZZ

def _x_rotation(theta: float) -> np.ndarray:
    return np.cos(theta / 2) * I2 - 1j * np.sin(theta / 2) * X


def logical_zz(theta: float, U_jp, leak_tol: float = 1e-6) -> np.ndarray:
    """Cavity unitary of ``e^{i pi/4 Y2} U_JP e^{-i theta/2 X2} U_JP e^{-i pi/4 Y2}``.

    Returns the ``<g| . |g>`` block on ``q4``. Raises :class:`AncillaLeakError`
    when the ``<f| . |g>`` block has norm above ``leak_tol``.
    """
    U_jp = np.asarray(U_jp, dtype=complex)
    if U_jp.shape != (8, 8):
        raise DimensionError(f"U_JP must act on q4 (x) ancilla, got {U_jp.shape}")
    seq = (np.kron(_I4, ANCILLA_POST) @ U_jp @ np.kron(_I4, _x_rotation(theta))
           @ U_jp @ np.kron(_I4, ANCILLA_PRE))
    gg = seq[0::2, 0::2]
    fg = seq[1::2, 0::2]
    leak = float(np.linalg.norm(fg, 2))
    if leak > leak_tol:
        raise AncillaLeakError(f"ancilla not disentangled: ||<f|U|g>|| = {leak:.3e}")
    return gg


def ideal_logical_zz(theta: float) -> np.ndarray:
    """``e^{-i theta/2} diag(-1, e^{i theta}, e^{i theta}, -1)``."""
    e = np.exp(1j * theta)
    return np.exp(-0.5j * theta) * np.diag([-1, e, e, -1])


def concurrence(psi) -> float:
    """Concurrence ``2 |psi00 psi11 - psi01 psi10|`` of a normalized two-qubit pure state."""
    psi = np.asarray(psi, dtype=complex)
    if psi.shape != (4,):
        raise DimensionError(f"expected a 4-vector, got {psi.shape}")
    psi = psi / np.linalg.norm(psi)
    return float(2 * abs(psi[0] * psi[3] - psi[1] * psi[2]))


# ---------------------------------------------------------------- sweeps

def noise_sweep_protocol(builder: Callable[[float], np.ndarray], target, grid, *,
                         axis: str = "gamma", metric: Callable | None = None,
                         threads: int = 1) -> SweepTable:
    """Evaluate ``metric(builder(x), target)`` over ``grid`` and fit the small-noise slope.

    ``metric`` defaults to :func:`gate_infidelity`.
    """
    metric = metric or gate_infidelity
    name = getattr(metric, "__name__", "metric")
    name = "infidelity" if name == "gate_infidelity" else name
    return run_sweep(lambda x: metric(builder(x), target), grid, axis=axis, metric=name,
                     threads=threads)

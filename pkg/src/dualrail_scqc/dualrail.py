"""Two cavities plus a g-f transmon ancilla in a truncated Fock space.

Basis ordering is ``cavity_a (x) cavity_b (x) ancilla`` with the ancilla basis
``(|g>, |f>)`` and ``Z2 = |g><g| - |f><f|``. The dual-rail codewords are
``|0>_L = |10>`` and ``|1>_L = |01>``.
"""
from __future__ import annotations

from dataclasses import dataclass
from typing import NamedTuple

import numpy as np

from .geometry import ControlPulse
from .linalg import I2, X, Y, Z, DimensionError, HamiltonianSampler, TimeGrid

__all__ = [
    "BASIS_CONVENTION", "DualRailParams", "BeamSplitterDrive", "NoiseSample",
    "ModeOperators", "mode_operators", "native_hamiltonian", "schwinger_operators",
    "single_photon_isometry", "q4_isometry", "project_single_photon", "project_q4",
    "classify_state", "basis_index", "basis_label", "photon_sector_indices",
    "Q4_LABELS", "Z1_Q4", "X1_Q4", "CODESPACE_Q4", "LEAKAGE_Q4",
]

BASIS_CONVENTION = {
    "ordering": "cavity_a (x) cavity_b (x) ancilla",
    "ancilla_basis": ["g", "f"],
    "Z2": "|g><g| - |f><f|",
    "codewords": {"0_L": "|10>", "1_L": "|01>"},
    "q4_order": ["|00>", "|01>", "|10>", "|11>"],
}

Q4_LABELS = ((0, 0), (0, 1), (1, 0), (1, 1))
# On {|00>,|01>,|10>,|11>}: Z1 = 2 n_a - 1 reduces to a^dag a - b^dag b on the
# codespace; X1 is the one-photon swap |01> <-> |10>.
Z1_Q4 = np.diag([-1.0, -1.0, 1.0, 1.0]).astype(complex)
X1_Q4 = np.array([[0, 0, 0, 0], [0, 0, 1, 0], [0, 1, 0, 0], [0, 0, 0, 0]], dtype=complex)
CODESPACE_Q4 = (1, 2)
LEAKAGE_Q4 = (0, 3)


@dataclass(frozen=True)
class DualRailParams:
    """Dispersive strength ``chi`` (rad/time) and per-cavity Fock cutoff ``n_max``."""

    chi: float
    n_max: int = 4

    def __post_init__(self):
        if not self.chi > 0:
            raise ValueError(f"chi must be positive, got {self.chi}")
        if int(self.n_max) != self.n_max or self.n_max < 2:
            raise ValueError(f"n_max must be an integer >= 2, got {self.n_max}")

    @property
    def cavity_dim(self) -> int:
        return self.n_max + 1

    @property
    def dim(self) -> int:
        return self.cavity_dim ** 2 * 2


@dataclass(frozen=True)
class BeamSplitterDrive:
    """Beam-splitter strength ``g``, phase ``varphi`` and mode detuning ``delta`` samples."""

    grid: TimeGrid
    g: np.ndarray
    varphi: np.ndarray
    delta: np.ndarray

    def __post_init__(self):
        n = len(self.grid)
        for name in ("g", "varphi", "delta"):
            arr = np.asarray(getattr(self, name), dtype=float)
            if arr.ndim == 0:
                arr = np.full(n, float(arr))
            if arr.shape != (n,):
                raise ValueError(f"{name} has shape {arr.shape}, expected ({n},)")
            arr.setflags(write=False)
            object.__setattr__(self, name, arr)

    @classmethod
    def off(cls, grid: TimeGrid) -> "BeamSplitterDrive":
        return cls(grid, 0.0, 0.0, 0.0)

    @property
    def area(self) -> float:
        return float(np.trapezoid(self.g, self.grid.times))


@dataclass(frozen=True)
class NoiseSample:
    """Quasi-static noise: ancilla dephasing ``gamma`` and crosstalk strength ``xi``."""

    gamma: float = 0.0
    xi: float = 0.0


class ModeOperators(NamedTuple):
    a: np.ndarray
    b: np.ndarray
    na: np.ndarray
    nb: np.ndarray
    Z2: np.ndarray
    X2: np.ndarray
    Y2: np.ndarray


def _ladder(n_max: int) -> np.ndarray:
    return np.diag(np.sqrt(np.arange(1, n_max + 1)), k=1).astype(complex)


def mode_operators(params: DualRailParams) -> ModeOperators:
    """Truncated ladder and ancilla operators lifted to the full space."""
    a1 = _ladder(params.n_max)
    Ic = np.eye(params.cavity_dim)
    a = np.kron(np.kron(a1, Ic), I2)
    b = np.kron(np.kron(Ic, a1), I2)
    Icc = np.eye(params.cavity_dim ** 2)
    return ModeOperators(
        a=a, b=b,
        na=a.conj().T @ a, nb=b.conj().T @ b,
        Z2=np.kron(Icc, Z), X2=np.kron(Icc, X), Y2=np.kron(Icc, Y),
    )


def basis_index(params: DualRailParams, na: int, nb: int, ancilla: int | str = 0) -> int:
    anc = {"g": 0, "f": 1}.get(ancilla, ancilla)
    if not (0 <= na <= params.n_max and 0 <= nb <= params.n_max and anc in (0, 1)):
        raise IndexError(f"state |{na}{nb},{ancilla}> is outside the truncated space")
    return (na * params.cavity_dim + nb) * 2 + anc


def basis_label(params: DualRailParams, index: int) -> tuple[int, int, str]:
    cav, anc = divmod(index, 2)
    na, nb = divmod(cav, params.cavity_dim)
    return na, nb, "gf"[anc]


def photon_sector_indices(params: DualRailParams, n_total: int) -> np.ndarray:
    """Full-space indices with ``n_a + n_b = n_total`` (both ancilla levels)."""
    idx = [basis_index(params, na, n_total - na, anc)
           for na in range(n_total + 1) if n_total - na <= params.n_max and na <= params.n_max
           for anc in (0, 1)]
    return np.array(sorted(idx))


def _interp(t, grid: TimeGrid, y):
    return np.interp(t, grid.times, y)


def native_hamiltonian(params: DualRailParams, drive: BeamSplitterDrive | None = None,
                       ancilla_pulse: ControlPulse | None = None,
                       noise: NoiseSample | None = None) -> HamiltonianSampler:
    """Full-space Hamiltonian of the driven beam splitter, dispersive ancilla and drive.

    ``g/2 (e^{i varphi} a^dag b + h.c.) + delta a^dag a - chi/2 a^dag a Z2
    + Omega2/2 (cos Phi2 X2 + sin Phi2 Y2) + Delta2/2 Z2 + gamma/2 Z2``.
    Sample arrays are interpolated linearly (complex envelopes by quadrature).
    """
    noise = noise or NoiseSample()
    if drive is not None and ancilla_pulse is not None and drive.grid != ancilla_pulse.grid:
        raise DimensionError(f"drive grid {drive.grid} differs from ancilla grid {ancilla_pulse.grid}")
    ops = mode_operators(params)
    adag_b = ops.a.conj().T @ ops.b
    static = -0.5 * params.chi * ops.na @ ops.Z2 + 0.5 * noise.gamma * ops.Z2

    def fn(t):
        H = np.broadcast_to(static, (len(t),) + static.shape).copy()
        if drive is not None:
            ts = drive.grid.times
            gc = drive.g * np.cos(drive.varphi)
            gs = drive.g * np.sin(drive.varphi)
            c = np.interp(t, ts, gc) + 1j * np.interp(t, ts, gs)
            H += 0.5 * (c[:, None, None] * adag_b + np.conj(c)[:, None, None] * adag_b.conj().T)
            H += np.interp(t, ts, drive.delta)[:, None, None] * ops.na
        if ancilla_pulse is not None:
            ts = ancilla_pulse.grid.times
            ix, qy = ancilla_pulse.quadratures
            H += 0.5 * (np.interp(t, ts, ix)[:, None, None] * ops.X2
                        + np.interp(t, ts, qy)[:, None, None] * ops.Y2
                        + np.interp(t, ts, ancilla_pulse.delta)[:, None, None] * ops.Z2)
        return H

    return HamiltonianSampler(params.dim, fn)


def _cavity_isometry(params: DualRailParams, states) -> np.ndarray:
    """Columns ``|na nb, anc>`` for each cavity state in ``states`` and ancilla in ``(g, f)``."""
    cols = [basis_index(params, na, nb, anc) for na, nb in states for anc in (0, 1)]
    P = np.zeros((params.dim, len(cols)), dtype=complex)
    P[cols, np.arange(len(cols))] = 1.0
    return P


def single_photon_isometry(params: DualRailParams) -> np.ndarray:
    """Embedding of ``span{|10>, |01>} (x) span{|g>, |f>}``."""
    return _cavity_isometry(params, [(1, 0), (0, 1)])


def q4_isometry(params: DualRailParams) -> np.ndarray:
    """Embedding of ``span{|00>, |01>, |10>, |11>} (x) span{|g>, |f>}``."""
    return _cavity_isometry(params, Q4_LABELS)


def project_single_photon(H_full, params: DualRailParams) -> np.ndarray:
    """4x4 restriction of a full-space operator to (DR qubit) (x) (ancilla)."""
    P = single_photon_isometry(params)
    return P.conj().T @ np.asarray(H_full) @ P


def project_q4(H_full, params: DualRailParams) -> np.ndarray:
    """8x8 restriction of a full-space operator to the four joint-cavity states (x) ancilla."""
    P = q4_isometry(params)
    return P.conj().T @ np.asarray(H_full) @ P


def schwinger_operators(params: DualRailParams | None = None):
    """``(I1, X1, Y1, Z1)`` on the codespace basis ``(|10>, |01>)``.

    Built from ``a^dag a + b^dag b``, ``a^dag b + a b^dag``,
    ``-i (a^dag b - a b^dag)`` and ``a^dag a - b^dag b`` on the cavity space.
    """
    params = params or DualRailParams(chi=1.0, n_max=2)
    a1 = _ladder(params.n_max)
    Ic = np.eye(params.cavity_dim)
    a = np.kron(a1, Ic)
    b = np.kron(Ic, a1)
    ad, bd = a.conj().T, b.conj().T
    ops = (ad @ a + bd @ b, ad @ b + a @ bd, -1j * (ad @ b - a @ bd), ad @ a - bd @ b)
    d = params.cavity_dim
    cols = [1 * d + 0, 0 * d + 1]
    P = np.zeros((d * d, 2), dtype=complex)
    P[cols, [0, 1]] = 1.0
    return tuple(P.conj().T @ op @ P for op in ops)


def classify_state(params: DualRailParams, index: int) -> str:
    """``"codespace"`` for one total photon, ``"leakage_even"`` for zero or two."""
    na, nb, _ = basis_label(params, index)
    n = na + nb
    if n == 1:
        return "codespace"
    if n in (0, 2):
        return "leakage_even"
    raise ValueError(f"state |{na}{nb}> has {n} photons; only n <= 2 is classified")

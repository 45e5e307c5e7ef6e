"""Space-curve picture of single-qubit control.

A control pulse ``(Omega, Phi, Delta)`` drives
``H0 = Omega/2 (cos Phi X + sin Phi Y) + Delta/2 Z``. Its error curve is
``r(t) . sigma = int_0^t U0^dag Z U0 dt'``: the curve closes exactly when
quasi-static dephasing cancels to first order, its curvature is the Rabi rate
and its torsion is ``dPhi/dt - Delta``. The Frenet frame at the two ends fixes
the implemented gate.

Derivatives use fourth-order finite-difference stencils on the uniform grid
(central in the interior, one-sided at the two end samples); integrals use the
trapezoidal rule.
"""
from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np
from scipy.integrate import cumulative_trapezoid
from scipy.interpolate import CubicSpline, PchipInterpolator
from scipy.spatial.transform import Rotation

from .linalg import (
    I2, PAULIS, Z, HamiltonianSampler, TimeGrid, X, Y, propagate_checkpointed,
)

__all__ = [
    "ControlPulse", "SpaceCurve", "FrenetFrame",
    "DegenerateFrameError", "OpenCurveError", "ReparameterizationError",
    "derivative", "pulse_hamiltonian", "evolution", "tangents_from_unitaries",
    "error_curve", "is_closed", "closure_gap", "frenet_frame", "curvature_torsion",
    "pulse_from_curve", "implemented_gate", "rotation_z", "first_order_error",
    "signed_area", "vector_area", "point_reflection", "arc_length_reparametrize",
    "su2_from_adjoint",
]


class DegenerateFrameError(ValueError):
    """The curve has a (near) straight segment where the normal is undefined."""


class OpenCurveError(ValueError):
    """An operation that needs a closed curve received an open one."""


class ReparameterizationError(ValueError):
    """Arc-length reparameterization is impossible (zero-speed plateau)."""


def derivative(y: np.ndarray, dt: float) -> np.ndarray:
    """Fourth-order finite-difference derivative along axis 0."""
    y = np.asarray(y, dtype=float)
    n = y.shape[0]
    if n < 5:
        return np.gradient(y, dt, axis=0, edge_order=1 if n < 3 else 2)
    d = np.empty_like(y)
    d[2:-2] = (y[:-4] - 8 * y[1:-3] + 8 * y[3:-1] - y[4:]) / (12 * dt)
    d[0] = (-25 * y[0] + 48 * y[1] - 36 * y[2] + 16 * y[3] - 3 * y[4]) / (12 * dt)
    d[1] = (-3 * y[0] - 10 * y[1] + 18 * y[2] - 6 * y[3] + y[4]) / (12 * dt)
    d[-1] = (25 * y[-1] - 48 * y[-2] + 36 * y[-3] - 16 * y[-4] + 3 * y[-5]) / (12 * dt)
    d[-2] = (3 * y[-1] + 10 * y[-2] - 18 * y[-3] + 6 * y[-4] - y[-5]) / (12 * dt)
    return d


@dataclass(frozen=True)
class ControlPulse:
    """Sampled single-qubit control fields on ``grid.times``.

    Attributes
    ----------
    grid : TimeGrid
    omega : ndarray
        Rabi rate, non-negative.
    phi : ndarray
        Drive phase in radians.
    delta : ndarray
        Detuning.
    """

    grid: TimeGrid
    omega: np.ndarray
    phi: np.ndarray
    delta: np.ndarray

    def __post_init__(self):
        n = len(self.grid)
        for name in ("omega", "phi", "delta"):
            arr = np.asarray(getattr(self, name), dtype=float)
            if arr.ndim == 0:
                arr = np.full(n, float(arr))
            if arr.shape != (n,):
                raise ValueError(f"{name} has shape {arr.shape}, expected ({n},)")
            if not np.all(np.isfinite(arr)):
                raise ValueError(f"{name} contains non-finite samples")
            arr.setflags(write=False)
            object.__setattr__(self, name, arr)
        if self.omega.min() < 0:
            raise ValueError("omega must be non-negative; encode sign flips in phi")

    @classmethod
    def from_signed(cls, grid: TimeGrid, amplitude, delta=0.0) -> "ControlPulse":
        """Build a ``Phi in {0, pi}`` pulse from a signed x-quadrature amplitude."""
        amplitude = np.broadcast_to(np.asarray(amplitude, dtype=float), (len(grid),))
        phi = np.where(amplitude < 0, np.pi, 0.0)
        return cls(grid, np.abs(amplitude), phi, delta)

    @classmethod
    def square(cls, duration: float, omega: float, n_steps: int = 2000, delta: float = 0.0):
        grid = TimeGrid(duration, n_steps)
        return cls(grid, omega, 0.0, delta)

    @property
    def times(self) -> np.ndarray:
        return self.grid.times

    @property
    def quadratures(self) -> tuple[np.ndarray, np.ndarray]:
        """In-phase and quadrature amplitudes ``Omega cos Phi``, ``Omega sin Phi``."""
        return self.omega * np.cos(self.phi), self.omega * np.sin(self.phi)

    def rescaled(self, duration: float) -> "ControlPulse":
        """Same waveform stretched to ``duration`` with fields scaled to keep the rotation angles."""
        s = self.grid.duration / duration
        return ControlPulse(TimeGrid(duration, self.grid.n_steps), self.omega * s, self.phi,
                            self.delta * s)


def pulse_hamiltonian(pulse: ControlPulse, gamma: float = 0.0) -> HamiltonianSampler:
    """``Omega/2 (cos Phi X + sin Phi Y) + (Delta + gamma)/2 Z`` with linear interpolation.

    The quadratures ``Omega cos Phi`` and ``Omega sin Phi`` are interpolated
    rather than ``Omega`` and ``Phi`` so that sign flips (``Phi`` jumping by pi)
    pass through zero amplitude instead of sweeping the drive axis.
    """
    ts = pulse.times
    ix, qy = pulse.quadratures
    det = pulse.delta + gamma

    def fn(t):
        a = np.interp(t, ts, ix)
        b = np.interp(t, ts, qy)
        c = np.interp(t, ts, det)
        return 0.5 * (a[:, None, None] * X + b[:, None, None] * Y + c[:, None, None] * Z)

    return HamiltonianSampler(2, fn)


def evolution(pulse: ControlPulse, gamma: float = 0.0) -> np.ndarray:
    """Propagators ``U(t_k)`` of the pulse at every grid point."""
    return propagate_checkpointed(pulse_hamiltonian(pulse, gamma), pulse.grid)


def tangents_from_unitaries(Us: np.ndarray) -> np.ndarray:
    """Bloch vectors of ``U^dag Z U`` for a stack of 2x2 unitaries."""
    conj = np.einsum("kji,jl,klm->kim", Us.conj(), Z, Us)
    return np.stack([0.5 * np.einsum("kij,ji->k", conj, s).real for s in PAULIS], axis=1)


@dataclass(frozen=True)
class SpaceCurve:
    """Sampled 3-D curve with ``r(0) = 0``.

    ``parameterization`` is ``"arc-length"`` when the parameter is the
    length along the curve (unit speed), otherwise ``"general"``.
    """

    grid: TimeGrid
    r: np.ndarray
    parameterization: str = "arc-length"

    def __post_init__(self):
        r = np.array(self.r, dtype=float)
        if r.shape != (len(self.grid), 3):
            raise ValueError(f"r has shape {r.shape}, expected ({len(self.grid)}, 3)")
        if self.parameterization not in ("arc-length", "general"):
            raise ValueError(f"unknown parameterization {self.parameterization!r}")
        if np.abs(r[0]).max() > 1e-12:
            raise ValueError("curve must start at the origin; use SpaceCurve.from_points")
        r.setflags(write=False)
        object.__setattr__(self, "r", r)

    @classmethod
    def from_points(cls, grid: TimeGrid, points, parameterization: str = "arc-length"):
        points = np.asarray(points, dtype=float)
        return cls(grid, points - points[0], parameterization)

    @property
    def times(self) -> np.ndarray:
        return self.grid.times

    def speed(self) -> np.ndarray:
        return np.linalg.norm(derivative(self.r, self.grid.dt), axis=1)

    def length(self) -> float:
        return float(np.trapezoid(self.speed(), self.times))


@dataclass(frozen=True)
class FrenetFrame:
    """Tangent, normal and binormal samples of a curve."""

    grid: TimeGrid
    T: np.ndarray
    N: np.ndarray
    B: np.ndarray
    _checked: bool = field(default=True, repr=False)

    def __post_init__(self):
        for name in ("T", "N", "B"):
            v = np.array(getattr(self, name), dtype=float)
            if v.shape != (len(self.grid), 3):
                raise ValueError(f"{name} has shape {v.shape}")
            v.setflags(write=False)
            object.__setattr__(self, name, v)
        if self._checked and self.orthonormality_error() > 1e-8:
            raise ValueError(f"frame is not orthonormal ({self.orthonormality_error():.2e})")

    def orthonormality_error(self) -> float:
        T, N, B = self.T, self.N, self.B
        dots = np.abs(np.stack([(T * N).sum(1), (T * B).sum(1), (N * B).sum(1)]))
        norms = np.abs(np.stack([np.linalg.norm(v, axis=1) - 1 for v in (T, N, B)]))
        hand = np.abs(np.cross(T, N) - B).max()
        return float(max(dots.max(), norms.max(), hand))

    def rotation(self, index: int = -1) -> np.ndarray:
        """Frame matrix with rows ``[-B, N, T]`` at sample ``index``."""
        return np.stack([-self.B[index], self.N[index], self.T[index]])


def error_curve(pulse: ControlPulse) -> SpaceCurve:
    """Error curve of the noiseless pulse (trapezoidal integral of the tangent)."""
    T = tangents_from_unitaries(evolution(pulse))
    r = cumulative_trapezoid(T, pulse.times, axis=0, initial=0.0)
    return SpaceCurve(pulse.grid, r, "arc-length")


def closure_gap(curve: SpaceCurve) -> float:
    return float(np.linalg.norm(curve.r[-1] - curve.r[0]))


def is_closed(curve: SpaceCurve, tol: float = 1e-6) -> bool:
    """True when ``|r(T_g) - r(0)| <= tol``, i.e. first-order dephasing cancels."""
    return closure_gap(curve) <= tol


def _kappa_min(grid: TimeGrid) -> float:
    return 1e-6 / grid.duration


def _degenerate_interval(mask: np.ndarray, times: np.ndarray) -> tuple[float, float]:
    idx = np.flatnonzero(mask)
    start = stop = idx[0]
    while stop + 1 < mask.size and mask[stop + 1]:
        stop += 1
    return float(times[start]), float(times[stop])


def frenet_frame(curve: SpaceCurve, kappa_min: float | None = None) -> FrenetFrame:
    """Frenet-Serret frame of an arc-length parameterized curve.

    Raises
    ------
    DegenerateFrameError
        If ``|T'|`` falls below ``kappa_min`` (default ``1e-6 / T_g``); the
        message names the first offending time interval.
    """
    if curve.parameterization != "arc-length":
        raise ValueError("frenet_frame needs an arc-length parameterized curve")
    dt = curve.grid.dt
    kmin = _kappa_min(curve.grid) if kappa_min is None else kappa_min
    V = derivative(curve.r, dt)
    T = V / np.linalg.norm(V, axis=1, keepdims=True)
    A = derivative(T, dt)
    A_perp = A - (A * T).sum(1, keepdims=True) * T
    kappa = np.linalg.norm(A_perp, axis=1)
    bad = kappa < kmin
    if bad.any():
        t0, t1 = _degenerate_interval(bad, curve.times)
        raise DegenerateFrameError(
            f"curvature below {kmin:.2e} on t in [{t0:.6g}, {t1:.6g}]; normal undefined")
    N = A_perp / kappa[:, None]
    B = np.cross(T, N)
    return FrenetFrame(curve.grid, T, N, B)


def curvature_torsion(frame: FrenetFrame) -> tuple[np.ndarray, np.ndarray]:
    """``kappa = T' . N`` and ``tau = N' . B``."""
    dt = frame.grid.dt
    kappa = (derivative(frame.T, dt) * frame.N).sum(1)
    tau = (derivative(frame.N, dt) * frame.B).sum(1)
    return kappa, tau


def pulse_from_curve(curve: SpaceCurve, phi_profile=None) -> ControlPulse:
    """Control fields reproducing ``curve``: ``Omega = kappa``, ``Delta = dPhi/dt - tau``.

    ``phi_profile`` fixes the phase gauge; the default ``Phi = 0`` gives
    ``Delta = -tau``.
    """
    frame = frenet_frame(curve)
    kappa, tau = curvature_torsion(frame)
    n = len(curve.grid)
    phi = np.zeros(n) if phi_profile is None else np.broadcast_to(
        np.asarray(phi_profile, dtype=float), (n,))
    delta = derivative(phi, curve.grid.dt) - tau
    return ControlPulse(curve.grid, np.clip(kappa, 0.0, None), phi, delta)


def rotation_z(angle: float) -> np.ndarray:
    c, s = np.cos(angle), np.sin(angle)
    return np.array([[c, -s, 0.0], [s, c, 0.0], [0.0, 0.0, 1.0]])


def implemented_gate(frame: FrenetFrame, phi_final: float = 0.0, index: int = -1) -> np.ndarray:
    """Adjoint representation of the gate implemented up to sample ``index``.

    ``R = R_z(phi_final) R_F(t) R_F(0)^T`` with ``R_F`` the frame matrix whose
    rows are ``[-B, N, T]``.
    """
    return rotation_z(phi_final) @ frame.rotation(index) @ frame.rotation(0).T


def su2_from_adjoint(R) -> np.ndarray:
    """2x2 unitary whose adjoint representation is ``R``.

    The two preimages differ by a sign; the one whose ``(0, 0)`` entry has a
    non-negative real part is returned.
    """
    x, y, z, w = Rotation.from_matrix(np.asarray(R, dtype=float)).as_quat()
    U = w * I2 - 1j * (x * X + y * Y + z * Z)
    if U[0, 0].real < 0 or (U[0, 0].real == 0 and U[0, 0].imag < 0):
        U = -U
    return U


def first_order_error(pulse: ControlPulse) -> float:
    """Spectral norm of ``int_0^Tg U0^dag Z U0 dt`` for the noiseless pulse."""
    Us = evolution(pulse)
    toggled = Us.conj().transpose(0, 2, 1) @ Z @ Us
    integral = np.trapezoid(toggled, pulse.times, axis=0)
    return float(np.linalg.norm(integral, ord=2))


def vector_area(curve: SpaceCurve) -> np.ndarray:
    """``1/2 sum r_k x r_{k+1}``, the trapezoidal form of ``1/2 oint r x dr``."""
    r = curve.r
    return 0.5 * np.cross(r[:-1], r[1:]).sum(axis=0)


def signed_area(curve: SpaceCurve, closure_tol: float = 1e-6) -> np.ndarray:
    """Vector area enclosed by a closed curve (second-order dephasing diagnostic)."""
    gap = closure_gap(curve)
    if gap > closure_tol:
        raise OpenCurveError(f"signed area needs a closed curve; gap {gap:.3e} > {closure_tol:.1e}")
    return vector_area(curve)


def point_reflection(curve: SpaceCurve) -> SpaceCurve:
    """The curve ``-r(t)``: same curvature, opposite torsion."""
    return SpaceCurve(curve.grid, -curve.r, curve.parameterization)


def arc_length_reparametrize(curve: SpaceCurve, normalize: bool = False) -> SpaceCurve:
    """Resample ``curve`` uniformly in arc length.

    The inverse map ``x(s)`` is a monotone (PCHIP) interpolant of the
    integrated speed; positions are evaluated on a cubic spline of ``r(x)``.
    With ``normalize`` the result is rescaled to unit length on ``[0, 1]``.
    """
    x = curve.times
    speed = curve.speed()
    scale = speed.max()
    if scale == 0:
        raise ReparameterizationError("curve has zero speed everywhere")
    slow = speed <= 1e-12 * scale
    if slow.any():
        runs = np.diff(np.concatenate([[0], slow.astype(int), [0]]))
        starts, stops = np.flatnonzero(runs == 1), np.flatnonzero(runs == -1)
        longest = (stops - starts).max()
        if longest > 1:
            k = starts[np.argmax(stops - starts)]
            raise ReparameterizationError(
                f"zero-speed plateau of {longest} samples starting at x={x[k]:.6g}")
    s = cumulative_trapezoid(speed, x, initial=0.0)
    length = float(s[-1])
    s_new = np.linspace(0.0, length, len(x))
    x_of_s = PchipInterpolator(s, x)(s_new)
    x_of_s[0], x_of_s[-1] = x[0], x[-1]
    r_new = CubicSpline(x, curve.r, axis=0)(x_of_s)
    r_new[0] = 0.0
    if normalize:
        return SpaceCurve(TimeGrid(1.0, curve.grid.n_steps), r_new / length, "arc-length")
    return SpaceCurve(TimeGrid(length, curve.grid.n_steps), r_new, "arc-length")

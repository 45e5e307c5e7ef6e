import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from dualrail_scqc.geometry import (
    ControlPulse, DegenerateFrameError, OpenCurveError, ReparameterizationError, SpaceCurve,
    arc_length_reparametrize, closure_gap, curvature_torsion, derivative, error_curve, evolution,
    first_order_error, frenet_frame, implemented_gate, is_closed, point_reflection,
    pulse_from_curve, signed_area, su2_from_adjoint, tangents_from_unitaries, vector_area,
)
from dualrail_scqc.linalg import TimeGrid, X, Y, Z, adjoint_rep, equal_up_to_global_phase

from helpers import random_smooth_pulse


def circle(omega, t):
    return np.stack([0 * t, (1 - np.cos(omega * t)) / omega, np.sin(omega * t) / omega], axis=1)


class TestControlPulse:
    def test_scalars_broadcast(self):
        p = ControlPulse(TimeGrid(1.0, 10), 2.0, 0.0, 0.5)
        assert p.omega.shape == (11,)
        assert not p.omega.flags.writeable

    def test_negative_omega_rejected(self):
        with pytest.raises(ValueError, match="non-negative"):
            ControlPulse(TimeGrid(1.0, 2), [1.0, -1.0, 1.0], 0.0, 0.0)

    def test_shape_checked(self):
        with pytest.raises(ValueError, match="shape"):
            ControlPulse(TimeGrid(1.0, 2), [1.0, 1.0], 0.0, 0.0)

    def test_from_signed(self):
        p = ControlPulse.from_signed(TimeGrid(1.0, 2), [1.0, -2.0, 0.0])
        np.testing.assert_allclose(p.omega, [1, 2, 0])
        np.testing.assert_allclose(p.phi, [0, np.pi, 0])
        np.testing.assert_allclose(p.quadratures[0], [1, -2, 0], atol=1e-15)

    def test_rescaled_keeps_gate(self):
        rng = np.random.default_rng(0)
        p = random_smooth_pulse(rng, 1000)
        q = p.rescaled(3.7)
        assert q.grid.duration == pytest.approx(3.7)
        assert equal_up_to_global_phase(evolution(p)[-1], evolution(q)[-1], tol=1e-12)


class TestDerivative:
    def test_fourth_order(self):
        errs = []
        for n in (50, 100):
            t = np.linspace(0, 1, n + 1)
            errs.append(np.abs(derivative(np.sin(3 * t), 1 / n) - 3 * np.cos(3 * t)).max())
        assert errs[0] / errs[1] > 12


class TestErrorCurve:
    def test_constant_drive_is_circle(self):
        p = ControlPulse.square(1.0, 3.0, 2000)
        c = error_curve(p)
        np.testing.assert_allclose(c.r, circle(3.0, p.times), atol=1e-6)

    def test_unit_speed(self):
        c = error_curve(random_smooth_pulse(np.random.default_rng(1), 2000))
        np.testing.assert_allclose(c.speed(), 1.0, atol=1e-5)

    def test_two_pi_pulse_closed(self):
        c = error_curve(ControlPulse.square(1.0, 2 * np.pi))
        assert is_closed(c)
        assert closure_gap(c) < 1e-10

    def test_pi_pulse_open(self):
        omega = np.pi
        c = error_curve(ControlPulse.square(1.0, omega))
        assert not is_closed(c)
        assert closure_gap(c) == pytest.approx(2 / omega, rel=1e-6)

    def test_curve_must_start_at_origin(self):
        with pytest.raises(ValueError, match="origin"):
            SpaceCurve(TimeGrid(1.0, 1), [[1, 0, 0], [2, 0, 0]])
        c = SpaceCurve.from_points(TimeGrid(1.0, 1), [[1, 0, 0], [2, 0, 0]])
        np.testing.assert_allclose(c.r[0], 0)


class TestFrenet:
    def test_circle_curvature(self):
        c = error_curve(ControlPulse.square(1.0, 3.0, 2000))
        kappa, tau = curvature_torsion(frenet_frame(c))
        np.testing.assert_allclose(kappa, 3.0, atol=1e-6)
        np.testing.assert_allclose(tau, 0.0, atol=1e-6)

    def test_helix_torsion_is_minus_detuning(self):
        c = error_curve(ControlPulse.square(1.0, 3.0, 2000, delta=1.5))
        kappa, tau = curvature_torsion(frenet_frame(c))
        np.testing.assert_allclose(kappa, 3.0, atol=1e-5)
        np.testing.assert_allclose(tau, -1.5, atol=1e-5)

    def test_circle_frame_vectors(self):
        p = ControlPulse.square(1.0, 3.0, 2000)
        f = frenet_frame(error_curve(p))
        s, co = np.sin(3 * p.times), np.cos(3 * p.times)
        np.testing.assert_allclose(f.T, np.stack([0 * s, s, co], 1), atol=1e-6)
        np.testing.assert_allclose(f.N, np.stack([0 * s, co, -s], 1), atol=1e-5)
        np.testing.assert_allclose(f.B, np.tile([-1.0, 0, 0], (len(s), 1)), atol=1e-5)

    def test_straight_line_is_degenerate(self):
        c = error_curve(ControlPulse(TimeGrid(1.0, 100), 0.0, 0.0, 1.0))
        with pytest.raises(DegenerateFrameError, match=r"t in \[0, 1\]"):
            frenet_frame(c)

    def test_general_parameterization_rejected(self):
        c = error_curve(ControlPulse.square(1.0, 3.0, 100))
        with pytest.raises(ValueError):
            frenet_frame(SpaceCurve(c.grid, c.r, "general"))


class TestImplementedGate:
    def test_closed_circle_is_identity(self):
        f = frenet_frame(error_curve(ControlPulse.square(1.0, 2 * np.pi, 2000)))
        np.testing.assert_allclose(implemented_gate(f), np.eye(3), atol=1e-9)

    @pytest.mark.parametrize("seed", range(5))
    def test_matches_dynamics(self, seed):
        p = random_smooth_pulse(np.random.default_rng(seed))
        R = implemented_gate(frenet_frame(error_curve(p)))
        np.testing.assert_allclose(R, adjoint_rep(evolution(p)[-1]), atol=1e-6)

    @pytest.mark.parametrize("U", [X, Y, Z, np.eye(2)])
    def test_su2_from_adjoint_paulis(self, U):
        assert equal_up_to_global_phase(su2_from_adjoint(adjoint_rep(U)), U)

    @settings(max_examples=30, deadline=None)
    @given(st.floats(-np.pi, np.pi), st.floats(0, np.pi), st.floats(-np.pi, np.pi))
    def test_su2_from_adjoint_roundtrip(self, a, b, c):
        from scipy.linalg import expm
        U = expm(-0.5j * a * Z) @ expm(-0.5j * b * Y) @ expm(-0.5j * c * Z)
        np.testing.assert_allclose(adjoint_rep(su2_from_adjoint(adjoint_rep(U))), adjoint_rep(U),
                                   atol=1e-10)


class TestNoiseDiagnostics:
    @pytest.mark.parametrize("seed", range(3))
    def test_first_order_error_is_closure_gap(self, seed):
        p = random_smooth_pulse(np.random.default_rng(seed), 2000)
        assert first_order_error(p) == pytest.approx(closure_gap(error_curve(p)), abs=1e-10)

    def test_circle_signed_area(self):
        omega = 3.0
        c = error_curve(ControlPulse.square(2 * np.pi / omega, omega, 4000))
        np.testing.assert_allclose(signed_area(c), [-np.pi / omega**2, 0, 0], atol=1e-6)

    def test_open_curve_area_rejected(self):
        c = error_curve(ControlPulse.square(1.0, np.pi))
        with pytest.raises(OpenCurveError):
            signed_area(c)
        assert vector_area(c).shape == (3,)

    def test_point_reflection_involution(self):
        c = error_curve(random_smooth_pulse(np.random.default_rng(4), 500))
        np.testing.assert_array_equal(point_reflection(point_reflection(c)).r, c.r)

    def test_point_reflection_flips_torsion(self):
        p = ControlPulse.square(1.0, 3.0, 2000, delta=1.5)
        q = pulse_from_curve(point_reflection(error_curve(p)))
        np.testing.assert_allclose(q.omega[5:-5], 3.0, atol=1e-5)
        np.testing.assert_allclose(q.delta[5:-5], -1.5, atol=1e-5)


class TestRoundTrip:
    @pytest.mark.parametrize("seed", range(3))
    def test_pulse_curve_pulse(self, seed):
        p = random_smooth_pulse(np.random.default_rng(seed))
        q = pulse_from_curve(error_curve(p))
        scale = np.abs(p.omega).max()
        assert np.abs(q.omega - p.omega).max() / scale < 1e-4
        assert np.abs(q.delta - p.delta).max() / scale < 1e-4

    def test_tangents_unit_norm(self):
        T = tangents_from_unitaries(evolution(random_smooth_pulse(np.random.default_rng(2), 500)))
        np.testing.assert_allclose(np.linalg.norm(T, axis=1), 1.0, atol=1e-12)


class TestArcLength:
    def test_reparametrized_speed_is_one(self):
        grid = TimeGrid(1.0, 2000)
        t = grid.times
        # circle traversed at non-uniform speed: angle u(t) = 2 pi t^2
        u = 2 * np.pi * t**2
        pts = np.stack([np.cos(u), np.sin(u), 0 * u], 1)
        c = arc_length_reparametrize(SpaceCurve.from_points(grid, pts, "general"))
        assert c.grid.duration == pytest.approx(2 * np.pi, rel=1e-6)
        np.testing.assert_allclose(c.speed()[2:-2], 1.0, atol=1e-4)

    def test_normalized(self):
        c = error_curve(ControlPulse.square(2.0, 3.0, 1000))
        n = arc_length_reparametrize(c, normalize=True)
        assert n.grid.duration == 1.0
        assert n.length() == pytest.approx(1.0, rel=1e-6)

    def test_plateau_rejected(self):
        grid = TimeGrid(1.0, 100)
        x = np.clip(grid.times, 0, 0.5)
        pts = np.stack([x, 0 * x, 0 * x], 1)
        with pytest.raises(ReparameterizationError, match="plateau"):
            arc_length_reparametrize(SpaceCurve.from_points(grid, pts, "general"))

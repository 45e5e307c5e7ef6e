import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from dualrail_scqc.dualrail import (
    BeamSplitterDrive, DualRailParams, NoiseSample, basis_index, basis_label, classify_state,
    mode_operators, native_hamiltonian, photon_sector_indices, project_q4,
    project_single_photon, schwinger_operators,
)
from dualrail_scqc.geometry import ControlPulse
from dualrail_scqc.linalg import X, Y, Z, DimensionError, TimeGrid

I2 = np.eye(2)
GRID = TimeGrid(1.0, 4)
finite = st.floats(-3, 3)


def sample(params, g=0.0, varphi=0.0, delta=0.0, omega2=0.0, phi2=0.0, delta2=0.0, gamma=0.0):
    drive = BeamSplitterDrive(GRID, g, varphi, delta)
    pulse = ControlPulse(GRID, abs(omega2), phi2 + np.pi * (omega2 < 0), delta2)
    H = native_hamiltonian(params, drive, pulse, NoiseSample(gamma=gamma))
    return H(0.5)


def single_photon_oracle(chi, g, varphi, delta, omega2, phi2, delta2, gamma):
    # Pauli expansion on (|10>, |01>) (x) (|g>, |f>), written out term by term
    X1, Y1, Z1 = np.kron(X, I2), np.kron(Y, I2), np.kron(Z, I2)
    X2, Y2, Z2 = np.kron(I2, X), np.kron(I2, Y), np.kron(I2, Z)
    ZZ = np.kron(Z, Z)
    return (0.5 * g * (np.cos(varphi) * X1 - np.sin(varphi) * Y1)
            + 0.5 * delta * (np.eye(4) + Z1)
            - 0.25 * chi * (ZZ + Z2)
            + 0.5 * omega2 * (np.cos(phi2) * X2 + np.sin(phi2) * Y2)
            + 0.5 * (delta2 + gamma) * Z2)


def q4_block_oracle(chi, omega2, gamma):
    h_plus = 0.5 * omega2 * X + 0.25 * chi * Z + 0.5 * gamma * Z
    h_minus = 0.5 * omega2 * X - 0.25 * chi * Z + 0.5 * gamma * Z
    out = np.zeros((8, 8), dtype=complex)
    for k, h in enumerate((h_plus, h_plus, h_minus, h_minus)):
        out[2 * k:2 * k + 2, 2 * k:2 * k + 2] = h
    return out


class TestParams:
    @pytest.mark.parametrize("args", [(0.0, 4), (-1.0, 4), (1.0, 1), (1.0, 2.5)])
    def test_invalid(self, args):
        with pytest.raises(ValueError):
            DualRailParams(*args)

    def test_dims(self):
        p = DualRailParams(1.0, 4)
        assert p.cavity_dim == 5
        assert p.dim == 50


class TestOperators:
    def test_ladder_action(self):
        p = DualRailParams(1.0, 2)
        ops = mode_operators(p)
        psi = np.zeros(p.dim)
        psi[basis_index(p, 2, 0, "g")] = 1
        out = ops.a @ psi
        expected = np.zeros(p.dim)
        expected[basis_index(p, 1, 0, "g")] = np.sqrt(2)
        np.testing.assert_allclose(out, expected)

    def test_commutator_below_edge(self):
        p = DualRailParams(1.0, 3)
        ops = mode_operators(p)
        comm = ops.a @ ops.a.conj().T - ops.a.conj().T @ ops.a
        keep = [k for k in range(p.dim) if basis_label(p, k)[0] < p.n_max]
        np.testing.assert_allclose(comm[np.ix_(keep, keep)], np.eye(len(keep)), atol=1e-12)

    def test_number_conserved_by_beam_splitter(self):
        ops = mode_operators(DualRailParams(1.0, 4))
        N = ops.na + ops.nb
        B = ops.a.conj().T @ ops.b + ops.a @ ops.b.conj().T
        assert np.abs(N @ B - B @ N).max() < 1e-12

    def test_basis_index_roundtrip(self):
        p = DualRailParams(1.0, 3)
        for k in range(p.dim):
            na, nb, anc = basis_label(p, k)
            assert basis_index(p, na, nb, anc) == k
        with pytest.raises(IndexError):
            basis_index(p, 4, 0)

    def test_sector_indices(self):
        p = DualRailParams(1.0, 4)
        assert len(photon_sector_indices(p, 0)) == 2
        assert len(photon_sector_indices(p, 2)) == 6


class TestSchwinger:
    def test_actions(self):
        I1, X1, Y1, Z1 = schwinger_operators()
        np.testing.assert_allclose(I1, np.eye(2))
        np.testing.assert_allclose(X1 @ [1, 0], [0, 1])
        np.testing.assert_allclose(Z1 @ [1, 0], [1, 0])

    def test_pauli_algebra(self):
        _, X1, Y1, Z1 = schwinger_operators(DualRailParams(1.0, 4))
        np.testing.assert_allclose(X1 @ Y1 - Y1 @ X1, 2j * Z1, atol=1e-12)
        np.testing.assert_allclose(X1, X)
        np.testing.assert_allclose(Y1, Y)
        np.testing.assert_allclose(Z1, Z)


class TestNativeHamiltonian:
    def test_undriven_diagonal(self):
        p = DualRailParams(2.0, 4)
        H = sample(p)
        np.testing.assert_allclose(H, np.diag(np.diag(H)))
        k = basis_index(p, 1, 0, "f")
        assert H[k, k] == pytest.approx(1.0)

    def test_beam_splitter_coupling(self):
        p = DualRailParams(1.0, 4)
        H = sample(p, g=0.7)
        for anc in "gf":
            assert H[basis_index(p, 0, 1, anc), basis_index(p, 1, 0, anc)] == pytest.approx(0.35)

    @settings(max_examples=20, deadline=None)
    @given(finite, finite, finite, finite, finite, finite, finite)
    def test_hermitian(self, g, varphi, delta, omega2, phi2, delta2, gamma):
        H = sample(DualRailParams(1.3, 3), g, varphi, delta, omega2, phi2, delta2, gamma)
        assert np.abs(H - H.conj().T).max() < 1e-12

    def test_grid_mismatch(self):
        p = DualRailParams(1.0, 2)
        with pytest.raises(DimensionError):
            native_hamiltonian(p, BeamSplitterDrive.off(TimeGrid(1.0, 4)),
                               ControlPulse.square(1.0, 1.0, 5))

    def test_drive_shape_checked(self):
        with pytest.raises(ValueError):
            BeamSplitterDrive(TimeGrid(1.0, 4), np.ones(3), 0.0, 0.0)


class TestProjections:
    def test_single_photon_undriven(self):
        chi = 1.7
        Hp = project_single_photon(sample(DualRailParams(chi, 4)), DualRailParams(chi, 4))
        expected = -0.25 * chi * (np.kron(Z, Z) + np.kron(I2, Z))
        np.testing.assert_allclose(Hp, expected, atol=1e-12)

    def test_single_photon_zz_frame(self):
        chi, omega2 = 1.0, 0.8
        p = DualRailParams(chi, 4)
        Hp = project_single_photon(sample(p, omega2=omega2, delta2=chi / 2), p)
        expected = -0.25 * chi * np.kron(Z, Z) + 0.5 * omega2 * np.kron(I2, X)
        np.testing.assert_allclose(Hp, expected, atol=1e-12)

    @settings(max_examples=30, deadline=None)
    @given(st.floats(0.1, 3), finite, finite, finite, finite, finite, finite, finite)
    def test_single_photon_random(self, chi, g, varphi, delta, omega2, phi2, delta2, gamma):
        p = DualRailParams(chi, 3)
        Hp = project_single_photon(sample(p, g, varphi, delta, omega2, phi2, delta2, gamma), p)
        oracle = single_photon_oracle(chi, g, varphi, delta, omega2, phi2, delta2, gamma)
        assert np.abs(Hp - oracle).max() < 1e-12

    def test_q4_undriven_pattern(self):
        chi = 1.0
        p = DualRailParams(chi, 4)
        Hq = project_q4(sample(p, delta2=chi / 2), p)
        np.testing.assert_allclose(Hq, q4_block_oracle(chi, 0.0, 0.0), atol=1e-12)

    def test_q4_minus_block_cancels(self):
        # n_a = 1 blocks carry -chi/4 Z2, cancelled by gamma/2 Z2 at gamma = chi/2
        chi = 1.0
        p = DualRailParams(chi, 4)
        Hq = project_q4(sample(p, delta2=chi / 2, gamma=chi / 2), p)
        np.testing.assert_allclose(Hq[4:, 4:], 0, atol=1e-12)

    @settings(max_examples=30, deadline=None)
    @given(st.floats(0.1, 3), finite, finite)
    def test_q4_random(self, chi, omega2, gamma):
        p = DualRailParams(chi, 3)
        Hq = project_q4(sample(p, omega2=omega2, delta2=chi / 2, gamma=gamma), p)
        assert np.abs(Hq - q4_block_oracle(chi, omega2, gamma)).max() < 1e-12


class TestClassify:
    @pytest.mark.parametrize("state,label", [((1, 0), "codespace"), ((0, 1), "codespace"),
                                             ((0, 0), "leakage_even"), ((1, 1), "leakage_even"),
                                             ((2, 0), "leakage_even"), ((0, 2), "leakage_even")])
    def test_labels(self, state, label):
        p = DualRailParams(1.0, 4)
        assert classify_state(p, basis_index(p, *state, "f")) == label

    def test_three_photons_rejected(self):
        p = DualRailParams(1.0, 4)
        with pytest.raises(ValueError):
            classify_state(p, basis_index(p, 2, 1))

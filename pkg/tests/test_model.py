import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from spintraj.lattice import LatticeGeometry
from spintraj.model import (
    DissipatorSpec,
    ModelError,
    SpinModel,
    diagonalize_dissipator,
    integrate_mean_field,
    mean_field_critical_drive,
    mean_field_fixed_point,
    mean_field_rhs,
)


def make_model(**kw):
    defaults = dict(
        geometry=LatticeGeometry((4,)), s=0.5, omega=1.0, J=0.1, kappa=1.0, alpha=1.0
    )
    defaults.update(kw)
    return SpinModel(**defaults)


class TestDissipator:
    def test_collective_rates(self):
        spec = DissipatorSpec.collective(n_sites=4, kappa=2.0, s=0.5)
        assert np.allclose(spec.rates, 1.0)  # kappa / (N s) = 2 / 2

    def test_collective_is_rank_one(self):
        spec = DissipatorSpec.collective(n_sites=8, kappa=1.0, s=0.5)
        channels = diagonalize_dissipator(spec)
        assert len(channels) == 1
        ch = channels[0]
        # single channel: rate N * kappa/(N s) = kappa/s, uniform weights
        assert ch.rate == pytest.approx(2.0, rel=1e-12)
        assert np.allclose(np.abs(ch.weights), 1 / np.sqrt(8), atol=1e-12)

    def test_reconstruction(self):
        rng = np.random.default_rng(7)
        B = rng.normal(size=(5, 5)) + 1j * rng.normal(size=(5, 5))
        f = B @ B.conj().T
        channels = diagonalize_dissipator(DissipatorSpec(f))
        rebuilt = sum(ch.rate * np.outer(ch.weights, ch.weights.conj()) for ch in channels)
        assert np.allclose(rebuilt, f, atol=1e-10)

    def test_rejects_non_hermitian_and_negative(self):
        with pytest.raises(ModelError):
            DissipatorSpec(np.array([[1.0, 2.0], [0.0, 1.0]]))
        with pytest.raises(ModelError):
            diagonalize_dissipator(DissipatorSpec(np.diag([1.0, -0.5])))

    def test_weights_orthonormal(self):
        rng = np.random.default_rng(3)
        B = rng.normal(size=(6, 6))
        channels = diagonalize_dissipator(DissipatorSpec(B @ B.T + 0j))
        W = np.stack([ch.weights for ch in channels], axis=1)
        assert np.allclose(W.conj().T @ W, np.eye(W.shape[1]), atol=1e-12)


class TestSpinModel:
    def test_validation(self):
        with pytest.raises(ModelError):
            make_model(s=0.3)
        with pytest.raises(ModelError):
            make_model(kappa=-1.0)

    def test_total_spin(self):
        m = make_model(geometry=LatticeGeometry((8, 8)), s=0.5)
        assert m.total_spin == 32.0

    def test_channels_cached(self):
        m = make_model()
        assert len(m.channels) == 1
        assert m.channels[0].rate == pytest.approx(m.kappa / m.s, rel=1e-12)


class TestMeanField:
    def test_critical_drive_value(self):
        # J = 0.1 kappa: omega_c = sqrt(16 * 0.01 + 1) = sqrt(1.16)
        assert mean_field_critical_drive(0.1, 1.0) == pytest.approx(np.sqrt(1.16), rel=1e-14)
        assert mean_field_critical_drive(0.1, 1.0) == pytest.approx(1.0770, abs=5e-5)

    def test_fixed_point_is_stationary(self):
        m = mean_field_fixed_point(0.5, 0.1, 1.0)
        assert np.allclose(mean_field_rhs(m, 0.5, 0.1, 1.0), 0.0, atol=1e-14)
        assert np.linalg.norm(m) == pytest.approx(1.0, rel=1e-12)

    def test_fixed_point_above_critical_raises(self):
        with pytest.raises(ModelError):
            mean_field_fixed_point(2.0, 0.1, 1.0)

    @given(
        omega=st.floats(0.0, 3.0),
        J=st.floats(-0.5, 0.5),
        kappa=st.floats(0.1, 2.0),
        seed=st.integers(0, 2**16),
    )
    @settings(max_examples=30, deadline=None)
    def test_norm_conserved_along_flow(self, omega, J, kappa, seed):
        # the Bloch equations preserve |m|: m . dm/dt = 0 on the unit sphere
        rng = np.random.default_rng(seed)
        m = rng.normal(size=3)
        m /= np.linalg.norm(m)
        assert abs(m @ mean_field_rhs(m, omega, J, kappa)) < 1e-12

    def test_relaxation_below_critical(self):
        omega, J, kappa = 0.6, 0.1, 1.0
        _, traj = integrate_mean_field(np.array([0.0, 0.0, -1.0]), omega, J, kappa, 60.0)
        assert np.allclose(traj[-1], mean_field_fixed_point(omega, J, kappa), atol=1e-7)

    def test_oscillation_above_critical(self):
        omega, J, kappa = 1.6, 0.1, 1.0
        _, traj = integrate_mean_field(np.array([0.0, 0.0, -1.0]), omega, J, kappa, 60.0)
        mz = traj[:, 2]
        # limit cycle: m_z keeps changing sign at late times
        late = mz[len(mz) // 2 :]
        assert late.max() > 0.2 and late.min() < -0.2

    def test_pure_rabi_limit(self):
        # J = kappa = 0: rotation about x, m_z(t) = -cos(omega t) from -z
        omega = 1.3
        t, traj = integrate_mean_field(np.array([0.0, 0.0, -1.0]), omega, 0.0, 0.0, 8.0)
        assert np.allclose(traj[:, 2], -np.cos(omega * t), atol=1e-8)
        assert np.allclose(traj[:, 0], 0.0, atol=1e-10)

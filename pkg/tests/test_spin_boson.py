"""Tests for the monitored Tavis-Cummings extension.

The stepping equations are pinned against a small exact simulation
(2 spins tensored with a truncated cavity) at short times, against the
decoupled spin-only engine at lam = 0, and against the adiabatic
elimination of a fast cavity, which maps the model onto the spin-only
collective dissipator at rate 2 lam^2 / kappa.
"""

import json
import os

import numpy as np
import pytest
import scipy.sparse as sp

from spintraj.engine import (
    DenseTrajectoryEngine,
    GaussianNoiseSource,
    ZeroNoiseSource,
)
from spintraj.exact import integrate_exact_sse, site_operator, spin_matrices
from spintraj.lattice import LatticeGeometry
from spintraj.model import SpinModel, mean_field_critical_drive, mean_field_fixed_point
from spintraj.observables import collective_spin, spin_wave_density
from spintraj.runner import parse_config, run_ensemble
from spintraj.spin_boson import (
    SpinBosonEngine,
    SpinBosonParams,
    initial_sb_state,
    sb_cavity_occupation,
    sb_collective_spin,
    sb_eom_step,
    sb_spin_cavity_entropy,
    sb_spin_wave_occupation,
)


def make_params(n_sites=4, s=0.5, omega=0.0, J=0.0, kappa=1.0, lam=0.0, alpha=0.0):
    return SpinBosonParams(
        n_sites=n_sites, s=s, omega=omega, J=J, kappa=kappa, lam=lam, alpha=alpha
    )


def spin_model(params: SpinBosonParams, kappa: float) -> SpinModel:
    return SpinModel(
        geometry=LatticeGeometry(dims=(params.n_sites,)),
        s=params.s,
        omega=params.omega,
        J=params.J,
        kappa=kappa,
        alpha=params.alpha,
    )


class TestDecoupledLimit:
    def test_cavity_relaxes_to_vacuum(self):
        params = make_params(kappa=0.8, lam=0.0, omega=0.5, J=0.1)
        engine = SpinBosonEngine(params, dt=1e-3)
        state = engine.initial_state()
        state.alpha_c = 0.4 - 0.3j
        alpha0 = state.alpha_c
        src = ZeroNoiseSource()
        for _ in range(2000):
            state = engine.step(state, src)
        t = state.time
        # Euler decay (1 - kappa dt / 2)^n, close to e^{-kappa t / 2}
        assert abs(state.alpha_c - alpha0 * (1.0 - 0.5 * 0.8 * 1e-3) ** 2000) < 1e-12
        assert abs(state.alpha_c - alpha0 * np.exp(-0.4 * t)) < 1e-3
        assert state.v_a == 0.0
        assert state.u_a == 0.0

    def test_spins_match_spin_only_engine(self):
        params = make_params(n_sites=4, s=1.0, omega=0.7, J=0.15, lam=0.0, alpha=0.3)
        dt = 1e-3
        sb = SpinBosonEngine(params, dt)
        ref = DenseTrajectoryEngine(spin_model(params, kappa=0.0), dt)
        src = ZeroNoiseSource()
        state = sb.initial_state(direction=(1.0, 0.0, 0.0))
        ref_state = ref.initial_state(direction=(1.0, 0.0, 0.0))
        for _ in range(300):
            state = sb.step(state, src)
            ref_state = ref.step(ref_state, src)
        spin = sb_collective_spin(state, params.s)
        spin_ref = collective_spin(ref_state, params.s)
        assert np.abs(spin - spin_ref).max() < 1e-8
        density = sb_spin_wave_occupation(state) / (params.n_sites * params.s)
        assert abs(density - spin_wave_density(ref_state, params.s)) < 1e-8
        assert sb_cavity_occupation(state) == 0.0


def spin_boson_operators(n_spins: int, s: float, n_max: int):
    """Site spin operators and the cavity mode on the joint Fock basis."""
    sx, sy, sz, sp_, sm = spin_matrices(s)
    dim_s = site_operator(np.eye(int(2 * s + 1)), 0, n_spins).shape[0]
    a_small = np.diag(np.sqrt(np.arange(1, n_max)), 1)
    eye_c = sp.identity(n_max, format="csr")
    ops = {}
    for name, op in (("sx", sx), ("sp", sp_), ("sm", sm), ("sz", sz)):
        ops[name] = [
            sp.kron(site_operator(op, i, n_spins), eye_c, format="csr")
            for i in range(n_spins)
        ]
    ops["a"] = sp.kron(sp.identity(dim_s, format="csr"), sp.csr_matrix(a_small))
    return ops


def expect(psi, *mats):
    op = mats[0]
    for m in mats[1:]:
        op = op @ m
    return complex(np.vdot(psi, op @ psi))


class TestExactShortTimeOracle:
    """N = 2 spins, 6-level cavity, omega = J = 0, deterministic increments.

    At theta = 0 the bosonization gives b_i = s_i^+ / sqrt(2 s) to lowest
    order and the coupling is pure two-mode squeezing between the cavity
    and the uniform spin-wave mode, so cross moments grow linearly in
    lam t while spin-spin moments grow quadratically.
    """

    def run_pair(self, lam, kappa, dt, n_steps):
        params = make_params(n_sites=2, s=0.5, kappa=kappa, lam=lam)
        state = initial_sb_state(params)
        for _ in range(n_steps):
            state = sb_eom_step(state, params, 0.0 + 0.0j, dt)

        n_max = 6
        ops = spin_boson_operators(2, 0.5, n_max)
        a = ops["a"]
        Sm = ops["sm"][0] + ops["sm"][1]
        Sp = ops["sp"][0] + ops["sp"][1]
        S_tot = 2 * 0.5
        g = lam / np.sqrt(2.0 * S_tot)
        H = g * (a.getH() @ Sm + a @ Sp)
        psi0 = np.zeros(a.shape[0], dtype=complex)
        psi0[3 * n_max] = 1.0  # |up, up> x |0>: spin_matrices puts m = -s first
        assert abs(expect(psi0, ops["sz"][0]) - 0.5) < 1e-12
        _, states = integrate_exact_sse(
            psi0, H, [a], [kappa], ZeroNoiseSource(), dt, n_steps, sample_stride=n_steps
        )
        psi = states[-1]
        # b_i = s_i^+ / sqrt(2 s) at theta = 0 (means all stay zero here)
        root = np.sqrt(2.0 * 0.5)
        b0, b1 = ops["sp"][0] / root, ops["sp"][1] / root
        exact = {
            "u_ab": expect(psi, a, b0),
            "v_ab": expect(psi, a.getH(), b0),
            "u_a": expect(psi, a, a),
            "v_a": expect(psi, a.getH(), a),
            "u_b0": expect(psi, b0, b0),
            "u_b1": expect(psi, b0, b1),
            "v_b0": expect(psi, b0.getH(), b0),
            "v_b1": expect(psi, b0.getH(), b1),
        }
        return state, exact

    def test_moments_match_exact(self):
        dt, n_steps = 1e-4, 400
        state, exact = self.run_pair(lam=0.3, kappa=1.0, dt=dt, n_steps=n_steps)
        assert abs(state.u_ab - exact["u_ab"]) < 1e-6
        assert abs(state.v_ab - exact["v_ab"]) < 1e-6
        assert abs(state.u_a - exact["u_a"]) < 1e-6
        assert abs(state.v_a - exact["v_a"]) < 1e-6
        assert abs(state.u_b[0] - exact["u_b0"]) < 1e-6
        assert abs(state.u_b[1] - exact["u_b1"]) < 1e-6
        assert abs(state.v_b[0] - exact["v_b0"]) < 1e-6
        assert abs(state.v_b[1] - exact["v_b1"]) < 1e-6
        # the comparison is meaningful: the cross moment is well resolved
        assert abs(state.u_ab) > 1e-3

    def test_growth_orders(self):
        dt = 1e-4
        s1, _ = self.run_pair(lam=0.3, kappa=1.0, dt=dt, n_steps=200)
        s2, _ = self.run_pair(lam=0.3, kappa=1.0, dt=dt, n_steps=400)
        # cross moments O(lam t); spin-spin moments O(lam^2 t^2).  This
        # coupling is pure two-mode squeezing between the cavity and the
        # uniform spin-wave mode, so <b b> stays exactly zero and the
        # quadratic growth shows up in the occupations v_b.
        ratio_ab = abs(s2.u_ab) / abs(s1.u_ab)
        ratio_bb = abs(s2.v_b[0]) / abs(s1.v_b[0])
        assert abs(ratio_ab - 2.0) < 0.1
        assert abs(ratio_bb - 4.0) < 0.3
        assert abs(s1.u_b[0]) < 1e-12
        assert abs(s1.v_b[0]) < 0.1 * abs(s1.u_ab)


class TestInvariants:
    def test_reflection_symmetry_and_alignment(self):
        params = make_params(n_sites=6, s=0.5, omega=0.4, J=0.08, kappa=1.0, lam=0.25, alpha=0.7)
        dt = 5e-4
        engine = SpinBosonEngine(params, dt)
        state = engine.initial_state()
        src = GaussianNoiseSource(engine.rates, dt, np.random.default_rng(7))
        for _ in range(500):
            state = engine.step(state, src)
            assert state.beta == 0.0
            asym_u = np.abs(state.u_b - np.roll(state.u_b[::-1], 1)).max()
            asym_v = np.abs(state.v_b - np.roll(state.v_b[::-1], 1)).max()
            assert asym_u < 1e-10
            assert asym_v < 1e-10
            assert np.abs(np.fft.fft(state.v_b).imag).max() < 1e-10

    def test_adiabatic_critical_drive_mapping(self):
        # effective collective rate 2 lam^2 / kappa at lam = 0.2, kappa = 1
        kappa_eff = 2.0 * 0.2**2 / 1.0
        assert abs(mean_field_critical_drive(0.01, kappa_eff) - 0.089) < 5e-4


class TestEntropy:
    def test_vacuum_cavity_zero(self):
        state = initial_sb_state(make_params())
        assert abs(sb_spin_cavity_entropy(state)) < 1e-12

    def test_thermal_cavity_closed_form(self):
        state = initial_sb_state(make_params())
        for n_bar in (0.5, 1.0, 3.0):
            state.v_a = n_bar
            expected = (n_bar + 1.0) * np.log(n_bar + 1.0) - n_bar * np.log(n_bar)
            assert abs(sb_spin_cavity_entropy(state) - expected) < 1e-12


def _run_sb_ensemble(model, observables, seed, t_final, window, tmp_path, mode="spin-boson"):
    config = parse_config(
        json.dumps(
            {
                "mode": mode,
                "model": model,
                "integrator": {"dt": 0.02, "t_final": t_final, "sample_stride": 50},
                "ensemble": {"n_traj": 48, "master_seed": seed},
                "observables": observables,
            }
        )
    )
    return run_ensemble(
        config, workers=_WORKERS, steady_window=window, output_dir=str(tmp_path / f"s{seed}")
    )


_WORKERS = min(8, os.cpu_count() or 1)


@pytest.mark.slow
class TestAdiabaticElimination:
    """Fast cavity, kappa >> omega, J, lam: the trajectory-averaged spin
    dynamics matches the spin-only model with collective rate 2 lam^2 / kappa.
    """

    def test_steady_sz_matches_effective_model(self, tmp_path):
        S = 8.0
        window = (60.0, 80.0)
        sb = _run_sb_ensemble(
            {"dims": [16], "omega": 0.06, "J": 0.01, "kappa": 1.0, "lam": 0.2},
            ["sz"], 21, 80.0, window, tmp_path,
        )
        eff = _run_sb_ensemble(
            {"dims": [16], "omega": 0.06, "J": 0.01, "kappa": 0.08},
            ["sz"], 22, 80.0, window, tmp_path, mode="swqt",
        )
        assert abs(sb.steady_mean["sz"] - eff.steady_mean["sz"]) < 0.05 * S
        # both settle near the effective-model mean-field fixed point
        mz = mean_field_fixed_point(0.06, 0.01, 0.08)[2]
        assert abs(sb.steady_mean["sz"] - S * mz) < 0.05 * S

    def test_entropy_rises_across_critical_drive(self, tmp_path):
        # mean-field critical drive of the effective model is near 0.089 kappa
        entropies = {}
        for omega, seed in ((0.05, 31), (0.14, 32)):
            stats = _run_sb_ensemble(
                {"dims": [16], "omega": omega, "J": 0.01, "kappa": 1.0, "lam": 0.2},
                ["entropy"], seed, 80.0, (60.0, 80.0), tmp_path,
            )
            entropies[omega] = stats.steady_mean["entropy"]
        assert entropies[0.14] > 0.05
        assert entropies[0.14] > 5.0 * entropies[0.05]

"""Named end-to-end validation cases behind the CLI ``benchmark`` subcommand.

Each case exercises one documented guarantee of the package against an
independent reference (closed-form dynamics, exact Hilbert-space
integration, or statistical self-consistency) and prints a single
pass/fail line.  Cases A1-A3, A5, A7, and A10 run in seconds to minutes;
A2, A4, A6, A8, and A9 are ensemble-sized and can take from tens of
minutes up to a few hours on one core.
"""

from __future__ import annotations

import math
import multiprocessing
import time
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from .engine import (
    CirculantTrajectoryEngine,
    DenseTrajectoryEngine,
    BinaryNoiseSource,
    GaussianNoiseSource,
    GaussianReplaySource,
    GaussianTrajectoryState,
    ZeroNoiseSource,
    init_polarized,
)
from .exact import (
    conditioned_density_step_batch,
    dicke_channel_ops,
    dicke_half_entropy,
    dicke_hamiltonian,
    dicke_operators,
    integrate_exact_sse,
    integrate_lindblad,
    product_channel_ops,
    product_hamiltonian,
    product_sz,
    purity_batch,
    sse_step_batch,
)
from .lattice import LatticeGeometry
from .model import (
    SpinModel,
    integrate_mean_field,
    mean_field_critical_drive,
    mean_field_fixed_point,
)
from .noise import NoiseRecord, derive_trajectory_rng
from .observables import (
    collective_spin,
    entanglement_entropy,
    half_chain_entropy,
    spin_wave_density,
)
from .protocol import qc_correlator
from .runner import (
    EnsembleSpec,
    ExperimentConfig,
    IntegratorSpec,
    ModelSpec,
    _qc_shot,
    run_ensemble,
    sweep,
)


class BenchmarkError(RuntimeError):
    """Unknown case name or invalid benchmark invocation."""


@dataclass
class CaseResult:
    """Outcome of one named validation case."""

    name: str
    passed: bool
    runtime: float
    checks: dict = field(default_factory=dict)  # criterion -> bool
    metrics: dict = field(default_factory=dict)  # quantity -> float

    def summary(self) -> str:
        status = "PASS" if self.passed else "FAIL"
        failed = [k for k, ok in self.checks.items() if not ok]
        parts = [f"{k}={v:.4g}" for k, v in self.metrics.items()]
        if failed:
            parts.append("failed: " + ",".join(failed))
        detail = "; ".join(parts)
        return f"{self.name}: {status} ({self.runtime:.1f}s) {detail}"


def _pool_map(func, jobs, workers: int):
    if workers > 1 and len(jobs) > 1:
        with multiprocessing.Pool(workers) as pool:
            return pool.map(func, jobs)
    return [func(job) for job in jobs]


def _uniform_model(n_sites, *, s=0.5, omega=1.25, J=0.1, kappa=1.0, alpha=0.0) -> SpinModel:
    return SpinModel(
        geometry=LatticeGeometry((n_sites,)), s=s, omega=omega, J=J, kappa=kappa, alpha=alpha
    )


# ---------------------------------------------------------------------------
# A1: closed-system collective Rabi precession against the analytic solution
# ---------------------------------------------------------------------------


def _case_a1(workers: int, out: Path):
    model = _uniform_model(16, omega=1.0, J=0.0, kappa=0.0)
    S = model.total_spin
    dt = 1e-4
    engine = CirculantTrajectoryEngine(model, dt)
    state = engine.initial_state()
    source = ZeroNoiseSource()
    n_steps = int(round(4.0 * math.pi / dt))
    max_err = 0.0
    max_eps = 0.0
    for m in range(n_steps):
        state = engine.step(state, source)
        if (m + 1) % 100 == 0:
            dense = state.to_dense()
            sz = collective_spin(dense, model.s)[2]
            max_err = max(max_err, abs(sz - S * math.cos(state.time)))
            max_eps = max(max_eps, spin_wave_density(dense, model.s))
    checks = {"sz_analytic": max_err < 1e-3 * S, "sw_density": max_eps < 1e-10}
    return checks, {"max_sz_err": max_err, "max_sw_density": max_eps}


# ---------------------------------------------------------------------------
# A2: monitored ensemble average against the master equation, with a
#     completely-positive density-matrix shadow of every trajectory
# ---------------------------------------------------------------------------

_A2_SEED = 2201


def _case_a2(workers: int, out: Path):
    model = _uniform_model(16)  # S = 8
    dt = 1e-4
    t_final = 3.0
    n_steps = int(round(t_final / dt))
    stride = 500
    n_traj = 2000
    H = dicke_hamiltonian(model)
    ops, rates = dicke_channel_ops(model)
    _, _, Sz, _, _ = dicke_operators(model.total_spin)
    Sz = np.asarray(Sz)
    dim = H.shape[0]
    kap = float(rates[0])

    Psi = np.zeros((dim, n_traj), dtype=complex)
    Psi[-1] = 1.0
    rho = np.zeros((n_traj, dim, dim), dtype=complex)
    rho[:, -1, -1] = 1.0
    rng = np.random.default_rng(_A2_SEED)

    sz_samples = [np.full(n_traj, model.total_spin)]
    min_purity = 1.0
    for n in range(1, n_steps + 1):
        z = rng.standard_normal((2, n_traj))
        dw = np.sqrt(0.5 * kap * dt) * (z[0] + 1j * z[1])
        # the guard threshold follows the Exp(1) tail of the Euler norm
        # drift: the max over 2000 x 30000 draws sits ~20x above the
        # single-trajectory default
        Psi = sse_step_batch(Psi, H, ops, rates, dw[None, :], dt, norm_tol=2e-2)
        rho = conditioned_density_step_batch(rho, H, ops, rates, dw[None, :], dt)
        if n % stride == 0:
            sz_samples.append(np.einsum("ib,ij,jb->b", Psi.conj(), Sz, Psi).real)
            min_purity = min(min_purity, float(purity_batch(rho).min()))

    sz = np.array(sz_samples)  # (n_times, n_traj)
    mean = sz.mean(axis=1)
    stderr = sz.std(axis=1, ddof=1) / np.sqrt(n_traj)

    rho0 = np.zeros((dim, dim), dtype=complex)
    rho0[-1, -1] = 1.0
    lb_dt = 1e-3
    _, lb_states = integrate_lindblad(rho0, H, ops, rates, t_final, lb_dt, int(stride * dt / lb_dt))
    lb_sz = np.array([np.trace(Sz @ r).real for r in lb_states])

    dev = np.abs(mean - lb_sz)
    max_sigma = float((dev / np.maximum(3.0 * stderr, 1e-12)).max())
    checks = {
        "mean_sz_3sigma": bool(np.all(dev <= 3.0 * stderr + 1e-12)),
        "shadow_purity": min_purity > 1.0 - 1e-6,
    }
    return checks, {"max_dev_over_3stderr": max_sigma, "min_purity": min_purity}


# ---------------------------------------------------------------------------
# A3: mean-field critical drive and stationary state in closed form
# ---------------------------------------------------------------------------


def _case_a3(workers: int, out: Path):
    wc = mean_field_critical_drive(0.1, 1.0)
    err_wc = abs(wc - 1.0770)
    omega = 0.8
    _, m = integrate_mean_field(
        np.array([0.0, 0.0, 1.0]), omega, 0.1, 1.0, 200.0, n_samples=201
    )
    err_fp = float(np.abs(m[-1] - mean_field_fixed_point(omega, 0.1, 1.0)).max())
    checks = {"critical_drive": err_wc < 1e-4, "fixed_point": err_fp < 1e-6}
    return checks, {"critical_drive_err": err_wc, "fixed_point_err": err_fp}


# ---------------------------------------------------------------------------
# A4: noise-paired comparison with the exact collective-sector trajectory
#     at S = 64, plus the expansion-control parameter over an ensemble
# ---------------------------------------------------------------------------

_A4_SEED = 14
_A4_MODEL = dict(s=0.5, omega=1.25, J=0.1, kappa=1.0, alpha=0.0)
_A4_DT = 1e-4
_A4_STEPS = 100_000


def _a4_eps_traj(traj_index: int) -> float:
    model = _uniform_model(128, **_A4_MODEL)
    engine = CirculantTrajectoryEngine(model, _A4_DT)
    source = GaussianNoiseSource(
        engine.rates, _A4_DT, derive_trajectory_rng(_A4_SEED, traj_index)
    )
    state = engine.initial_state()
    total = 0.0
    count = 0
    for m in range(_A4_STEPS):
        state = engine.step(state, source)
        if (m + 1) % 1000 == 0:
            total += spin_wave_density(state.to_dense(), model.s)
            count += 1
    return total / count


def _case_a4(workers: int, out: Path):
    model = _uniform_model(128, **_A4_MODEL)
    S = model.total_spin
    dt = _A4_DT
    stride = 500
    engine = CirculantTrajectoryEngine(model, dt)
    record = NoiseRecord(
        mode="gaussian", dt=dt, n_channels=1, master_seed=_A4_SEED, traj_index=0
    )
    source = GaussianNoiseSource(
        engine.rates, dt, derive_trajectory_rng(_A4_SEED, 0), record
    )
    state = engine.initial_state()
    times = [0.0]
    sw_sz = [S]
    sw_ent = [0.0]
    sw_eps = [0.0]
    for m in range(_A4_STEPS):
        state = engine.step(state, source)
        if (m + 1) % stride == 0:
            dense = state.to_dense()
            times.append(state.time)
            sw_sz.append(collective_spin(dense, model.s)[2])
            sw_ent.append(half_chain_entropy(dense))
            sw_eps.append(spin_wave_density(dense, model.s))

    H = dicke_hamiltonian(model)
    ops, rates = dicke_channel_ops(model)
    _, _, Sz, _, _ = dicke_operators(S)
    psi0 = np.zeros(H.shape[0], dtype=complex)
    psi0[-1] = 1.0
    # norm_tol widened for the Exp(1) drift tail over 10^5 steps at S=64
    _, states = integrate_exact_sse(
        psi0, H, ops, rates, GaussianReplaySource(record), dt, _A4_STEPS,
        sample_stride=stride, norm_tol=1e-2,
    )
    ex_sz = np.array([(p.conj() @ (Sz @ p)).real for p in states])
    ex_ent = np.array([dicke_half_entropy(p, model.n_sites) for p in states])

    dsz = float(np.abs(np.array(sw_sz) - ex_sz).max()) / S
    dent = float(np.abs(np.array(sw_ent) - ex_ent).max())

    eps_means = _pool_map(_a4_eps_traj, list(range(100)), workers)
    eps_bar = float(np.mean(eps_means))

    out.mkdir(parents=True, exist_ok=True)
    with (out / "paired_trajectory.csv").open("w") as fh:
        fh.write("time,sz_traj,sz_exact,entropy_traj,entropy_exact,sw_density\n")
        for row in zip(times, sw_sz, ex_sz, sw_ent, ex_ent, sw_eps):
            fh.write(",".join(f"{x:.17g}" for x in row) + "\n")

    checks = {
        "paired_sz": dsz < 0.05,
        "paired_entropy": dent < 0.2,
        "expansion_parameter": eps_bar < 2e-2,
    }
    return checks, {"max_dsz_over_S": dsz, "max_dentropy": dent, "eps_bar": eps_bar}


# ---------------------------------------------------------------------------
# A5: noise-paired comparison with the exact full-Hilbert trajectory for a
#     short power-law chain
# ---------------------------------------------------------------------------


_A5_SEED = 2205
_A5_N_TRAJ = 3
_A5_DT = 5e-5
_A5_STEPS = 100_000  # kappa t <= 5
_A5_STRIDE = 1000


def _a5_paired_deviation(traj_index: int) -> float:
    # s = 2 keeps the expansion parameter small at N = 6, where s = 1/2
    # (S = 3) leaves the method outside its validity regime; dt is set by
    # the exact solver's per-step norm-drift guard at this S, and noise
    # pairing requires a common dt on both sides
    model = _uniform_model(6, s=2.0, alpha=1.0)
    S = model.total_spin
    dt = _A5_DT
    engine = CirculantTrajectoryEngine(model, dt)
    record = NoiseRecord(
        mode="gaussian", dt=dt, n_channels=1, master_seed=_A5_SEED, traj_index=traj_index
    )
    source = GaussianNoiseSource(
        engine.rates, dt, derive_trajectory_rng(_A5_SEED, traj_index), record
    )
    state = engine.initial_state()
    sw_sz = [S]
    for m in range(_A5_STEPS):
        state = engine.step(state, source)
        if (m + 1) % _A5_STRIDE == 0:
            sw_sz.append(collective_spin(state.to_dense(), model.s)[2])

    H = product_hamiltonian(model)
    ops, rates = product_channel_ops(model)
    psi0 = np.zeros(H.shape[0], dtype=complex)
    psi0[-1] = 1.0
    _, states = integrate_exact_sse(
        psi0, H, ops, rates, GaussianReplaySource(record), dt, _A5_STEPS,
        sample_stride=_A5_STRIDE,
    )
    Szp = product_sz(model)
    ex_sz = np.array([(p.conj() @ (Szp @ p)).real for p in states])
    return float(np.abs(np.array(sw_sz) - ex_sz).max()) / S


def _case_a5(workers: int, out: Path):
    # the pointwise deviation along a single paired trajectory is a
    # heavy-tailed statistic (the two integrators diverge exponentially
    # from tiny truncation differences in the supercritical regime), so
    # the validity check is the median over a few paired trajectories
    devs = sorted(_pool_map(_a5_paired_deviation, list(range(_A5_N_TRAJ)), workers))
    median = devs[_A5_N_TRAJ // 2]
    checks = {"paired_sz_median": median < 0.1}
    return checks, {
        "median_dsz_over_S": median,
        "max_dsz_over_S": devs[-1],
        "min_dsz_over_S": devs[0],
    }


# ---------------------------------------------------------------------------
# A6: statistical equivalence of the two unravelings at S = 64
# ---------------------------------------------------------------------------

_A6_SEEDS = {"gaussian": 2206, "binary": 2207}
_A6_DT = 1e-3
_A6_STEPS = 5000
_A6_STRIDE = 100


def _a6_traj(args):
    noise_mode, traj_index = args
    model = _uniform_model(128, omega=1.3)
    engine = CirculantTrajectoryEngine(model, _A6_DT)
    rng = derive_trajectory_rng(_A6_SEEDS[noise_mode], traj_index)
    if noise_mode == "binary":
        source = BinaryNoiseSource(_A6_DT, rng)
    else:
        source = GaussianNoiseSource(engine.rates, _A6_DT, rng)
    state = engine.initial_state()
    sz = [model.total_spin]
    ent = [0.0]
    for m in range(_A6_STEPS):
        state = engine.step(state, source)
        if (m + 1) % _A6_STRIDE == 0:
            dense = state.to_dense()
            sz.append(collective_spin(dense, model.s)[2])
            ent.append(half_chain_entropy(dense))
    return np.array(sz), np.array(ent)


def _case_a6(workers: int, out: Path):
    n_traj = 500
    data = {}
    for mode in ("gaussian", "binary"):
        results = _pool_map(_a6_traj, [(mode, i) for i in range(n_traj)], workers)
        sz = np.array([r[0] for r in results])  # (n_traj, n_times)
        ent = np.array([r[1] for r in results])
        data[mode] = {"sz": sz, "entropy": ent, "sz_sq": sz**2}

    checks = {}
    metrics = {}
    for name in ("sz", "entropy", "sz_sq"):
        g = data["gaussian"][name]
        b = data["binary"][name]
        dev = np.abs(g.mean(axis=0) - b.mean(axis=0))
        width = 3.0 * np.sqrt(
            g.std(axis=0, ddof=1) ** 2 / g.shape[0] + b.std(axis=0, ddof=1) ** 2 / b.shape[0]
        )
        checks[f"{name}_3sigma"] = bool(np.all(dev <= width + 1e-12))
        metrics[f"{name}_max_dev_ratio"] = float(
            (dev / np.maximum(width, 1e-12)).max()
        )
    return checks, metrics


# ---------------------------------------------------------------------------
# A7: entanglement-entropy unit suite against closed forms and a Fock-space
#     oracle
# ---------------------------------------------------------------------------


def _case_a7(workers: int, out: Path):
    checks = {}
    metrics = {}

    # vacuum: every mode at the minimal symplectic eigenvalue
    model = _uniform_model(4)
    vac = half_chain_entropy(init_polarized(model, (0.0, 0.0, 1.0)))
    checks["vacuum_exact_zero"] = vac == 0.0

    # single thermal mode against the closed form
    nbar = 1.0
    thermal = GaussianTrajectoryState(
        theta=0.0,
        phi=0.0,
        beta=np.zeros(2, dtype=complex),
        u=np.zeros((2, 2), dtype=complex),
        v=np.diag([nbar, 0.0]).astype(complex),
    )
    closed = (nbar + 1.0) * math.log(nbar + 1.0) - nbar * math.log(nbar)
    err_th = abs(entanglement_entropy(thermal, [0]) - closed)
    checks["thermal_closed_form"] = err_th < 1e-10
    metrics["thermal_err"] = err_th

    # two-mode squeezed vacuum against a 40-level Fock-space reduction
    r = 0.8
    ch, sh = math.cosh(r), math.sinh(r)
    tms = GaussianTrajectoryState(
        theta=0.0,
        phi=0.0,
        beta=np.zeros(2, dtype=complex),
        u=np.array([[0.0, ch * sh], [ch * sh, 0.0]], dtype=complex),
        v=(sh**2 * np.eye(2)).astype(complex),
    )
    n = np.arange(40)
    p = (np.tanh(r) ** (2 * n)) / ch**2
    fock = float(-(p * np.log(p)).sum())
    err_tms = abs(entanglement_entropy(tms, [0]) - fock)
    checks["tms_fock_oracle"] = err_tms < 1e-6
    metrics["tms_err"] = err_tms

    # bipartition symmetry on random pure Gaussian states (exact Bogoliubov
    # rotations of the vacuum, so purity holds to machine precision)
    rng = np.random.default_rng(2209)
    max_asym = 0.0
    for N in (4, 6, 8):
        for _ in range(3):
            st = _random_pure_gaussian_state(N, rng)
            k = int(rng.integers(1, N))
            sub = rng.choice(N, size=k, replace=False)
            comp = np.setdiff1d(np.arange(N), sub)
            max_asym = max(
                max_asym,
                abs(entanglement_entropy(st, sub) - entanglement_entropy(st, comp)),
            )
    checks["bipartition_symmetry"] = max_asym < 1e-8
    metrics["max_asymmetry"] = max_asym
    return checks, metrics


def _random_pure_gaussian_state(n_modes: int, rng) -> GaussianTrajectoryState:
    """Vacuum transformed by a random Bogoliubov rotation (exactly pure)."""
    from scipy.linalg import expm

    X = rng.standard_normal((n_modes, n_modes)) + 1j * rng.standard_normal(
        (n_modes, n_modes)
    )
    X = 0.5 * (X + X.conj().T)
    Y = rng.standard_normal((n_modes, n_modes)) + 1j * rng.standard_normal(
        (n_modes, n_modes)
    )
    Y = 0.5 * (Y + Y.T)
    G = np.block([[X, Y], [-Y.conj(), -X.conj()]])
    Smat = expm(-1j * G)
    A = Smat[:n_modes, :n_modes]
    B = Smat[:n_modes, n_modes:]
    return GaussianTrajectoryState(
        theta=0.0,
        phi=0.0,
        beta=np.zeros(n_modes, dtype=complex),
        u=A @ B.T,
        v=B.conj() @ B.T,
    )


# ---------------------------------------------------------------------------
# A8: steady-state entanglement and expansion-parameter scaling with N near
#     the critical drive
# ---------------------------------------------------------------------------

_A8_OMEGAS = (0.95, 1.06, 1.20)
_A8_SIZES = (16, 32, 64)


def _case_a8(workers: int, out: Path):
    out.mkdir(parents=True, exist_ok=True)
    se_max = {}
    eps_peak = {}
    omega_star = {}
    for N in _A8_SIZES:
        config = ExperimentConfig(
            mode="swqt",
            model=ModelSpec(dims=(N,), s=0.5, omega=1.06, J=0.1, kappa=1.0, alpha=0.2),
            integrator=IntegratorSpec(dt=2e-3, t_final=50.0, sample_stride=125),
            # 300 trajectories: the per-doubling entropy increment is
            # ~0.025, so the per-point stderr must sit well below 0.01
            # for the log-fit quality check to test physics, not noise
            ensemble=EnsembleSpec(n_traj=300, master_seed=2280 + N),
            observables=("entropy", "sw_density"),
            output_dir=str(out / f"N={N}"),
        )
        entries = sweep(
            config,
            "omega",
            list(_A8_OMEGAS),
            workers=workers,
            steady_window=(25.0, 50.0),
            output_dir=out / f"N={N}",
        )
        by_omega = {
            w: stats for w, stats in entries if stats is not None and not stats.partial
        }
        if len(by_omega) != len(_A8_OMEGAS):
            return {"sweep_complete": False}, {"completed": float(len(by_omega))}
        se_max[N] = max(s.steady_mean["entropy"] for s in by_omega.values())
        omega_star[N] = max(by_omega, key=lambda w: by_omega[w].steady_mean["entropy"])
        eps_peak[N] = max(s.steady_mean["sw_density"] for s in by_omega.values())

    sizes = np.array(_A8_SIZES, dtype=float)
    y = np.array([se_max[N] for N in _A8_SIZES])
    slope, intercept = np.polyfit(np.log(sizes), y, 1)
    fitted = slope * np.log(sizes) + intercept
    ss_res = float(((y - fitted) ** 2).sum())
    ss_tot = float(((y - y.mean()) ** 2).sum())
    r2 = 1.0 - ss_res / ss_tot if ss_tot > 0 else 0.0

    with (out / "scaling_summary.csv").open("w") as fh:
        fh.write("N,omega_star,entropy_max,sw_density_peak\n")
        for N in _A8_SIZES:
            fh.write(f"{N},{omega_star[N]:.17g},{se_max[N]:.17g},{eps_peak[N]:.17g}\n")

    checks = {
        "entropy_grows_with_N": bool(np.all(np.diff(y) > 0)),
        "log_fit_r2": r2 > 0.9 and slope > 0,
        "eps_peak_shrinks_with_N": bool(
            np.all(np.diff([eps_peak[N] for N in _A8_SIZES]) < 0)
        ),
    }
    metrics = {
        "entropy_16": se_max[16],
        "entropy_64": se_max[64],
        "log_slope": float(slope),
        "r2": r2,
        "eps_peak_16": eps_peak[16],
        "eps_peak_64": eps_peak[64],
    }
    return checks, metrics


# ---------------------------------------------------------------------------
# A9: measurement-conditioned quantum-classical correlator across the
#     critical drive, converged to a target standard error
# ---------------------------------------------------------------------------

_A9_OMEGAS = (0.6, 0.9, 1.077, 1.3, 1.6)
_A9_DT = 2e-3
_A9_NORM_TOL = 5e-3
_A9_BATCH = 32
_A9_CAP = 512


def _a9_config(n_sites: int, omega: float, seed: int) -> ExperimentConfig:
    return ExperimentConfig(
        mode="qc-protocol",
        model=ModelSpec(dims=(n_sites,), s=0.5, omega=omega, J=0.1, kappa=1.0, alpha=0.0),
        integrator=IntegratorSpec(dt=_A9_DT, t_final=50.0, sample_stride=125),
        ensemble=EnsembleSpec(n_traj=_A9_CAP, master_seed=seed),
        observables=("correlator",),
    )


def _qc_converged(config: ExperimentConfig, threshold, workers: int):
    """Grow the shot count in batches until stderr <= threshold(estimate).

    Measurement times cycle the steady-window sample grid exactly as in
    ``run_qc_protocol``; already-computed shots are kept between batches.
    """
    dt = config.integrator.dt
    stride = config.integrator.sample_stride
    window = (25.0, 50.0)
    grid = [
        m
        for m in range(stride, config.n_steps + 1, stride)
        if window[0] <= m * dt <= window[1]
    ]
    shots = []
    next_index = 0
    estimate = None
    while next_index < _A9_CAP:
        n_new = min(_A9_BATCH if shots else 2 * _A9_BATCH, _A9_CAP - next_index)
        jobs = [
            (config, i, grid[i % len(grid)], _A9_NORM_TOL)
            for i in range(next_index, next_index + n_new)
        ]
        results = _pool_map(_qc_shot, jobs, workers)
        shots.extend((o, c) for _, o, c in results)
        next_index += n_new
        estimate = qc_correlator(shots)
        if estimate.stderr <= threshold(estimate):
            break
    return estimate


def _case_a9(workers: int, out: Path):
    out.mkdir(parents=True, exist_ok=True)
    checks = {}
    metrics = {}
    rows = []
    for S in (16, 32):
        n_sites = int(2 * S)
        estimates = {}
        # the sub-critical point defines the absolute error target
        est = _qc_converged(
            _a9_config(n_sites, _A9_OMEGAS[0], 2290 + n_sites),
            lambda e: 0.05 * abs(e.value),
            workers,
        )
        estimates[_A9_OMEGAS[0]] = est
        tau = 0.05 * abs(est.value)
        for k, omega in enumerate(_A9_OMEGAS[1:], start=1):
            estimates[omega] = _qc_converged(
                _a9_config(n_sites, omega, 2290 + n_sites + k), lambda e: tau, workers
            )
        rows += [
            (S, w, e.value, e.stderr, e.shots) for w, e in sorted(estimates.items())
        ]
        sub = estimates[_A9_OMEGAS[0]]
        sup = estimates[_A9_OMEGAS[-1]]
        scale = S * S / 4.0
        checks[f"S{S}_subcritical_scale"] = 0.25 * scale < sub.value < 16.0 * scale
        checks[f"S{S}_supercritical_drop"] = sup.value <= sub.value / 3.0
        checks[f"S{S}_stderr_target"] = all(e.stderr <= tau for e in estimates.values())
        metrics[f"S{S}_corr_sub"] = sub.value
        metrics[f"S{S}_corr_sup"] = sup.value
        metrics[f"S{S}_stderr_max"] = max(e.stderr for e in estimates.values())

    with (out / "qc_sweep.csv").open("w") as fh:
        fh.write("S,omega,value,stderr,shots\n")
        for row in rows:
            fh.write(",".join(f"{x:.17g}" if isinstance(x, float) else str(x) for x in row) + "\n")
    return checks, metrics


# ---------------------------------------------------------------------------
# A10: bit-for-bit reproducibility across worker counts and repeated runs
# ---------------------------------------------------------------------------


def _case_a10(workers: int, out: Path):
    config = ExperimentConfig(
        mode="swqt",
        model=ModelSpec(dims=(8,), s=0.5, omega=1.25, J=0.1, kappa=1.0, alpha=0.5),
        integrator=IntegratorSpec(dt=1e-3, t_final=2.0, sample_stride=20),
        ensemble=EnsembleSpec(n_traj=6, master_seed=2210),
        observables=("sz", "entropy", "sw_density"),
        output_dir=str(out / "serial"),
    )
    run_ensemble(config, workers=1, output_dir=out / "serial")
    run_ensemble(config, workers=8, output_dir=out / "parallel")
    run_ensemble(config, workers=1, output_dir=out / "repeat")
    checks = {}
    for fname in ("raw.csv", "aggregated.csv", "steady_state.csv"):
        ref = (out / "serial" / fname).read_bytes()
        checks[f"{fname}_workers"] = (out / "parallel" / fname).read_bytes() == ref
        checks[f"{fname}_repeat"] = (out / "repeat" / fname).read_bytes() == ref
    return checks, {}


# ---------------------------------------------------------------------------
# registry and entry point
# ---------------------------------------------------------------------------

CASES = {
    "A1": (_case_a1, "collective Rabi precession vs the analytic solution"),
    "A2": (_case_a2, "monitored ensemble mean vs the master equation + purity shadow"),
    "A3": (_case_a3, "mean-field critical drive and stationary state"),
    "A4": (_case_a4, "noise-paired exact collective trajectory at S=64"),
    "A5": (_case_a5, "noise-paired exact power-law chain at N=6"),
    "A6": (_case_a6, "binary vs gaussian unraveling statistics at S=64"),
    "A7": (_case_a7, "entanglement entropy unit suite"),
    "A8": (_case_a8, "entanglement and expansion-parameter scaling with N"),
    "A9": (_case_a9, "quantum-classical correlator across the critical drive"),
    "A10": (_case_a10, "bit-for-bit output reproducibility"),
}


def run_case(name: str, *, workers: int = 1, output_dir=None) -> CaseResult:
    """Run one named case, print its pass/fail line, and return the result."""
    key = name.upper()
    if key not in CASES:
        raise BenchmarkError(f"unknown case {name!r}; choose from {', '.join(CASES)}")
    func, _ = CASES[key]
    out = Path(output_dir) if output_dir is not None else Path("runs") / "benchmarks" / key
    t0 = time.time()
    checks, metrics = func(max(1, int(workers)), out)
    result = CaseResult(
        name=key,
        passed=all(checks.values()),
        runtime=time.time() - t0,
        checks=checks,
        metrics=metrics,
    )
    print(result.summary())
    return result

"""Experiment orchestration: configs, ensembles, statistics, persistence.

A run is fully described by a JSON config (strictly validated, all
violations reported at once).  Ensembles execute one trajectory per
worker with per-trajectory derived seeds and merge deterministically by
trajectory index, so results are byte-identical regardless of worker
count.  Outputs are a raw per-trajectory CSV, an aggregated per-time
CSV, a steady-state summary, and a manifest.
"""

from __future__ import annotations

import dataclasses
import json
import multiprocessing
import time as _time
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from . import __version__
from .engine import (
    BinaryNoiseSource,
    CirculantTrajectoryEngine,
    DenseTrajectoryEngine,
    EngineError,
    GaussianNoiseSource,
)
from .exact import (
    dicke_channel_ops,
    dicke_half_entropy,
    dicke_hamiltonian,
    dicke_operators,
    integrate_exact_sse,
    integrate_lindblad,
    product_channel_ops,
    product_hamiltonian,
    product_sz,
    projective_measurement_sample,
)
from .lattice import LatticeGeometry
from .model import SpinModel, integrate_mean_field
from .noise import derive_trajectory_rng
from .observables import (
    collective_spin,
    entanglement_entropy,
    half_chain_entropy,
    spin_wave_density,
)
from .protocol import qc_correlator, replay_classical, weak_measurement_chain
from .spin_boson import (
    SpinBosonEngine,
    SpinBosonParams,
    sb_collective_spin,
    sb_spin_cavity_entropy,
    sb_spin_wave_occupation,
)


class ConfigError(ValueError):
    """Raised with the full list of config violations."""

    def __init__(self, violations):
        self.violations = list(violations)
        super().__init__("invalid config:\n" + "\n".join(f"  - {v}" for v in self.violations))


class RunnerError(RuntimeError):
    pass


MODES = ("swqt", "spin-boson", "exact-dicke", "exact-full", "meanfield", "lindblad", "qc-protocol")
NOISE_MODES = ("gaussian", "binary")
OBSERVABLES = ("sz", "spin_vector", "entropy", "sw_density", "correlator")

# which observables each mode can emit
_MODE_OBSERVABLES = {
    "swqt": {"sz", "spin_vector", "entropy", "sw_density"},
    "spin-boson": {"sz", "sw_density", "entropy"},
    "exact-dicke": {"sz", "entropy"},
    "exact-full": {"sz"},
    "meanfield": {"sz", "spin_vector"},
    "lindblad": {"sz"},
    "qc-protocol": {"correlator"},
}


@dataclass(frozen=True)
class ModelSpec:
    dims: tuple
    s: float = 0.5
    omega: float = 1.25
    J: float = 0.1
    kappa: float = 1.0
    alpha: float = 0.0
    lam: float = 0.0  # cavity coupling; spin-boson mode only

    def build(self) -> SpinModel:
        return SpinModel(
            geometry=LatticeGeometry(tuple(self.dims)),
            s=self.s,
            omega=self.omega,
            J=self.J,
            kappa=self.kappa,
            alpha=self.alpha,
        )

    def build_spin_boson(self) -> SpinBosonParams:
        return SpinBosonParams(
            n_sites=int(self.dims[0]),
            s=self.s,
            omega=self.omega,
            J=self.J,
            kappa=self.kappa,
            lam=self.lam,
            alpha=self.alpha,
        )


@dataclass(frozen=True)
class IntegratorSpec:
    dt: float
    t_final: float
    sample_stride: int = 1


@dataclass(frozen=True)
class EnsembleSpec:
    n_traj: int = 1
    master_seed: int = 0


@dataclass(frozen=True)
class ExperimentConfig:
    mode: str
    model: ModelSpec
    integrator: IntegratorSpec
    ensemble: EnsembleSpec = EnsembleSpec()
    noise_mode: str = "gaussian"
    observables: tuple = ("sz",)
    bipartition: tuple | None = None
    output_dir: str = "runs/out"

    @property
    def n_steps(self) -> int:
        return int(round(self.integrator.t_final / self.integrator.dt))


_SCHEMA = {
    "mode": None,
    "model": {"dims", "s", "omega", "J", "kappa", "alpha", "lam"},
    "integrator": {"dt", "t_final", "sample_stride"},
    "ensemble": {"n_traj", "master_seed"},
    "noise_mode": None,
    "observables": None,
    "bipartition": None,
    "output_dir": None,
}


def parse_config(text: str) -> ExperimentConfig:
    """Parse and validate a JSON config; raises with every violation found."""
    violations = []
    try:
        raw = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ConfigError([f"not valid JSON: {exc}"]) from exc
    if not isinstance(raw, dict):
        raise ConfigError(["top level must be an object"])

    for key in raw:
        if key not in _SCHEMA:
            violations.append(f"unknown key {key!r}")
    for section, allowed in _SCHEMA.items():
        if allowed is not None and isinstance(raw.get(section), dict):
            for key in raw[section]:
                if key not in allowed:
                    violations.append(f"unknown key {section}.{key!r}")

    mode = raw.get("mode")
    if mode not in MODES:
        violations.append(f"mode must be one of {MODES}, got {mode!r}")

    model_raw = raw.get("model")
    model = None
    if not isinstance(model_raw, dict) or "dims" not in model_raw:
        violations.append("model.dims is required")
    else:
        try:
            model = ModelSpec(
                dims=tuple(int(d) for d in model_raw["dims"]),
                **{k: v for k, v in model_raw.items() if k != "dims" and k in _SCHEMA["model"]},
            )
            model.build()
        except (TypeError, ValueError) as exc:
            violations.append(f"model: {exc}")
            model = None

    integ_raw = raw.get("integrator")
    integ = None
    if not isinstance(integ_raw, dict) or not {"dt", "t_final"} <= set(integ_raw):
        violations.append("integrator.dt and integrator.t_final are required")
    else:
        integ = IntegratorSpec(
            dt=float(integ_raw["dt"]),
            t_final=float(integ_raw["t_final"]),
            sample_stride=int(integ_raw.get("sample_stride", 1)),
        )
        if integ.dt <= 0:
            violations.append("integrator.dt must be positive")
        elif integ.t_final < integ.dt:
            violations.append("integrator.t_final must be at least dt")
        if integ.sample_stride < 1:
            violations.append("integrator.sample_stride must be >= 1")

    ens_raw = raw.get("ensemble", {})
    ensemble = EnsembleSpec(
        n_traj=int(ens_raw.get("n_traj", 1)), master_seed=int(ens_raw.get("master_seed", 0))
    )
    if ensemble.n_traj < 1:
        violations.append("ensemble.n_traj must be >= 1")

    noise_mode = raw.get("noise_mode", "gaussian")
    if noise_mode not in NOISE_MODES:
        violations.append(f"noise_mode must be one of {NOISE_MODES}, got {noise_mode!r}")

    observables = tuple(raw.get("observables", ["sz"]))
    for obs in observables:
        if obs not in OBSERVABLES:
            violations.append(f"unknown observable {obs!r}")
    if mode in _MODE_OBSERVABLES:
        for obs in observables:
            if obs in OBSERVABLES and obs not in _MODE_OBSERVABLES[mode]:
                violations.append(f"observable {obs!r} is not available in mode {mode!r}")

    bipartition = raw.get("bipartition")
    if bipartition is not None:
        bipartition = tuple(int(i) for i in bipartition)

    if model is not None and mode in ("exact-dicke", "lindblad", "qc-protocol"):
        if model.alpha != 0.0:
            violations.append(f"mode {mode!r} requires alpha = 0 (collective basis), got {model.alpha}")
    if mode in ("exact-dicke", "exact-full", "lindblad", "spin-boson") and noise_mode == "binary":
        violations.append(f"mode {mode!r} supports gaussian noise only")
    if model is not None and mode == "spin-boson" and len(model.dims) != 1:
        violations.append("mode 'spin-boson' requires a 1D chain")
    if model is not None and model.lam != 0.0 and mode != "spin-boson":
        violations.append(f"model.lam is only meaningful in mode 'spin-boson', got {model.lam}")

    if violations:
        raise ConfigError(violations)

    return ExperimentConfig(
        mode=mode,
        model=model,
        integrator=integ,
        ensemble=ensemble,
        noise_mode=noise_mode,
        observables=observables,
        bipartition=bipartition,
        output_dir=str(raw.get("output_dir", "runs/out")),
    )


def serialize_config(config: ExperimentConfig) -> str:
    raw = {
        "mode": config.mode,
        "model": dataclasses.asdict(config.model) | {"dims": list(config.model.dims)},
        "integrator": dataclasses.asdict(config.integrator),
        "ensemble": dataclasses.asdict(config.ensemble),
        "noise_mode": config.noise_mode,
        "observables": list(config.observables),
        "bipartition": list(config.bipartition) if config.bipartition else None,
        "output_dir": config.output_dir,
    }
    return json.dumps(raw, indent=2, sort_keys=True)


# ---------------------------------------------------------------------------
# single-trajectory execution
# ---------------------------------------------------------------------------


def _swqt_trajectory(config: ExperimentConfig, traj_index: int):
    model = config.model.build()
    dt = config.integrator.dt
    try:
        engine = CirculantTrajectoryEngine(model, dt)
    except EngineError:
        engine = DenseTrajectoryEngine(model, dt)
    rng = derive_trajectory_rng(config.ensemble.master_seed, traj_index)
    if config.noise_mode == "binary":
        source = BinaryNoiseSource(dt, rng)
    else:
        source = GaussianNoiseSource(engine.rates, dt, rng)
    state = engine.initial_state((0.0, 0.0, 1.0))
    stride = config.integrator.sample_stride

    def measure(st):
        dense = st.to_dense() if hasattr(st, "to_dense") else st
        row = {}
        for obs in config.observables:
            if obs == "sz":
                row["sz"] = collective_spin(dense, model.s)[2]
            elif obs == "spin_vector":
                sx, sy, sz = collective_spin(dense, model.s)
                row.update({"sx": sx, "sy": sy, "sz_vec": sz})
            elif obs == "entropy":
                if config.bipartition is not None:
                    row["entropy"] = entanglement_entropy(dense, config.bipartition)
                else:
                    row["entropy"] = half_chain_entropy(dense)
            elif obs == "sw_density":
                row["sw_density"] = spin_wave_density(dense, model.s)
        return row

    times = [0.0]
    rows = [measure(state)]
    for m in range(config.n_steps):
        state = engine.step(state, source)
        if (m + 1) % stride == 0:
            times.append(state.time)
            rows.append(measure(state))
    return np.array(times), rows


def _spin_boson_trajectory(config: ExperimentConfig, traj_index: int):
    params = config.model.build_spin_boson()
    dt = config.integrator.dt
    engine = SpinBosonEngine(params, dt)
    rng = derive_trajectory_rng(config.ensemble.master_seed, traj_index)
    source = GaussianNoiseSource(engine.rates, dt, rng)
    state = engine.initial_state((0.0, 0.0, 1.0))
    stride = config.integrator.sample_stride

    def measure(st):
        row = {}
        for obs in config.observables:
            if obs == "sz":
                row["sz"] = sb_collective_spin(st, params.s)[2]
            elif obs == "sw_density":
                row["sw_density"] = sb_spin_wave_occupation(st) / (params.n_sites * params.s)
            elif obs == "entropy":
                row["entropy"] = sb_spin_cavity_entropy(st)
        return row

    times = [0.0]
    rows = [measure(state)]
    for m in range(config.n_steps):
        state = engine.step(state, source)
        if (m + 1) % stride == 0:
            times.append(state.time)
            rows.append(measure(state))
    return np.array(times), rows


def _exact_trajectory(config: ExperimentConfig, traj_index: int):
    model = config.model.build()
    dt = config.integrator.dt
    if config.mode == "exact-dicke":
        H = dicke_hamiltonian(model)
        ops, rates = dicke_channel_ops(model)
        _, _, Sz, _, _ = dicke_operators(model.total_spin)
        psi0 = np.zeros(H.shape[0], dtype=complex)
        psi0[-1] = 1.0
        sz_of = lambda psi: (psi.conj() @ (Sz @ psi)).real
    else:
        H = product_hamiltonian(model)
        ops, rates = product_channel_ops(model)
        Szp = product_sz(model)
        psi0 = np.zeros(H.shape[0], dtype=complex)
        psi0[-1] = 1.0
        sz_of = lambda psi: (psi.conj() @ (Szp @ psi)).real
    rng = derive_trajectory_rng(config.ensemble.master_seed, traj_index)
    source = GaussianNoiseSource(np.asarray(rates), dt, rng)
    times, states = integrate_exact_sse(
        psi0, H, ops, rates, source, dt, config.n_steps, config.integrator.sample_stride
    )
    rows = []
    for psi in states:
        row = {}
        for obs in config.observables:
            if obs == "sz":
                row["sz"] = sz_of(psi)
            elif obs == "entropy":
                row["entropy"] = dicke_half_entropy(psi, model.n_sites)
        rows.append(row)
    return np.asarray(times), rows


def _deterministic_series(config: ExperimentConfig):
    model = config.model.build()
    S = model.total_spin
    if config.mode == "meanfield":
        n_samples = config.n_steps // config.integrator.sample_stride + 1
        times, m = integrate_mean_field(
            np.array([0.0, 0.0, 1.0]),
            model.omega,
            model.J,
            model.kappa,
            config.integrator.t_final,
            n_samples=n_samples,
        )
        rows = []
        for mx, my, mz in m:
            row = {}
            for obs in config.observables:
                if obs == "sz":
                    row["sz"] = S * mz
                elif obs == "spin_vector":
                    row.update({"sx": S * mx, "sy": S * my, "sz_vec": S * mz})
            rows.append(row)
        return np.asarray(times), rows
    # lindblad
    H = dicke_hamiltonian(model)
    ops, rates = dicke_channel_ops(model)
    _, _, Sz, _, _ = dicke_operators(S)
    dim = H.shape[0]
    rho0 = np.zeros((dim, dim), dtype=complex)
    rho0[-1, -1] = 1.0
    times, states = integrate_lindblad(
        rho0, H, ops, rates, config.integrator.t_final, config.integrator.dt,
        config.integrator.sample_stride,
    )
    rows = [{"sz": np.trace(Sz @ rho).real} for rho in states]
    return np.asarray(times), rows


def run_trajectory(config: ExperimentConfig, traj_index: int):
    """One trajectory (or the deterministic series); returns (times, rows)."""
    if config.mode == "swqt":
        return _swqt_trajectory(config, traj_index)
    if config.mode == "spin-boson":
        return _spin_boson_trajectory(config, traj_index)
    if config.mode in ("exact-dicke", "exact-full"):
        return _exact_trajectory(config, traj_index)
    if config.mode in ("meanfield", "lindblad"):
        return _deterministic_series(config)
    raise RunnerError(f"mode {config.mode!r} has no per-trajectory runner")


def _worker(args):
    config, traj_index = args
    try:
        times, rows = run_trajectory(config, traj_index)
        return traj_index, times, rows, None
    except Exception as exc:  # noqa: BLE001 - failures are data here
        return traj_index, None, None, f"{type(exc).__name__}: {exc}"


# ---------------------------------------------------------------------------
# ensemble statistics and persistence
# ---------------------------------------------------------------------------


@dataclass
class EnsembleStatistics:
    """Per-time ensemble mean and standard error for each observable."""

    times: np.ndarray
    observables: tuple
    mean: dict
    stderr: dict
    n_traj: int
    steady_window: tuple
    steady_mean: dict = field(default_factory=dict)
    steady_stderr: dict = field(default_factory=dict)
    failures: list = field(default_factory=list)

    @property
    def partial(self) -> bool:
        return bool(self.failures)


def _column_names(config: ExperimentConfig):
    names = []
    for obs in config.observables:
        if obs == "spin_vector":
            names += ["sx", "sy", "sz_vec"]
        elif obs != "correlator":
            names.append(obs)
    return names


def _fmt(x: float) -> str:
    return f"{float(x):.17g}"


def _aggregate(config: ExperimentConfig, results, steady_window):
    names = None
    times = None
    series = {}
    failures = []
    for traj_index, t, rows, error in results:
        if error is not None:
            failures.append((traj_index, error))
            continue
        if times is None:
            times = t
            names = list(rows[0].keys())
            series = {name: [] for name in names}
        for name in names:
            series[name].append([row[name] for row in rows])
    if times is None:
        raise RunnerError("every trajectory failed: " + "; ".join(e for _, e in failures))
    n = len(next(iter(series.values())))
    mean, stderr, steady_mean, steady_stderr = {}, {}, {}, {}
    in_window = (times >= steady_window[0]) & (times <= steady_window[1])
    for name in series:
        data = np.array(series[name])  # (n_traj, n_times)
        mean[name] = data.mean(axis=0)
        if n > 1:
            stderr[name] = data.std(axis=0, ddof=1) / np.sqrt(n)
        else:
            stderr[name] = np.zeros_like(mean[name])
        window_avgs = data[:, in_window].mean(axis=1)
        steady_mean[name] = float(window_avgs.mean())
        if n > 1:
            steady_stderr[name] = float(window_avgs.std(ddof=1) / np.sqrt(n))
        else:
            steady_stderr[name] = 0.0
    return EnsembleStatistics(
        times=times,
        observables=tuple(series.keys()),
        mean=mean,
        stderr=stderr,
        n_traj=n,
        steady_window=steady_window,
        steady_mean=steady_mean,
        steady_stderr=steady_stderr,
        failures=failures,
    )


def _write_outputs(config: ExperimentConfig, results, stats: EnsembleStatistics, out_dir: Path):
    raw_path = out_dir / "raw.csv"
    with raw_path.open("w") as fh:
        fh.write("time,traj_index,observable,value\n")
        for traj_index, times, rows, error in results:
            if error is not None:
                continue
            for t, row in zip(times, rows):
                for name, value in row.items():
                    fh.write(f"{_fmt(t)},{traj_index},{name},{_fmt(value)}\n")
    agg_path = out_dir / "aggregated.csv"
    with agg_path.open("w") as fh:
        fh.write("time,observable,mean,stderr,n\n")
        for i, t in enumerate(stats.times):
            for name in stats.observables:
                fh.write(
                    f"{_fmt(t)},{name},{_fmt(stats.mean[name][i])},"
                    f"{_fmt(stats.stderr[name][i])},{stats.n_traj}\n"
                )
    steady_path = out_dir / "steady_state.csv"
    with steady_path.open("w") as fh:
        fh.write("observable,window_start,window_end,mean,stderr,n\n")
        for name in stats.observables:
            fh.write(
                f"{name},{_fmt(stats.steady_window[0])},{_fmt(stats.steady_window[1])},"
                f"{_fmt(stats.steady_mean[name])},{_fmt(stats.steady_stderr[name])},"
                f"{stats.n_traj}\n"
            )


def _write_manifest(out_dir: Path, config: ExperimentConfig, status, results=None, t0=None):
    manifest = {
        "version": __version__,
        "status": status,
        "config": json.loads(serialize_config(config)),
        "master_seed": config.ensemble.master_seed,
        "started": t0,
        "finished": _time.time() if status != "running" else None,
    }
    if results is not None:
        manifest["trajectories"] = [
            {"index": idx, "status": "ok" if err is None else "failed", "error": err}
            for idx, _, _, err in results
        ]
    (out_dir / "manifest.json").write_text(json.dumps(manifest, indent=2))


def run_ensemble(
    config: ExperimentConfig,
    *,
    workers: int = 1,
    steady_window: tuple | None = None,
    output_dir=None,
) -> EnsembleStatistics:
    """Execute the configured ensemble and persist all artifacts.

    The trajectory loop parallelizes over worker processes; the merge is
    a deterministic fold in trajectory order, so outputs do not depend
    on ``workers``.  Failed trajectories are recorded in the manifest
    and excluded from the statistics, which are then flagged partial.
    """
    if config.mode == "qc-protocol":
        raise RunnerError("use run_qc_protocol for the qc-protocol mode")
    out_dir = Path(output_dir if output_dir is not None else config.output_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    if steady_window is None:
        steady_window = (config.integrator.t_final / 2.0, config.integrator.t_final)
    t0 = _time.time()
    _write_manifest(out_dir, config, "running", t0=t0)

    n_traj = 1 if config.mode in ("meanfield", "lindblad") else config.ensemble.n_traj
    jobs = [(config, i) for i in range(n_traj)]
    if workers > 1 and len(jobs) > 1:
        with multiprocessing.Pool(workers) as pool:
            results = pool.map(_worker, jobs)
    else:
        results = [_worker(job) for job in jobs]
    results.sort(key=lambda r: r[0])

    stats = _aggregate(config, results, steady_window)
    _write_outputs(config, results, stats, out_dir)
    _write_manifest(
        out_dir, config, "partial" if stats.partial else "complete", results=results, t0=t0
    )
    return stats


# ---------------------------------------------------------------------------
# parameter sweeps
# ---------------------------------------------------------------------------

SWEEP_PARAMETERS = ("omega", "alpha", "N", "J")


def sweep(
    config: ExperimentConfig,
    parameter: str,
    values,
    *,
    workers: int = 1,
    steady_window: tuple | None = None,
    output_dir=None,
):
    """One run_ensemble per parameter value plus a consolidated summary.

    Returns a list of (value, EnsembleStatistics-or-None); per-value
    failures are isolated and leave a None entry.
    """
    if parameter not in SWEEP_PARAMETERS:
        raise RunnerError(f"sweep parameter must be one of {SWEEP_PARAMETERS}")
    out_root = Path(output_dir if output_dir is not None else config.output_dir)
    out_root.mkdir(parents=True, exist_ok=True)
    entries = []
    for value in values:
        if parameter == "N":
            model = dataclasses.replace(config.model, dims=(int(value),))
        else:
            model = dataclasses.replace(config.model, **{parameter: float(value)})
        sub = dataclasses.replace(config, model=model)
        sub_dir = out_root / f"{parameter}={value:g}"
        try:
            stats = run_ensemble(
                sub, workers=workers, steady_window=steady_window, output_dir=sub_dir
            )
        except Exception as exc:  # noqa: BLE001 - per-value isolation
            entries.append((value, None, f"{type(exc).__name__}: {exc}"))
            continue
        entries.append((value, stats, None))
    with (out_root / "sweep_summary.csv").open("w") as fh:
        fh.write(f"{parameter},observable,steady_mean,steady_stderr,n,status\n")
        for value, stats, error in entries:
            if stats is None:
                fh.write(f"{_fmt(value)},,,,,{error}\n")
                continue
            for name in stats.observables:
                fh.write(
                    f"{_fmt(value)},{name},{_fmt(stats.steady_mean[name])},"
                    f"{_fmt(stats.steady_stderr[name])},{stats.n_traj},ok\n"
                )
    return [(value, stats) for value, stats, _ in entries]


# ---------------------------------------------------------------------------
# quantum-classical protocol runs
# ---------------------------------------------------------------------------


def _qc_shot(args):
    config, traj_index, measure_steps, norm_tol = args
    model = config.model.build()
    dt = config.integrator.dt
    H = dicke_hamiltonian(model)
    ops, rates = dicke_channel_ops(model)
    _, _, Sz, _, _ = dicke_operators(model.total_spin)
    psi0 = np.zeros(H.shape[0], dtype=complex)
    psi0[-1] = 1.0
    rng = derive_trajectory_rng(config.ensemble.master_seed, traj_index)
    record, psi = weak_measurement_chain(
        psi0, H, ops, rates, dt, measure_steps, rng,
        master_seed=config.ensemble.master_seed, traj_index=traj_index, norm_tol=norm_tol,
    )
    outcome, _ = projective_measurement_sample(psi, Sz.diagonal().real, rng)
    _, series = replay_classical(record, model, sample_stride=measure_steps)
    return traj_index, outcome, float(series[-1])


def run_qc_protocol(
    config: ExperimentConfig,
    *,
    workers: int = 1,
    steady_window: tuple | None = None,
    norm_tol: float = 1e-8,
    output_dir=None,
):
    """Estimate the quantum-classical correlator from independent shots.

    Each shot runs the discrete weak-measurement chain on the exact
    collective-basis state, projectively samples S^z at its measurement
    time, and replays the record through the Gaussian engine for the
    classical conditional expectation.  Measurement times cycle through
    the sample grid of the steady-state window so the estimate is a
    window average.  Returns (QCEstimate, shots list).
    """
    if config.mode != "qc-protocol":
        raise RunnerError("config mode must be qc-protocol")
    out_dir = Path(output_dir if output_dir is not None else config.output_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    if steady_window is None:
        steady_window = (config.integrator.t_final / 2.0, config.integrator.t_final)
    dt = config.integrator.dt
    stride = config.integrator.sample_stride
    grid = [
        m
        for m in range(stride, config.n_steps + 1, stride)
        if steady_window[0] <= m * dt <= steady_window[1]
    ]
    if not grid:
        raise RunnerError("steady-state window contains no sample times")
    n_shots = config.ensemble.n_traj
    jobs = [(config, i, grid[i % len(grid)], norm_tol) for i in range(n_shots)]
    if workers > 1 and len(jobs) > 1:
        with multiprocessing.Pool(workers) as pool:
            results = pool.map(_qc_shot, jobs)
    else:
        results = [_qc_shot(job) for job in jobs]
    results.sort(key=lambda r: r[0])
    shots = [(o, c) for _, o, c in results]
    estimate = qc_correlator(shots)
    with (out_dir / "qc_shots.csv").open("w") as fh:
        fh.write("shot,outcome,classical\n")
        for idx, o, c in results:
            fh.write(f"{idx},{_fmt(o)},{_fmt(c)}\n")
    (out_dir / "qc_correlator.json").write_text(
        json.dumps(
            {
                "value": estimate.value,
                "stderr": estimate.stderr,
                "shots": estimate.shots,
                "window": list(steady_window),
            },
            indent=2,
        )
    )
    return estimate, shots

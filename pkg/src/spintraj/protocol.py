"""Discrete weak-measurement chains and the quantum-classical correlator.

A continuously monitored channel with jump operator L is discretized
into a chain of four-outcome ancilla measurements.  Each step and
channel applies one of the Kraus operators

    K_ab = (1/2) [ 1 + c_ab sqrt(dt) L - (dt/2) L^dag L ],
    c_ab = (a - i b) / sqrt(2),   a, b in {+1, -1},

whose POVM elements resolve the identity to O(dt^2) and whose outcome
statistics reproduce heterodyne detection in the continuum limit.  The
recorded sign pairs form a measurement record that a second, cheaper
simulation can replay with its own state supplying the centering means.
Correlating the final projective outcome of the "quantum" run with the
replayed conditional expectation yields a post-selection-free estimator
of conditional moments.
"""

from __future__ import annotations

import json
from dataclasses import dataclass

import numpy as np
import scipy.linalg
import scipy.sparse

from .engine import BinaryReplaySource, CirculantTrajectoryEngine
from .model import SpinModel
from .noise import NoiseRecord
from .observables import collective_spin


class ProtocolError(ValueError):
    pass


_SIGN_PAIRS = ((1, 1), (1, -1), (-1, 1), (-1, -1))


# ---------------------------------------------------------------------------
# measurement records
# ---------------------------------------------------------------------------


@dataclass
class MeasurementRecord:
    """Binary outcome history of a weak-measurement chain.

    Wraps a binary-mode :class:`~spintraj.noise.NoiseRecord` (the
    time-ordered per-channel sign pairs) together with the optional
    projective eigenvalue sampled at the end of the chain.
    """

    outcomes: NoiseRecord
    final_outcome: float | None = None

    def __post_init__(self):
        if self.outcomes.mode != "binary":
            raise ProtocolError("measurement records hold binary outcomes")

    @property
    def dt(self) -> float:
        return self.outcomes.dt

    @property
    def n_channels(self) -> int:
        return self.outcomes.n_channels

    @property
    def n_steps(self) -> int:
        return len(self.outcomes)

    def save(self, path):
        header = {
            "mode": self.outcomes.mode,
            "dt": self.outcomes.dt,
            "n_channels": self.outcomes.n_channels,
            "master_seed": int(self.outcomes.master_seed),
            "traj_index": int(self.outcomes.traj_index),
            "n_steps": self.n_steps,
            "final_outcome": self.final_outcome,
        }
        stream = np.array(self.outcomes.increments, dtype=np.int8).reshape(
            self.n_steps, self.n_channels, 2
        )
        np.savez_compressed(path, header=json.dumps(header), stream=stream)

    @classmethod
    def load(cls, path) -> "MeasurementRecord":
        with np.load(path, allow_pickle=False) as data:
            header = json.loads(str(data["header"]))
            stream = data["stream"]
        rec = NoiseRecord(
            mode="binary",
            dt=header["dt"],
            n_channels=header["n_channels"],
            master_seed=header["master_seed"],
            traj_index=header["traj_index"],
        )
        for row in stream:
            rec.increments.append(np.array(row))
        return cls(outcomes=rec, final_outcome=header["final_outcome"])


# ---------------------------------------------------------------------------
# weak-measurement chain on an exact state
# ---------------------------------------------------------------------------


def kraus_operators(L: np.ndarray, dt: float) -> list[np.ndarray]:
    """Four ancilla Kraus operators for one channel and step, order
    (+,+), (+,-), (-,+), (-,-)."""
    L = np.asarray(L, dtype=complex)
    eye = np.eye(L.shape[0])
    damp = 0.5 * dt * (L.conj().T @ L)
    root = np.sqrt(dt)
    ops = []
    for a, b in _SIGN_PAIRS:
        c = (a - 1j * b) / np.sqrt(2.0)
        ops.append(0.5 * (eye + c * root * L - damp))
    return ops


def weak_measurement_chain(
    psi0: np.ndarray,
    H,
    channel_ops,
    rates,
    dt: float,
    n_steps: int,
    rng,
    *,
    master_seed: int = 0,
    traj_index: int = 0,
    norm_tol: float = 1e-8,
) -> tuple[MeasurementRecord, np.ndarray]:
    """Run a discrete monitored chain on an exact pure state.

    Each step applies one Hamiltonian sub-step (first-order splitting)
    followed by, per channel, one Kraus update psi -> K psi / sqrt(p)
    with p the Born probability of the sampled outcome.  Returns the
    outcome record (without a final projective sample) and the final
    state.

    ``norm_tol`` bounds the POVM normalization defect |sum p - 1|, which
    is a second-order artifact of the truncated Kraus expansion equal to
    (dt^2 / 4) <(L^dag L)^2> per channel; exceeding it raises an
    expansion-order error.
    """
    psi = np.asarray(psi0, dtype=complex).copy()
    rates = np.asarray(rates, dtype=float)
    if len(channel_ops) != len(rates):
        raise ProtocolError("one rate per channel operator required")
    if scipy.sparse.issparse(H):
        H = H.toarray()
    U = scipy.linalg.expm(-1j * np.asarray(H, dtype=complex) * dt)
    kraus = [
        kraus_operators(np.sqrt(kap) * (A.toarray() if scipy.sparse.issparse(A) else A), dt)
        for A, kap in zip(channel_ops, rates)
    ]
    record = NoiseRecord(
        mode="binary",
        dt=dt,
        n_channels=len(rates),
        master_seed=master_seed,
        traj_index=traj_index,
    )
    signs = np.empty((len(rates), 2), dtype=np.int8)
    for _ in range(n_steps):
        psi = U @ psi
        for k, ops in enumerate(kraus):
            branches = [K @ psi for K in ops]
            probs = np.array([np.vdot(b, b).real for b in branches])
            total = probs.sum()
            if abs(total - 1.0) > norm_tol:
                raise ProtocolError(
                    f"POVM normalization defect {total - 1.0:.3e} exceeds {norm_tol:g}; "
                    "dt too large for the first-order expansion"
                )
            outcome = rng.choice(4, p=probs / total)
            signs[k] = _SIGN_PAIRS[outcome]
            psi = branches[outcome] / np.sqrt(probs[outcome])
        record.append(signs)
    return MeasurementRecord(outcomes=record), psi


# ---------------------------------------------------------------------------
# classical replay
# ---------------------------------------------------------------------------


def replay_classical(
    record: MeasurementRecord,
    model: SpinModel,
    *,
    direction=(0.0, 0.0, 1.0),
    sample_stride: int = 1,
) -> tuple[np.ndarray, np.ndarray]:
    """Co-simulate a recorded chain with the Gaussian trajectory engine.

    Replays every recorded outcome, centering the quadrature increments
    with the classical state's own means, and returns the sampled times
    and the conditional lab-frame <S^z> series (the initial expectation
    first, then every ``sample_stride``-th step).
    """
    if sample_stride < 1:
        raise ProtocolError("sample_stride must be >= 1")
    engine = CirculantTrajectoryEngine(model, record.dt)
    if len(engine.rates) != record.n_channels:
        raise ProtocolError(
            f"record carries {record.n_channels} channels but the model has "
            f"{len(engine.rates)}"
        )
    state = engine.initial_state(direction)
    source = BinaryReplaySource(record.outcomes, record.dt)
    times = [0.0]
    values = [collective_spin(state.to_dense(), model.s)[2]]
    for m in range(record.n_steps):
        state = engine.step(state, source)
        if (m + 1) % sample_stride == 0:
            times.append(state.time)
            values.append(collective_spin(state.to_dense(), model.s)[2])
    return np.array(times), np.array(values)


# ---------------------------------------------------------------------------
# correlator estimator
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class QCEstimate:
    """Monte Carlo estimate of the quantum-classical correlator."""

    value: float
    stderr: float
    shots: int


def qc_correlator(shots) -> QCEstimate:
    """Average of (projective outcome) x (replayed conditional expectation).

    ``shots`` is an iterable of (o, c) pairs; the estimator is their
    product mean with the standard error of the mean.
    """
    products = np.array([float(o) * float(c) for o, c in shots])
    n = len(products)
    if n < 2:
        raise ProtocolError("at least two shots are needed for a standard error")
    products.sort()  # fixed summation order: reordering shots cannot change the estimate
    return QCEstimate(
        value=float(products.mean()),
        stderr=float(products.std(ddof=1) / np.sqrt(n)),
        shots=n,
    )

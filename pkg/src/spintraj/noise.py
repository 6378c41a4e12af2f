"""Reproducible measurement-noise streams for monitored trajectories.

Two modes are supported.  In ``gaussian`` mode each step draws one
complex Wiener increment per monitored channel,

    dw_k = sqrt(dt) (X_k + i Y_k),   (X, Y) ~ Normal(0, K),

with the 2L x 2L covariance K built from the channel correlation matrix
(diagonal entries kappa_k / 2 after channel diagonalization), so that
E[dw_j* dw_k] = f_jk dt and E[dw_j dw_k] = 0.  In ``binary`` mode each
step samples one of four ancilla-readout outcomes (a, b) with a, b in
{+1, -1} and returns centered quadrature increments (dX, dY) whose first
and second moments match the Gaussian ones to leading order in dt.

Records are replayable: the same (master_seed, traj_index, mode, dt)
regenerates an identical stream, and a stored record can drive a second
integrator bit-for-bit.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field

import numpy as np


class NoiseError(ValueError):
    pass


class StepSizeError(NoiseError):
    """A binary-outcome probability left [0, 1]; dt is too large."""


@dataclass
class NoiseRecord:
    """Time-ordered per-channel noise stream with provenance.

    ``increments`` stores, per completed step, either a complex vector of
    length ``n_channels`` (gaussian mode) or an integer-pair vector of
    outcome signs (binary mode, shape (n_channels, 2) flattened).
    """

    mode: str
    dt: float
    n_channels: int
    master_seed: int
    traj_index: int
    increments: list = field(default_factory=list)

    def __post_init__(self):
        if self.mode not in ("gaussian", "binary"):
            raise NoiseError(f"unknown noise mode {self.mode!r}")
        if self.dt <= 0:
            raise NoiseError("dt must be positive")

    def __len__(self) -> int:
        return len(self.increments)

    def append(self, value: np.ndarray):
        self.increments.append(np.array(value, copy=True))

    def step(self, m: int) -> np.ndarray:
        return self.increments[m]

    # -- serialization ---------------------------------------------------

    def save(self, path):
        header = {
            "mode": self.mode,
            "dt": self.dt,
            "n_channels": self.n_channels,
            "master_seed": int(self.master_seed),
            "traj_index": int(self.traj_index),
            "n_steps": len(self.increments),
        }
        if self.mode == "gaussian":
            stream = np.array(self.increments, dtype=complex).reshape(len(self), self.n_channels)
        else:
            stream = np.array(self.increments, dtype=np.int8).reshape(len(self), self.n_channels, 2)
        np.savez_compressed(path, header=json.dumps(header), stream=stream)

    @classmethod
    def load(cls, path) -> "NoiseRecord":
        with np.load(path, allow_pickle=False) as data:
            header = json.loads(str(data["header"]))
            stream = data["stream"]
        rec = cls(
            mode=header["mode"],
            dt=header["dt"],
            n_channels=header["n_channels"],
            master_seed=header["master_seed"],
            traj_index=header["traj_index"],
        )
        for row in stream:
            rec.increments.append(np.array(row))
        return rec


@dataclass(frozen=True)
class NoiseCovariance:
    """Real covariance of the quadrature pair (X, Y) across channels.

    Built from the (possibly nondiagonal) channel correlation matrix f:
    K^XX = K^YY = Re f / 2 and K^XY = -K^YX = Im f / 2.  After channel
    diagonalization f = diag(kappa_k) and K is diagonal.
    """

    matrix: np.ndarray

    def __post_init__(self):
        K = np.asarray(self.matrix, dtype=float)
        if K.ndim != 2 or K.shape[0] != K.shape[1] or K.shape[0] % 2 != 0:
            raise NoiseError("noise covariance must be a square 2L x 2L matrix")
        if not np.allclose(K, K.T, atol=1e-12):
            raise NoiseError("noise covariance must be symmetric")
        vals = np.linalg.eigvalsh(K)
        if vals.min(initial=0.0) < -1e-12 * max(vals.max(initial=0.0), 1.0):
            raise NoiseError("noise covariance must be positive semdefinite")
        object.__setattr__(self, "matrix", K)
        K.setflags(write=False)

    @property
    def n_channels(self) -> int:
        return self.matrix.shape[0] // 2

    @classmethod
    def from_correlation(cls, f: np.ndarray) -> "NoiseCovariance":
        f = np.asarray(f, dtype=complex)
        xx = 0.5 * f.real
        xy = 0.5 * f.imag
        return cls(np.block([[xx, xy], [-xy, xx]]))

    @classmethod
    def from_rates(cls, rates) -> "NoiseCovariance":
        return cls.from_correlation(np.diag(np.asarray(rates, dtype=float)))

    @property
    def cholesky(self) -> np.ndarray:
        # PSD-safe factor via eigendecomposition (rates may include zeros),
        # computed once and cached on the frozen instance
        cached = getattr(self, "_cholesky", None)
        if cached is None:
            vals, vecs = np.linalg.eigh(self.matrix)
            cached = vecs * np.sqrt(np.clip(vals, 0.0, None))
            object.__setattr__(self, "_cholesky", cached)
        return cached


def sample_gaussian_increment(
    cov: NoiseCovariance, dt: float, rng: np.random.Generator
) -> np.ndarray:
    """Complex increment vector dw = sqrt(dt) (X + iY), (X, Y) ~ N(0, K)."""
    if dt <= 0:
        raise NoiseError("dt must be positive")
    L = cov.n_channels
    z = cov.cholesky @ rng.standard_normal(2 * L)
    return np.sqrt(dt) * (z[:L] + 1j * z[L:])


def binary_outcome_probabilities(mean_L: complex, dt: float) -> np.ndarray:
    """First-order outcome probabilities p_ab = (1 + sqrt(2 dt)(a x + b y)) / 4.

    Here x = Re<L>, y = Im<L> and (a, b) runs over the four sign pairs
    in the order (+,+), (+,-), (-,+), (-,-).  The four values sum to one
    exactly; a value outside [0, 1] signals too large a step.
    """
    x, y = mean_L.real, mean_L.imag
    r = np.sqrt(2.0 * dt)
    p = np.array(
        [
            0.25 * (1.0 + r * (x + y)),
            0.25 * (1.0 + r * (x - y)),
            0.25 * (1.0 + r * (-x + y)),
            0.25 * (1.0 + r * (-x - y)),
        ]
    )
    if np.any(p < -1e-12) or np.any(p > 1.0 + 1e-12):
        raise StepSizeError(
            f"binary outcome probability outside [0, 1] (|<L>| = {abs(mean_L):g}, dt = {dt:g})"
        )
    return np.clip(p, 0.0, 1.0)


_OUTCOMES = np.array([(1, 1), (1, -1), (-1, 1), (-1, -1)], dtype=np.int8)


def sample_binary_outcome(
    mean_L: complex,
    dt: float,
    rng: np.random.Generator,
    *,
    flat_weights: bool = False,
) -> tuple[tuple[int, int], float, float]:
    """Draw one ancilla outcome pair and its centered quadrature increments.

    Returns ((a, b), dX, dY) with dX = a sqrt(dt) - E[dR_x] and
    dY = b sqrt(dt) - E[dR_y], where E[dR_x] = dt <L + L^dag> / sqrt(2)
    and E[dR_y] = i dt <L^dag - L> / sqrt(2).  With ``flat_weights`` the
    outcome is drawn uniformly (the increments keep state-based centering).
    """
    if flat_weights:
        p = np.full(4, 0.25)
        binary_outcome_probabilities(mean_L, dt)  # still enforce the step bound
    else:
        p = binary_outcome_probabilities(mean_L, dt)
    k = rng.choice(4, p=p)
    a, b = int(_OUTCOMES[k, 0]), int(_OUTCOMES[k, 1])
    dX, dY = center_binary_outcome(a, b, mean_L, dt)
    return (a, b), dX, dY


def center_binary_outcome(a: int, b: int, mean_L: complex, dt: float) -> tuple[float, float]:
    """Centered increments for a recorded outcome, given the current <L>."""
    root = np.sqrt(dt)
    mean_x = np.sqrt(2.0) * dt * mean_L.real  # dt <L + L^dag> / sqrt(2)
    mean_y = np.sqrt(2.0) * dt * mean_L.imag  # i dt <L^dag - L> / sqrt(2)
    return a * root - mean_x, b * root - mean_y


def binary_to_wiener(dX: float, dY: float) -> complex:
    """Map centered quadrature increments to the complex Wiener increment.

    The engine consumes dw with E|dw|^2 = kappa dt for a rate-kappa
    channel whose unit-normalized jump has the recorded readout; the
    quadrature pair satisfies E[dX^2] = E[dY^2] = dt, so
    dw = sqrt(kappa) (dX + i dY) / sqrt(2).
    """
    return (dX + 1j * dY) / np.sqrt(2.0)


def derive_trajectory_rng(master_seed: int, traj_index: int) -> np.random.Generator:
    """Independent per-trajectory generator from a single master seed."""
    ss = np.random.SeedSequence(master_seed, spawn_key=(traj_index,))
    return np.random.Generator(np.random.PCG64(ss))


def post_selection_overhead(Q: int, M: int, n_channels: int) -> float:
    """log10 of the trajectory multiplicity needed to post-select one record.

    Reproducing a specific M-step record of (2Q)-ary outcomes across all
    channels costs O((2Q)^(2 M Lambda)) repetitions.
    """
    if Q < 1 or M < 1 or n_channels < 1:
        raise NoiseError("Q, M, and channel count must all be >= 1")
    return 2.0 * M * n_channels * np.log10(2.0 * Q)

"""Gaussian spin-wave trajectory integrator for monitored spin lattices.

The state of one quantum trajectory is a spin-coherent reference frame
(angles theta, phi) dressed with Gaussian bosonic fluctuations: first
moments beta_i = <b_i> and centered second moments u_ij = <d_i d_j>,
v_ij = <d_i^dag d_j> with d = b - beta.  The frame z axis tracks the
instantaneous mean spin direction; lab operators relate to frame
operators through the rotation R(theta, phi) = R_z(phi) R_y(theta).

Each step is stroboscopic: (i) an Euler-Maruyama increment of the
bosonized stochastic equations of motion, with the Hamiltonian kept to
quadratic order in the bosons and the jump operators to linear order,
and (ii) an exact re-alignment of the frame onto the new mean spin
direction, which maps beta to zero mean and multiplies u by a pure
phase while leaving v untouched.

Two interchangeable integrators are provided: a dense O(N^2) engine for
arbitrary monitored channels, and a translation-invariant engine that
stores only the Fourier spectra of u and v (O(N) per step), valid for
periodic couplings with the uniform collective dissipator.
"""

from __future__ import annotations

from dataclasses import dataclass, field, replace
from functools import cached_property

import json
import math

import numpy as np

from .model import MonitoredChannel, SpinModel
from .noise import (
    NoiseCovariance,
    NoiseRecord,
    binary_to_wiener,
    center_binary_outcome,
    sample_binary_outcome,
    sample_gaussian_increment,
)


class EngineError(RuntimeError):
    pass


class IntegrationDivergedError(EngineError):
    def __init__(self, message, state=None, step_index=None):
        super().__init__(message)
        self.state = state
        self.step_index = step_index


# ---------------------------------------------------------------------------
# frame rotation
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class FrameRotation:
    """Rotation R(theta, phi) mapping frame spin components to lab ones."""

    theta: float
    phi: float

    @cached_property
    def matrix(self) -> np.ndarray:
        ct, st = np.cos(self.theta), np.sin(self.theta)
        cp, sp = np.cos(self.phi), np.sin(self.phi)
        ry = np.array([[ct, 0.0, st], [0.0, 1.0, 0.0], [-st, 0.0, ct]])
        rz = np.array([[cp, -sp, 0.0], [sp, cp, 0.0], [0.0, 0.0, 1.0]])
        R = rz @ ry
        R.setflags(write=False)
        return R

    @property
    def axis(self) -> np.ndarray:
        """Frame z direction expressed in the lab (the mean spin axis)."""
        return self.matrix[:, 2]


def frame_rotation(theta: float, phi: float) -> FrameRotation:
    return FrameRotation(theta, phi)


# ---------------------------------------------------------------------------
# trajectory state
# ---------------------------------------------------------------------------


@dataclass
class GaussianTrajectoryState:
    """Frame angles plus first and second bosonic fluctuation moments."""

    theta: float
    phi: float
    beta: np.ndarray
    u: np.ndarray
    v: np.ndarray
    time: float = 0.0
    n_steps: int = 0

    @property
    def n_sites(self) -> int:
        return len(self.beta)

    def copy(self) -> "GaussianTrajectoryState":
        return GaussianTrajectoryState(
            theta=self.theta,
            phi=self.phi,
            beta=self.beta.copy(),
            u=self.u.copy(),
            v=self.v.copy(),
            time=self.time,
            n_steps=self.n_steps,
        )


def init_polarized(model: SpinModel, direction) -> GaussianTrajectoryState:
    """Spin coherent state along ``direction``: all fluctuation moments zero."""
    d = np.asarray(direction, dtype=float)
    if abs(np.linalg.norm(d) - 1.0) > 1e-10:
        raise EngineError("polarization direction must be a unit vector")
    theta = float(np.arccos(np.clip(d[2], -1.0, 1.0)))
    phi = float(np.arctan2(d[1], d[0])) if (abs(d[0]) > 0 or abs(d[1]) > 0) else 0.0
    N = model.n_sites
    return GaussianTrajectoryState(
        theta=theta,
        phi=phi,
        beta=np.zeros(N, dtype=complex),
        u=np.zeros((N, N), dtype=complex),
        v=np.zeros((N, N), dtype=complex),
    )


# ---------------------------------------------------------------------------
# bosonized coefficients
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class BosonizedCoefficients:
    """Quadratic Hamiltonian and linear jump coefficients in the frame.

    H = sum_i (h_i b_i^dag + h.c.) + sum_ij P_ij b_i^dag b_j
        + (1/2) sum_ij (Q_ij b_i^dag b_j^dag + h.c.)
    L_j = l0 + lb b_j + ld b_j^dag  (per-site lowering operator)
    """

    h: np.ndarray
    P: np.ndarray
    Q: np.ndarray
    l0: complex
    lb: complex
    ld: complex


def build_coefficients(model: SpinModel, theta: float, phi: float) -> BosonizedCoefficients:
    """Rotate the lab Hamiltonian and jumps into the frame and bosonize."""
    R = frame_rotation(theta, phi).matrix
    w = R[0]  # lab x in frame components
    r = R[2]  # lab z in frame components
    s = model.s
    omega = model.omega
    G = model.couplings.entries
    g = G.sum(axis=1)  # coupling row sums

    root = np.sqrt(s / 2.0)
    cX = omega * w[0] + 2.0 * r[0] * r[2] * g / s
    cY = omega * w[1] + 2.0 * r[1] * r[2] * g / s
    cn = -(omega * w[2] + 2.0 * r[2] ** 2 * g / s)
    h = root * (cX + 1j * cY)

    W = G / (2.0 * s)
    P = 2.0 * W * (r[0] ** 2 + r[1] ** 2) + np.diag(cn).astype(complex)
    Q = 2.0 * W * (r[0] + 1j * r[1]) ** 2

    # per-site lowering operator s^- = s^x - i s^y in frame components
    q = (R[0] - 1j * R[1]).astype(complex)
    l0 = q[2] * s
    lb = root * (q[0] - 1j * q[1])
    ld = root * (q[0] + 1j * q[1])
    return BosonizedCoefficients(h=h, P=P, Q=Q, l0=complex(l0), lb=complex(lb), ld=complex(ld))


# ---------------------------------------------------------------------------
# Wick reduction
# ---------------------------------------------------------------------------


def pair_expectation(op1, op2, u: np.ndarray, v: np.ndarray) -> complex:
    """Ordered pair expectation of two zero-mean fluctuations.

    Each operator is (site index, dagger flag).  Reads from u = <dd>,
    v = <d^dag d>, with <d_i d_j^dag> = v_ji + delta_ij.
    """
    (i, dag1), (j, dag2) = op1, op2
    if not dag1 and not dag2:
        return complex(u[i, j])
    if dag1 and dag2:
        return complex(np.conj(u[i, j]))
    if dag1 and not dag2:
        return complex(v[i, j])
    return complex(v[j, i]) + (1.0 if i == j else 0.0)


def wick_quartic(ops, u: np.ndarray, v: np.ndarray) -> complex:
    """Quartic expectation of four ordered zero-mean fluctuations.

    Sum of the three pairings, each pair read in its original order:
    <1 2><3 4> + <1 3><2 4> + <1 4><2 3>.
    """
    o1, o2, o3, o4 = ops
    return (
        pair_expectation(o1, o2, u, v) * pair_expectation(o3, o4, u, v)
        + pair_expectation(o1, o3, u, v) * pair_expectation(o2, o4, u, v)
        + pair_expectation(o1, o4, u, v) * pair_expectation(o2, o3, u, v)
    )


# ---------------------------------------------------------------------------
# equations of motion (dense)
# ---------------------------------------------------------------------------


def _channel_arrays(channels, coeffs: BosonizedCoefficients):
    N = len(coeffs.h)
    if len(channels) == 0:
        zero = np.zeros((0, N), dtype=complex)
        return zero, np.zeros(0), zero, zero, np.zeros(0, dtype=complex)
    Wg = np.stack([ch.weights for ch in channels])  # (L, N)
    rates = np.array([ch.rate for ch in channels])
    cb = coeffs.lb * Wg
    cd = coeffs.ld * Wg
    c0 = coeffs.l0 * Wg.sum(axis=1)
    return Wg, rates, cb, cd, c0


def channel_expectations(
    state: GaussianTrajectoryState, coeffs: BosonizedCoefficients, channels
) -> np.ndarray:
    """First moments <A_k> of the linearized monitored channels."""
    _, _, cb, cd, c0 = _channel_arrays(channels, coeffs)
    return c0 + cb @ state.beta + cd @ np.conj(state.beta)


def moment_increments(beta, u, v, h, P, Q, cb, cd, c0, rates, dw, dt):
    """Euler-Maruyama increment (dbeta, du, dv) for generic Gaussian moments.

    Modes x_i with means beta, central moments u = <dx dx>, v = <dx^dag dx>,
    quadratic Hamiltonian (h, P, Q) and monitored channels
    A_k = c0_k + sum_i (cb_ki x_i + cd_ki x_i^dag) at the given rates.
    The deterministic part carries the quadratic-Hamiltonian flow, the
    measurement-conditioned drift, and the Ito corrections from products
    of first-moment noise terms; the stochastic part is linear in dw.
    """
    N = len(beta)
    mean_A = c0 + cb @ beta + cd @ np.conj(beta)

    eye = np.eye(N)
    a = (u @ cb.T + (v.conj() + eye) @ cd.T).T  # (L, N): <d_i A_k> correlator
    c = (v.T @ cb.conj().T + u @ cd.conj().T).T  # (L, N): <A_k^dag d_i>

    dbeta = -1j * (h + P @ beta + Q @ beta.conj()) * dt
    dbeta += 0.5 * (
        ((rates * mean_A.conj())[:, None] * cd).sum(axis=0)
        - ((rates * mean_A)[:, None] * cb.conj()).sum(axis=0)
    ) * dt
    dbeta += dw.conj() @ a + dw @ c

    du = -1j * (P @ u + Q @ v + u @ P.T + (v.conj() + eye) @ Q.T) * dt
    du += 0.5 * dt * np.einsum("k,ki,kj->ij", rates, c, cd)
    du += 0.5 * dt * np.einsum("k,ki,kj->ij", rates, cd, c)
    du -= 0.5 * dt * np.einsum("k,ki,kj->ij", rates, a, cb.conj())
    du -= 0.5 * dt * np.einsum("k,ki,kj->ij", rates, cb.conj(), a)
    du -= dt * np.einsum("k,ki,kj->ij", rates, a, c)
    du -= dt * np.einsum("k,ki,kj->ij", rates, c, a)

    dv = 1j * (P.conj() @ v + Q.conj() @ u - v @ P.T - u.conj() @ Q.T) * dt
    dv += 0.5 * dt * np.einsum("k,ki,kj->ij", rates, a.conj(), cd)
    dv += 0.5 * dt * np.einsum("k,ki,kj->ij", rates, cd.conj(), a)
    dv -= 0.5 * dt * np.einsum("k,ki,kj->ij", rates, cb, c)
    dv -= 0.5 * dt * np.einsum("k,ki,kj->ij", rates, c.conj(), cb.conj())
    dv -= dt * np.einsum("k,ki,kj->ij", rates, c.conj(), c)
    dv -= dt * np.einsum("k,ki,kj->ij", rates, a.conj(), a)

    return dbeta, du, dv


def eom_increments(
    state: GaussianTrajectoryState,
    model: SpinModel,
    channels,
    dw: np.ndarray,
    dt: float,
    coeffs: BosonizedCoefficients | None = None,
):
    """One Euler-Maruyama increment (dbeta, du, dv) of the moment equations."""
    if coeffs is None:
        coeffs = build_coefficients(model, state.theta, state.phi)
    _, rates, cb, cd, c0 = _channel_arrays(channels, coeffs)
    dbeta, du, dv = moment_increments(
        state.beta, state.u, state.v, coeffs.h, coeffs.P, coeffs.Q, cb, cd, c0, rates, dw, dt
    )
    for arr in (dbeta, du, dv):
        if not np.all(np.isfinite(arr)):
            raise IntegrationDivergedError(
                "non-finite moment increment", state=state, step_index=state.n_steps
            )
    return dbeta, du, dv


# ---------------------------------------------------------------------------
# frame re-alignment
# ---------------------------------------------------------------------------


def realignment_angles(theta: float, beta_mean: complex, s: float):
    """Exact frame increments (dtheta, dphi, psi) absorbing the mean tilt.

    psi = dphi * cos(theta) is the phase picked up by the bosons.  All
    expressions are arranged to stay well conditioned for any float
    angle, including theta within one ulp of pi/2 where tan(theta) is
    huge but finite and the products a*psi, a*cos(theta) remain O(1).
    """
    a = math.sqrt(s / 2.0) * math.tan(theta)
    x = a + beta_mean.real
    y = beta_mean.imag
    if x >= 0.0:
        psi = math.atan2(y, x)
        sign = 1.0
    else:
        psi = math.atan2(-y, -x)
        sign = -1.0
    # dtheta = sqrt(2/s) (sign*|a + beta| - a), cancellation-free
    zmod = math.hypot(x, y)
    num = 2.0 * a * beta_mean.real + abs(beta_mean) ** 2
    den = sign * zmod + a
    if den == 0.0:
        dtheta = math.sqrt(2.0 / s) * (sign * zmod - a)
    else:
        dtheta = math.sqrt(2.0 / s) * num / den
    dphi = psi / math.cos(theta)
    return dtheta, dphi, psi


def realign_frame(state: GaussianTrajectoryState, s: float) -> GaussianTrajectoryState:
    """Rotate the frame onto the mean spin; beta becomes zero mean.

    Applies theta += dtheta, phi += dphi, beta -> (a + beta) e^{-i psi}
    - a - sqrt(s/2) dtheta with a = sqrt(s/2) tan(theta) at the
    pre-update angle, u -> u e^{-2i psi}, v unchanged.  The residual
    O(eps) mean of beta is subtracted to keep the alignment invariant
    exact at machine precision.
    """
    beta_mean = complex(state.beta.mean())
    dtheta, dphi, psi = realignment_angles(state.theta, beta_mean, s)
    a = np.sqrt(s / 2.0) * np.tan(state.theta)
    # a (e^{-i psi} - 1) computed without cancellation for tiny psi
    shift = -2.0 * a * np.sin(0.5 * psi) ** 2 - 1j * a * np.sin(psi)
    phase = np.exp(-1j * psi)
    beta = state.beta * phase + (shift - np.sqrt(s / 2.0) * dtheta)
    beta -= beta.mean()
    state.theta += dtheta
    state.phi += dphi
    state.beta = beta
    state.u = state.u * np.exp(-2j * psi)
    return state


# ---------------------------------------------------------------------------
# noise sources
# ---------------------------------------------------------------------------


class GaussianNoiseSource:
    """Draws complex Wiener increments and logs them to a NoiseRecord."""

    def __init__(self, rates, dt: float, rng, record: NoiseRecord | None = None):
        self.cov = NoiseCovariance.from_rates(rates)
        self.dt = dt
        self.rng = rng
        self.record = record

    def draw(self, mean_A: np.ndarray, rates: np.ndarray) -> np.ndarray:
        dw = sample_gaussian_increment(self.cov, self.dt, self.rng)
        if self.record is not None:
            self.record.append(dw)
        return dw


class GaussianReplaySource:
    """Replays the complex increments stored in a NoiseRecord."""

    def __init__(self, record: NoiseRecord):
        if record.mode != "gaussian":
            raise EngineError("gaussian replay needs a gaussian-mode record")
        self.record = record
        self.cursor = 0

    def draw(self, mean_A: np.ndarray, rates: np.ndarray) -> np.ndarray:
        dw = self.record.step(self.cursor)
        self.cursor += 1
        return dw


class BinaryNoiseSource:
    """Samples per-channel ancilla outcomes and converts them to increments."""

    def __init__(self, dt: float, rng, record: NoiseRecord | None = None, flat_weights=False):
        self.dt = dt
        self.rng = rng
        self.record = record
        self.flat_weights = flat_weights

    def draw(self, mean_A: np.ndarray, rates: np.ndarray) -> np.ndarray:
        dw = np.empty(len(rates), dtype=complex)
        signs = np.empty((len(rates), 2), dtype=np.int8)
        for k, (mA, kap) in enumerate(zip(mean_A, rates)):
            mean_L = complex(np.sqrt(kap) * mA)
            (aa, bb), dX, dY = sample_binary_outcome(
                mean_L, self.dt, self.rng, flat_weights=self.flat_weights
            )
            signs[k] = (aa, bb)
            dw[k] = np.sqrt(kap) * binary_to_wiener(dX, dY)
        if self.record is not None:
            self.record.append(signs)
        return dw


class BinaryReplaySource:
    """Replays recorded ancilla outcomes, centering with the current state."""

    def __init__(self, record: NoiseRecord, dt: float):
        if record.mode != "binary":
            raise EngineError("binary replay needs a binary-mode record")
        self.record = record
        self.dt = dt
        self.cursor = 0

    def draw(self, mean_A: np.ndarray, rates: np.ndarray) -> np.ndarray:
        signs = self.record.step(self.cursor)
        self.cursor += 1
        dw = np.empty(len(rates), dtype=complex)
        for k, (mA, kap) in enumerate(zip(mean_A, rates)):
            mean_L = complex(np.sqrt(kap) * mA)
            dX, dY = center_binary_outcome(int(signs[k, 0]), int(signs[k, 1]), mean_L, self.dt)
            dw[k] = np.sqrt(kap) * binary_to_wiener(dX, dY)
        return dw


class ZeroNoiseSource:
    """Deterministic evolution (all increments zero)."""

    def draw(self, mean_A: np.ndarray, rates: np.ndarray) -> np.ndarray:
        return np.zeros(len(rates), dtype=complex)


# ---------------------------------------------------------------------------
# dense stepping
# ---------------------------------------------------------------------------

_V_DIAG_TOL = 1e-10


def _enforce_moment_hygiene(state: GaussianTrajectoryState):
    state.u = 0.5 * (state.u + state.u.T)
    state.v = 0.5 * (state.v + state.v.conj().T)
    diag = state.v.diagonal().real
    if np.any(diag < -_V_DIAG_TOL):
        raise IntegrationDivergedError(
            f"negative occupation {diag.min():g}", state=state, step_index=state.n_steps
        )
    np.fill_diagonal(state.v, np.clip(diag, 0.0, None))


def step(
    state: GaussianTrajectoryState,
    model: SpinModel,
    channels,
    noise_source,
    dt: float,
) -> GaussianTrajectoryState:
    """One stroboscopic step: EOM increment, then frame re-alignment."""
    coeffs = build_coefficients(model, state.theta, state.phi)
    mean_A = channel_expectations(state, coeffs, channels)
    rates = np.array([ch.rate for ch in channels])
    dw = noise_source.draw(mean_A, rates)
    dbeta, du, dv = eom_increments(state, model, channels, dw, dt, coeffs=coeffs)
    state.beta = state.beta + dbeta
    state.u = state.u + du
    state.v = state.v + dv
    _enforce_moment_hygiene(state)
    realign_frame(state, model.s)
    state.n_steps += 1
    state.time = state.n_steps * dt
    return state


class DenseTrajectoryEngine:
    """Convenience wrapper binding a model, channels, and step size."""

    def __init__(self, model: SpinModel, dt: float, channels=None):
        self.model = model
        self.channels = model.channels if channels is None else channels
        self.dt = dt
        self.rates = np.array([ch.rate for ch in self.channels])

    def initial_state(self, direction=(0.0, 0.0, 1.0)) -> GaussianTrajectoryState:
        return init_polarized(self.model, direction)

    def step(self, state, noise_source) -> GaussianTrajectoryState:
        return step(state, self.model, self.channels, noise_source, self.dt)


# ---------------------------------------------------------------------------
# translation-invariant (Fourier) engine
# ---------------------------------------------------------------------------


@dataclass
class CirculantTrajectoryState:
    """Translation-invariant trajectory state stored as moment spectra.

    ``beta`` is the common site amplitude; ``u_hat`` and ``v_hat`` are
    the lattice Fourier transforms of the displacement-dependent moment
    rows u_m, v_m, shaped like the lattice dims.
    """

    theta: float
    phi: float
    beta: complex
    u_hat: np.ndarray
    v_hat: np.ndarray
    dims: tuple
    time: float = 0.0
    n_steps: int = 0

    @property
    def n_sites(self) -> int:
        return int(np.prod(self.dims))

    def copy(self) -> "CirculantTrajectoryState":
        return CirculantTrajectoryState(
            theta=self.theta,
            phi=self.phi,
            beta=self.beta,
            u_hat=self.u_hat.copy(),
            v_hat=self.v_hat.copy(),
            dims=self.dims,
            time=self.time,
            n_steps=self.n_steps,
        )

    def to_dense(self) -> GaussianTrajectoryState:
        """Materialize the dense N x N moment matrices."""
        dims = self.dims
        N = self.n_sites
        u_row = np.fft.ifftn(self.u_hat).reshape(-1)
        v_row = np.fft.ifftn(self.v_hat).reshape(-1)
        coords = np.stack(np.unravel_index(np.arange(N), dims), axis=-1)
        disp = (coords[None, :, :] - coords[:, None, :]) % np.array(dims)
        flat = np.ravel_multi_index(tuple(disp[..., p] for p in range(len(dims))), dims)
        u = u_row[flat].reshape(N, N)
        v = v_row[flat].reshape(N, N)
        return GaussianTrajectoryState(
            theta=self.theta,
            phi=self.phi,
            beta=np.full(N, self.beta, dtype=complex),
            u=0.5 * (u + u.T),
            v=0.5 * (v + v.conj().T),
            time=self.time,
            n_steps=self.n_steps,
        )


def circulant_coefficients(omega, s, W_hat, theta, phi):
    """Frame-dependent uniform-lattice coefficients from the coupling spectrum.

    Returns (h, p_hat, q_hat, l0, lb, ld): the per-site linear term h,
    the spectra of the circulant P and Q matrices, and the per-site
    jump-operator coefficients.  Scalar math is spelled out from the
    rows of R = Rz(phi) Ry(theta) — this sits on the per-step hot path.
    """
    ct, st = math.cos(theta), math.sin(theta)
    cp, sp = math.cos(phi), math.sin(phi)
    # w = R[0] = (cp ct, -sp, cp st); r = R[2] = (-st, 0, ct);
    # q = R[0] - i R[1] = e^{-i phi} (ct, -i, st)
    g = 2.0 * s * float(W_hat.flat[0].real)  # uniform coupling row sum
    root = math.sqrt(s / 2.0)
    cX = omega * cp * ct - 2.0 * st * ct * g / s
    cY = -omega * sp
    cn = -(omega * cp * st + 2.0 * ct * ct * g / s)
    h = root * complex(cX, cY)
    st2 = st * st
    p_hat = (2.0 * st2) * W_hat.real + cn
    q_hat = p_hat - cn + 0.0j  # (r0 + i r1)^2 = st^2, same real spectrum
    phase = complex(cp, -sp)  # e^{-i phi}
    l0 = s * st * phase
    lb = root * (ct - 1.0) * phase
    ld = root * (ct + 1.0) * phase
    return h, p_hat, q_hat, l0, lb, ld


class CirculantTrajectoryEngine:
    """O(N)-per-step integrator for the uniform collective dissipator.

    Valid when the initial state, couplings, and monitoring are all
    translation invariant: every site then carries the same beta and the
    moment matrices stay circulant, so only their spectra evolve.
    """

    def __init__(self, model: SpinModel, dt: float):
        if len(model.channels) > 1:
            raise EngineError("translation-invariant engine needs a rank-1 dissipator")
        if model.channels:
            ch = model.channels[0]
            if not np.allclose(ch.weights, ch.weights.flat[0], atol=1e-12):
                raise EngineError("translation-invariant engine needs uniform channel weights")
            self.rate = ch.rate
        else:  # closed system: keep one silent channel so noise sources stay uniform
            self.rate = 0.0
        self.model = model
        self.dt = dt
        self.rates = np.array([self.rate])
        dims = model.geometry.dims
        from .lattice import displacement_couplings

        W_row = displacement_couplings(model.geometry, model.alpha, model.J, model.s) / (
            2.0 * model.s
        )
        self.W_hat = np.fft.fftn(W_row)  # real spectrum (even coupling row)
        self.dims = dims

    def initial_state(self, direction=(0.0, 0.0, 1.0)) -> CirculantTrajectoryState:
        ref = init_polarized(self.model, direction)
        return CirculantTrajectoryState(
            theta=ref.theta,
            phi=ref.phi,
            beta=0.0 + 0.0j,
            u_hat=np.zeros(self.dims, dtype=complex),
            v_hat=np.zeros(self.dims, dtype=complex),
            dims=self.dims,
        )

    def _scalar_coefficients(self, theta, phi):
        return circulant_coefficients(self.model.omega, self.model.s, self.W_hat, theta, phi)

    def step(self, state: CirculantTrajectoryState, noise_source) -> CirculantTrajectoryState:
        dt = self.dt
        N = state.n_sites
        h, p_hat, q_hat, l0, lb, ld = self._scalar_coefficients(state.theta, state.phi)
        kap = self.rate
        rootN = np.sqrt(N)

        u0 = complex(state.u_hat.flat[0])
        v0 = float(state.v_hat.flat[0].real)
        mean_A = rootN * (l0 + lb * state.beta + ld * np.conj(state.beta))
        a0 = (lb * u0 + ld * (v0 + 1.0)) / rootN
        c0 = (np.conj(lb) * v0 + np.conj(ld) * u0) / rootN

        dw = noise_source.draw(np.array([mean_A]), self.rates)
        dwk = complex(dw[0])

        # first moment (identical on every site)
        dbeta = -1j * (h + complex(p_hat.flat[0]) * state.beta + complex(q_hat.flat[0]) * np.conj(state.beta)) * dt
        dbeta += 0.5 * kap * (ld / rootN * np.conj(mean_A) - np.conj(lb) / rootN * mean_A) * dt
        dbeta += np.conj(dwk) * a0 + dwk * c0

        # spectra: Hamiltonian flow plus uniform (k = 0 only) channel terms
        u_hat = state.u_hat
        v_hat = state.v_hat
        v_rev = _reverse_spectrum(v_hat)
        du_hat = -1j * (2.0 * p_hat * u_hat + q_hat * (v_hat + v_rev + 1.0)) * dt
        dv_hat = 1j * (np.conj(q_hat) * u_hat - q_hat * np.conj(u_hat)) * dt

        const_u = kap * ((ld * c0 - np.conj(lb) * a0) / rootN - 2.0 * a0 * c0) * dt
        const_v = kap * (
            ((ld * np.conj(a0) + np.conj(ld) * a0 - lb * c0 - np.conj(lb) * np.conj(c0)) / (2.0 * rootN)).real
            - abs(a0) ** 2
            - abs(c0) ** 2
        ) * dt
        du_hat.flat[0] += N * const_u
        dv_hat.flat[0] += N * const_v

        beta = state.beta + dbeta
        u_hat = u_hat + du_hat
        v_hat = v_hat + dv_hat
        if not (np.isfinite(beta) and np.all(np.isfinite(u_hat)) and np.all(np.isfinite(v_hat))):
            raise IntegrationDivergedError(
                "non-finite moment increment", state=state, step_index=state.n_steps
            )
        v_hat = v_hat.real.astype(complex)  # v Hermitian -> real spectrum

        # re-alignment with scalar beta
        # scalar beta is the mean, so re-alignment maps it exactly to zero
        dtheta, dphi, psi = realignment_angles(state.theta, beta, self.model.s)

        state.theta += dtheta
        state.phi += dphi
        state.beta = 0.0 + 0.0j
        state.u_hat = u_hat * np.exp(-2j * psi)
        state.v_hat = v_hat
        state.n_steps += 1
        state.time = state.n_steps * dt
        return state


def _reverse_spectrum(x_hat: np.ndarray) -> np.ndarray:
    """Spectrum at -k for every k (np.roll-based index reversal)."""
    rev = x_hat
    for axis in range(x_hat.ndim):
        rev = np.flip(rev, axis=axis)
        rev = np.roll(rev, 1, axis=axis)
    return rev


# ---------------------------------------------------------------------------
# checkpoints
# ---------------------------------------------------------------------------


def save_checkpoint(state: GaussianTrajectoryState, path, noise_cursor: int = 0):
    """Self-describing snapshot enabling bit-exact resume."""
    header = {
        "kind": "dense",
        "theta": state.theta,
        "phi": state.phi,
        "time": state.time,
        "n_steps": state.n_steps,
        "noise_cursor": int(noise_cursor),
    }
    np.savez_compressed(path, header=json.dumps(header), beta=state.beta, u=state.u, v=state.v)


def load_checkpoint(path) -> tuple[GaussianTrajectoryState, int]:
    with np.load(path, allow_pickle=False) as data:
        header = json.loads(str(data["header"]))
        state = GaussianTrajectoryState(
            theta=header["theta"],
            phi=header["phi"],
            beta=data["beta"],
            u=data["u"],
            v=data["v"],
            time=header["time"],
            n_steps=header["n_steps"],
        )
    return state, header["noise_cursor"]

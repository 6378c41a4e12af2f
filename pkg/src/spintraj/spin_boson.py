"""Monitored long-range Tavis-Cummings dynamics with a joint Gaussian ansatz.

A 1D translation-invariant spin-s chain couples to a single lossy cavity
mode,

    H = omega S^x + sum_{ij} G_ij sigma_i^z sigma_j^z
        + (lam / sqrt(2 S)) (a^dag S^- + a S^+),      S = N s,

with heterodyne monitoring of the cavity output (single jump operator
sqrt(kappa) a).  In the co-rotating frame the lowest-order bosonization
gives S^- = N l0 + sqrt(N) (lb b0 + ld b0^dag) with b0 the k = 0 spin-wave
mode, so the cavity couples only to the uniform mode.  The joint Gaussian
state then factorizes into a dense two-mode (a, b0) block and the k != 0
spin-wave spectra, which evolve under the quadratic spin Hamiltonian
alone; no cavity / k != 0 cross moments ever develop.  The two-mode block
is integrated with the same moment equations as the dense spin engine,
the spectra with the circulant Hamiltonian flow.

State variables are kept per site: alpha_c = <a>, beta = <b_i> (uniform),
cavity moments u_a = <da da>, v_a = <da^dag da>, cross moments
u_ab = <da db_i>, v_ab = <da^dag db_i>, and displacement-indexed rows
u_b[m] = <db_i db_{i+m}>, v_b[m] = <db_i^dag db_{i+m}>, both reflection
symmetric in m.  After every step the frame is re-aligned onto the mean
spin: beta -> 0, u_ab and v_ab pick up e^{-i psi}, u_b picks up
e^{-2 i psi} with psi = dphi cos(theta); cavity moments are unchanged.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .engine import (
    EngineError,
    IntegrationDivergedError,
    FrameRotation,
    circulant_coefficients,
    moment_increments,
    realignment_angles,
    _reverse_spectrum,
)
from .lattice import LatticeGeometry, displacement_couplings
from .observables import _mode_entropy, covariance_matrix, symplectic_eigenvalues


@dataclass(frozen=True)
class SpinBosonParams:
    """Chain of n_sites spin-s sites coupled to one cavity mode.

    omega drives S^x, J / alpha set the Kac-normalized power-law coupling,
    lam is the collective cavity coupling, kappa the cavity loss rate.
    """

    n_sites: int
    s: float = 0.5
    omega: float = 0.0
    J: float = 0.0
    kappa: float = 1.0
    lam: float = 0.0
    alpha: float = 0.0

    def __post_init__(self):
        if self.n_sites < 1:
            raise EngineError("need at least one site")
        if self.kappa < 0 or self.alpha < 0:
            raise EngineError("kappa and alpha must be nonnegative")

    @property
    def geometry(self) -> LatticeGeometry:
        return LatticeGeometry(dims=(self.n_sites,))

    @property
    def coupling_strength(self) -> float:
        """Per-boson cavity coupling g_c = lam / sqrt(2 N s)."""
        return self.lam / np.sqrt(2.0 * self.n_sites * self.s)


@dataclass
class SpinBosonState:
    """Joint Gaussian state of the cavity mode and the spin waves."""

    theta: float
    phi: float
    alpha_c: complex
    beta: complex
    u_a: complex
    v_a: float
    u_ab: complex
    v_ab: complex
    u_b: np.ndarray
    v_b: np.ndarray
    time: float = 0.0
    n_steps: int = 0

    @property
    def n_sites(self) -> int:
        return len(self.u_b)

    def copy(self) -> "SpinBosonState":
        return SpinBosonState(
            theta=self.theta,
            phi=self.phi,
            alpha_c=self.alpha_c,
            beta=self.beta,
            u_a=self.u_a,
            v_a=self.v_a,
            u_ab=self.u_ab,
            v_ab=self.v_ab,
            u_b=self.u_b.copy(),
            v_b=self.v_b.copy(),
            time=self.time,
            n_steps=self.n_steps,
        )


def initial_sb_state(params: SpinBosonParams, direction=(0.0, 0.0, 1.0)) -> SpinBosonState:
    """Spin coherent state along ``direction``, cavity in vacuum."""
    d = np.asarray(direction, dtype=float)
    if abs(np.linalg.norm(d) - 1.0) > 1e-10:
        raise EngineError("polarization direction must be a unit vector")
    theta = float(np.arccos(np.clip(d[2], -1.0, 1.0)))
    phi = float(np.arctan2(d[1], d[0])) if (abs(d[0]) > 0 or abs(d[1]) > 0) else 0.0
    N = params.n_sites
    return SpinBosonState(
        theta=theta,
        phi=phi,
        alpha_c=0.0 + 0.0j,
        beta=0.0 + 0.0j,
        u_a=0.0 + 0.0j,
        v_a=0.0,
        u_ab=0.0 + 0.0j,
        v_ab=0.0 + 0.0j,
        u_b=np.zeros(N, dtype=complex),
        v_b=np.zeros(N, dtype=complex),
    )


def _coupling_spectrum(params: SpinBosonParams) -> np.ndarray:
    W_row = displacement_couplings(params.geometry, params.alpha, params.J, params.s) / (
        2.0 * params.s
    )
    return np.fft.fft(W_row)


def sb_eom_step(
    state: SpinBosonState,
    params: SpinBosonParams,
    dZ: complex,
    dt: float,
    W_hat: np.ndarray | None = None,
) -> SpinBosonState:
    """One Euler-Maruyama step conditioned on the heterodyne increment dZ.

    dZ is the normalized complex Wiener increment of the single cavity
    channel, E|dZ|^2 = dt; the jump operator is sqrt(kappa) a.  The state
    is updated in place and re-aligned onto the mean spin direction.
    """
    if W_hat is None:
        W_hat = _coupling_spectrum(params)
    N = state.n_sites
    if N != params.n_sites:
        raise EngineError("state and params disagree on the number of sites")
    rootN = np.sqrt(N)
    s = params.s
    g_c = params.coupling_strength

    h, p_hat, q_hat, l0, lb, ld = circulant_coefficients(
        params.omega, s, W_hat, state.theta, state.phi
    )

    u_hat = np.fft.fft(state.u_b)
    v_hat = np.fft.fft(state.v_b)

    # two-mode block (a, b0) with b0 the k = 0 spin-wave mode
    beta_blk = np.array([state.alpha_c, rootN * state.beta])
    u_blk = np.array(
        [[state.u_a, rootN * state.u_ab], [rootN * state.u_ab, u_hat[0]]]
    )
    v_blk = np.array(
        [
            [state.v_a + 0.0j, rootN * state.v_ab],
            [rootN * np.conj(state.v_ab), v_hat[0].real],
        ]
    )
    h_blk = np.array([g_c * N * l0, rootN * h])
    gb = g_c * rootN * lb
    gd = g_c * rootN * ld
    P_blk = np.array([[0.0, gb], [np.conj(gb), p_hat.flat[0]]])
    Q_blk = np.array([[0.0, gd], [gd, q_hat.flat[0]]])

    cb = np.array([[1.0 + 0.0j, 0.0]])
    cd = np.zeros((1, 2), dtype=complex)
    c0 = np.zeros(1, dtype=complex)
    rates = np.array([params.kappa])
    dw = np.array([np.sqrt(params.kappa) * dZ])

    dbeta_blk, du_blk, dv_blk = moment_increments(
        beta_blk, u_blk, v_blk, h_blk, P_blk, Q_blk, cb, cd, c0, rates, dw, dt
    )

    # k != 0 spin-wave spectra: Hamiltonian flow only (the cavity channel
    # touches the uniform mode alone); the k = 0 entry comes from the block.
    v_rev = _reverse_spectrum(v_hat)
    du_hat = -1j * (2.0 * p_hat * u_hat + q_hat * (v_hat + v_rev + 1.0)) * dt
    dv_hat = 1j * (np.conj(q_hat) * u_hat - q_hat * np.conj(u_hat)) * dt
    du_hat[0] = du_blk[1, 1]
    dv_hat[0] = dv_blk[1, 1]

    alpha_c = state.alpha_c + dbeta_blk[0]
    beta = state.beta + dbeta_blk[1] / rootN
    u_a = state.u_a + du_blk[0, 0]
    v_a = float((state.v_a + dv_blk[0, 0]).real)
    u_ab = state.u_ab + 0.5 * (du_blk[0, 1] + du_blk[1, 0]) / rootN
    v_ab = state.v_ab + dv_blk[0, 1] / rootN
    u_hat = u_hat + du_hat
    v_hat = (v_hat + dv_hat).real.astype(complex)  # v Hermitian -> real spectrum

    finite = (
        np.isfinite([alpha_c, beta, u_a, v_a, u_ab, v_ab]).all()
        and np.all(np.isfinite(u_hat))
        and np.all(np.isfinite(v_hat))
    )
    if not finite:
        raise IntegrationDivergedError(
            "non-finite moment increment", state=state, step_index=state.n_steps
        )
    # reflection symmetry hygiene: keep the spectra even in k
    u_hat = 0.5 * (u_hat + _reverse_spectrum(u_hat))
    v_hat = 0.5 * (v_hat + _reverse_spectrum(v_hat))

    # re-alignment: beta is the exact mean, so it maps exactly to zero
    dtheta, dphi, psi = realignment_angles(state.theta, complex(beta), s)
    phase = np.exp(-1j * psi)

    state.theta += dtheta
    state.phi += dphi
    state.alpha_c = alpha_c
    state.beta = 0.0 + 0.0j
    state.u_a = u_a
    state.v_a = v_a
    state.u_ab = u_ab * phase
    state.v_ab = v_ab * phase
    state.u_b = np.fft.ifft(u_hat * phase * phase)
    state.v_b = np.fft.ifft(v_hat)
    state.n_steps += 1
    state.time = state.n_steps * dt
    return state


class SpinBosonEngine:
    """Trajectory integrator driving sb_eom_step from a noise source."""

    def __init__(self, params: SpinBosonParams, dt: float):
        self.params = params
        self.dt = dt
        self.W_hat = _coupling_spectrum(params)
        self.rates = np.array([params.kappa])

    def initial_state(self, direction=(0.0, 0.0, 1.0)) -> SpinBosonState:
        return initial_sb_state(self.params, direction)

    def step(self, state: SpinBosonState, noise_source) -> SpinBosonState:
        dw = noise_source.draw(np.array([state.alpha_c]), self.rates)
        kap = self.params.kappa
        dZ = complex(dw[0]) / np.sqrt(kap) if kap > 0 else 0.0 + 0.0j
        return sb_eom_step(state, self.params, dZ, self.dt, W_hat=self.W_hat)


# ---------------------------------------------------------------------------
# observables
# ---------------------------------------------------------------------------


def sb_spin_wave_occupation(state: SpinBosonState) -> float:
    """Total spin-wave occupation sum_i <b_i^dag b_i>."""
    N = state.n_sites
    return float(N * (state.v_b[0].real + abs(state.beta) ** 2))


def sb_collective_spin(state: SpinBosonState, s: float) -> np.ndarray:
    """Lab-frame collective spin vector (<S^x>, <S^y>, <S^z>)."""
    root = np.sqrt(2.0 * s)
    N = state.n_sites
    frame = np.array(
        [
            root * N * state.beta.real,
            root * N * state.beta.imag,
            N * s - sb_spin_wave_occupation(state),
        ]
    )
    return FrameRotation(state.theta, state.phi).matrix @ frame


def sb_cavity_occupation(state: SpinBosonState) -> float:
    """Cavity photon number <a^dag a>."""
    return float(state.v_a + abs(state.alpha_c) ** 2)


def sb_spin_cavity_entropy(state: SpinBosonState) -> float:
    """Von Neumann entropy (nats) of the reduced cavity mode.

    The joint Gaussian trajectory state is pure, so this is the
    entanglement entropy between the cavity and all the spins.
    """
    u = np.array([[state.u_a]])
    v = np.array([[state.v_a + 0.0j]])
    return _mode_entropy(symplectic_eigenvalues(covariance_matrix(u, v)))

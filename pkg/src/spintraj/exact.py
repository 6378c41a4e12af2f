"""Numerically exact small-system references.

Three solvers share one stochastic pure-state integrator: a Dicke-basis
representation (collective operators, valid for the all-to-all coupled
model), a full product-basis representation for small site numbers, and
a deterministic Lindblad integrator.  A conditioned density-matrix
update is kept alongside purely as a purity witness for the stochastic
solver.  Permutation-symmetric half-system entanglement is evaluated by
decomposing the maximal-spin sector over two half chains with
Clebsch-Gordan coefficients.
"""

from __future__ import annotations

from functools import lru_cache

import numpy as np
import scipy.sparse as sp

from .lattice import LatticeGeometry
from .model import SpinModel
from .noise import NoiseError


class ExactSolverError(RuntimeError):
    pass


# ---------------------------------------------------------------------------
# operators
# ---------------------------------------------------------------------------


def spin_matrices(s: float):
    """Dense (s^x, s^y, s^z, s^+, s^-) for one spin-s in the m-ascending basis."""
    if (2 * s) % 1 != 0 or s <= 0:
        raise ExactSolverError(f"spin length must be a positive half-integer, got {s}")
    m = np.arange(-s, s + 1)
    dim = len(m)
    sp_ = np.zeros((dim, dim))
    for k in range(dim - 1):
        sp_[k + 1, k] = np.sqrt(s * (s + 1) - m[k] * (m[k] + 1))
    sm = sp_.T.copy()
    sx = 0.5 * (sp_ + sm)
    sy = -0.5j * (sp_ - sm)
    sz = np.diag(m).astype(float)
    return sx, sy.astype(complex), sz, sp_, sm


def dicke_operators(S: float):
    """Collective (S^x, S^y, S^z, S^+, S^-) on the 2S+1 Dicke ladder."""
    return spin_matrices(S)


def site_operator(op: np.ndarray, site: int, n_sites: int) -> sp.csr_matrix:
    """Embed a single-spin operator at ``site`` in the N-site product basis."""
    dim = op.shape[0]
    mats = [sp.identity(dim, format="csr")] * n_sites
    mats[site] = sp.csr_matrix(op)
    out = mats[0]
    for m in mats[1:]:
        out = sp.kron(out, m, format="csr")
    return out


def dicke_hamiltonian(model: SpinModel) -> np.ndarray:
    """Collective-sector Hamiltonian; requires all-to-all couplings (alpha = 0)."""
    if model.alpha != 0.0:
        raise ExactSolverError("the Dicke basis requires alpha = 0")
    N, s = model.n_sites, model.s
    S = model.total_spin
    _, _, Sz, _, _ = dicke_operators(S)
    Sx, _, _, _, _ = dicke_operators(S)
    G = 2.0 * s * model.J / (N - 1)  # uniform Kac-normalized coupling
    # sum_{i != j} sigma_i sigma_j = ((S^z)^2 - sum_i (s_i^z)^2) / s^2, and
    # every site contributes s^2... no: (s_i^z)^2 averages to s(s+1)/3 only
    # for general s; for s = 1/2 it is the constant 1/4.
    if s != 0.5:
        raise ExactSolverError("Dicke-sector ZZ term implemented for s = 1/2 chains")
    Hzz = (G / s**2) * (Sz @ Sz - (N / 4.0) * np.eye(int(2 * S + 1)))
    return model.omega * Sx + Hzz


def dicke_channel_ops(model: SpinModel):
    """Diagonal monitored channels as collective Dicke-ladder matrices."""
    if model.alpha != 0.0:
        raise ExactSolverError("the Dicke basis requires alpha = 0")
    _, _, _, _, Sm = dicke_operators(model.total_spin)
    ops, rates = [], []
    for ch in model.channels:
        w = ch.weights
        if not np.allclose(w, w[0], atol=1e-12):
            raise ExactSolverError("Dicke basis supports only the uniform collective channel")
        ops.append(complex(w[0]) * Sm)
        rates.append(ch.rate)
    return ops, np.array(rates)


def product_hamiltonian(model: SpinModel) -> sp.csr_matrix:
    """Full product-basis Hamiltonian for arbitrary alpha."""
    N, s = model.n_sites, model.s
    sx, _, szm, _, _ = spin_matrices(s)
    G = model.couplings.entries
    H = sp.csr_matrix(((int(2 * s + 1)) ** N,) * 2, dtype=complex)
    sz_site = [site_operator(szm, i, N) for i in range(N)]
    for i in range(N):
        H = H + model.omega * site_operator(sx, i, N)
    for i in range(N):
        for j in range(N):
            if i != j and G[i, j] != 0.0:
                H = H + (G[i, j] / s**2) * (sz_site[i] @ sz_site[j])
    return H.tocsr()


def product_channel_ops(model: SpinModel):
    """Diagonalized monitored channels in the product basis."""
    N, s = model.n_sites, model.s
    _, _, _, _, sm = spin_matrices(s)
    lowering = [site_operator(sm, i, N) for i in range(N)]
    ops, rates = [], []
    for ch in model.channels:
        A = sum(wj * Lj for wj, Lj in zip(ch.weights, lowering))
        ops.append(A.tocsr())
        rates.append(ch.rate)
    return ops, np.array(rates)


def product_sz(model: SpinModel) -> sp.csr_matrix:
    _, _, szm, _, _ = spin_matrices(model.s)
    N = model.n_sites
    return sum(site_operator(szm, i, N) for i in range(N)).tocsr()


# ---------------------------------------------------------------------------
# stochastic pure-state integration
# ---------------------------------------------------------------------------


def sse_step(
    psi: np.ndarray, H, channel_ops, rates, dw: np.ndarray, dt: float, norm_tol: float = 1e-3
) -> np.ndarray:
    """One Euler-Maruyama step of the norm-preserving nonlinear SSE.

    d|psi> = -iH|psi>dt
             + sum_k kappa_k (<A^dag>A - <A^dag><A>/2 - A^dag A/2)|psi>dt
             + sum_k (A - <A>)|psi> dw*_k,
    followed by renormalization.

    ``norm_tol`` bounds the one-step norm drift.  The Euler drift is
    ~ kappa*dt*(chi2/2 - 1)*Var(A) with an Exp(1) tail, so its maximum
    over a long run grows like log(n_steps); long integrations at large
    Var(A) should widen the tolerance rather than shrink dt.
    """
    dpsi = -1j * (H @ psi) * dt
    for A, kap, dwk in zip(channel_ops, rates, dw):
        Apsi = A @ psi
        mA = complex(psi.conj() @ Apsi)
        AdagApsi = A.conj().T @ Apsi
        dpsi += kap * (np.conj(mA) * Apsi - 0.5 * abs(mA) ** 2 * psi - 0.5 * AdagApsi) * dt
        dpsi += (Apsi - mA * psi) * np.conj(dwk)
    out = psi + dpsi
    norm = np.linalg.norm(out)
    if abs(norm - 1.0) > norm_tol:
        raise ExactSolverError(f"norm drifted by {abs(norm - 1.0):g} in one step; reduce dt")
    return out / norm


def integrate_exact_sse(
    psi0: np.ndarray,
    H,
    channel_ops,
    rates,
    noise_source,
    dt: float,
    n_steps: int,
    sample_stride: int = 1,
    norm_tol: float = 1e-3,
):
    """Integrate the SSE; returns (times, list of sampled state vectors).

    ``noise_source`` follows the engine protocol: draw(mean_A, rates)
    returns the per-channel complex increments for one step (sampling
    fresh noise or replaying a stored record).
    """
    psi = np.array(psi0, dtype=complex)
    psi /= np.linalg.norm(psi)
    rates = np.asarray(rates, dtype=float)
    times = [0.0]
    samples = [psi.copy()]
    for n in range(1, n_steps + 1):
        mean_A = np.array([complex(psi.conj() @ (A @ psi)) for A in channel_ops])
        dw = noise_source.draw(mean_A, rates)
        psi = sse_step(psi, H, channel_ops, rates, dw, dt, norm_tol=norm_tol)
        if n % sample_stride == 0 or n == n_steps:
            times.append(n * dt)
            samples.append(psi.copy())
    return np.array(times), samples


def conditioned_density_step(rho: np.ndarray, H, channel_ops, rates, dw, dt) -> np.ndarray:
    """Conditioned density-matrix update in completely positive form.

    rho' = M rho M^dag / tr with M = 1 - iH dt
    + sum_k (dw*_k A_k - kappa_k A_k^dag A_k dt / 2); this factorized
    discretization of the stochastic master equation preserves positivity
    and maps pure states to pure states at every step.
    """
    dim = rho.shape[0]
    M = np.eye(dim, dtype=complex) - 1j * dt * np.asarray(H.todense() if sp.issparse(H) else H)
    for A, kap, dwk in zip(channel_ops, rates, dw):
        Ad = np.asarray(A.todense() if sp.issparse(A) else A)
        M += np.conj(dwk) * Ad - 0.5 * kap * dt * (Ad.conj().T @ Ad)
    out = M @ rho @ M.conj().T
    return out / np.trace(out).real


def purity(rho: np.ndarray) -> float:
    return float(np.trace(rho @ rho).real)


# ---------------------------------------------------------------------------
# batched trajectory updates (one numpy call per ensemble step)
# ---------------------------------------------------------------------------


def _as_dense(M) -> np.ndarray:
    return np.asarray(M.todense() if sp.issparse(M) else M, dtype=complex)


def sse_step_batch(
    Psi: np.ndarray, H, channel_ops, rates, dw: np.ndarray, dt: float, norm_tol: float = 1e-3
):
    """Vectorized ``sse_step`` over trajectory columns.

    ``Psi`` has shape (dim, B) with one normalized trajectory per column
    and ``dw`` shape (n_channels, B).  Large ensembles of small exact
    trajectories are memory-bandwidth-bound per step, so stepping them
    together is far faster than B separate python loops.

    ``norm_tol`` bounds the worst per-column norm drift in one step.  The
    Euler drift per step is ~ kappa*dt*(chi2/2 - 1)*Var(A) with an Exp(1)
    tail, so the batch maximum grows like log(B * n_steps); callers with
    large ensembles should scale the tolerance accordingly rather than
    shrink dt.
    """
    Hd = _as_dense(H)
    dPsi = -1j * dt * (Hd @ Psi)
    for A, kap, dwk in zip(channel_ops, rates, dw):
        Ad = _as_dense(A)
        APsi = Ad @ Psi
        mA = np.einsum("ib,ib->b", Psi.conj(), APsi)
        AdAPsi = Ad.conj().T @ APsi
        dPsi += kap * dt * (mA.conj() * APsi - 0.5 * np.abs(mA) ** 2 * Psi - 0.5 * AdAPsi)
        dPsi += dwk.conj() * (APsi - mA * Psi)
    out = Psi + dPsi
    norms = np.linalg.norm(out, axis=0)
    drift = float(np.abs(norms - 1.0).max())
    if drift > norm_tol:
        raise ExactSolverError(f"norm drifted by {drift:g} in one step; reduce dt")
    return out / norms


def conditioned_density_step_batch(rho: np.ndarray, H, channel_ops, rates, dw, dt):
    """Vectorized ``conditioned_density_step``: rho (B, dim, dim), dw (n_channels, B).

    Applies the same CP map M_b rho_b M_b^dag / tr per trajectory, with
    M_b = M0 + sum_k dw*_{kb} A_k and the dw-independent part M0 shared.
    """
    dim = rho.shape[-1]
    M0 = np.eye(dim, dtype=complex) - 1j * dt * _as_dense(H)
    dense_ops = [_as_dense(A) for A in channel_ops]
    for Ad, kap in zip(dense_ops, rates):
        M0 -= 0.5 * kap * dt * (Ad.conj().T @ Ad)
    X = np.matmul(M0, rho)
    for Ad, dwk in zip(dense_ops, dw):
        X += dwk.conj()[:, None, None] * np.matmul(Ad, rho)
    out = np.matmul(X, M0.conj().T)
    for Ad, dwk in zip(dense_ops, dw):
        out += dwk[:, None, None] * np.matmul(X, Ad.conj().T)
    traces = np.einsum("bii->b", out).real
    return out / traces[:, None, None]


def purity_batch(rho: np.ndarray) -> np.ndarray:
    """tr rho_b^2 for a (B, dim, dim) stack."""
    return np.einsum("bij,bji->b", rho, rho).real


# ---------------------------------------------------------------------------
# Lindblad integration
# ---------------------------------------------------------------------------


def lindblad_rhs(rho: np.ndarray, H, channel_ops, rates) -> np.ndarray:
    out = -1j * (H @ rho - rho @ H)
    for A, kap in zip(channel_ops, rates):
        Arho = A @ rho
        AdagA = A.conj().T @ A
        out = out + kap * (Arho @ A.conj().T - 0.5 * (AdagA @ rho + rho @ AdagA))
    return np.asarray(out)


def integrate_lindblad(
    rho0: np.ndarray,
    H,
    channel_ops,
    rates,
    t_final: float,
    dt: float,
    sample_stride: int = 1,
):
    """Classic fourth-order Runge-Kutta integration of the master equation."""
    H = np.asarray(H.todense() if sp.issparse(H) else H)
    channel_ops = [np.asarray(A.todense() if sp.issparse(A) else A) for A in channel_ops]
    rho = np.array(rho0, dtype=complex)
    n_steps = int(round(t_final / dt))
    times = [0.0]
    samples = [rho.copy()]
    for n in range(1, n_steps + 1):
        k1 = lindblad_rhs(rho, H, channel_ops, rates)
        k2 = lindblad_rhs(rho + 0.5 * dt * k1, H, channel_ops, rates)
        k3 = lindblad_rhs(rho + 0.5 * dt * k2, H, channel_ops, rates)
        k4 = lindblad_rhs(rho + dt * k3, H, channel_ops, rates)
        rho = rho + (dt / 6.0) * (k1 + 2 * k2 + 2 * k3 + k4)
        if abs(np.trace(rho).real - 1.0) > 1e-6:
            raise ExactSolverError("trace drift in Lindblad integration; reduce dt")
        if n % sample_stride == 0 or n == n_steps:
            times.append(n * dt)
            samples.append(rho.copy())
    return np.array(times), samples


# ---------------------------------------------------------------------------
# Clebsch-Gordan and Dicke-sector entanglement
# ---------------------------------------------------------------------------


@lru_cache(maxsize=None)
def _log_factorials(n: int) -> np.ndarray:
    from scipy.special import gammaln

    return gammaln(np.arange(n + 1) + 1.0)


def clebsch_gordan(j1, m1, j2, m2, J, M) -> float:
    """Condon-Shortley coefficient <j1 m1; j2 m2 | J M> (finite-sum formula)."""
    for twice in (2 * j1, 2 * m1, 2 * j2, 2 * m2, 2 * J, 2 * M):
        if twice % 1 != 0:
            raise ExactSolverError("quantum numbers must be integers or half-integers")
    if abs(m1) > j1 or abs(m2) > j2 or abs(M) > J:
        raise ExactSolverError("|m| must not exceed j")
    if (j1 + m1) % 1 != 0 or (j2 + m2) % 1 != 0 or (J + M) % 1 != 0:
        raise ExactSolverError("j and m must differ by an integer")
    if m1 + m2 != M:
        return 0.0
    if J < abs(j1 - j2) or J > j1 + j2 or (j1 + j2 + J) % 1 != 0:
        return 0.0
    lf = _log_factorials(int(j1 + j2 + J + 1))

    def f(x):
        return lf[int(round(x))]

    pref = 0.5 * (
        np.log(2 * J + 1)
        + f(J + j1 - j2)
        + f(J - j1 + j2)
        + f(j1 + j2 - J)
        - f(j1 + j2 + J + 1)
        + f(J + M)
        + f(J - M)
        + f(j1 - m1)
        + f(j1 + m1)
        + f(j2 - m2)
        + f(j2 + m2)
    )
    k_min = int(round(max(0, j2 - J - m1, j1 + m2 - J)))
    k_max = int(round(min(j1 + j2 - J, j1 - m1, j2 + m2)))
    total = 0.0
    for k in range(k_min, k_max + 1):
        logterm = pref - (
            f(k)
            + f(j1 + j2 - J - k)
            + f(j1 - m1 - k)
            + f(j2 + m2 - k)
            + f(J - j2 + m1 + k)
            + f(J - j1 - m2 + k)
        )
        total += (-1.0) ** k * np.exp(logterm)
    return float(total)


@lru_cache(maxsize=None)
def _half_chain_cg_table(n_spins: int) -> np.ndarray:
    """<j m1; j m2 | S m1+m2> table for the half-chain decomposition."""
    S = n_spins / 2.0
    j = n_spins / 4.0
    m_half = np.arange(-j, j + 1)
    half_dim = int(2 * j + 1)
    cg = np.zeros((half_dim, half_dim))
    for i1, m1 in enumerate(m_half):
        for i2, m2 in enumerate(m_half):
            cg[i1, i2] = clebsch_gordan(j, m1, j, m2, S, m1 + m2)
    cg.setflags(write=False)
    return cg


def dicke_half_entropy(amplitudes: np.ndarray, n_spins: int) -> float:
    """Half-chain entanglement entropy of a maximal-sector state (nats).

    The state sum_m c_m |S, m> of N spin-1/2 sites (S = N/2) decomposes
    over the two half chains, each in its own maximal sector j = N/4,
    with Clebsch-Gordan weights; the reduced state of one half acts on
    the (N/2 + 1)-dimensional ladder.
    """
    if n_spins % 2 != 0:
        raise ExactSolverError("half-system bipartition needs an even number of spins")
    S = n_spins / 2.0
    c = np.asarray(amplitudes, dtype=complex)
    if len(c) != int(2 * S + 1):
        raise ExactSolverError("amplitude vector does not match the maximal-spin ladder")
    j = n_spins / 4.0
    half_dim = int(2 * j + 1)
    m_half = np.arange(-j, j + 1)
    cg = _half_chain_cg_table(n_spins)
    rho = np.zeros((half_dim, half_dim), dtype=complex)
    for i2, m2 in enumerate(m_half):
        vec = np.array(
            [cg[i1, i2] * c[int(round(m1 + m2 + S))] for i1, m1 in enumerate(m_half)]
        )
        rho += np.outer(vec, vec.conj())
    vals = np.linalg.eigvalsh(rho)
    vals = vals[vals > 1e-14]
    return float(-(vals * np.log(vals)).sum())


# ---------------------------------------------------------------------------
# projective measurement
# ---------------------------------------------------------------------------


def projective_measurement_sample(psi: np.ndarray, eigenvalues: np.ndarray, rng):
    """Born-rule sample of an observable diagonal in the current basis.

    Degenerate eigenvalues are grouped; returns (eigenvalue, collapsed
    normalized state).
    """
    psi = np.asarray(psi, dtype=complex)
    eigenvalues = np.asarray(eigenvalues, dtype=float)
    probs = np.abs(psi) ** 2
    probs = probs / probs.sum()
    unique = np.unique(eigenvalues)
    p_groups = np.array([probs[eigenvalues == o].sum() for o in unique])
    o = rng.choice(unique, p=p_groups / p_groups.sum())
    collapsed = np.where(eigenvalues == o, psi, 0.0)
    return float(o), collapsed / np.linalg.norm(collapsed)

"""Independent brute-force oracles used to pin down the engine algebra.

Everything here is built from raw operator algebra in a truncated
per-mode Fock space: the rotated-frame spin Hamiltonian is expanded to
quadratic order and the jump operators to linear order directly from
the rotation matrix (no reuse of the package's vectorized coefficient
builders), and the moment increments are evaluated from the exact
diffusion-unraveling expectation formulas with no Wick factorization.
"""

from __future__ import annotations

import numpy as np

from spintraj.engine import frame_rotation


def boson_ops(n_modes: int, n_max: int) -> list[np.ndarray]:
    """Annihilation operators on the (n_max+1)^n_modes product Fock space."""
    dim = n_max + 1
    a = np.diag(np.sqrt(np.arange(1, dim)), k=1)
    eye = np.eye(dim)
    ops = []
    for i in range(n_modes):
        mats = [eye] * n_modes
        mats[i] = a
        out = mats[0]
        for m in mats[1:]:
            out = np.kron(out, m)
        ops.append(out)
    return ops


def truncated_generators(model, theta: float, phi: float, bops):
    """Quadratic Hamiltonian and linear per-site jump matrices.

    Built term by term from the rotated spin components bosonized as
    X = sqrt(s/2)(b + b^dag), Y = i sqrt(s/2)(b^dag - b), s^z = s - n,
    dropping cubic and quartic Hamiltonian terms and the quadratic part
    of the jump operators.
    """
    R = frame_rotation(theta, phi).matrix
    w, r = R[0], R[2]
    s = model.s
    G = model.couplings.entries
    N = model.n_sites
    dim = bops[0].shape[0]
    eye = np.eye(dim)
    root = np.sqrt(s / 2.0)
    X = [root * (b + b.conj().T) for b in bops]
    Y = [1j * root * (b.conj().T - b) for b in bops]
    n_op = [b.conj().T @ b for b in bops]
    A = [r[0] * X[i] + r[1] * Y[i] for i in range(N)]

    H = np.zeros((dim, dim), dtype=complex)
    for i in range(N):
        H += model.omega * (w[0] * X[i] + w[1] * Y[i] + w[2] * (s * eye - n_op[i]))
    for i in range(N):
        for j in range(N):
            if i == j:
                continue
            Gs = G[i, j] / s**2
            H += Gs * (A[i] @ A[j] + r[2] * s * (A[i] + A[j]))
            H += Gs * r[2] ** 2 * (s**2 * eye - s * (n_op[i] + n_op[j]))

    q = R[0] - 1j * R[1]
    jumps = [q[0] * X[i] + q[1] * Y[i] + q[2] * s * eye for i in range(N)]
    return H, jumps


def channel_operators(channels, jumps):
    """Diagonalized channel matrices A_k = sum_j u_jk L_j."""
    ops = []
    for ch in channels:
        A = sum(wj * Lj for wj, Lj in zip(ch.weights, jumps))
        ops.append(A)
    return ops


def gaussian_fock_state(bops, lam, mu) -> np.ndarray:
    """Normalized exp(sum lam_i b_i^dag + 1/2 sum mu_ij b_i^dag b_j^dag)|0>."""
    dim = bops[0].shape[0]
    N = len(bops)
    T = np.zeros((dim, dim), dtype=complex)
    for i in range(N):
        T += lam[i] * bops[i].conj().T
        for j in range(N):
            T += 0.5 * mu[i, j] * bops[i].conj().T @ bops[j].conj().T
    psi = np.zeros(dim, dtype=complex)
    psi[0] = 1.0
    term = psi.copy()
    for k in range(1, 80):
        term = T @ term / k
        psi = psi + term
        if np.linalg.norm(term) < 1e-18:
            break
    return psi / np.linalg.norm(psi)


def fock_moments(psi, bops):
    """Exact (beta, u, v) centered moments of a Fock-space state."""
    N = len(bops)
    bpsi = [b @ psi for b in bops]
    beta = np.array([psi.conj() @ bp for bp in bpsi])
    u = np.zeros((N, N), dtype=complex)
    v = np.zeros((N, N), dtype=complex)
    for i in range(N):
        for j in range(N):
            u[i, j] = psi.conj() @ (bops[i] @ bpsi[j]) - beta[i] * beta[j]
            v[i, j] = bpsi[i].conj() @ bpsi[j] - np.conj(beta[i]) * beta[j]
    return beta, u, v


def fock_expectation(psi, op, *more_ops):
    """<psi| op_1 op_2 ... |psi> for a product of matrices."""
    vec = psi
    for O in reversed((op,) + more_ops):
        vec = O @ vec
    return complex(psi.conj() @ vec)


def qsd_moment_increments(psi, H, channel_ops, rates, bops, dw, dt):
    """Exact one-step centered-moment increments of the diffusion unraveling.

    For any operator O the conditional expectation obeys
    d<O> = -i<[O,H]>dt
           + sum_k kappa_k (<A_k^dag O A_k> - (<A_k^dag A_k O> + <O A_k^dag A_k>)/2) dt
           + sum_k [(<O A_k> - <O><A_k>) dw*_k + (<A_k^dag O> - <A_k^dag><O>) dw_k];
    the centered moments u, v then acquire the Ito corrections from the
    products of first-moment noise coefficients with E[dw*_j dw_k] =
    kappa_k delta_jk dt.
    """
    N = len(bops)
    L = len(channel_ops)
    Hpsi = H @ psi
    Apsi = [A @ psi for A in channel_ops]
    AdagApsi = [A.conj().T @ ap for A, ap in zip(channel_ops, Apsi)]
    meanA = np.array([complex(psi.conj() @ ap) for ap in Apsi])

    def d_expect(apply_O):
        """apply_O maps a vector to O times that vector (matvecs only)."""
        Opsi = apply_O(psi)
        mO = complex(psi.conj() @ Opsi)
        det = -1j * (complex(psi.conj() @ apply_O(Hpsi)) - complex(Hpsi.conj() @ Opsi))
        F = np.empty(L, dtype=complex)
        G = np.empty(L, dtype=complex)
        stoch = 0.0 + 0.0j
        for k in range(L):
            kap = rates[k]
            OApsi = apply_O(Apsi[k])
            adoa = complex(Apsi[k].conj() @ OApsi)
            adao = complex(Apsi[k].conj() @ (channel_ops[k] @ Opsi))
            oada = complex(psi.conj() @ apply_O(AdagApsi[k]))
            det += kap * (adoa - 0.5 * adao - 0.5 * oada)
            F[k] = complex(psi.conj() @ OApsi) - mO * meanA[k]
            G[k] = complex(Apsi[k].conj() @ Opsi) - np.conj(meanA[k]) * mO
            stoch += F[k] * np.conj(dw[k]) + G[k] * dw[k]
        return det * dt + stoch, F, G

    beta, _, _ = fock_moments(psi, bops)
    dbeta = np.empty(N, dtype=complex)
    Fb = np.empty((N, L), dtype=complex)
    Gb = np.empty((N, L), dtype=complex)
    for i in range(N):
        dbeta[i], Fb[i], Gb[i] = d_expect(lambda vec, b=bops[i]: b @ vec)

    du = np.zeros((N, N), dtype=complex)
    dv = np.zeros((N, N), dtype=complex)
    bdag = [b.conj().T for b in bops]
    for i in range(N):
        for j in range(N):
            dBB, _, _ = d_expect(lambda vec, bi=bops[i], bj=bops[j]: bi @ (bj @ vec))
            dNN, _, _ = d_expect(lambda vec, bi=bdag[i], bj=bops[j]: bi @ (bj @ vec))
            ito_u = np.sum(rates * (Fb[i] * Gb[j] + Gb[i] * Fb[j])) * dt
            ito_v = np.sum(rates * (np.conj(Fb[i]) * Fb[j] + np.conj(Gb[i]) * Gb[j])) * dt
            du[i, j] = dBB - beta[i] * dbeta[j] - beta[j] * dbeta[i] - ito_u
            dv[i, j] = dNN - np.conj(beta[i]) * dbeta[j] - beta[j] * np.conj(dbeta[i]) - ito_v
    return dbeta, du, dv

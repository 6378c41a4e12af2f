"""Observables of Gaussian spin-wave trajectory states.

Collective spin components follow from the lowest-order bosonization in
the co-rotating frame: per site <s^x> = sqrt(2s) Re beta, <s^y> =
sqrt(2s) Im beta, <s^z> = s - <n>, rotated to the lab with the frame
rotation.  Entanglement entropies of site bipartitions come from the
symplectic spectrum of the reduced quadrature covariance matrix.
"""

from __future__ import annotations

import numpy as np

from .engine import FrameRotation, GaussianTrajectoryState


class ObservableError(ValueError):
    pass


def spin_wave_density(state: GaussianTrajectoryState, s: float) -> float:
    """Mean boson occupation per spin length, (1/Ns) sum_i <b_i^dag b_i>."""
    occ = state.v.diagonal().real + np.abs(state.beta) ** 2
    return float(occ.sum() / (state.n_sites * s))


def collective_spin_frame(state: GaussianTrajectoryState, s: float) -> np.ndarray:
    """(<S^x>, <S^y>, <S^z>) in the co-rotating frame."""
    root = np.sqrt(2.0 * s)
    occ = state.v.diagonal().real + np.abs(state.beta) ** 2
    return np.array(
        [
            root * state.beta.real.sum(),
            root * state.beta.imag.sum(),
            state.n_sites * s - occ.sum(),
        ]
    )


def collective_spin(state: GaussianTrajectoryState, s: float) -> np.ndarray:
    """Lab-frame collective spin vector (<S^x>, <S^y>, <S^z>)."""
    R = FrameRotation(state.theta, state.phi).matrix
    return R @ collective_spin_frame(state, s)


# ---------------------------------------------------------------------------
# Gaussian entanglement
# ---------------------------------------------------------------------------


def covariance_matrix(u: np.ndarray, v: np.ndarray) -> np.ndarray:
    """Symmetrized quadrature covariance in (x_1..x_M, p_1..p_M) order.

    With x = (d + d^dag)/sqrt(2), p = (d - d^dag)/(i sqrt(2)):
    Xi^xx = Re u + Re v + 1/2, Xi^pp = -Re u + Re v + 1/2,
    Xi^xp_ij = Im u_ij + Im v_ij (and Xi^px its transpose relative).
    """
    M = u.shape[0]
    eye = 0.5 * np.eye(M)
    xx = u.real + v.real + eye
    pp = -u.real + v.real + eye
    xp = u.imag + v.imag
    px = u.imag - v.imag
    return np.block([[xx, xp], [px, pp]])


def symplectic_form(M: int) -> np.ndarray:
    eye = np.eye(M)
    zero = np.zeros((M, M))
    return np.block([[zero, eye], [-eye, zero]])


def symplectic_eigenvalues(cov: np.ndarray) -> np.ndarray:
    """Symplectic spectrum: moduli of the eigenvalues of i Xi Omega."""
    M = cov.shape[0] // 2
    vals = np.linalg.eigvals(cov @ symplectic_form(M))
    mu = np.sort(np.abs(vals.imag))
    return mu[::2]  # each value appears as a +/- pair; keep one per pair, ascending


def is_physical(cov: np.ndarray, tol: float = 1e-8) -> bool:
    """Uncertainty-relation check: Xi + i Omega / 2 >= -tol."""
    M = cov.shape[0] // 2
    vals = np.linalg.eigvalsh(cov.astype(complex) + 0.5j * symplectic_form(M))
    return bool(vals.min() >= -tol)


def _mode_entropy(mu: np.ndarray) -> float:
    mu = np.asarray(mu, dtype=float)
    # snap eigenvalue roundoff at the vacuum value so pure modes give 0 exactly
    mu = np.clip(np.where(np.abs(mu - 0.5) < 1e-12, 0.5, mu), 0.5, None)
    plus = mu + 0.5
    minus = mu - 0.5
    ent = plus * np.log(plus)
    mask = minus > 0.0
    ent[mask] -= minus[mask] * np.log(minus[mask])
    return float(ent.sum())


def entanglement_entropy(state: GaussianTrajectoryState, subsystem) -> float:
    """Von Neumann entropy (nats) of the reduced state of ``subsystem`` sites.

    The Gaussian trajectory state is pure, so this is the entanglement
    entropy of the bipartition (subsystem, complement).
    """
    idx = np.asarray(subsystem, dtype=int)
    if len(np.unique(idx)) != len(idx):
        raise ObservableError("subsystem indices must be distinct")
    u = state.u[np.ix_(idx, idx)]
    v = state.v[np.ix_(idx, idx)]
    return _mode_entropy(symplectic_eigenvalues(covariance_matrix(u, v)))


def half_chain_entropy(state: GaussianTrajectoryState) -> float:
    """Entanglement entropy of the first half of the site ordering."""
    return entanglement_entropy(state, np.arange(state.n_sites // 2))

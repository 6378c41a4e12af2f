"""Monitored long-range spin model definition and mean-field limit.

The model is a lattice of spin-s sites with a transverse drive, Kac
normalized power-law Ising couplings, and a collective lowering-type
dissipator with site-pair rates f_ij = kappa / S, S = N s.  The
dissipator matrix is diagonalized into independent monitored channels
A_k = sum_j u_jk L_j with nonnegative rates.

The N -> inf mean-field limit closes on the Bloch vector
m = (m_x, m_y, m_z) = <S> / S:

    dm_x/dt = -4 J m_y m_z + kappa m_x m_z
    dm_y/dt = -omega m_z + 4 J m_x m_z + kappa m_y m_z
    dm_z/dt =  omega m_y - kappa (m_x^2 + m_y^2)

with a stationary-to-time-crystalline transition at
omega_c = sqrt(16 J^2 + kappa^2).
"""

from __future__ import annotations

from dataclasses import dataclass, field
from functools import cached_property

import numpy as np
from scipy.integrate import solve_ivp

from .lattice import CouplingMatrix, LatticeGeometry, coupling_matrix


class ModelError(ValueError):
    pass


@dataclass(frozen=True)
class DissipatorSpec:
    """Hermitian PSD matrix of pair rates f_ij for sum_ij f_ij D[L_i, L_j]."""

    rates: np.ndarray

    def __post_init__(self):
        f = np.asarray(self.rates, dtype=complex)
        if f.ndim != 2 or f.shape[0] != f.shape[1]:
            raise ModelError("dissipator rates must be a square matrix")
        if not np.allclose(f, f.conj().T, atol=1e-12):
            raise ModelError("dissipator rate matrix must be Hermitian")
        object.__setattr__(self, "rates", f)
        f.setflags(write=False)

    @classmethod
    def collective(cls, n_sites: int, kappa: float, s: float) -> "DissipatorSpec":
        """Uniform collective rates f_ij = kappa / (N s)."""
        S_tot = n_sites * s
        return cls(np.full((n_sites, n_sites), kappa / S_tot, dtype=complex))


@dataclass(frozen=True)
class MonitoredChannel:
    """One diagonalized jump channel A = sum_j weights[j] L_j at the given rate."""

    rate: float
    weights: np.ndarray


def diagonalize_dissipator(spec: DissipatorSpec, rel_tol: float = 1e-12) -> list[MonitoredChannel]:
    """Split f = u diag(kappa_k) u^dag into channels with unit-norm weights.

    Eigenvalues below ``rel_tol`` times the largest rate are dropped;
    a negative eigenvalue beyond that tolerance is an invalid model.
    """
    vals, vecs = np.linalg.eigh(spec.rates)
    cutoff = rel_tol * max(float(vals.max(initial=0.0)), 0.0)
    if np.any(vals < -max(cutoff, rel_tol)):
        raise ModelError(f"dissipator rate matrix is not PSD (min eigenvalue {vals.min():g})")
    channels = []
    for k in np.argsort(vals)[::-1]:
        if vals[k] <= cutoff:
            continue
        w = vecs[:, k].copy()
        w.setflags(write=False)
        channels.append(MonitoredChannel(rate=float(vals[k]), weights=w))
    return channels


@dataclass(frozen=True)
class SpinModel:
    """Driven dissipative long-range spin-s lattice.

    H = omega S^x + sum_{ij} G_ij sigma_i^z sigma_j^z with sigma = s / s,
    G the Kac normalized power-law coupling matrix, plus a collective
    lowering dissipator at total rate kappa.
    """

    geometry: LatticeGeometry
    s: float
    omega: float
    J: float
    kappa: float
    alpha: float

    def __post_init__(self):
        if self.s <= 0 or (2 * self.s) % 1 != 0:
            raise ModelError(f"spin length must be a positive half-integer, got {self.s}")
        if self.kappa < 0 or self.alpha < 0:
            raise ModelError("kappa and alpha must be nonnegative")

    @property
    def n_sites(self) -> int:
        return self.geometry.n_sites

    @property
    def total_spin(self) -> float:
        return self.n_sites * self.s

    @cached_property
    def couplings(self) -> CouplingMatrix:
        return coupling_matrix(self.geometry, self.alpha, self.J, self.s)

    @cached_property
    def dissipator(self) -> DissipatorSpec:
        return DissipatorSpec.collective(self.n_sites, self.kappa, self.s)

    @cached_property
    def channels(self) -> list[MonitoredChannel]:
        return diagonalize_dissipator(self.dissipator)


def mean_field_rhs(m: np.ndarray, omega: float, J: float, kappa: float) -> np.ndarray:
    """Time derivative of the normalized Bloch vector m = <S>/S."""
    mx, my, mz = m
    return np.array(
        [
            -4.0 * J * my * mz + kappa * mx * mz,
            -omega * mz + 4.0 * J * mx * mz + kappa * my * mz,
            omega * my - kappa * (mx * mx + my * my),
        ]
    )


def mean_field_critical_drive(J: float, kappa: float) -> float:
    """Drive strength separating the stationary and oscillatory phases."""
    return float(np.sqrt(16.0 * J * J + kappa * kappa))


def mean_field_fixed_point(omega: float, J: float, kappa: float) -> np.ndarray:
    """Stable stationary Bloch vector for omega below the critical drive."""
    oc2 = 16.0 * J * J + kappa * kappa
    if omega * omega > oc2:
        raise ModelError("no stationary state above the critical drive")
    mx = 4.0 * J * omega / oc2
    my = kappa * omega / oc2
    mz = -np.sqrt(max(1.0 - omega * omega / oc2, 0.0))
    return np.array([mx, my, mz])


def integrate_mean_field(
    m0: np.ndarray,
    omega: float,
    J: float,
    kappa: float,
    t_final: float,
    *,
    n_samples: int = 201,
    rtol: float = 1e-10,
    atol: float = 1e-12,
) -> tuple[np.ndarray, np.ndarray]:
    """Integrate the mean-field Bloch equations; returns (times, m[t])."""
    times = np.linspace(0.0, t_final, n_samples)
    sol = solve_ivp(
        lambda _t, m: mean_field_rhs(m, omega, J, kappa),
        (0.0, t_final),
        np.asarray(m0, dtype=float),
        t_eval=times,
        rtol=rtol,
        atol=atol,
        method="DOP853",
    )
    if not sol.success:
        raise ModelError(f"mean-field integration failed: {sol.message}")
    return times, sol.y.T

"""Periodic hypercubic lattice geometry and power-law coupling matrices.

Sites live on a d-dimensional periodic lattice with extents ``dims``;
coordinates run over {1..L_p} per axis and are linearized row-major.
Distances use the minimum-image convention, with the on-site distance
treated as infinite so that there is no self-interaction at finite
power-law exponent.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from functools import cached_property

import numpy as np


class LatticeError(ValueError):
    pass


@dataclass(frozen=True)
class LatticeGeometry:
    """Periodic hypercubic lattice with row-major site indexing."""

    dims: tuple[int, ...]

    def __post_init__(self):
        dims = tuple(int(L) for L in self.dims)
        if len(dims) == 0 or any(L < 1 for L in dims):
            raise LatticeError(f"invalid lattice dims {self.dims!r}")
        object.__setattr__(self, "dims", dims)

    @property
    def ndim(self) -> int:
        return len(self.dims)

    @property
    def n_sites(self) -> int:
        return int(np.prod(self.dims))

    def coords(self, i: int) -> tuple[int, ...]:
        """Coordinates (1-based) of linear site index ``i``."""
        self._check_index(i)
        c = np.unravel_index(i, self.dims)
        return tuple(int(x) + 1 for x in c)

    def index(self, coords: tuple[int, ...]) -> int:
        """Linear index of 1-based coordinates."""
        if len(coords) != self.ndim:
            raise LatticeError(f"expected {self.ndim} coordinates, got {coords!r}")
        zero_based = tuple(int(c) - 1 for c in coords)
        for c, L in zip(zero_based, self.dims):
            if not 0 <= c < L:
                raise LatticeError(f"coordinate {coords!r} outside lattice {self.dims}")
        return int(np.ravel_multi_index(zero_based, self.dims))

    def _check_index(self, i: int):
        if not 0 <= i < self.n_sites:
            raise LatticeError(f"site index {i} out of range [0, {self.n_sites})")

    @cached_property
    def displacement_distances(self) -> np.ndarray:
        """Minimum-image distance for every displacement, shaped ``dims``.

        Entry at displacement (m_1, .., m_d) is the distance between any
        site and the site shifted by m; the zero displacement holds inf.
        """
        axes = []
        for L in self.dims:
            m = np.arange(L)
            axes.append(np.minimum(m, L - m) ** 2)
        sq = np.zeros(self.dims)
        for p, a in enumerate(axes):
            shape = [1] * self.ndim
            shape[p] = self.dims[p]
            sq = sq + a.reshape(shape)
        dist = np.sqrt(sq)
        dist[(0,) * self.ndim] = np.inf
        return dist

    @cached_property
    def distance_table(self) -> np.ndarray:
        """Dense N x N minimum-image distance table (inf on the diagonal)."""
        N = self.n_sites
        coords = np.stack(np.unravel_index(np.arange(N), self.dims), axis=-1)
        disp = (coords[None, :, :] - coords[:, None, :]) % np.array(self.dims)
        flat = np.ravel_multi_index(tuple(disp[..., p] for p in range(self.ndim)), self.dims)
        return self.displacement_distances.reshape(-1)[flat].reshape(N, N)


@dataclass(frozen=True)
class CouplingMatrix:
    """Pairwise ZZ coupling amplitudes with Kac normalization."""

    entries: np.ndarray
    kac: float

    def __post_init__(self):
        e = np.asarray(self.entries, dtype=float)
        if e.ndim != 2 or e.shape[0] != e.shape[1]:
            raise LatticeError("coupling entries must be a square matrix")
        object.__setattr__(self, "entries", e)
        e.setflags(write=False)


def pairwise_distance(geometry: LatticeGeometry, i: int, j: int) -> float:
    """Minimum-image Euclidean distance between sites; inf for i == j."""
    geometry._check_index(i)
    geometry._check_index(j)
    return float(geometry.distance_table[i, j])


def kac_normalization(geometry: LatticeGeometry, alpha: float) -> float:
    """Size rescaling (1/N) sum_{i != j} d_ij^(-alpha) of the couplings.

    The i == j term is excluded for every alpha, including alpha = 0,
    which keeps the normalization continuous in alpha (the on-site term
    would only add a constant energy shift).
    """
    if alpha < 0:
        raise LatticeError(f"alpha must be nonnegative, got {alpha}")
    N = geometry.n_sites
    if N < 2:
        raise LatticeError("Kac normalization undefined for a single-site lattice")
    d = geometry.displacement_distances
    with np.errstate(divide="ignore"):
        w = d ** (-float(alpha))
    w[(0,) * geometry.ndim] = 0.0  # no self-interaction, even at alpha = 0
    # the displacement table holds one row of the distance matrix
    return float(np.sum(w))


def displacement_couplings(geometry: LatticeGeometry, alpha: float, J: float, s: float) -> np.ndarray:
    """Coupling amplitude per displacement, shaped ``dims`` (0 at zero shift)."""
    kac = kac_normalization(geometry, alpha)
    d = geometry.displacement_distances
    with np.errstate(divide="ignore"):
        g = 2.0 * s * J / (kac * d ** float(alpha))
    g[(0,) * geometry.ndim] = 0.0
    return g


def coupling_matrix(geometry: LatticeGeometry, alpha: float, J: float, s: float) -> CouplingMatrix:
    """Dense coupling matrix 2 s J / (kac * d_ij^alpha), zero diagonal."""
    kac = kac_normalization(geometry, alpha)
    N = geometry.n_sites
    coords = np.stack(np.unravel_index(np.arange(N), geometry.dims), axis=-1)
    disp = (coords[None, :, :] - coords[:, None, :]) % np.array(geometry.dims)
    flat = np.ravel_multi_index(tuple(disp[..., p] for p in range(geometry.ndim)), geometry.dims)
    g = displacement_couplings(geometry, alpha, J, s).reshape(-1)[flat].reshape(N, N)
    return CouplingMatrix(entries=g, kac=kac)

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from spintraj.lattice import (
    LatticeError,
    LatticeGeometry,
    coupling_matrix,
    kac_normalization,
    pairwise_distance,
)


class TestGeometry:
    def test_index_roundtrip_1d(self):
        g = LatticeGeometry((8,))
        for i in range(8):
            assert g.index(g.coords(i)) == i
        assert g.coords(0) == (1,)
        assert g.coords(7) == (8,)

    def test_index_roundtrip_2d_row_major(self):
        g = LatticeGeometry((4, 4))
        assert g.n_sites == 16
        assert g.index((1, 1)) == 0
        assert g.index((1, 2)) == 1
        assert g.index((2, 1)) == 4
        for i in range(16):
            assert g.index(g.coords(i)) == i

    def test_invalid(self):
        with pytest.raises(LatticeError):
            LatticeGeometry((0,))
        g = LatticeGeometry((4,))
        with pytest.raises(LatticeError):
            g.coords(4)
        with pytest.raises(LatticeError):
            g.index((5,))
        with pytest.raises(LatticeError):
            g.index((1, 1))


class TestDistances:
    def test_minimum_image_1d(self):
        g = LatticeGeometry((8,))
        # sites 1 and 6 (0-based) are 5 apart directly, 3 around the ring
        assert pairwise_distance(g, 1, 6) == 3.0
        assert pairwise_distance(g, 0, 4) == 4.0
        assert pairwise_distance(g, 0, 1) == 1.0

    def test_minimum_image_2d(self):
        g = LatticeGeometry((4, 4))
        i = g.index((1, 1))
        j = g.index((3, 3))
        assert pairwise_distance(g, i, j) == pytest.approx(2.0 * np.sqrt(2.0), abs=1e-14)
        # wrap: (1,1) to (4,4) is one step diagonally through the boundary
        k = g.index((4, 4))
        assert pairwise_distance(g, i, k) == pytest.approx(np.sqrt(2.0), abs=1e-14)

    def test_diagonal_is_inf(self):
        g = LatticeGeometry((3, 3))
        d = g.distance_table
        assert np.all(np.isinf(np.diag(d)))
        off = d[~np.eye(9, dtype=bool)]
        assert np.all(np.isfinite(off)) and np.all(off > 0)

    def test_symmetry_and_translation_invariance(self):
        g = LatticeGeometry((5, 3))
        d = g.distance_table
        assert np.array_equal(d, d.T)
        # translation invariance: distance depends only on coordinate offset
        N = g.n_sites
        for i in range(N):
            ci = np.array(g.coords(i))
            for j in range(N):
                cj = np.array(g.coords(j))
                shifted_i = g.index(tuple((ci % np.array(g.dims)) + 1))
                shifted_j = g.index(tuple((cj % np.array(g.dims)) + 1))
                assert d[i, j] == d[shifted_i, shifted_j]


class TestKac:
    def test_1d_l4_alpha1(self):
        # hand sum: each of 4 sites sees distances {1, 2, 1} -> row sum 2.5
        g = LatticeGeometry((4,))
        assert kac_normalization(g, 1.0) == pytest.approx(2.5, abs=1e-14)

    def test_alpha_zero_counts_pairs(self):
        for dims in [(4,), (8,), (3, 3)]:
            g = LatticeGeometry(dims)
            assert kac_normalization(g, 0.0) == pytest.approx(g.n_sites - 1, abs=1e-12)

    def test_large_alpha_nearest_neighbors(self):
        # alpha -> inf keeps only the two unit-distance neighbors on a ring
        g = LatticeGeometry((8,))
        assert kac_normalization(g, 50.0) == pytest.approx(2.0, abs=1e-12)

    def test_monotone_decreasing_in_alpha(self):
        g = LatticeGeometry((6, 6))
        vals = [kac_normalization(g, a) for a in (0.0, 0.5, 1.0, 2.0, 4.0)]
        assert all(a > b for a, b in zip(vals, vals[1:]))


class TestCouplingMatrix:
    def test_nearest_neighbor_value(self):
        # 1D L=4, alpha=1, J=1, s=1/2: G_nn = 2*s*J/(kac*1) = 1/2.5 = 0.4
        g = LatticeGeometry((4,))
        G = coupling_matrix(g, alpha=1.0, J=1.0, s=0.5)
        assert G.kac == pytest.approx(2.5, abs=1e-14)
        assert G.entries[0, 1] == pytest.approx(0.4, abs=1e-14)
        assert G.entries[0, 2] == pytest.approx(0.2, abs=1e-14)
        assert np.all(np.diag(G.entries) == 0.0)

    def test_alpha_zero_uniform(self):
        g = LatticeGeometry((2, 3))
        G = coupling_matrix(g, alpha=0.0, J=0.3, s=2.0)
        N = g.n_sites
        off = G.entries[~np.eye(N, dtype=bool)]
        expect = 2.0 * 2.0 * 0.3 / (N - 1)
        assert np.allclose(off, expect, atol=1e-14)

    def test_symmetric(self):
        g = LatticeGeometry((5,))
        G = coupling_matrix(g, alpha=1.3, J=0.7, s=1.5).entries
        assert np.allclose(G, G.T, atol=0)

    @given(
        J=st.floats(0.01, 5.0),
        s=st.floats(0.5, 32.0),
        alpha=st.floats(0.0, 3.0),
    )
    @settings(max_examples=25, deadline=None)
    def test_linear_in_J_and_s(self, J, s, alpha):
        g = LatticeGeometry((6,))
        base = coupling_matrix(g, alpha, 1.0, 1.0).entries
        scaled = coupling_matrix(g, alpha, J, s).entries
        assert np.allclose(scaled, J * s * base, rtol=1e-12, atol=0)

    def test_row_sums_match_displacement_sum(self):
        g = LatticeGeometry((4, 4))
        from spintraj.lattice import displacement_couplings

        G = coupling_matrix(g, 0.8, 1.2, 0.5).entries
        disp_sum = float(np.sum(displacement_couplings(g, 0.8, 1.2, 0.5)))
        assert np.allclose(G.sum(axis=1), disp_sum, rtol=1e-12)

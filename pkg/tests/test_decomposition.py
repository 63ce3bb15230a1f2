import warnings

import numpy as np
import pytest

from msgfem.decomposition import (
    build_decomposition,
    build_partition_of_unity,
    max_gradient,
    single_subdomain,
)
from msgfem.fem import build_mesh


@pytest.mark.parametrize(
    "dim,cells,counts,overlap,ell",
    [(2, 32, 4, 2, 2), (2, (24, 36), (2, 3), 1, 3), (2, 48, 4, 3, 1), (3, 12, 2, 1, 1), (3, (12, 8, 8), (3, 2, 2), 1, 2)],
)
def test_partition_of_unity_sums_to_one(dim, cells, counts, overlap, ell):
    mesh = build_mesh(dim, cells)
    with warnings.catch_warnings():
        warnings.simplefilter("ignore", UserWarning)
        dec = build_decomposition(mesh, counts, overlap, ell)
    pu = build_partition_of_unity(dec)
    assert np.abs(pu.sum_chi() - 1.0).max() <= 1e-12
    for s in dec:
        assert np.all(s.chi >= 0) and np.all(s.chi <= 1 + 1e-15)
        # chi vanishes outside omega
        inside = np.zeros(mesh.n_nodes, dtype=bool)
        inside[s.omega.nodes(mesh)] = True
        assert np.all(s.chi[~inside[s.star_nodes]] == 0)
        # zero-Dirichlet on inner boundary of omega: chi is zero on its faces that are interior
        assert 0.0 <= s.chi_ring.min() and s.chi_ring.max() <= 1.0
    assert np.all(pu.c_chi < np.inf)


def test_chi_gradient_bound_uses_overlap_width():
    mesh = build_mesh(2, 48)
    dec = build_decomposition(mesh, 4, 2, 2)
    pu = build_partition_of_unity(dec)
    s = dec[5]
    grad = max_gradient(mesh, s.star_nodes, s.chi, s.cells_omega)
    # linear ramp over 2*overlap cells from 0 to 1, per axis
    assert grad * s.overlap_width == pytest.approx(pu.c_chi[5])
    assert 1.0 <= pu.c_chi[5] <= np.sqrt(2) + 1e-12


def test_ring_geometry_and_cutoff():
    mesh = build_mesh(2, 48)
    dec = build_decomposition(mesh, 4, 2, 2)
    s = dec[5]  # interior
    assert not s.is_boundary and not s.ring_degenerate
    ring_star = set(s.cells_ring_star.tolist())
    assert set(s.cells_ring.tolist()) <= ring_star
    assert ring_star < set(s.cells_star.tolist())
    # chi_ring agrees with chi where eta vanishes, and vanishes where eta = 1
    assert np.array_equal(s.chi_ring[s.eta == 0], s.chi[s.eta == 0])
    assert np.all(s.chi_ring[s.eta == 1] == 0)
    # chi = 1 on omega_tilde, so the ring cutoff equals chi outside omega_tilde
    tilde_nodes = s.omega_tilde.nodes(mesh)
    pos = np.searchsorted(s.star_nodes, tilde_nodes)
    assert np.allclose(s.chi[pos], 1.0)


def test_boundary_flags_and_clipping():
    mesh = build_mesh(2, 48)
    dec = build_decomposition(mesh, 4, 2, 2)
    corner = dec[0]
    assert corner.is_boundary
    assert corner.omega_star.lo == (0, 0)
    assert corner.on_boundary_side[0, 0] and not corner.on_boundary_side[0, 1]
    assert dec.kappa == 4 and dec.kappa_star == 4


def test_degenerate_ring_policies():
    mesh = build_mesh(2, 16)
    with pytest.warns(UserWarning, match="degenerate"):
        build_decomposition(mesh, 4, 1, 1)
    with pytest.raises(ValueError, match="degenerate"):
        build_decomposition(mesh, 4, 1, 1, on_degenerate="error")
    dec = build_decomposition(mesh, 4, 1, 1, on_degenerate="ignore")
    assert any(s.ring_degenerate for s in dec)


@pytest.mark.parametrize(
    "counts,overlap,ell", [(3, 2, 2), (4, 3, 1), (4, 1, 0), (4, 0, 1)]
)
def test_invalid_decompositions(counts, overlap, ell):
    with pytest.raises(ValueError):
        build_decomposition(build_mesh(2, 16), counts, overlap, ell)


def test_single_subdomain_is_not_a_partition():
    mesh = build_mesh(3, 13)
    dec = single_subdomain(mesh, [3] * 3, [10] * 3, 1, 1)
    assert dec.M == 1 and not dec.partition_of_unity
    s = dec[0]
    assert not s.is_boundary and not s.ring_degenerate
    assert s.cells_ring_star.size < s.cells_star.size

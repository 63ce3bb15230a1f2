import numpy as np
import pytest
import scipy.sparse as sp
from hypothesis import given, settings
from hypothesis import strategies as st

from msgfem.coefficients import CoefficientField
from msgfem.fem import (
    SingularMatrixError,
    assemble_load,
    assemble_stiffness,
    build_fine_problem,
    build_mesh,
    element_stiffness,
    energy_norm,
    factorize,
    nested_dissection,
    read_matrix_market,
    read_vector_csv,
    write_matrix_market,
    write_vector_csv,
)
from oracles import dense_stiffness_oracle


@pytest.mark.parametrize("dim,cells,extent", [(2, (3, 4), (1.0, 2.0)), (2, 5, 1.0), (3, (2, 3, 2), (1.0, 0.5, 2.0))])
def test_stiffness_matches_dense_oracle(dim, cells, extent, rng):
    mesh = build_mesh(dim, cells, extent=extent)
    values = 10.0 ** rng.uniform(0, 6, mesh.n_cells)
    K = assemble_stiffness(mesh, values).toarray()
    oracle = dense_stiffness_oracle(mesh, values)
    assert np.abs(K - oracle).max() <= 1e-12 * np.abs(oracle).max()


@settings(max_examples=30, deadline=None)
@given(
    st.lists(st.floats(0.05, 20.0), min_size=2, max_size=3),
)
def test_element_stiffness_symmetric_with_constant_kernel(h):
    ke = element_stiffness(h)
    assert np.allclose(ke, ke.T, atol=0)
    assert np.abs(ke.sum(axis=1)).max() <= 1e-12 * np.abs(ke).max()
    assert np.linalg.eigvalsh(ke).min() > -1e-12 * np.abs(ke).max()
    assert np.linalg.matrix_rank(ke, tol=1e-10 * np.abs(ke).max()) == 2 ** len(h) - 1


def _linear(a, b):
    return lambda x: a + x @ b


@pytest.mark.parametrize("dim", [2, 3])
def test_patch_test_constant_coefficient(dim, rng):
    mesh = build_mesh(dim, [5, 4, 3][:dim], extent=[1.0, 1.5, 0.7][:dim])
    a, b = rng.standard_normal(), rng.standard_normal(dim)
    g = _linear(a, b)
    prob = build_fine_problem(mesh, 3.7, f=0.0, g=g)
    u = prob.solve()
    assert np.abs(u - g(mesh.node_coordinates())).max() <= 1e-10


def test_patch_test_layered_coefficient(rng):
    """A linear field along x is exact for any coefficient depending on y only."""
    mesh = build_mesh(2, (6, 7))
    layer = 10.0 ** rng.uniform(0, 6, mesh.cells_per_axis[1])
    values = np.repeat(layer, mesh.cells_per_axis[0])  # x varies fastest
    g = _linear(0.3, np.array([2.0, 0.0]))
    prob = build_fine_problem(mesh, CoefficientField(mesh, values), f=0.0, g=g)
    err = np.abs(prob.solve() - g(mesh.node_coordinates())).max()
    assert err <= 1e-10


def test_load_vector_integrates_constants():
    mesh = build_mesh(2, (4, 3), extent=(2.0, 3.0))
    assert np.isclose(assemble_load(mesh, 1.0).sum(), 6.0)
    nodal = np.full(mesh.n_nodes, 2.0)
    assert np.isclose(assemble_load(mesh, nodal).sum(), 12.0)
    with pytest.raises(ValueError):
        assemble_load(mesh, np.ones(7))


def test_energy_norm_rejects_indefinite():
    K = sp.diags([1.0, -1.0]).tocsr()
    assert energy_norm(K, np.array([1.0, 0.0])) == pytest.approx(1.0)
    with pytest.raises(ValueError):
        energy_norm(K, np.array([0.0, 1.0]))


@pytest.mark.parametrize("dim,cells", [(2, 17), (3, 7)])
def test_nested_dissection_permutation_and_solve(dim, cells, rng):
    mesh = build_mesh(dim, cells)
    prob = build_fine_problem(mesh, 10.0 ** rng.uniform(0, 3, mesh.n_cells))
    idx = prob.dofmap.interior_dofs
    perm = nested_dissection(mesh.node_multi_index()[idx])
    assert np.array_equal(np.sort(perm), np.arange(idx.size))
    b = rng.standard_normal(idx.size)
    x = factorize(prob.K0, symmetric=True, permutation=perm).solve(b)
    assert np.linalg.norm(prob.K0 @ x - b) <= 1e-10 * np.linalg.norm(b)
    nd = factorize(prob.K0, symmetric=True, permutation=perm)
    natural = factorize(prob.K0, ordering="NATURAL", symmetric=True)
    assert nd.nnz_per_row < natural.nnz_per_row


def test_singular_matrix_reported():
    K = sp.diags([1.0, 0.0, 2.0]).tocsc()  # exact zero pivot
    with pytest.raises(SingularMatrixError):
        factorize(K, symmetric=True)


def test_io_round_trips(tmp_path, rng):
    v = rng.standard_normal(11)
    write_vector_csv(tmp_path / "v.csv", v)
    assert np.array_equal(read_vector_csv(tmp_path / "v.csv"), v)
    M = sp.random(6, 6, density=0.4, random_state=1, format="csr")
    write_matrix_market(tmp_path / "m.mtx", M)
    assert abs(read_matrix_market(tmp_path / "m.mtx") - M).max() == 0


def test_mesh_validation():
    with pytest.raises(ValueError):
        build_mesh(4, 2)
    with pytest.raises(ValueError):
        build_mesh(2, 0)
    mesh = build_mesh(3, (2, 3, 4))
    assert mesh.n_nodes == 3 * 4 * 5 and mesh.n_cells == 24
    assert mesh.boundary_node_mask.sum() == mesh.n_nodes - 1 * 2 * 3

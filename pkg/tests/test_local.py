import warnings

import numpy as np
import pytest
import scipy.sparse as sp

from msgfem.coefficients import CoefficientField
from msgfem.decomposition import build_decomposition, build_partition_of_unity
from msgfem.eigensolver import block_lanczos
from msgfem.fem import assemble_stiffness, build_fine_problem, build_mesh
from msgfem.local import (
    FULL,
    RING,
    EigenOptions,
    eigensolve,
    harmonic_space,
    interior_node_mask,
    large_mode_count,
    mean_functional,
    solve_particular,
    tilde_extension,
    write_spectrum_csv,
)
from oracles import dense_stiffness_oracle

DENSE = EigenOptions(backend="dense")


def _rel(a, b):
    """Relative difference; the constant mode (zero eigenvalue) is compared absolutely."""
    scale = np.where(np.abs(b) < 1e-12, 1.0, np.abs(b))
    return np.abs(a - b) / scale


@pytest.mark.parametrize("variant", [FULL, RING])
@pytest.mark.parametrize("i", [0, 1, 5])
def test_saddle_matches_dense_oracle(small, variant, i):
    a = eigensolve(small.problem, small.dec, small.pu, i, 8, variant)
    b = eigensolve(small.problem, small.dec, small.pu, i, 8, variant, DENSE)
    assert a.constant_mode == (i == 5)
    assert _rel(a.eigenvalues, b.eigenvalues).max() <= 1e-8
    # eigenvectors agree up to sign for well separated eigenvalues
    gaps = np.diff(b.eigenvalues) / b.eigenvalues[1:]
    for k in range(7):
        if gaps[k] > 1e-3 and (k == 0 or gaps[k - 1] > 1e-3):
            assert np.abs(a.vectors[:, k] - b.vectors[:, k]).max() <= 1e-5 * np.abs(b.vectors[:, k]).max()


@pytest.mark.parametrize("variant", [FULL, RING])
def test_spectrum_properties(small, variant):
    res = eigensolve(small.problem, small.dec, small.pu, 6, 10, variant)
    lam = res.eigenvalues
    assert np.all(np.diff(lam) >= 0) and lam.min() >= -1e-10
    widths = [res.n_width(k) for k in range(1, 9)]
    assert np.all(np.diff(widths) <= 0)
    space = harmonic_space(small.problem, small.dec[6], variant)
    scale = abs(space.A).max() * np.abs(res.vectors).max()
    assert space.residual(res.vectors) <= 1e-9 * scale
    assert res.saddle_size == space.free.size + space.interior_pos.size


def test_ring_extension_consistency(small):
    sub = small.dec[6]
    res = eigensolve(small.problem, small.dec, small.pu, 6, 6, RING)
    ext = tilde_extension(small.problem, sub)
    solved = np.zeros(small.mesh.n_nodes, dtype=bool)
    solved[ext.nodes[ext.interior]] = True
    ring = np.zeros(small.mesh.n_nodes, dtype=bool)
    ring[res.free] = True
    keep = ring[sub.star_nodes] & ~solved[sub.star_nodes]
    pos = np.searchsorted(res.free, sub.star_nodes[keep])
    assert np.array_equal(res.extended[keep], res.vectors[pos])
    # the extension is harmonic on omega_tilde
    A = assemble_stiffness(small.mesh, small.coeff, sub.cells_tilde)
    full = np.zeros((small.mesh.n_nodes, res.n))
    full[sub.star_nodes] = res.extended
    resid = (A @ full)[ext.nodes[ext.interior]]
    assert np.abs(resid).max() <= 1e-9 * abs(A).max() * np.abs(full).max()


def test_harmonic_extension_is_energy_minimal(small, rng):
    """Extension energy never exceeds that of any competitor with the same trace."""
    for i in (0, 5, 10):
        sub = small.dec[i]
        ext = tilde_extension(small.problem, sub)
        A = assemble_stiffness(small.mesh, small.coeff, sub.cells_tilde)[ext.nodes][:, ext.nodes]
        for _ in range(4):
            trace = rng.standard_normal(ext.trace.size)
            u = ext(trace)
            energy = u @ (A @ u)
            for _ in range(5):
                w = u.copy()
                w[ext.interior] += rng.standard_normal(ext.interior.size) * rng.uniform(1e-3, 1)
                assert energy <= w @ (A @ w)


def test_degenerate_ring_falls_back_to_full():
    mesh = build_mesh(2, 16)
    prob = build_fine_problem(mesh, 10.0 ** np.random.default_rng(1).uniform(0, 2, mesh.n_cells))
    with warnings.catch_warnings():
        warnings.simplefilter("ignore", UserWarning)
        dec = build_decomposition(mesh, 4, 1, 1)
    i = next(s.index for s in dec if s.ring_degenerate)
    with pytest.warns(UserWarning, match="degenerate"):
        ring = eigensolve(prob, dec, None, i, 5, RING)
    full = eigensolve(prob, dec, None, i, 5, FULL)
    assert ring.fell_back and ring.variant == FULL
    assert _rel(ring.eigenvalues, full.eigenvalues).max() <= 1e-10


def test_requesting_more_than_dimension_warns():
    mesh = build_mesh(2, 12)
    prob = build_fine_problem(mesh, 1.0)
    dec = build_decomposition(mesh, 2, 1, 1)
    with pytest.warns(UserWarning, match="dimension"):
        res = eigensolve(prob, dec, None, 0, 500, RING)
    assert res.n == res.harmonic_dim


def test_mean_functional_against_dense_quadrature(rng):
    mesh = build_mesh(2, 8)
    coeff = CoefficientField(mesh, 10.0 ** rng.uniform(0, 3, mesh.n_cells))
    prob = build_fine_problem(mesh, coeff)
    dec = build_decomposition(mesh, 2, 1, 1)
    pu = build_partition_of_unity(dec)
    for i in range(dec.M):
        sub = dec[i]
        cell_mask = np.zeros(mesh.n_cells)
        cell_mask[sub.cells_omega] = coeff.values[sub.cells_omega]
        K = dense_stiffness_oracle(mesh, cell_mask)
        for variant, name in ((FULL, "chi"), (RING, "chi_ring")):
            mf = mean_functional(prob, pu, i, variant)
            chi = np.zeros(mesh.n_nodes)
            chi[sub.star_nodes] = getattr(sub, name)
            v = rng.standard_normal(mesh.n_nodes)
            expected = (chi * v) @ K @ chi / (chi @ K @ chi)
            assert mf(v[sub.star_nodes]) == pytest.approx(expected, rel=1e-12)
            assert mf(np.full(sub.star_nodes.size, 2.5)) == pytest.approx(2.5, rel=1e-12)


def test_particular_solves_local_problem(small):
    sub = small.dec[5]
    part = solve_particular(small.problem, small.dec, 5)
    inner = interior_node_mask(small.mesh, sub.cells_star)
    full = np.zeros(small.mesh.n_nodes)
    full[sub.star_nodes] = part.psi
    assert np.all(full[~inner] == 0)
    r = (small.problem.K @ full - small.problem.load)[inner]
    assert np.abs(r).max() <= 1e-10 * np.abs(small.problem.load).max()
    assert part.psi_boundary is None


def test_particular_boundary_part_carries_dirichlet_data():
    mesh = build_mesh(2, 24)
    prob = build_fine_problem(mesh, 1.0, f=0.0, g=lambda x: 1.0 + x[:, 0])
    dec = build_decomposition(mesh, 3, 1, 1)
    part = solve_particular(prob, dec, 0)
    bnd = mesh.boundary_node_mask[part.star_nodes]
    assert np.allclose(part.total[bnd], prob.dirichlet_values[part.star_nodes][bnd])


@pytest.mark.parametrize(
    "eigs,count",
    [
        ([0.0, 1.0, 2.0, 3.0], 0),
        ([0.0, 1e-7, 1e-6, 1.0, 2.0], 2),
        ([1e-8, 2.0, 3.0], 1),
        ([0.0], 0),
    ],
)
def test_large_mode_count(eigs, count):
    assert large_mode_count(np.array(eigs)) == count


def test_block_lanczos_generalized_problem(rng):
    n = 60
    A = sp.diags(np.arange(1.0, n + 1)).tocsr()
    M = sp.diags(rng.uniform(0.5, 2.0, n)).tocsr()
    Ainv = sp.diags(1.0 / A.diagonal())
    res = block_lanczos(lambda X: Ainv @ (M @ X), lambda X: A @ X, lambda X: M @ X, n, 5, block_size=3)
    expected = np.sort(A.diagonal() / M.diagonal())[:5]
    assert np.allclose(np.sort(1.0 / res.values), expected, rtol=1e-10)
    assert res.converged


def test_spectrum_csv_header_and_inf(small, tmp_path):
    res = eigensolve(small.problem, small.dec, small.pu, 5, 3, FULL)
    write_spectrum_csv(tmp_path / "s.csv", [res])
    lines = (tmp_path / "s.csv").read_text().splitlines()
    assert lines[0] == "subdomain,variant,k,lambda,inv_lambda"
    assert lines[1].startswith("5,full,1,0,inf")

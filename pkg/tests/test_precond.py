import csv
import math

import numpy as np
import pytest

from msgfem.fem import energy_norm
from msgfem.gfem import build_coarse_space, coarse_solve, relative_energy_error
from msgfem.local import FULL, RING, compute_spectra
from msgfem.precond import (
    build_preconditioner,
    coarse_exactness_defect,
    contraction_check,
    format_count,
    gmres,
    richardson,
    write_iteration_csv,
)


@pytest.fixture(scope="module", params=[FULL, RING])
def setup(request, small):
    variant = request.param
    spec = compute_spectra(small.problem, small.dec, small.pu, 6, variant)
    coarse = build_coarse_space(small.problem, small.dec, small.pu, spec, 4)
    B = build_preconditioner(small.problem, small.dec, small.pu, coarse)
    return small, coarse, B


def test_preconditioner_is_linear(setup, rng):
    _, _, B = setup
    x, y = rng.standard_normal((2, B.n))
    a, b = 1.7, -0.3
    lhs = B.apply(a * x + b * y)
    rhs = a * B.apply(x) + b * B.apply(y)
    assert np.abs(lhs - rhs).max() <= 1e-12 * np.abs(rhs).max()


def test_error_propagation_recurrence(setup, rng):
    """Richardson errors obey ``e^{j+1} = (I - BK) e^j``."""
    inst, _, B = setup
    prob = inst.problem
    u0 = rng.standard_normal(prob.dofmap.interior_dofs.size)
    rep = richardson(prob, B, tol=0.0, maxit=4, u0=u0, keep_iterates=True)
    exact = prob.solve()[prob.dofmap.interior_dofs] - prob.lift[prob.dofmap.interior_dofs]
    K = prob.K0
    for a, b in zip(rep.iterates[:-1], rep.iterates[1:]):
        e0, e1 = exact - a, exact - b
        predicted = e0 - B.apply(K @ e0)
        assert np.abs(e1 - predicted).max() <= 1e-8 * np.abs(e0).max()


def test_first_step_from_zero_is_the_gfem_solution(setup):
    inst, coarse, B = setup
    prob = inst.problem
    direct = coarse_solve(prob, coarse, inst.up).solution
    rep = richardson(prob, B, tol=0.0, maxit=1, keep_iterates=True)
    scale = energy_norm(prob.K, inst.reference)
    assert energy_norm(prob.K, prob.expand(rep.iterates[1]) - direct) <= 1e-9 * scale


def test_coarse_exactness(setup, rng):
    _, _, B = setup
    for _ in range(3):
        assert coarse_exactness_defect(B, rng.standard_normal(B.n)) <= 1e-12


def test_gmres_never_worse_than_richardson(setup):
    inst, _, B = setup
    r = richardson(inst.problem, B, tol=1e-10, maxit=60)
    g = gmres(inst.problem, B, tol=1e-10, maxit=60)
    steps = min(r.residuals.size, g.residuals.size)
    assert np.all(g.residuals[:steps] <= r.residuals[:steps] * (1 + 1e-8))
    assert g.iterations <= r.iterations
    assert relative_energy_error(inst.problem, g.solution, inst.reference) < 1e-6


def test_restarted_gmres_converges(setup):
    inst, _, B = setup
    g = gmres(inst.problem, B, tol=1e-8, maxit=200, restart=5)
    assert g.converged
    assert relative_energy_error(inst.problem, g.solution, inst.reference) < 1e-5


def test_contraction_matches_gfem_error(setup):
    inst, coarse, B = setup
    sol = coarse_solve(inst.problem, coarse, inst.up).solution
    check = contraction_check(inst.problem, B, sol, iterations=10)
    assert check.contractive and check.within_bound


def test_one_level_divergence_reported_as_inf(small):
    """Without a coarse space the additive Schwarz iteration is not a contraction."""
    B = build_preconditioner(small.problem, small.dec, small.pu, None)
    rep = richardson(small.problem, B, tol=1e-8, maxit=200)
    assert rep.iterations == math.inf and not rep.converged
    assert format_count(rep.iterations) == "inf"


def test_initial_guess_sizes(small):
    B = build_preconditioner(small.problem, small.dec, small.pu, None)
    with pytest.raises(ValueError, match="initial guess"):
        richardson(small.problem, B, maxit=1, u0=np.zeros(5))
    full = richardson(small.problem, B, tol=0.0, maxit=1, u0=small.reference)
    assert full.residuals[0] <= 1e-10 * np.linalg.norm(small.problem.f0)


def test_iteration_csv(tmp_path):
    table = np.array([[12.0, 7.0], [math.inf, 9.0]])
    write_iteration_csv(tmp_path / "it.csv", [1.0, 1e6], [1, 2], table)
    rows = list(csv.reader(open(tmp_path / "it.csv")))
    assert rows == [["contrast", "n=1", "n=2"], ["1", "12", "7"], ["1e+06", "inf", "9"]]

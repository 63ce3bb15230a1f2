"""Two-level hybrid restricted additive Schwarz preconditioner and iterative drivers.

All vectors handled here live on the interior fine dofs unless a function
says otherwise. The one-level part sums weighted zero-Dirichlet solves on
the oversampling domains; the coarse part is the Galerkin correction on the
GFEM space:

    B = S1 + R_S^T K_S^{-1} R_S (I - K S1),    S1 = sum_i R_i^T chi_i K_i^{-1} R_i.
"""

from __future__ import annotations

import csv
import math
import time
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from pathlib import Path
from typing import Sequence

import numpy as np
import scipy.sparse as sp

from .decomposition import Decomposition, PartitionOfUnity
from .fem import Factorization, FineProblem, SingularMatrixError, energy_norm, factorize
from .gfem import CoarseSpace
from .local import interior_node_mask


class LocalFactorizationError(RuntimeError):
    def __init__(self, subdomain: int, cause: Exception):
        super().__init__(f"local factorization failed on subdomain {subdomain}: {cause}")
        self.subdomain = subdomain


@dataclass
class LocalBlock:
    subdomain: int
    dofs: np.ndarray  # positions among the interior fine dofs
    weights: np.ndarray  # chi_i at those dofs
    factorization: Factorization


@dataclass
class Preconditioner:
    """Application of ``B`` to residual vectors on interior dofs."""

    K: sp.csr_matrix  # interior-interior fine stiffness
    blocks: list[LocalBlock]
    coarse: CoarseSpace | None
    jobs: int = 1
    applications: int = 0
    seconds: float = 0.0

    @property
    def n(self) -> int:
        return self.K.shape[0]

    def one_level(self, r: np.ndarray) -> np.ndarray:
        """``sum_i R_i^T chi_i K_i^{-1} R_i r``, summed in subdomain order."""

        def local(block: LocalBlock) -> np.ndarray:
            x = block.factorization.solve(r[block.dofs])
            return block.weights.reshape((-1,) + (1,) * (x.ndim - 1)) * x

        if self.jobs > 1 and len(self.blocks) > 1:
            with ThreadPoolExecutor(max_workers=self.jobs) as pool:
                parts = list(pool.map(local, self.blocks))
        else:
            parts = [local(b) for b in self.blocks]
        z = np.zeros_like(r, dtype=float)
        for block, part in zip(self.blocks, parts):
            z[block.dofs] += part
        return z

    def coarse_correction(self, r: np.ndarray) -> np.ndarray:
        if self.coarse is None or self.coarse.dim == 0:
            return np.zeros_like(r, dtype=float)
        return self.coarse.correct(r)

    def apply(self, r: np.ndarray) -> np.ndarray:
        t0 = time.perf_counter()
        r = np.asarray(r, dtype=float)
        z1 = self.one_level(r)
        z = z1 + self.coarse_correction(r - self.K @ z1)
        self.applications += 1 if r.ndim == 1 else r.shape[1]
        self.seconds += time.perf_counter() - t0
        return z

    __call__ = apply

    def dense(self) -> np.ndarray:
        """``B`` as a dense matrix (small problems only)."""
        return self.apply(np.eye(self.n))


def build_preconditioner(
    problem: FineProblem,
    decomposition: Decomposition,
    pu: PartitionOfUnity | None,
    coarse: CoarseSpace | None,
    jobs: int = 1,
    ordering: str = "MMD_AT_PLUS_A",
) -> Preconditioner:
    """Factorize every ``K_i`` on the interior nodes of ``omega_star_i``."""
    mesh = problem.mesh
    reduced = problem.dofmap.reduced_index
    blocks = []
    for sub in decomposition:
        nodes = np.flatnonzero(interior_node_mask(mesh, sub.cells_star))
        dofs = reduced[nodes]
        pos = np.searchsorted(sub.star_nodes, nodes)
        weights = sub.chi[pos]
        try:
            fact = factorize(problem.K0[dofs][:, dofs], ordering=ordering, symmetric=True)
        except SingularMatrixError as exc:
            raise LocalFactorizationError(sub.index, exc) from exc
        blocks.append(LocalBlock(sub.index, dofs, weights, fact))
    return Preconditioner(problem.K0, blocks, coarse, jobs=jobs)


# ----------------------------------------------------------------------------
# Iterative solvers
# ----------------------------------------------------------------------------


@dataclass
class SolveReport:
    """Outcome of one Richardson or GMRES run.

    ``residuals[j]`` is the Euclidean norm of ``B (f - K u^j)``;
    ``iterations`` is ``math.inf`` when the tolerance was not met.
    """

    method: str
    solution: np.ndarray  # full nodal vector
    iterations: float
    residuals: np.ndarray
    energy_errors: np.ndarray | None
    converged: bool
    diverged: bool
    seconds: float
    iterates: list[np.ndarray] = field(default_factory=list, repr=False)

    @property
    def relative_residuals(self) -> np.ndarray:
        r0 = self.residuals[0] if self.residuals.size else 1.0
        return self.residuals / r0 if r0 > 0 else np.zeros_like(self.residuals)

    @property
    def contraction_factors(self) -> np.ndarray:
        """``e_{j+1} / e_j`` from the energy-error history."""
        if self.energy_errors is None or self.energy_errors.size < 2:
            return np.zeros(0)
        e = self.energy_errors
        with np.errstate(divide="ignore", invalid="ignore"):
            return np.where(e[:-1] > 0, e[1:] / e[:-1], 0.0)


def _initial(problem: FineProblem, u0: np.ndarray | None) -> np.ndarray:
    """Interior part of the initial guess (boundary values come from ``g``)."""
    if u0 is None:
        return np.zeros(problem.dofmap.interior_dofs.size)
    u0 = np.asarray(u0, dtype=float)
    if u0.size == problem.mesh.n_nodes:
        return u0[problem.dofmap.interior_dofs] - problem.lift[problem.dofmap.interior_dofs]
    if u0.size == problem.dofmap.interior_dofs.size:
        return u0.copy()
    raise ValueError(f"initial guess has {u0.size} entries; expected nodal or interior size")


def _energy_tracker(problem: FineProblem, reference: np.ndarray | None):
    if reference is None:
        return None
    ref = reference[problem.dofmap.interior_dofs] - problem.lift[problem.dofmap.interior_dofs]
    return lambda x: energy_norm(problem.K0, ref - x)


def richardson(
    problem: FineProblem,
    B: Preconditioner,
    tol: float = 1e-8,
    maxit: int = 1000,
    u0: np.ndarray | None = None,
    reference: np.ndarray | None = None,
    keep_iterates: bool = False,
    divergence_factor: float = 10.0,
) -> SolveReport:
    """``u^{j+1} = u^j + B (f - K u^j)`` until ``||B r_j|| <= tol ||B r_0||``."""
    t0 = time.perf_counter()
    K, f = problem.K0, problem.f0
    x = _initial(problem, u0)
    err = _energy_tracker(problem, reference)
    z = B.apply(f - K @ x)
    res = [float(np.linalg.norm(z))]
    errs = [err(x)] if err else None
    iterates = [x.copy()] if keep_iterates else []
    converged = res[0] == 0.0
    diverged = False
    j = 0
    while not converged and j < maxit:
        x = x + z
        j += 1
        z = B.apply(f - K @ x)
        res.append(float(np.linalg.norm(z)))
        if errs is not None:
            errs.append(err(x))
        if keep_iterates:
            iterates.append(x.copy())
        if res[-1] <= tol * res[0]:
            converged = True
        elif not np.isfinite(res[-1]) or res[-1] > divergence_factor * res[0]:
            diverged = True
            break
    return SolveReport(
        "richardson",
        problem.expand(x),
        float(j) if converged else math.inf,
        np.array(res),
        None if errs is None else np.array(errs),
        converged,
        diverged,
        time.perf_counter() - t0,
        iterates,
    )


def gmres(
    problem: FineProblem,
    B: Preconditioner,
    tol: float = 1e-8,
    maxit: int = 1000,
    u0: np.ndarray | None = None,
    reference: np.ndarray | None = None,
    restart: int | None = None,
) -> SolveReport:
    """Left-preconditioned GMRES on ``B K u = B f`` with modified Gram-Schmidt Arnoldi.

    Each step minimizes the Euclidean norm of ``B (f - K v)`` over the
    affine Krylov space. The recorded residuals are the values implied by
    the Givens-rotated least-squares problem, which equal the true
    preconditioned residual norms up to rounding. ``restart`` (default off)
    bounds the Krylov dimension.
    """
    t0 = time.perf_counter()
    K, f = problem.K0, problem.f0
    x = _initial(problem, u0)
    err = _energy_tracker(problem, reference)
    r = B.apply(f - K @ x)
    beta0 = float(np.linalg.norm(r))
    res = [beta0]
    errs = [err(x)] if err else None
    total = 0
    converged = beta0 == 0.0
    cycle = restart or maxit
    while not converged and total < maxit:
        beta = float(np.linalg.norm(r))
        m = min(cycle, maxit - total)
        V = np.zeros((r.size, m + 1))
        H = np.zeros((m + 1, m))
        cs, sn = np.zeros(m), np.zeros(m)
        g = np.zeros(m + 1)
        g[0] = beta
        V[:, 0] = r / beta
        k_used = 0
        for k in range(m):
            w = B.apply(K @ V[:, k])
            for i in range(k + 1):
                H[i, k] = V[:, i] @ w
                w = w - H[i, k] * V[:, i]
            H[k + 1, k] = np.linalg.norm(w)
            breakdown = H[k + 1, k] <= 1e-14 * max(np.abs(H[: k + 1, k]).max(), 1e-300)
            if not breakdown:
                V[:, k + 1] = w / H[k + 1, k]
            for i in range(k):
                a, b = H[i, k], H[i + 1, k]
                H[i, k] = cs[i] * a + sn[i] * b
                H[i + 1, k] = -sn[i] * a + cs[i] * b
            denom = math.hypot(H[k, k], H[k + 1, k])
            cs[k], sn[k] = (1.0, 0.0) if denom == 0 else (H[k, k] / denom, H[k + 1, k] / denom)
            H[k, k] = cs[k] * H[k, k] + sn[k] * H[k + 1, k]
            H[k + 1, k] = 0.0
            g[k + 1] = -sn[k] * g[k]
            g[k] = cs[k] * g[k]
            k_used = k + 1
            total += 1
            res.append(abs(float(g[k + 1])))
            if errs is not None or res[-1] <= tol * beta0 or breakdown:
                y = np.linalg.solve(np.triu(H[:k_used, :k_used]), g[:k_used])
                x_k = x + V[:, :k_used] @ y
                if errs is not None:
                    errs.append(err(x_k))
            if breakdown:
                # lucky termination: the Krylov space is invariant
                res[-1] = 0.0
                converged = True
                break
            if res[-1] <= tol * beta0:
                converged = True
                break
        y = np.linalg.solve(np.triu(H[:k_used, :k_used]), g[:k_used])
        x = x + V[:, :k_used] @ y
        if not converged:
            r = B.apply(f - K @ x)
    return SolveReport(
        "gmres",
        problem.expand(x),
        float(total) if converged else math.inf,
        np.array(res),
        None if errs is None else np.array(errs),
        converged,
        False,
        time.perf_counter() - t0,
    )


# ----------------------------------------------------------------------------
# Diagnostics
# ----------------------------------------------------------------------------


@dataclass
class ContractionCheck:
    theta_measured: float
    theta_bound: float
    factors: np.ndarray
    slack: float = 0.05

    @property
    def contractive(self) -> bool:
        return self.theta_measured < 1.0

    @property
    def within_bound(self) -> bool:
        return self.theta_measured <= self.theta_bound + self.slack


def contraction_check(
    problem: FineProblem,
    B: Preconditioner,
    gfem_solution: np.ndarray,
    iterations: int = 20,
    seed: int = 0,
    slack: float = 0.05,
) -> ContractionCheck:
    """Largest per-step energy contraction of Richardson vs the one-shot GFEM error.

    The iteration starts from a random interior vector. Steps whose error
    already sits at rounding level (below ``1e-12`` of the initial error)
    are ignored.
    """
    from .gfem import relative_energy_error

    reference = problem.solve()
    rng = np.random.default_rng(seed)
    u0 = rng.standard_normal(problem.dofmap.interior_dofs.size)
    rep = richardson(problem, B, tol=0.0, maxit=iterations, u0=u0, reference=reference)
    e = rep.energy_errors
    usable = e[:-1] > 1e-12 * e[0]
    factors = (e[1:] / np.where(e[:-1] > 0, e[:-1], 1.0))[usable]
    measured = float(factors.max()) if factors.size else 0.0
    bound = relative_energy_error(problem, gfem_solution, reference)
    return ContractionCheck(measured, bound, factors, slack)


def coarse_exactness_defect(B: Preconditioner, w: np.ndarray) -> float:
    """``||R_S K (w - B K w)|| / ||R_S K w||``: the coarse residual of ``(I - BK) w``.

    ``I - BK`` is ``(I - pi_S)(I - S1 K)`` with ``pi_S`` the energy projection
    onto the coarse space, so its range is energy-orthogonal to that space.
    """
    if B.coarse is None or B.coarse.dim == 0:
        return 0.0
    R = B.coarse.restriction
    d = w - B.apply(B.K @ w)
    ref = float(np.linalg.norm(R @ (B.K @ w)))
    return float(np.linalg.norm(R @ (B.K @ d))) / (ref if ref > 0 else 1.0)


# ----------------------------------------------------------------------------
# Output
# ----------------------------------------------------------------------------


def format_count(value: float) -> str:
    return "inf" if not math.isfinite(value) else str(int(value))


def write_iteration_csv(
    path: str | Path, contrasts: Sequence[float], ns: Sequence[int], table: np.ndarray
) -> None:
    """Rows = contrast, columns = n, cells = iteration count or ``inf``."""
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(["contrast"] + [f"n={n}" for n in ns])
        for c, row in zip(contrasts, table):
            w.writerow([f"{c:g}"] + [format_count(v) for v in row])


__all__ = [
    "ContractionCheck",
    "LocalBlock",
    "LocalFactorizationError",
    "Preconditioner",
    "SolveReport",
    "build_preconditioner",
    "coarse_exactness_defect",
    "contraction_check",
    "format_count",
    "gmres",
    "richardson",
    "write_iteration_csv",
]

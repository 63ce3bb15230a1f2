"""Per-subdomain computations: particular functions, harmonic spaces and
the local spectral problems of the full (``omega_star``) and ring
(``R_star``) variants.

Local problems reuse the global node numbering. A *domain* is a set of
fine cells; its stiffness is assembled over those cells only. A node of the
domain is *interior* when every mesh cell around it belongs to the domain
and it is not on the outer boundary; discrete harmonic functions on the
domain are those whose stiffness residual vanishes at interior nodes.
"""

from __future__ import annotations

import csv
import time
import warnings
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from pathlib import Path
from typing import Iterable, Sequence

import numpy as np
import scipy.linalg as sla
import scipy.sparse as sp

from .decomposition import Decomposition, PartitionOfUnity, Subdomain
from .eigensolver import block_lanczos
from .fem import (
    Factorization,
    FineProblem,
    Mesh,
    assemble_stiffness,
    factorize,
    nested_dissection,
)

FULL = "full"
RING = "ring"
VARIANTS = (FULL, RING)


# ----------------------------------------------------------------------------
# Domain helpers
# ----------------------------------------------------------------------------


def interior_node_mask(mesh: Mesh, cells: np.ndarray) -> np.ndarray:
    """Nodes surrounded by cells of the set and not on the outer boundary."""
    count = np.bincount(mesh.cell_nodes[cells].ravel(), minlength=mesh.n_nodes)
    return (count == mesh.node_cell_count) & (count > 0) & ~mesh.boundary_node_mask


@dataclass
class HarmonicSpace:
    """Discrete operator-harmonic functions on a cell domain.

    Vectors live on ``free`` nodes (domain nodes off the outer boundary;
    outer-boundary nodes carry homogeneous Dirichlet values). The space is
    parametrized by the values on ``free[boundary_pos]``, the domain's
    inner boundary.
    """

    subdomain: int
    tag: str
    cells: np.ndarray
    free: np.ndarray
    interior_pos: np.ndarray
    boundary_pos: np.ndarray
    dirichlet: np.ndarray  # domain nodes on the outer boundary
    A: sp.csr_matrix  # domain stiffness on free x free

    @property
    def dim(self) -> int:
        return int(self.boundary_pos.size)

    @property
    def has_dirichlet(self) -> bool:
        return self.dirichlet.size > 0

    def constraint(self) -> sp.csr_matrix:
        """Rows of the domain stiffness at interior nodes (``B v = 0``)."""
        return self.A[self.interior_pos]

    def extend(self, boundary_values: np.ndarray) -> np.ndarray:
        """Harmonic function on ``free`` with prescribed inner-boundary values."""
        bv = np.asarray(boundary_values, dtype=float)
        out = np.zeros((self.free.size,) + bv.shape[1:])
        out[self.boundary_pos] = bv
        if self.interior_pos.size:
            A_ii = self.A[self.interior_pos][:, self.interior_pos]
            A_ib = self.A[self.interior_pos][:, self.boundary_pos]
            out[self.interior_pos] = factorize(A_ii, symmetric=True).solve(-(A_ib @ bv))
        return out

    def residual(self, v: np.ndarray) -> float:
        """Max-norm of the harmonicity residual at interior nodes."""
        return float(np.max(np.abs(self.constraint() @ v), initial=0.0))


def harmonic_space(problem: FineProblem, sub: Subdomain, variant: str) -> HarmonicSpace:
    mesh = problem.mesh
    cells = sub.cells_star if variant == FULL else sub.cells_ring_star
    nodes = mesh.nodes_of_cells(cells)
    on_bnd = mesh.boundary_node_mask[nodes]
    free = nodes[~on_bnd]
    interior = interior_node_mask(mesh, cells)[free]
    A = assemble_stiffness(mesh, problem.coefficient, cells)[free][:, free].tocsr()
    return HarmonicSpace(
        subdomain=sub.index,
        tag="omega_star" if variant == FULL else "ring_star",
        cells=cells,
        free=free,
        interior_pos=np.flatnonzero(interior),
        boundary_pos=np.flatnonzero(~interior),
        dirichlet=nodes[on_bnd],
        A=A,
    )


def _on(nodes: np.ndarray, sub_nodes: np.ndarray, values: np.ndarray) -> np.ndarray:
    """Values of a vector given on ``sub_nodes`` at ``nodes`` (zero elsewhere)."""
    pos = np.searchsorted(sub_nodes, nodes)
    pos = np.clip(pos, 0, max(sub_nodes.size - 1, 0))
    hit = sub_nodes[pos] == nodes if sub_nodes.size else np.zeros(nodes.size, dtype=bool)
    out = np.zeros((nodes.size,) + values.shape[1:])
    out[hit] = values[pos[hit]]
    return out


def weight_on(sub: Subdomain, nodes: np.ndarray, name: str) -> np.ndarray:
    return _on(nodes, sub.star_nodes, getattr(sub, name))


# ----------------------------------------------------------------------------
# Particular functions
# ----------------------------------------------------------------------------


@dataclass
class LocalSolver:
    """Factorized zero-Dirichlet stiffness on the interior nodes of ``omega_star``."""

    subdomain: int
    nodes: np.ndarray  # global ids of the interior nodes of omega_star
    factorization: Factorization

    def solve(self, rhs: np.ndarray) -> np.ndarray:
        return self.factorization.solve(rhs)


def local_solver(problem: FineProblem, sub: Subdomain, ordering: str = "MMD_AT_PLUS_A") -> LocalSolver:
    nodes = np.flatnonzero(interior_node_mask(problem.mesh, sub.cells_star))
    K_i = problem.K[nodes][:, nodes]
    return LocalSolver(sub.index, nodes, factorize(K_i, ordering=ordering, symmetric=True))


@dataclass
class LocalParticular:
    """Local particular function on ``omega_star`` (values on ``star_nodes``)."""

    subdomain: int
    star_nodes: np.ndarray
    psi: np.ndarray
    psi_boundary: np.ndarray | None

    @property
    def total(self) -> np.ndarray:
        return self.psi if self.psi_boundary is None else self.psi + self.psi_boundary


def solve_particular(
    problem: FineProblem,
    decomposition: Decomposition,
    i: int,
    solver: LocalSolver | None = None,
) -> LocalParticular:
    """``psi_i``: zero-Dirichlet solve of the fine problem on ``omega_star_i``.

    For subdomains touching the outer boundary with nonzero data, also the
    harmonic ``psi_i^b``: it matches ``g`` on the outer-boundary nodes and has
    zero residual at every other node of ``omega_star_i`` (natural condition
    on the inner boundary).
    """
    sub = decomposition[i]
    mesh = problem.mesh
    solver = solver or local_solver(problem, sub)
    psi_nodes = solver.solve(problem.load[solver.nodes])
    star = sub.star_nodes
    psi = _on(star, solver.nodes, psi_nodes)

    psi_b = None
    if sub.is_boundary:
        bnd = star[mesh.boundary_node_mask[star]]
        g = problem.dirichlet_values[bnd]
        if np.any(g != 0):
            free = star[~mesh.boundary_node_mask[star]]
            A = assemble_stiffness(mesh, problem.coefficient, sub.cells_star)
            A_f = A[free]
            x = factorize(A_f[:, free], symmetric=True).solve(-(A_f[:, bnd] @ g))
            psi_b = _on(star, free, x) + _on(star, bnd, g)
    return LocalParticular(sub.index, star, psi, psi_b)


# ----------------------------------------------------------------------------
# Mean functional
# ----------------------------------------------------------------------------


@dataclass
class MeanFunctional:
    """``M(v) = a_omega(chi v, chi) / a_omega(chi, chi)`` as a weight vector."""

    variant: str
    nodes: np.ndarray
    weights: np.ndarray
    normalization: float

    def __call__(self, v_on_nodes: np.ndarray) -> np.ndarray:
        return self.weights @ v_on_nodes


def mean_functional(problem: FineProblem, pu: PartitionOfUnity, i: int, variant: str = RING) -> MeanFunctional:
    sub = pu.decomposition[i]
    name = "chi" if variant == FULL else "chi_ring"
    chi = getattr(sub, name)
    K = assemble_stiffness(problem.mesh, problem.coefficient, sub.cells_omega)
    K = K[sub.star_nodes][:, sub.star_nodes]
    Kchi = K @ chi
    denom = float(chi @ Kchi)
    if denom <= 0:
        raise ValueError(f"subdomain {i}: a(chi, chi) = {denom}; mean functional undefined")
    return MeanFunctional(variant, sub.star_nodes, chi * Kchi / denom, denom)


# ----------------------------------------------------------------------------
# Local spectral problems
# ----------------------------------------------------------------------------


@dataclass
class EigenOptions:
    backend: str = "saddle"  # "saddle" (sparse, shift-invert) or "dense" (Schur complement)
    tol: float = 1e-10
    maxiter: int = 500
    block_size: int = 8
    shift_factor: float = 1e-8
    seed: int = 0
    # "nested_dissection" (geometric, multipliers interleaved with their
    # nodes) or one of the SuperLU column orderings
    ordering: str = "nested_dissection"
    extend: bool = True


@dataclass
class LocalSpectralResult:
    """Eigenpairs of one local problem, ascending.

    For subdomains off the outer boundary the first pair is the constant
    mode with eigenvalue 0. ``vectors`` live on ``free`` nodes; ``extended``
    holds the basis on ``star_nodes`` (harmonic extension for the ring).
    """

    subdomain: int
    variant: str
    eigenvalues: np.ndarray
    vectors: np.ndarray
    free: np.ndarray
    star_nodes: np.ndarray
    extended: np.ndarray
    constant_mode: bool
    harmonic_dim: int
    residuals: np.ndarray = field(default_factory=lambda: np.zeros(0))
    iterations: int = 0
    factor_nnz_per_row: float | None = None
    saddle_size: int | None = None
    solve_seconds: float = 0.0
    fell_back: bool = False

    @property
    def n(self) -> int:
        return int(self.eigenvalues.size)

    def n_width(self, k: int) -> float:
        """``d_k = lambda_{k+1}^{-1/2}`` with 1-based ``k`` (0 when unavailable as infinity)."""
        lam = self.eigenvalues[k] if k < self.n else np.inf
        return float(lam ** -0.5) if lam > 0 else np.inf


def _normalize_signs(V: np.ndarray) -> np.ndarray:
    if V.size == 0:
        return V
    idx = np.argmax(np.abs(V), axis=0)
    signs = np.sign(V[idx, np.arange(V.shape[1])])
    signs[signs == 0] = 1.0
    return V * signs


def _rhs_form(problem: FineProblem, sub: Subdomain, space: HarmonicSpace, variant: str) -> sp.csr_matrix:
    """``a_omega(I_h(chi u), I_h(chi v))`` on the free nodes of the space."""
    weight = weight_on(sub, space.free, "chi" if variant == FULL else "chi_ring")
    K = assemble_stiffness(problem.mesh, problem.coefficient, sub.cells_omega)
    K = K[space.free][:, space.free]
    X = sp.diags(weight)
    return (X @ K @ X).tocsr()


def saddle_permutation(mesh: Mesh, space: HarmonicSpace) -> np.ndarray:
    """Nested-dissection order of the free nodes, each multiplier right after its node.

    Keeping a multiplier next to the node whose harmonicity row it enforces
    lets the factorization pivot on the diagonal 2x2 pattern without
    destroying the fill-reducing node order.
    """
    nf = space.free.size
    order = nested_dissection(mesh.node_multi_index()[space.free])
    mult = np.full(nf, -1, dtype=np.int64)
    mult[space.interior_pos] = nf + np.arange(space.interior_pos.size)
    paired = np.stack([order, mult[order]], axis=1).ravel()
    return paired[paired >= 0]


def _harmonizer(mesh: Mesh, space: HarmonicSpace):
    """Map to the harmonic function with the same inner-boundary values."""
    ip, bp = space.interior_pos, space.boundary_pos
    if ip.size == 0:
        return lambda X: X
    perm = nested_dissection(mesh.node_multi_index()[space.free[ip]])
    A_ii = factorize(space.A[ip][:, ip], symmetric=True, permutation=perm)
    A_ib = space.A[ip][:, bp].tocsr()

    def apply(X):
        X = np.array(X, dtype=float, copy=True)
        X[ip] = A_ii.solve(-(A_ib @ X[bp]))
        return X

    return apply


def saddle_point_matrix(A: sp.spmatrix, M: sp.spmatrix, B: sp.spmatrix, sigma: float) -> sp.csc_matrix:
    """``[[A - sigma M, B^T], [B, 0]]``."""
    return sp.bmat([[A - sigma * M, B.T], [B, None]], format="csc")


def _dense_eigs(A: sp.spmatrix, M: sp.spmatrix, space: HarmonicSpace, nev: int):
    """Dense oracle: eliminate interior nodes, solve the generalized EVP."""
    ip, bp = space.interior_pos, space.boundary_pos
    Ad = A.toarray()
    P = np.zeros((space.free.size, bp.size))
    P[bp] = np.eye(bp.size)
    if ip.size:
        P[ip] = -sla.solve(Ad[np.ix_(ip, ip)], Ad[np.ix_(ip, bp)], assume_a="pos")
    S = P.T @ Ad @ P
    Mr = P.T @ M.toarray() @ P
    S, Mr = 0.5 * (S + S.T), 0.5 * (Mr + Mr.T)
    # Jacobi scaling leaves the pencil's eigenvalues unchanged but keeps the
    # Cholesky inside eigh accurate when the coefficient contrast is high
    d = np.sqrt(np.diag(S))
    d[d == 0] = 1.0
    S, Mr = S / d[:, None] / d[None, :], Mr / d[:, None] / d[None, :]
    P = P / d[None, :]
    k = min(nev, bp.size)
    try:
        vals, Y = sla.eigh(S, Mr, subset_by_index=[0, k - 1])
    except np.linalg.LinAlgError:
        # Mr is only semidefinite when the weight vanishes on part of the
        # inner boundary; solve the reciprocal problem with a mild shift.
        sigma = -1e-3 * np.trace(S) / max(np.trace(Mr), np.finfo(float).tiny)
        theta, Y = sla.eigh(Mr, S - sigma * Mr, subset_by_index=[bp.size - k, bp.size - 1])
        theta, Y = theta[::-1], Y[:, ::-1]
        with np.errstate(divide="ignore"):
            vals = np.where(theta > 0, sigma + 1.0 / np.where(theta > 0, theta, 1.0), np.inf)
    return vals, P @ Y


def _rayleigh_ritz(A, M, V, lam, fallback):
    """Polish Ritz pairs on exactly harmonic vectors.

    The shift-inverted saddle solves lose a few digits at high contrast;
    the Rayleigh quotient on the re-harmonized vectors recovers them since
    its error is quadratic in the vector error.
    """
    Ar = V.T @ (A @ V)
    Mr = V.T @ (M @ V)
    try:
        vals, Y = sla.eigh(0.5 * (Ar + Ar.T), 0.5 * (Mr + Mr.T))
    except np.linalg.LinAlgError:
        return lam, fallback
    return vals, V @ Y


def eigensolve(
    problem: FineProblem,
    decomposition: Decomposition,
    pu: PartitionOfUnity | None,
    i: int,
    n: int,
    variant: str = FULL,
    options: EigenOptions | None = None,
) -> LocalSpectralResult:
    """First ``n`` eigenpairs of the full or ring local problem.

    FULL: ``a_{omega*}(u, v) = lambda a_omega(chi u, chi v)`` over harmonic
    functions on ``omega*``. RING: ``a_{R*}(u, v) = lambda a_R(chi^R u,
    chi^R v)`` over harmonic functions on ``R*``, each eigenvector then
    extended harmonically into ``omega_tilde``. With the ``saddle`` backend
    the harmonicity constraint is imposed by Lagrange multipliers and the
    block Lanczos iteration runs on the shift-inverted operator; the constant
    mode of interior subdomains is known analytically and deflated.
    """
    if variant not in VARIANTS:
        raise ValueError(f"variant must be one of {VARIANTS}, got {variant!r}")
    opts = options or EigenOptions()
    sub = decomposition[i]
    fell_back = False
    if variant == RING and (sub.ring_degenerate or sub.ring_empty):
        warnings.warn(
            f"subdomain {i}: ring degenerate; using the full-subdomain eigenproblem", stacklevel=2
        )
        variant, fell_back = FULL, True

    t0 = time.perf_counter()
    space = harmonic_space(problem, sub, variant)
    A = space.A
    M = _rhs_form(problem, sub, space, variant)
    constant = not space.has_dirichlet
    dim = space.dim
    if n > dim:
        warnings.warn(
            f"subdomain {i}: requested {n} eigenpairs but the harmonic space has dimension {dim}",
            stacklevel=2,
        )
        n = dim

    residuals = np.zeros(0)
    iterations = 0
    nnz_row = None
    saddle_size = None
    if n == 0:
        vals, vecs = np.zeros(0), np.zeros((space.free.size, 0))
    elif opts.backend == "dense" or 2 * n > dim:
        # asking for most of the space: a Krylov method gains nothing and
        # block Lanczos may exhaust the space before all pairs converge
        vals, vecs = _dense_eigs(A, M, space, n)
    elif opts.backend == "saddle":
        trace_m = float(M.diagonal().sum())
        scale = float(A.diagonal().sum()) / trace_m if trace_m > 0 else 1.0
        sigma = -opts.shift_factor * scale
        B = space.constraint()
        S = saddle_point_matrix(A, M, B, sigma)
        if opts.ordering == "nested_dissection":
            perm = saddle_permutation(problem.mesh, space)
            fact = factorize(S, permutation=perm)
        else:
            fact = factorize(S, ordering=opts.ordering)
        nnz_row = fact.nnz_per_row
        saddle_size = S.shape[0]
        nf = space.free.size
        Ksig = (A - sigma * M).tocsr()

        def apply_op(X):
            rhs = np.zeros((S.shape[0], X.shape[1]))
            rhs[:nf] = M @ X
            return fact.solve(rhs)[:nf]

        project = None
        if constant:
            ones = np.ones(nf)
            m1 = M @ ones
            c11 = float(ones @ m1)

            def project(X):
                return X - np.outer(ones, (m1 @ X) / c11)

        harmonize = _harmonizer(problem.mesh, space)

        def restore(X):
            X = harmonize(X)
            return project(X) if project is not None else X

        want = n - 1 if constant else n
        if want > 0:
            res = block_lanczos(
                apply_op,
                lambda X: Ksig @ X,
                lambda X: M @ X,
                nf,
                want,
                block_size=opts.block_size,
                tol=opts.tol,
                maxiter=opts.maxiter,
                seed=opts.seed,
                project=project,
                restore=restore,
            )
            theta = res.values
            with np.errstate(divide="ignore"):
                lam = np.where(theta > 0, sigma + 1.0 / np.where(theta > 0, theta, 1.0), np.inf)
            vecs = res.vectors
            residuals, iterations = res.residuals, res.iterations
            lam, vecs = _rayleigh_ritz(A, M, restore(vecs), lam, vecs)
        else:
            lam, vecs = np.zeros(0), np.zeros((nf, 0))
        if constant:
            lam = np.concatenate([[0.0], lam])
            vecs = np.hstack([np.ones((nf, 1)), vecs])
            residuals = np.concatenate([[0.0], residuals])
        order = np.argsort(lam, kind="stable")
        vals, vecs = lam[order], vecs[:, order]
    else:
        raise ValueError(f"unknown eigen backend {opts.backend!r}")

    # M-normalize and fix signs
    if vecs.shape[1]:
        mnorm = np.sqrt(np.maximum(np.einsum("ij,ij->j", vecs, M @ vecs), 0.0))
        mnorm[mnorm == 0] = 1.0
        vecs = _normalize_signs(vecs / mnorm)
    elapsed = time.perf_counter() - t0

    star = sub.star_nodes
    if variant == FULL or not opts.extend:
        extended = _on(star, space.free, vecs)
    else:
        extended = extend_ring_basis(problem, sub, space.free, vecs)
    return LocalSpectralResult(
        subdomain=i,
        variant=variant,
        eigenvalues=np.asarray(vals, dtype=float),
        vectors=vecs,
        free=space.free,
        star_nodes=star,
        extended=extended,
        constant_mode=constant,
        harmonic_dim=dim,
        residuals=residuals,
        iterations=iterations,
        factor_nnz_per_row=nnz_row,
        saddle_size=saddle_size,
        solve_seconds=elapsed,
        fell_back=fell_back,
    )


def eigensolve_full(problem, decomposition, pu, i, n, options=None) -> LocalSpectralResult:
    return eigensolve(problem, decomposition, pu, i, n, FULL, options)


def eigensolve_ring(problem, decomposition, pu, i, n, options=None) -> LocalSpectralResult:
    return eigensolve(problem, decomposition, pu, i, n, RING, options)


# ----------------------------------------------------------------------------
# Harmonic extension
# ----------------------------------------------------------------------------


@dataclass
class TildeExtension:
    """Harmonic extension operator into ``omega_tilde``."""

    nodes: np.ndarray  # all nodes of omega_tilde
    interior: np.ndarray  # positions within ``nodes`` that are solved for
    trace: np.ndarray  # positions within ``nodes`` carrying boundary data
    factorization: Factorization | None
    coupling: sp.csr_matrix | None

    def __call__(self, trace_values: np.ndarray) -> np.ndarray:
        tv = np.asarray(trace_values, dtype=float)
        out = np.zeros((self.nodes.size,) + tv.shape[1:])
        out[self.trace] = tv
        if self.interior.size:
            out[self.interior] = self.factorization.solve(-(self.coupling @ tv))
        return out


def tilde_extension(problem: FineProblem, sub: Subdomain) -> TildeExtension:
    mesh = problem.mesh
    cells = sub.cells_tilde
    nodes = mesh.nodes_of_cells(cells)
    inner = interior_node_mask(mesh, cells)[nodes]
    ip, tp = np.flatnonzero(inner), np.flatnonzero(~inner)
    if ip.size == 0:
        return TildeExtension(nodes, ip, tp, None, None)
    A = assemble_stiffness(mesh, problem.coefficient, cells)[nodes[ip]]
    perm = nested_dissection(mesh.node_multi_index()[nodes[ip]])
    return TildeExtension(
        nodes,
        ip,
        tp,
        factorize(A[:, nodes[ip]], symmetric=True, permutation=perm),
        A[:, nodes[tp]].tocsr(),
    )


def harmonic_extend(
    problem: FineProblem, decomposition: Decomposition, i: int, trace_values: np.ndarray
) -> tuple[np.ndarray, np.ndarray]:
    """Harmonic extension into ``omega_tilde_i`` of data on its boundary nodes.

    Returns ``(nodes, values)`` over all nodes of ``omega_tilde_i``; the
    trace must be ordered like ``nodes[ext.trace]`` of :func:`tilde_extension`.
    """
    ext = tilde_extension(problem, decomposition[i])
    return ext.nodes, ext(trace_values)


def extend_ring_basis(
    problem: FineProblem, sub: Subdomain, free: np.ndarray, vecs: np.ndarray
) -> np.ndarray:
    """``u^ext``: ring values on ``R_star`` outside ``omega_tilde``, harmonic inside."""
    star = sub.star_nodes
    out = _on(star, free, vecs)
    ext = tilde_extension(problem, sub)
    if ext.interior.size == 0:
        return out
    trace_nodes = ext.nodes[ext.trace]
    trace = _on(trace_nodes, free, vecs)
    values = ext(trace)
    pos = np.searchsorted(star, ext.nodes[ext.interior])
    out[pos] = values[ext.interior]
    return out


# ----------------------------------------------------------------------------
# Batch drivers and output
# ----------------------------------------------------------------------------


def _map(fn, items: Iterable, jobs: int):
    items = list(items)
    if jobs <= 1 or len(items) <= 1:
        return [fn(x) for x in items]
    with ThreadPoolExecutor(max_workers=jobs) as pool:
        return list(pool.map(fn, items))


def compute_spectra(
    problem: FineProblem,
    decomposition: Decomposition,
    pu: PartitionOfUnity | None,
    n: int | Sequence[int],
    variant: str,
    options: EigenOptions | None = None,
    jobs: int = 1,
) -> list[LocalSpectralResult]:
    """Eigenpairs for every subdomain, merged in subdomain order."""
    counts = np.broadcast_to(np.asarray(n), (decomposition.M,))
    return _map(
        lambda i: eigensolve(problem, decomposition, pu, i, int(counts[i]), variant, options),
        range(decomposition.M),
        jobs,
    )


def compute_particulars(
    problem: FineProblem, decomposition: Decomposition, jobs: int = 1
) -> list[LocalParticular]:
    return _map(lambda i: solve_particular(problem, decomposition, i), range(decomposition.M), jobs)


def large_mode_count(eigenvalues: np.ndarray, ratio: float = 100.0) -> int:
    """Number of reciprocal eigenvalues above the first gap of size ``ratio``.

    Reciprocals are sorted in descending order; the infinite reciprocal of a
    zero eigenvalue (constant mode) is skipped. Returns 0 when there is no
    consecutive ratio above ``ratio``.
    """
    lam = np.asarray(eigenvalues, dtype=float)
    lam = np.sort(lam[lam > 0])
    inv = 1.0 / lam
    for k in range(inv.size - 1):
        if inv[k] / inv[k + 1] > ratio:
            return k + 1
    return 0


def write_spectrum_csv(path: str | Path, results: Sequence[LocalSpectralResult]) -> None:
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(["subdomain", "variant", "k", "lambda", "inv_lambda"])
        for r in results:
            for k, lam in enumerate(r.eigenvalues, start=1):
                inv = "inf" if lam <= 0 else f"{1.0 / lam:.17g}"
                w.writerow([r.subdomain, r.variant, k, f"{lam:.17g}", inv])


__all__ = [
    "EigenOptions",
    "FULL",
    "HarmonicSpace",
    "LocalParticular",
    "LocalSolver",
    "LocalSpectralResult",
    "MeanFunctional",
    "RING",
    "TildeExtension",
    "VARIANTS",
    "compute_particulars",
    "compute_spectra",
    "eigensolve",
    "eigensolve_full",
    "eigensolve_ring",
    "extend_ring_basis",
    "harmonic_extend",
    "harmonic_space",
    "interior_node_mask",
    "large_mode_count",
    "local_solver",
    "mean_functional",
    "saddle_permutation",
    "saddle_point_matrix",
    "solve_particular",
    "tilde_extension",
    "weight_on",
    "write_spectrum_csv",
]

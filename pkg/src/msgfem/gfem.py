"""Global GFEM space, particular function, coarse Galerkin solve and error metrics."""

from __future__ import annotations

import csv
import math
import warnings
from dataclasses import dataclass, field
from pathlib import Path
from typing import Sequence

import numpy as np
import scipy.linalg as sla
import scipy.sparse as sp
from scipy.linalg import lapack

from .decomposition import Decomposition, PartitionOfUnity, Subdomain
from .fem import FineProblem, assemble_stiffness, energy_norm
from .local import FULL, LocalParticular, LocalSpectralResult, _map, _on, harmonic_space


class InsufficientEigenvectorsError(ValueError):
    pass


@dataclass(frozen=True)
class BasisInfo:
    subdomain: int
    eigenindex: int  # 1-based position in the subdomain's stored spectrum
    constant_mode: bool


@dataclass
class CoarseSpace:
    """Span of ``I_h(chi_i v)`` over local basis functions ``v``.

    ``prolongation`` (``R_S^T``) maps coarse coefficients to interior fine
    dofs. Columns found linearly dependent are removed and recorded in
    ``dropped``; ``info`` and ``prolongation`` only hold the kept columns.
    """

    prolongation: sp.csc_matrix
    info: list[BasisInfo]
    stiffness: np.ndarray  # K_S on the kept columns
    n_per_subdomain: np.ndarray
    dropped: list[BasisInfo] = field(default_factory=list)
    _cho: tuple | None = field(default=None, repr=False)

    @property
    def dim(self) -> int:
        return self.prolongation.shape[1]

    @property
    def restriction(self) -> sp.csr_matrix:
        return self.prolongation.T.tocsr()

    def solve(self, rhs: np.ndarray) -> np.ndarray:
        """``K_S^{-1} rhs`` (dense Cholesky, computed once)."""
        if self.dim == 0:
            return np.zeros((0,) + np.shape(rhs)[1:])
        if self._cho is None:
            self._cho = sla.cho_factor(self.stiffness, lower=True)
        return sla.cho_solve(self._cho, rhs)

    def correct(self, r: np.ndarray) -> np.ndarray:
        """``R_S^T K_S^{-1} R_S r`` on interior dofs."""
        return self.prolongation @ self.solve(self.restriction @ r)


def _subdomain_columns(
    problem: FineProblem, decomposition: Decomposition, res: LocalSpectralResult, n_i: int
) -> tuple[sp.coo_matrix, list[BasisInfo]]:
    sub = decomposition[res.subdomain]
    if res.n < n_i:
        raise InsufficientEigenvectorsError(
            f"subdomain {res.subdomain}: {n_i} basis functions requested but only "
            f"{res.n} eigenvectors computed"
        )
    reduced = problem.dofmap.reduced_index[sub.star_nodes]
    keep = (reduced >= 0) & (sub.chi != 0)
    block = sub.chi[keep, None] * res.extended[keep, :n_i]
    rows = np.repeat(reduced[keep], n_i)
    cols = np.tile(np.arange(n_i), int(keep.sum()))
    mat = sp.coo_matrix(
        (block.ravel(), (rows, cols)), shape=(problem.dofmap.interior_dofs.size, n_i)
    )
    info = [
        BasisInfo(res.subdomain, k + 1, bool(res.constant_mode and k == 0)) for k in range(n_i)
    ]
    return mat, info


def rank_revealing_selection(K_S: np.ndarray, tol: float = 1e-12) -> np.ndarray:
    """Indices of a maximal well-conditioned column subset of an SPSD matrix.

    Columns are scaled to unit diagonal, then pivoted Cholesky stops once
    the remaining pivots fall below ``tol``. Zero columns are always dropped.
    """
    d = np.diag(K_S).copy()
    nonzero = np.flatnonzero(d > tol * max(float(d.max(initial=0.0)), np.finfo(float).tiny))
    if nonzero.size == 0:
        return nonzero
    s = 1.0 / np.sqrt(d[nonzero])
    C = K_S[np.ix_(nonzero, nonzero)] * s[:, None] * s[None, :]
    C = np.asfortranarray(0.5 * (C + C.T))
    _, piv, rank, info = lapack.dpstrf(C, lower=1, tol=tol)
    if info < 0:
        raise RuntimeError(f"pivoted Cholesky failed (info={info})")
    return np.sort(nonzero[piv[:rank] - 1])


def build_coarse_space(
    problem: FineProblem,
    decomposition: Decomposition,
    pu: PartitionOfUnity | None,
    spectra: Sequence[LocalSpectralResult],
    n: int | Sequence[int],
    jobs: int = 1,
    drop_tol: float = 1e-12,
) -> CoarseSpace:
    """Glue the first ``n_i`` local basis functions of every subdomain.

    The stored spectrum of an interior subdomain starts with the constant
    mode, so ``n_i`` counts it: such a subdomain contributes ``chi_i`` and
    ``n_i - 1`` eigenvector products. Columns are ordered subdomain-major.
    """
    M = decomposition.M
    counts = np.broadcast_to(np.asarray(n, dtype=int), (M,)).copy()
    if len(spectra) != M:
        raise ValueError(f"expected {M} spectral results, got {len(spectra)}")
    if np.any(counts < 0):
        raise ValueError("basis counts must be non-negative")
    parts = _map(
        lambda i: _subdomain_columns(problem, decomposition, spectra[i], int(counts[i])),
        range(M),
        jobs,
    )
    n_int = problem.dofmap.interior_dofs.size
    P = sp.hstack([p[0] for p in parts], format="csc") if parts else sp.csc_matrix((n_int, 0))
    info = [b for p in parts for b in p[1]]
    if P.shape[1] == 0:
        return CoarseSpace(P, info, np.zeros((0, 0)), counts)
    K_S = np.asarray((P.T @ (problem.K0 @ P)).todense())
    K_S = 0.5 * (K_S + K_S.T)
    keep = rank_revealing_selection(K_S, drop_tol)
    dropped = [info[j] for j in np.setdiff1d(np.arange(len(info)), keep)]
    if dropped:
        warnings.warn(
            "removed linearly dependent coarse columns (subdomain, eigenindex): "
            + ", ".join(f"({b.subdomain}, {b.eigenindex})" for b in dropped[:10])
            + (" ..." if len(dropped) > 10 else ""),
            stacklevel=2,
        )
    return CoarseSpace(
        P[:, keep].tocsc(), [info[j] for j in keep], K_S[np.ix_(keep, keep)], counts, dropped
    )


def build_particular(
    problem: FineProblem,
    decomposition: Decomposition,
    pu: PartitionOfUnity | None,
    particulars: Sequence[LocalParticular],
) -> np.ndarray:
    """``u^p = sum_i I_h(chi_i u_i^p)`` as a full nodal vector."""
    up = np.zeros(problem.mesh.n_nodes)
    for part in particulars:
        sub = decomposition[part.subdomain]
        np.add.at(up, sub.star_nodes, sub.chi * part.total)
    return up


@dataclass
class GfemSolution:
    particular: np.ndarray
    correction: np.ndarray
    coefficients: np.ndarray

    @property
    def solution(self) -> np.ndarray:
        return self.particular + self.correction


def coarse_solve(problem: FineProblem, coarse: CoarseSpace, particular: np.ndarray) -> GfemSolution:
    """Galerkin solve ``a(u^s, v) = F(v) - a(u^p, v)`` for ``v`` in the coarse space."""
    interior = problem.dofmap.interior_dofs
    residual = problem.load[interior] - (problem.K @ particular)[interior]
    coeffs = coarse.solve(coarse.restriction @ residual)
    correction = np.zeros(problem.mesh.n_nodes)
    if coarse.dim:
        correction[interior] = coarse.prolongation @ coeffs
    return GfemSolution(np.asarray(particular, dtype=float), correction, coeffs)


def energy_error(problem: FineProblem, u: np.ndarray, reference: np.ndarray | None = None) -> float:
    ref = problem.solve() if reference is None else reference
    return energy_norm(problem.K, ref - u)


def relative_energy_error(problem: FineProblem, u: np.ndarray, reference: np.ndarray | None = None) -> float:
    """``||u_h - u||_a / ||u_h||_a`` with ``u_h`` the fine solution."""
    ref = problem.solve() if reference is None else reference
    denom = energy_norm(problem.K, ref)
    if denom == 0:
        raise ValueError("fine solution has zero energy; relative error undefined")
    return energy_norm(problem.K, ref - u) / denom


def n_width_bound(spectra: Sequence[LocalSpectralResult], n: int | Sequence[int]) -> np.ndarray:
    """Per-subdomain ``lambda_{n_i + 1}^{-1/2}`` of the stored spectra.

    With ``n_i`` basis functions taken from the front of the stored
    spectrum, the next stored eigenvalue governs the local best-approximation
    error for interior and boundary subdomains alike.
    """
    counts = np.broadcast_to(np.asarray(n, dtype=int), (len(spectra),))
    out = np.empty(len(spectra))
    for i, (res, k) in enumerate(zip(spectra, counts)):
        if res.n <= k:
            raise InsufficientEigenvectorsError(
                f"subdomain {res.subdomain}: bound needs eigenvalue {k + 1}, only {res.n} computed"
            )
        lam = res.eigenvalues[k]
        out[i] = lam ** -0.5 if lam > 0 else math.inf
    return out


def global_error_bound(
    decomposition: Decomposition, spectra: Sequence[LocalSpectralResult], n: int | Sequence[int]
) -> float:
    """``sqrt(kappa * kappa_star) * max_i d_i`` for the relative energy error."""
    return math.sqrt(decomposition.kappa * decomposition.kappa_star) * float(
        n_width_bound(spectra, n).max()
    )


def random_harmonic(
    problem: FineProblem, sub: Subdomain, count: int, rng: np.random.Generator
) -> np.ndarray:
    """``count`` discrete harmonic functions on ``omega_star`` with random traces.

    Values are returned on ``sub.star_nodes``; nodes on the outer boundary are zero.
    """
    space = harmonic_space(problem, sub, FULL)
    traces = rng.standard_normal((space.dim, count))
    return _on(sub.star_nodes, space.free, space.extend(traces))


@dataclass
class LocalApproximation:
    """Best-approximation errors of ``chi * u`` by ``chi`` times local basis functions."""

    errors: np.ndarray  # (len(ns), count), energy norm on omega
    bounds: np.ndarray  # (len(ns),), lambda_{n+1}^{-1/2}
    ns: np.ndarray

    @property
    def excess(self) -> float:
        """Largest ``error - bound``; non-positive when the bound holds."""
        return float((self.errors - self.bounds[:, None]).max())


def local_approximation(
    problem: FineProblem, sub: Subdomain, result: LocalSpectralResult, U: np.ndarray, ns: Sequence[int]
) -> LocalApproximation:
    """Energy-optimal approximation of ``chi * u`` for every column ``u`` of ``U``.

    Each ``u`` is normalized to unit energy on the eigenproblem's domain
    (``omega_star`` or ``R_star``). The trial space for ``n`` is spanned by
    ``chi`` times the first ``n`` non-constant extended eigenvectors, plus
    ``chi`` itself for interior subdomains; including the constant removes the
    need for a zero-mean constraint on ``u`` since it does not change
    ``||u||_a``. The matching bound is the ``(n+1)``-th non-constant eigenvalue.
    """
    mesh = problem.mesh
    star = sub.star_nodes
    coeff = problem.coefficient
    cells = sub.cells_star if result.variant == FULL else sub.cells_ring_star
    K_dom = assemble_stiffness(mesh, coeff, cells)[star][:, star]
    K_omega = assemble_stiffness(mesh, coeff, sub.cells_omega)[star][:, star]
    U = U / np.sqrt(np.einsum("ij,ij->j", U, K_dom @ U))
    target = sub.chi[:, None] * U
    ns = np.asarray(ns, dtype=int)
    offset = 1 if result.constant_mode else 0
    errors = np.empty((ns.size, U.shape[1]))
    bounds = np.empty(ns.size)
    for row, n in enumerate(ns):
        k = n + offset
        if result.n <= k:
            raise InsufficientEigenvectorsError(
                f"subdomain {result.subdomain}: need {k + 1} eigenpairs, have {result.n}"
            )
        V = sub.chi[:, None] * result.extended[:, :k]
        KV = K_omega @ V
        coef = np.linalg.lstsq(V.T @ KV, KV.T @ target, rcond=None)[0]
        E = target - V @ coef
        errors[row] = np.sqrt(np.maximum(np.einsum("ij,ij->j", E, K_omega @ E), 0.0))
        lam = result.eigenvalues[k]
        bounds[row] = lam ** -0.5 if lam > 0 else math.inf
    return LocalApproximation(errors, bounds, ns)


ERROR_CSV_HEADER = ("variant", "n", "ell", "coarse_dim", "err")


def write_error_csv(path: str | Path, rows: Sequence[dict]) -> None:
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(ERROR_CSV_HEADER)
        for r in rows:
            w.writerow([r["variant"], r["n"], r["ell"], r["coarse_dim"], f"{r['err']:.17g}"])


__all__ = [
    "BasisInfo",
    "CoarseSpace",
    "ERROR_CSV_HEADER",
    "GfemSolution",
    "InsufficientEigenvectorsError",
    "LocalApproximation",
    "build_coarse_space",
    "build_particular",
    "coarse_solve",
    "energy_error",
    "global_error_bound",
    "local_approximation",
    "n_width_bound",
    "random_harmonic",
    "rank_revealing_selection",
    "relative_energy_error",
    "write_error_csv",
]

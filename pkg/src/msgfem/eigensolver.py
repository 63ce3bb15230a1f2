"""Block Lanczos iteration for the largest eigenvalues of a self-adjoint operator.

The operator ``T`` is self-adjoint with respect to a positive definite inner
product ``<x, y>_K = x^T K y``. Its Rayleigh matrix on a ``K``-orthonormal
basis ``Q`` is supplied through a second form ``m(Q, Q)`` (for the shift-
inverted generalized problem ``T = (A - sigma M)^{-1} M`` restricted to a
constraint space, ``Q^T K T Q = Q^T M Q``), which keeps the projected matrix
exactly symmetric.

Full reorthogonalization is used throughout; the desk-scale Krylov spaces
here hold at most a few hundred vectors.
"""

from __future__ import annotations

import warnings
from dataclasses import dataclass
from typing import Callable

import numpy as np
import scipy.linalg as sla

Apply = Callable[[np.ndarray], np.ndarray]


@dataclass
class KrylovEigResult:
    values: np.ndarray  # Ritz values of T, descending
    vectors: np.ndarray  # K-orthonormal Ritz vectors, one per column
    residuals: np.ndarray  # ||T u - theta u||_K / theta
    iterations: int
    operator_applications: int
    converged: bool


def _k_orthonormalize(
    W: np.ndarray,
    apply_k: Apply,
    basis: list[np.ndarray],
    kbasis: list[np.ndarray],
    drop: float,
    restore: Apply | None = None,
) -> np.ndarray:
    """Orthonormalize the columns of ``W`` against ``basis`` and each other.

    Two passes of block classical Gram-Schmidt against the existing basis,
    then a Gram-matrix eigendecomposition that discards directions whose
    remaining ``K``-norm fell below ``drop`` times the original norm.

    ``restore`` maps the orthogonalized block back onto the admissible
    subspace. Heavy cancellation in Gram-Schmidt amplifies the relative
    constraint violation of the surviving directions; without this step it
    grows geometrically over the iterations.
    """
    if W.shape[1] == 0:
        return W
    ref = np.sqrt(max(float(np.max(np.einsum("ij,ij->j", W, apply_k(W)))), 0.0))
    for _ in range(2):
        for Q, KQ in zip(basis, kbasis):
            W = W - Q @ (KQ.T @ W)
    if restore is not None:
        W = restore(W)
        for Q, KQ in zip(basis, kbasis):
            W = W - Q @ (KQ.T @ W)
    KW = apply_k(W)
    G = W.T @ KW
    G = 0.5 * (G + G.T)
    s, V = np.linalg.eigh(G)
    keep = s > (drop * ref) ** 2
    if not np.any(keep):
        return W[:, :0]
    W = W @ (V[:, keep] / np.sqrt(s[keep]))
    # one cleanup pass restores orthogonality lost in the Gram step
    for Q, KQ in zip(basis, kbasis):
        W = W - Q @ (KQ.T @ W)
    KW = apply_k(W)
    G = 0.5 * (W.T @ KW + KW.T @ W)
    L = np.linalg.cholesky(G)
    return sla.solve_triangular(L, W.T, lower=True).T


def block_lanczos(
    apply_op: Apply,
    apply_k: Apply,
    apply_m: Apply,
    n: int,
    nev: int,
    *,
    block_size: int = 8,
    tol: float = 1e-10,
    maxiter: int = 500,
    seed: int = 0,
    project: Apply | None = None,
    restore: Apply | None = None,
    drop: float = 1e-10,
) -> KrylovEigResult:
    """Largest ``nev`` eigenpairs of ``T`` via block Lanczos with full reorthogonalization.

    Parameters
    ----------
    apply_op : ``X -> T X`` for a block of column vectors.
    apply_k : ``X -> K X``, the inner product in which ``T`` is self-adjoint.
    apply_m : ``X -> M X`` with ``Q^T M Q`` the Rayleigh matrix of ``T``.
    n : vector length.
    nev : number of wanted eigenpairs.
    project : optional projector applied to every new block (used to deflate
        known eigenvectors; it must commute with ``T``).
    restore : optional map back onto the subspace ``T`` acts on, applied
        after each orthogonalization (see :func:`_k_orthonormalize`).
    """
    rng = np.random.default_rng(seed)
    p = max(1, min(block_size, n))
    nev = min(nev, n)
    proj = project if project is not None else (lambda X: X)

    X = proj(rng.standard_normal((n, p)))
    W = proj(apply_op(X))
    applications = p
    Q = _k_orthonormalize(W, apply_k, [], [], drop, restore)
    basis: list[np.ndarray] = []
    kbasis: list[np.ndarray] = []
    mbasis: list[np.ndarray] = []
    tbasis: list[np.ndarray] = []

    theta = np.zeros(0)
    vecs = np.zeros((n, 0))
    res = np.zeros(0)
    it = 0
    converged = False
    while Q.shape[1] > 0 and it < maxiter:
        it += 1
        TQ = proj(apply_op(Q))
        applications += Q.shape[1]
        basis.append(Q)
        kbasis.append(apply_k(Q))
        mbasis.append(apply_m(Q))
        tbasis.append(TQ)

        Qa = np.hstack(basis)
        S = Qa.T @ np.hstack(mbasis)
        S = 0.5 * (S + S.T)
        vals, Y = np.linalg.eigh(S)
        order = np.argsort(vals)[::-1]
        vals, Y = vals[order], Y[:, order]
        k = min(nev, vals.size)
        theta = vals[:k]
        vecs = Qa @ Y[:, :k]
        R = np.hstack(tbasis) @ Y[:, :k] - vecs * theta
        rnorm = np.sqrt(np.maximum(np.einsum("ij,ij->j", R, apply_k(R)), 0.0))
        res = rnorm / np.maximum(np.abs(theta), np.finfo(float).tiny)
        if k == nev and np.all(res <= tol):
            converged = True
            break
        Q = _k_orthonormalize(TQ, apply_k, basis, kbasis, drop, restore)
    else:
        # An empty new block means the basis spans an invariant subspace, so
        # the Ritz pairs are exact up to rounding.
        converged = Q.shape[1] == 0

    if not converged:
        warnings.warn(
            f"block Lanczos did not converge in {it} iterations; "
            f"max relative residual {float(res.max(initial=0.0)):.2e}",
            stacklevel=2,
        )
    return KrylovEigResult(theta, vecs, res, it, applications, converged)


__all__ = ["KrylovEigResult", "block_lanczos"]

"""Q1 finite elements on Cartesian meshes.

Meshes are axis-aligned boxes split into ``cells_per_axis`` equal cells.
Nodes and cells are numbered lexicographically with the x index running
fastest, so node ``(i, j)`` of a 2D mesh has index ``i + (nx + 1) * j``.
Every node carries exactly one degree of freedom, so node and dof indices
coincide.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from functools import cached_property
from pathlib import Path
from typing import Callable, Sequence, Union

import numpy as np
import scipy.linalg as sla
import scipy.sparse as sp
import scipy.sparse.linalg as spla
from scipy.sparse.csgraph import maximum_bipartite_matching, structural_rank

DENSE_FALLBACK_LIMIT = 3000

ScalarOrField = Union[float, np.ndarray, Callable[[np.ndarray], np.ndarray]]


class SingularMatrixError(RuntimeError):
    """Raised when a sparse factorization hits a zero pivot.

    Attributes
    ----------
    pivot : int or None
        Row of the (structurally or numerically) failing pivot in the
        original numbering, when it could be located.
    """

    def __init__(self, message: str, pivot: int | None = None):
        super().__init__(message if pivot is None else f"{message} (pivot {pivot})")
        self.pivot = pivot


# ----------------------------------------------------------------------------
# Mesh and dof map
# ----------------------------------------------------------------------------


def box_indices(shape: Sequence[int], lo: Sequence[int], hi: Sequence[int]) -> np.ndarray:
    """Lexicographic indices of the multi-index box ``[lo, hi)`` in a grid.

    ``shape`` is the number of entries per axis of the enclosing grid. The
    result is sorted ascending because the x index runs fastest.
    """
    lo = np.asarray(lo, dtype=np.int64)
    hi = np.asarray(hi, dtype=np.int64)
    if np.any(hi <= lo):
        return np.zeros(0, dtype=np.int64)
    strides = np.cumprod([1, *shape[:-1]]).astype(np.int64)
    idx = np.zeros(1, dtype=np.int64)
    for k in range(len(shape)):
        axis = np.arange(lo[k], hi[k], dtype=np.int64) * strides[k]
        idx = (axis[:, None] + idx[None, :]).ravel()
    return idx


@dataclass(frozen=True)
class Mesh:
    """Uniform Cartesian mesh of a box in 2D or 3D."""

    dim: int
    cells_per_axis: tuple[int, ...]
    origin: tuple[float, ...]
    extent: tuple[float, ...]

    @property
    def h(self) -> np.ndarray:
        return np.asarray(self.extent, dtype=float) / np.asarray(self.cells_per_axis)

    @property
    def nodes_per_axis(self) -> tuple[int, ...]:
        return tuple(n + 1 for n in self.cells_per_axis)

    @property
    def n_nodes(self) -> int:
        return int(np.prod(self.nodes_per_axis))

    @property
    def n_cells(self) -> int:
        return int(np.prod(self.cells_per_axis))

    @property
    def cell_volume(self) -> float:
        return float(np.prod(self.h))

    def node_multi_index(self) -> np.ndarray:
        """Array of shape ``(n_nodes, dim)`` with integer node coordinates."""
        return _multi_index(self.nodes_per_axis)

    def cell_multi_index(self) -> np.ndarray:
        return _multi_index(self.cells_per_axis)

    def node_coordinates(self) -> np.ndarray:
        return np.asarray(self.origin) + self.node_multi_index() * self.h

    def cell_centers(self) -> np.ndarray:
        return np.asarray(self.origin) + (self.cell_multi_index() + 0.5) * self.h

    @cached_property
    def cell_nodes(self) -> np.ndarray:
        """Corner nodes of every cell, shape ``(n_cells, 2**dim)``.

        Corner ``c`` has offset bit ``(c >> k) & 1`` along axis ``k``, which
        is the lexicographic corner order of the reference cell.
        """
        strides = np.cumprod([1, *self.nodes_per_axis[:-1]]).astype(np.int64)
        base = self.cell_multi_index() @ strides
        offsets = np.array(
            [sum(((c >> k) & 1) * strides[k] for k in range(self.dim)) for c in range(2**self.dim)],
            dtype=np.int64,
        )
        out = base[:, None] + offsets[None, :]
        out.setflags(write=False)
        return out

    @cached_property
    def boundary_node_mask(self) -> np.ndarray:
        mi = self.node_multi_index()
        mask = np.any((mi == 0) | (mi == np.asarray(self.cells_per_axis)), axis=1)
        mask.setflags(write=False)
        return mask

    @cached_property
    def node_cell_count(self) -> np.ndarray:
        """Number of mesh cells touching each node."""
        count = np.bincount(self.cell_nodes.ravel(), minlength=self.n_nodes)
        count.setflags(write=False)
        return count

    def cells_in_box(self, lo: Sequence[int], hi: Sequence[int]) -> np.ndarray:
        """Cells with multi-index in ``[lo, hi)``."""
        return box_indices(self.cells_per_axis, lo, hi)

    def nodes_in_box(self, lo: Sequence[int], hi: Sequence[int]) -> np.ndarray:
        """Nodes with multi-index in the closed box ``[lo, hi]``."""
        return box_indices(self.nodes_per_axis, lo, np.asarray(hi) + 1)

    def nodes_of_cells(self, cells: np.ndarray) -> np.ndarray:
        return np.unique(self.cell_nodes[cells])


def _multi_index(shape: Sequence[int]) -> np.ndarray:
    grids = np.meshgrid(*[np.arange(n) for n in shape], indexing="ij")
    # x fastest: ravel in Fortran order
    return np.stack([g.ravel(order="F") for g in grids], axis=1)


def build_mesh(
    dim: int,
    cells_per_axis: Sequence[int] | int,
    origin: Sequence[float] | float = 0.0,
    extent: Sequence[float] | float = 1.0,
) -> Mesh:
    """Create a uniform Cartesian mesh of the box ``origin + [0, extent]``.

    Examples
    --------
    >>> build_mesh(2, [1, 1]).n_nodes
    4
    >>> build_mesh(3, 4).n_cells
    64
    """
    if dim not in (2, 3):
        raise ValueError(f"dim must be 2 or 3, got {dim}")
    cells = np.broadcast_to(np.asarray(cells_per_axis, dtype=np.int64), (dim,))
    orig = np.broadcast_to(np.asarray(origin, dtype=float), (dim,))
    ext = np.broadcast_to(np.asarray(extent, dtype=float), (dim,))
    if np.any(cells < 1):
        raise ValueError(f"cells_per_axis must be >= 1, got {cells.tolist()}")
    if np.any(ext <= 0):
        raise ValueError(f"extent must be positive, got {ext.tolist()}")
    return Mesh(dim, tuple(int(c) for c in cells), tuple(map(float, orig)), tuple(map(float, ext)))


@dataclass(frozen=True)
class DofMap:
    """Split of the lexicographic node numbering into interior and boundary."""

    n_dofs: int
    boundary_nodes: np.ndarray
    interior_dofs: np.ndarray
    reduced_index: np.ndarray  # node -> position among interior dofs, -1 on the boundary

    @classmethod
    def from_mesh(cls, mesh: Mesh) -> "DofMap":
        mask = mesh.boundary_node_mask
        interior = np.flatnonzero(~mask)
        reduced = np.full(mesh.n_nodes, -1, dtype=np.int64)
        reduced[interior] = np.arange(interior.size)
        return cls(mesh.n_nodes, np.flatnonzero(mask), interior, reduced)


# ----------------------------------------------------------------------------
# Element matrices and assembly
# ----------------------------------------------------------------------------


def _tensor(mats: Sequence[np.ndarray]) -> np.ndarray:
    """Kronecker product with the first factor varying fastest."""
    out = np.ones((1, 1))
    for m in mats:
        out = np.kron(m, out)
    return out


def element_stiffness(h: Sequence[float]) -> np.ndarray:
    """Q1 stiffness matrix of one box cell with unit coefficient.

    Built from 1D stiffness and mass factors; exact for bilinear/trilinear
    shape functions (equivalently, 2-point Gauss quadrature per axis).
    """
    h = np.asarray(h, dtype=float)
    dim = h.size
    stiff_1d = [np.array([[1.0, -1.0], [-1.0, 1.0]]) / hk for hk in h]
    mass_1d = [np.array([[2.0, 1.0], [1.0, 2.0]]) * hk / 6.0 for hk in h]
    ke = np.zeros((2**dim, 2**dim))
    for k in range(dim):
        ke += _tensor([stiff_1d[j] if j == k else mass_1d[j] for j in range(dim)])
    return ke


def element_mass(h: Sequence[float]) -> np.ndarray:
    return _tensor([np.array([[2.0, 1.0], [1.0, 2.0]]) * hk / 6.0 for hk in np.asarray(h, float)])


def _cell_values(mesh: Mesh, coeff) -> np.ndarray:
    values = getattr(coeff, "values", coeff)
    values = np.asarray(values, dtype=float)
    if values.ndim == 0:
        return np.full(mesh.n_cells, float(values))
    values = values.ravel()
    if values.size != mesh.n_cells:
        raise ValueError(
            f"coefficient has {values.size} cell values, mesh has {mesh.n_cells} cells"
        )
    return values


def assemble_cells(
    mesh: Mesh, element: np.ndarray, weights: np.ndarray, cells: np.ndarray | None = None
) -> sp.csr_matrix:
    """Assemble ``sum_c weights[c] * element`` over the chosen cells."""
    if cells is None:
        cells = np.arange(mesh.n_cells)
    cells = np.asarray(cells, dtype=np.int64)
    conn = mesh.cell_nodes[cells]
    nloc = conn.shape[1]
    rows = np.repeat(conn, nloc, axis=1).ravel()
    cols = np.tile(conn, (1, nloc)).ravel()
    data = (weights[cells][:, None] * element.ravel()[None, :]).ravel()
    mat = sp.coo_matrix((data, (rows, cols)), shape=(mesh.n_nodes, mesh.n_nodes)).tocsr()
    mat.sum_duplicates()
    return mat


def assemble_stiffness(mesh: Mesh, coeff, cells: np.ndarray | None = None) -> sp.csr_matrix:
    """Stiffness matrix of ``a(u, v) = int A grad u . grad v`` without BCs.

    Parameters
    ----------
    mesh : Mesh
    coeff : CoefficientField, array of cell values, or scalar
    cells : optional subset of cells to integrate over; the result keeps the
        global node numbering, which is how the local forms ``a_D`` on
        subdomains are realized.
    """
    return assemble_cells(mesh, element_stiffness(mesh.h), _cell_values(mesh, coeff), cells)


def assemble_mass(mesh: Mesh, cells: np.ndarray | None = None) -> sp.csr_matrix:
    return assemble_cells(mesh, element_mass(mesh.h), np.ones(mesh.n_cells), cells)


def assemble_load(mesh: Mesh, f: ScalarOrField = 1.0) -> np.ndarray:
    """Load vector ``F(v) = int f v`` for every nodal basis function.

    ``f`` may be a scalar, a per-cell array (cell-wise constant data), a
    per-node array (interpolated with Q1 functions), or a callable
    evaluated at the nodes.
    """
    if callable(f):
        f = np.asarray(f(mesh.node_coordinates()), dtype=float)
    f = np.asarray(f, dtype=float)
    if f.ndim == 0 or f.size == mesh.n_cells:
        values = _cell_values(mesh, f)
        share = mesh.cell_volume / 2**mesh.dim
        load = np.bincount(
            mesh.cell_nodes.ravel(),
            weights=np.repeat(values * share, 2**mesh.dim),
            minlength=mesh.n_nodes,
        )
        return load
    if f.size == mesh.n_nodes:
        return assemble_mass(mesh) @ f.ravel()
    raise ValueError(
        f"load data has {f.size} entries; expected 1, {mesh.n_cells} (cells) or {mesh.n_nodes} (nodes)"
    )


def nodal_values(mesh: Mesh, g: ScalarOrField) -> np.ndarray:
    """Evaluate scalar / callable / per-node data at every node."""
    if callable(g):
        return np.asarray(g(mesh.node_coordinates()), dtype=float).ravel()
    g = np.asarray(g, dtype=float)
    if g.ndim == 0:
        return np.full(mesh.n_nodes, float(g))
    if g.size != mesh.n_nodes:
        raise ValueError(f"nodal data has {g.size} entries, mesh has {mesh.n_nodes} nodes")
    return g.ravel().copy()


# ----------------------------------------------------------------------------
# Fine problem
# ----------------------------------------------------------------------------


@dataclass
class FineProblem:
    """Assembled fine-scale problem ``-div(A grad u) = f``, ``u = g`` on the boundary."""

    mesh: Mesh
    dofmap: DofMap
    coefficient: object
    K: sp.csr_matrix
    load: np.ndarray
    dirichlet_values: np.ndarray  # g at boundary nodes, zero elsewhere (the lift)
    K0: sp.csr_matrix = field(init=False)
    f0: np.ndarray = field(init=False)
    _solution: np.ndarray | None = field(default=None, init=False, repr=False)

    def __post_init__(self):
        self.K0, self.f0, _ = apply_dirichlet(self, self.dirichlet_values)

    @property
    def lift(self) -> np.ndarray:
        return self.dirichlet_values

    def expand(self, u_interior: np.ndarray) -> np.ndarray:
        """Full nodal vector from interior values plus the Dirichlet lift."""
        u = self.dirichlet_values.copy()
        u[self.dofmap.interior_dofs] += u_interior
        return u

    def solve(self) -> np.ndarray:
        """Fine-scale reference solution ``u_h`` (cached)."""
        if self._solution is None:
            fact = factorize(self.K0, symmetric=True)
            self._solution = self.expand(fact.solve(self.f0))
        return self._solution


def build_fine_problem(
    mesh: Mesh, coeff, f: ScalarOrField = 1.0, g: ScalarOrField = 0.0
) -> FineProblem:
    dofmap = DofMap.from_mesh(mesh)
    K = assemble_stiffness(mesh, coeff)
    load = assemble_load(mesh, f)
    gvals = nodal_values(mesh, g)
    lift = np.zeros(mesh.n_nodes)
    lift[dofmap.boundary_nodes] = gvals[dofmap.boundary_nodes]
    return FineProblem(mesh, dofmap, coeff, K, load, lift)


def apply_dirichlet(problem: FineProblem, g: ScalarOrField | None = None):
    """Eliminate boundary dofs.

    Returns
    -------
    K0 : interior-interior block of the stiffness
    f0 : ``load_I - K_IB g``
    lift : nodal vector with ``g`` on boundary nodes and zero inside
    """
    mesh, dm = problem.mesh, problem.dofmap
    lift = np.zeros(mesh.n_nodes)
    gvals = problem.dirichlet_values if g is None else nodal_values(mesh, g)
    lift[dm.boundary_nodes] = gvals[dm.boundary_nodes]
    K_I = problem.K[dm.interior_dofs]
    K0 = K_I[:, dm.interior_dofs].tocsr()
    f0 = problem.load[dm.interior_dofs] - K_I @ lift
    return K0, f0, lift


# ----------------------------------------------------------------------------
# Sparse direct factorization
# ----------------------------------------------------------------------------

ORDERINGS = ("MMD_AT_PLUS_A", "MMD_ATA", "COLAMD", "NATURAL")


class Factorization:
    """Sparse LU factorization (SuperLU) with fill-in statistics.

    The column ordering is fixed by ``ordering`` so that factor statistics of
    different matrices are comparable. Symmetric matrices use a relaxed
    diagonal pivot threshold, which keeps the symmetric ordering intact.

    A precomputed symmetric ``permutation`` replaces the SuperLU ordering:
    the matrix is permuted as ``A[p][:, p]`` and factorized in that order,
    preferring diagonal pivots (threshold ``0.1``) so the ordering survives.
    """

    def __init__(
        self,
        matrix,
        ordering: str = "MMD_AT_PLUS_A",
        symmetric: bool = False,
        permutation: np.ndarray | None = None,
    ):
        if ordering not in ORDERINGS:
            raise ValueError(f"unknown ordering {ordering!r}; choose from {ORDERINGS}")
        A = sp.csc_matrix(matrix)
        if A.shape[0] != A.shape[1]:
            raise ValueError(f"matrix must be square, got {A.shape}")
        self.n = A.shape[0]
        self.ordering = ordering if permutation is None else "PRESCRIBED"
        self._perm = None
        if self.n == 0:
            self._lu = None
            self.lower_nnz = self.upper_nnz = 0
            self.perm_r = self.perm_c = np.zeros(0, dtype=np.int64)
            return
        if permutation is not None:
            p = np.asarray(permutation, dtype=np.int64)
            if p.shape != (self.n,) or not np.array_equal(np.sort(p), np.arange(self.n)):
                raise ValueError("permutation must be a permutation of range(n)")
            self._perm = p
            A = A[p][:, p].tocsc()
            ordering = "NATURAL"
            threshold, options = (0.0 if symmetric else 0.1), {"SymmetricMode": True}
        elif symmetric:
            threshold, options = 0.0, {"SymmetricMode": True}
        else:
            threshold, options = 1.0, {}
        try:
            self._lu = spla.splu(
                A, permc_spec=ordering, diag_pivot_thresh=threshold, options=options
            )
        except RuntimeError as exc:
            # Diagnose only after a failure: the matching-based structural
            # check can be far slower than the factorization itself.
            _check_structure(A)
            raise SingularMatrixError(
                f"sparse LU failed: {exc}", _locate_numerical_pivot(A)
            ) from exc
        self.lower_nnz = int(self._lu.L.nnz)
        self.upper_nnz = int(self._lu.U.nnz)
        self.perm_r = np.asarray(self._lu.perm_r)
        self.perm_c = np.asarray(self._lu.perm_c)
        diag = np.abs(self._lu.U.diagonal())
        if not np.all(np.isfinite(diag)) or np.any(diag == 0.0):
            bad = int(np.flatnonzero(~np.isfinite(diag) | (diag == 0.0))[0])
            raise SingularMatrixError("zero pivot in sparse LU", int(self.perm_c[bad]))

    @property
    def lower_nnz_per_row(self) -> float:
        return self.lower_nnz / self.n if self.n else 0.0

    @property
    def upper_nnz_per_row(self) -> float:
        return self.upper_nnz / self.n if self.n else 0.0

    @property
    def nnz_per_row(self) -> float:
        """Average nonzeros per row of ``L + U`` with the diagonal counted once."""
        return (self.lower_nnz + self.upper_nnz - self.n) / self.n if self.n else 0.0

    def solve(self, b: np.ndarray) -> np.ndarray:
        b = np.asarray(b, dtype=float)
        if self.n == 0:
            return np.zeros_like(b)
        if self._perm is None:
            return self._lu.solve(np.ascontiguousarray(b))
        x = self._lu.solve(np.ascontiguousarray(b[self._perm]))
        out = np.empty_like(x)
        out[self._perm] = x
        return out


def nested_dissection(multi_index: np.ndarray, leaf_size: int = 8) -> np.ndarray:
    """Fill-reducing order of grid nodes by recursive coordinate bisection.

    ``multi_index`` holds integer node coordinates. Each step splits the
    current node set at the median plane of its longest axis; for Q1
    couplings the nodes on that plane separate the two sides, so they are
    numbered last. Works for any node subset of a Cartesian grid, including
    rings with holes.
    """
    mi = np.asarray(multi_index, dtype=np.int64)
    if mi.ndim != 2:
        raise ValueError("multi_index must be a 2D array (nodes x dim)")
    pieces: list[np.ndarray] = []
    stack: list[tuple[np.ndarray, bool]] = [(np.arange(mi.shape[0]), False)]
    # iterative post-order: children first, then the separator
    while stack:
        idx, emit = stack.pop()
        if emit:
            pieces.append(idx)
            continue
        pts = mi[idx]
        if idx.size <= leaf_size:
            pieces.append(idx)
            continue
        lo, hi = pts.min(axis=0), pts.max(axis=0)
        axis = int(np.argmax(hi - lo))
        if hi[axis] - lo[axis] < 2:
            pieces.append(idx)
            continue
        c = pts[:, axis]
        split = int(np.clip(np.median(c), lo[axis] + 1, hi[axis] - 1))
        stack.append((idx[c == split], True))
        stack.append((idx[c > split], False))
        stack.append((idx[c < split], False))
    return np.concatenate(pieces) if pieces else np.zeros(0, dtype=np.int64)


def _check_structure(A: sp.csc_matrix) -> None:
    n = A.shape[0]
    pattern = A.copy()
    pattern.eliminate_zeros()
    if structural_rank(pattern) == n:
        return
    match = maximum_bipartite_matching(pattern.tocsr(), perm_type="column")
    unmatched = np.flatnonzero(match < 0)
    raise SingularMatrixError(
        "structurally singular matrix", int(unmatched[0]) if unmatched.size else None
    )


def _locate_numerical_pivot(A: sp.spmatrix) -> int | None:
    """Best-effort location of a zero pivot via dense LU (small matrices only)."""
    if A.shape[0] > DENSE_FALLBACK_LIMIT:
        return None
    _, _, U = sla.lu(A.toarray())
    diag = np.abs(np.diag(U))
    tol = np.finfo(float).eps * max(diag.max(initial=0.0), 1.0) * A.shape[0]
    bad = np.flatnonzero(diag <= tol)
    return int(bad[0]) if bad.size else None


def factorize(
    matrix,
    ordering: str = "MMD_AT_PLUS_A",
    symmetric: bool = False,
    permutation: np.ndarray | None = None,
) -> Factorization:
    """Factorize a square sparse matrix; see :class:`Factorization`."""
    return Factorization(matrix, ordering=ordering, symmetric=symmetric, permutation=permutation)


def dense_solve(matrix, b: np.ndarray) -> np.ndarray:
    """Dense LU solve, restricted to small systems (oracle use)."""
    n = matrix.shape[0]
    if n > DENSE_FALLBACK_LIMIT:
        raise ValueError(f"dense fallback limited to {DENSE_FALLBACK_LIMIT} dofs, got {n}")
    M = matrix.toarray() if sp.issparse(matrix) else np.asarray(matrix)
    return sla.solve(M, b)


def energy_norm(K, v: np.ndarray) -> float:
    """``sqrt(v^T K v)``; raises if ``K`` is visibly indefinite on ``v``.

    The tolerance for negative values is ``1e-12 * ||v||^2`` scaled by the
    largest diagonal entry of ``K`` so that it is invariant under scaling of
    the coefficient.
    """
    v = np.asarray(v, dtype=float)
    value = float(v @ (K @ v))
    if value >= 0.0:
        return float(np.sqrt(value))
    diag = K.diagonal() if hasattr(K, "diagonal") else np.diag(K)
    scale = max(float(np.max(np.abs(diag), initial=0.0)), 1.0)
    if value < -1e-12 * scale * float(v @ v):
        raise ValueError(f"matrix is not positive semidefinite: v^T K v = {value:.3e}")
    return 0.0


def is_symmetric(M, rtol: float = 1e-12) -> bool:
    diff = M - M.T
    scale = max(abs(M).max(), 1e-300)
    return bool(abs(diff).max() <= rtol * scale) if diff.nnz else True


# ----------------------------------------------------------------------------
# Plain-text IO
# ----------------------------------------------------------------------------


def write_matrix_market(path: str | Path, M) -> None:
    """Write a sparse matrix in MatrixMarket coordinate format (1-based)."""
    C = sp.coo_matrix(M)
    C.sum_duplicates()
    with open(path, "w") as fh:
        fh.write("%%MatrixMarket matrix coordinate real general\n")
        fh.write(f"{C.shape[0]} {C.shape[1]} {C.nnz}\n")
        for r, c, v in zip(C.row, C.col, C.data):
            fh.write(f"{r + 1} {c + 1} {v:.17g}\n")


def read_matrix_market(path: str | Path) -> sp.csr_matrix:
    with open(path) as fh:
        header = fh.readline()
        if not header.startswith("%%MatrixMarket matrix coordinate real general"):
            raise ValueError(f"unsupported MatrixMarket header: {header.strip()}")
        line = fh.readline()
        while line.startswith("%"):
            line = fh.readline()
        nr, nc, nnz = (int(t) for t in line.split())
        data = np.loadtxt(fh, ndmin=2) if nnz else np.zeros((0, 3))
    return sp.csr_matrix(
        (data[:, 2], (data[:, 0].astype(int) - 1, data[:, 1].astype(int) - 1)), shape=(nr, nc)
    )


def write_vector_csv(path: str | Path, v: np.ndarray) -> None:
    """One value per line with 17 significant digits (round-trip exact)."""
    with open(path, "w") as fh:
        for x in np.asarray(v, dtype=float).ravel():
            fh.write(f"{x:.17g}\n")


def read_vector_csv(path: str | Path) -> np.ndarray:
    return np.loadtxt(path, ndmin=1, dtype=float)


__all__ = [
    "DENSE_FALLBACK_LIMIT",
    "DofMap",
    "Factorization",
    "FineProblem",
    "Mesh",
    "SingularMatrixError",
    "apply_dirichlet",
    "assemble_load",
    "assemble_mass",
    "assemble_stiffness",
    "box_indices",
    "build_fine_problem",
    "build_mesh",
    "dense_solve",
    "element_stiffness",
    "energy_norm",
    "factorize",
    "is_symmetric",
    "nested_dissection",
    "nodal_values",
    "read_matrix_market",
    "read_vector_csv",
    "write_matrix_market",
    "write_vector_csv",
]

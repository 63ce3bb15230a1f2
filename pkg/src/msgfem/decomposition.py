"""Overlapping brick decompositions, partitions of unity and ring cut-offs.

All geometric objects are boxes in integer cell coordinates. For subdomain
``i`` with brick ``[b_lo, b_hi)`` (cells), ``overlap_layers = o`` and
``oversampling = l``:

* ``omega`` is the brick grown by ``o`` layers and ``omega_star`` is
  ``omega`` grown by ``l`` layers, both clipped to the mesh.
* ``chi`` ramps linearly from 0 at the boundary of ``omega`` to 1 at the
  brick boundary shrunk by ``o``; the region where ``chi = 1`` is
  ``omega_tilde``. Sides lying on the outer boundary are never shrunk or
  ramped.
* ``eta`` is 1 on the nodes of the brick shrunk by ``o + 1`` layers and 0 on
  every other node, so it drops from 1 to 0 across exactly one layer inside
  ``omega_tilde``.
* ``chi_ring = chi - eta`` and ``R`` is its cell support; ``R_star`` is
  ``R`` grown by ``l`` layers in both directions (clipped), i.e.
  ``omega_star`` minus the brick shrunk by ``o + 1 + l`` layers.
"""

from __future__ import annotations

import json
import warnings
from dataclasses import dataclass, field
from pathlib import Path
from typing import Sequence

import numpy as np

from .fem import Mesh, box_indices


@dataclass(frozen=True)
class Box:
    """Half-open box ``[lo, hi)`` in integer cell coordinates."""

    lo: tuple[int, ...]
    hi: tuple[int, ...]

    @property
    def empty(self) -> bool:
        return any(h <= l for l, h in zip(self.lo, self.hi))

    def grow(self, layers: int, limit: Sequence[int], sides: np.ndarray | None = None) -> "Box":
        """Grow (or shrink, for negative ``layers``) and clip to ``[0, limit)``.

        ``sides`` is an optional ``(dim, 2)`` boolean mask choosing which
        faces move.
        """
        dim = len(self.lo)
        if sides is None:
            sides = np.ones((dim, 2), dtype=bool)
        lo = [max(0, l - layers * int(sides[k, 0])) for k, l in enumerate(self.lo)]
        hi = [min(limit[k], h + layers * int(sides[k, 1])) for k, h in enumerate(self.hi)]
        return Box(tuple(lo), tuple(hi))

    def cells(self, mesh: Mesh) -> np.ndarray:
        return mesh.cells_in_box(self.lo, self.hi)

    def nodes(self, mesh: Mesh) -> np.ndarray:
        if self.empty:
            return np.zeros(0, dtype=np.int64)
        return mesh.nodes_in_box(self.lo, self.hi)

    def shape(self) -> tuple[int, ...]:
        return tuple(max(0, h - l) for l, h in zip(self.lo, self.hi))


@dataclass
class Subdomain:
    """Index sets and weights of one subdomain.

    Nodal weights (``chi``, ``eta``, ``chi_ring``) are stored on the node
    box of ``omega_star`` (``star_nodes``) and vanish outside ``omega``.
    """

    index: int
    grid_index: tuple[int, ...]
    brick: Box
    omega: Box
    omega_star: Box
    omega_tilde: Box
    eta_box: Box  # node box where eta = 1 (stored as a cell box whose closure is used)
    hole: Box  # cells removed from omega_star to form R_star
    on_boundary_side: np.ndarray  # (dim, 2): brick face lies on the outer boundary
    star_nodes: np.ndarray
    chi: np.ndarray
    eta: np.ndarray
    chi_ring: np.ndarray
    cells_brick: np.ndarray
    cells_omega: np.ndarray
    cells_star: np.ndarray
    cells_tilde: np.ndarray
    cells_ring: np.ndarray
    cells_ring_star: np.ndarray
    overlap_width: float | None
    star_diameter: float
    is_boundary: bool
    ring_degenerate: bool
    ring_empty: bool

    def node_weights(self, name: str) -> tuple[np.ndarray, np.ndarray]:
        """``(global node ids, values)`` of a stored nodal weight."""
        return self.star_nodes, getattr(self, name)

    def full_vector(self, name: str, n_nodes: int) -> np.ndarray:
        out = np.zeros(n_nodes)
        out[self.star_nodes] = getattr(self, name)
        return out

    def nodes_of(self, mesh: Mesh, which: str) -> np.ndarray:
        return mesh.nodes_of_cells(getattr(self, f"cells_{which}"))


@dataclass
class Decomposition:
    """Overlapping decomposition of a Cartesian mesh into bricks."""

    mesh: Mesh
    subdomains_per_axis: tuple[int, ...]
    overlap_layers: int
    oversampling: int
    subdomains: list[Subdomain]
    kappa: int
    kappa_star: int
    partition_of_unity: bool = True
    notes: list[str] = field(default_factory=list)

    @property
    def M(self) -> int:
        return len(self.subdomains)

    def __getitem__(self, i: int) -> Subdomain:
        return self.subdomains[i]

    def __iter__(self):
        return iter(self.subdomains)

    def __len__(self) -> int:
        return len(self.subdomains)

    def summary(self) -> dict:
        return {
            "cells_per_axis": list(self.mesh.cells_per_axis),
            "subdomains_per_axis": list(self.subdomains_per_axis),
            "overlap_layers": self.overlap_layers,
            "oversampling": self.oversampling,
            "M": self.M,
            "kappa": self.kappa,
            "kappa_star": self.kappa_star,
            "subdomains": [
                {
                    "id": s.index,
                    "grid_index": list(s.grid_index),
                    "omega_cells": int(s.cells_omega.size),
                    "omega_star_cells": int(s.cells_star.size),
                    "ring_cells": int(s.cells_ring.size),
                    "ring_star_cells": int(s.cells_ring_star.size),
                    "delta": s.overlap_width,
                    "boundary": s.is_boundary,
                    "ring_degenerate": s.ring_degenerate,
                }
                for s in self.subdomains
            ],
        }

    def write_summary(self, path: str | Path) -> None:
        with open(path, "w") as fh:
            json.dump(self.summary(), fh, indent=2)


def _ramp_1d(t: np.ndarray, lo: int, hi: int, width: int, ramp_lo: bool, ramp_hi: bool) -> np.ndarray:
    """Piecewise-linear weight on integer node positions ``t``.

    Rises from 0 at ``lo`` to 1 at ``lo + width`` (if ``ramp_lo``) and falls
    from 1 at ``hi - width`` to 0 at ``hi`` (if ``ramp_hi``); zero outside
    ``[lo, hi]``.
    """
    w = np.where((t >= lo) & (t <= hi), 1.0, 0.0)
    if ramp_lo:
        w = np.minimum(w, np.clip((t - lo) / width, 0.0, 1.0))
    if ramp_hi:
        w = np.minimum(w, np.clip((hi - t) / width, 0.0, 1.0))
    return w


def _box_indicator_on_nodes(node_mi: np.ndarray, box: Box) -> np.ndarray:
    """1 on nodes inside the closed node box ``[lo, hi]`` of a cell box."""
    if any(h < l for l, h in zip(box.lo, box.hi)):
        return np.zeros(node_mi.shape[0])
    inside = np.all((node_mi >= np.asarray(box.lo)) & (node_mi <= np.asarray(box.hi)), axis=1)
    return inside.astype(float)


def make_subdomain(
    mesh: Mesh,
    index: int,
    grid_index: Sequence[int],
    brick: Box,
    overlap_layers: int,
    oversampling: int,
) -> Subdomain:
    """Build all index sets and nodal weights of one brick.

    The partition-of-unity weight returned here is unnormalized; the
    normalization happens in :func:`build_decomposition`.
    """
    dim = mesh.dim
    limit = mesh.cells_per_axis
    o, ell = overlap_layers, oversampling
    on_bnd = np.array(
        [[brick.lo[k] == 0, brick.hi[k] == limit[k]] for k in range(dim)], dtype=bool
    )
    interior_sides = ~on_bnd
    omega = brick.grow(o, limit)
    omega_star = omega.grow(ell, limit)
    tilde = brick.grow(-o, limit, interior_sides)
    eta_box = brick.grow(-(o + 1), limit, interior_sides)
    hole = brick.grow(-(o + 1 + ell), limit, interior_sides)

    star_nodes = omega_star.nodes(mesh)
    node_mi = np.stack(
        np.unravel_index(star_nodes, mesh.nodes_per_axis, order="F"), axis=1
    )
    chi = np.ones(star_nodes.size)
    for k in range(dim):
        chi *= _ramp_1d(
            node_mi[:, k],
            omega.lo[k],
            omega.hi[k],
            2 * o,
            bool(interior_sides[k, 0]),
            bool(interior_sides[k, 1]),
        )
    # eta = 1 exactly on the closed node box of eta_box
    eta = _box_indicator_on_nodes(node_mi, eta_box) if not _box_vanishes(eta_box) else np.zeros(star_nodes.size)

    cells_star = omega_star.cells(mesh)
    cells_hole = hole.cells(mesh)
    cells_ring_star = np.setdiff1d(cells_star, cells_hole, assume_unique=True)

    h = mesh.h
    widths = [2 * o * h[k] for k in range(dim) for side in range(2) if interior_sides[k, side]]
    ext = np.asarray(omega_star.shape()) * h
    return Subdomain(
        index=index,
        grid_index=tuple(int(g) for g in grid_index),
        brick=brick,
        omega=omega,
        omega_star=omega_star,
        omega_tilde=tilde,
        eta_box=eta_box,
        hole=hole,
        on_boundary_side=on_bnd,
        star_nodes=star_nodes,
        chi=chi,
        eta=eta,
        chi_ring=np.zeros_like(chi),
        cells_brick=brick.cells(mesh),
        cells_omega=omega.cells(mesh),
        cells_star=cells_star,
        cells_tilde=tilde.cells(mesh),
        cells_ring=np.zeros(0, dtype=np.int64),
        cells_ring_star=cells_ring_star,
        overlap_width=float(min(widths)) if widths else None,
        star_diameter=float(np.linalg.norm(ext)),
        is_boundary=bool(
            np.any(np.asarray(omega_star.lo) == 0) or np.any(np.asarray(omega_star.hi) == np.asarray(limit))
        ),
        ring_degenerate=bool(cells_hole.size == 0),
        ring_empty=False,
    )


def _box_vanishes(box: Box) -> bool:
    """A node box ``[lo, hi]`` is empty only when ``hi < lo`` on some axis."""
    return any(h < l for l, h in zip(box.lo, box.hi))


def _finish_ring(mesh: Mesh, sub: Subdomain) -> None:
    """Set ``chi_ring`` and the ring cell support ``R`` from ``chi`` and ``eta``."""
    chi_ring = np.clip(sub.chi - sub.eta, -1e-14, 1.0)
    chi_ring[chi_ring < 0] = 0.0
    sub.chi_ring = chi_ring
    positive = np.zeros(mesh.n_nodes, dtype=bool)
    positive[sub.star_nodes[chi_ring > 0]] = True
    cells = sub.cells_omega
    sub.cells_ring = cells[positive[mesh.cell_nodes[cells]].any(axis=1)]
    sub.ring_empty = sub.cells_ring.size == 0


def _multiplicity(mesh: Mesh, cell_sets: Sequence[np.ndarray]) -> int:
    count = np.zeros(mesh.n_cells, dtype=np.int64)
    for cells in cell_sets:
        count[cells] += 1
    return int(count.max()) if count.size else 0


def build_decomposition(
    mesh: Mesh,
    subdomains_per_axis: Sequence[int] | int,
    overlap_layers: int = 2,
    oversampling: int = 2,
    on_degenerate: str = "warn",
) -> Decomposition:
    """Split ``mesh`` into equal bricks with overlap and oversampling layers.

    Parameters
    ----------
    subdomains_per_axis : bricks per axis; must divide the cell counts.
    overlap_layers : fine layers added to each brick to form ``omega``.
    oversampling : fine layers ``l >= 1`` added to ``omega`` (and to ``R``).
    on_degenerate : ``"warn"``, ``"error"`` or ``"ignore"`` when a ring has
        no hole (``R_star == omega_star``).
    """
    dim = mesh.dim
    counts = tuple(int(c) for c in np.broadcast_to(np.asarray(subdomains_per_axis), (dim,)))
    if any(c < 1 for c in counts):
        raise ValueError(f"subdomain counts must be positive, got {counts}")
    if any(n % c for n, c in zip(mesh.cells_per_axis, counts)):
        raise ValueError(f"subdomain counts {counts} do not divide cells {mesh.cells_per_axis}")
    if oversampling < 1:
        raise ValueError(f"oversampling must be >= 1, got {oversampling}")
    if overlap_layers < 1:
        raise ValueError(f"overlap_layers must be >= 1, got {overlap_layers}")
    bricks = [n // c for n, c in zip(mesh.cells_per_axis, counts)]
    for k, b in enumerate(bricks):
        if counts[k] > 1 and b < 2 * overlap_layers:
            raise ValueError(
                f"brick width {b} along axis {k} is below twice the overlap ({overlap_layers}); "
                "the overlap ramps would collide"
            )

    subs: list[Subdomain] = []
    n_sub = int(np.prod(counts))
    for i in range(n_sub):
        gi = np.unravel_index(i, counts, order="F")
        lo = tuple(int(g) * b for g, b in zip(gi, bricks))
        hi = tuple(l + b for l, b in zip(lo, bricks))
        subs.append(make_subdomain(mesh, i, gi, Box(lo, hi), overlap_layers, oversampling))

    # normalize chi so that it sums to one at every node
    total = np.zeros(mesh.n_nodes)
    for s in subs:
        np.add.at(total, s.star_nodes, s.chi)
    if np.any(total <= 0):
        bad = int(np.flatnonzero(total <= 0)[0])
        raise ValueError(f"node {bad} is covered by no subdomain; partition of unity undefined")
    for s in subs:
        s.chi = s.chi / total[s.star_nodes]
        _finish_ring(mesh, s)

    notes = []
    for s in subs:
        if s.ring_empty:
            notes.append(f"subdomain {s.index}: ring R is empty (chi_ring vanishes)")
        elif s.ring_degenerate:
            notes.append(f"subdomain {s.index}: ring degenerate (R_star has no hole)")
    if notes and on_degenerate != "ignore":
        msg = "; ".join(notes)
        if on_degenerate == "error":
            raise ValueError(msg)
        warnings.warn(msg, stacklevel=2)

    return Decomposition(
        mesh=mesh,
        subdomains_per_axis=counts,
        overlap_layers=overlap_layers,
        oversampling=oversampling,
        subdomains=subs,
        kappa=_multiplicity(mesh, [s.cells_omega for s in subs]),
        kappa_star=_multiplicity(mesh, [s.cells_star for s in subs]),
        notes=notes,
    )


def single_subdomain(
    mesh: Mesh,
    brick_lo: Sequence[int],
    brick_hi: Sequence[int],
    overlap_layers: int = 1,
    oversampling: int = 1,
) -> Decomposition:
    """One free-standing subdomain, as if cut out of a larger decomposition.

    Used for timing a single local eigenproblem. The weight ``chi`` is the
    unnormalized ramp (neighbours are not present), so the decomposition
    is flagged as not forming a partition of unity.
    """
    brick = Box(tuple(int(x) for x in brick_lo), tuple(int(x) for x in brick_hi))
    sub = make_subdomain(mesh, 0, (0,) * mesh.dim, brick, overlap_layers, oversampling)
    _finish_ring(mesh, sub)
    return Decomposition(
        mesh=mesh,
        subdomains_per_axis=(1,) * mesh.dim,
        overlap_layers=overlap_layers,
        oversampling=oversampling,
        subdomains=[sub],
        kappa=1,
        kappa_star=1,
        partition_of_unity=False,
    )


@dataclass(frozen=True)
class PartitionOfUnity:
    """Nodal weights of all subdomains with gradient-bound certificates."""

    decomposition: Decomposition
    c_chi: np.ndarray  # max |grad chi_i| * delta_i per subdomain
    c_chi_ring: np.ndarray

    def chi(self, i: int) -> tuple[np.ndarray, np.ndarray]:
        return self.decomposition[i].node_weights("chi")

    def eta(self, i: int) -> tuple[np.ndarray, np.ndarray]:
        return self.decomposition[i].node_weights("eta")

    def chi_ring(self, i: int) -> tuple[np.ndarray, np.ndarray]:
        return self.decomposition[i].node_weights("chi_ring")

    def sum_chi(self) -> np.ndarray:
        dec = self.decomposition
        total = np.zeros(dec.mesh.n_nodes)
        for s in dec:
            np.add.at(total, s.star_nodes, s.chi)
        return total


def max_gradient(mesh: Mesh, nodes: np.ndarray, values: np.ndarray, cells: np.ndarray) -> float:
    """Largest gradient magnitude of the Q1 interpolant over ``cells``.

    For multilinear functions each partial derivative is multilinear in the
    other coordinates, so the maximum of ``|grad u|`` over a cell is reached
    at a corner, where the partials are edge difference quotients.
    """
    full = np.zeros(mesh.n_nodes)
    full[nodes] = values
    corner = full[mesh.cell_nodes[cells]]  # (n_cells, 2**dim)
    dim = mesh.dim
    best = 0.0
    for c in range(2**dim):
        sq = np.zeros(cells.size)
        for k in range(dim):
            partner = c ^ (1 << k)
            sq += ((corner[:, c] - corner[:, partner]) / mesh.h[k]) ** 2
        best = max(best, float(np.sqrt(sq.max(initial=0.0))))
    return best


def build_partition_of_unity(decomposition: Decomposition) -> PartitionOfUnity:
    mesh = decomposition.mesh
    c_chi, c_ring = [], []
    for s in decomposition:
        delta = s.overlap_width or 0.0
        c_chi.append(max_gradient(mesh, s.star_nodes, s.chi, s.cells_omega) * delta)
        c_ring.append(max_gradient(mesh, s.star_nodes, s.chi_ring, s.cells_omega) * delta)
    return PartitionOfUnity(decomposition, np.array(c_chi), np.array(c_ring))


def ring_of(decomposition: Decomposition, i: int) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    """Cell sets ``(R_i, R_star_i, omega_tilde_i)``."""
    s = decomposition[i]
    return s.cells_ring, s.cells_ring_star, s.cells_tilde


__all__ = [
    "Box",
    "Decomposition",
    "PartitionOfUnity",
    "Subdomain",
    "box_indices",
    "build_decomposition",
    "build_partition_of_unity",
    "make_subdomain",
    "max_gradient",
    "ring_of",
    "single_subdomain",
]

"""Cell-wise constant scalar coefficient fields and their generators."""

from __future__ import annotations

from dataclasses import dataclass
from pathlib import Path
from typing import Sequence

import numpy as np

from .fem import Mesh, box_indices


@dataclass(frozen=True)
class CoefficientField:
    """Positive scalar conductivity ``A(x)`` given per cell of ``mesh``."""

    mesh: Mesh
    values: np.ndarray

    def __post_init__(self):
        vals = np.array(self.values, dtype=float).ravel()
        if vals.size != self.mesh.n_cells:
            raise ValueError(f"expected {self.mesh.n_cells} cell values, got {vals.size}")
        bad = np.flatnonzero(~(vals > 0) | ~np.isfinite(vals))
        if bad.size:
            c = int(bad[0])
            raise ValueError(
                f"coefficient must be positive and finite; cell {c} "
                f"(multi-index {self.mesh.cell_multi_index()[c].tolist()}) has value {vals[c]!r}"
            )
        vals.setflags(write=False)
        object.__setattr__(self, "values", vals)

    @property
    def alpha_min(self) -> float:
        return float(self.values.min())

    @property
    def alpha_max(self) -> float:
        return float(self.values.max())

    @property
    def contrast(self) -> float:
        return self.alpha_max / self.alpha_min

    def local_contrast(self, cells: np.ndarray) -> float:
        """Contrast ``max / min`` over a cell subset (1 for an empty set)."""
        vals = self.values[np.asarray(cells, dtype=np.int64)]
        return float(vals.max() / vals.min()) if vals.size else 1.0


def constant_field(mesh: Mesh, c: float = 1.0) -> CoefficientField:
    if not c > 0:
        raise ValueError(f"constant coefficient must be positive, got {c}")
    return CoefficientField(mesh, np.full(mesh.n_cells, float(c)))


def skyscraper_field(
    mesh: Mesh,
    seed: int,
    block_size: int,
    high_value: float,
    fill_fraction: float = 0.3,
) -> CoefficientField:
    """Random "skyscraper" blocks on a unit background.

    The mesh is tiled by cubes of ``block_size`` cells. Each block is raised
    with probability ``fill_fraction`` to a height drawn log-uniformly from
    ``[1, high_value]``; the tallest raised block is then set to exactly
    ``high_value`` so the field's contrast equals ``high_value``. At least
    one block stays at the background value whenever there is more than one.
    """
    if block_size < 1 or any(n % block_size for n in mesh.cells_per_axis):
        raise ValueError(
            f"block_size {block_size} must divide cells_per_axis {mesh.cells_per_axis}"
        )
    if high_value < 1:
        raise ValueError(f"high_value must be >= 1, got {high_value}")
    if not 0 <= fill_fraction <= 1:
        raise ValueError(f"fill_fraction must lie in [0, 1], got {fill_fraction}")
    values = np.ones(mesh.n_cells)
    if high_value == 1:
        return CoefficientField(mesh, values)
    blocks = tuple(n // block_size for n in mesh.cells_per_axis)
    n_blocks = int(np.prod(blocks))
    rng = np.random.default_rng(seed)
    raised = rng.random(n_blocks) < fill_fraction
    heights = 10.0 ** rng.uniform(0.0, np.log10(high_value), size=n_blocks)
    if not raised.any():
        raised[int(rng.integers(n_blocks))] = True
    elif raised.all() and n_blocks > 1:
        # keep one block at the background value so the minimum stays 1
        raised[int(rng.integers(n_blocks))] = False
    tallest = np.flatnonzero(raised)[np.argmax(heights[raised])]
    heights[tallest] = high_value
    block_mi = np.stack(np.unravel_index(np.arange(n_blocks), blocks, order="F"), axis=1)
    for b in np.flatnonzero(raised):
        lo = block_mi[b] * block_size
        values[box_indices(mesh.cells_per_axis, lo, lo + block_size)] = heights[b]
    return CoefficientField(mesh, values)


@dataclass(frozen=True)
class ChannelBundle:
    """Vertical channels running through one column of subdomains.

    The channels start at the centre row of subdomain row ``row_start`` and
    end at the centre row of ``row_end``. At both ends, the channels listed
    together in one entry of ``groups`` are joined by a horizontal bar.
    Channels not mentioned in any group stay unconnected.
    """

    column: int
    row_start: int
    row_end: int
    groups: tuple[tuple[int, ...], ...] = ((0, 1, 2),)


@dataclass(frozen=True)
class ChannelGeometry:
    """Layout of high-conductivity channels relative to a brick decomposition.

    Channels are placed at the same offsets inside every bundle's subdomain
    column, so two subdomains holding bundles with different ``groups``
    see identical coefficients on their rings while differing inside.
    """

    subdomains_per_axis: tuple[int, int]
    bundles: tuple[ChannelBundle, ...]
    channels: int = 3
    width: int = 2
    gap: int = 6

    @classmethod
    def default(cls, subdomains_per_axis: Sequence[int]) -> "ChannelGeometry":
        """Two bundles in neighbouring columns, fully and partially connected."""
        sx, sy = (int(s) for s in subdomains_per_axis)
        if sy < 2:
            raise ValueError("the default channel layout needs at least 2 subdomain rows")
        col_a = max(0, sx // 2 - 1)
        col_b = min(sx - 1, col_a + 1)
        rows = (max(0, sy // 2 - 1), max(0, sy // 2 - 1) + 1)
        bundles = [ChannelBundle(col_a, *rows, groups=((0, 1, 2),))]
        if col_b != col_a:
            bundles.append(ChannelBundle(col_b, *rows, groups=((0, 1),)))
        return cls((sx, sy), tuple(bundles))

    def red_cells(self, mesh: Mesh) -> np.ndarray:
        """Cell indices of the high-conductivity region."""
        if mesh.dim != 2:
            raise ValueError("channel fields are defined on 2D meshes")
        nx, ny = mesh.cells_per_axis
        sx, sy = self.subdomains_per_axis
        if nx % sx or ny % sy:
            raise ValueError(f"subdomain grid {self.subdomains_per_axis} does not divide mesh {mesh.cells_per_axis}")
        bx, by = nx // sx, ny // sy
        span = self.channels * self.width + (self.channels - 1) * self.gap
        if span > bx:
            raise ValueError(f"channel bundle ({span} cells) exceeds subdomain width ({bx} cells)")
        mask = np.zeros((nx, ny), dtype=bool)
        w = self.width
        for bundle in self.bundles:
            if not (0 <= bundle.column < sx and 0 <= bundle.row_start <= bundle.row_end < sy):
                raise ValueError(f"channel bundle {bundle} exceeds the domain")
            x0 = bundle.column * bx + (bx - span) // 2
            xs = [x0 + c * (w + self.gap) for c in range(self.channels)]
            y_lo = bundle.row_start * by + by // 2
            y_hi = bundle.row_end * by + by // 2 + w
            if y_hi > ny:
                raise ValueError(f"channel bundle {bundle} exceeds the domain")
            for x in xs:
                mask[x : x + w, y_lo:y_hi] = True
            for group in bundle.groups:
                if any(not 0 <= c < self.channels for c in group):
                    raise ValueError(f"bad channel index in group {group}")
                left, right = xs[min(group)], xs[max(group)] + w
                mask[left:right, y_lo : y_lo + w] = True
                mask[left:right, y_hi - w : y_hi] = True
        return np.flatnonzero(mask.ravel(order="F"))


def channel_field(
    mesh: Mesh, contrast_exponent: float, geometry: ChannelGeometry | None = None
) -> CoefficientField:
    """Value ``10**j`` on the channel cells and 1 elsewhere."""
    if geometry is None:
        raise ValueError("channel_field needs a ChannelGeometry")
    values = np.ones(mesh.n_cells)
    values[geometry.red_cells(mesh)] = 10.0 ** float(contrast_exponent)
    return CoefficientField(mesh, values)


def save_field(field: CoefficientField, path: str | Path) -> None:
    """Write ``"nx ny [nz]"`` then one line per x-row of cell values."""
    mesh = field.mesh
    nx = mesh.cells_per_axis[0]
    rows = field.values.reshape(-1, nx)
    with open(path, "w") as fh:
        fh.write(" ".join(str(n) for n in mesh.cells_per_axis) + "\n")
        for row in rows:
            fh.write(" ".join(f"{v:.17g}" for v in row) + "\n")


def load_field(mesh: Mesh, path: str | Path) -> CoefficientField:
    """Read a field written by :func:`save_field` (commas are accepted too)."""
    with open(path) as fh:
        text = fh.read().replace(",", " ")
    lines = [ln for ln in text.splitlines() if ln.strip()]
    if not lines:
        raise ValueError(f"{path}: empty coefficient file")
    shape = tuple(int(t) for t in lines[0].split())
    if shape != tuple(mesh.cells_per_axis):
        raise ValueError(f"{path}: grid {shape} does not match mesh {mesh.cells_per_axis}")
    values = np.array([float(t) for ln in lines[1:] for t in ln.split()])
    if values.size != mesh.n_cells:
        raise ValueError(f"{path}: expected {mesh.n_cells} values, found {values.size}")
    return CoefficientField(mesh, values)


__all__ = [
    "ChannelBundle",
    "ChannelGeometry",
    "CoefficientField",
    "channel_field",
    "constant_field",
    "load_field",
    "save_field",
    "skyscraper_field",
]

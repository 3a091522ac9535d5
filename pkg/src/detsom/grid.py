"""The SOM lattice: node coordinates, prototype storage, BMU search, initialization.

Nodes live on a ``rows x cols`` rectangular lattice and are addressed by
1-indexed ``(row, col)`` coordinates everywhere a coordinate crosses an API or
file boundary. Internally prototypes are stored as one ``(rows*cols, dim)``
float64 array in row-major node order, which makes the first-minimum argmin
coincide with the lexicographic ``(row, col)`` tie-break.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import NamedTuple

import numpy as np

__all__ = [
    "NodeCoord",
    "SomGrid",
    "grid_distance",
    "bmu",
    "gradient_init",
    "random_init",
    "pairwise_node_distances",
    "write_grid_csv",
    "read_grid_csv",
]

# 17 significant digits round-trips any 64-bit binary float exactly.
FLOAT_FORMAT = "%.17g"


class NodeCoord(NamedTuple):
    """1-indexed (row, col) position of a node on the lattice."""

    row: int
    col: int


def grid_distance(a: NodeCoord, b: NodeCoord) -> float:
    """Euclidean distance between two lattice coordinates."""
    return math.hypot(a[0] - b[0], a[1] - b[1])


@dataclass
class SomGrid:
    """A rows x cols lattice of prototype vectors of uniform dimension."""

    rows: int
    cols: int
    dim: int
    prototypes: np.ndarray  # (rows*cols, dim) float64, row-major node order

    def __post_init__(self) -> None:
        if self.rows < 1 or self.cols < 1 or self.dim < 1:
            raise ValueError(
                f"invalid grid shape {self.rows}x{self.cols}, dim {self.dim}"
            )
        self.prototypes = np.ascontiguousarray(self.prototypes, dtype=np.float64)
        if self.prototypes.shape != (self.rows * self.cols, self.dim):
            raise ValueError(
                f"prototype array has shape {self.prototypes.shape}, "
                f"expected {(self.rows * self.cols, self.dim)}"
            )
        if not np.all(np.isfinite(self.prototypes)):
            raise ValueError("prototype components must all be finite")

    @property
    def n_nodes(self) -> int:
        return self.rows * self.cols

    def coord(self, index: int) -> NodeCoord:
        """1-indexed coordinate of the node at flat row-major ``index``."""
        if not 0 <= index < self.n_nodes:
            raise IndexError(f"node index {index} out of range")
        return NodeCoord(index // self.cols + 1, index % self.cols + 1)

    def index(self, coord: NodeCoord) -> int:
        """Flat row-major index of a 1-indexed coordinate."""
        row, col = coord
        if not (1 <= row <= self.rows and 1 <= col <= self.cols):
            raise IndexError(f"coordinate {coord!r} outside {self.rows}x{self.cols} grid")
        return (row - 1) * self.cols + (col - 1)

    def prototype(self, coord: NodeCoord) -> np.ndarray:
        """View of the prototype vector stored at ``coord``."""
        return self.prototypes[self.index(coord)]

    def copy(self) -> "SomGrid":
        return SomGrid(self.rows, self.cols, self.dim, self.prototypes.copy())


def pairwise_node_distances(rows: int, cols: int) -> np.ndarray:
    """(n_nodes, n_nodes) matrix of lattice distances in row-major node order."""
    r = np.repeat(np.arange(rows, dtype=np.float64), cols)
    c = np.tile(np.arange(cols, dtype=np.float64), rows)
    return np.hypot(r[:, None] - r[None, :], c[:, None] - c[None, :])


def _bmu_index(prototypes: np.ndarray, f: np.ndarray) -> int:
    # argmin keeps the first minimum, i.e. the lexicographically smallest
    # (row, col) under row-major node order.
    diff = prototypes - f
    d2 = np.einsum("ij,ij->i", diff, diff)
    return int(np.argmin(d2))


def bmu(grid: SomGrid, f: np.ndarray) -> NodeCoord:
    """Best match unit: node whose prototype is Euclidean-nearest to ``f``.

    Ties go to the lexicographically smallest (row, col) so the result does
    not depend on any internal evaluation order.
    """
    f = np.asarray(f, dtype=np.float64)
    if f.shape != (grid.dim,):
        raise ValueError(f"sample has shape {f.shape}, grid dimension is {grid.dim}")
    return grid.coord(_bmu_index(grid.prototypes, f))


def gradient_init(
    rows: int,
    cols: int,
    dim: int,
    feature_range: tuple[np.ndarray, np.ndarray] | None = None,
) -> SomGrid:
    """Deterministic corner-to-corner ramp initialization.

    Every component of node (a, b) gets the scalar
    ``dist((1,1),(a,b)) / dist((1,1),(rows,cols))``, a smooth 0-to-1 ramp from
    the top-left to the bottom-right corner. A 1x1 grid has zero
    corner-to-corner distance; its single prototype is defined as the zero
    vector.

    With ``feature_range=(lo, hi)`` the unit ramp is rescaled per feature to
    ``lo + v * (hi - lo)``; by default the raw unit ramp is used.
    """
    if rows < 1 or cols < 1 or dim < 1:
        raise ValueError(f"invalid grid shape {rows}x{cols}, dim {dim}")
    r = np.repeat(np.arange(rows, dtype=np.float64), cols)
    c = np.tile(np.arange(cols, dtype=np.float64), rows)
    denom = math.hypot(rows - 1, cols - 1)
    if denom == 0.0:
        ramp = np.zeros(rows * cols)
    else:
        ramp = np.hypot(r, c) / denom
    protos = np.repeat(ramp[:, None], dim, axis=1)
    if feature_range is not None:
        lo = np.broadcast_to(np.asarray(feature_range[0], dtype=np.float64), (dim,))
        hi = np.broadcast_to(np.asarray(feature_range[1], dtype=np.float64), (dim,))
        if np.any(lo > hi):
            raise ValueError("feature_range lower bound exceeds upper bound")
        protos = lo + protos * (hi - lo)
    return SomGrid(rows, cols, dim, protos)


def random_init(
    rows: int,
    cols: int,
    dim: int,
    seed: int,
    lo: np.ndarray,
    hi: np.ndarray,
) -> SomGrid:
    """Seeded uniform initialization over per-feature intervals [lo_i, hi_i].

    Values come from numpy's PCG64 generator (``numpy.random.default_rng``)
    seeded with ``seed``; the stream is consumed in row-major node order,
    component order within each node, so the same seed always reproduces the
    same grid.
    """
    if rows < 1 or cols < 1 or dim < 1:
        raise ValueError(f"invalid grid shape {rows}x{cols}, dim {dim}")
    lo = np.broadcast_to(np.asarray(lo, dtype=np.float64), (dim,))
    hi = np.broadcast_to(np.asarray(hi, dtype=np.float64), (dim,))
    if not (np.all(np.isfinite(lo)) and np.all(np.isfinite(hi))):
        raise ValueError("init bounds must be finite")
    if np.any(lo > hi):
        raise ValueError("lower init bound exceeds upper bound")
    rng = np.random.default_rng(seed)
    protos = rng.uniform(lo, hi, size=(rows * cols, dim))
    return SomGrid(rows, cols, dim, protos)


def write_grid_csv(grid: SomGrid, path) -> None:
    """Serialize a grid as CSV: header ``row,col,f0..f{D-1}``, rows sorted by
    (row, col), floats printed with 17 significant digits (round-trip exact).
    """
    header = "row,col," + ",".join(f"f{i}" for i in range(grid.dim))
    lines = [header]
    for k in range(grid.n_nodes):
        row, col = grid.coord(k)
        values = ",".join(FLOAT_FORMAT % v for v in grid.prototypes[k])
        lines.append(f"{row},{col},{values}")
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        fh.write("\n".join(lines) + "\n")


def read_grid_csv(path) -> SomGrid:
    """Read a grid written by :func:`write_grid_csv`."""
    with open(path, "r", encoding="utf-8") as fh:
        lines = [ln.strip() for ln in fh if ln.strip()]
    if not lines:
        raise ValueError(f"{path}: empty grid file")
    header = lines[0].split(",")
    if len(header) < 3 or header[:2] != ["row", "col"]:
        raise ValueError(f"{path}: unexpected grid header {lines[0]!r}")
    dim = len(header) - 2
    coords = []
    values = []
    for ln in lines[1:]:
        parts = ln.split(",")
        if len(parts) != dim + 2:
            raise ValueError(f"{path}: row has {len(parts)} fields, expected {dim + 2}")
        coords.append((int(parts[0]), int(parts[1])))
        values.append([float(v) for v in parts[2:]])
    rows = max(r for r, _ in coords)
    cols = max(c for _, c in coords)
    if sorted(coords) != [(r, c) for r in range(1, rows + 1) for c in range(1, cols + 1)]:
        raise ValueError(f"{path}: node coordinates do not form a complete grid")
    order = np.lexsort((
        np.array([c for _, c in coords]),
        np.array([r for r, _ in coords]),
    ))
    protos = np.asarray(values, dtype=np.float64)[order]
    return SomGrid(rows, cols, dim, protos)

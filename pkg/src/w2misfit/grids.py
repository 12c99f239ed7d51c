"""Uniform 2D grids, scalar fields, and the nine-point finite-difference stencils.

All stencil operators act on the full nine-point neighbourhood of a node and
are exact on quadratic polynomials.  Indices are 0-based; node (i, j) sits at
(x1_min + i*dx, x2_min + j*dx).
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .errors import GridMismatch

SQRT2 = math.sqrt(2.0)


@dataclass(frozen=True)
class Grid2D:
    """Uniform grid with square cells covering a rectangle."""

    n1: int
    n2: int
    x1_min: float
    x1_max: float
    x2_min: float
    x2_max: float

    def __post_init__(self):
        if self.n1 < 3 or self.n2 < 3:
            raise ValueError(f"grid needs at least 3 points per axis, got {self.n1}x{self.n2}")
        dx1 = (self.x1_max - self.x1_min) / (self.n1 - 1)
        dx2 = (self.x2_max - self.x2_min) / (self.n2 - 1)
        if dx1 <= 0 or dx2 <= 0:
            raise ValueError("grid extents must be increasing")
        if abs(dx1 - dx2) > 1e-12 * max(abs(dx1), abs(dx2)):
            raise ValueError(f"cells must be square: dx1={dx1!r}, dx2={dx2!r}")

    @property
    def dx(self) -> float:
        return (self.x1_max - self.x1_min) / (self.n1 - 1)

    def x1(self) -> np.ndarray:
        return self.x1_min + self.dx * np.arange(self.n1)

    def x2(self) -> np.ndarray:
        return self.x2_min + self.dx * np.arange(self.n2)

    def meshgrid(self):
        """Node coordinates as two (n1, n2) arrays."""
        return np.meshgrid(self.x1(), self.x2(), indexing="ij")

    def node_position(self, i: int, j: int):
        return (self.x1_min + i * self.dx, self.x2_min + j * self.dx)


@dataclass
class GridField:
    """Scalar field sampled at the nodes of a Grid2D.

    values has shape (n1, n2), axis 0 along x1.
    """

    grid: Grid2D
    values: np.ndarray = field(repr=False)

    def __post_init__(self):
        self.values = np.asarray(self.values, dtype=float)
        if self.values.shape != (self.grid.n1, self.grid.n2):
            raise ValueError(
                f"values shape {self.values.shape} does not match grid "
                f"({self.grid.n1}, {self.grid.n2})"
            )
        if not np.all(np.isfinite(self.values)):
            raise ValueError("field values must be finite")

    def copy(self) -> "GridField":
        return GridField(self.grid, self.values.copy())

    def same_grid(self, other: "GridField") -> bool:
        return self.grid == other.grid

    def require_same_grid(self, other: "GridField"):
        if not self.same_grid(other):
            raise GridMismatch(f"grids differ: {self.grid} vs {other.grid}")


def field_from_function(grid: Grid2D, fn) -> GridField:
    """Sample fn(x1, x2) (vectorized) at the grid nodes."""
    xx1, xx2 = grid.meshgrid()
    return GridField(grid, np.asarray(fn(xx1, xx2), dtype=float))


# --- nine-point stencil operators -------------------------------------------
#
# Second differences along the axes and the two diagonals, and the matching
# first differences.  Callers must keep (i, j) strictly interior; numpy raises
# on the resulting negative/overflowing neighbour indices otherwise.


def _check_interior(u: np.ndarray, i: int, j: int):
    n1, n2 = u.shape
    if not (1 <= i <= n1 - 2 and 1 <= j <= n2 - 2):
        raise IndexError(f"node ({i}, {j}) has no full interior stencil in {n1}x{n2} grid")


def d_x1x1(f: GridField, i: int, j: int) -> float:
    u, dx = f.values, f.grid.dx
    _check_interior(u, i, j)
    return (u[i + 1, j] + u[i - 1, j] - 2.0 * u[i, j]) / dx**2


def d_x2x2(f: GridField, i: int, j: int) -> float:
    u, dx = f.values, f.grid.dx
    _check_interior(u, i, j)
    return (u[i, j + 1] + u[i, j - 1] - 2.0 * u[i, j]) / dx**2


def d_x1(f: GridField, i: int, j: int) -> float:
    u, dx = f.values, f.grid.dx
    _check_interior(u, i, j)
    return (u[i + 1, j] - u[i - 1, j]) / (2.0 * dx)


def d_x2(f: GridField, i: int, j: int) -> float:
    u, dx = f.values, f.grid.dx
    _check_interior(u, i, j)
    return (u[i, j + 1] - u[i, j - 1]) / (2.0 * dx)


def d_vv(f: GridField, i: int, j: int) -> float:
    u, dx = f.values, f.grid.dx
    _check_interior(u, i, j)
    return (u[i + 1, j + 1] + u[i - 1, j - 1] - 2.0 * u[i, j]) / (2.0 * dx**2)


def d_vpvp(f: GridField, i: int, j: int) -> float:
    # Second difference along (1, -1)/sqrt(2), the mate of d_vv.
    u, dx = f.values, f.grid.dx
    _check_interior(u, i, j)
    return (u[i + 1, j - 1] + u[i - 1, j + 1] - 2.0 * u[i, j]) / (2.0 * dx**2)


def d_v(f: GridField, i: int, j: int) -> float:
    u, dx = f.values, f.grid.dx
    _check_interior(u, i, j)
    return (u[i + 1, j + 1] - u[i - 1, j - 1]) / (2.0 * SQRT2 * dx)


def d_vp(f: GridField, i: int, j: int) -> float:
    u, dx = f.values, f.grid.dx
    _check_interior(u, i, j)
    return (u[i + 1, j - 1] - u[i - 1, j + 1]) / (2.0 * SQRT2 * dx)


# Vectorized interior versions used by the solver; each returns an
# (n1-2, n2-2) array covering every interior node.


def interior_d_x1x1(u: np.ndarray, dx: float) -> np.ndarray:
    return (u[2:, 1:-1] + u[:-2, 1:-1] - 2.0 * u[1:-1, 1:-1]) / dx**2


def interior_d_x2x2(u: np.ndarray, dx: float) -> np.ndarray:
    return (u[1:-1, 2:] + u[1:-1, :-2] - 2.0 * u[1:-1, 1:-1]) / dx**2


def interior_d_x1(u: np.ndarray, dx: float) -> np.ndarray:
    return (u[2:, 1:-1] - u[:-2, 1:-1]) / (2.0 * dx)


def interior_d_x2(u: np.ndarray, dx: float) -> np.ndarray:
    return (u[1:-1, 2:] - u[1:-1, :-2]) / (2.0 * dx)


def interior_d_vv(u: np.ndarray, dx: float) -> np.ndarray:
    return (u[2:, 2:] + u[:-2, :-2] - 2.0 * u[1:-1, 1:-1]) / (2.0 * dx**2)


def interior_d_vpvp(u: np.ndarray, dx: float) -> np.ndarray:
    return (u[2:, :-2] + u[:-2, 2:] - 2.0 * u[1:-1, 1:-1]) / (2.0 * dx**2)


def interior_d_v(u: np.ndarray, dx: float) -> np.ndarray:
    return (u[2:, 2:] - u[:-2, :-2]) / (2.0 * SQRT2 * dx)


def interior_d_vp(u: np.ndarray, dx: float) -> np.ndarray:
    return (u[2:, :-2] - u[:-2, 2:]) / (2.0 * SQRT2 * dx)


def interior_d_x1x2(u: np.ndarray, dx: float) -> np.ndarray:
    """Centered mixed second difference (used by the higher-order scheme)."""
    return (u[2:, 2:] + u[:-2, :-2] - u[2:, :-2] - u[:-2, 2:]) / (4.0 * dx**2)


# --- CSV serialization -------------------------------------------------------
#
# Line 1: n1,n2,x1_min,x1_max,x2_min,x2_max
# Lines 2..n2+1: the n1 values of row j (fixed x2), 17 significant digits.


def _fmt(x: float) -> str:
    return format(float(x), ".17g")


def write_field_csv(f: GridField, path):
    g = f.grid
    with open(path, "w") as fh:
        fh.write(",".join([str(g.n1), str(g.n2), _fmt(g.x1_min), _fmt(g.x1_max),
                           _fmt(g.x2_min), _fmt(g.x2_max)]) + "\n")
        for j in range(g.n2):
            fh.write(",".join(_fmt(v) for v in f.values[:, j]) + "\n")


def read_field_csv(path) -> GridField:
    with open(path) as fh:
        lines = [ln.strip() for ln in fh if ln.strip()]
    if not lines:
        raise ValueError(f"{path}: empty field file")
    head = lines[0].split(",")
    if len(head) != 6:
        raise ValueError(f"{path}: line 1: expected 6 header values, got {len(head)}")
    try:
        n1, n2 = int(head[0]), int(head[1])
        extents = [float(v) for v in head[2:]]
    except ValueError as e:
        raise ValueError(f"{path}: line 1: {e}") from e
    grid = Grid2D(n1, n2, *extents)
    if len(lines) - 1 != n2:
        raise ValueError(f"{path}: expected {n2} data lines, got {len(lines) - 1}")
    values = np.empty((n1, n2))
    for j in range(n2):
        parts = lines[1 + j].split(",")
        if len(parts) != n1:
            raise ValueError(f"{path}: line {j + 2}: expected {n1} values, got {len(parts)}")
        try:
            values[:, j] = [float(p) for p in parts]
        except ValueError as e:
            raise ValueError(f"{path}: line {j + 2}: {e}") from e
    return GridField(grid, values)

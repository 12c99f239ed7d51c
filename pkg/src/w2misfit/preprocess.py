"""Turn raw signed signals into admissible transport data.

Pipeline: split signs, normalize mass, pad the support up to a convex
rectangle with a small constant layer, and smooth so that the density ratio
stays Lipschitz.  The output DensityPair carries the source/target rectangles
that the boundary conditions of the solver need.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .errors import MassMismatchUnresolvable, SupportTooLarge, ZeroMass
from .grids import Grid2D, GridField

__all__ = [
    "Rect", "DensityPair", "PreprocessParams", "split_signs", "mass",
    "normalize_mass", "smooth", "convexify", "lipschitz_bound",
    "prepare_signed_pair", "normalize_mass_components", "embed",
]


@dataclass(frozen=True)
class Rect:
    x1_min: float
    x1_max: float
    x2_min: float
    x2_max: float

    @property
    def width1(self) -> float:
        return self.x1_max - self.x1_min

    @property
    def width2(self) -> float:
        return self.x2_max - self.x2_min

    def clamp(self, p1, p2):
        return (np.clip(p1, self.x1_min, self.x1_max),
                np.clip(p2, self.x2_min, self.x2_max))


@dataclass
class DensityPair:
    """Admissible source/target densities for the transport solver.

    f lives on the rectangle X, g on Y; both rectangles have identical
    dimensions and both densities integrate to one.  theta is the guaranteed
    positive floor of both densities on their rectangles.  f_core holds the
    normalized pre-padding source density (used to threshold displacement
    vectors inside the artificial layer).
    """

    f: GridField
    g: GridField
    X: Rect
    Y: Rect
    theta: float
    total_mass: float = 1.0
    f_core: np.ndarray | None = field(default=None, repr=False)


@dataclass
class PreprocessParams:
    """Flat preprocessing configuration (lengths in units of dx)."""

    theta_rel: float = 0.01
    sigma_rel: float = 2.0
    margin_cells: int = 2


def mass(f: GridField) -> float:
    """Discrete integral with uniform weight dx^2 at every node."""
    return float(np.sum(f.values)) * f.grid.dx**2


def split_signs(s: GridField) -> tuple[GridField, GridField]:
    """Positive and negative parts; s = plus - minus exactly."""
    plus = np.maximum(s.values, 0.0)
    minus = np.maximum(-s.values, 0.0)
    return GridField(s.grid, plus), GridField(s.grid, minus)


def normalize_mass(f: GridField, g: GridField) -> tuple[GridField, GridField]:
    """Scale each field by a positive constant so both have unit mass."""
    mf, mg = mass(f), mass(g)
    if mf <= 0.0:
        raise ZeroMass(f"source has non-positive mass {mf}")
    if mg <= 0.0:
        raise ZeroMass(f"target has non-positive mass {mg}")
    return GridField(f.grid, f.values / mf), GridField(g.grid, g.values / mg)


def normalize_mass_components(f: GridField, g: GridField,
                              masks: list[np.ndarray]) -> tuple[GridField, GridField]:
    """Rescale g so each user-masked component matches f's mass on that mask.

    Optional alternative to the global scaling; the caller supplies the
    component segmentation as boolean masks.
    """
    fv, gv = f.values.copy(), g.values.copy()
    for m in masks:
        mf = float(np.sum(fv[m]))
        mg = float(np.sum(gv[m]))
        if mf <= 0.0 or mg <= 0.0:
            raise ZeroMass("component mask with non-positive mass")
        gv[m] *= mf / mg
    return normalize_mass(GridField(f.grid, fv), GridField(g.grid, gv))


def embed(f: GridField, pad1: int, pad2: int) -> GridField:
    """Zero-extend the field by pad1/pad2 cells on each side of each axis.

    Useful before convexify when the signal's support reaches the grid edge,
    so that the padded rectangle centred at the centre of mass still fits.
    """
    if pad1 < 0 or pad2 < 0:
        raise ValueError("padding must be nonnegative")
    g = f.grid
    big = Grid2D(g.n1 + 2 * pad1, g.n2 + 2 * pad2,
                 g.x1_min - pad1 * g.dx, g.x1_max + pad1 * g.dx,
                 g.x2_min - pad2 * g.dx, g.x2_max + pad2 * g.dx)
    v = np.zeros((big.n1, big.n2))
    v[pad1:pad1 + g.n1, pad2:pad2 + g.n2] = f.values
    return GridField(big, v)


def _gaussian_kernel(sigma_cells: float) -> np.ndarray:
    radius = int(math.ceil(3.0 * sigma_cells))
    k = np.arange(-radius, radius + 1, dtype=float)
    w = np.exp(-0.5 * (k / sigma_cells) ** 2)
    return w / w.sum()


def smooth(f: GridField, sigma: float) -> GridField:
    """Convolve with a truncated (3 sigma) Gaussian, kernel renormalized to 1.

    sigma is in physical length units; sigma = 0 returns the input unchanged.
    Zero padding outside the grid: mass is preserved as long as the support
    stays a kernel radius away from the edges.
    """
    if sigma < 0:
        raise ValueError("sigma must be nonnegative")
    if sigma == 0.0:
        return f.copy()
    w = _gaussian_kernel(sigma / f.grid.dx)
    v = f.values
    v = np.apply_along_axis(lambda col: np.convolve(col, w, mode="same"), 0, v)
    v = np.apply_along_axis(lambda row: np.convolve(row, w, mode="same"), 1, v)
    return GridField(f.grid, v)


def _center_of_mass(f: GridField) -> tuple[float, float]:
    v = f.values
    tot = v.sum()
    if tot <= 0:
        raise ZeroMass("cannot locate centre of mass of a zero field")
    x1, x2 = f.grid.x1(), f.grid.x2()
    c1 = float((v.sum(axis=1) @ x1) / tot)
    c2 = float((v.sum(axis=0) @ x2) / tot)
    return c1, c2


def _support_halfwidths(f: GridField, c1: float, c2: float) -> tuple[int, int]:
    """Cells needed on each side of the centre node to cover supp f."""
    # support up to a tiny relative floor, so sampled bumps with analytically
    # nonzero tails still get finite boxes
    idx = np.argwhere(f.values > 1e-10 * f.values.max())
    if idx.size == 0:
        raise ZeroMass("field has empty support")
    dx = f.grid.dx
    ci = int(round((c1 - f.grid.x1_min) / dx))
    cj = int(round((c2 - f.grid.x2_min) / dx))
    h1 = int(max(abs(int(idx[:, 0].min()) - ci), abs(int(idx[:, 0].max()) - ci)))
    h2 = int(max(abs(int(idx[:, 1].min()) - cj), abs(int(idx[:, 1].max()) - cj)))
    return h1, h2


def _crop(f: GridField, ci: int, cj: int, h1: int, h2: int) -> GridField:
    g = f.grid
    i0, i1 = ci - h1, ci + h1
    j0, j1 = cj - h2, cj + h2
    if i0 < 0 or j0 < 0 or i1 > g.n1 - 1 or j1 > g.n2 - 1:
        raise SupportTooLarge(
            f"padded rectangle [{i0},{i1}]x[{j0},{j1}] exceeds grid {g.n1}x{g.n2}")
    sub = Grid2D(2 * h1 + 1, 2 * h2 + 1,
                 g.x1_min + i0 * g.dx, g.x1_min + i1 * g.dx,
                 g.x2_min + j0 * g.dx, g.x2_min + j1 * g.dx)
    return GridField(sub, f.values[i0:i1 + 1, j0:j1 + 1].copy())


def convexify(f: GridField, g: GridField, theta: float,
              margin_cells: int = 2) -> DensityPair:
    """Pad both densities onto equal-size rectangles centred at their centres
    of mass and add a constant theta layer inside each rectangle.

    theta is interpreted on the unit-mass scale: both inputs are normalized
    before padding, and both outputs are renormalized afterwards.
    """
    if theta <= 0:
        raise ValueError("theta must be positive")
    if np.any(f.values < 0) or np.any(g.values < 0):
        raise ValueError("convexify expects nonnegative densities")
    f, g = normalize_mass(f, g)
    dx = f.grid.dx
    cf = _center_of_mass(f)
    cg = _center_of_mass(g)
    hf = _support_halfwidths(f, *cf)
    hg = _support_halfwidths(g, *cg)
    # Common rectangle size: componentwise max of the two tight boxes plus margin.
    h1 = max(hf[0], hg[0]) + margin_cells
    h2 = max(hf[1], hg[1]) + margin_cells
    if 2 * h1 + 1 < 3 or 2 * h2 + 1 < 3:
        h1, h2 = max(h1, 1), max(h2, 1)
    cfi = int(round((cf[0] - f.grid.x1_min) / dx))
    cfj = int(round((cf[1] - f.grid.x2_min) / dx))
    cgi = int(round((cg[0] - g.grid.x1_min) / dx))
    cgj = int(round((cg[1] - g.grid.x2_min) / dx))
    f_c = _crop(f, cfi, cfj, h1, h2)
    g_c = _crop(g, cgi, cgj, h1, h2)

    def pad(core: GridField) -> tuple[GridField, np.ndarray, float]:
        padded = core.values + theta
        m = padded.sum() * dx**2
        return GridField(core.grid, padded / m), core.values / m, theta / m

    f_p, f_core, floor_f = pad(f_c)
    g_p, _, floor_g = pad(g_c)
    X = Rect(f_c.grid.x1_min, f_c.grid.x1_max, f_c.grid.x2_min, f_c.grid.x2_max)
    Y = Rect(g_c.grid.x1_min, g_c.grid.x1_max, g_c.grid.x2_min, g_c.grid.x2_max)
    return DensityPair(f=f_p, g=g_p, X=X, Y=Y, theta=min(floor_f, floor_g),
                       total_mass=1.0, f_core=f_core)


def lipschitz_bound(pair: DensityPair) -> float:
    """Bound on the Lipschitz constant (in y) of f(x)/g(y): max f * max|grad g| / theta^2."""
    g = pair.g
    dx = g.grid.dx
    v = g.values
    g1 = (v[2:, 1:-1] - v[:-2, 1:-1]) / (2 * dx)
    g2 = (v[1:-1, 2:] - v[1:-1, :-2]) / (2 * dx)
    grad_max = float(np.sqrt(g1**2 + g2**2).max()) if g1.size else 0.0
    return float(pair.f.values.max()) * grad_max / pair.theta**2


def prepare_signed_pair(f: GridField, g: GridField,
                        params: PreprocessParams | None = None,
                        ) -> dict[str, DensityPair | None]:
    """Full preprocessing of a signed signal pair.

    Returns {"plus": DensityPair|None, "minus": DensityPair|None}; a part is
    None when it has zero mass in both signals (its misfit contribution is 0).
    """
    params = params or PreprocessParams()
    f.require_same_grid(g)
    fp, fm = split_signs(f)
    gp, gm = split_signs(g)
    out: dict[str, DensityPair | None] = {}
    for name, (a, b) in {"plus": (fp, gp), "minus": (fm, gm)}.items():
        ma, mb = mass(a), mass(b)
        if ma <= 0.0 and mb <= 0.0:
            out[name] = None
            continue
        if ma <= 0.0 or mb <= 0.0:
            raise MassMismatchUnresolvable(
                f"{name} component has mass in exactly one signal "
                f"(source {ma:g}, target {mb:g})")
        sigma = params.sigma_rel * f.grid.dx
        a_s, b_s = smooth(a, sigma), smooth(b, sigma)
        theta = params.theta_rel * float(b_s.values.max()) / mass(b_s)
        out[name] = convexify(a_s, b_s, theta, margin_cells=params.margin_cells)
    return out

"""Shared builders for the test suite."""

from pathlib import Path

import numpy as np
import pytest

from w2misfit.grids import Grid2D, GridField, field_from_function
from w2misfit.preprocess import DensityPair, Rect

FIXTURES = Path(__file__).parent / "fixtures"


@pytest.fixture
def fixtures_dir() -> Path:
    return FIXTURES


def blob(c1, c2, r=0.35):
    """Compactly supported cos^2 bump centred at (c1, c2)."""
    def fn(x1, x2):
        d = np.sqrt((x1 - c1) ** 2 + (x2 - c2) ** 2)
        return np.where(d < r, np.cos(np.pi * d / (2 * r)) ** 2, 0.0)
    return fn


def uniform_pair(n=17, lo=0.0, hi=1.0) -> DensityPair:
    """f = g = 1 on the unit square; the optimal map is the identity."""
    g = Grid2D(n, n, lo, hi, lo, hi)
    ones = np.ones((n, n))
    rect = Rect(lo, hi, lo, hi)
    return DensityPair(f=GridField(g, ones), g=GridField(g, ones),
                       X=rect, Y=rect, theta=1.0)


def translation_pair(n=33, shift=0.25) -> DensityPair:
    """Uniform densities on two rectangles offset by (shift, 0).

    The exact optimal map is the translation x -> x + (shift, 0) and
    W2^2 = shift^2 (unit total mass).
    """
    gf = Grid2D(n, n, 0.0, 1.0, 0.0, 1.0)
    gg = Grid2D(n, n, shift, 1.0 + shift, 0.0, 1.0)
    ones = np.ones((n, n))
    return DensityPair(f=GridField(gf, ones), g=GridField(gg, ones),
                       X=Rect(0.0, 1.0, 0.0, 1.0),
                       Y=Rect(shift, 1.0 + shift, 0.0, 1.0), theta=1.0)


def gaussian_floor_profile(x, mu, sigma, floor=0.25):
    return np.exp(-0.5 * ((x - mu) / sigma) ** 2) + floor


def separable_pair(n, mu_f=0.45, mu_g=0.55, s_f=0.16, s_g=0.22) -> DensityPair:
    """Smooth separable densities on the unit square (trapezoid-normalized).

    Both factors carry a 0.25 floor, so the pair is admissible on the full
    square without padding.
    """
    g = Grid2D(n, n, 0.0, 1.0, 0.0, 1.0)
    x = g.x1()
    fv = np.outer(gaussian_floor_profile(x, mu_f, s_f),
                  gaussian_floor_profile(x, 0.5, s_f))
    gv = np.outer(gaussian_floor_profile(x, mu_g, s_g),
                  gaussian_floor_profile(x, 0.5, s_g))
    w = np.ones(n)
    w[0] = w[-1] = 0.5
    weights = np.outer(w, w)
    fv /= (fv * weights).sum() * g.dx**2
    gv /= (gv * weights).sum() * g.dx**2
    rect = Rect(0.0, 1.0, 0.0, 1.0)
    return DensityPair(f=GridField(g, fv), g=GridField(g, gv), X=rect, Y=rect,
                       theta=min(fv.min(), gv.min()), f_core=fv)


def blob_fields(n=64):
    """The shipped translation example as in-memory fields."""
    g = Grid2D(n, n, 0.0, 2.0, 0.0, 2.0)
    f = field_from_function(g, blob(0.8, 1.0))
    h = field_from_function(g, blob(1.1, 1.0))
    return f, h

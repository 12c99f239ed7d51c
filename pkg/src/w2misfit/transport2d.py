"""Post-processing of a solved potential: distance, displacement, amplitude."""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .grids import GridField
from .ma_solver import Potential
from .preprocess import DensityPair

__all__ = ["TransportResult", "potential_gradient", "w2_from_potential",
           "displacement_field", "registered_amplitude",
           "write_displacement_csv"]


@dataclass
class TransportResult:
    w2_squared: float
    displacement: np.ndarray = field(repr=False)  # (n1, n2, 2)
    thresholded: bool = False


def potential_gradient(u: Potential) -> tuple[np.ndarray, np.ndarray]:
    """Gradient of u: centred differences interior, second-order one-sided on
    the boundary."""
    v = u.u.values
    dx = u.u.grid.dx
    g1 = np.empty_like(v)
    g2 = np.empty_like(v)
    g1[1:-1, :] = (v[2:, :] - v[:-2, :]) / (2 * dx)
    g1[0, :] = (-3 * v[0, :] + 4 * v[1, :] - v[2, :]) / (2 * dx)
    g1[-1, :] = (3 * v[-1, :] - 4 * v[-2, :] + v[-3, :]) / (2 * dx)
    g2[:, 1:-1] = (v[:, 2:] - v[:, :-2]) / (2 * dx)
    g2[:, 0] = (-3 * v[:, 0] + 4 * v[:, 1] - v[:, 2]) / (2 * dx)
    g2[:, -1] = (3 * v[:, -1] - 4 * v[:, -2] + v[:, -3]) / (2 * dx)
    return g1, g2


def w2_from_potential(u: Potential, pair: DensityPair) -> float:
    """W2^2 = integral of |x - grad u(x)|^2 f(x) over the source rectangle
    (tensor trapezoidal rule)."""
    g1, g2 = potential_gradient(u)
    grid = pair.f.grid
    xx1, xx2 = grid.meshgrid()
    cost = (xx1 - g1) ** 2 + (xx2 - g2) ** 2
    w1 = np.ones(grid.n1)
    w1[0] = w1[-1] = 0.5
    w2 = np.ones(grid.n2)
    w2[0] = w2[-1] = 0.5
    weights = np.outer(w1, w2)
    return float(np.sum(cost * pair.f.values * weights) * grid.dx**2)


def displacement_field(u: Potential, pair: DensityPair,
                       threshold_layer: bool = False) -> TransportResult:
    """Registration vectors grad u(x) - x at every node.

    With threshold_layer, vectors are zeroed where the pre-padding source
    density is below theta/2 (the artificial layer).
    """
    g1, g2 = potential_gradient(u)
    xx1, xx2 = pair.f.grid.meshgrid()
    disp = np.stack([g1 - xx1, g2 - xx2], axis=-1)
    if threshold_layer:
        core = pair.f_core if pair.f_core is not None else pair.f.values
        disp[core < pair.theta / 2.0] = 0.0
    return TransportResult(w2_squared=w2_from_potential(u, pair),
                           displacement=disp, thresholded=threshold_layer)


def registered_amplitude(u: Potential) -> GridField:
    """det of the centred-difference Hessian on the interior, extended to the
    boundary by copying the nearest interior value."""
    v = u.u.values
    dx = u.u.grid.dx
    h11 = (v[2:, 1:-1] + v[:-2, 1:-1] - 2 * v[1:-1, 1:-1]) / dx**2
    h22 = (v[1:-1, 2:] + v[1:-1, :-2] - 2 * v[1:-1, 1:-1]) / dx**2
    h12 = (v[2:, 2:] + v[:-2, :-2] - v[2:, :-2] - v[:-2, 2:]) / (4 * dx**2)
    det = h11 * h22 - h12**2
    out = np.empty_like(v)
    out[1:-1, 1:-1] = det
    out[0, 1:-1] = det[0]
    out[-1, 1:-1] = det[-1]
    out[:, 0] = out[:, 1]
    out[:, -1] = out[:, -2]
    return GridField(u.u.grid, out)


def write_displacement_csv(result: TransportResult, pair: DensityPair, path):
    """Columns x1, x2, d1, d2, f_value; one row per node, quiver-ready."""
    xx1, xx2 = pair.f.grid.meshgrid()
    with open(path, "w") as fh:
        fh.write("x1,x2,d1,d2,f_value\n")
        for i in range(pair.f.grid.n1):
            for j in range(pair.f.grid.n2):
                fh.write(",".join(format(v, ".17g") for v in (
                    xx1[i, j], xx2[i, j],
                    result.displacement[i, j, 0], result.displacement[i, j, 1],
                    pair.f.values[i, j])) + "\n")

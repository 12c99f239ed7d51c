"""Misfit landscapes over the two-layer parameters and simplex inversion."""

from __future__ import annotations

from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field

import numpy as np

from .errors import W2MisfitError
from .grids import GridField
from .ma_solver import SolverConfig, solve_monge_ampere
from .preprocess import PreprocessParams, embed, prepare_signed_pair
from .seismic import AcquisitionGeometry, LayerModel, synthesize_panel
from .transport2d import w2_from_potential

__all__ = ["MisfitSurface", "NelderMeadResult", "misfit", "scan_surface",
           "nelder_mead", "write_surface_csv"]

PARAM_NAMES = ("d1", "d2", "v1", "v2")

# Panel pairs are stiffer than generic blobs: a thicker floor and stronger
# smoothing keep the Newton solve robust across the whole scan ranges.
DEFAULT_PRE_PARAMS = PreprocessParams(theta_rel=0.05, sigma_rel=4.0)


@dataclass
class MisfitSurface:
    param1: str
    param2: str
    values1: np.ndarray
    values2: np.ndarray
    l2_values: np.ndarray = field(repr=False)
    w2_values: np.ndarray = field(repr=False)
    fixed_params: dict = field(default_factory=dict)


@dataclass
class NelderMeadResult:
    x_min: np.ndarray
    value: float
    evals: int
    converged: bool

    def to_dict(self) -> dict:
        return {"x_min": [float(v) for v in self.x_min],
                "value": float(self.value),
                "evals": self.evals,
                "converged": self.converged}


def misfit(model_trial: LayerModel, panel_ref: GridField,
           geom: AcquisitionGeometry,
           pre_params: PreprocessParams | None = None,
           solver_overrides: dict | None = None) -> tuple[float, float]:
    """(w2_sq, l2_sq) between the trial panel and the reference panel.

    w2_sq sums the transport misfits of the positive and negative parts;
    l2_sq is the plain squared panel difference.
    """
    pre_params = pre_params or DEFAULT_PRE_PARAMS
    try:
        panel = synthesize_panel(model_trial, geom)
        panel.require_same_grid(panel_ref)
        dx = panel.grid.dx
        l2_sq = float(np.sum((panel.values - panel_ref.values) ** 2) * dx**2)
        # Panel supports reach the offset edges, so zero-extend the grid before
        # preprocessing: the convex rectangles then always fit.
        pad1, pad2 = panel.grid.n1, panel.grid.n2
        panel = embed(panel, pad1, pad2)
        ref = embed(panel_ref, pad1, pad2)
        w2_sq = 0.0
        for part in prepare_signed_pair(panel, ref, pre_params).values():
            if part is None:
                continue
            cfg = SolverConfig.for_pair(part, **(solver_overrides or {}))
            pot, _ = solve_monge_ampere(part, cfg)
            w2_sq += w2_from_potential(pot, part)
        return w2_sq, l2_sq
    except W2MisfitError as e:
        raise type(e)(f"{e} [trial model {model_trial.to_dict()}]") from e


def _scan_cell(args):
    (p1name, v1, p2name, v2, fixed, panel_values, grid_args, geom, pre_params,
     solver_overrides) = args
    from .grids import Grid2D
    panel_ref = GridField(Grid2D(*grid_args), panel_values)
    params = dict(fixed)
    params[p1name] = v1
    params[p2name] = v2
    try:
        model = LayerModel(**params)
        w2, l2 = misfit(model, panel_ref, geom, pre_params, solver_overrides)
        return w2, l2
    except W2MisfitError:
        return float("nan"), float("nan")


def scan_surface(param1: str, param2: str, values1, values2, fixed: dict,
                 panel_ref: GridField, geom: AcquisitionGeometry,
                 pre_params: PreprocessParams | None = None,
                 solver_overrides: dict | None = None,
                 jobs: int = 1) -> MisfitSurface:
    """Evaluate the misfit on the tensor grid values1 x values2.

    fixed supplies the remaining two parameters.  Cells whose forward model or
    solve fails are recorded as NaN, not fatal.
    """
    for p in (param1, param2):
        if p not in PARAM_NAMES:
            raise ValueError(f"unknown parameter {p!r}")
    values1 = np.asarray(values1, dtype=float)
    values2 = np.asarray(values2, dtype=float)
    g = panel_ref.grid
    grid_args = (g.n1, g.n2, g.x1_min, g.x1_max, g.x2_min, g.x2_max)
    tasks = [(param1, float(a), param2, float(b), fixed, panel_ref.values,
              grid_args, geom, pre_params, solver_overrides)
             for a in values1 for b in values2]
    if jobs > 1:
        with ProcessPoolExecutor(max_workers=jobs) as ex:
            results = list(ex.map(_scan_cell, tasks, chunksize=4))
    else:
        results = [_scan_cell(t) for t in tasks]
    w2 = np.array([r[0] for r in results]).reshape(values1.size, values2.size)
    l2 = np.array([r[1] for r in results]).reshape(values1.size, values2.size)
    return MisfitSurface(param1, param2, values1, values2, l2, w2, dict(fixed))


def write_surface_csv(surface: MisfitSurface, path):
    with open(path, "w") as fh:
        fh.write("p1,p2,l2_sq,w2_sq\n")
        for a, va in enumerate(surface.values1):
            for b, vb in enumerate(surface.values2):
                fh.write(",".join(format(v, ".17g") for v in (
                    va, vb, surface.l2_values[a, b], surface.w2_values[a, b]))
                    + "\n")


def nelder_mead(objective, x0, xtol: float = 1e-3, ftol: float = 1e-6,
                max_evals: int = 500, step_rel: float = 0.05,
                ) -> NelderMeadResult:
    """Nelder-Mead simplex minimization (reflection 1, expansion 2,
    contraction 0.5, shrink 0.5).

    The initial simplex perturbs each coordinate of x0 by step_rel (relative).
    Stops when the simplex diameter drops below xtol, the value spread below
    ftol, or the evaluation budget runs out (flagged unconverged).
    """
    x0 = np.asarray(x0, dtype=float)
    n = x0.size
    evals = 0

    def f(x):
        nonlocal evals
        evals += 1
        v = float(objective(x))
        if not np.isfinite(v):
            raise ValueError(f"objective not finite at {x}")
        return v

    simplex = [x0.copy()]
    for i in range(n):
        x = x0.copy()
        x[i] += step_rel * (abs(x[i]) if x[i] != 0 else 1.0)
        simplex.append(x)
    values = [f(x) for x in simplex]

    while True:
        order = np.argsort(values)
        simplex = [simplex[k] for k in order]
        values = [values[k] for k in order]
        diam = max(np.max(np.abs(x - simplex[0])) for x in simplex[1:])
        spread = values[-1] - values[0]
        if diam < xtol or spread < ftol:
            return NelderMeadResult(simplex[0], values[0], evals, True)
        if evals >= max_evals:
            return NelderMeadResult(simplex[0], values[0], evals, False)

        centroid = np.mean(simplex[:-1], axis=0)
        xr = centroid + (centroid - simplex[-1])
        fr = f(xr)
        if fr < values[0]:
            xe = centroid + 2.0 * (centroid - simplex[-1])
            fe = f(xe)
            if fe < fr:
                simplex[-1], values[-1] = xe, fe
            else:
                simplex[-1], values[-1] = xr, fr
        elif fr < values[-2]:
            simplex[-1], values[-1] = xr, fr
        else:
            xc = centroid + 0.5 * (simplex[-1] - centroid)
            fc = f(xc)
            if fc < values[-1]:
                simplex[-1], values[-1] = xc, fc
            else:
                simplex = [simplex[0]] + [simplex[0] + 0.5 * (x - simplex[0])
                                          for x in simplex[1:]]
                values = [values[0]] + [f(x) for x in simplex[1:]]

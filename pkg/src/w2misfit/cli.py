"""Command-line front end: every experiment as a reproducible run.

Data goes to files in --out (CSV/JSON, plus PNG figures unless --no-plot);
diagnostics go to stderr.  Exit codes: 0 success, 1 solver non-convergence,
2 input/usage errors.
"""

from __future__ import annotations

import argparse
import json
import sys
from pathlib import Path

import numpy as np

from . import inversion, plotting, preprocess, seismic, transport1d, transport2d
from .errors import NoConvergence, W2MisfitError
from .grids import read_field_csv, write_field_csv
from .ma_solver import SolverConfig, solve_monge_ampere

EXIT_OK = 0
EXIT_NOCONV = 1
EXIT_INPUT = 2


def _parse_config_file(path: str) -> dict:
    """Flat key=value file; '#' starts a comment."""
    out = {}
    for lineno, raw in enumerate(Path(path).read_text().splitlines(), 1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ValueError(f"{path}:{lineno}: expected key=value, got {raw!r}")
        k, v = line.split("=", 1)
        out[k.strip()] = v.strip()
    return out


_CONFIG_KEYS = {
    "theta_rel": float, "sigma_rel": float, "margin_cells": int,
    "delta": float, "epsilon": float, "tol": float, "max_iters": int,
    "filtered": lambda s: s.lower() in ("1", "true", "yes"),
    "fixed_node": str, "seed": int, "jobs": int,
}


def _merged_options(args) -> dict:
    """Precedence: command-line flags > config file > defaults."""
    opts: dict = {}
    if args.config:
        raw = _parse_config_file(args.config)
        for k, v in raw.items():
            if k not in _CONFIG_KEYS:
                raise ValueError(f"unknown config key {k!r}")
            opts[k] = _CONFIG_KEYS[k](v)
    flag_map = {"theta_rel": args.theta_rel, "sigma_rel": args.sigma_rel,
                "delta": args.delta, "tol": args.tol,
                "filtered": args.filtered or None,
                "seed": args.seed, "jobs": args.jobs}
    for k, v in flag_map.items():
        if v is not None:
            opts[k] = v
    opts.setdefault("seed", 0)
    opts.setdefault("jobs", 1)
    return opts


def _pre_params(opts, base: preprocess.PreprocessParams | None = None,
                ) -> preprocess.PreprocessParams:
    base = base or preprocess.PreprocessParams()
    p = preprocess.PreprocessParams(theta_rel=base.theta_rel,
                                    sigma_rel=base.sigma_rel,
                                    margin_cells=base.margin_cells)
    if "theta_rel" in opts:
        p.theta_rel = opts["theta_rel"]
    if "sigma_rel" in opts:
        p.sigma_rel = opts["sigma_rel"]
    if "margin_cells" in opts:
        p.margin_cells = opts["margin_cells"]
    return p


def _solver_overrides(opts) -> dict:
    over = {}
    if "delta" in opts:
        over["delta"] = opts["delta"]
    if "epsilon" in opts:
        over["epsilon_filter"] = opts["epsilon"]
    if "tol" in opts:
        over["newton_tol"] = opts["tol"]
    if "max_iters" in opts:
        over["max_newton_iters"] = opts["max_iters"]
    if opts.get("filtered"):
        over["use_filtered"] = True
    if "fixed_node" in opts:
        i, j = opts["fixed_node"].split(",")
        over["fixed_node"] = (int(i), int(j))
    return over


def _write_json(path: Path, obj):
    path.write_text(json.dumps(obj, indent=2, sort_keys=True) + "\n")


def _parse_range(text: str):
    try:
        lo, hi, n = text.split(",")
        return np.linspace(float(lo), float(hi), int(n))
    except ValueError as e:
        raise ValueError(f"bad range {text!r}, expected lo,hi,count") from e


def _parse_fixed(text: str) -> dict:
    out = {}
    for item in text.split(","):
        k, v = item.split("=")
        out[k.strip()] = float(v)
    return out


def _model_from_args(args) -> seismic.LayerModel:
    if args.model:
        return seismic.LayerModel.from_dict(json.loads(Path(args.model).read_text()))
    return seismic.LayerModel(d1=args.d1, d2=args.d2, v1=args.v1, v2=args.v2)


# --- commands -----------------------------------------------------------------


def cmd_w2(args, opts, out: Path) -> int:
    f = read_field_csv(args.file_f)
    g = read_field_csv(args.file_g)
    f.require_same_grid(g)
    dx = f.grid.dx
    l2_sq = float(np.sum((f.values - g.values) ** 2) * dx**2)
    parts = preprocess.prepare_signed_pair(f, g, _pre_params(opts))
    w2_sq = 0.0
    reports = {}
    for name, pair in parts.items():
        if pair is None:
            reports[name] = None
            continue
        cfg = SolverConfig.for_pair(pair, **_solver_overrides(opts))
        pot, report = solve_monge_ampere(pair, cfg)
        w2_sq += transport2d.w2_from_potential(pot, pair)
        reports[name] = report.to_dict()
    _write_json(out / "w2_result.json",
                {"w2_squared": w2_sq, "l2_squared": l2_sq,
                 "solver_report": reports})
    return EXIT_OK


def cmd_wavelet_sweep(args, opts, out: Path) -> int:
    f = seismic.wavelet_profile(args.x_min, args.x_max, args.n, args.freq)
    shifts = np.linspace(args.s_min, args.s_max, args.s_count)
    l2_vals, w2_vals = transport1d.sweep_curves(
        f, shifts, noise=args.noise, amplitude_rel=args.noise_amp_rel,
        seed=opts["seed"])
    with open(out / "sweep.csv", "w") as fh:
        fh.write("s,l2_sq,w2_sq\n")
        for s, a, b in zip(shifts, l2_vals, w2_vals):
            fh.write(f"{s:.17g},{a:.17g},{b:.17g}\n")
    if not args.no_plot:
        plotting.save_sweep_figure(shifts, l2_vals, w2_vals, out / "sweep.png")
    return EXIT_OK


def cmd_surface(args, opts, out: Path) -> int:
    geom = seismic.default_geometry(args.freq)
    ref = _model_from_args(args) if args.model else seismic.reference_model()
    panel_ref = seismic.synthesize_panel(ref, geom)
    surface = inversion.scan_surface(
        args.param1, args.param2, _parse_range(args.range1),
        _parse_range(args.range2), _parse_fixed(args.fixed), panel_ref, geom,
        pre_params=_pre_params(opts, inversion.DEFAULT_PRE_PARAMS),
        solver_overrides=_solver_overrides(opts), jobs=opts["jobs"])
    inversion.write_surface_csv(surface, out / "surface.csv")
    if not args.no_plot:
        plotting.save_surface_figure(surface, out / "surface.png")
    return EXIT_OK


def cmd_invert(args, opts, out: Path) -> int:
    geom = seismic.default_geometry(args.freq)
    ref = seismic.reference_model()
    panel_ref = seismic.synthesize_panel(ref, geom)
    pre = _pre_params(opts, inversion.DEFAULT_PRE_PARAMS)
    over = _solver_overrides(opts)

    def objective(x):
        model = seismic.LayerModel(d1=x[0], d2=x[1], v1=x[2], v2=x[3])
        w2, _ = inversion.misfit(model, panel_ref, geom, pre, over)
        return w2

    start = [float(v) for v in args.start.split(",")]
    if len(start) != 4:
        raise ValueError("--start needs d1,d2,v1,v2")
    result = inversion.nelder_mead(objective, start, max_evals=args.max_evals)
    _write_json(out / "invert.json", result.to_dict())
    return EXIT_OK


def cmd_register(args, opts, out: Path) -> int:
    f = read_field_csv(args.file_f)
    g = read_field_csv(args.file_g)
    parts = preprocess.prepare_signed_pair(f, g, _pre_params(opts))
    pair = parts[args.part]
    if pair is None:
        raise ValueError(f"{args.part} part has no mass in either signal")
    cfg = SolverConfig.for_pair(pair, **_solver_overrides(opts))
    pot, report = solve_monge_ampere(pair, cfg)
    result = transport2d.displacement_field(pot, pair, threshold_layer=True)
    transport2d.write_displacement_csv(result, pair, out / "displacement.csv")
    _write_json(out / "register_report.json",
                {"w2_squared": result.w2_squared,
                 "solver_report": report.to_dict()})
    if not args.no_plot:
        plotting.save_displacement_figure(pair, result, out / "displacement.png")
    return EXIT_OK


def cmd_synth(args, opts, out: Path) -> int:
    geom = seismic.default_geometry(args.freq)
    model = _model_from_args(args)
    panel = seismic.synthesize_panel(model, geom)
    if args.noise_amp_rel > 0:
        amp = args.noise_amp_rel * float(np.abs(panel.values).max())
        panel = seismic.add_noise(panel, amp, opts["seed"])
    write_field_csv(panel, out / "panel.csv")
    _write_json(out / "model.json", model.to_dict())
    if not args.no_plot:
        plotting.save_panel_figure(panel, out / "panel.png")
    return EXIT_OK


# --- argument parsing -----------------------------------------------------------


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(
        prog="w2misfit",
        description="Quadratic Wasserstein misfit experiments for gridded "
                    "seismic signals")
    sub = ap.add_subparsers(dest="command", required=True)

    def common(p):
        p.add_argument("--out", default=".", help="output directory")
        p.add_argument("--seed", type=int, default=None)
        p.add_argument("--config", default=None, help="flat key=value file")
        p.add_argument("--jobs", type=int, default=None)
        p.add_argument("--filtered", action="store_true", default=False)
        p.add_argument("--theta-rel", type=float, default=None, dest="theta_rel")
        p.add_argument("--sigma-rel", type=float, default=None, dest="sigma_rel")
        p.add_argument("--delta", type=float, default=None)
        p.add_argument("--tol", type=float, default=None)
        p.add_argument("--no-plot", action="store_true", dest="no_plot")

    p = sub.add_parser("w2", help="W2^2 between two gridded signals")
    p.add_argument("file_f")
    p.add_argument("file_g")
    common(p)
    p.set_defaults(func=cmd_w2)

    p = sub.add_parser("wavelet-sweep", help="1D shift sweep of L2^2 and W2^2")
    p.add_argument("--s-min", type=float, default=-2.0)
    p.add_argument("--s-max", type=float, default=2.0)
    p.add_argument("--s-count", type=int, default=41)
    p.add_argument("--noise", choices=["none", "f", "both"], default="none")
    p.add_argument("--noise-amp-rel", type=float, default=0.1)
    p.add_argument("--freq", type=float, default=1.0)
    p.add_argument("--x-min", type=float, default=-4.0)
    p.add_argument("--x-max", type=float, default=4.0)
    p.add_argument("--n", type=int, default=1601)
    common(p)
    p.set_defaults(func=cmd_wavelet_sweep)

    p = sub.add_parser("surface", help="misfit cross-section over two parameters")
    p.add_argument("--param1", default="d1")
    p.add_argument("--param2", default="v1")
    p.add_argument("--range1", default="0.6,1.4,17")
    p.add_argument("--range2", default="0.7,1.3,17")
    p.add_argument("--fixed", default="d2=0.5,v2=1.5")
    p.add_argument("--freq", type=float, default=2.0)
    p.add_argument("--model", default=None, help="reference model JSON file")
    common(p)
    p.set_defaults(func=cmd_surface)

    p = sub.add_parser("invert", help="Nelder-Mead recovery of the layer model")
    p.add_argument("--start", default="1.2,0.4,0.9,1.6")
    p.add_argument("--max-evals", type=int, default=500)
    p.add_argument("--freq", type=float, default=2.0)
    common(p)
    p.set_defaults(func=cmd_invert)

    p = sub.add_parser("register", help="displacement field between two signals")
    p.add_argument("file_f")
    p.add_argument("file_g")
    p.add_argument("--part", choices=["plus", "minus"], default="plus")
    common(p)
    p.set_defaults(func=cmd_register)

    p = sub.add_parser("synth", help="synthesize a two-layer panel")
    p.add_argument("--model", default=None, help="model JSON file")
    p.add_argument("--d1", type=float, default=1.0)
    p.add_argument("--d2", type=float, default=0.5)
    p.add_argument("--v1", type=float, default=1.0)
    p.add_argument("--v2", type=float, default=1.5)
    p.add_argument("--freq", type=float, default=2.0)
    p.add_argument("--noise-amp-rel", type=float, default=0.0)
    common(p)
    p.set_defaults(func=cmd_synth)

    return ap


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        opts = _merged_options(args)
        out = Path(args.out)
        out.mkdir(parents=True, exist_ok=True)
        return args.func(args, opts, out)
    except NoConvergence as e:
        print(f"error: solver did not converge: {e}", file=sys.stderr)
        return EXIT_NOCONV
    except (OSError, ValueError, KeyError, json.JSONDecodeError,
            W2MisfitError) as e:
        print(f"error: {e}", file=sys.stderr)
        return EXIT_INPUT


if __name__ == "__main__":
    sys.exit(main())

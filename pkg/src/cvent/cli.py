"""``cvent`` command line.

Subcommands: eval, sweep, ellipse, sample, estimate, infer.
Exit codes: 0 ok, 2 validation error, 3 inference infeasible.
"""
from __future__ import annotations

import argparse
import csv
import io
import json
import math
import sys
from pathlib import Path

import numpy as np

from . import criteria, ellipse, optimize, sampler
from .config import PRESET_NAMES, config_to_dict, load_config, presets
from .errors import CventError, InferenceError, ValidationError
from .state import VariancePair, build_scenario, variance_to_db

EXIT_OK = 0
EXIT_VALIDATION = 2
EXIT_INFERENCE = 3

SWEEP_COLUMNS = ("param", "inseparability", "epsilon_x_given_y", "epsilon_y_given_x")
SUMMARY_COLUMNS = (
    "quadrature_deg", "sigma_x", "sigma_y", "sigma_sum", "sigma_diff",
    "sigma_x_given_y", "sigma_y_given_x", "axis_angle_deg", "semi_major", "semi_minor",
)


class UsageError(Exception):
    pass


def fmt(value):
    """Nine significant digits; NaN and infinities spelled out."""
    value = float(value)
    if math.isnan(value):
        return "nan"
    if math.isinf(value):
        return "inf" if value > 0 else "-inf"
    return f"{value:.9g}"


def _round(obj):
    if isinstance(obj, dict):
        return {k: _round(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_round(v) for v in obj]
    if isinstance(obj, (bool, str)) or obj is None:
        return obj
    if isinstance(obj, (int, np.integer)):
        return int(obj)
    value = float(obj)
    if not math.isfinite(value):
        return None
    return float(f"{value:.9g}")


def dump_json(obj):
    return json.dumps(_round(obj), indent=2, sort_keys=False, ensure_ascii=False) + "\n"


def write_csv(header, rows):
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(header)
    for row in rows:
        w.writerow([c if isinstance(c, str) else fmt(c) for c in row])
    return buf.getvalue()


def _emit(text, output):
    if output is None:
        sys.stdout.write(text)
    else:
        Path(output).write_text(text, encoding="utf-8")


def _scenario(args):
    if getattr(args, "preset", None):
        return presets()[args.preset].scenario, None
    if not args.config:
        raise UsageError("a config file or --preset is required")
    doc = load_config(args.config)
    return doc.scenario, doc.sampler


def cmd_eval(args):
    cfg, _ = _scenario(args)
    cm = build_scenario(cfg)
    report = criteria.evaluate(cm)
    if args.out == "csv":
        rows = [(k, v) for k, v in report.items()]
        text = write_csv(("key", "value"), rows)
    else:
        text = dump_json({
            "config": config_to_dict(cfg),
            "correlation_matrix": cm.entries.tolist(),
            **report,
        })
    _emit(text, args.output)
    return EXIT_OK


def cmd_sweep(args):
    cfg, _ = _scenario(args)
    preset = presets()[args.preset] if args.preset else None
    param = args.param or (preset.param if preset else None)
    start = args.start if args.start is not None else (preset.start if preset else None)
    stop = args.stop if args.stop is not None else (preset.stop if preset else None)
    steps = args.steps if args.steps is not None else (preset.steps if preset else None)
    if None in (param, start, stop, steps):
        raise UsageError("--param, --from, --to and --steps are required without --preset")
    optimal_t = args.optimal_t or (preset.optimal_t if preset and not args.param else False)
    spec = optimize.SweepSpec(cfg, param, start, stop, steps, optimal_t=optimal_t)
    rows = optimize.sweep(spec, workers=args.workers)
    for row in rows:
        if row.error:
            print(f"warning: {param}={fmt(row.value)}: {row.error}", file=sys.stderr)
    out = [
        (r.value, r.observables["inseparability"], r.observables["epr_x_given_y"], r.observables["epr_y_given_x"])
        for r in rows
    ]
    _emit(write_csv(SWEEP_COLUMNS, out), args.output)
    return EXIT_OK


def cmd_ellipse(args):
    cfg, _ = _scenario(args)
    if not math.isfinite(args.quadrature):
        raise ValidationError("quadrature must be a finite angle in degrees", key="quadrature")
    if args.points < 8:
        raise ValidationError(f"--points must be at least 8, got {args.points}", key="points")
    cm = build_scenario(cfg)
    theta = math.radians(args.quadrature)
    sigma = ellipse.quadrature_block(cm, theta)
    pts = ellipse.ellipse_polyline(sigma, args.points)
    qnl = ellipse.ellipse_polyline(np.eye(2), args.points)
    angles = ellipse.polyline_angles(args.points)
    rows = [("ellipse", a, x, y) for a, (x, y) in zip(angles, pts)]
    rows += [("qnl", a, x, y) for a, (x, y) in zip(angles, qnl)]
    poly = write_csv(("curve", "theta_deg", "x", "y"), rows)
    s = ellipse.summarize_block(sigma)
    summary = write_csv(SUMMARY_COLUMNS, [(
        args.quadrature, s.sigma_x, s.sigma_y, s.sigma_sum, s.sigma_diff,
        s.sigma_x_given_y, s.sigma_y_given_x, math.degrees(s.axis_angle),
        s.semi_axes[0], s.semi_axes[1],
    )])
    if args.output_dir:
        out = Path(args.output_dir)
        out.mkdir(parents=True, exist_ok=True)
        (out / "ellipse.csv").write_text(poly, encoding="utf-8")
        (out / "summary.csv").write_text(summary, encoding="utf-8")
    else:
        sys.stdout.write(poly + "\n" + summary)
    return EXIT_OK


def _require_sampler(args):
    if args.preset:
        raise UsageError("sample and estimate need a config file with a sampler block")
    cfg, samp = _scenario(args)
    if samp is None:
        raise ValidationError("config has no sampler block", key="sampler")
    return cfg, samp


def _parse_quadrature(text):
    if text in ("+", "-"):
        return text
    try:
        return math.radians(float(text))
    except ValueError:
        raise ValidationError(f"quadrature must be '+', '-' or degrees, got {text!r}", key="quadrature") from None


def cmd_sample(args):
    cfg, samp = _require_sampler(args)
    quad = _parse_quadrature(args.quadrature)
    batch = sampler.sample_pairs(
        build_scenario(cfg), quad, samp.n, samp.seed, sample_rate=samp.sample_rate_hz, workers=args.workers,
    )
    if args.filtered:
        if samp.band is None:
            raise ValidationError("--filtered needs sampler.filter in the config", key="sampler.filter")
        batch = sampler.filter_batch(batch, samp.band)
    rows = ((i, x, y) for i, (x, y) in enumerate(batch.pairs))
    buf = io.StringIO()
    buf.write("index,dX_x,dX_y\n")
    for i, x, y in rows:
        buf.write(f"{i},{fmt(x)},{fmt(y)}\n")
    _emit(buf.getvalue(), args.output)
    return EXIT_OK


def cmd_estimate(args):
    cfg, samp = _require_sampler(args)
    cm = build_scenario(cfg)
    report = sampler.measure(cm, samp.n, samp.seed, band=samp.band, workers=args.workers)
    analytic = criteria.evaluate(cm)
    doc = {
        "config": config_to_dict(cfg),
        "seed": samp.seed,
        "filter": None if samp.band is None else samp.band.describe(),
        **report.as_dict(),
        "analytic": {
            "inseparability": analytic["inseparability"],
            "epsilon_x_given_y": analytic["epsilon_x_given_y"],
            "epsilon_y_given_x": analytic["epsilon_y_given_x"],
        },
    }
    _emit(dump_json(doc), args.output)
    return EXIT_OK


def cmd_infer(args):
    try:
        vx = VariancePair(args.vx_plus, args.vx_minus)
        vy = VariancePair(args.vy_plus, args.vy_minus)
    except ValidationError as exc:
        raise ValidationError(str(exc), key="variances") from None
    res = optimize.infer_inputs(vx, vy, args.t)
    doc = res.as_dict()
    doc["v1_plus_db"] = variance_to_db(res.v1.plus)
    doc["v1_minus_db"] = variance_to_db(res.v1.minus)
    _emit(dump_json(doc), args.output)
    return EXIT_OK


def _add_scenario_args(p, allow_preset=True):
    p.add_argument("config", nargs="?", help="scenario JSON file")
    if allow_preset:
        p.add_argument("--preset", choices=PRESET_NAMES, help="built-in figure scenario instead of a file")
    else:
        p.set_defaults(preset=None)
    p.add_argument("--output", "-o", help="write to this file instead of stdout")


def build_parser():
    parser = argparse.ArgumentParser(prog="cvent", description="Two-mode CV entanglement lab")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("eval", help="criteria for one scenario")
    _add_scenario_args(p)
    p.add_argument("--out", choices=("json", "csv"), default="json")
    p.set_defaults(func=cmd_eval)

    p = sub.add_parser("sweep", help="criteria along a parameter grid (CSV)")
    _add_scenario_args(p)
    p.add_argument("--param", choices=optimize.PARAMETERS)
    p.add_argument("--from", dest="start", type=float)
    p.add_argument("--to", dest="stop", type=float)
    p.add_argument("--steps", type=int)
    p.add_argument("--optimal-t", action="store_true", help="set t = 1/(2 eta_1) at every point")
    p.add_argument("--workers", type=int, default=1)
    p.add_argument("--out", choices=("csv",), default="csv")
    p.set_defaults(func=cmd_sweep)

    p = sub.add_parser("ellipse", help="correlation ellipse polyline and summary (CSV)")
    _add_scenario_args(p)
    p.add_argument("--quadrature", type=float, default=0.0, help="local oscillator angle in degrees")
    p.add_argument("--points", type=int, default=256)
    p.add_argument("--output-dir", help="write ellipse.csv and summary.csv here")
    p.add_argument("--out", choices=("csv",), default="csv")
    p.set_defaults(func=cmd_ellipse)

    p = sub.add_parser("sample", help="Monte-Carlo quadrature pairs (CSV)")
    _add_scenario_args(p, allow_preset=False)
    p.add_argument("--quadrature", default="+", help="'+', '-' or an angle in degrees")
    p.add_argument("--filtered", action="store_true", help="apply the configured band-pass")
    p.add_argument("--workers", type=int, default=1)
    p.add_argument("--out", choices=("csv",), default="csv")
    p.set_defaults(func=cmd_sample)

    p = sub.add_parser("estimate", help="Monte-Carlo estimate of all criteria (JSON)")
    _add_scenario_args(p, allow_preset=False)
    p.add_argument("--workers", type=int, default=1)
    p.set_defaults(func=cmd_estimate)

    p = sub.add_parser("infer", help="infer the squeezer from measured output variances (JSON)")
    for flag in ("--vx-plus", "--vx-minus", "--vy-plus", "--vy-minus", "--t"):
        p.add_argument(flag, type=float, required=True)
    p.add_argument("--output", "-o")
    p.set_defaults(func=cmd_infer)
    return parser


def main(argv=None):
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except UsageError as exc:
        parser.error(str(exc))
    except InferenceError as exc:
        print(f"error: inference infeasible: {exc}", file=sys.stderr)
        return EXIT_INFERENCE
    except ValidationError as exc:
        where = f"{exc.key}: " if exc.key and not str(exc).startswith(exc.key) else ""
        print(f"error: {where}{exc}", file=sys.stderr)
        return EXIT_VALIDATION
    except CventError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_VALIDATION
    except OSError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_VALIDATION


if __name__ == "__main__":
    sys.exit(main())

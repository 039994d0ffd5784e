"""Command-line front door: run analyses from JSON configs, emit JSON/CSV.

Subcommands: check | sweep-h | path-dt | envelope | antiplane | scan.
Exit codes: 0 pass, 1 analysis-level failure (failed verdict, instability
found, nonconvergence), 2 config error.  All randomness is seeded, so
rerunning a command reproduces its outputs byte for byte.
"""

from __future__ import annotations

import argparse
import csv
import io
import json
import sys
from pathlib import Path

import numpy as np

from . import __version__
from .config import COMMANDS, RunConfig
from .energies import AntiplaneDoubleWell
from .envelopes import (
    antiplane_analyze,
    check_affine_formula,
    directional_derivative,
    loading_program,
    mechanism_pair,
    rank_one_restriction,
    tangency_gap,
    yield_plane,
)
from .errors import ConfigError, GradJumpError
from .interchange import d_path, d_path_isotropic
from .jumps import default_radii, diagnose, weierstrass_scan
from .quadrature import interchange_limit_target, limit_sweep

_FLOAT_FMT = ".17g"


def _fmt(x) -> str:
    return format(float(x), _FLOAT_FMT)


def _jsonable(obj):
    if isinstance(obj, dict):
        return {k: _jsonable(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_jsonable(v) for v in obj]
    if isinstance(obj, np.ndarray):
        return _jsonable(obj.tolist())
    if isinstance(obj, (np.floating, np.integer)):
        return obj.item()
    if isinstance(obj, np.bool_):
        return bool(obj)
    return obj


def _csv_text(header, rows) -> str:
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\r\n")
    writer.writerow(header)
    for row in rows:
        writer.writerow([_fmt(v) if isinstance(v, (float, np.floating)) else v for v in row])
    return buf.getvalue()


# -- commands -----------------------------------------------------------------


def cmd_check(cfg: RunConfig):
    model = cfg.model()
    pair = cfg.pair()
    tol_abs, tol_rel = cfg.tolerances()
    resolution, radii = cfg.scan_settings()
    diag = diagnose(model, pair, tol_abs, tol_rel, radii, resolution)
    summary = diag.to_dict()
    code = 0 if diag.all_ok else 1
    return code, summary, [("check.json", "json", summary)]


def cmd_sweep_h(cfg: RunConfig):
    model = cfg.model()
    pair = cfg.pair()
    params = cfg.interchange_params()
    sweep = limit_sweep(model, pair, params, cfg.h_grid())
    target = interchange_limit_target(model, pair) * params.t
    summary = sweep.to_dict()
    summary.update(
        {
            "target": target,
            "relative_gap": abs(sweep.limit - target) / abs(target) if target else None,
            "seed": cfg.seed,
            "t": params.t,
        }
    )
    rows = [(h, v, e) for h, v, e in sweep.rows()]
    return (
        0,
        summary,
        [
            ("sweep_h.csv", "csv", (("h", "dE_over_h", "mc_error"), rows)),
            ("sweep_h.json", "json", summary),
        ],
    )


def cmd_path_dt(cfg: RunConfig):
    ts = cfg.t_grid()
    iso = cfg.isotropic()
    if iso is not None and ("model" in cfg.data or "pair" in cfg.data):
        raise ConfigError("give either 'isotropic' or 'model'+'pair', not both")
    if iso is not None:
        params, theta_plus, theta_minus = iso
        values = d_path_isotropic(params, theta_plus, theta_minus, ts)
    else:
        values = d_path(cfg.model(), cfg.pair(), ts)
    rows = list(zip(ts, values))
    summary = {
        "n_points": len(rows),
        "d_first": float(values[0]),
        "d_last": float(values[-1]),
        "d_max": float(np.max(values)),
        "t_argmax": float(ts[int(np.argmax(values))]),
    }
    return (
        0,
        summary,
        [
            ("path_dt.csv", "csv", (("t", "D"), rows)),
            ("path_dt.json", "json", summary),
        ],
    )


def cmd_envelope(cfg: RunConfig):
    model = cfg.model()
    pair = cfg.pair()
    grid_size = int(cfg.data.get("grid_size", 201))
    tol = float(cfg.data.get("tol", 1e-10))
    ts = np.linspace(0.0, 1.0, grid_size)
    curve = rank_one_restriction(model, pair, ts)
    report = check_affine_formula(model, pair, tol, grid_size)
    summary = {
        "affine_segments": [list(seg) for seg in curve.affine_segments],
        "max_hull_gap": curve.max_hull_gap(),
        "affine_formula": {
            "max_deviation": report.max_deviation,
            "tol": report.tol,
            "passed": report.passed,
            "p_star": report.p_star,
            "frak_n": report.frak_n,
        },
        "slope_at_0": directional_derivative(model, pair, at=0),
        "slope_at_1": directional_derivative(model, pair, at=1),
    }
    rows = list(zip(ts, curve.w_values, curve.hull_values))
    return (
        0,
        summary,
        [
            ("envelope.csv", "csv", (("t", "W", "hull"), rows)),
            ("envelope.json", "json", summary),
        ],
    )


def cmd_antiplane(cfg: RunConfig):
    params = cfg.antiplane_params()
    analysis = antiplane_analyze(params)
    model = AntiplaneDoubleWell(params)
    rs = cfg.envelope_grid()
    fs = np.stack([rs, np.zeros_like(rs)], axis=1)[:, None, :]
    w_vals = model.value_many(fs)
    qw_vals = analysis.qw_radial(rs)

    n_mech = int(cfg.data.get("mechanisms", 16))
    gaps = []
    for angle in np.linspace(0.0, 2.0 * np.pi, n_mech, endpoint=False):
        pair = mechanism_pair(analysis, [np.cos(angle), np.sin(angle)])
        gaps.append(tangency_gap(analysis, yield_plane(model, pair)))
    summary = dict(analysis.to_dict())
    summary.update({"n_mechanisms": n_mech, "max_tangency_gap": float(np.max(gaps))})

    artifacts = [
        (
            "antiplane_envelope.csv",
            "csv",
            (("f_norm", "W", "QW"), list(zip(rs, w_vals, qw_vals))),
        ),
        ("antiplane.json", "json", summary),
    ]
    path = cfg.path()
    if path is not None:
        steps = loading_program(analysis, path)
        rows = [
            (s.index, s.f_norm, s.theta, s.p_total[0, 0], s.p_total[0, 1], int(s.on_yield))
            for s in steps
        ]
        artifacts.append(
            (
                "antiplane_loading.csv",
                "csv",
                (("step", "f_norm", "theta", "p_x", "p_y", "on_yield"), rows),
            )
        )
        summary["n_path_steps"] = len(rows)
    return 0, summary, artifacts


def cmd_scan(cfg: RunConfig):
    model = cfg.model()
    points = cfg.scan_points()
    resolution, radii = cfg.scan_command_settings()
    results = []
    any_unstable = False
    for point in points:
        grid = radii
        if grid is None:
            grid = default_radii(1.0 + float(np.linalg.norm(point)))
        scan = weierstrass_scan(model, point, grid, resolution)
        stable = scan.min_value >= -1e-12 * (1.0 + abs(model.value(point)))
        any_unstable |= not stable
        results.append(
            {"point": point.tolist(), "stable": stable, **scan.to_dict()}
        )
    summary = {"n_points": len(results), "all_stable": not any_unstable, "results": results}
    return (1 if any_unstable else 0), summary, [("scan.json", "json", summary)]


_DISPATCH = {
    "check": cmd_check,
    "sweep-h": cmd_sweep_h,
    "path-dt": cmd_path_dt,
    "envelope": cmd_envelope,
    "antiplane": cmd_antiplane,
    "scan": cmd_scan,
}


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="gradjump",
        description="Interface stability diagnostics for gradient discontinuities.",
    )
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    sub = parser.add_subparsers(dest="command", required=True, metavar="|".join(COMMANDS))
    for name in COMMANDS:
        cmd = sub.add_parser(name)
        cmd.add_argument("--config", required=True, help="path to the JSON run config")
        cmd.add_argument("--seed", type=int, default=None, help="override the config seed")
        cmd.add_argument("--out", default=None, help="directory for JSON/CSV artifacts")
        cmd.add_argument(
            "--format",
            choices=("json", "csv"),
            default="json",
            help="what to print on stdout (csv prints the primary table)",
        )
    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        cfg = RunConfig.from_file(args.command, args.config).with_seed(args.seed)
        code, summary, artifacts = _DISPATCH[args.command](cfg)
    except ConfigError as exc:
        print(json.dumps({"error": str(exc)}), file=sys.stderr)
        return 2
    except GradJumpError as exc:
        print(json.dumps({"error": str(exc)}), file=sys.stderr)
        return 1

    summary = _jsonable(summary)
    if args.out is not None:
        outdir = Path(args.out)
        outdir.mkdir(parents=True, exist_ok=True)
        for name, kind, payload in artifacts:
            target = outdir / name
            if kind == "json":
                target.write_text(
                    json.dumps(_jsonable(payload), indent=2) + "\n", encoding="utf-8"
                )
            else:
                header, rows = payload
                # newline="" keeps the CRLF row terminators verbatim
                with target.open("w", encoding="utf-8", newline="") as fh:
                    fh.write(_csv_text(header, rows))

    if args.format == "csv":
        tables = [p for _, kind, p in artifacts if kind == "csv"]
        if tables:
            header, rows = tables[0]
            sys.stdout.write(_csv_text(header, rows))
        else:
            print(json.dumps(summary, indent=2))
    else:
        print(json.dumps(summary, indent=2))
    return code


if __name__ == "__main__":
    sys.exit(main())

"""Command-line front end: CSV in, JSON out.

Exit codes: 0 success, 1 error, 2 no-change-detected (only when an interval
was requested).  Reports carry ``"schema": "cpinfer/1"`` and serialize the
library results directly.
"""

from __future__ import annotations

import argparse
import csv
import json
import sys
from dataclasses import asdict

import numpy as np

from .core import as_series
from .detect import detect_change
from .infer import QuantileMCSettings, limit_quantile
from .pls import full_pipeline
from .simbench import SimConfig, run_monte_carlo

SCHEMA = "cpinfer/1"

__all__ = [
    "read_csv",
    "write_csv",
    "cmd_detect",
    "cmd_estimate",
    "cmd_infer",
    "cmd_simulate",
    "cmd_quantile",
    "main",
]


def read_csv(path, has_header: bool = False) -> np.ndarray:
    """Load a rectangular numeric CSV as a T x p array.

    Raises ValueError naming the offending row/column on ragged or
    non-numeric input.
    """
    rows = []
    with open(path, "r", encoding="utf-8", newline="") as fh:
        reader = csv.reader(fh)
        for line_no, cells in enumerate(reader, start=1):
            if has_header and line_no == 1:
                continue
            if not cells:
                continue
            rows.append((line_no, cells))
    if not rows:
        raise ValueError(f"{path}: no data rows")
    width = len(rows[0][1])
    data = np.empty((len(rows), width))
    for i, (line_no, cells) in enumerate(rows):
        if len(cells) != width:
            raise ValueError(f"{path}: row {line_no} has {len(cells)} cells, expected {width}")
        for j, cell in enumerate(cells):
            try:
                data[i, j] = float(cell)
            except ValueError:
                raise ValueError(
                    f"{path}: non-numeric cell at row {line_no}, column {j + 1}: {cell!r}"
                ) from None
    if data.shape[0] < 2:
        raise ValueError(f"{path}: need at least 2 data rows, got {data.shape[0]}")
    return as_series(data)


def write_csv(path, Y, header=None) -> None:
    """Write a matrix at full float precision (round-trips through read_csv)."""
    Y = np.asarray(Y, dtype=float)
    with open(path, "w", encoding="utf-8", newline="") as fh:
        writer = csv.writer(fh)
        if header is not None:
            writer.writerow(header)
        for row in Y:
            writer.writerow([repr(float(v)) for v in row])


def _jsonify(obj):
    if isinstance(obj, dict):
        return {k: _jsonify(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_jsonify(v) for v in obj]
    if isinstance(obj, np.ndarray):
        return [_jsonify(v) for v in obj.tolist()]
    if isinstance(obj, (np.floating, np.integer, np.bool_)):
        return obj.item()
    return obj


def _detection_fields(det) -> dict:
    return {
        "changed": det.changed,
        "k_hat": det.estimate.k,
        "tau_hat": det.estimate.tau,
        "lambda": det.lambda_used,
        "gamma": det.gamma_used,
    }


def cmd_detect(args) -> tuple[dict, int]:
    Y = read_csv(args.input, args.header)
    det = detect_change(Y, tau_init=args.tau_init, lam=args.lam, gamma=args.gamma)
    report = {"schema": SCHEMA, "command": "detect", **_detection_fields(det)}
    return report, 0


def cmd_estimate(args) -> tuple[dict, int]:
    Y = read_csv(args.input, args.header)
    res = full_pipeline(Y, tau_init=args.tau_init, alpha=args.alpha,
                        lam=args.lam, gamma=args.gamma, with_ci=False)
    report = {
        "schema": SCHEMA,
        "command": "estimate",
        **_detection_fields(res.detection),
        "status": res.status,
        "k_tilde": res.pls_estimate.k if res.pls_estimate else None,
        "tau_tilde": res.pls_estimate.tau if res.pls_estimate else None,
    }
    return report, 0


def _mc_settings(args) -> QuantileMCSettings:
    return QuantileMCSettings(
        grid_half_width=args.grid_R,
        grid_step=args.grid_h,
        paths=args.paths,
        seed=args.seed if args.seed is not None else QuantileMCSettings().seed,
    )


def cmd_infer(args) -> tuple[dict, int]:
    Y = read_csv(args.input, args.header)
    res = full_pipeline(Y, tau_init=args.tau_init, alpha=args.alpha,
                        lam=args.lam, gamma=args.gamma, with_ci=True,
                        mc=_mc_settings(args), cache_path=args.cache)
    report = {
        "schema": SCHEMA,
        "command": "infer",
        **_detection_fields(res.detection),
        "status": res.status,
        "k_tilde": res.pls_estimate.k if res.pls_estimate else None,
        "tau_tilde": res.pls_estimate.tau if res.pls_estimate else None,
        "alpha": args.alpha,
        "xi_sq": None,
        "sigma_sq": None,
        "c_alpha": None,
        "ci_int": None,
        "ci_frac": None,
    }
    inf = res.inference
    if inf is not None:
        report.update(
            xi_sq=inf.xi_sq_hat,
            sigma_sq=inf.sigma_sq_hat,
            c_alpha=inf.c_alpha,
            ci_int=list(inf.interval_int),
            ci_frac=list(inf.interval_frac),
        )
    return report, 2 if res.status == "no_change" else 0


def cmd_simulate(args) -> tuple[dict, int]:
    cfg = SimConfig(
        T=args.T, p=args.p, s=args.s, tau0=args.tau0, rho=args.rho,
        reps=args.reps, seed=args.seed if args.seed is not None else 0,
        alpha=args.alpha, tau_init=args.tau_init, gamma_off=args.gamma_off,
    )
    report_obj = run_monte_carlo(cfg, estimator=args.estimator, n_jobs=args.jobs,
                                 mc=_mc_settings(args), cache_path=args.cache)
    metrics = report_obj.as_dict()
    records = metrics.pop("per_rep_records")
    if args.records_csv:
        _write_records_csv(args.records_csv, records)
    report = {
        "schema": SCHEMA,
        "command": "simulate",
        "estimator": args.estimator,
        "config": asdict(cfg),
        "metrics": metrics,
        "records": records,
    }
    return report, 0


def _write_records_csv(path, records) -> None:
    if not records:
        return
    keys = list(records[0].keys())
    with open(path, "w", encoding="utf-8", newline="") as fh:
        writer = csv.DictWriter(fh, fieldnames=keys)
        writer.writeheader()
        writer.writerows(records)


def cmd_quantile(args) -> tuple[dict, int]:
    mc = _mc_settings(args)
    c = limit_quantile(args.alpha, mc, cache_path=args.cache)
    report = {
        "schema": SCHEMA,
        "command": "quantile",
        "alpha": args.alpha,
        "c_alpha": c,
        "paths": mc.paths,
        "grid_R": mc.grid_half_width,
        "grid_h": mc.grid_step,
        "seed": mc.seed,
    }
    return report, 0


class _Parser(argparse.ArgumentParser):
    def error(self, message):  # exit 1 on usage errors; 2 is reserved for "no change"
        self.print_usage(sys.stderr)
        print(json.dumps({"error": message}), file=sys.stderr)
        raise SystemExit(1)


def _add_io_options(sub):
    sub.add_argument("--input", required=True, help="CSV file, rows are observations")
    sub.add_argument("--output", default=None, help="write the JSON report here (default stdout)")
    sub.add_argument("--header", action=argparse.BooleanOptionalAction, default=False,
                     help="whether the CSV carries a single header row")
    sub.add_argument("--tau-init", type=float, default=0.5, dest="tau_init")
    sub.add_argument("--lambda", type=float, default=None, dest="lam",
                     help="fixed shrinkage level (default: criterion-selected)")
    sub.add_argument("--gamma", type=float, default=None,
                     help="fixed detection penalty (default: criterion-selected)")


def _add_mc_options(sub):
    sub.add_argument("--paths", type=int, default=QuantileMCSettings().paths)
    sub.add_argument("--grid-R", type=float, default=QuantileMCSettings().grid_half_width, dest="grid_R")
    sub.add_argument("--grid-h", type=float, default=QuantileMCSettings().grid_step, dest="grid_h")
    sub.add_argument("--cache", default=None, help="quantile cache file")


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="cpinfer", description=__doc__)
    subs = parser.add_subparsers(dest="command", required=True)

    p_detect = subs.add_parser("detect", help="flag whether a mean shift exists")
    _add_io_options(p_detect)
    p_detect.set_defaults(func=cmd_detect)

    p_est = subs.add_parser("estimate", help="detect and locate the shift")
    _add_io_options(p_est)
    p_est.add_argument("--alpha", type=float, default=0.05)
    p_est.set_defaults(func=cmd_estimate)

    p_inf = subs.add_parser("infer", help="detect, locate, and build the interval")
    _add_io_options(p_inf)
    p_inf.add_argument("--alpha", type=float, default=0.05)
    p_inf.add_argument("--seed", type=int, default=None, help="quantile simulation seed")
    _add_mc_options(p_inf)
    p_inf.set_defaults(func=cmd_infer)

    p_sim = subs.add_parser("simulate", help="run a Monte Carlo design cell")
    p_sim.add_argument("--output", default=None)
    p_sim.add_argument("--T", type=int, required=True)
    p_sim.add_argument("--p", type=int, required=True)
    p_sim.add_argument("--s", type=int, default=5)
    p_sim.add_argument("--tau0", type=float, required=True)
    p_sim.add_argument("--rho", type=float, default=0.5)
    p_sim.add_argument("--reps", type=int, default=100)
    p_sim.add_argument("--seed", type=int, default=0)
    p_sim.add_argument("--alpha", type=float, default=0.05)
    p_sim.add_argument("--tau-init", type=float, default=0.5, dest="tau_init")
    p_sim.add_argument("--gamma-off", action="store_true", dest="gamma_off",
                       help="force the detection penalty to zero")
    p_sim.add_argument("--estimator", choices=["al1", "pls", "pls_ci"], default="pls_ci")
    p_sim.add_argument("--jobs", type=int, default=1)
    p_sim.add_argument("--records-csv", default=None, dest="records_csv",
                       help="also write per-replication records as CSV")
    _add_mc_options(p_sim)
    p_sim.set_defaults(func=cmd_simulate)

    p_q = subs.add_parser("quantile", help="critical value of the limiting law")
    p_q.add_argument("--output", default=None)
    p_q.add_argument("--alpha", type=float, default=0.05)
    p_q.add_argument("--seed", type=int, default=None)
    _add_mc_options(p_q)
    p_q.set_defaults(func=cmd_quantile)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        report, code = args.func(args)
    except (ValueError, OSError) as exc:
        print(json.dumps({"error": str(exc)}), file=sys.stderr)
        return 1
    text = json.dumps(_jsonify(report), indent=2)
    if getattr(args, "output", None):
        with open(args.output, "w", encoding="utf-8") as fh:
            fh.write(text + "\n")
    else:
        print(text)
    return code


if __name__ == "__main__":
    raise SystemExit(main())

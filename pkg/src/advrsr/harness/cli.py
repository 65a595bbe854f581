"""Command line entry point: ``advrsr {gen,fit,oracle,diag,sweep,report}``.

Exit codes: 0 success, 1 bad arguments or config, 2 runtime failure (and
``oracle`` on a degenerate instance).
"""

from __future__ import annotations

import argparse
import csv
import sys
import time
from pathlib import Path

import numpy as np

from ..dataset import fixture_axis_split, fixture_heavy_axis, load_dataset, save_dataset
from ..diagnostics import DEFAULT_GAMMA, stability_lower_bound
from ..errors import ConfigError, RSRError
from ..grassmann import largest_angle
from ..oracles import Status, l0_bruteforce, snr_and_thresholds, well_defined_check
from .config import ESTIMATORS, MODELS, load_config, parse_value
from .report import report_phase_transition
from .sweep import fit_estimator, fmt, make_dataset, sweep

EXIT_OK, EXIT_CONFIG, EXIT_RUNTIME = 0, 1, 2
FIXTURES = {"axis_split": fixture_axis_split, "heavy_axis": fixture_heavy_axis}


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(EXIT_CONFIG, f"{self.prog}: error: {message}\n")


def _kv(items, allowed, where) -> dict:
    out = {}
    for item in items or []:
        if "=" not in item:
            raise ConfigError(f"{where}: expected key=value, got {item!r}")
        k, v = item.split("=", 1)
        k = k.strip()
        if allowed is not None and k not in allowed:
            raise ConfigError(f"{where}: unknown field {k!r}; expected one of {sorted(allowed)}")
        out[k] = parse_value(v)
    return out


def _line(pairs) -> str:
    return " ".join(f"{k}={fmt(v) if v is not None else 'none'}" for k, v in pairs)


def cmd_gen(args) -> int:
    if args.model in FIXTURES:
        p = _kv(args.set, {"d", "D", "N_in", "N_out"}, f"gen {args.model}")
        missing = {"d", "D", "N_in", "N_out"} - set(p)
        if missing:
            raise ConfigError(f"gen {args.model}: missing field(s) {sorted(missing)}")
        ds = FIXTURES[args.model](int(p["d"]), int(p["D"]), int(p["N_in"]), int(p["N_out"]))
    else:
        spec = MODELS[args.model]
        p = _kv(args.set, spec["required"] | spec["optional"], f"gen {args.model}")
        missing = spec["required"] - set(p)
        if missing:
            raise ConfigError(f"gen {args.model}: missing field(s) {sorted(missing)}")
        ds = make_dataset(args.model, p, np.random.default_rng(args.seed))
        ds = type(ds)(ds.points, ds.inlier_mask, ds.truth, {**ds.meta, "generator": args.model, "seed": args.seed})
    save_dataset(ds, args.output)
    print(_line([("wrote", args.output), ("D", ds.D), ("N", ds.N), ("N_in", ds.n_in), ("N_out", ds.n_out)]))
    return EXIT_OK


def cmd_fit(args) -> int:
    params = _kv(args.set, ESTIMATORS[args.estimator], f"fit {args.estimator}")
    ds = load_dataset(args.dataset)
    d = args.d if args.d is not None else (ds.linear_truth.dim if ds.linear_truth else None)
    if d is None:
        raise ConfigError("fit: dataset has no truth, pass -d")
    rng = np.random.default_rng(args.seed)
    t0 = time.perf_counter()
    fit = fit_estimator(ds.points, d, args.estimator, params, rng, ds.inlier_mask, ds.truth)
    wall = (time.perf_counter() - t0) * 1e3
    theta = largest_angle(fit.linear, ds.linear_truth) if ds.linear_truth is not None else None
    pairs = [("estimator", args.estimator), ("theta1", theta), ("energy", fit.energy),
             ("iterations", fit.iterations), ("wall_ms", f"{wall:.3f}")]
    if fit.affine is not None:
        pairs.append(("offset_norm", float(np.linalg.norm(fit.affine.offset))))
    print(_line(pairs))
    if args.trace:
        if fit.trace is None:
            print(f"note: {args.estimator} has no iteration trace; {args.trace} not written", file=sys.stderr)
        else:
            fit.trace.to_csv(args.trace)
    return EXIT_OK


def cmd_oracle(args) -> int:
    ds = load_dataset(args.dataset)
    d = args.d if args.d is not None else (ds.linear_truth.dim if ds.linear_truth else None)
    if d is None:
        raise ConfigError("oracle: dataset has no truth, pass -d")
    res = l0_bruteforce(ds.points, d)
    pairs = [("status", res.status.value), ("best_count", res.best_count),
             ("co_maximizers", len(res.co_maximizers)), ("truncated", res.truncated)]
    if ds.linear_truth is not None:
        pairs.append(("well_defined", well_defined_check(ds, d).value))
        pairs.append(("theta1_best_truth", largest_angle(res.best, ds.linear_truth)))
        pairs.extend(snr_and_thresholds(ds, d).as_dict().items())
    print(_line(pairs))
    return EXIT_RUNTIME if res.status == Status.DEGENERATE else EXIT_OK


def cmd_diag(args) -> int:
    ds = load_dataset(args.dataset)
    rep = stability_lower_bound(ds, args.gamma).as_dict()
    for k, v in rep.items():
        print(f"{k}={fmt(v)}")
    if args.csv:
        path = Path(args.csv)
        new = not path.exists() or path.stat().st_size == 0
        with open(path, "a", newline="") as fh:
            w = csv.writer(fh, lineterminator="\n")
            if new:
                w.writerow(["dataset"] + list(rep))
            w.writerow([args.dataset] + [fmt(v) for v in rep.values()])
    return EXIT_OK


def cmd_sweep(args) -> int:
    cfg = load_config(args.config)
    if args.seed is not None:
        cfg.base_seed = args.seed
    paths = sweep(cfg, workers=args.workers, output_dir=args.output_dir)
    for kind, p in paths.items():
        print(f"{kind}={p}")
    return EXIT_OK


def cmd_report(args) -> int:
    text, _, paths = report_phase_transition(args.summary, args.x, args.output_dir)
    print(text)
    for p in paths:
        print(f"csv={p}")
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    ap = _Parser(prog="advrsr", description="Robust subspace recovery under adversarial outliers.")
    sub = ap.add_subparsers(dest="command", required=True, parser_class=_Parser)

    g = sub.add_parser("gen", help="write a dataset file")
    g.add_argument("model", choices=sorted(MODELS) + sorted(FIXTURES))
    g.add_argument("-o", "--output", required=True)
    g.add_argument("--set", action="append", metavar="KEY=VALUE", help="model parameter (repeatable)")
    g.add_argument("--seed", type=int, default=0)
    g.set_defaults(func=cmd_gen)

    f = sub.add_parser("fit", help="fit one estimator to a dataset file")
    f.add_argument("dataset")
    f.add_argument("-e", "--estimator", choices=sorted(ESTIMATORS), default="sggd")
    f.add_argument("-d", type=int, help="subspace dimension (default: truth dimension)")
    f.add_argument("--set", action="append", metavar="KEY=VALUE", help="estimator config field (repeatable)")
    f.add_argument("--seed", type=int, default=0)
    f.add_argument("--trace", metavar="CSV", help="write the iteration trace")
    f.set_defaults(func=cmd_fit)

    o = sub.add_parser("oracle", help="exact l0 and well-definedness checks (N <= 25)")
    o.add_argument("dataset")
    o.add_argument("-d", type=int)
    o.set_defaults(func=cmd_oracle)

    di = sub.add_parser("diag", help="stability report against the truth")
    di.add_argument("dataset")
    di.add_argument("--gamma", type=float, default=DEFAULT_GAMMA)
    di.add_argument("--csv", help="append the report as a row of this file")
    di.set_defaults(func=cmd_diag)

    s = sub.add_parser("sweep", help="run an experiment config")
    s.add_argument("config")
    s.add_argument("--seed", type=int, help="override base_seed")
    s.add_argument("--workers", type=int, help="worker processes (default: $ADVRSR_WORKERS or CPU count)")
    s.add_argument("--output-dir")
    s.set_defaults(func=cmd_sweep)

    r = sub.add_parser("report", help="phase-transition summary of a summary.csv")
    r.add_argument("summary")
    r.add_argument("--x", default="snr", help="column used as the SNR axis")
    r.add_argument("--output-dir")
    r.set_defaults(func=cmd_report)
    return ap


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except (RSRError, ValueError, KeyError, OSError, FloatingPointError) as exc:
        print(f"error: {type(exc).__name__}: {exc}", file=sys.stderr)
        return EXIT_RUNTIME


if __name__ == "__main__":
    sys.exit(main())

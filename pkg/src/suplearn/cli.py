"""``sl`` command line: recommend, run, predict.

Exit codes: 0 success, 2 input or validation error, 3 runtime failure.
"""
from __future__ import annotations

import argparse
import csv
import os
import sys
import warnings
from pathlib import Path

import numpy as np

from . import advisor, engine
from .config import dump_config, library_from, load_config, recommendation_to_config
from .dataset import (
    PreprocessOptions,
    effective_sample_size,
    load_csv,
    parse_numeric_columns,
    preprocess,
    read_table,
)
from .errors import InputError, RuntimeFailure, SchemaMismatch, SuperLearnerError
from .folds import folds_for_dataset
from .persist import load_archive, save_fit

EXIT_OK, EXIT_INPUT, EXIT_RUNTIME = 0, 2, 3


def _fmt(x) -> str:
    x = float(x)
    return "NA" if np.isnan(x) else repr(x)


def write_report(fit, path) -> None:
    """CV risk report: one row per candidate (and eSL), fold risks in order."""
    v = fit.fold_assignment.v
    with open(path, "w", newline="", encoding="utf-8") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(["name", "mean_risk"] + [f"fold_{i}" for i in range(1, v + 1)]
                   + ["weight", "selected", "failed", "reason"])
        for r in fit.cv_table.rows:
            w.writerow([r.name, _fmt(r.mean_risk)] + [_fmt(x) for x in r.per_fold]
                       + [_fmt(r.weight), str(r.selected).lower(), str(r.failed).lower(), r.reason])


def _sniff_outcome_type(path, outcome):
    header, rows = read_table(path, [outcome])
    y = parse_numeric_columns(header, rows, [outcome])[:, 0]
    return "binary" if np.all((y == 0) | (y == 1)) else "continuous"


def cmd_recommend(args) -> int:
    outcome_type = args.outcome_type
    if outcome_type == "auto":
        outcome_type = _sniff_outcome_type(args.data, args.outcome)
    d = load_csv(args.data, args.outcome, args.covariates, args.cluster, outcome_type)
    rec = advisor.recommend(d, args.goal, args.budget)
    out = Path(args.out)
    data_ref = os.path.relpath(Path(args.data).resolve(), out.resolve().parent)
    cfg = recommendation_to_config(rec, data_ref, args.outcome, outcome_type, args.covariates, args.cluster)
    out.write_text(dump_config(cfg), encoding="utf-8")
    for line in rec.rationale:
        print(line)
    print(f"config written to {out}")
    return EXIT_OK


def _resolve_data(cfg, config_path):
    p = Path(cfg["data"])
    return p if p.is_absolute() else Path(config_path).resolve().parent / p


def run_config(cfg: dict, config_path=".", threads: int = 1):
    """Execute a resolved config; returns ``(fit, dataset, log)``."""
    d = load_csv(_resolve_data(cfg, config_path), cfg["outcome"], cfg["covariates"], cfg["cluster"],
                 cfg["outcome_type"])
    log = None
    if cfg["preprocess"] is not None:
        d, log = preprocess(d, PreprocessOptions(**cfg["preprocess"]))
    lib = library_from(cfg)
    seed = cfg["cv"]["seed"]
    fa = folds_for_dataset(d, cfg["cv"]["scheme"], cfg["cv"]["v"], seed)
    mode = cfg["mode"]
    if mode == "dsl":
        fit = engine.fit_dsl(d, fa, lib, cfg["metric"], seed, threads)
    elif mode == "esl":
        esl = lib.esl_specs[0] if lib.esl_specs else engine.EslSpec("esl", "nnls_convex")
        fit = engine.fit_esl(d, fa, lib, cfg["metric"], esl.meta, seed, threads, members=esl.members)
    else:
        fit = engine.fit_dsl_with_esl_candidates(d, fa, lib, cfg["metric"], cfg["inner_v"], seed, threads)
    return fit, d, log


def cmd_run(args) -> int:
    cfg = load_config(args.config)
    if args.seed is not None:
        cfg["cv"]["seed"] = int(args.seed)
    threads = args.threads or int(os.environ.get("SL_THREADS", 0) or 0) or cfg["threads"]
    fit_path = args.out or cfg["output"]["fit"]
    report_path = args.report or cfg["output"]["report"]
    if not fit_path or not report_path:
        raise InputError("both a fit archive path (--out) and a report path (--report) are required")
    fit, d, log = run_config(cfg, args.config, threads)
    Path(fit_path).write_bytes(save_fit(fit, cfg))
    write_report(fit, report_path)
    ess = effective_sample_size(d)
    if fit.kind == "dsl":
        print(f"selected: {fit.selected_name}")
    else:
        weights = ", ".join(f"{m}={w:.4g}" for m, w in zip(fit.members, fit.meta.weights) if w)
        print(f"ensemble weights: {weights}")
    print(f"metric: {fit.metric.id}  V: {fit.fold_assignment.v}  n_eff: {ess.n_eff}")
    if log is not None:
        dropped = log.dropped_constant + log.dropped_sparse + [b for _, b in log.dropped_correlated]
        print(f"preprocess: dropped {len(dropped)} covariates, omitted {len(log.omitted_outlier_rows)} rows")
    for r in fit.cv_table.rows:
        if r.failed:
            print(f"failed: {r.name}: {r.reason}", file=sys.stderr)
    for note in fit.notes:
        print(f"note: {note}")
    return EXIT_OK


def cmd_predict(args) -> int:
    fit, _ = load_archive(Path(args.fit).read_bytes())
    header, rows = read_table(args.data)
    need = list(fit.schema.covariate_names)
    missing = [c for c in need if c not in header]
    if missing:
        raise SchemaMismatch(f"{args.data} lacks covariate column(s): {', '.join(missing)}")
    extra = [c for c in header if c not in need and c != fit.schema.outcome_name]
    if extra:
        warnings.warn(f"ignoring columns not used by the fit: {', '.join(extra)}", stacklevel=1)
    x = parse_numeric_columns(header, rows, need)
    pred = engine.sl_predict(fit, x)
    with open(args.out, "w", newline="", encoding="utf-8") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(["row_index", "prediction"])
        for i, p in enumerate(pred):
            w.writerow([i, repr(float(p))])
    print(f"{len(pred)} predictions written to {args.out}")
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="sl", description="Cross-validated super learner")
    sub = ap.add_subparsers(dest="command", required=True)

    r = sub.add_parser("recommend", help="derive a run config from a dataset")
    r.add_argument("--data", required=True)
    r.add_argument("--outcome", required=True)
    r.add_argument("--goal", choices=advisor.GOALS, default="estimate_function")
    r.add_argument("--budget", choices=advisor.BUDGETS, default="medium")
    r.add_argument("--cluster")
    r.add_argument("--covariates", nargs="+")
    r.add_argument("--outcome-type", choices=["auto", "continuous", "binary"], default="auto")
    r.add_argument("--out", required=True)
    r.set_defaults(func=cmd_recommend)

    u = sub.add_parser("run", help="fit a super learner from a config")
    u.add_argument("--config", required=True)
    u.add_argument("--out", help="fit archive path")
    u.add_argument("--report", help="CV risk report (CSV)")
    u.add_argument("--threads", type=int)
    u.add_argument("--seed", type=int)
    u.set_defaults(func=cmd_run)

    p = sub.add_parser("predict", help="predict new rows with a saved fit")
    p.add_argument("--fit", required=True)
    p.add_argument("--data", required=True)
    p.add_argument("--out", required=True)
    p.set_defaults(func=cmd_predict)
    return ap


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except (InputError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INPUT
    except (RuntimeFailure, SuperLearnerError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_RUNTIME


if __name__ == "__main__":
    sys.exit(main())

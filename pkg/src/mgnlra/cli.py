"""Command-line front end.

File formats:

* series: UTF-8 text, one value per line, ``NA`` for a missing value;
* banded factor: line ``k`` (0-based) holds superdiagonal ``k`` of the upper
  factor ``C`` of ``W = C^T C``, i.e. ``N - k`` whitespace-separated numbers;
* config: YAML with optional ``weight`` and ``solver`` sections;
* traces and tables: CSV with a header row.

Exit codes: 0 success, 1 failed ordering assertion, 2 input error.
"""
from __future__ import annotations

import argparse
import csv
import logging
import sys
from pathlib import Path

import numpy as np
import yaml
from scipy import stats

from . import bench
from .core import GlrrError, TimeSeries
from .solver import METHODS, SolverConfig, initial_glrr_from_svd, solve
from .weights import WeightSpec, apply_mask, ar_precision, identity_weight

EXIT_OK, EXIT_ASSERT, EXIT_INPUT = 0, 1, 2
MISSING = "NA"
SOLVER_KEYS = ("max_iterations", "shrink", "min_step", "compensated",
               "decrease_tol", "method", "fd_step", "zero_tol")

log = logging.getLogger("mgnlra")


class InputError(Exception):
    pass


def fmt(v) -> str:
    """Shortest round-tripping text for a number; ``NA`` for missing."""
    if v is None:
        return MISSING
    if isinstance(v, (bool, np.bool_)):
        return str(bool(v)).lower()
    if isinstance(v, (int, np.integer)):
        return str(int(v))
    if isinstance(v, (float, np.floating)):
        return MISSING if not np.isfinite(v) else repr(float(v))
    return str(v)


def read_series(path) -> TimeSeries:
    path = Path(path)
    try:
        lines = path.read_text(encoding="utf-8").splitlines()
    except OSError as exc:
        raise InputError(f"cannot read series file {path}: {exc.strerror}") from exc
    values, mask = [], []
    for lineno, line in enumerate(lines, 1):
        tok = line.strip()
        if not tok:
            continue
        if tok == MISSING:
            values.append(0.0)
            mask.append(False)
            continue
        try:
            values.append(float(tok))
        except ValueError:
            raise InputError(f"{path}:{lineno}: not a number: {tok!r}") from None
        if not np.isfinite(values[-1]):
            raise InputError(f"{path}:{lineno}: non-finite value {tok!r}; use {MISSING}")
        mask.append(True)
    if not values:
        raise InputError(f"{path}: no values")
    return TimeSeries(values, mask)


def write_series(path, values, mask=None) -> None:
    values = np.asarray(values, dtype=float).ravel()
    mask = np.ones(values.size, dtype=bool) if mask is None else np.asarray(mask)
    text = "".join((fmt(float(v)) if m else MISSING) + "\n" for v, m in zip(values, mask))
    Path(path).write_text(text, encoding="utf-8")


def write_csv(path, rows: list[dict], columns: list[str] | None = None) -> None:
    columns = columns or (list(rows[0]) if rows else [])
    with open(path, "w", newline="", encoding="utf-8") as fh:
        wr = csv.writer(fh, lineterminator="\n")
        wr.writerow(columns)
        for row in rows:
            wr.writerow([fmt(row[c]) for c in columns])


def read_csv(path) -> list[dict]:
    with open(path, newline="", encoding="utf-8") as fh:
        return list(csv.DictReader(fh))


def read_factor(path, N: int) -> WeightSpec:
    path = Path(path)
    try:
        lines = [ln for ln in path.read_text(encoding="utf-8").splitlines() if ln.strip()]
    except OSError as exc:
        raise InputError(f"cannot read factor file {path}: {exc.strerror}") from exc
    if not lines:
        raise InputError(f"{path}: empty factor file")
    band = np.zeros((len(lines), N))
    for k, line in enumerate(lines):
        try:
            row = np.array(line.split(), dtype=float)
        except ValueError:
            raise InputError(f"{path}:{k + 1}: not a list of numbers") from None
        if row.size != N - k:
            raise InputError(f"{path}:{k + 1}: expected {N - k} values for "
                             f"superdiagonal {k}, got {row.size}")
        band[k, : N - k] = row
    return WeightSpec(band, np.ones(N, dtype=bool))


def parse_weight(text: str) -> dict:
    """``identity``, ``ar:<phi1,phi2,...>:<sigma2>`` or ``factor:<file>``."""
    kind, _, rest = text.partition(":")
    if kind == "identity" and not rest:
        return {"kind": "identity"}
    if kind == "ar":
        coeffs, _, sigma2 = rest.rpartition(":")
        try:
            phi = [float(c) for c in coeffs.split(",")]
            return {"kind": "ar", "phi": phi, "sigma2": float(sigma2)}
        except ValueError:
            pass
    if kind == "factor" and rest:
        return {"kind": "factor", "file": rest}
    raise InputError(f"bad weight spec {text!r}; expected identity, "
                     "ar:<phi,...>:<sigma2> or factor:<file>")


def build_weight(spec: dict, series: TimeSeries) -> WeightSpec:
    kind = spec.get("kind", "identity")
    N = series.N
    try:
        if kind == "identity":
            w = identity_weight(N)
        elif kind == "ar":
            w = ar_precision(spec["phi"], float(spec.get("sigma2", 1.0)), N)
        elif kind == "factor":
            w = read_factor(spec["file"], N)
        else:
            raise InputError(f"unknown weight kind {kind!r}")
    except (KeyError, ValueError) as exc:
        raise InputError(f"bad weight settings {spec}: {exc}") from exc
    return w if series.complete else apply_mask(w, series.mask)


def load_config(path) -> dict:
    path = Path(path)
    try:
        doc = yaml.safe_load(path.read_text(encoding="utf-8")) or {}
    except OSError as exc:
        raise InputError(f"cannot read config file {path}: {exc.strerror}") from exc
    except yaml.YAMLError as exc:
        raise InputError(f"{path}: invalid YAML: {exc}") from exc
    if not isinstance(doc, dict):
        raise InputError(f"{path}: top level must be a mapping")
    unknown = set(doc.get("solver", {}) or {}) - set(SOLVER_KEYS)
    if unknown:
        raise InputError(f"{path}: unknown solver keys {sorted(unknown)}")
    return doc


def read_glrr(path) -> np.ndarray:
    ts = read_series(path)
    if not ts.complete:
        raise InputError(f"{path}: GLRR file may not contain {MISSING}")
    return np.asarray(ts.values)


TRACE_COLUMNS = ["iteration", "objective", "tau", "alpha0", "delta_norm", "gamma",
                 "imag_residual", "rank_deficient", "step_time"]


def cmd_approx(args) -> int:
    cfg_doc = load_config(args.config) if args.config else {}
    series = read_series(args.input)
    weight = parse_weight(args.weight) if args.weight else dict(cfg_doc.get("weight") or {})
    w = build_weight(weight, series)
    solver_kw = dict(cfg_doc.get("solver") or {})
    rank = args.rank if args.rank is not None else cfg_doc.get("rank")
    if rank is None:
        raise InputError("rank not given (use --rank or 'rank' in the config)")
    if args.compensated:
        solver_kw["compensated"] = True
    try:
        cfg = SolverConfig(rank=int(rank), **solver_kw)
        a0 = read_glrr(args.init) if args.init else initial_glrr_from_svd(series, cfg.rank)
        report = solve(series, w, a0, cfg)
    except (ValueError, GlrrError) as exc:
        raise InputError(str(exc)) from exc
    write_series(args.output, report.signal)
    write_series(args.glrr_output or f"{args.output}.glrr", report.glrr)
    if args.trace:
        cols = _drop_timing(TRACE_COLUMNS) if args.no_timing else TRACE_COLUMNS
        rows = [{c: getattr(rec, c) for c in cols} for rec in report.records]
        write_csv(args.trace, rows, cols)
    print(f"{report.termination} after {report.iterations} iterations, "
          f"objective {report.objective:.6e}")
    return EXIT_OK


QUAD_TRACE = ["N", "method", "repeat", "seed", "distance", "rank_share", "iterations",
              "accepted", "termination", "monotone", "iter_time", "wall_time"]
QUAD_TABLE = ["N", "method", "repeats", "mean_distance", "mean_rank_share",
              "mean_iterations", "mean_iter_time"]


def _drop_timing(columns):
    return [c for c in columns if "time" not in c]


def _bench_quadratic(args) -> int:
    methods = _parse_list(args.methods, str)
    bad = set(methods) - set(METHODS)
    if bad:
        raise InputError(f"unknown methods {sorted(bad)}; expected {list(METHODS)}")
    sizes = _parse_list(args.sizes, int)
    if min(sizes) < 7:
        raise InputError("quadratic sizes must be >= 7")
    rows = bench.run_comparison(sizes, methods, args.repeats, args.seed, args.weight_kind,
                                args.compensated, args.max_iterations, args.workers)
    table = bench.aggregate(rows)
    trace_cols, table_cols = QUAD_TRACE, QUAD_TABLE
    if args.no_timing:
        trace_cols, table_cols = _drop_timing(QUAD_TRACE), _drop_timing(QUAD_TABLE)
    write_csv(args.output, table, table_cols)
    if args.trace:
        write_csv(args.trace, rows, trace_cols)
    if args.assert_order:
        if not {"mgn", "fdvpgn"} <= set(methods):
            raise InputError("--assert-order needs both mgn and fdvpgn")
        means = {r["method"]: r["mean_distance"] for r in table if r["N"] == max(sizes)}
        if means["mgn"] > means["fdvpgn"]:
            print(f"ordering violated at N={max(sizes)}: mgn mean distance "
                  f"{means['mgn']:.6e} > fdvpgn mean distance {means['fdvpgn']:.6e}")
            return EXIT_ASSERT
    return EXIT_OK


def _bench_gaps(args) -> int:
    rows = bench.run_gap_experiment(args.repeats, args.seed, args.noise, not args.no_gaps,
                                    ("identity", "ar1"), args.compensated, args.workers)
    if args.trace:
        write_csv(args.trace, rows, ["seed", "identity", "ar1"])
    diff = np.array([r["identity"] - r["ar1"] for r in rows])
    pvalue = (stats.ttest_1samp(diff, 0.0, alternative="greater").pvalue
              if diff.size > 1 else float("nan"))
    table = [{"weight": k, "repeats": len(rows),
              "mean_rmse": float(np.mean([r[k] for r in rows]))}
             for k in ("identity", "ar1")]
    write_csv(args.output, table, ["weight", "repeats", "mean_rmse"])
    if args.assert_order:
        if not (table[1]["mean_rmse"] < table[0]["mean_rmse"] and pvalue < 0.05):
            print(f"ordering not established: ar1 mean RMSE {table[1]['mean_rmse']:.6e}, "
                  f"identity mean RMSE {table[0]['mean_rmse']:.6e}, p={pvalue:.3g}")
            return EXIT_ASSERT
    return EXIT_OK


def _parse_list(text: str, conv):
    try:
        out = [conv(t) for t in text.split(",") if t.strip()]
    except ValueError:
        raise InputError(f"bad list {text!r}") from None
    if not out:
        raise InputError(f"empty list {text!r}")
    return out


def cmd_bench(args) -> int:
    if args.repeats < 1:
        raise InputError("--repeats must be >= 1")
    if args.experiment == "quadratic":
        return _bench_quadratic(args)
    return _bench_gaps(args)


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="mgnlra", description=__doc__.splitlines()[0])
    p.add_argument("-v", "--verbose", action="store_true")
    sub = p.add_subparsers(dest="command", required=True)

    ap = sub.add_parser("approx", help="approximate a series by a rank-r GLRR signal")
    ap.add_argument("--input", required=True)
    ap.add_argument("--rank", type=int)
    ap.add_argument("--weight", help="identity | ar:<phi,...>:<sigma2> | factor:<file>")
    ap.add_argument("--config")
    ap.add_argument("--init", help="initial GLRR vector file (default: from SVD)")
    ap.add_argument("--output", required=True)
    ap.add_argument("--glrr-output", help="default: <output>.glrr")
    ap.add_argument("--trace")
    ap.add_argument("--compensated", action="store_true")
    ap.add_argument("--no-timing", action="store_true", help="omit timing from the trace")
    ap.set_defaults(func=cmd_approx)

    bp = sub.add_parser("bench", help="run an experiment and write result tables")
    bp.add_argument("--experiment", choices=("quadratic", "gaps"), required=True)
    bp.add_argument("--sizes", default="100")
    bp.add_argument("--repeats", type=int, default=10)
    bp.add_argument("--seed", type=int, default=0)
    bp.add_argument("--methods", default="mgn")
    bp.add_argument("--weight-kind", choices=("identity", "ar1"), default="identity",
                    help="weight for the quadratic experiment")
    bp.add_argument("--noise", choices=("white", "ar1"), default="ar1",
                    help="noise for the gap experiment")
    bp.add_argument("--no-gaps", action="store_true")
    bp.add_argument("--max-iterations", type=int, default=200)
    bp.add_argument("--compensated", action="store_true")
    bp.add_argument("--workers", type=int, default=1)
    bp.add_argument("--output", required=True)
    bp.add_argument("--trace", help="per-repeat rows")
    bp.add_argument("--assert-order", action="store_true")
    bp.add_argument("--no-timing", action="store_true",
                    help="omit timing columns so outputs are reproducible byte for byte")
    bp.set_defaults(func=cmd_bench)
    return p


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.DEBUG if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    try:
        return args.func(args)
    except InputError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INPUT
    except OSError as exc:
        print(f"error: {exc.filename}: {exc.strerror}", file=sys.stderr)
        return EXIT_INPUT

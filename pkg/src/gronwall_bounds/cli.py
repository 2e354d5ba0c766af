"""Command-line front end: ``gronwall-bounds CONFIG.json``.

Exit status is 0 on success, 1 when a verification fails and 2 on any
input or hypothesis error.
"""

import argparse
import csv
import json
import sys
from pathlib import Path

import numpy as np

from .errors import GronwallError
from .expr import parse_signal_expression
from .gronwall import BoundProblem, classic_bound, general_bound, two_sided_envelope
from .linsys import LinearSystem, TensorSignal, norm_envelope
from .oracle import discrete_equality_case
from .riccati import ComparisonSetup, build_comparison, check_theorem21, verify_comparison
from .signal import Grid, Signal

MODES = ("bound", "envelope", "linsys", "riccati-compare", "verify-suite")

EXIT_OK = 0
EXIT_VERIFY = 1
EXIT_INPUT = 2


class ConfigError(GronwallError, ValueError):
    pass


def _fmt(x):
    return format(float(x), ".17g")


def write_csv(path, header, columns):
    """RFC 4180 CSV, LF line endings, 17 significant digits."""
    rows = zip(*columns)
    with open(path, "w", newline="", encoding="utf-8") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(header)
        for row in rows:
            w.writerow([_fmt(x) for x in row])


def _require(cfg, key, where="config"):
    if key not in cfg:
        raise ConfigError(f"missing field {key!r} in {where}")
    return cfg[key]


def _number(value, name):
    if isinstance(value, bool) or not isinstance(value, (int, float)):
        raise ConfigError(f"field {name!r} must be a number, got {value!r}")
    return float(value)


def parse_grid(cfg, n_override=None):
    g = _require(cfg, "grid")
    if not isinstance(g, dict):
        raise ConfigError("field 'grid' must be an object with t0, t1, n")
    t0 = _number(_require(g, "t0", "grid"), "grid.t0")
    t1 = _number(_require(g, "t1", "grid"), "grid.t1")
    n = n_override if n_override is not None else _require(g, "n", "grid")
    if isinstance(n, bool) or not isinstance(n, int):
        raise ConfigError(f"grid.n must be an integer, got {n!r}")
    try:
        return Grid(t0, t1, n)
    except ValueError as exc:
        raise ConfigError(f"invalid grid: {exc}") from None


def parse_signal(spec, grid, name):
    """Expression string, number, or list of samples over ``[t0, t1]``."""
    if isinstance(spec, str):
        return parse_signal_expression(spec)
    if isinstance(spec, (int, float)) and not isinstance(spec, bool):
        return Signal.constant(spec)
    if isinstance(spec, list):
        try:
            samples = np.array(spec, dtype=float)
        except (TypeError, ValueError):
            raise ConfigError(f"samples for {name!r} must be numbers") from None
        if samples.ndim != 1 or samples.size < 2:
            raise ConfigError(f"samples for {name!r} need at least two values")
        own = Grid(grid.t0, grid.t1, samples.size)
        return Signal.sampled(samples, own, label=name)
    raise ConfigError(f"field {name!r} must be an expression, a number or a sample list")


def _signal_field(cfg, key, grid, default=None):
    if key not in cfg:
        if default is None:
            raise ConfigError(f"missing field {key!r} in config")
        return parse_signal(default, grid, key)
    return parse_signal(cfg[key], grid, key)


def _report(args, line):
    if not args.quiet:
        print(line)


def run_bound(cfg, grid, out, args):
    c = _number(_require(cfg, "c"), "c")
    p = BoundProblem(c, _signal_field(cfg, "v", grid), _signal_field(cfg, "f", grid, "0"), grid)
    classic = classic_bound(p)
    general = general_bound(p)
    write_csv(out, ["t", "classic_bound", "general_bound"], [grid.nodes, classic, general])
    _report(args, f"wrote {grid.n} rows to {out}")
    return EXIT_OK


def run_envelope(cfg, grid, out, args):
    u0 = _number(_require(cfg, "u0"), "u0")
    env = two_sided_envelope(
        u0, _signal_field(cfg, "v", grid), _signal_field(cfg, "f", grid, "0"), grid
    )
    write_csv(out, ["t", "lower", "upper"], [grid.nodes, env.lower, env.upper])
    _report(args, f"wrote {grid.n} rows to {out}")
    return EXIT_OK


def _tensor(spec, grid, name, shape):
    """Matrix (d x d) or vector (d) of signal specs."""
    d = shape[0]

    def row(items, label):
        if not isinstance(items, list) or len(items) != d:
            raise ConfigError(f"field {name!r} must have shape {shape}")
        return [parse_signal(item, grid, f"{label}[{j}]") for j, item in enumerate(items)]

    if len(shape) == 1:
        return TensorSignal.from_entries(row(spec, name))
    if not isinstance(spec, list) or len(spec) != d:
        raise ConfigError(f"field {name!r} must have shape {shape}")
    return TensorSignal.from_entries([row(r, f"{name}[{i}]") for i, r in enumerate(spec)])


def run_linsys(cfg, grid, out, args):
    Y0 = _require(cfg, "Y0")
    if not isinstance(Y0, list) or not Y0:
        raise ConfigError("field 'Y0' must be a nonempty list of numbers")
    Y0 = np.array([_number(y, "Y0") for y in Y0])
    d = Y0.size
    A = _tensor(_require(cfg, "A"), grid, "A", (d, d))
    g = _tensor(cfg.get("g", [0] * d), grid, "g", (d,))
    report = norm_envelope(LinearSystem(A, g, Y0, grid))
    env = report.envelope
    write_csv(
        out,
        ["t", "lower", "actual_norm", "upper"],
        [grid.nodes, env.lower, report.actual_norm, env.upper],
    )
    _report(args, f"wrote {grid.n} rows to {out}")
    if report.norm_fallback:
        _report(args, "note: Frobenius norm used where power iteration did not converge")
    _report(args, f"max upper gap: {_fmt(report.max_upper_gap)}")
    _report(args, f"max lower gap: {_fmt(report.max_lower_gap)}")
    print(report.verdict())
    return EXIT_OK if report.contained else EXIT_VERIFY


def run_riccati_compare(cfg, grid, out, args):
    c = _number(_require(cfg, "c"), "c")
    p = BoundProblem(c, _signal_field(cfg, "v", grid), _signal_field(cfg, "f", grid, "0"), grid)
    mode = cfg.get("squared_difference", "as_printed")
    if mode not in ("as_printed", "linear"):
        raise ConfigError("squared_difference must be 'as_printed' or 'linear'")
    if "u" in cfg:
        u = _signal_field(cfg, "u", grid)
    else:
        u = discrete_equality_case(p).values
    con = build_comparison(p, u)
    setup = ComparisonSetup(con.linear1, con.riccati2, con.y, con.x, con.y, float(con.y.values[0]))
    report = check_theorem21(setup, grid, squared_difference=mode)
    verdict = verify_comparison(con.y, con.x)
    write_csv(out, ["t", "y", "x"], [grid.nodes, con.y.values, con.x.values])
    _report(args, f"wrote {grid.n} rows to {out}")
    _report(args, str(report))
    print(f"hypotheses hold: {'true' if report.condition_holds else 'false'}")
    print(f"comparison y <= x: {'true' if verdict.holds else 'false'}")
    if verdict.first_violation is not None:
        i, gap = verdict.first_violation
        print(f"first violation: node {i}, y - x = {_fmt(gap)}")
    ok = report.condition_holds and verdict.holds
    return EXIT_OK if ok else EXIT_VERIFY


def run_verify_suite(cfg, grid, out, args):
    from .suite import run_suites

    seed = cfg.get("seed", 42)
    count = cfg.get("count", 20)
    for key, val in (("seed", seed), ("count", count)):
        if isinstance(val, bool) or not isinstance(val, int) or val < 0:
            raise ConfigError(f"field {key!r} must be a nonnegative integer")
    results = run_suites(seed, count, grid)
    write_csv_summary(out, results)
    failed = 0
    for name, passed, total in results:
        print(f"{name}: {passed}/{total} passed")
        failed += total - passed
    print(f"verify-suite: {'PASS' if failed == 0 else 'FAIL'}")
    return EXIT_OK if failed == 0 else EXIT_VERIFY


def write_csv_summary(path, results):
    with open(path, "w", newline="", encoding="utf-8") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(["suite", "passed", "failed"])
        for name, passed, total in results:
            w.writerow([name, passed, total - passed])


RUNNERS = {
    "bound": run_bound,
    "envelope": run_envelope,
    "linsys": run_linsys,
    "riccati-compare": run_riccati_compare,
    "verify-suite": run_verify_suite,
}


def load_config(path):
    try:
        text = Path(path).read_text(encoding="utf-8")
    except OSError as exc:
        raise ConfigError(f"cannot read {path}: {exc.strerror}") from None
    try:
        cfg = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ConfigError(
            f"{path}: line {exc.lineno}, column {exc.colno}: {exc.msg}"
        ) from None
    if not isinstance(cfg, dict):
        raise ConfigError(f"{path}: top level must be a JSON object")
    return cfg


def build_parser():
    ap = argparse.ArgumentParser(
        prog="gronwall-bounds",
        description="Gronwall-Bellman bounds, envelopes and comparison checks.",
    )
    ap.add_argument("config", help="JSON job description")
    ap.add_argument("--output", help="CSV path (overrides the config's 'output')")
    ap.add_argument("--grid-n", type=int, help="override the number of grid nodes")
    ap.add_argument("--quiet", action="store_true", help="only print verdict lines")
    return ap


def run(config_path, output=None, grid_n=None, quiet=False):
    args = argparse.Namespace(quiet=quiet)
    try:
        cfg = load_config(config_path)
        mode = _require(cfg, "mode")
        if mode not in RUNNERS:
            raise ConfigError(f"unknown mode {mode!r}; expected one of {', '.join(MODES)}")
        grid = parse_grid(cfg, grid_n)
        out = output or cfg.get("output") or str(Path(config_path).with_suffix(".csv"))
        return RUNNERS[mode](cfg, grid, out, args)
    except GronwallError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INPUT
    except OSError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INPUT


def main(argv=None):
    args = build_parser().parse_args(argv)
    return run(args.config, args.output, args.grid_n, args.quiet)


if __name__ == "__main__":
    sys.exit(main())

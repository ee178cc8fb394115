"""Command-line interface: ``arbdp badness | bdp | simulate``.

Settings come from built-in defaults, then an optional flat ``key = value``
config file (``--config``), then command-line flags; later sources win.
Exit status: 0 on success, 1 on invalid input, 2 on numerical failure.
"""
from __future__ import annotations

import argparse
import csv
import io
import logging
import math
import os
import sys
import tempfile
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from . import svg
from .breakdown import (
    DEFAULT_WITNESSES,
    DEFAULT_ZETA_SCHEDULE,
    ProcessFamily,
    asymptotic_bdp,
    badness_set,
    finite_sample_bdp,
)
from .estimators import EstimatorKind, LmsConfig, finite_sample_estimate, functional
from .model import ARParams, Contamination, contaminate, simulate_ar1

log = logging.getLogger("arbdp")

EXIT_OK, EXIT_INVALID, EXIT_NUMERIC = 0, 1, 2

BADNESS_ZETAS = tuple(10.0 ** (k / 4) for k in range(25)) + (math.inf,)


class ConfigError(ValueError):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(EXIT_INVALID, f"{self.prog}: error: {message}\n")


# ------------------------------------------------------------ value parsing

def _float(text):
    v = float(text)
    if math.isnan(v):
        raise ValueError("nan is not allowed")
    return v


def float_list(text):
    items = [t.strip() for t in str(text).split(",") if t.strip()]
    if not items:
        raise ValueError("empty list")
    return tuple(_float(t) for t in items)


def theta_range(text):
    lo, sep, hi = str(text).partition(":")
    if not sep:
        raise ValueError("expected LO:HI")
    return (_float(lo), _float(hi))


def witness_list(text):
    if str(text).strip().lower() == "auto":
        return "auto"
    return tuple(theta_range(t) for t in str(text).replace(";", ",").split(",") if t.strip())


def estimator_list(text):
    text = str(text).strip().lower()
    if text == "all":
        return ("OLS", "LMS", "DR")
    out = []
    for t in text.split(","):
        kind = EstimatorKind.parse(t.strip())
        if kind not in (EstimatorKind.OLS, EstimatorKind.LMS, EstimatorKind.DR):
            raise ValueError(f"{t} is not an AR(1) estimator")
        out.append(kind.value)
    return tuple(out)


def positive_int(text):
    v = int(text)
    if v < 1:
        raise ValueError("must be >= 1")
    return v


def nonneg_int(text):
    v = int(text)
    if v < 0:
        raise ValueError("must be >= 0")
    return v


def boolean(text):
    t = str(text).strip().lower()
    if t in ("1", "true", "yes", "on"):
        return True
    if t in ("0", "false", "no", "off"):
        return False
    raise ValueError("expected true/false")


def fmt_choice(text):
    if text not in ("csv", "svg", "both"):
        raise ValueError("expected csv, svg or both")
    return text


@dataclass(frozen=True)
class Opt:
    flag: str
    type: object
    default: object
    help: str
    metavar: str | None = None


COMMON = [
    Opt("out", str, "out", "output directory", "DIR"),
    Opt("seed", int, 0, "base random seed", "N"),
    Opt("format", fmt_choice, "csv", "csv, svg or both", "FMT"),
    Opt("estimator", estimator_list, "all", "ols, lms, dr (comma list) or all", "NAME"),
    Opt("theta-range", theta_range, "-0.9:0.9", "theta range LO:HI (write --theta-range=-0.9:0.9)", "LO:HI"),
    Opt("grid", positive_int, 2001, "theta grid points", "N"),
    Opt("theta-tilde-grid", positive_int, 2001, "LMS slope grid points", "N"),
    Opt("jobs", positive_int, 1, "worker processes", "N"),
]

COMMAND_OPTS = {
    "badness": [
        Opt("p", float_list, "0.05,0.25,0.5", "outlier probabilities", "LIST"),
        Opt("zeta-schedule", float_list, ",".join(f"{z:.10g}" for z in BADNESS_ZETAS),
            "outlier magnitudes, inf allowed", "LIST"),
    ],
    "bdp": [
        Opt("zeta-schedule", float_list, ",".join(f"{z:g}" for z in DEFAULT_ZETA_SCHEDULE),
            "outlier magnitudes; must end with inf", "LIST"),
        Opt("witnesses", witness_list, "auto",
            "compact theta ranges LO:HI,... or auto (nested ranges exhausting (-1, 1))", "LIST"),
        Opt("collapse-eps", _float, 1e-3, "measure below which a badness set counts as null", "EPS"),
        Opt("width", _float, 5e-4, "bisection width in p", "W"),
    ],
    "simulate": [
        Opt("p", float_list, "0", "outlier probabilities", "LIST"),
        Opt("zeta-schedule", float_list, "0", "outlier magnitudes", "LIST"),
        Opt("theta", _float, 0.5, "AR(1) coefficient", "THETA"),
        Opt("n", positive_int, 1000, "sample length", "N"),
        Opt("trials", positive_int, 20, "Monte Carlo trials", "N"),
        Opt("k", nonneg_int, 0, "fixed outlier count (overrides --p when > 0)", "K"),
        Opt("demo", boolean, False, "also run the finite-sample regression demos", None),
        Opt("demo-n", positive_int, 20, "sample size for the regression demos", "N"),
    ],
}


def build_parser():
    parser = _Parser(prog="arbdp", description="Breakdown of AR(1) estimators under additive outliers.")
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)
    helps = {
        "badness": "badness sets over a zeta schedule, one panel per (estimator, p)",
        "bdp": "asymptotic breakdown points by bisection over p",
        "simulate": "finite-sample Monte Carlo of the AR(1) estimators",
    }
    for name, opts in COMMAND_OPTS.items():
        sp = sub.add_parser(name, help=helps[name], description=helps[name],
                            formatter_class=argparse.ArgumentDefaultsHelpFormatter)
        sp.add_argument("--config", metavar="PATH", default=None, help="key = value config file")
        for opt in COMMON + opts:
            dest = opt.flag.replace("-", "_")
            if opt.type is boolean:
                sp.add_argument(f"--{opt.flag}", dest=dest, action="store_const", const=True,
                                default=None, help=f"{opt.help} (default: {opt.default})")
            else:
                sp.add_argument(f"--{opt.flag}", dest=dest, type=opt.type, default=None,
                                metavar=opt.metavar, help=f"{opt.help} (default: {opt.default})")
    return parser


def read_config(path, opts):
    """Parse a flat config file into ``{dest: value}``."""
    by_key = {o.flag: o for o in opts}
    values = {}
    try:
        text = Path(path).read_text()
    except OSError as exc:
        raise ConfigError(f"{path}: cannot read config: {exc.strerror}") from exc
    for lineno, raw in enumerate(text.splitlines(), 1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        key, sep, val = line.partition("=")
        if not sep:
            raise ConfigError(f"{path}:{lineno}: expected key = value")
        key = key.strip().replace("_", "-")
        if key not in by_key:
            raise ConfigError(f"{path}:{lineno}: unknown key '{key}'")
        try:
            values[key.replace("-", "_")] = by_key[key].type(val.strip())
        except ValueError as exc:
            raise ConfigError(f"{path}:{lineno}: {key}: {exc}") from exc
    return values


def resolve(args):
    """Merge defaults, config file and flags into one namespace."""
    opts = COMMON + COMMAND_OPTS[args.command]
    cfg = read_config(args.config, opts) if args.config else {}
    merged = {}
    for o in opts:
        dest = o.flag.replace("-", "_")
        flag_val = getattr(args, dest)
        if flag_val is not None:
            merged[dest] = flag_val
        elif dest in cfg:
            merged[dest] = cfg[dest]
        else:
            merged[dest] = o.type(o.default) if isinstance(o.default, str) else o.default
    ns = argparse.Namespace(command=args.command, **merged)
    _validate(ns)
    return ns


def _validate(ns):
    lo, hi = ns.theta_range
    if not -1.0 < lo < hi < 1.0:
        raise ConfigError(f"theta-range: need -1 < LO < HI < 1, got {lo}:{hi}")
    if ns.grid < 2:
        raise ConfigError("grid: need at least 2 points")
    if ns.theta_tilde_grid < 3:
        raise ConfigError("theta-tilde-grid: need at least 3 points")
    for p in getattr(ns, "p", ()):
        if not 0.0 <= p <= 1.0:
            raise ConfigError(f"p: {p} outside [0, 1]")
    for z in ns.zeta_schedule:
        if z < 0:
            raise ConfigError(f"zeta-schedule: {z} is negative")
    if ns.command == "bdp":
        z = list(ns.zeta_schedule)
        if z != sorted(z) or not math.isinf(z[-1]):
            raise ConfigError("zeta-schedule: must be ascending and end with inf")
        if ns.collapse_eps <= 0:
            raise ConfigError("collapse-eps: must be > 0")
        if not 0 < ns.width < 1:
            raise ConfigError("width: must lie in (0, 1)")
        if ns.witnesses != "auto":
            for a, b in ns.witnesses:
                if not -1.0 < a < b < 1.0:
                    raise ConfigError(f"witnesses: bad range {a}:{b}")
    if ns.command == "simulate":
        if not -1.0 < ns.theta < 1.0:
            raise ConfigError("theta: need |theta| < 1")
        if ns.n < 3:
            raise ConfigError("n: need n >= 3")
        if ns.k > ns.n:
            raise ConfigError("k: cannot exceed n")


# ------------------------------------------------------------------ output

def _num(x):
    x = float(x)
    if math.isinf(x):
        return "inf" if x > 0 else "-inf"
    if math.isnan(x):
        return "nan"
    return f"{x:.10g}"


def _write_atomic(path, text):
    path = Path(path)
    fd, tmp = tempfile.mkstemp(dir=path.parent, prefix=f".{path.name}.")
    with os.fdopen(fd, "w", newline="") as fh:
        fh.write(text)
    os.replace(tmp, path)
    return path


def _csv_text(header, rows):
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(header)
    w.writerows(rows)
    return buf.getvalue()


# ---------------------------------------------------------------- commands

def _panel(task):
    est, p, zetas, family, cfg = task
    rows = []
    for z in zetas:
        s = badness_set(est, family, p, z, lms_cfg=cfg)
        rows.append((z, list(s.intervals)))
    return est, p, rows


def _map(fn, tasks, jobs):
    if jobs > 1 and len(tasks) > 1:
        with ProcessPoolExecutor(max_workers=jobs) as pool:
            return list(pool.map(fn, tasks))
    return [fn(t) for t in tasks]


def cmd_badness(ns):
    """Badness-set intervals for each (estimator, p) over the zeta schedule."""
    out = Path(ns.out)
    out.mkdir(parents=True, exist_ok=True)
    family = ProcessFamily(*ns.theta_range, grid_points=ns.grid)
    cfg = LmsConfig(theta_tilde_grid=ns.theta_tilde_grid)
    tasks = [(e, p, ns.zeta_schedule, family, cfg) for e in ns.estimator for p in ns.p]
    results = _map(_panel, tasks, ns.jobs)
    written = []
    header = ["estimator", "p", "zeta", "interval_lo", "interval_hi"]
    all_rows = []
    panels = {}
    for est, p, rows in results:
        panel_rows = [[est, _num(p), _num(z), _num(lo), _num(hi)] for z, ivs in rows for lo, hi in ivs]
        all_rows += panel_rows
        panels[(est, p)] = rows
        if ns.format in ("csv", "both"):
            written.append(_write_atomic(out / f"badness_{est}_p{p:g}.csv", _csv_text(header, panel_rows)))
    if ns.format in ("csv", "both"):
        written.append(_write_atomic(out / "badness.csv", _csv_text(header, all_rows)))
    if ns.format in ("svg", "both"):
        finite = [z for z in ns.zeta_schedule if math.isfinite(z) and z > 0]
        zmax = max(finite) if finite else 1e6
        text = svg.badness_figure(panels, list(ns.estimator), list(ns.p), zeta_max=max(zmax, 10.0))
        written.append(_write_atomic(out / "badness.svg", text))
    return written


def _witnesses(ns):
    if ns.witnesses == "auto":
        return DEFAULT_WITNESSES if ns.grid == 2001 else tuple(
            ProcessFamily(w.theta_lo, w.theta_hi, ns.grid, w.spacing) for w in DEFAULT_WITNESSES)
    return tuple(ProcessFamily(a, b, grid_points=ns.grid) for a, b in ns.witnesses)


def _bdp_task(task):
    est, witnesses, ns_items = task
    ns = argparse.Namespace(**ns_items)
    return asymptotic_bdp(
        est, witnesses, collapse_eps=ns.collapse_eps, zeta_schedule=ns.zeta_schedule,
        width=ns.width, lms_cfg=LmsConfig(theta_tilde_grid=ns.theta_tilde_grid),
    )


def cmd_bdp(ns):
    """Asymptotic breakdown points, summary plus full bisection trace."""
    out = Path(ns.out)
    out.mkdir(parents=True, exist_ok=True)
    witnesses = _witnesses(ns)
    tasks = [(e, witnesses, vars(ns)) for e in ns.estimator]
    reports = _map(_bdp_task, tasks, ns.jobs)
    written = []
    if ns.format in ("csv", "both"):
        summary = "estimator,bdp\n" + "".join(r.summary_line() + "\n" for r in reports)
        written.append(_write_atomic(out / "bdp_summary.csv", summary))
        trace = "".join(r.to_csv() if i == 0 else r.to_csv().split("\n", 1)[1]
                        for i, r in enumerate(reports))
        written.append(_write_atomic(out / "bdp_trace.csv", trace))
    if ns.format in ("svg", "both"):
        series = {}
        for r in reports:
            by_p = {}
            for row in r.trace:
                by_p[row.search_var] = min(by_p.get(row.search_var, math.inf), row.measure)
            ps = sorted(by_p)
            series[f"{r.estimator.value} (bdp {r.bdp:.3f})"] = (ps, [max(by_p[p], 1e-12) for p in ps])
        text = svg.scatter(series, "min over zeta of the intersection measure", "p", "measure", logy=True)
        written.append(_write_atomic(out / "bdp_trace.svg", text))
    for r in reports:
        for d in r.diagnostics:
            print(f"{r.estimator.value}: {d}", file=sys.stderr)
        print(r.summary_line())
    return written


def _simulate_cell(task):
    est, theta, n, p, k, z, trial, seed = task
    s = simulate_ar1(ARParams(theta), n, seed + trial)
    if k > 0:
        c = Contamination(k=k, zeta=z)
    else:
        c = Contamination(p=p, zeta=z)
    y = contaminate(s, c, seed=seed + 1_000_003 + trial)
    return finite_sample_estimate(est, y)


def cmd_simulate(ns):
    """Per-trial finite-sample estimates and summary quantiles."""
    out = Path(ns.out)
    out.mkdir(parents=True, exist_ok=True)
    ps = (0.0,) if ns.k > 0 else ns.p
    cells = [(e, p, z) for e in ns.estimator for p in ps for z in ns.zeta_schedule]
    tasks = [(e, ns.theta, ns.n, p, ns.k, z, t, ns.seed)
             for e, p, z in cells for t in range(ns.trials)]
    estimates = _map(_simulate_cell, tasks, ns.jobs)

    trial_rows, summary_rows, series = [], [], {}
    it = iter(estimates)
    cfg = LmsConfig(theta_tilde_grid=ns.theta_tilde_grid)
    for e, p, z in cells:
        vals = np.array([next(it) for _ in range(ns.trials)])
        for t, v in enumerate(vals):
            trial_rows.append([e, _num(ns.theta), ns.n, _num(p), ns.k, _num(z), t, ns.seed + t, _num(v)])
        if ns.k == 0:
            asym = float(functional(e, ns.theta, p, z, cfg))
        else:
            asym = math.nan
        q05, q50, q95 = np.quantile(vals, [0.05, 0.5, 0.95])
        summary_rows.append([e, _num(ns.theta), ns.n, _num(p), ns.k, _num(z), ns.trials,
                             _num(vals.mean()), _num(q05), _num(q50), _num(q95), _num(asym)])
        series[f"{e} p={p:g} zeta={z:g}"] = (list(range(ns.trials)), list(vals))

    written = []
    if ns.format in ("csv", "both"):
        written.append(_write_atomic(out / "simulate_trials.csv", _csv_text(
            ["estimator", "theta", "n", "p", "k", "zeta", "trial", "seed", "estimate"], trial_rows)))
        written.append(_write_atomic(out / "simulate_summary.csv", _csv_text(
            ["estimator", "theta", "n", "p", "k", "zeta", "trials", "mean", "q05", "q50", "q95",
             "asymptotic"], summary_rows)))
    if ns.format in ("svg", "both"):
        written.append(_write_atomic(out / "simulate.svg", svg.scatter(
            series, f"estimates, theta = {ns.theta:g}, n = {ns.n}", "trial", "estimate")))

    if ns.demo:
        reports = [
            finite_sample_bdp("ClampedOLS", n=ns.demo_n, seed=ns.seed, k_max=2),
            finite_sample_bdp("FracCounterexample", n=ns.demo_n, seed=ns.seed, k_max=1),
        ]
        trace = "".join(r.to_csv() if i == 0 else r.to_csv().split("\n", 1)[1]
                        for i, r in enumerate(reports))
        written.append(_write_atomic(out / "demo_trace.csv", trace))
        summary = "estimator,bdp\n" + "".join(f"{r.estimator.value},{_num(r.bdp)}\n" for r in reports)
        written.append(_write_atomic(out / "demo_summary.csv", summary))
        for r in reports:
            for d in r.diagnostics:
                print(f"{r.estimator.value}: {d}", file=sys.stderr)
    return written


COMMANDS = {"badness": cmd_badness, "bdp": cmd_bdp, "simulate": cmd_simulate}


def main(argv=None):
    logging.basicConfig(level=os.environ.get("ARBDP_LOGLEVEL", "WARNING"),
                        format="%(levelname)s %(name)s: %(message)s")
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        ns = resolve(args)
    except ConfigError as exc:
        print(f"arbdp: error: {exc}", file=sys.stderr)
        return EXIT_INVALID
    try:
        COMMANDS[ns.command](ns)
    except (ArithmeticError, FloatingPointError) as exc:
        print(f"arbdp: numerical failure: {exc}", file=sys.stderr)
        return EXIT_NUMERIC
    except ValueError as exc:
        print(f"arbdp: error: {exc}", file=sys.stderr)
        return EXIT_INVALID
    return EXIT_OK


if __name__ == "__main__":
    sys.exit(main())

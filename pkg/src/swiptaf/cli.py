"""Command-line front end: eval, sweep, simulate, validate and specfun eval.

Exit status: 0 success, 1 usage or configuration error, 2 numerical failure,
3 validation failure.
"""

import argparse
import ast
import sys
import time
import warnings
from concurrent.futures import ProcessPoolExecutor
from functools import partial

import numpy as np
from scipy import integrate

from . import config as cfgmod
from .endtoend import SystemConfig, e2e_ccdf, e2e_cdf, e2e_pdf
from .errors import ConfigError, SwiptafError
from .mcsim import Probes, SimBatch, SimMode, integrate_halfline, quadrature_oracle, simulate
from .metrics import (
    MODULATIONS,
    aser,
    capacity_cifr,
    capacity_opra,
    capacity_ora,
    capacity_tcifr,
    opra_cutoff,
)
from .specfun import HFunctionSpec, IncompleteHSpec, MetricResult, fox_h, incomplete_fox_h

EXIT_OK, EXIT_USAGE, EXIT_NUMERIC, EXIT_VALIDATION = 0, 1, 2, 3
METRICS = ("cdf", "pdf", "aser", "ora", "opra", "cifr", "tcifr", "opra-cutoff")
DEFAULT_SEED = 20240101
DEFAULT_STREAMS = 8
MIN_POWERED_DRAWS = 10 ** 4
MAX_RELATIVE_SE = 0.05


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(EXIT_USAGE, f"{self.prog}: error: {message}\n")


def fmt(value):
    """CSV number: scientific, 12 significant digits; empty when missing."""
    if value is None:
        return ""
    return f"{float(value):.11e}"


# -- metric dispatch -----------------------------------------------------------

def parse_column(text):
    """'aser:QPSK' -> ('aser', 'QPSK'); 'cdf:5' -> ('cdf', 5.0)."""
    name, _, arg = text.strip().partition(":")
    name = name.lower()
    if name not in METRICS:
        raise UsageError(f"unknown metric {name!r}; choose from {', '.join(METRICS)}")
    if name == "aser":
        arg = (arg or "BPSK").upper()
        if arg not in MODULATIONS:
            raise UsageError(f"unknown modulation {arg!r}")
        return name, arg
    if name in ("cdf", "pdf"):
        if not arg:
            raise UsageError(f"metric {name} needs a threshold, e.g. {name}:5")
        return name, float(arg)
    if name == "tcifr":
        return name, float(arg) if arg else None
    return name, None


def evaluate(cfg: SystemConfig, name, arg=None) -> MetricResult:
    if name == "cdf":
        return e2e_cdf(cfg, arg)
    if name == "pdf":
        return e2e_pdf(cfg, arg)
    if name == "aser":
        return aser(cfg, MODULATIONS[arg])
    if name == "ora":
        return capacity_ora(cfg)
    if name == "opra":
        return capacity_opra(cfg)
    if name == "cifr":
        return capacity_cifr(cfg)
    if name == "tcifr":
        return capacity_tcifr(cfg, arg)
    if name == "opra-cutoff":
        solve = opra_cutoff(cfg)
        return MetricResult(solve.gamma_star, abs(solve.residual),
                            info={"residual": solve.residual, "bracket": solve.bracket,
                                  "iterations": solve.iterations})
    raise UsageError(f"unknown metric {name!r}")


# -- grids and sweeps -------------------------------------------------------

def make_grid(start, stop, points, scale="linear"):
    if points < 2:
        raise UsageError("a sweep grid needs at least 2 points")
    if scale == "linear":
        return np.linspace(start, stop, points)
    if scale == "log":
        if start <= 0 or stop <= 0:
            raise UsageError("log grid needs positive endpoints")
        return np.geomspace(start, stop, points)
    if scale == "dB":
        return 10.0 ** (np.linspace(start, stop, points) / 10.0)
    raise UsageError(f"unknown grid scale {scale!r}")


def config_at(raw, param, value):
    section, key = param.split(".", 1)
    raw = {s: dict(v) for s, v in raw.items()}
    cfgmod.set_value(raw, section, key, repr(float(value)))
    return cfgmod.build_config(raw)


def _analytic_point(raw, param, columns, value):
    cfg = config_at(raw, param, value) if param else cfgmod.build_config(raw)
    cells, notes = [], []
    for col in columns:
        name, arg = parse_column(col)
        try:
            r = evaluate(cfg, name, arg)
            cells.append((float(r.value), float(r.error)))
        except SwiptafError as exc:
            cells.append((None, None))
            notes.append(f"{param}={value!r} {col}: {type(exc).__name__}: {exc}")
    return cells, notes


def _mc_probes(cfg, columns):
    grid, mods = [], []
    opra_cut = tcifr_cut = None
    for col in columns:
        name, arg = parse_column(col)
        if name == "cdf":
            grid.append(arg)
        elif name == "aser":
            mods.append(MODULATIONS[arg])
        elif name == "opra":
            opra_cut = opra_cutoff(cfg).gamma_star
        elif name == "tcifr":
            tcifr_cut = arg if arg is not None else opra_cutoff(cfg).gamma_star
        elif name in ("pdf", "opra-cutoff"):
            raise UsageError(f"metric {name} has no Monte-Carlo estimator")
    return Probes(tuple(grid), tuple(dict.fromkeys(mods)), opra_cut, tcifr_cut)


def _mc_cells(stats, columns):
    cells = []
    grid = list(stats.cdf_grid) if stats.cdf_grid is not None else []
    for col in columns:
        name, arg = parse_column(col)
        if name == "cdf":
            j = grid.index(arg)
            cells.append((stats.cdf[j], stats.cdf_stderr[j]))
        else:
            key = {"aser": f"aser_{arg}", "ora": "ora", "opra": "opra", "cifr": "cifr",
                   "tcifr": "tcifr"}[name]
            e = stats[key]
            cells.append((e.value, e.stderr))
    return cells


def _mc_point(raw, param, columns, mode, draws, seed, streams, value):
    cfg = config_at(raw, param, value) if param else cfgmod.build_config(raw)
    try:
        probes = _mc_probes(cfg, columns)
        stats = simulate(SimBatch(cfg, mode, draws, seed, streams), probes)
        return _mc_cells(stats, columns), []
    except SwiptafError as exc:
        return [(None, None)] * len(columns), [f"{param}={value!r}: {type(exc).__name__}: {exc}"]


def run_points(job, values, workers):
    if workers > 1 and len(values) > 1:
        with ProcessPoolExecutor(max_workers=workers) as pool:
            return list(pool.map(job, values))
    return [job(v) for v in values]


def write_table(out, header, rows, notes):
    lines = [",".join(header)] + [",".join(r) for r in rows]
    text = "\n".join(lines) + "\n"
    if out:
        with open(out, "w", encoding="utf-8", newline="") as fh:
            fh.write(text)
        if notes:
            with open(out + ".diag.txt", "w", encoding="utf-8") as fh:
                fh.write("\n".join(notes) + "\n")
    else:
        sys.stdout.write(text)
    for n in notes:
        print(f"warning: {n}", file=sys.stderr)


# -- subcommands ----------------------------------------------------------------

def cmd_eval(args):
    cfg, _ = cfgmod.parse_config(args.config, args.set)
    col = args.metric
    if args.metric in ("cdf", "pdf"):
        if args.z is None:
            raise UsageError(f"metric {args.metric} needs --z")
        col = f"{args.metric}:{args.z!r}"
    elif args.metric == "aser":
        col = f"aser:{args.modulation}"
    elif args.metric == "tcifr" and args.gamma0 is not None:
        col = f"tcifr:{args.gamma0!r}"
    name, arg = parse_column(col)
    r = evaluate(cfg, name, arg)
    header = ["metric", "value", "error"]
    row = [col, fmt(r.value), fmt(r.error)]
    if name == "opra-cutoff":
        header.append("residual")
        row.append(fmt(r.info["residual"]))
    write_table(args.out, header, [row], [])
    if args.out:
        print(",".join(row))
    return EXIT_OK


def _sweep_values(args):
    return make_grid(args.start, args.stop, args.points, args.scale)


def cmd_sweep(args):
    _, raw = cfgmod.parse_config(args.config, args.set)
    columns = [c for c in args.metric.split(",") if c]
    for c in columns:
        parse_column(c)
    values = _sweep_values(args)
    config_at(raw, args.param, values[0])      # validates the parameter path
    job = partial(_analytic_point, raw, args.param, columns)
    results = run_points(job, list(values), args.workers)
    header = [args.param] + [h for c in columns for h in (c, f"{c}_err")]
    rows, notes = [], []
    for v, (cells, n) in zip(values, results):
        rows.append([fmt(v)] + [fmt(x) for cell in cells for x in cell])
        notes += n
    write_table(args.out, header, rows, notes)
    return EXIT_OK


def cmd_simulate(args):
    _, raw = cfgmod.parse_config(args.config, args.set)
    columns = [c for c in args.metric.split(",") if c]
    for c in columns:
        parse_column(c)
    values = list(_sweep_values(args)) if args.param else [None]
    if args.param:
        config_at(raw, args.param, values[0])
    job = partial(_mc_point, raw, args.param, columns, SimMode(args.mode), args.draws,
                  args.seed, args.streams)
    if args.param:
        results = run_points(job, values, args.workers)
    else:
        # a single point: spread its streams over the workers instead
        cfg = cfgmod.build_config(raw)
        probes = _mc_probes(cfg, columns)
        stats = simulate(SimBatch(cfg, args.mode, args.draws, args.seed, args.streams), probes,
                         workers=args.workers)
        results = [(_mc_cells(stats, columns), [])]
    header = ([args.param] if args.param else []) + [h for c in columns for h in (c, f"{c}_se")]
    rows, notes = [], []
    for v, (cells, n) in zip(values, results):
        rows.append(([fmt(v)] if args.param else []) + [fmt(x) for cell in cells for x in cell])
        notes += n
    write_table(args.out, header, rows, notes)
    return EXIT_OK


# -- validation ---------------------------------------------------------------

def _verdict(closed, quad, mc, se, draws, rtol=1e-3, nsig=3.0):
    """Return (status, detail) for one closed/quadrature/Monte-Carlo triple."""
    ok_quad = abs(closed - quad) <= rtol * abs(quad)
    if draws < MIN_POWERED_DRAWS or not np.isfinite(se) or se > MAX_RELATIVE_SE * abs(closed):
        return ("PASS" if ok_quad else "FAIL", "inconclusive-mc")
    ok_mc = abs(closed - mc) <= nsig * se and abs(quad - mc) <= nsig * se
    return ("PASS" if ok_quad and ok_mc else "FAIL", "")


def _cdf_by_pdf(cfg, z, rtol=1e-9):
    """CDF at ``z`` as the integral of the closed-form PDF (an independent H-function)."""
    total = 0.0
    # bulk first, so the near-origin pieces only need absolute accuracy
    for a, b in ((z * 0.2, z), (z * 1e-2, z * 0.2), (0.0, z * 1e-2)):
        total += integrate.quad(lambda x: e2e_pdf(cfg, x).value, a, b, epsabs=0.1 * rtol * total,
                                epsrel=rtol, limit=200)[0]
    return total


def validation_report(cfg: SystemConfig, draws, seed, streams=DEFAULT_STREAMS, workers=1):
    """Closed form vs quadrature vs Monte-Carlo for every metric at ``cfg``."""
    solve = opra_cutoff(cfg)
    gstar = solve.gamma_star
    probes = Probes(grid=tuple(float(f * cfg.gamma1_mean) for f in (0.1, 0.3, 1.0, 2.0)),
                    modulations=tuple(MODULATIONS.values()), opra_cutoff=gstar,
                    tcifr_cutoff=gstar)
    stats = simulate(SimBatch(cfg, SimMode.INDEPENDENT, draws, seed, streams), probes, workers)
    rows = []

    def add(name, closed, quad, est):
        status, note = _verdict(closed, quad, est.value, est.stderr, draws)
        rows.append((name, closed, quad, est.value, est.stderr, status, note))

    for z, emp, se in zip(stats.cdf_grid, stats.cdf, stats.cdf_stderr):
        closed = e2e_cdf(cfg, float(z)).value
        quad = _cdf_by_pdf(cfg, float(z))
        status, note = _verdict(closed, quad, emp, se, draws)
        rows.append((f"cdf@{z:.6g}", closed, quad, emp, se, status, note))
    for name, mod in MODULATIONS.items():
        add(f"aser_{name}", aser(cfg, mod).value,
            quadrature_oracle(cfg, "ASER", {"modulation": mod}).value, stats[f"aser_{name}"])
    add("ora", capacity_ora(cfg).value, quadrature_oracle(cfg, "ORA").value, stats["ora"])
    add("opra", capacity_opra(cfg).value,
        quadrature_oracle(cfg, "OPRA", {"cutoff": gstar}).value, stats["opra"])
    add("cifr", capacity_cifr(cfg).value, quadrature_oracle(cfg, "CIFR").value, stats["cifr"])
    add("tcifr", capacity_tcifr(cfg, gstar).value,
        quadrature_oracle(cfg, "TCIFR", {"gamma0": gstar}).value, stats["tcifr"])
    # the cutoff equation itself, re-evaluated by quadrature at the root
    g_quad = integrate_halfline(lambda z: e2e_ccdf(cfg, z).value / z ** 2, cfg.gamma1_mean, gstar,
                                1e-10)[0] - 1.0
    cut_ok = abs(solve.residual) <= 1e-9 and abs(g_quad) <= 1e-6
    rows.append(("opra_cutoff", gstar, g_quad, float("nan"), float("nan"),
                 "PASS" if cut_ok else "FAIL", f"quadrature column is g(cutoff); closed-form residual={solve.residual:.3e}"))
    return rows


def cmd_validate(args):
    cfg, _ = cfgmod.parse_config(args.config, args.set)
    t0 = time.perf_counter()
    rows = validation_report(cfg, args.draws, args.seed, args.streams, args.workers)
    header = ["comparison", "closed_form", "quadrature", "monte_carlo", "mc_stderr", "status",
              "note"]
    body = [[r[0], fmt(r[1]), fmt(r[2]), fmt(r[3]), fmt(r[4]), r[5], r[6]] for r in rows]
    write_table(args.out, header, body, [])
    failed = [r[0] for r in rows if r[5] != "PASS"]
    if any(r[6] == "inconclusive-mc" for r in rows):
        print("warning: Monte-Carlo budget too small; MC comparisons inconclusive",
              file=sys.stderr)
    print(f"validate: {len(rows) - len(failed)}/{len(rows)} passed in "
          f"{time.perf_counter() - t0:.1f}s", file=sys.stderr)
    if failed:
        print(f"validation failed: {', '.join(failed)}", file=sys.stderr)
        return EXIT_VALIDATION
    return EXIT_OK


# -- specfun eval -----------------------------------------------------------

def parse_h_description(text):
    """Parse e.g. "m=1, n=0, upper=[], lower=[(0,1)], z=1".

    Entries with a third number make the spec an incomplete-upper H.
    """
    try:
        call = ast.parse(f"f({text})", mode="eval").body
        fields = {kw.arg: ast.literal_eval(kw.value) for kw in call.keywords}
    except (SyntaxError, ValueError) as exc:
        raise UsageError(f"cannot parse H-function description: {exc}") from exc
    missing = {"m", "n", "upper", "lower", "z"} - set(fields)
    if missing or call.args:
        raise UsageError(f"H-function description needs m, n, upper, lower, z "
                         f"(missing {sorted(missing)})")
    upper, lower = list(fields["upper"]), list(fields["lower"])
    if all(isinstance(e, (int, float)) for e in upper) and upper:
        upper = [tuple(upper)]
    if all(isinstance(e, (int, float)) for e in lower) and lower:
        lower = [tuple(lower)]
    incomplete = any(len(e) == 3 for e in upper + lower)
    cls = IncompleteHSpec if incomplete else HFunctionSpec
    try:
        return cls(int(fields["m"]), int(fields["n"]), tuple(upper), tuple(lower),
                   complex(fields["z"]) if isinstance(fields["z"], complex) else float(fields["z"]))
    except (TypeError, ValueError) as exc:
        raise ConfigError(f"invalid H-function spec: {exc}") from exc


def cmd_specfun(args):
    spec = parse_h_description(args.description)
    r = incomplete_fox_h(spec) if isinstance(spec, IncompleteHSpec) else fox_h(spec)
    value = complex(r.value)
    if value.imag == 0:
        print(f"value {value.real:.14e}")
    else:
        print(f"value {value.real:.14e} {value.imag:+.14e}j")
    print(f"error {r.error:.14e}")
    print(f"contour c={r.contour[0]:.14e} L={r.contour[1]:.6g} nodes={r.nodes}")
    return EXIT_OK


# -- argument parsing ---------------------------------------------------------

def _common(p, seeded=False):
    p.add_argument("--config", help="configuration file (INI sections nak/am/energy/system)")
    p.add_argument("--set", action="append", default=[], metavar="PATH=VALUE",
                   help="override a config value, e.g. energy.ps_n1_db=50 (repeatable)")
    p.add_argument("--out", help="write CSV here instead of standard output")
    p.add_argument("--workers", type=int, default=1, help="worker processes")
    if seeded:
        p.add_argument("--seed", type=int, default=DEFAULT_SEED)
        p.add_argument("--draws", type=int, default=10 ** 6)
        p.add_argument("--streams", type=int, default=DEFAULT_STREAMS,
                       help="random streams (fixes the partition, not the parallelism)")


def _grid_args(p, required):
    p.add_argument("--param", required=required, help="swept config path, e.g. energy.ps_n1_db")
    p.add_argument("--start", type=float, default=0.0)
    p.add_argument("--stop", type=float, default=60.0)
    p.add_argument("--points", type=int, default=13)
    p.add_argument("--scale", choices=("linear", "log", "dB"), default="linear")


def build_parser():
    parser = _Parser(prog="swiptaf", description=__doc__.splitlines()[0])
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)

    p = sub.add_parser("eval", help="evaluate one metric at the configured point")
    _common(p)
    p.add_argument("metric", choices=METRICS)
    p.add_argument("--z", type=float, help="threshold for cdf/pdf")
    p.add_argument("--modulation", default="BPSK", choices=sorted(MODULATIONS))
    p.add_argument("--gamma0", type=float, help="TCIFR cutoff (default: OPRA cutoff)")
    p.set_defaults(func=cmd_eval)

    p = sub.add_parser("sweep", help="analytic metric sweep over one parameter")
    _common(p)
    _grid_args(p, True)
    p.add_argument("--metric", required=True,
                   help="comma-separated columns, e.g. aser:BPSK,aser:QPSK,ora,cdf:5")
    p.set_defaults(func=cmd_sweep)

    p = sub.add_parser("simulate", help="Monte-Carlo estimates (optionally swept)")
    _common(p, seeded=True)
    _grid_args(p, False)
    p.add_argument("--metric", default="ora", help="comma-separated columns as for sweep")
    p.add_argument("--mode", choices=[m.value for m in SimMode], default=SimMode.COUPLED.value)
    p.set_defaults(func=cmd_simulate)

    p = sub.add_parser("validate", help="closed form vs quadrature vs Monte-Carlo")
    _common(p, seeded=True)
    p.set_defaults(func=cmd_validate)

    p = sub.add_parser("specfun", help="special-function debugging")
    ssub = p.add_subparsers(dest="specfun_command", required=True, parser_class=_Parser)
    q = ssub.add_parser("eval", help="evaluate a Fox H-function")
    q.add_argument("description", help='e.g. "m=1, n=0, upper=[], lower=[(0,1)], z=1"')
    q.set_defaults(func=cmd_specfun)
    return parser


def main(argv=None):
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        with warnings.catch_warnings():
            warnings.simplefilter("ignore", RuntimeWarning)
            return args.func(args)
    except (UsageError, ConfigError) as exc:
        print(f"swiptaf: error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except SwiptafError as exc:
        print(f"swiptaf: numerical failure ({type(exc).__name__}): {exc}", file=sys.stderr)
        return EXIT_NUMERIC


if __name__ == "__main__":
    sys.exit(main())

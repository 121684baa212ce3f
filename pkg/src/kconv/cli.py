"""Command-line front end: ``kconv {run,analyze,table,riemann}``.

Exit status is 0 on success, 1 on a solver or runtime failure and 2 on a
usage or configuration error.  Failures print one machine-readable line to
standard error::

    error: kind=<ErrorClass> level=<n or -> message=<text>
"""
from __future__ import annotations

import argparse
import logging
import sys
import warnings
from pathlib import Path

import numpy as np

from . import bench
from .errors import ConfigError, ConsistencyError, KconvError, ParameterError
from .euler import GasModel
from .riemann import exact_riemann, star_pressure

EXIT_OK, EXIT_FAILURE, EXIT_USAGE = 0, 1, 2


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise UsageError(message)


def _error_line(kind, message, level="-"):
    message = " ".join(str(message).split())
    return f"error: kind={kind} level={level} message={message}"


def split_overrides(extra):
    """``--key=value`` tokens into a dict; anything else is a usage error."""
    out = {}
    for tok in extra:
        if not tok.startswith("--") or "=" not in tok:
            raise UsageError(f"unrecognized argument {tok!r}; overrides take the form --key=value")
        key, value = tok[2:].split("=", 1)
        out[key.replace("-", "_")] = value
    return out


def build_parser() -> argparse.ArgumentParser:
    p = _Parser(prog="kconv", description="Euler finite volume runs and K-convergence analysis.")
    p.add_argument("-v", "--verbose", action="store_true", help="log progress to stderr")
    sub = p.add_subparsers(dest="command", required=True, parser_class=_Parser)

    r = sub.add_parser(
        "run", help="simulate every level of one config and write table.csv",
        description="Run one experiment. Any config key can be overridden as --key=value "
                    f"(keys: {', '.join(bench.CONFIG_KEYS)}); the command line wins over the file.")
    r.add_argument("config", help="key=value config file")
    r.add_argument("--threads", type=int, default=None, help="levels run concurrently (0 = one per CPU)")

    a = sub.add_parser("analyze", help="E1-E4 table from stored snapshots, CSV on stdout")
    a.add_argument("run_dir", help="directory holding level_XXXX/final.eulf")
    a.add_argument("--reference", type=int, default=None, help="reference level (must be the finest)")
    a.add_argument("--q", type=float, default=1.0, help="Wasserstein order (default 1)")
    a.add_argument("--variable", default="rho", choices=bench.VARIABLES)
    a.add_argument("--components", default="tuple", choices=tuple(bench.E4_COMPONENTS),
                   help="atoms of the E4 measures: full tuple or without E")
    a.add_argument("--scaling", default=None, help="comma-separated per-component weights")
    a.add_argument("--threads", type=int, default=None, help="accepted for symmetry; analysis is serial")

    t = sub.add_parser("table", help="merge stored tables into one labelled CSV")
    t.add_argument("run_dirs", nargs="+")
    t.add_argument("--variable", default="rho", choices=bench.VARIABLES)

    s = sub.add_parser("riemann", help="sample the exact 1D Riemann solution")
    s.add_argument("--left", default="1,0,1", help="rho,u,p left of x0 (default Sod)")
    s.add_argument("--right", default="0.125,0,0.1", help="rho,u,p right of x0")
    s.add_argument("--gamma", type=float, default=1.4)
    s.add_argument("--t", type=float, default=0.2)
    s.add_argument("--x0", type=float, default=0.5)
    s.add_argument("--points", type=int, default=101)
    s.add_argument("--star", action="store_true", help="print only p_star,u_star")
    return p


def _triple(text, name):
    try:
        v = [float(x) for x in text.split(",")]
    except ValueError:
        raise UsageError(f"--{name} expects rho,u,p") from None
    if len(v) != 3:
        raise UsageError(f"--{name} expects rho,u,p")
    return np.array(v)


def cmd_run(args, overrides, out, err):
    if args.threads is not None:
        overrides.setdefault("threads", str(args.threads))
    if not Path(args.config).is_file():
        raise ConfigError(f"config file not found: {args.config}")
    config = bench.load_config(args.config, overrides)
    result = bench.run_experiment(config)
    for lv in result.levels:
        status = "failed" if lv.error else "ok"
        print(f"level {lv.n}: {status}", file=err)
    if result.failed:
        lv = result.failed[0]
        print(_error_line("SolverFailure", lv.error, lv.n), file=err)
        return EXIT_FAILURE
    print(f"wrote {Path(config.out_dir) / 'table.csv'}", file=out)
    return EXIT_OK


def q_warning(q, gamma):
    upper = 2.0 * gamma / (gamma + 1.0)
    if not 1.0 <= q < upper:
        return f"q={q} lies outside [1, {upper:.6g}); convergence of the measures is not guaranteed there"
    return None


def cmd_analyze(args, overrides, out, err):
    if overrides:
        raise UsageError(f"analyze takes no --key=value overrides, got {sorted(overrides)}")
    stack = bench.load_stack(args.run_dir, args.reference)
    msg = q_warning(args.q, stack.gas.gamma)
    if msg:
        print(f"warning: {msg}", file=err)
    scaling = None
    if args.scaling:
        try:
            scaling = tuple(float(x) for x in args.scaling.split(","))
        except ValueError:
            raise UsageError("--scaling expects comma-separated numbers") from None
    tables = bench.tables_for(stack, args.q, args.components, scaling)
    out.write(tables[args.variable].to_csv())
    return EXIT_OK


def cmd_table(args, overrides, out, err):
    header = None
    rows = []
    for d in args.run_dirs:
        d = Path(d)
        name = "table.csv" if args.variable == "rho" else f"table_{args.variable}.csv"
        path = d / name
        if not path.is_file():
            raise ConfigError(f"{path}: no stored table")
        meta = bench.read_meta(d / "run_meta.cfg") if (d / "run_meta.cfg").exists() else {}
        label = [meta.get("benchmark", "-"), meta.get("scheme", "-"), args.variable]
        lines = path.read_text().splitlines()
        if header is None:
            header = "benchmark,scheme,variable," + lines[0]
        elif "benchmark,scheme,variable," + lines[0] != header:
            raise ConsistencyError(f"{path}: column layout differs from the first table")
        rows += [",".join(label) + "," + ln for ln in lines[1:]]
    out.write(header + "\n" + "".join(r + "\n" for r in rows))
    return EXIT_OK


def cmd_riemann(args, overrides, out, err):
    gas = GasModel(args.gamma)
    left, right = _triple(args.left, "left"), _triple(args.right, "right")
    if args.star:
        p, u = star_pressure(left, right, gas)
        out.write(f"p_star,u_star\n{float(p):.12g},{float(u):.12g}\n")
        return EXIT_OK
    if not args.t > 0.0 or args.points < 1:
        raise UsageError("--t must be positive and --points at least 1")
    x = (np.arange(args.points) + 0.5) / args.points
    W = exact_riemann(left, right, gas, (x - args.x0) / args.t)
    out.write("x,rho,u,p\n")
    for xi, (r, u, p) in zip(x, W.T):
        out.write(f"{xi:.12g},{r:.12g},{u:.12g},{p:.12g}\n")
    return EXIT_OK


COMMANDS = {"run": cmd_run, "analyze": cmd_analyze, "table": cmd_table, "riemann": cmd_riemann}


def main(argv=None, out=None, err=None) -> int:
    out = sys.stdout if out is None else out
    err = sys.stderr if err is None else err
    parser = build_parser()
    try:
        args, extra = parser.parse_known_args(argv)
        overrides = split_overrides(extra)
        if args.command != "run" and args.command != "analyze" and overrides:
            raise UsageError(f"{args.command} takes no --key=value overrides")
        logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                            format="%(levelname)s %(name)s: %(message)s", stream=err)
        with warnings.catch_warnings():
            warnings.simplefilter("ignore", RuntimeWarning)
            return COMMANDS[args.command](args, overrides, out, err)
    except UsageError as exc:
        print(f"usage: {parser.prog} {{run,analyze,table,riemann}} ... (see --help)", file=err)
        print(_error_line("UsageError", exc), file=err)
        return EXIT_USAGE
    except (ConfigError, ParameterError, ConsistencyError) as exc:
        print(_error_line(type(exc).__name__, exc), file=err)
        return EXIT_USAGE
    except KconvError as exc:
        print(_error_line(type(exc).__name__, exc), file=err)
        return EXIT_FAILURE


if __name__ == "__main__":
    sys.exit(main())

"""Command line front end.

Subcommands: ``run`` (fixed mantissa length), ``search`` (minimal mantissa
length), ``lyapunov``, ``sweep`` and ``verify``.  Primary output goes to
stdout or ``--out``; diagnostics go to stderr.

Exit codes: 0 success, 1 computation error, 2 invalid arguments,
3 precision not reached (cap exceeded, or ``run`` failing at its ``m``),
4 oracle violation.
"""

from __future__ import annotations

import argparse
import contextlib
import json
import re
import sys
from fractions import Fraction

from . import analysis, engine, mp, oracle
from .engine import Mode, RunConfig, Strategy
from .errors import VerorbitError
from .systems import LogisticVariant, MAP_NAMES, named_map

EXIT_OK, EXIT_ERROR, EXIT_USAGE, EXIT_CAP, EXIT_ORACLE = 0, 1, 2, 3, 4

STEP_FIELDS = ("n", "fl_hex", "err_hex", "fl_dec", "err_dec")


class UsageError(Exception):
    pass


def parse_alpha(s: str) -> Fraction:
    """``0``, a decimal, or ``2^-k``."""
    g = re.fullmatch(r"\s*2\^(-?\d+)\s*", s)
    if g:
        return Fraction(2) ** int(g.group(1))
    try:
        q = mp.parse_decimal(s)
    except mp.ParseError:
        raise argparse.ArgumentTypeError(f"bad alpha {s!r}") from None
    if q < 0:
        raise argparse.ArgumentTypeError("alpha must be nonnegative")
    return q


def _decimal_arg(s: str) -> str:
    try:
        mp.parse_decimal(s)
    except mp.ParseError as exc:
        raise argparse.ArgumentTypeError(str(exc)) from None
    return s


def _common() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(add_help=False, allow_abbrev=False)
    p.add_argument("--config", help="key=value file; command-line flags override it")
    p.add_argument("--map", default="logistic", choices=MAP_NAMES)
    p.add_argument("--variant", default="factored", choices=[v.value for v in LogisticVariant])
    p.add_argument("--mu", default="4", type=_decimal_arg)
    p.add_argument("--x0", default="0.22", type=_decimal_arg,
                   help="initial value in the original (unshifted) coordinates")
    p.add_argument("--N", type=int, default=100)
    p.add_argument("--p", type=int, default=6)
    p.add_argument("--mode", default="meanvalue", choices=[m.value for m in Mode])
    p.add_argument("--m0", type=int, default=24)
    p.add_argument("--m-max", type=int, default=1 << 16)
    p.add_argument("--strategy", default="double", choices=[s.value for s in Strategy])
    p.add_argument("--alpha", type=parse_alpha, default=None)
    p.add_argument("--shift", type=_decimal_arg, default=None, nargs="?", const="1", metavar="M",
                   help="iterate f(x - M) + M on D + M (M defaults to 1)")
    p.add_argument("--exact-mu", action="store_true")
    p.add_argument("--no-domain-clamp", action="store_true")
    p.add_argument("--out", help="write primary output here instead of stdout")
    p.add_argument("--format", default="jsonl", choices=("csv", "jsonl"))
    return p


def build_parser() -> argparse.ArgumentParser:
    common = _common()
    parser = argparse.ArgumentParser(prog="verorbit", description=__doc__.splitlines()[0],
                                     allow_abbrev=False)
    sub = parser.add_subparsers(dest="command", required=True)

    def add(name, **kw):
        return sub.add_parser(name, parents=[common], allow_abbrev=False, **kw)

    r = add("run", help="verified orbit at a fixed mantissa length")
    r.add_argument("--m", type=int, default=53)

    add("search", help="minimal mantissa length")

    ly = add("lyapunov", help="Ljapunov averages over an alpha grid")
    ly.add_argument("--orbit-p", type=int, default=10)

    sw = add("sweep", help="CSV table over a mu grid")
    sw.add_argument("--mu-from", default="0.05", type=_decimal_arg)
    sw.add_argument("--mu-to", default="4", type=_decimal_arg)
    sw.add_argument("--mu-step", default="0.05", type=_decimal_arg)
    sw.add_argument("--orbit-p", type=int, default=10)
    sw.add_argument("--slack", type=float, default=0.1)
    sw.add_argument("--jobs", type=int, default=1)

    v = add("verify", help="soundness against exact rational orbits")
    v.add_argument("--mus", default="1,5/2,7/2,15/4,4")
    v.add_argument("--ms", default="24,53,100")
    v.set_defaults(N=20)
    return parser


def _read_config(path: str) -> dict:
    out = {}
    with open(path) as fh:
        for lineno, raw in enumerate(fh, 1):
            line = raw.split("#", 1)[0].strip()
            if not line:
                continue
            key, sep, value = line.partition("=")
            if not sep:
                raise UsageError(f"{path}:{lineno}: expected key=value")
            out[key.strip().lstrip("-")] = value.strip()
    return out


def _apply_config(parser: argparse.ArgumentParser, command: str, cfg: dict) -> None:
    subparser = parser._subparsers._group_actions[0].choices[command]
    by_flag = {}
    for action in subparser._actions:
        for opt in action.option_strings:
            by_flag[opt.lstrip("-")] = action
            by_flag[opt.lstrip("-").replace("-", "_")] = action
    defaults = {}
    for key, value in cfg.items():
        action = by_flag.get(key)
        if action is None or action.dest in ("config", "help"):
            raise UsageError(f"unknown config key {key!r}")
        if isinstance(action, argparse._StoreTrueAction):
            if value.lower() not in ("true", "false", "1", "0", "yes", "no"):
                raise UsageError(f"config key {key!r} expects a boolean")
            defaults[action.dest] = value.lower() in ("true", "1", "yes")
        else:
            defaults[action.dest] = value
    subparser.set_defaults(**defaults)


def parse_args(argv):
    parser = build_parser()
    args = parser.parse_args(argv)
    if args.config:
        try:
            _apply_config(parser, args.command, _read_config(args.config))
        except OSError as exc:
            raise UsageError(f"cannot read config: {exc}") from None
        args = parser.parse_args(argv)
    _validate(args)
    return args


def _validate(args) -> None:
    if args.N < 0:
        raise UsageError("--N must be >= 0")
    if not 2 <= args.m0 <= args.m_max:
        raise UsageError("need 2 <= --m0 <= --m-max")
    if args.command == "run" and args.m < 2:
        raise UsageError("--m must be >= 2")
    if args.command == "sweep" and args.jobs < 1:
        raise UsageError("--jobs must be >= 1")
    if args.command == "verify" and args.N > oracle.MAX_N:
        raise UsageError(f"verify needs --N <= {oracle.MAX_N} (exact orbits double in size per step)")
    if args.command in ("lyapunov", "sweep") and args.N < 1:
        raise UsageError(f"{args.command} needs --N >= 1")


def _map_from(args):
    return named_map(args.map, args.variant, args.mu, exact_mu=args.exact_mu, shift=args.shift)


def _x0(args) -> str:
    return args.x0 if args.shift is None else analysis.shifted_decimal(args.x0, args.shift)


def _run_config(args) -> RunConfig:
    return RunConfig(
        x0=_x0(args), N=args.N, p=args.p, m0=args.m0, m_max=args.m_max,
        mode=Mode(args.mode), strategy=Strategy(args.strategy),
        domain_clamp=not args.no_domain_clamp,
    )


class Output:
    """Primary output sink for one command; CSV or JSON lines."""

    def __init__(self, fh, fmt: str):
        self.fh = fh
        self.fmt = fmt
        self._header_done = False

    def row(self, rec: dict, header=None) -> None:
        if self.fmt == "jsonl":
            self.fh.write(json.dumps(rec, separators=(",", ":")) + "\n")
        else:
            cols = header or list(rec)
            if not self._header_done:
                self.fh.write(",".join(cols) + "\n")
                self._header_done = True
            self.fh.write(",".join(_csv_cell(rec[c]) for c in cols) + "\n")
        self.fh.flush()


def _csv_cell(v) -> str:
    if v is None:
        return ""
    if isinstance(v, float):
        return "%.17g" % v
    return str(v)


def _diag(msg: str) -> None:
    print(msg, file=sys.stderr)


def cmd_run(args, out: Output, fmap) -> int:
    cfg = _run_config(args)
    steps, fail = engine.run_fixed(cfg, args.m, fmap)
    for s in steps:
        out.row(s.record(), STEP_FIELDS)
    summary = {"m": args.m, "status": "Converged" if fail is None else "PrecisionFailed",
               "failure_index": fail}
    if args.format == "jsonl":
        out.row(summary)
    else:
        _diag(json.dumps(summary))
    return EXIT_OK if fail is None else EXIT_CAP


def cmd_search(args, out: Output, fmap) -> int:
    cfg = _run_config(args)

    def trace(m, steps, fail):
        if fail is not None:
            _diag(f"# pass m={m} failed at n={fail}")
            for s in steps:
                _diag(json.dumps({"pass_m": m, **s.record()}, separators=(",", ":")))

    run = engine.find_minimal_mantissa(cfg, fmap, trace)
    for s in run.steps:
        out.row(s.record(), STEP_FIELDS)
    if args.format == "jsonl":
        out.row(run.summary())
    else:
        _diag(json.dumps(run.summary()))
    return EXIT_OK if run.converged else EXIT_CAP


def cmd_lyapunov(args, out: Output, fmap) -> int:
    alphas = [args.alpha] if args.alpha is not None else list(analysis.ALPHA_GRID) + [Fraction(0)]
    knobs = dict(m0=args.m0, m_max=args.m_max, strategy=Strategy(args.strategy),
                 domain_clamp=not args.no_domain_clamp)
    try:
        ests = analysis.lyapunov_estimates(fmap, _x0(args), args.N, alphas, args.orbit_p, **knobs)
    except analysis.NotConverged as exc:
        _diag(f"error: {exc}")
        return EXIT_CAP
    cols = ("alpha", "n", "lambda_n", "lambda_over_ln2", "partial_sum", "orbit_p")
    for e in ests:
        out.row({"alpha": float(e.alpha), "n": e.n, "lambda_n": e.lambda_n,
                 "lambda_over_ln2": e.lambda_n / analysis.LN2, "partial_sum": e.partial_sum,
                 "orbit_p": e.orbit_p}, cols)
    return EXIT_OK


def cmd_sweep(args, out: Output, fmap) -> int:
    grid = analysis.SweepGrid(
        mu_from=args.mu_from, mu_to=args.mu_to, mu_step=args.mu_step, x0=args.x0, N=args.N,
        p=args.p, mode=Mode(args.mode), variant=args.variant,
        alpha=args.alpha if args.alpha is not None else analysis.DEFAULT_ALPHA,
        orbit_p=args.orbit_p, m0=args.m0, m_max=args.m_max, strategy=Strategy(args.strategy),
        shift=args.shift, exact_mu=args.exact_mu, domain_clamp=not args.no_domain_clamp,
        slack=args.slack,
    )
    if args.format == "csv":
        out.fh.write(analysis.CSV_HEADER + "\n")
    for row in analysis.sweep(grid, jobs=args.jobs):
        if args.format == "csv":
            out.fh.write(analysis.row_to_csv(row) + "\n")
            out.fh.flush()
        else:
            out.row(row.as_dict())
        if row.bound_ok is False:
            _diag(f"# mu={row.mu}: sigma_est below lambda/ln2 - {args.slack}")
    return EXIT_OK


def cmd_verify(args, out: Output, fmap_unused) -> int:
    mus = [Fraction(s) for s in args.mus.split(",")]
    ms = [int(s) for s in args.ms.split(",")]
    x0 = mp.parse_decimal(args.x0)
    shift = mp.parse_decimal(args.shift) if args.shift is not None else Fraction(0)
    bad = 0
    cols = ("mu", "m", "steps", "violations")
    for mu in mus:
        exact = oracle.rational_orbit(mu, x0, args.N)
        if shift:
            exact = [oracle.Rational.of(q.to_fraction() + shift) for q in exact]
        mu_s = f"{mu.numerator}/{mu.denominator}" if mu.denominator != 1 else str(mu.numerator)
        fmap = named_map(args.map, args.variant, _fraction_decimal(mu), exact_mu=args.exact_mu,
                         shift=args.shift)
        for m in ms:
            traj = engine.trajectory(fmap, _fraction_decimal(x0 + shift), args.N, m)
            v = sum(not oracle.abs_error_within(r.fl, r.err, q) for r, q in zip(traj, exact))
            bad += v
            out.row({"mu": mu_s, "m": m, "steps": len(traj), "violations": v}, cols)
    if bad:
        _diag(f"oracle violations: {bad}")
        return EXIT_ORACLE
    return EXIT_OK


def _fraction_decimal(q: Fraction) -> str:
    """Exact decimal literal of a rational with a terminating expansion."""
    d = q.denominator
    k = 0
    while d % 2 == 0 or d % 5 == 0:
        d //= 2 if d % 2 == 0 else 5
        k += 1
    if d != 1:
        raise UsageError(f"{q} has no finite decimal expansion")
    scaled = q * 10**k
    s = str(abs(scaled.numerator)).rjust(k + 1, "0")
    body = s[:-k] + "." + s[-k:] if k else s
    return ("-" if q < 0 else "") + body


COMMANDS = {
    "run": cmd_run,
    "search": cmd_search,
    "lyapunov": cmd_lyapunov,
    "sweep": cmd_sweep,
    "verify": cmd_verify,
}


def main(argv=None) -> int:
    try:
        args = parse_args(argv)
    except UsageError as exc:
        _diag(f"verorbit: error: {exc}")
        return EXIT_USAGE
    except SystemExit as exc:
        return int(exc.code or 0)
    try:
        fmap = _map_from(args) if args.command != "verify" else None
        with contextlib.ExitStack() as stack:
            fh = stack.enter_context(open(args.out, "w")) if args.out else sys.stdout
            return COMMANDS[args.command](args, Output(fh, args.format), fmap)
    except (UsageError, ValueError) as exc:
        _diag(f"verorbit: error: {exc}")
        return EXIT_USAGE
    except VerorbitError as exc:
        _diag(f"verorbit: {type(exc).__name__}: {exc}")
        return EXIT_ERROR


if __name__ == "__main__":
    sys.exit(main())

"""Command-line interface: ``xisb table build | verify | eval | scan | sample``.

Exit codes: 0 success / all checks passed, 1 an identity check failed,
2 numerical infrastructure failed, 64 usage error, 65 domain error.
"""
from __future__ import annotations

import argparse
import json
import math
import os
import sys
from dataclasses import dataclass
from pathlib import Path
from typing import Mapping, Optional, Sequence

import numpy as np

from . import tablefile
from .density import CriticalLineTable, SizeBiasedDist, moment, v_with_error
from .errors import INFRASTRUCTURE_ERRORS, DomainError
from .funceq import rh_identity_scan
from .heatflow import HeatKernelProfile, heat_trace_csv, scan_zeros, xi_heat
from .policy import PrecisionPolicy
from .report import _jsonable
from .suites import SUITES, SuiteContext, run_suite
from .theta import theta_eval
from .xi_core import eval_xi

EXIT_OK, EXIT_FAIL, EXIT_INFRA, EXIT_USAGE, EXIT_DOMAIN = 0, 1, 2, 64, 65
TABLE_ENV = "XISB_TABLE"
DEFAULT_T_MAX = 60.0
DEFAULT_STEP = 0.05

CSV_HELP = """\
CSV columns:
  verify --format csv    suite,label,lhs,rhs,abs_err,tol,pass,note
  scan rh-identity       y,re_lhs,im_lhs,abs_lhs
  scan heattrace         t,xi_heat
  sample                 x
"""


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise UsageError(f"{self.prog}: {message}")


@dataclass(frozen=True)
class RunConfig:
    """Settings resolved with precedence: flags, then environment, then defaults."""

    abs_tol: float = 1e-10
    max_nodes: int = 400_000
    table: Optional[str] = None
    fmt: str = "json"
    seed: int = 0
    k: int = 1

    @classmethod
    def resolve(cls, args: argparse.Namespace, environ: Mapping[str, str] = os.environ) -> "RunConfig":
        d = cls()
        table = getattr(args, "table", None) or environ.get(TABLE_ENV) or d.table
        return cls(
            abs_tol=_pick(getattr(args, "tol", None), d.abs_tol),
            max_nodes=_pick(getattr(args, "max_nodes", None), d.max_nodes),
            table=table,
            fmt=_pick(getattr(args, "format", None), d.fmt),
            seed=_pick(getattr(args, "seed", None), d.seed),
            k=_pick(getattr(args, "k", None), d.k),
        )

    def policy(self) -> PrecisionPolicy:
        try:
            return PrecisionPolicy(abs_tol=self.abs_tol, max_nodes=self.max_nodes)
        except ValueError as exc:
            raise UsageError(str(exc)) from None


def _pick(flag, default):
    return default if flag is None else flag


def load_table(cfg: RunConfig, policy: PrecisionPolicy) -> CriticalLineTable:
    """Reload the cached table if present; otherwise build (and cache when a path is set)."""
    if cfg.table:
        path = Path(cfg.table)
        if path.exists():
            return tablefile.load(path)
    table = CriticalLineTable.build(DEFAULT_T_MAX, DEFAULT_STEP, policy)
    if cfg.table:
        tablefile.save(table, cfg.table)
    return table


def _fmt15(v) -> str:
    if isinstance(v, complex):
        return f"{v.real:.15g} {v.imag:+.15g}i"
    return f"{v:.15g}"


def _emit(text: str, out: Optional[str]) -> None:
    if out:
        Path(out).write_text(text)
    else:
        sys.stdout.write(text)


# -- subcommands --------------------------------------------------------------------


def cmd_table_build(args, cfg: RunConfig) -> int:
    table = CriticalLineTable.build(args.tmax, args.step, cfg.policy())
    tablefile.save(table, args.out)
    print(f"wrote {args.out}: {len(table.values)} rows, t_max={table.t_max:g}, step={table.step:g}, "
          f"C={table.fitted_C:.6g}, A={table.fitted_A:.6g}")
    return EXIT_OK


def cmd_verify(args, cfg: RunConfig) -> int:
    policy = cfg.policy()
    ctx = SuiteContext(load_table(cfg, policy), policy)
    rep = run_suite(args.suite, cfg.k, ctx)
    print(rep.table())
    if args.report:
        Path(args.report).write_text(rep.to_csv() if cfg.fmt == "csv" else rep.to_json() + "\n")
    return EXIT_OK if rep.overall_pass else EXIT_FAIL


def cmd_eval(args, cfg: RunConfig) -> int:
    policy = cfg.policy()
    kind = args.kind
    need = {"xi": ("re",), "theta": ("x",), "density": ("k", "x"), "cdf": ("k", "x"),
            "moment": ("k", "p"), "heat": ("k", "lam", "t")}[kind]
    missing = [n for n in need if getattr(args, n) is None]
    if missing:
        raise UsageError(f"eval {kind} needs --{', --'.join('lambda' if m == 'lam' else m for m in missing)}")
    err = None
    if kind == "xi":
        value = eval_xi(complex(args.re, args.im or 0.0))
        if value.imag == 0:
            value = value.real
    elif kind == "theta":
        value = theta_eval(args.x, policy).value
    else:
        table = load_table(cfg, policy)
        if kind == "density":
            value, err = v_with_error(args.k, args.x, table, policy)
        elif kind == "cdf":
            value = SizeBiasedDist(args.k, table, policy).cdf(args.x)
        elif kind == "moment":
            r = moment(SizeBiasedDist(args.k, table, policy), args.p)
            value, err = r.value, r.est_error
        else:
            prof = HeatKernelProfile.build(args.k, table, policy)
            value = xi_heat(args.lam, args.k, args.t, prof, policy)
    if args.json:
        print(json.dumps(_jsonable({"value": value, "est_error": err}), sort_keys=True))
    else:
        print(_fmt15(value))
    return EXIT_OK


def cmd_scan(args, cfg: RunConfig) -> int:
    policy = cfg.policy()
    table = load_table(cfg, policy)
    k = cfg.k
    if args.what == "zeros":
        rec = scan_zeros(args.lam, k, args.tmax, args.step, HeatKernelProfile.build(k, table, policy),
                         policy)
        for z in rec.zeros:
            print(f"{z:.12f}")
        if args.out:
            Path(args.out).write_text(rec.to_json() + "\n")
        return EXIT_OK
    if args.what == "heattrace":
        prof = HeatKernelProfile.build(k, table, policy)
        ts = np.arange(0.0, args.tmax + 0.5 * args.step, args.step)
        _emit(heat_trace_csv(args.lam, ts, prof, policy), args.out)
        return EXIT_OK
    # rh-identity
    dist = SizeBiasedDist(k, table, policy)
    zeros = scan_zeros(0.0, 1, args.ymax, 0.25, HeatKernelProfile.build(1, table, policy), policy).zeros
    ys = np.arange(0.0, args.ymax + 0.5 * args.step, args.step)
    scan = rh_identity_scan(k, args.z, args.xparam, ys, dist, zeros=zeros)
    _emit(scan.to_csv(), args.out)
    for y in scan.near_zeros():
        print(f"near-zero y={y:g}", file=sys.stderr if not args.out else sys.stdout)
    return EXIT_OK if scan.report.overall_pass else EXIT_FAIL


def cmd_sample(args, cfg: RunConfig) -> int:
    policy = cfg.policy()
    dist = SizeBiasedDist(cfg.k, load_table(cfg, policy), policy)
    xs = dist.sample(args.n, cfg.seed)
    if args.out:
        Path(args.out).write_text("x\n" + "".join(f"{x!r}\n" for x in xs.tolist()))
    se = float(np.std(xs, ddof=1) / math.sqrt(len(xs))) if len(xs) > 1 else math.nan
    print(f"n={len(xs)} seed={cfg.seed} mean={np.mean(xs):.12g} se={se:.3g}")
    return EXIT_OK


# -- parser ------------------------------------------------------------------------


def _common(p, k=True):
    p.add_argument("--table", help=f"table cache path (default: ${TABLE_ENV}, else built in memory)")
    p.add_argument("--tol", type=float, help="abs_tol for every quadrature (default 1e-10)")
    p.add_argument("--max-nodes", dest="max_nodes", type=int, help="quadrature node budget")
    if k:
        p.add_argument("--k", type=int, help="power k of xi (default 1)")


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="xisb", description="Size-biased distributions from powers of xi.",
                     epilog=CSV_HELP, formatter_class=argparse.RawDescriptionHelpFormatter)
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)

    table = sub.add_parser("table", help="critical-line table cache")
    tsub = table.add_subparsers(dest="table_command", required=True, parser_class=_Parser)
    tb = tsub.add_parser("build", help="tabulate Xi(t) and write an XITAB1 file")
    tb.add_argument("--tmax", type=float, default=DEFAULT_T_MAX)
    tb.add_argument("--step", type=float, default=DEFAULT_STEP)
    tb.add_argument("--out", required=True)
    tb.add_argument("--tol", type=float)
    tb.set_defaults(func=cmd_table_build)

    ver = sub.add_parser("verify", help="run a verification suite", epilog=CSV_HELP,
                         formatter_class=argparse.RawDescriptionHelpFormatter)
    ver.add_argument("--suite", required=True, choices=(*SUITES, "all"))
    ver.add_argument("--report", help="write the machine-readable report here")
    ver.add_argument("--format", choices=("json", "csv"))
    _common(ver)
    ver.set_defaults(func=cmd_verify)

    ev = sub.add_parser("eval", help="evaluate one quantity")
    ev.add_argument("kind", choices=("xi", "theta", "density", "cdf", "moment", "heat"))
    ev.add_argument("--re", type=float)
    ev.add_argument("--im", type=float)
    ev.add_argument("--x", type=float)
    ev.add_argument("--p", type=float)
    ev.add_argument("--t", type=float)
    ev.add_argument("--lambda", dest="lam", type=float)
    ev.add_argument("--json", action="store_true", help='print {"value": ..., "est_error": ...}')
    _common(ev)
    ev.set_defaults(func=cmd_eval)

    sc = sub.add_parser("scan", help="zero scans and traces", epilog=CSV_HELP,
                        formatter_class=argparse.RawDescriptionHelpFormatter)
    sc.add_argument("what", choices=("zeros", "rh-identity", "heattrace"))
    sc.add_argument("--lambda", dest="lam", type=float, default=0.0)
    sc.add_argument("--tmax", type=float, default=35.0)
    sc.add_argument("--ymax", type=float, default=30.0)
    sc.add_argument("--step", type=float, default=0.25)
    sc.add_argument("--z", type=float, default=1.0)
    sc.add_argument("--xparam", type=float, default=0.5)
    sc.add_argument("--out", help="output file (JSON for zeros, CSV otherwise)")
    _common(sc)
    sc.set_defaults(func=cmd_scan)

    sa = sub.add_parser("sample", help="draw samples of X_k")
    sa.add_argument("--n", type=int, default=1000)
    sa.add_argument("--seed", type=int)
    sa.add_argument("--out", help="CSV file for the samples")
    _common(sa)
    sa.set_defaults(func=cmd_sample)
    return parser


def main(argv: Optional[Sequence[str]] = None, environ: Mapping[str, str] = os.environ) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
        cfg = RunConfig.resolve(args, environ)
        return args.func(args, cfg)
    except UsageError as exc:
        print(f"usage error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except DomainError as exc:
        print(f"domain error: {exc}", file=sys.stderr)
        return EXIT_DOMAIN
    except INFRASTRUCTURE_ERRORS as exc:
        print(f"{type(exc).__name__}: {exc}", file=sys.stderr)
        return EXIT_INFRA
    except OSError as exc:
        print(f"I/O error: {exc}", file=sys.stderr)
        return EXIT_INFRA


def main_entry() -> None:
    sys.exit(main())


if __name__ == "__main__":
    main_entry()

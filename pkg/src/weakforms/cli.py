"""Command line interface.

Exit status: 0 success / every checked cell passes, 1 verification failure,
2 usage error, 3 internal, precision-budget or cache I/O error.
"""

from __future__ import annotations

import argparse
import json
import logging
import sys

from . import eta
from .basis import build_f0, build_f2, level4_weight2
from .cache import BasisCache, default_cache_root
from .eta import LEVELS, PRIME_LEVELS
from .lab import (
    THEOREMS,
    CoefficientSource,
    budget,
    scan,
    verify_beta_case,
    verify_duality,
    verify_hecke_grid,
    verify_parity,
    verify_theta,
    verify_thm1,
    verify_thm2,
    verify_thm3,
    verify_u2_level4,
)
from .operators import is_prime

EXIT_OK, EXIT_FAIL, EXIT_USAGE, EXIT_ERROR = 0, 1, 2, 3

GENERATORS = ("hauptmodul", "E2", "E2p", "E4", "delta", "j", "euler")

DEFAULT_MAX_PRECISION = 20000


class BudgetError(RuntimeError):
    pass


def _parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="weakforms", description=__doc__.splitlines()[0])
    sub = ap.add_subparsers(dest="command", required=True)

    def cache_opts(p):
        p.add_argument("--cache-root", help="cache directory (overrides $WEAKFORMS_CACHE)")
        p.add_argument("--no-cache", action="store_true", help="do not read or write the cache")

    def fmt(p, choices=("plain", "json")):
        p.add_argument("--format", choices=choices, default="plain")

    p = sub.add_parser("expand", help="print a named generator")
    p.add_argument("name", choices=GENERATORS)
    p.add_argument("--level", type=int, help="level for hauptmodul")
    p.add_argument("--p", type=int, help="prime for E2p")
    p.add_argument("--precision", type=int, default=10)
    fmt(p)

    p = sub.add_parser("basis", help="print f_{k,m}^{(N)}")
    p.add_argument("--level", type=int, required=True)
    p.add_argument("--weight", type=int, choices=(0, 2), default=0)
    p.add_argument("--m", type=int, required=True)
    p.add_argument("--precision", type=int, default=10, help="last exponent printed")
    fmt(p)
    cache_opts(p)

    p = sub.add_parser("verify", help="run a theorem verifier; exit 0 iff every cell passes")
    p.add_argument("theorem", choices=THEOREMS)
    p.add_argument("--p", type=int)
    p.add_argument("--level", type=int)
    p.add_argument("--mmax", type=int)
    p.add_argument("--nmax", type=int)
    p.add_argument("--r", "--rmax", dest="r", type=int)
    p.add_argument("--max-precision", type=int, default=DEFAULT_MAX_PRECISION,
                   help="refuse runs whose working precision budget exceeds this")
    p.add_argument("--show-cells", type=int, default=5, help="failing cells listed in plain output")
    fmt(p, ("plain", "json", "csv"))
    cache_opts(p)

    p = sub.add_parser("scan", help="grid of p-adic valuations (no claims made)")
    p.add_argument("--level", type=int, required=True)
    p.add_argument("--weight", type=int, choices=(0, 2), default=0)
    p.add_argument("--p", type=int, required=True)
    p.add_argument("--mmax", type=int, default=10)
    p.add_argument("--nmax", type=int, default=10)
    p.add_argument("--max-precision", type=int, default=DEFAULT_MAX_PRECISION)
    fmt(p, ("plain", "json", "csv"))
    cache_opts(p)

    p = sub.add_parser("cache", help="list or clear stored basis elements")
    p.add_argument("action", choices=("list", "clear"))
    p.add_argument("--cache-root")
    return ap


def _cache(args) -> BasisCache | None:
    if getattr(args, "no_cache", False):
        return None
    return BasisCache(args.cache_root or default_cache_root())


def _emit(text: str):
    sys.stdout.write(text if text.endswith("\n") else text + "\n")


def _cmd_expand(args, ap):
    P = args.precision
    if P < 0:
        ap.error("--precision must be >= 0")
    name = args.name
    if name == "hauptmodul":
        if args.level not in LEVELS:
            ap.error(f"hauptmodul needs --level in {LEVELS}")
        f = eta.hauptmodul(args.level, P)
    elif name == "E2p":
        if args.p not in PRIME_LEVELS:
            ap.error(f"E2p needs --p in {PRIME_LEVELS}")
        f = eta.eisenstein_E2_level(args.p, P)
    else:
        f = {
            "E2": eta.eisenstein_E2,
            "E4": eta.eisenstein_E4,
            "delta": eta.delta,
            "j": eta.j_invariant,
            "euler": eta.euler_product,
        }[name](P)
    if args.format == "json":
        _emit(json.dumps({"name": name, "series": f.to_record()}, sort_keys=True))
    else:
        _emit(f.format())
    return EXIT_OK


def _cmd_basis(args, ap):
    N, k, m, P = args.level, args.weight, args.m, args.precision
    if N not in LEVELS:
        ap.error(f"unsupported level {N}; expected one of {LEVELS}")
    if m < 0:
        ap.error("--m must be >= 0")
    if P < 0:
        ap.error("--precision must be >= 0")
    if k == 2 and N not in PRIME_LEVELS + (4,):
        ap.error(f"weight 2 is only available at levels {PRIME_LEVELS + (4,)}")
    if k == 2 and N == 4 and m < 1:
        ap.error("level-4 weight-2 elements need --m >= 1")
    cache = _cache(args)
    el = cache.get(N, k, m, P) if cache else None
    if el is None:
        if k == 0:
            el = build_f0(N, m, P)
        elif N == 4:
            el = level4_weight2(m, P)
        else:
            el = build_f2(N, m, P)
        if cache:
            cache.put(el)
    f = el.expansion.truncate(P)
    if args.format == "json":
        comb = None if el.combination is None else [str(c) for c in el.combination]
        _emit(json.dumps({"level": N, "weight": k, "m": m, "method": el.method,
                          "series": f.to_record(), "combination": comb}, sort_keys=True))
    else:
        _emit(f.format())
    return EXIT_OK


_VERIFY_DEFAULTS = {
    "thm1": dict(mmax=lambda a: 4 * a.p * a.p, nmax=100),
    "beta-gt-alpha": dict(mmax=lambda a: 4 * a.p * a.p, nmax=100),
    "thm2": dict(mmax=32, nmax=100),
    "thm3": dict(mmax=40, nmax=60, r=2),
    "lemma-hecke": dict(mmax=10, nmax=10, r=1),
    "duality": dict(mmax=30),
    "theta": dict(mmax=30, nmax=60),
    "u2-level4": dict(mmax=20, nmax=60),
    "parity": dict(mmax=30, nmax=60),
}


def _cmd_verify(args, ap):
    th = args.theorem
    if th in ("thm1", "beta-gt-alpha", "theta"):
        allowed = {"thm1": (2, 3, 5, 7, 13), "beta-gt-alpha": (2, 3, 5, 7), "theta": PRIME_LEVELS}[th]
        if args.p not in allowed:
            ap.error(f"{th} needs --p in {allowed}")
    if th == "duality":
        lvl = args.level if args.level is not None else args.p
        if lvl not in PRIME_LEVELS + (4,):
            ap.error(f"duality needs --level in {PRIME_LEVELS + (4,)}")
        args.level = lvl
    if th in ("thm3", "lemma-hecke"):
        if args.level not in LEVELS:
            ap.error(f"{th} needs --level in {LEVELS}")
        if args.p is None or not is_prime(args.p) or args.level % args.p == 0:
            ap.error(f"{th} needs --p prime and not dividing the level")
    for key, val in _VERIFY_DEFAULTS[th].items():
        if getattr(args, key, None) is None:
            setattr(args, key, val(args) if callable(val) else val)
    for key in ("mmax", "nmax", "r"):
        v = getattr(args, key, None)
        if v is not None and v < 1:
            ap.error(f"--{key} must be >= 1")

    params = {"mmax": args.mmax, "nmax": args.nmax, "p": args.p, "r": args.r}
    need = budget(th, params)
    if need > args.max_precision:
        raise BudgetError(f"precision budget {need} exceeds --max-precision {args.max_precision}")

    src = CoefficientSource(_cache(args))
    if th == "thm1":
        rep = verify_thm1(args.p, args.mmax, args.nmax, src)
    elif th == "beta-gt-alpha":
        rep = verify_beta_case(args.p, args.mmax, args.nmax, src)
    elif th == "thm2":
        rep = verify_thm2(args.mmax, args.nmax, src)
    elif th == "thm3":
        rep = verify_thm3(args.level, args.p, args.r, args.mmax, args.nmax, src)
    elif th == "lemma-hecke":
        rep = verify_hecke_grid(args.level, args.p, args.r, args.mmax, args.nmax, src)
    elif th == "duality":
        rep = verify_duality(args.level, args.mmax, src)
    elif th == "theta":
        rep = verify_theta(args.p, args.mmax, args.nmax, src)
    elif th == "u2-level4":
        rep = verify_u2_level4(args.mmax, args.nmax, src)
    else:
        rep = verify_parity(args.mmax, args.nmax, src)

    if args.format == "json":
        _emit(rep.to_json())
    elif args.format == "csv":
        _emit(rep.to_csv())
    else:
        lines = [rep.summary()]
        for c in rep.failures[:args.show_cells]:
            lines.append(f"  failing cell m={c.m} n={c.n} required={c.required} observed={c.observed}")
        _emit("\n".join(lines))
    return EXIT_OK if rep.passed else EXIT_FAIL


def _cmd_scan(args, ap):
    if args.level not in LEVELS:
        ap.error(f"unsupported level {args.level}; expected one of {LEVELS}")
    if not is_prime(args.p):
        ap.error("--p must be prime")
    if args.mmax < 1 or args.nmax < 1:
        ap.error("--mmax and --nmax must be >= 1")
    if args.weight == 2 and args.level not in PRIME_LEVELS + (4,):
        ap.error(f"weight 2 is only available at levels {PRIME_LEVELS + (4,)}")
    need = args.mmax + args.nmax + 4
    if need > args.max_precision:
        raise BudgetError(f"precision budget {need} exceeds --max-precision {args.max_precision}")
    grid = scan(args.level, args.weight, args.p, args.mmax, args.nmax, CoefficientSource(_cache(args)))
    out = {"json": grid.to_json, "csv": grid.to_csv, "plain": grid.to_plain}[args.format]()
    _emit(out)
    return EXIT_OK


def _cmd_cache(args, ap):
    cache = BasisCache(args.cache_root or default_cache_root())
    if args.action == "list":
        for N, k, m in cache.entries():
            el = cache.get(N, k, m)
            prec = "corrupt" if el is None else el.precision
            _emit(f"level={N} weight={k} m={m} precision={prec}")
    else:
        _emit(f"removed {cache.clear()} entries from {cache.root}")
    return EXIT_OK


def main(argv: list[str] | None = None) -> int:
    logging.basicConfig(level=logging.WARNING, format="%(levelname)s: %(message)s")
    ap = _parser()
    try:
        args = ap.parse_args(argv)
    except SystemExit as exc:
        return EXIT_USAGE if exc.code else EXIT_OK
    cmd = {"expand": _cmd_expand, "basis": _cmd_basis, "verify": _cmd_verify,
           "scan": _cmd_scan, "cache": _cmd_cache}[args.command]
    try:
        return cmd(args, ap)
    except SystemExit as exc:
        return EXIT_USAGE if exc.code else EXIT_OK
    except (BudgetError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_ERROR
    except (ValueError, ArithmeticError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_ERROR


if __name__ == "__main__":
    sys.exit(main())

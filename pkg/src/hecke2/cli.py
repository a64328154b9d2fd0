"""Command line entry point: ``hecke2 verify | express | nilpotency``.

Exit codes: 0 when every selected check passes, 1 when one fails, 2 for a
configuration, precision or cache-format error.
"""

from __future__ import annotations

import argparse
import json
import logging
import os
import sys

from .cache import CorruptCache, SeriesCache
from .fps2 import InsufficientPrecision
from .hecke import is_odd_prime
from .report import FAIL, PASS, SKIPPED
from .spaces import hecke_module, modd_chunk, v_chunk
from .theta_algebra import module_nilpotency, solve_u
from .verify import CHECKS, ConfigError, RunConfig, Session, build_report, run_checks, tp_matrix

__all__ = ["main", "cmd_verify", "cmd_express", "cmd_nilpotency", "config_from_args"]

EXIT_OK, EXIT_FAIL, EXIT_CONFIG = 0, 1, 2


def _common(p: argparse.ArgumentParser) -> None:
    p.add_argument("--level", type=int, default=3, choices=(1, 3, 5))
    p.add_argument("--prec", type=int, default=None, help="base precision N (default: per-check tiers)")
    p.add_argument("--mdeg", type=int, default=3, help="m-adic truncation degree d")
    p.add_argument("--chunk", type=int, default=63, help="chunk cutoff K")
    p.add_argument("--cache-dir", default=None, help="series cache (default: $HECKE2_CACHE_DIR)")
    p.add_argument("--format", choices=("text", "json"), default="text")
    p.add_argument("--deep", action="store_true", help="allow mdeg > 3")
    p.add_argument("-v", "--verbose", action="store_true")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="hecke2", description=__doc__.splitlines()[0])
    sub = parser.add_subparsers(dest="command", required=True)

    v = sub.add_parser("verify", help="run verification checks")
    _common(v)
    v.add_argument("--checks", default=None, help="comma-separated subset of: " + ",".join(sorted(CHECKS)))
    v.add_argument("--jobs", type=int, default=1, help="run checks in this many processes")
    v.add_argument("--timings", action="store_true", help="include wall times in the report")

    e = sub.add_parser("express", help="solve T_p = u(t) mod m^d on a chunk")
    _common(e)
    e.add_argument("--p", type=int, required=True)

    n = sub.add_parser("nilpotency", help="nilpotency indices of T_p on chunk generators")
    _common(n)
    n.add_argument("--p", type=int, required=True)
    n.add_argument("--kmax", type=int, default=None, help="largest generator degree (default: --chunk)")
    return parser


def config_from_args(args: argparse.Namespace) -> RunConfig:
    checks = getattr(args, "checks", None)
    cache_dir = args.cache_dir or os.environ.get("HECKE2_CACHE_DIR") or None
    return RunConfig(
        level=args.level,
        prec=args.prec,
        mdeg=args.mdeg,
        chunk=args.chunk,
        checks=tuple(c.strip() for c in checks.split(",") if c.strip()) if checks else None,
        cache_dir=cache_dir,
        format=args.format,
        deep=args.deep,
        jobs=getattr(args, "jobs", 1),
        timings=getattr(args, "timings", False),
    )


def _session(config: RunConfig) -> Session:
    cache = SeriesCache(config.cache_dir) if config.cache_dir else None
    if cache is not None:
        os.makedirs(config.cache_dir, exist_ok=True)
    s = Session(config, cache)
    s.theta()  # a corrupt cache file is a format error, raised before any check runs
    return s


def cmd_verify(config: RunConfig) -> tuple[dict, int]:
    config.validate()
    session = _session(config)
    records = run_checks(session)
    report = build_report(config, records)
    if any(r.precision_error for r in records):
        code = EXIT_CONFIG
    elif report["summary"][FAIL]:
        code = EXIT_FAIL
    else:
        code = EXIT_OK
    return report, code


def _express_module(session: Session, p: int):
    cfg = session.config
    if cfg.level == 1:
        mod = session.v_module()
        if p in mod.primes:
            return mod, mod.mats[p]
        return mod, tp_matrix(session, v_chunk, p)
    extra = () if p in session.S else (p,)
    mo = modd_chunk(session.mctx, cfg.chunk, extra_primes=extra)
    restricted = mo.module.restrict(session.S)
    return restricted, mo.module.mats[p]


def _check_prime(config: RunConfig, p: int) -> None:
    if not is_odd_prime(p):
        raise ConfigError(f"{p} is not an odd prime")
    if p == config.level:
        raise ConfigError(f"T_{p} is not defined at level {p} here")


def cmd_express(config: RunConfig, p: int) -> tuple[dict, int]:
    config.validate()
    _check_prime(config, p)
    session = _session(config)
    mod, target = _express_module(session, p)
    u = solve_u(mod, target, config.mdeg)
    out = {"level": config.level, "p": p, "d": config.mdeg, "u": str(u), "leading_form": str(u.leading_form())}
    return out, EXIT_OK


def cmd_nilpotency(config: RunConfig, p: int, kmax: int | None = None) -> tuple[dict, int]:
    K = config.chunk if kmax is None else kmax
    config = RunConfig(**{**config.__dict__, "chunk": K})
    config.validate()
    _check_prime(config, p)
    session = _session(config)
    rows = [{"generator": "0", "exponent": 0}]
    if config.level == 1:
        chunk = v_chunk(session.mctx, K)
        mod = hecke_module(chunk, (p,))
        gens = [1 << i for i in range(mod.dim)]
        labels = [f"F^{k}" for k in chunk.labels]
    else:
        extra = () if p in session.S else (p,)
        mo = modd_chunk(session.mctx, K, extra_primes=extra)
        mod = mo.module
        gens = mo.generator_vectors()
        labels = [f"F^{i}G^{j}" for i, j in mo.generator_labels]
    for lab, g in zip(labels, gens):
        rows.append({"generator": lab, "exponent": module_nilpotency(mod, g, p)})
    return {"level": config.level, "p": p, "kmax": K, "rows": rows}, EXIT_OK


def _print_verify(report: dict) -> None:
    width = max((len(c["name"]) for c in report["checks"]), default=10)
    for c in report["checks"]:
        line = f"{c['name']:<{width}}  {c['status'].upper()}"
        if c["wall_time"] is not None:
            line += f"  ({c['wall_time']:.3f} s)"
        print(line)
        if c["status"] == FAIL and c["witness"]:
            print(f"    witness: {json.dumps(c['witness'], sort_keys=True, default=str)}")
    s = report["summary"]
    print(f"{s[PASS]} passed, {s[FAIL]} failed, {s[SKIPPED]} skipped")


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING, format="%(name)s: %(message)s")
    try:
        config = config_from_args(args)
        if args.command == "verify":
            out, code = cmd_verify(config)
        elif args.command == "express":
            out, code = cmd_express(config, args.p)
        else:
            out, code = cmd_nilpotency(config, args.p, args.kmax)
    except (ConfigError, InsufficientPrecision, CorruptCache) as exc:
        print(f"hecke2: error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    if config.format == "json":
        print(json.dumps(out, sort_keys=True, indent=2, default=str))
    elif args.command == "verify":
        _print_verify(out)
    elif args.command == "express":
        print(f"u = {out['u']}")
        print(f"leading form: {out['leading_form']}")
    else:
        for row in out["rows"]:
            print(f"{row['generator']:>12}  {row['exponent']}")
    return code


if __name__ == "__main__":
    sys.exit(main())

"""Command-line driver.

    xxzqk solve-bethe --n 4 --k 2 --hbar 0.35 --z 0.2 --out cache.qks
    xxzqk verify algebra --n 3
    xxzqk verify all --config run.json --report out.json
    xxzqk report --cache cache.qks --format csv

Exit codes: 0 all checks pass, 1 a check failed, 2 incomplete solution set
or empty cache, 3 configuration error.
"""

from __future__ import annotations

import argparse
import os
import sys
from dataclasses import replace
from math import comb
from typing import Any, Callable, Sequence

from .bethe import (BetheSystem, SolutionSet, default_cache_dir, load_solutions, save_solutions, solve_all)
from .config import DEFAULT_TOLERANCES, SUITES, RunConfig
from .core.params import ModelParams
from .core.scalars import parse_complex
from .core.space import FixedPoint
from .core.symfun import elementary
from .errors import ConfigError, IncompleteSet
from .qop import RESOLVED, check_exterior_eigen, check_line_bundle, check_tq, check_wronskian, \
    identify_q_with_exterior, minus_partners
from .report import VerificationReport, merge
from .uq_action import check_drinfeld
from .vertex import check_vertex
from .xxz_chain import check_transfer

EXIT_OK, EXIT_FAIL, EXIT_INCOMPLETE, EXIT_CONFIG = 0, 1, 2, 3
SABOTAGE_PERTURBATION = 1e-3


class EmptyCache(Exception):
    pass


# ---------------------------------------------------------------------------
# argument handling


def _add_common(p: argparse.ArgumentParser) -> None:
    p.add_argument("--config", help="JSON run configuration (flags override it)")
    p.add_argument("--n", type=int)
    p.add_argument("--a", help="comma-separated characters, e.g. 1.0,1.3,0.6+0.3i")
    p.add_argument("--hbar")
    p.add_argument("--q")
    p.add_argument("--z", help="comma-separated deformation parameters")
    p.add_argument("--precision", type=int, help="working precision in bits")
    p.add_argument("--cache", help="solution cache file")
    p.add_argument("--format", choices=("json", "csv"))


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="xxzqk", description=__doc__.split("\n\n")[0])
    sub = ap.add_subparsers(dest="command", required=True)

    sb = sub.add_parser("solve-bethe", help="solve the Bethe equations and write a cache")
    _add_common(sb)
    sb.add_argument("--k", help="comma-separated sectors (default: all)")
    sb.add_argument("--convention", default="geometric", choices=("geometric", "saddle", "aba", "aba_minus"))
    sb.add_argument("--out", help="cache file to write")

    vb = sub.add_parser("verify", help="run an identity suite")
    vb.add_argument("suite", choices=SUITES + ("all",))
    _add_common(vb)
    vb.add_argument("--M", type=int, help="series order")
    vb.add_argument("--d-max", type=int, dest="d_max")
    vb.add_argument("--seed", type=int)
    vb.add_argument("--tol", action="append", default=[], metavar="NAME=VALUE",
                    help=f"override a tolerance ({', '.join(DEFAULT_TOLERANCES)})")
    vb.add_argument("--report", help="write the report here (default: standard output)")
    vb.add_argument("--timing", action="store_true", help="include wall time (outside the checksum)")
    vb.add_argument("--sabotage-sign", action="store_true", help="negative control: K -> -K")
    vb.add_argument("--sabotage-branch", action="store_true", help="negative control: wrong branch of Z")
    vb.add_argument("--sabotage-am", action="store_true", help="negative control: perturbed a_m(z)")

    rb = sub.add_parser("report", help="render a report or a cache as tables")
    rb.add_argument("--report", help="a report written by verify")
    rb.add_argument("--cache", help="a solution cache")
    rb.add_argument("--format", choices=("json", "csv", "table"), default="table")
    return ap


def _split(text: str) -> list[str]:
    return [t for t in (s.strip() for s in text.split(",")) if t]


def resolve_config(args: argparse.Namespace) -> RunConfig:
    cfg = RunConfig.load(args.config) if getattr(args, "config", None) else RunConfig()
    p, t, io = cfg.params, cfg.task, cfg.io
    if args.n is not None:
        p.n = args.n
        if args.a is None and p.a is not None and len(p.a) != p.n:
            p.a = None
    if args.a is not None:
        p.a = _split(args.a)
    if args.hbar is not None:
        p.hbar = args.hbar
    if args.q is not None:
        p.q = args.q
    if args.precision is not None:
        p.precision = args.precision
    if args.z is not None:
        t.z = _split(args.z)
    if getattr(args, "k", None):
        try:
            t.k = [int(v) for v in _split(args.k)]
        except ValueError as exc:
            raise ConfigError(f"malformed --k: {exc}") from exc
    for name in ("M", "d_max", "seed"):
        if getattr(args, name, None) is not None:
            setattr(t, name, getattr(args, name))
    for item in getattr(args, "tol", []) or []:
        if "=" not in item:
            raise ConfigError(f"--tol expects NAME=VALUE, got {item!r}")
        name, value = item.split("=", 1)
        try:
            t.tolerances[name.strip()] = float(value)
        except ValueError as exc:
            raise ConfigError(f"malformed tolerance {item!r}") from exc
    if args.cache is not None:
        io.cache = args.cache
    if getattr(args, "report", None) is not None:
        io.report = args.report
    if args.format is not None:
        io.format = args.format
    cfg.validate()
    return cfg


# ---------------------------------------------------------------------------
# roots: cache first, then solve


class RootSource:
    """Solution sets keyed by (convention, k, z), read from a cache or solved on demand."""

    def __init__(self, params: ModelParams, cache: str | None = None) -> None:
        self.params = params
        self.sets: dict[tuple[str, int, str], SolutionSet] = {}
        if cache:
            if not os.path.exists(cache) or os.path.getsize(cache) == 0:
                raise EmptyCache(f"cache {cache} is missing or empty")
            try:
                _, sets = load_solutions(cache, params)
            except ValueError as exc:
                raise ConfigError(str(exc)) from exc
            for s in sets:
                self.sets[(s.convention, s.k, self._key(s.z))] = s

    def _key(self, z: Any) -> str:
        ar = self.params.ar
        return ar.format(ar.c(z))

    def get(self, convention: str, k: int, z: Any) -> SolutionSet:
        key = (convention, k, self._key(z))
        if key not in self.sets:
            self.sets[key] = solve_all(BetheSystem(self.params.n, k, self.params, convention, z))
        return self.sets[key]

    def sector_sets(self, convention: str, z: Any) -> dict[int, SolutionSet]:
        return {k: self.get(convention, k, z) for k in range(self.params.n + 1)}


# ---------------------------------------------------------------------------
# suites


def run_suite(name: str, cfg: RunConfig, params: ModelParams, roots: RootSource, sabotage: dict[str, bool]
              ) -> VerificationReport:
    t = cfg.task
    zs = t.z_values()
    if name == "algebra":
        return check_drinfeld(params, t.index_range, t.tolerance("algebra"), sabotage_sign=sabotage["sign"])
    if name == "transfer":
        return check_transfer(params, zs, seed=t.seed, tol_commute=t.tolerance("transfer_commute"),
                              tol_eigen=t.tolerance("aba_eigen"), sectors=t.k,
                              solutions=lambda k, z: roots.get("aba", k, z))
    if name == "qop":
        conv = RESOLVED.sabotaged(SABOTAGE_PERTURBATION) if sabotage["am"] else RESOLVED
        reps = []
        for z in zs:
            reps.append(_at(check_line_bundle(z, params, conv, t.tolerance("line_bundle")), z))
            reps.append(_at(identify_q_with_exterior(z, min(t.M, 4), params, conv, t.tolerance("qop_identity")), z))
            reps.append(_at(check_exterior_eigen(z, params, roots.sector_sets("geometric", z), conv,
                                                 t.tolerance("qop_eigen"), classical_tol=t.tolerance("classical")), z))
        return _tag(merge("qop", reps), zs, params)
    if name in ("wronskian", "tq"):
        reps = []
        for z in zs:
            pairs = minus_partners(z, params, roots.sector_sets("aba", z), roots.sector_sets("aba_minus", z))
            if name == "wronskian":
                reps.append(_at(check_wronskian(z, t.M, params, pairs, t.tolerance("wronskian"),
                                                sabotage_branch=sabotage["branch"]), z))
            else:
                reps.append(_at(check_tq(z, [0.71 + 0.23j, 1.29 - 0.41j], t.M, params, pairs, t.tolerance("tq")), z))
        return _tag(merge(name, reps), zs, params)
    if name == "vertex":
        return check_vertex(params, parse_complex(t.vertex_z), t.d_max, t.tolerance("vertex"))
    raise ConfigError(f"unknown suite {name!r}")


def _at(rep: VerificationReport, z: Any) -> VerificationReport:
    """Suffix every check id with z, so merged multi-z reports keep unique ids."""
    rep.entries = [replace(e, check_id=f"{e.check_id} z={complex(z):.4g}") for e in rep.entries]
    return rep


def _tag(rep: VerificationReport, zs: Sequence[Any], params: ModelParams) -> VerificationReport:
    ar = params.ar
    rep.metadata["z"] = [ar.format(ar.c(z)) for z in zs]
    rep.metadata["n"] = params.n
    rep.metadata["params_hash"] = params.digest()
    return rep


# ---------------------------------------------------------------------------
# commands


def cmd_solve_bethe(args: argparse.Namespace) -> int:
    cfg = resolve_config(args)
    params = cfg.params.build()
    ks = cfg.task.k if cfg.task.k is not None else list(range(params.n + 1))
    if any(not 0 <= k <= params.n for k in ks):
        raise ConfigError(f"sectors must lie in 0..{params.n}")
    sets = []
    incomplete = False
    for z in cfg.task.z_values():
        for k in ks:
            try:
                sset = solve_all(BetheSystem(params.n, k, params, args.convention, z))
            except IncompleteSet as exc:
                sset = exc.partial  # type: ignore[attr-defined]
                incomplete = True
            sets.append(sset)
            print(f"n={params.n} k={k} z={complex(z):.6g} {args.convention}: "
                  f"{len(sset)}/{comb(params.n, k)} solutions")
            for sol in sset.solutions:
                roots = ", ".join(f"{complex(r):.10g}" for r in sol.roots)
                print(f"  origin {FixedPoint(sol.origin, params.n).label():<14} residual {sol.residual_norm:.2e}  "
                      f"roots [{roots}]")
    out = args.out or cfg.io.cache or os.path.join(default_cache_dir(), f"{params.digest()}.qks")
    os.makedirs(os.path.dirname(os.path.abspath(out)), exist_ok=True)
    save_solutions(out, sets, params)
    print(f"wrote {out}")
    return EXIT_INCOMPLETE if incomplete else EXIT_OK


def cmd_verify(args: argparse.Namespace) -> int:
    cfg = resolve_config(args)
    params = cfg.params.build()
    roots = RootSource(params, cfg.io.cache)
    suites = list(cfg.task.suites) if args.suite == "all" else [args.suite]
    sabotage = {"sign": args.sabotage_sign, "branch": args.sabotage_branch, "am": args.sabotage_am}
    reports = [run_suite(s, cfg, params, roots, sabotage) for s in suites]
    rep = reports[0] if len(reports) == 1 else merge(args.suite, reports)
    rep.wall_time = sum(r.wall_time or 0.0 for r in reports)
    rep.metadata.update({"params_hash": params.digest(), "precision_bits": params.precision_bits,
                         "sabotage": sorted(k for k, v in sabotage.items() if v)})
    text = rep.serialize(cfg.io.format, include_timing=args.timing)
    if cfg.io.report:
        with open(cfg.io.report, "w", encoding="utf-8") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)
    print(rep.table(), file=sys.stderr)
    return EXIT_OK if rep.passed else EXIT_FAIL


def eigenvalue_rows(sets: Sequence[SolutionSet], n: int) -> list[dict[str, str]]:
    """Fixed point, Bethe roots and e_l of the roots, one row per solution."""
    rows = []
    for sset in sorted(sets, key=lambda s: (s.convention, s.k, str(s.z))):
        for sol in sset.solutions:
            row = {
                "convention": sset.convention,
                "z": f"{complex(sset.z):.10g}",
                "k": str(sset.k),
                "fixed_point": FixedPoint(sol.origin, n).label(),
                "roots": " ".join(f"{complex(r):.10g}" for r in sol.roots),
            }
            for l in range(1, n + 1):
                row[f"e{l}"] = f"{complex(elementary(list(sol.roots), l)):.10g}" if l <= sset.k else ""
            rows.append(row)
    return rows


def _render_rows(rows: list[dict[str, str]], fmt: str) -> str:
    import csv
    import io
    import json

    if fmt == "json":
        return json.dumps(rows, indent=2, sort_keys=True) + "\n"
    fields = list(rows[0]) if rows else []
    if fmt == "csv":
        buf = io.StringIO()
        writer = csv.DictWriter(buf, fieldnames=fields, lineterminator="\n")
        writer.writeheader()
        writer.writerows(rows)
        return buf.getvalue()
    widths = {f: max(len(f), *(len(r[f]) for r in rows)) for f in fields}
    lines = ["  ".join(f.ljust(widths[f]) for f in fields)]
    lines += ["  ".join(r[f].ljust(widths[f]) for f in fields) for r in rows]
    return "\n".join(lines) + "\n"


def cmd_report(args: argparse.Namespace) -> int:
    if not args.report and not args.cache:
        raise ConfigError("report needs --report or --cache")
    if args.report:
        try:
            with open(args.report, encoding="utf-8") as fh:
                text = fh.read()
        except OSError as exc:
            raise ConfigError(f"cannot read report: {exc}") from exc
        rep = (VerificationReport.from_csv(text) if text.startswith("check_id")
               else VerificationReport.from_json(text))
        if args.format == "table":
            sys.stdout.write(rep.table() + "\n")
        else:
            sys.stdout.write(rep.serialize(args.format))
    if args.cache:
        if not os.path.exists(args.cache) or os.path.getsize(args.cache) == 0:
            raise EmptyCache(f"cache {args.cache} is missing or empty")
        try:
            header, sets = load_solutions(args.cache)
        except (ValueError, KeyError) as exc:
            raise ConfigError(f"unreadable cache: {exc}") from exc
        if not sets:
            raise EmptyCache(f"cache {args.cache} holds no solutions")
        sys.stdout.write(_render_rows(eigenvalue_rows(sets, int(header["params"]["n"])), args.format))
    return EXIT_OK


COMMANDS: dict[str, Callable[[argparse.Namespace], int]] = {
    "solve-bethe": cmd_solve_bethe,
    "verify": cmd_verify,
    "report": cmd_report,
}


def main(argv: Sequence[str] | None = None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return EXIT_CONFIG if exc.code not in (0, None) else EXIT_OK
    try:
        return COMMANDS[args.command](args)
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except (IncompleteSet, EmptyCache) as exc:
        print(f"incomplete: {exc}", file=sys.stderr)
        return EXIT_INCOMPLETE


if __name__ == "__main__":
    raise SystemExit(main())

"""Command-line interface: query, solve, bench, compile and td subcommands.

Exit codes: 0 success, 1 parse error (including unreadable input), 2 semantic error,
3 resource cap or timeout.
"""
from __future__ import annotations

import argparse
import json
import logging
import os
import sys
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from itertools import product
from typing import Optional, Sequence

from . import bench
from .cnf import Cnf, read_dimacs
from .credal import CredalResult, query_probability
from .dtsolve import UtilityRange, UtilityReport
from .errors import DtpaspError, NotCompilableError, ParseError, ResourceLimitError
from .lang import ground, parse, parse_query
from .pipeline import Amc3Config, compile_program, solve
from .stable import DEFAULT_MAX_ATOMS

logger = logging.getLogger("dtpasp")

EXIT_OK, EXIT_PARSE, EXIT_SEMANTIC, EXIT_RESOURCE = 0, 1, 2, 3
ENV_MAX_ATOMS = "DTPASP_MAX_ATOMS"
ENV_TIMEOUT = "DTPASP_TIMEOUT"
METHODS = ("auto", "enum", "amc3")


@dataclass
class RunConfig:
    command: str
    input: Optional[str] = None
    method: str = "auto"
    query: tuple = ()
    seed: int = 0
    max_atoms: int = DEFAULT_MAX_ATOMS
    timeout: Optional[float] = None
    output: str = "human"              # "human" or "json"
    extra: dict = field(default_factory=dict)


# ---------------------------------------------------------------- rendering

def fmt(x: float) -> str:
    return f"{x:.9g}"


def render_credal(res: CredalResult, fmt_: str = "human") -> str:
    if fmt_ == "json":
        return json.dumps({"lower": res.lower, "upper": res.upper,
                           "inc": res.inconsistent_mass})
    return f"lower={fmt(res.lower)} upper={fmt(res.upper)} inc={fmt(res.inconsistent_mass)}"


def _strategy_text(report: UtilityReport, mask: int) -> str:
    return "{" + ",".join(sorted(report.strategy_atoms(mask))) + "}"


def report_to_dict(report: UtilityReport, per_strategy: bool = True) -> dict:
    def best(b):
        if b is None:
            return None
        return {"mask": b[0], "strategy": sorted(report.strategy_atoms(b[0])), "value": b[1]}
    out = {"decisions": list(report.decisions),
           "best_lower": best(report.best_lower),
           "best_upper": best(report.best_upper),
           "discarded": sorted(report.discarded),
           "stats": report.stats}
    if per_strategy:
        out["per_strategy"] = {str(m): [r.lower, r.upper]
                               for m, r in sorted(report.per_strategy.items())}
        out["inconsistent_mass"] = {str(m): v for m, v in
                                    sorted(report.inconsistent_mass_per_strategy.items())}
    return out


def report_from_dict(d: dict) -> UtilityReport:
    def best(b):
        return None if b is None else (b["mask"], b["value"])
    return UtilityReport(
        decisions=tuple(d["decisions"]),
        best_lower=best(d["best_lower"]),
        best_upper=best(d["best_upper"]),
        per_strategy={int(m): UtilityRange(lo, hi)
                      for m, (lo, hi) in d.get("per_strategy", {}).items()},
        inconsistent_mass_per_strategy={int(m): v
                                        for m, v in d.get("inconsistent_mass", {}).items()},
        discarded=frozenset(d.get("discarded", ())),
        stats=dict(d.get("stats", {})))


def render_report(report: UtilityReport, fmt_: str = "human", per_strategy: bool = False) -> str:
    if fmt_ == "json":
        return json.dumps(report_to_dict(report, per_strategy))
    lines = []
    if per_strategy:
        for m, r in sorted(report.per_strategy.items()):
            tag = " (discarded: every world inconsistent)" if m in report.discarded else ""
            lines.append(f"{_strategy_text(report, m)} [{fmt(r.lower)}, {fmt(r.upper)}]{tag}")
    for name, b in (("lower", report.best_lower), ("upper", report.best_upper)):
        if b is None:
            lines.append(f"{name}: none (no strategy has a consistent world)")
        else:
            lines.append(f"{name}: {_strategy_text(report, b[0])} {fmt(b[1])}")
    if "fallback" in report.stats:
        lines.append(f"note: solved by enumeration ({report.stats['fallback']})")
    return "\n".join(lines)


def parse_report(text: str) -> UtilityReport:
    """Inverse of ``render_report(..., "json")``."""
    return report_from_dict(json.loads(text))


# ---------------------------------------------------------------- input helpers

def _read(path: str) -> str:
    if path == "-":
        return sys.stdin.read()
    with open(path, encoding="utf-8") as f:
        return f.read()


def _looks_like_dimacs(path: str, text: str) -> bool:
    if path.endswith((".cnf", ".dimacs")):
        return True
    for line in text.splitlines():
        s = line.strip()
        if s and not s.startswith(("c ", "%")) and s != "c":
            return s.startswith("p cnf")
    return False


def parse_var_list(text: str) -> set:
    """``"1-4,7"`` -> {1, 2, 3, 4, 7}."""
    out = set()
    for item in filter(None, (t.strip() for t in text.split(","))):
        lo, _, hi = item.partition("-")
        out |= set(range(int(lo), int(hi or lo) + 1))
    return out


def parse_tiers(spec: str, variables: Sequence[int]) -> tuple:
    """``"outer=1-4;middle=5-7;inner=8-9"`` -> (xo, xm, xi); unlisted variables are inner."""
    tiers = {"outer": set(), "middle": set(), "inner": set()}
    for part in filter(None, (t.strip() for t in spec.split(";"))):
        name, sep, vals = part.partition("=")
        name = name.strip()
        if not sep or name not in tiers:
            raise ParseError(f"bad tier spec {part!r}; expected outer=..;middle=..;inner=..")
        try:
            tiers[name] |= parse_var_list(vals)
        except ValueError:
            raise ParseError(f"bad variable list {vals!r}") from None
    unknown = set().union(*tiers.values()) - set(variables)
    if unknown:
        raise ParseError(f"tier spec names unknown variables {sorted(unknown)}")
    listed = tiers["outer"] | tiers["middle"] | tiers["inner"]
    tiers["inner"] |= set(variables) - listed
    return tiers["outer"], tiers["middle"], tiers["inner"]


def parse_params(text: str, suite: str) -> list:
    """``"n=2,d=1..8"`` -> list of (n, d); t3-t6 also accept ``size=a..b`` (n = d)."""
    ranges = {}
    for item in filter(None, (t.strip() for t in text.split(","))):
        key, sep, val = item.partition("=")
        if not sep:
            raise ParseError(f"bad parameter {item!r}; expected key=value or key=a..b")
        lo, dots, hi = val.partition("..")
        try:
            ranges[key.strip()] = list(range(int(lo), int(hi if dots else lo) + 1))
        except ValueError:
            raise ParseError(f"bad parameter value {val!r}") from None
    if suite in ("t1", "t2"):
        if set(ranges) != {"n", "d"}:
            raise ParseError(f"{suite} needs parameters n and d")
        return list(product(ranges["n"], ranges["d"]))
    sizes = ranges.get("size") or ranges.get("n") or ranges.get("d")
    if not sizes or len(ranges) != 1:
        raise ParseError(f"{suite} takes a single size parameter (size=, n= or d=)")
    return [(k, k) for k in sizes]


def _env_number(name: str, kind, default):
    raw = os.environ.get(name)
    if raw is None or raw == "":
        return default
    try:
        return kind(raw)
    except ValueError:
        raise ParseError(f"environment variable {name}={raw!r} is not a number") from None


# ---------------------------------------------------------------- commands

def cmd_query(cfg: RunConfig) -> int:
    program = parse(_read(cfg.input))
    lits = parse_query(",".join(cfg.query))
    with bench.time_limit(cfg.timeout):
        res = query_probability(program, lits, max_atoms=cfg.max_atoms)
    print(render_credal(res, cfg.output))
    return EXIT_OK


def _solve_with_config(program, cfg: RunConfig) -> UtilityReport:
    with bench.time_limit(cfg.timeout):
        kwargs = {"max_atoms": cfg.max_atoms} if cfg.method != "amc3" else {}
        report = solve(program, cfg.method, **kwargs)
    if "fallback" in report.stats:
        logger.warning("amc3 not applicable, used enumeration: %s", report.stats["fallback"])
    return report


def cmd_solve(cfg: RunConfig) -> int:
    program = parse(_read(cfg.input))
    if cfg.extra.get("per_strategy") and cfg.method == "auto":
        # only enumeration produces the per-strategy map
        cfg = RunConfig(**{**cfg.__dict__, "method": "enum"})
    report = _solve_with_config(program, cfg)
    print(render_report(report, cfg.output, cfg.extra.get("per_strategy", False)))
    return EXIT_OK


def _bench_one(args):
    spec, method, timeout = args
    return bench.run(spec, method, timeout, raise_errors=False)


def cmd_bench(cfg: RunConfig) -> int:
    suite = cfg.extra["suite"]
    sizes = parse_params(cfg.extra["params"], suite)
    methods = [m.strip() for m in cfg.method.split(",")]
    for m in methods:
        if m not in METHODS:
            raise ParseError(f"unknown method {m!r}")
    specs = [bench.BenchSpec(suite, n, d, cfg.seed) for n, d in sizes]
    jobs = [(s, m, cfg.timeout) for s in specs for m in methods]
    workers = cfg.extra.get("jobs", 1)
    if workers > 1:
        with ProcessPoolExecutor(max_workers=workers) as ex:
            results = list(ex.map(_bench_one, jobs))
    else:
        results = [_bench_one(j) for j in jobs]
    out = cfg.extra.get("out")
    if out and out != "-":
        with open(out, "w", newline="", encoding="utf-8") as f:
            rows = bench.write_csv(results, f)
        logger.info("wrote %d rows to %s", rows, out)
    else:
        bench.write_csv(results, sys.stdout)
    return EXIT_OK


def _load_cnf(path: str) -> Optional[Cnf]:
    text = _read(path)
    return read_dimacs(text) if _looks_like_dimacs(path, text) else None


def cmd_compile(cfg: RunConfig) -> int:
    from .circuit import compile_cnf, count_models
    from .treedecomp import tree_decomposition, primal_graph

    dump = cfg.extra.get("dump_nnf")
    cnf = _load_cnf(cfg.input)
    if cnf is not None:
        td = tree_decomposition(primal_graph(cnf, include_all=True))
        circuit = compile_cnf(cnf, td)
        print(f"variables={cnf.num_vars} clauses={len(cnf.clauses)} td_width={td.width} "
              f"nodes={circuit.size()} models={count_models(circuit, cnf.num_vars)}")
    else:
        program = parse(_read(cfg.input))
        try:
            cp = compile_program(program, Amc3Config(check_purity=True))
        except NotCompilableError as e:
            if cfg.method == "amc3":
                raise
            print(f"note: not compilable ({e}); falling back to enumeration")
            report = _solve_with_config(program, RunConfig(**{**cfg.__dict__, "method": "enum"}))
            print(render_report(report, cfg.output))
            return EXIT_OK
        circuit = cp.circuit
        inst = cp.instance
        print(f"variables={inst.cnf.num_vars} clauses={len(inst.cnf.clauses)} "
              f"td_width={cp.decomposition.width} nodes={circuit.size()} audit=ok")
    if dump:
        with open(dump, "w", encoding="utf-8") as f:
            f.write(circuit.to_nnf())
    return EXIT_OK


def cmd_td(cfg: RunConfig) -> int:
    from .completion import amc_instance
    from .treedecomp import amc3_decomposition, primal_graph

    cnf = _load_cnf(cfg.input)
    if cnf is not None:
        xo, xm, xi = parse_tiers(cfg.extra.get("tiers") or "", cnf.variables)
    else:
        inst = amc_instance(ground(parse(_read(cfg.input))))
        cnf = inst.cnf
        if cfg.extra.get("tiers"):
            xo, xm, xi = parse_tiers(cfg.extra["tiers"], cnf.variables)
        else:
            xo, xm, xi = ({v for v, t in inst.tiers.items() if t == tier}
                          for tier in ("outer", "middle", "inner"))
    mode = cfg.extra.get("definability", "syntactic")
    td = amc3_decomposition(cnf, xo, xm, xi, None if mode == "none" else mode)
    valid = td.is_valid(primal_graph(cnf, include_all=True))
    info = td.info

    def names(vs):
        return "{" + ",".join(cnf.name(v) for v in sorted(vs)) + "}"
    if cfg.output == "json":
        print(json.dumps({"width": td.width, "valid": valid,
                          "separator_outer": sorted(info["separator_outer"]),
                          "separator_middle": sorted(info["separator_middle"]),
                          "bags": {str(k): sorted(b) for k, b in sorted(td.bags.items())}}))
    else:
        print(f"width={td.width} valid={'yes' if valid else 'no'} "
              f"S_O={names(info['separator_outer'])} S_M={names(info['separator_middle'])}")
    out = cfg.extra.get("out_td")
    if out:
        with open(out, "w", encoding="utf-8") as f:
            f.write(td.to_td(cnf.num_vars))
    return EXIT_OK if valid else EXIT_SEMANTIC


COMMANDS = {"query": cmd_query, "solve": cmd_solve, "bench": cmd_bench,
            "compile": cmd_compile, "td": cmd_td}


# ---------------------------------------------------------------- argument parsing

def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="dtpasp", description=__doc__.splitlines()[0])
    ap.add_argument("-v", "--verbose", action="count", default=0,
                    help="-v for progress, -vv for debug output")
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--max-atoms", type=int, default=None,
                        help=f"atom cap for answer-set search (env {ENV_MAX_ATOMS})")
    common.add_argument("--timeout", type=float, default=None,
                        help=f"wall-clock limit in seconds (env {ENV_TIMEOUT})")
    common.add_argument("--format", choices=("human", "json"), default="human")
    sub = ap.add_subparsers(dest="command", required=True)

    q = sub.add_parser("query", parents=[common], help="lower/upper probability of a query")
    q.add_argument("file")
    q.add_argument("--query", "-q", required=True, action="append",
                   help="ground literal(s), comma separated, e.g. 'qr' or 'qr,not nqr'")

    s = sub.add_parser("solve", parents=[common], help="optimal lower/upper strategies")
    s.add_argument("file")
    s.add_argument("--method", choices=METHODS, default="auto")
    s.add_argument("--per-strategy", action="store_true",
                   help="also list every strategy's utility interval (enumeration only)")

    b = sub.add_parser("bench", parents=[common], help="run a synthetic suite, write CSV")
    b.add_argument("--suite", choices=bench.SUITES, required=True)
    b.add_argument("--params", required=True, help="e.g. 'n=2,d=1..8' or 'size=1..6'")
    b.add_argument("--seed", type=int, default=0)
    b.add_argument("--out", default="-", help="CSV path ('-' for stdout)")
    b.add_argument("--method", default="auto", help="one or more of auto,enum,amc3")
    b.add_argument("--jobs", type=int, default=1, help="parallel worker processes")

    c = sub.add_parser("compile", parents=[common], help="compile a program or DIMACS CNF")
    c.add_argument("file")
    c.add_argument("--method", choices=("auto", "amc3"), default="auto")
    c.add_argument("--dump-nnf", metavar="PATH")

    t = sub.add_parser("td", parents=[common], help="tier-respecting tree decomposition")
    t.add_argument("file")
    t.add_argument("--tiers", help="e.g. 'outer=1-4;middle=5-7;inner=8-9' (DIMACS input)")
    t.add_argument("--definability", choices=("syntactic", "semantic", "none"),
                   default="syntactic")
    t.add_argument("--out-td", metavar="PATH")
    return ap


def config_from_args(ns: argparse.Namespace) -> RunConfig:
    max_atoms = ns.max_atoms
    if max_atoms is None:
        max_atoms = _env_number(ENV_MAX_ATOMS, int, DEFAULT_MAX_ATOMS)
    timeout = ns.timeout if ns.timeout is not None else _env_number(ENV_TIMEOUT, float, None)
    extra = {k: v for k, v in vars(ns).items()
             if k in ("per_strategy", "suite", "params", "out", "jobs", "dump_nnf", "tiers",
                      "definability", "out_td")}
    return RunConfig(command=ns.command, input=getattr(ns, "file", None),
                     method=getattr(ns, "method", "auto"),
                     query=tuple(getattr(ns, "query", None) or ()),
                     seed=getattr(ns, "seed", 0), max_atoms=max_atoms, timeout=timeout,
                     output=ns.format, extra=extra)


def main(argv: Optional[Sequence[str]] = None) -> int:
    ns = build_parser().parse_args(argv)
    level = logging.WARNING if ns.verbose == 0 else logging.INFO if ns.verbose == 1 else logging.DEBUG
    logging.basicConfig(level=level, format="%(levelname)s %(name)s: %(message)s")
    try:
        cfg = config_from_args(ns)
        return COMMANDS[cfg.command](cfg)
    except (ParseError, OSError) as e:
        print(f"error: {e}", file=sys.stderr)
        return EXIT_PARSE
    except ResourceLimitError as e:
        print(f"resource limit: {e}", file=sys.stderr)
        return EXIT_RESOURCE
    except (DtpaspError, ValueError) as e:
        print(f"error: {e}", file=sys.stderr)
        return EXIT_SEMANTIC


__all__ = ["RunConfig", "main", "build_parser", "render_report", "parse_report",
           "report_to_dict", "report_from_dict", "render_credal", "parse_tiers", "parse_params"]

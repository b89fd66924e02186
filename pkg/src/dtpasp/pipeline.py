"""Circuit-based solving: completion -> tier decomposition -> compilation -> 3AMC evaluation."""
from __future__ import annotations

import logging
import math
import time
from dataclasses import dataclass
from typing import Optional

from .algebra import INNER, INNER_ONE, MIDDLE, OUTER
from .circuit import audit, compile_cnf, eval_circuit_3amc
from .completion import amc_instance
from .dtsolve import UtilityReport, as_ground, solve as solve_enum
from .errors import NotCompilableError
from .treedecomp import amc3_decomposition

logger = logging.getLogger(__name__)


@dataclass(frozen=True)
class Amc3Config:
    definability: Optional[str] = "syntactic"   # "syntactic", "semantic" or None
    eliminate_neutral: bool = True              # substitute away weight-neutral inner variables
    check_purity: bool = False                  # run the structural audit on the circuit


def neutral_inner_vars(inst) -> list:
    return [v for v in inst.cnf.variables
            if inst.tiers[v] == INNER and inst.weights[v] == INNER_ONE
            and inst.weights[-v] == INNER_ONE]


@dataclass
class CompiledProgram:
    """Intermediate artifacts of the circuit path, kept for diagnostics."""
    program: object        # GroundProgram
    instance: object       # AmcInstance
    decomposition: object  # TreeDecomposition
    circuit: object        # Circuit
    timings: dict


def compile_program(p, config: Amc3Config = Amc3Config()) -> CompiledProgram:
    """Completion, tier decomposition and compilation of a DT program. Raises
    NotCompilableError for programs outside the supported class (non-tight, non-HCF,
    aggregates in rule bodies)."""
    gp = as_ground(p)
    t0 = time.perf_counter()
    inst = amc_instance(gp)
    xo = {v for v, t in inst.tiers.items() if t == OUTER}
    xm = {v for v, t in inst.tiers.items() if t == MIDDLE}
    xi = {v for v, t in inst.tiers.items() if t == INNER}
    td = amc3_decomposition(inst.cnf, xo, xm, xi, config.definability)
    t1 = time.perf_counter()
    elim = neutral_inner_vars(inst) if config.eliminate_neutral else ()
    # decisions[k] is strategy bit k; variable numbers are atom index + 1
    priority = {i + 1: -k for k, i in enumerate(gp.decisions)}
    circuit = compile_cnf(inst.cnf, td, inst.tiers, elim, priority)
    if config.check_purity:
        audit(circuit, inst.tiers)
    t2 = time.perf_counter()
    return CompiledProgram(gp, inst, td, circuit,
                           {"decompose_seconds": t1 - t0, "compile_seconds": t2 - t1})


def solve_amc3(p, config: Amc3Config = Amc3Config()) -> UtilityReport:
    """Lower/upper optimal strategies by compiling the program and evaluating the circuit."""
    cp = compile_program(p, config)
    gp, inst = cp.program, cp.instance
    t0 = time.perf_counter()
    lo, hi, lo_set, hi_set = eval_circuit_3amc(cp.circuit, inst)
    decisions = tuple(str(gp.atoms[i]) for i in gp.decisions)
    bit = {name: k for k, name in enumerate(decisions)}

    def best(value, names):
        if value == -math.inf:
            return None
        return (sum(1 << bit[n] for n in names), value)

    stats = {"variables": inst.cnf.num_vars, "clauses": len(inst.cnf.clauses),
             "td_width": cp.decomposition.width, "circuit_nodes": cp.circuit.size(),
             **cp.timings, "eval_seconds": time.perf_counter() - t0}
    logger.debug("amc3 stats %s", stats)
    return UtilityReport(decisions, best(lo, lo_set), best(hi, hi_set), stats=stats)


def solve(p, method: str = "auto", config: Amc3Config = Amc3Config(), **enum_kwargs
          ) -> UtilityReport:
    """Dispatch to ``enum``, ``amc3`` or ``auto`` (amc3, falling back to enumeration)."""
    if method == "enum":
        return solve_enum(p, **enum_kwargs)
    if method == "amc3":
        return solve_amc3(p, config)
    if method != "auto":
        raise ValueError(f"unknown method {method!r}")
    gp = as_ground(p)
    try:
        report = solve_amc3(gp, config)
    except NotCompilableError as e:
        logger.info("falling back to enumeration: %s", e)
        report = solve_enum(gp, **enum_kwargs)
        report.stats["fallback"] = str(e)
    return report


__all__ = ["Amc3Config", "CompiledProgram", "compile_program", "solve_amc3", "solve",
           "neutral_inner_vars"]

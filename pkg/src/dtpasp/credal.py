"""Worlds, world probabilities and credal (lower/upper) query probabilities."""
from __future__ import annotations

from dataclasses import dataclass
from typing import Iterable, Sequence

from .errors import ProgramError, ResourceLimitError
from .lang import GroundProgram, Literal, ground
from .stable import DEFAULT_MAX_ATOMS, answer_sets

DEFAULT_MAX_FACTS = 30


@dataclass(frozen=True)
class World:
    """A truth assignment to the probabilistic facts; bit k <-> ``prob_facts[k]``."""
    mask: int
    prob: float
    facts: tuple  # atom indices of the true facts


@dataclass(frozen=True)
class CredalResult:
    lower: float
    upper: float
    inconsistent_mass: float


def _as_ground(p) -> GroundProgram:
    return p if isinstance(p, GroundProgram) else ground(p)


def enumerate_worlds(p, max_facts: int = DEFAULT_MAX_FACTS) -> list:
    gp = _as_ground(p)
    n = len(gp.prob_facts)
    if n > max_facts:
        raise ResourceLimitError(f"{n} probabilistic facts exceed the world cap of {max_facts}")
    worlds = []
    for mask in range(1 << n):
        prob = 1.0
        facts = []
        for k, (idx, pr) in enumerate(gp.prob_facts):
            if mask >> k & 1:
                prob *= pr
                facts.append(idx)
            else:
                prob *= 1.0 - pr
        worlds.append(World(mask, prob, tuple(facts)))
    return worlds


def resolve_query(gp: GroundProgram, query: Iterable) -> tuple:
    """Turn literals (or ``(atom, positive)`` pairs) into ``(pos_mask, neg_mask)``."""
    pos = neg = 0
    for lit in query:
        atom, positive = (lit.atom, lit.positive) if isinstance(lit, Literal) else lit
        if atom not in gp.index:
            raise ProgramError(f"query atom {atom} does not occur in the program")
        bit = 1 << gp.index[atom]
        if positive:
            pos |= bit
        else:
            neg |= bit
    return pos, neg


def query_probability(p, query: Sequence, max_atoms: int = DEFAULT_MAX_ATOMS,
                      max_facts: int = DEFAULT_MAX_FACTS) -> CredalResult:
    """Lower/upper probability of a conjunction of ground literals plus the inconsistent mass."""
    gp = _as_ground(p)
    pos, neg = resolve_query(gp, query)
    lower = upper = inc = 0.0
    for w in enumerate_worlds(gp, max_facts):
        models = answer_sets(gp.with_facts(w.facts), max_atoms).masks
        if not models:
            inc += w.prob
            continue
        holds = [m & pos == pos and not m & neg for m in models]
        if all(holds):
            lower += w.prob
        if any(holds):
            upper += w.prob
    return CredalResult(lower, upper, inc)


def world_answer_sets(p, strategy_facts: Sequence[int] = (), max_atoms: int = DEFAULT_MAX_ATOMS):
    """Yield ``(world, answer-set collection)`` for every world, decisions in ``strategy_facts`` set."""
    gp = _as_ground(p)
    for w in enumerate_worlds(gp):
        yield w, answer_sets(gp.with_facts(tuple(strategy_facts) + w.facts), max_atoms)


__all__ = ["World", "CredalResult", "enumerate_worlds", "query_probability", "resolve_query",
           "world_answer_sets"]

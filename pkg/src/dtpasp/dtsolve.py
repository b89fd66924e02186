"""Exact decision-theoretic solving by enumerating strategies, worlds and answer sets.

This is the slow reference solver; the circuit pipeline is checked against it.
"""
from __future__ import annotations

import logging
from dataclasses import dataclass, field
from typing import Iterable, Optional, Sequence

from .credal import DEFAULT_MAX_FACTS, World, enumerate_worlds
from .errors import ProgramError, ResourceLimitError
from .lang import GroundProgram, ground
from .stable import DEFAULT_MAX_ATOMS, answer_sets

logger = logging.getLogger(__name__)

DEFAULT_MAX_ENUM_BITS = 24


@dataclass(frozen=True)
class UtilityRange:
    lower: float
    upper: float


@dataclass
class StrategyEvaluation:
    range: UtilityRange
    inconsistent_mass: float
    consistent: bool  # at least one world has an answer set
    pairs: int


@dataclass
class UtilityReport:
    """Optimal lower/upper strategies (bitmasks over ``decisions``) and their values."""
    decisions: tuple                      # decision atom names, bit k <-> decisions[k]
    best_lower: Optional[tuple]           # (strategy mask, value) or None if nothing is consistent
    best_upper: Optional[tuple]
    per_strategy: dict = field(default_factory=dict)
    inconsistent_mass_per_strategy: dict = field(default_factory=dict)
    discarded: frozenset = frozenset()    # strategies whose every world is inconsistent
    stats: dict = field(default_factory=dict)

    def strategy_atoms(self, mask: int) -> frozenset:
        return frozenset(d for k, d in enumerate(self.decisions) if mask >> k & 1)


def as_ground(p) -> GroundProgram:
    return p if isinstance(p, GroundProgram) else ground(p)


def strategy_mask(gp: GroundProgram, atoms: Iterable) -> int:
    """Bitmask over ``gp.decisions`` for a collection of decision atoms (Atom or str)."""
    names = {str(gp.atoms[i]): k for k, i in enumerate(gp.decisions)}
    mask = 0
    for a in atoms:
        try:
            mask |= 1 << names[str(a)]
        except KeyError:
            raise ProgramError(f"{a} is not a decision atom") from None
    return mask


def strategy_facts(gp: GroundProgram, sigma: int) -> tuple:
    return tuple(idx for k, idx in enumerate(gp.decisions) if sigma >> k & 1)


def answer_set_reward(a: int, utilities: Sequence) -> float:
    """Sum of the rewards of the utility atoms true in the answer set ``a``."""
    return sum(r for idx, r in utilities if a >> idx & 1)


def world_reward_range(gp_sigma: GroundProgram, w: World, max_atoms: int = DEFAULT_MAX_ATOMS):
    """(min, max) answer-set reward of world ``w``; None when the world has no answer set."""
    models = answer_sets(gp_sigma.with_facts(w.facts), max_atoms).masks
    if not models:
        return None
    rewards = [answer_set_reward(m, gp_sigma.utilities) for m in models]
    return min(rewards), max(rewards)


def evaluate_strategy(gp: GroundProgram, sigma: int, worlds=None,
                      max_atoms: int = DEFAULT_MAX_ATOMS) -> StrategyEvaluation:
    worlds = worlds if worlds is not None else enumerate_worlds(gp)
    gp_sigma = gp.with_facts(strategy_facts(gp, sigma))
    lo = hi = inc = 0.0
    consistent = False
    for w in worlds:
        rr = world_reward_range(gp_sigma, w, max_atoms)
        if rr is None:
            inc += w.prob
            continue
        consistent = True
        lo += w.prob * rr[0]
        hi += w.prob * rr[1]
    return StrategyEvaluation(UtilityRange(lo, hi), inc, consistent, len(worlds))


def strategy_utility(p, sigma, max_atoms: int = DEFAULT_MAX_ATOMS) -> UtilityRange:
    """Lower/upper expected utility of a strategy (mask or iterable of decision atoms)."""
    gp = as_ground(p)
    if not isinstance(sigma, int):
        sigma = strategy_mask(gp, sigma)
    return evaluate_strategy(gp, sigma, max_atoms=max_atoms).range


def solve(p, max_atoms: int = DEFAULT_MAX_ATOMS, max_bits: int = DEFAULT_MAX_ENUM_BITS
          ) -> UtilityReport:
    """Evaluate all 2^d strategies over all 2^n worlds and pick the lower/upper maximisers.

    Ties go to the smallest strategy bitmask. Strategies whose worlds are all inconsistent get
    [0, 0], are listed in ``discarded`` and never selected.
    """
    gp = as_ground(p)
    d, n = len(gp.decisions), len(gp.prob_facts)
    if d + n > max_bits:
        raise ResourceLimitError(
            f"enumeration of 2^{d + n} (strategy, world) pairs exceeds the cap 2^{max_bits}")
    worlds = enumerate_worlds(gp, max_facts=max(n, DEFAULT_MAX_FACTS))
    report = UtilityReport(tuple(str(gp.atoms[i]) for i in gp.decisions), None, None)
    discarded = set()
    pairs = 0
    for sigma in range(1 << d):
        ev = evaluate_strategy(gp, sigma, worlds, max_atoms)
        pairs += ev.pairs
        report.per_strategy[sigma] = ev.range
        report.inconsistent_mass_per_strategy[sigma] = ev.inconsistent_mass
        if not ev.consistent:
            discarded.add(sigma)
            report.per_strategy[sigma] = UtilityRange(0.0, 0.0)
            continue
        if report.best_lower is None or ev.range.lower > report.best_lower[1]:
            report.best_lower = (sigma, ev.range.lower)
        if report.best_upper is None or ev.range.upper > report.best_upper[1]:
            report.best_upper = (sigma, ev.range.upper)
    report.discarded = frozenset(discarded)
    report.stats = {"pairs_evaluated": pairs, "strategies": 1 << d, "worlds": len(worlds)}
    logger.debug("enumeration evaluated %d (strategy, world) pairs", pairs)
    return report


def dtproblog_utility(p, sigma, max_atoms: int = DEFAULT_MAX_ATOMS) -> float:
    """Point expected utility; valid only when every world has exactly one answer set."""
    gp = as_ground(p)
    if not isinstance(sigma, int):
        sigma = strategy_mask(gp, sigma)
    gp_sigma = gp.with_facts(strategy_facts(gp, sigma))
    total = 0.0
    for w in enumerate_worlds(gp):
        models = answer_sets(gp_sigma.with_facts(w.facts), max_atoms).masks
        if len(models) != 1:
            raise ProgramError(
                f"world {sorted(str(gp.atoms[i]) for i in w.facts)} has {len(models)} answer sets;"
                " the point utility needs exactly one per world")
        total += w.prob * answer_set_reward(models[0], gp.utilities)
    return total


@dataclass(frozen=True)
class WorldRow:
    facts: frozenset
    answer_sets: tuple     # of frozenset of atom names
    prob: float
    reward: Optional[UtilityRange]  # probability-weighted, None if inconsistent


def world_table(p, sigma=0, max_atoms: int = DEFAULT_MAX_ATOMS) -> list:
    """Per-world answer sets and weighted reward ranges for one strategy."""
    gp = as_ground(p)
    if not isinstance(sigma, int):
        sigma = strategy_mask(gp, sigma)
    gp_sigma = gp.with_facts(strategy_facts(gp, sigma))
    rows = []
    for w in enumerate_worlds(gp):
        coll = answer_sets(gp_sigma.with_facts(w.facts), max_atoms)
        rewards = [answer_set_reward(m, gp.utilities) for m in coll.masks]
        rng = UtilityRange(w.prob * min(rewards), w.prob * max(rewards)) if rewards else None
        rows.append(WorldRow(frozenset(str(gp.atoms[i]) for i in w.facts),
                             tuple(coll.as_sets()), w.prob, rng))
    return rows

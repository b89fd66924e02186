"""Seeded random tight DT programs, used to cross-check the solvers against each other."""
from __future__ import annotations

import random
from dataclasses import dataclass

from .lang import Program, parse


@dataclass(frozen=True)
class RandomProgramConfig:
    max_prob_facts: int = 3
    max_decisions: int = 3
    max_derived: int = 6
    max_rules_per_atom: int = 2
    max_body: int = 3
    constraint_prob: float = 0.3
    disjunction_prob: float = 0.15
    aggregate_prob: float = 0.0    # chance that an added constraint is a #count aggregate
    neg_prob: float = 0.35


def random_program_text(seed: int, cfg: RandomProgramConfig = RandomProgramConfig()) -> str:
    """Text of a tight, head-cycle-free program with utilities on derived atoms only.

    Positive body atoms of a rule for derived atom ``p<i>`` are facts, decisions or ``p<j>`` with
    ``j < i``, so the positive dependency graph is acyclic. Negative literals may point anywhere,
    which is what produces several (or no) answer sets per world. Decision costs use the
    ``r<k> :- d<k>`` idiom.
    """
    rng = random.Random(seed)
    n = rng.randint(0, cfg.max_prob_facts)
    d = rng.randint(0, cfg.max_decisions)
    m = rng.randint(1, cfg.max_derived)
    facts = [f"f{i}" for i in range(n)]
    decisions = [f"d{i}" for i in range(d)]
    derived = [f"p{i}" for i in range(m)]
    lines = [f"{rng.choice((0.1, 0.2, 0.25, 0.5, 0.6, 0.75, 0.9))}::{f}." for f in facts]
    lines += [f"decision {x}." for x in decisions]

    def body(i: int) -> list:
        pos_pool = facts + decisions + derived[:i]
        lits = []
        for _ in range(rng.randint(1, cfg.max_body)):
            if rng.random() < cfg.neg_prob:
                lits.append("not " + rng.choice(facts + decisions + derived))
            elif pos_pool:
                lits.append(rng.choice(pos_pool))
        return list(dict.fromkeys(lits))  # may be empty: the rule becomes a fact

    budget = cfg.max_derived - m  # decision-cost atoms also count as derived
    for i, p in enumerate(derived):
        for _ in range(rng.randint(0, cfg.max_rules_per_atom)):
            b = body(i)
            later = derived[i + 1:]
            if later and rng.random() < cfg.disjunction_prob:
                # a second head atom from later in the order keeps the program head-cycle-free
                q = rng.choice(later)
                lines.append(f"{p} ; {q} :- {', '.join(x for x in b if x not in (p, q))}."
                             if any(x not in (p, q) for x in b) else f"{p} ; {q}.")
            else:
                lines.append(f"{p} :- {', '.join(b)}." if b else f"{p}.")
    for k, x in enumerate(decisions):
        if budget > 0 and rng.random() < 0.5:
            budget -= 1
            lines.append(f"r{k} :- {x}.")
            lines.append(f"utility(r{k}, {rng.randint(-4, 0)}).")
    if rng.random() < cfg.constraint_prob:
        if rng.random() < cfg.aggregate_prob:
            pool = rng.sample(derived + facts, min(3, len(derived + facts)))
            elems = "; ".join(f"{k} : {a}" for k, a in enumerate(pool))
            lines.append(f":- #count{{{elems}}} >= {rng.randint(1, len(pool))}.")
        elif b := body(m):
            lines.append(f":- {', '.join(b)}.")
    for p in rng.sample(derived, rng.randint(1, m)):
        lines.append(f"utility({p}, {rng.randint(-6, 6)}).")
    return "\n".join(lines) + "\n"


def random_program(seed: int, cfg: RandomProgramConfig = RandomProgramConfig()) -> Program:
    return parse(random_program_text(seed, cfg))


__all__ = ["RandomProgramConfig", "random_program", "random_program_text"]

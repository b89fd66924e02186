"""Answer-set enumeration for ground programs under the reduct-based semantics.

Interpretations are Python ints used as bitsets over ``GroundProgram.atoms``.
"""
from __future__ import annotations

from dataclasses import dataclass
from typing import Iterable, Optional

from .errors import ResourceLimitError
from .lang import GroundProgram, GroundRule, compare, iter_bits

DEFAULT_MAX_ATOMS = 26


class _CRule:
    """Bitmask form of a ground rule, used by the search."""

    __slots__ = ("head", "pos", "neg", "aggs", "lits")

    def __init__(self, r: GroundRule):
        self.head = _mask(r.head)
        self.pos = _mask(r.pos)
        self.neg = _mask(r.neg)
        self.aggs = tuple(
            (tuple((terms, _mask(p), _mask(n)) for terms, p, n in a.elements), a.op, a.guard)
            for a in r.aggregates)
        self.lits = self.pos | self.neg


def _mask(indices: Iterable[int]) -> int:
    m = 0
    for i in indices:
        m |= 1 << i
    return m


def _agg_value(agg, T: int, F: int) -> Optional[bool]:
    elements, op, guard = agg
    sure, maybe = set(), set()
    for terms, p, n in elements:
        if p & F or n & T:
            continue
        maybe.add(terms)
        if p & ~T == 0 and n & ~F == 0:
            sure.add(terms)
    lo, hi = len(sure), len(maybe)
    first = compare(lo, op, guard)
    for c in range(lo + 1, hi + 1):
        if compare(c, op, guard) != first:
            return None
    return first


def _body_value(r: _CRule, T: int, F: int) -> Optional[bool]:
    if r.pos & F or r.neg & T:
        return False
    known = r.pos & ~T == 0 and r.neg & ~F == 0
    for agg in r.aggs:
        v = _agg_value(agg, T, F)
        if v is False:
            return False
        if v is None:
            known = False
    return True if known else None


def _propagate(rules, T: int, F: int):
    """Unit propagation over rule bodies; returns (T, F) or None on conflict."""
    changed = True
    while changed:
        changed = False
        for r in rules:
            if r.head & T:
                continue
            unknown_head = r.head & ~(T | F)
            b = _body_value(r, T, F)
            if b is True:
                if not unknown_head:
                    return None
                if unknown_head & (unknown_head - 1) == 0:
                    T |= unknown_head
                    changed = True
            elif b is None and not unknown_head and not r.aggs:
                # all head atoms false: the body must not become true
                open_pos = r.pos & ~T
                open_neg = r.neg & ~F
                if open_pos and not open_neg and open_pos & (open_pos - 1) == 0:
                    F |= open_pos
                    changed = True
                elif open_neg and not open_pos and open_neg & (open_neg - 1) == 0:
                    T |= open_neg
                    changed = True
        if T & F:
            return None
    return T, F


def _models(rules, free: int, T: int, F: int, first_only=False):
    """Enumerate total assignments over ``free`` (other atoms fixed by T/F) satisfying all rules."""
    out = []
    stack = [(T, F)]
    while stack:
        T, F = stack.pop()
        res = _propagate(rules, T, F)
        if res is None:
            continue
        T, F = res
        open_ = free & ~(T | F)
        if not open_:
            if all(_satisfied(r, T, F) for r in rules):
                out.append(T)
                if first_only:
                    return out
            continue
        v = open_ & -open_
        stack.append((T | v, F))
        stack.append((T, F | v))  # explored first
    return out


def _satisfied(r: _CRule, T: int, F: int) -> bool:
    return bool(r.head & T) or _body_value(r, T, F) is False


def _compile_rules(p: GroundProgram):
    return [_CRule(r) for r in p.rules]


def _universe(p: GroundProgram) -> int:
    return (1 << len(p.atoms)) - 1


def satisfies(i: int, r: GroundRule) -> bool:
    """True iff a true body under ``i`` implies a true head atom."""
    cr = _CRule(r)
    # every atom outside i is false
    return _satisfied(cr, i, ~i)


def reduct(p: GroundProgram, i: int) -> GroundProgram:
    """Keep exactly the rules whose whole body (negation and aggregates included) is true in ``i``."""
    kept = tuple(r for r in p.rules if _body_value(_CRule(r), i, ~i) is True)
    return GroundProgram(p.atoms, kept, p.prob_facts, p.decisions, p.utilities, p.auxiliary,
                         p.index)


def _is_model(rules, i: int) -> bool:
    return all(_satisfied(r, i, ~i) for r in rules)


def _is_minimal(rules, i: int, universe: int) -> bool:
    red = [r for r in rules if _body_value(r, i, ~i) is True]
    if all(not r.aggs and r.head & (r.head - 1) == 0 for r in red):
        # normal reduct: the unique minimal model is the least fixpoint
        lfp = 0
        changed = True
        while changed:
            changed = False
            for r in red:
                if r.head and not r.head & lfp and r.pos & ~lfp == 0:
                    lfp |= r.head
                    changed = True
        return lfp == i
    # search for a strictly smaller model of the reduct
    if i == 0:
        return True
    forbid_i = _CRule(GroundRule())
    forbid_i.pos = i
    forbid_i.lits = i
    smaller = _models(red + [forbid_i], i, 0, universe & ~i, first_only=True)
    return not smaller


def check_stable(p: GroundProgram, i: int) -> bool:
    rules = _compile_rules(p)
    return _is_model(rules, i) and _is_minimal(rules, i, _universe(p))


def _possible_atoms(rules) -> int:
    possible = 0
    changed = True
    while changed:
        changed = False
        for r in rules:
            if r.head & ~possible and r.pos & ~possible == 0:
                possible |= r.head
                changed = True
    return possible


@dataclass(frozen=True)
class AnswerSetCollection:
    program: GroundProgram
    masks: tuple

    def __len__(self):
        return len(self.masks)

    def __iter__(self):
        return iter(self.masks)

    def as_sets(self) -> list:
        return [self.program.names(m) for m in self.masks]


def answer_sets(p: GroundProgram, max_atoms: int = DEFAULT_MAX_ATOMS) -> AnswerSetCollection:
    """All answer sets of ``p`` in ascending bitmask order, with choice auxiliaries cleared."""
    rules = _compile_rules(p)
    universe = _universe(p)
    possible = _possible_atoms(rules)
    n_free = bin(possible).count("1")
    if n_free > max_atoms:
        raise ResourceLimitError(
            f"{n_free} undetermined atoms exceed the answer-set search cap of {max_atoms}")
    # atoms that head no applicable rule are false in every answer set
    F = universe & ~possible
    live = [r for r in rules if not r.pos & F]
    aux = _mask(p.auxiliary)
    found = set()
    for m in _models(live, possible, 0, F):
        if _is_minimal(live, m, universe):
            found.add(m & ~aux)
    return AnswerSetCollection(p, tuple(sorted(found)))


def project(c: AnswerSetCollection, atoms: Iterable) -> set:
    """Projective solutions: intersections of every answer set with ``atoms`` (masks)."""
    b = 0
    for a in atoms:
        b |= 1 << (a if isinstance(a, int) else c.program.atom_index(a))
    return {m & b for m in c.masks}


def mask_of(p: GroundProgram, atoms: Iterable) -> int:
    m = 0
    for a in atoms:
        m |= 1 << (a if isinstance(a, int) else p.atom_index(a))
    return m


__all__ = ["answer_sets", "check_stable", "reduct", "satisfies", "project", "mask_of",
           "AnswerSetCollection", "DEFAULT_MAX_ATOMS", "iter_bits"]

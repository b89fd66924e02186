"""Semirings for three-level algebraic model counting, tier weights, transformations and
by-definition (exhaustive) evaluators used as oracles for the circuit evaluator.

Value encodings (plain tuples so they hash and compare cheaply):

* inner  ``(min_acc, max_acc)`` in the minmax-plus semiring
* middle ``(prob, lo, hi)`` in the two-gradient semiring
* outer  ``(lo_val, hi_val, lo_set, hi_set)`` with frozensets of decision atom names
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable, Iterable, Mapping, Optional

from .cnf import Cnf, iter_models
from .errors import ProgramError, ResourceLimitError
from .lang import GroundProgram

INF = math.inf
INNER, MIDDLE, OUTER = "inner", "middle", "outer"
TIER_RANK = {INNER: 0, MIDDLE: 1, OUTER: 2}
DEFAULT_MAX_VARS = 22


@dataclass(frozen=True)
class Semiring:
    name: str
    plus: Callable
    times: Callable
    zero: object
    one: object

    def sum(self, values: Iterable):
        acc = self.zero
        for v in values:
            acc = self.plus(acc, v)
        return acc

    def prod(self, values: Iterable):
        acc = self.one
        for v in values:
            acc = self.times(acc, v)
        return acc


# minmax-plus

def inner_plus(a, b):
    return (min(a[0], b[0]), max(a[1], b[1]))


def inner_times(a, b):
    return (a[0] + b[0], a[1] + b[1])


INNER_ZERO = (INF, -INF)
INNER_ONE = (0.0, 0.0)
INNER_SEMIRING = Semiring("minmax-plus", inner_plus, inner_times, INNER_ZERO, INNER_ONE)


# two-gradient

def middle_plus(a, b):
    return (a[0] + b[0], a[1] + b[1], a[2] + b[2])


def middle_times(a, b):
    return (a[0] * b[0], a[0] * b[1] + b[0] * a[1], a[0] * b[2] + b[0] * a[2])


MIDDLE_ZERO = (0.0, 0.0, 0.0)
MIDDLE_ONE = (1.0, 0.0, 0.0)
MIDDLE_SEMIRING = Semiring("two-gradient", middle_plus, middle_times, MIDDLE_ZERO, MIDDLE_ONE)


# max^4 / sum^4

def outer_plus(a, b):
    """Componentwise max, each value carrying its strategy set. Ties keep ``a``'s set."""
    lo = (a[0], a[2]) if a[0] >= b[0] else (b[0], b[2])
    hi = (a[1], a[3]) if a[1] >= b[1] else (b[1], b[3])
    return (lo[0], hi[0], lo[1], hi[1])


def outer_times(a, b):
    return (a[0] + b[0], a[1] + b[1], a[2] | b[2], a[3] | b[3])


OUTER_ONE = (0.0, 0.0, frozenset(), frozenset())


def outer_zero(decisions: Iterable = ()):
    d = frozenset(decisions)
    return (-INF, -INF, d, d)


def outer_semiring(decisions: Iterable = ()) -> Semiring:
    return Semiring("max-sum-4", outer_plus, outer_times, outer_zero(decisions), OUTER_ONE)


# gradient and argmax semirings for the two-level (point utility) reduction

def gradient_plus(a, b):
    return (a[0] + b[0], a[1] + b[1])


def gradient_times(a, b):
    return (a[0] * b[0], a[0] * b[1] + b[0] * a[1])


GRADIENT_SEMIRING = Semiring("gradient", gradient_plus, gradient_times, (0.0, 0.0), (1.0, 0.0))


def argmax_plus(a, b):
    return a if a[0] >= b[0] else b


def argmax_times(a, b):
    return (a[0] + b[0], a[1] | b[1])


def argmax_semiring(decisions: Iterable = ()) -> Semiring:
    return Semiring("argmax", argmax_plus, argmax_times, (-INF, frozenset(decisions)),
                    (0.0, frozenset()))


# transformations between tiers

def transform_im(v):
    """Inner -> middle: ``(a, b) -> (1, a, b)``; the inner zero (no model) maps to the middle zero."""
    if v[0] == INF and v[1] == -INF:
        return MIDDLE_ZERO
    return (1.0, v[0], v[1])


def transform_mo(v, decisions: Iterable = (), discard_inconsistent: bool = True):
    """Middle -> outer: ``(p, a, b) -> (a, b, {}, {})``.

    With ``discard_inconsistent`` a zero probability component (every world inconsistent)
    maps to the outer zero so that such strategies can never win the maximisation.
    """
    if discard_inconsistent and v[0] == 0:
        return outer_zero(decisions)
    return (v[1], v[2], frozenset(), frozenset())


# weights

@dataclass(frozen=True)
class TierWeights:
    """Literal weights of a ground program: w0 on inner atoms, w1 on facts, w2 on decisions."""
    program: GroundProgram
    rewards: Mapping
    probs: Mapping
    decisions: frozenset

    def tier(self, atom: int) -> str:
        if atom in self.decisions:
            return OUTER
        if atom in self.probs:
            return MIDDLE
        return INNER

    def w0(self, atom: int, positive: bool):
        r = self.rewards.get(atom, 0.0) if positive else 0.0
        return (float(r), float(r))

    def w1(self, atom: int, positive: bool):
        p = self.probs[atom]
        return (p if positive else 1.0 - p, 0.0, 0.0)

    def w2(self, atom: int, positive: bool):
        if not positive:
            return OUTER_ONE
        s = frozenset((str(self.program.atoms[atom]),))
        return (0.0, 0.0, s, s)

    def weight(self, atom: int, positive: bool):
        t = self.tier(atom)
        return {INNER: self.w0, MIDDLE: self.w1, OUTER: self.w2}[t](atom, positive)


def tier_weights(p: GroundProgram) -> TierWeights:
    decisions = frozenset(p.decisions)
    probs = dict(p.prob_facts)
    for idx, _ in p.utilities:
        if idx in decisions or idx in probs:
            raise ProgramError(
                f"utility on {'decision' if idx in decisions else 'probabilistic fact'} atom "
                f"{p.atoms[idx]} has no inner weight; move it to a derived atom "
                f"(e.g. 'r :- {p.atoms[idx]}.' with utility(r, ...))")
    return TierWeights(p, dict(p.utilities), probs, decisions)


# instances and by-definition evaluation

@dataclass
class AmcInstance:
    """A CNF whose variables are split into outer/middle/inner tiers, with literal weights.

    ``weights`` maps every literal (signed variable) to its value in its tier's semiring.
    """
    cnf: Cnf
    tiers: dict
    weights: dict
    decisions: frozenset = frozenset()   # decision names, for the outer zero
    discard_inconsistent: bool = True
    inner: Semiring = INNER_SEMIRING
    middle: Semiring = MIDDLE_SEMIRING
    outer: Optional[Semiring] = None

    def __post_init__(self):
        if self.outer is None:
            self.outer = outer_semiring(self.decisions)
        missing = set(self.cnf.variables) - set(self.tiers)
        if missing:
            raise ValueError(f"variables without tier: {sorted(missing)}")
        for v in self.cnf.variables:
            if v not in self.weights or -v not in self.weights:
                raise ValueError(f"variable {v} lacks a weight for some polarity")

    def vars_of(self, tier: str) -> list:
        return sorted(v for v, t in self.tiers.items() if t == tier)

    def f_im(self, v):
        return transform_im(v)

    def f_mo(self, v):
        return transform_mo(v, self.decisions, self.discard_inconsistent)


def _assignments(variables):
    for bits in range(1 << len(variables)):
        yield {v: bool(bits >> k & 1) for k, v in enumerate(variables)}


def _weight_prod(semiring, weights, assignment):
    return semiring.prod(weights[v if val else -v] for v, val in sorted(assignment.items()))


def eval_3amc_by_definition(inst: AmcInstance, max_vars: int = DEFAULT_MAX_VARS):
    """Outer sum over outer assignments of w2 * f_mo(middle sum over middle assignments of
    w1 * f_im(inner sum over the consistent inner assignments of w0))."""
    xo, xm, xi = inst.vars_of(OUTER), inst.vars_of(MIDDLE), inst.vars_of(INNER)
    if len(xo) + len(xm) + len(xi) > max_vars:
        raise ResourceLimitError(
            f"{len(xo) + len(xm) + len(xi)} variables exceed the by-definition cap {max_vars}")
    total = inst.outer.zero
    for ao in _assignments(xo):
        mid = inst.middle.zero
        for am in _assignments(xm):
            fixed = {**ao, **am}
            inner = inst.inner.zero
            for ai in iter_models(inst.cnf, xi, fixed):
                inner = inst.inner.plus(inner, _weight_prod(inst.inner, inst.weights, ai))
            mid = inst.middle.plus(
                mid, inst.middle.times(_weight_prod(inst.middle, inst.weights, am),
                                       inst.f_im(inner)))
        total = inst.outer.plus(
            total, inst.outer.times(_weight_prod(inst.outer, inst.weights, ao), inst.f_mo(mid)))
    return total


@dataclass
class TwoAmcInstance:
    """Two-level instance: outer variables summed in ``outer``, the rest in ``inner``."""
    cnf: Cnf
    outer_vars: frozenset
    inner: Semiring
    outer: Semiring
    inner_weights: dict
    outer_weights: dict
    transform: Callable


def eval_2amc_by_definition(inst: TwoAmcInstance, max_vars: int = DEFAULT_MAX_VARS):
    xo = sorted(inst.outer_vars)
    xi = sorted(set(inst.cnf.variables) - set(xo))
    if len(xo) + len(xi) > max_vars:
        raise ResourceLimitError(
            f"{len(xo) + len(xi)} variables exceed the by-definition cap {max_vars}")
    total = inst.outer.zero
    for ao in _assignments(xo):
        inner = inst.inner.zero
        for ai in iter_models(inst.cnf, xi, ao):
            inner = inst.inner.plus(inner, _weight_prod(inst.inner, inst.inner_weights, ai))
        total = inst.outer.plus(
            total, inst.outer.times(_weight_prod(inst.outer, inst.outer_weights, ao),
                                    inst.transform(inner)))
    return total


def dtproblog_transform(decisions: Iterable = ()):
    d = frozenset(decisions)

    def f(v):
        return (v[1], frozenset()) if v[0] != 0 else (-INF, d)
    return f


__all__ = [
    "INF", "INNER", "MIDDLE", "OUTER", "Semiring", "inner_plus", "inner_times", "INNER_ZERO",
    "INNER_ONE", "INNER_SEMIRING", "middle_plus", "middle_times", "MIDDLE_ZERO", "MIDDLE_ONE",
    "MIDDLE_SEMIRING", "outer_plus", "outer_times", "outer_zero", "OUTER_ONE", "outer_semiring",
    "GRADIENT_SEMIRING", "argmax_semiring", "transform_im", "transform_mo", "TierWeights",
    "tier_weights", "AmcInstance", "TwoAmcInstance", "eval_3amc_by_definition",
    "eval_2amc_by_definition", "dtproblog_transform",
]

"""Clark completion of tight, head-cycle-free ground programs and definability analysis."""
from __future__ import annotations

from typing import Iterable

import networkx as nx

from .algebra import (GRADIENT_SEMIRING, INNER, MIDDLE, OUTER, AmcInstance, TwoAmcInstance,
                      argmax_semiring, dtproblog_transform, tier_weights)
from .cnf import Cnf, iter_models, make_cnf
from .errors import NotCompilableError, ResourceLimitError
from .lang import Atom, GroundProgram, GroundRule, compare

UTIL_PREFIX = "_util_"
MAX_AGGREGATE_ATOMS = 16
DEFAULT_DEFINABILITY_CAP = 20


def lift_utilities(gp: GroundProgram) -> GroundProgram:
    """Move utilities placed on decision atoms or probabilistic facts onto fresh derived atoms.

    ``utility(d, r)`` becomes ``_util_d :- d.`` with ``utility(_util_d, r)``; the fresh atom is
    true exactly when ``d`` is, so rewards are unchanged while every utility sits on an inner
    atom.
    """
    outer_or_middle = set(gp.decisions) | {i for i, _ in gp.prob_facts}
    if not any(i in outer_or_middle for i, _ in gp.utilities):
        return gp
    atoms = list(gp.atoms)
    rules = list(gp.rules)
    utilities = []
    for idx, r in gp.utilities:
        if idx not in outer_or_middle:
            utilities.append((idx, r))
            continue
        a = gp.atoms[idx]
        fresh = Atom(UTIL_PREFIX + a.predicate, a.args)
        while fresh in gp.index:
            fresh = Atom("_" + fresh.predicate, fresh.args)
        atoms.append(fresh)
        rules.append(GroundRule(head=(len(atoms) - 1,), pos=(idx,)))
        utilities.append((len(atoms) - 1, r))
    return GroundProgram(tuple(atoms), tuple(rules), gp.prob_facts, gp.decisions,
                         tuple(utilities), gp.auxiliary)


def dependency_graph(gp: GroundProgram) -> nx.DiGraph:
    """Positive dependency graph: an edge h -> b for every head atom h and positive body atom b."""
    g = nx.DiGraph()
    g.add_nodes_from(range(len(gp.atoms)))
    for r in gp.rules:
        for h in r.head:
            for b in r.pos:
                g.add_edge(h, b)
    return g


def check_tight(gp: GroundProgram) -> None:
    """Raise NotCompilableError for non-HCF disjunctions or positive cycles."""
    g = dependency_graph(gp)
    comp = {}
    for k, scc in enumerate(nx.strongly_connected_components(g)):
        for v in scc:
            comp[v] = k
    for r in gp.rules:
        if len(r.head) > 1 and len({comp[h] for h in r.head}) < len(r.head):
            raise NotCompilableError(
                f"disjunctive rule {gp.format_rule(r)} is not head-cycle-free")
    for scc in nx.strongly_connected_components(g):
        v = next(iter(scc))
        if len(scc) > 1 or g.has_edge(v, v):
            names = sorted(str(gp.atoms[i]) for i in scc)
            raise NotCompilableError(f"program is not tight: positive cycle through {names}")


def shift(gp: GroundProgram) -> tuple:
    """Rules with disjunctive heads rewritten as one normal rule per head atom."""
    out = []
    for r in gp.rules:
        if len(r.head) <= 1:
            out.append(r)
            continue
        for h in r.head:
            others = tuple(o for o in r.head if o != h)
            out.append(GroundRule((h,), r.pos, r.neg + others, r.aggregates))
    return tuple(out)


def _aggregate_clauses(body: list, aggregates, var) -> list:
    """Clauses forbidding ``body`` together with every assignment satisfying all aggregates."""
    atoms = sorted({i for agg in aggregates for _, p, n in agg.elements for i in p + n})
    if len(atoms) > MAX_AGGREGATE_ATOMS:
        raise NotCompilableError(
            f"aggregate over {len(atoms)} atoms exceeds the encoding cap {MAX_AGGREGATE_ATOMS}")
    clauses = []
    for bits in range(1 << len(atoms)):
        true = {a for k, a in enumerate(atoms) if bits >> k & 1}
        ok = True
        for agg in aggregates:
            tuples = {t for t, p, n in agg.elements
                      if all(i in true for i in p) and not any(i in true for i in n)}
            if not compare(len(tuples), agg.op, agg.guard):
                ok = False
                break
        if ok:
            clauses.append([-l for l in body] + [-var(a) if a in true else var(a) for a in atoms])
    return clauses


def to_cnf(gp: GroundProgram):
    """Completion of ``gp`` as a CNF whose models correspond one-to-one to its answer sets
    (auxiliary body variables are functionally determined). Returns ``(cnf, tiers)``.

    Aggregates are supported in constraints only; elsewhere they raise NotCompilableError,
    as do positive cycles and non-HCF disjunctions.
    """
    gp = lift_utilities(gp)
    for r in gp.rules:
        if r.aggregates and r.head:
            raise NotCompilableError(
                f"aggregate in the body of {gp.format_rule(r)}; only constraints may use them")
    check_tight(gp)

    def var(i: int) -> int:
        return i + 1

    n = len(gp.atoms)
    names = {var(i): str(a) for i, a in enumerate(gp.atoms)}
    tiers = {var(i): INNER for i in range(n)}
    for i, _ in gp.prob_facts:
        tiers[var(i)] = MIDDLE
    for i in gp.decisions:
        tiers[var(i)] = OUTER
    free = {i for i, _ in gp.prob_facts} | set(gp.decisions)

    by_head = {i: [] for i in range(n)}
    clauses = []
    for r in shift(gp):
        body = [var(i) for i in r.pos] + [-var(i) for i in r.neg]
        if r.head:
            by_head[r.head[0]].append(tuple(body))
        elif r.aggregates:
            clauses += _aggregate_clauses(body, r.aggregates, var)
        else:
            clauses.append([-l for l in body])

    definitions = {}
    next_var = n
    for i in range(n):
        if i in free:
            continue
        a = var(i)
        bodies = list(dict.fromkeys(by_head[i]))
        definitions[a] = tuple(bodies)
        if not bodies:
            clauses.append([-a])
            continue
        if any(not b for b in bodies):
            clauses.append([a])
            continue
        for b in bodies:
            clauses.append([-l for l in b] + [a])
        if len(bodies) == 1:
            clauses += [[-a, l] for l in bodies[0]]
            continue
        support = [-a]
        for b in bodies:
            if len(b) == 1:
                support.append(b[0])
                continue
            next_var += 1
            aux = next_var
            names[aux] = f"_body{aux}"
            tiers[aux] = INNER
            definitions[aux] = (b,)
            clauses += [[-aux, l] for l in b]
            clauses.append([aux] + [-l for l in b])
            support.append(aux)
        clauses.append(support)
    return make_cnf(clauses, next_var, names, definitions), tiers


def amc_instance(gp: GroundProgram, discard_inconsistent: bool = True) -> AmcInstance:
    """3AMC instance of a DT program: completion CNF plus w0/w1/w2 literal weights."""
    cnf, tiers = to_cnf(gp)
    tw = tier_weights(lift_utilities(gp))
    weights = {}
    for v in cnf.variables:
        atom = v - 1
        for positive in (True, False):
            lit = v if positive else -v
            weights[lit] = tw.weight(atom, positive) if atom < len(tw.program.atoms) else (0.0, 0.0)
    decisions = frozenset(str(gp.atoms[i]) for i in gp.decisions)
    return AmcInstance(cnf, tiers, weights, decisions, discard_inconsistent)


def dtproblog_instance(gp: GroundProgram) -> TwoAmcInstance:
    """Two-level reduction of the point-utility task: decisions are the outer variables
    (argmax semiring), everything else is summed in the gradient semiring.

    Inner weights: ``(p, 0)`` / ``(1 - p, 0)`` on fact literals, ``(1, r)`` on a true utility
    atom and ``(1, 0)`` on every other literal. Utilities on decisions are first moved to
    derived atoms, since outer literals carry no reward. Only meaningful when each world has
    exactly one answer set.
    """
    lifted = lift_utilities(gp)
    cnf, tiers = to_cnf(gp)
    probs = dict(lifted.prob_facts)
    rewards = dict(lifted.utilities)
    decisions = [str(gp.atoms[i]) for i in gp.decisions]
    inner, outer = {}, {}
    for v in cnf.variables:
        atom = v - 1
        if tiers[v] == OUTER:
            outer[v] = (0.0, frozenset((str(gp.atoms[atom]),)))
            outer[-v] = (0.0, frozenset())
        elif atom in probs:
            inner[v], inner[-v] = (probs[atom], 0.0), (1.0 - probs[atom], 0.0)
        else:
            inner[v] = (1.0, float(rewards.get(atom, 0.0)))
            inner[-v] = (1.0, 0.0)
    xo = frozenset(v for v in cnf.variables if tiers[v] == OUTER)
    return TwoAmcInstance(cnf, xo, GRADIENT_SEMIRING, argmax_semiring(decisions), inner, outer,
                          dtproblog_transform(decisions))


def _binary_equivalences(c: Cnf) -> dict:
    """var -> set of vars it is equivalent (or anti-equivalent) to via pairs of binary clauses."""
    binary = {tuple(sorted(cl)) for cl in c.clauses if len(cl) == 2}
    eq = {}
    for a, b in binary:
        if tuple(sorted((-a, -b))) in binary:
            eq.setdefault(abs(a), set()).add(abs(b))
            eq.setdefault(abs(b), set()).add(abs(a))
    return eq


def definable_syntactic(c: Cnf, x: Iterable[int]) -> set:
    """Sound under-approximation: closure of ``x`` under completion definitions, unit clauses and
    binary-clause equivalences."""
    defined = set(x)
    units = {abs(cl[0]) for cl in c.clauses if len(cl) == 1}
    defined |= units
    eq = _binary_equivalences(c)
    changed = True
    while changed:
        changed = False
        for v in c.variables:
            if v in defined:
                continue
            bodies = c.definitions.get(v)
            if bodies is not None and all(abs(l) in defined for b in bodies for l in b):
                defined.add(v)
                changed = True
            elif eq.get(v, set()) & defined:
                defined.add(v)
                changed = True
    return defined


def definable_semantic(c: Cnf, x: Iterable[int], cap: int = DEFAULT_DEFINABILITY_CAP) -> set:
    """Exact definability by enumerating every assignment of ``x``."""
    x = sorted(set(x))
    if len(x) > cap:
        raise ResourceLimitError(f"{len(x)} variables exceed the definability cap {cap}")
    rest = [v for v in c.variables if v not in x]
    undefined = set()
    for bits in range(1 << len(x)):
        fixed = {v: bool(bits >> k & 1) for k, v in enumerate(x)}
        seen = {}
        for m in iter_models(c, rest, fixed):
            for v in rest:
                if v in undefined:
                    continue
                if seen.setdefault(v, m[v]) != m[v]:
                    undefined.add(v)
            if len(undefined) == len(rest):
                break
    return set(x) | (set(rest) - undefined)


def definability(c: Cnf, x: Iterable[int], mode: str = "syntactic",
                 cap: int = DEFAULT_DEFINABILITY_CAP) -> set:
    """Variables defined by ``x`` with respect to ``c`` (``x`` itself included)."""
    if mode == "syntactic":
        return definable_syntactic(c, x)
    if mode == "semantic":
        return definable_semantic(c, x, cap)
    raise ValueError(f"unknown definability mode {mode!r}")


__all__ = ["lift_utilities", "dependency_graph", "check_tight", "shift", "to_cnf", "amc_instance",
           "dtproblog_instance",
           "definability", "definable_syntactic", "definable_semantic"]

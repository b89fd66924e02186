"""Top-down compilation of CNFs into tier-ordered decision-DNNF circuits and their 3AMC evaluation.

The compiler performs Shannon expansion with unit propagation, component splitting and caching.
Tiers are respected strictly: while variables of the highest tier present remain, only
components made purely of that tier are split off. Everything else stays grouped under one
child, and the next decision is taken on a highest-tier variable. Implied literals of lower
tiers are kept as unit clauses until their tier is reached (weight-neutral inner ones are
dropped). This gives the purity shape the evaluator relies on: every and-node has at most one
child mixing tiers across a boundary.
"""
from __future__ import annotations

import logging
from collections import deque
from dataclasses import dataclass, field
from typing import Iterable, Mapping, Optional

from .algebra import INNER, OUTER, TIER_RANK, AmcInstance
from .cnf import Cnf, _simplify
from .errors import DecompositionError

logger = logging.getLogger(__name__)

LIT, TRUE, FALSE, AND, OR = "L", "T", "F", "A", "O"


class PurityError(RuntimeError):
    """A circuit violates the tier-first shape; indicates a compiler bug."""


@dataclass
class Circuit:
    """Hash-consed DAG; ``nodes[i] = (kind, payload, children)``. Children precede parents."""
    nodes: list = field(default_factory=list)
    index: dict = field(default_factory=dict)
    root: int = -1
    tiers: Mapping = field(default_factory=dict)

    def add(self, kind, payload=None, children=()):
        key = (kind, payload, tuple(children))
        nid = self.index.get(key)
        if nid is None:
            nid = len(self.nodes)
            self.nodes.append(key)
            self.index[key] = nid
        return nid

    def true(self):
        return self.add(TRUE)

    def false(self):
        return self.add(FALSE)

    def lit(self, l: int):
        return self.add(LIT, l)

    def conj(self, children):
        kids = []
        for c in children:
            kind = self.nodes[c][0]
            if kind == FALSE:
                return self.false()
            if kind != TRUE:
                kids.append(c)
        if not kids:
            return self.true()
        if len(kids) == 1:
            return kids[0]
        return self.add(AND, None, kids)

    def decision(self, var: int, neg_child: int, pos_child: int):
        kids = [c for c in (neg_child, pos_child) if self.nodes[c][0] != FALSE]
        if not kids:
            return self.false()
        if len(kids) == 1:
            return kids[0]
        return self.add(OR, var, kids)

    def size(self) -> int:
        return len(self.nodes)

    def variables(self) -> list:
        """Variable set of every node (list of frozensets, aligned with ``nodes``)."""
        out = []
        for kind, payload, kids in self.nodes:
            if kind == LIT:
                out.append(frozenset((abs(payload),)))
            elif kind in (TRUE, FALSE):
                out.append(frozenset())
            else:
                s = frozenset().union(*(out[k] for k in kids))
                out.append(s | {payload} if kind == OR else s)
        return out

    def to_nnf(self) -> str:
        """Line-oriented dump: ``id L lit``, ``id T``, ``id F``, ``id A c..``, ``id O var c..``."""
        lines = []
        for i, (kind, payload, kids) in enumerate(self.nodes):
            parts = [str(i), kind]
            if kind == LIT or kind == OR:
                parts.append(str(payload))
            parts += [str(k) for k in kids]
            lines.append(" ".join(parts))
        lines.append(f"root {self.root}")
        return "\n".join(lines) + "\n"


def decision_order(td, num_vars: int) -> dict:
    """Rank of each variable: position of the first bag containing it, bags visited breadth-first
    from the decomposition root. Variables missing from ``td`` come last, by number."""
    rank = {}
    if td is not None and td.bags:
        root = td.root
        seen = {root}
        queue = deque([root])
        pos = 0
        while queue:
            t = queue.popleft()
            for v in sorted(td.bags[t]):
                if v not in rank:
                    rank[v] = pos
                    pos += 1
            for u in sorted(td.neighbors(t)):
                if u not in seen:
                    seen.add(u)
                    queue.append(u)
    base = len(rank)
    for v in range(1, num_vars + 1):
        rank.setdefault(v, base + v)
    return rank


class _Compiler:
    def __init__(self, cnf: Cnf, tiers: Mapping, rank: Mapping, eliminable: Iterable[int],
                 outer_priority: Optional[Mapping] = None):
        self.cnf = cnf
        self.outer_priority = dict(outer_priority or {})
        self.level = {v: TIER_RANK[tiers.get(v, INNER)] for v in cnf.variables}
        self.rank = rank
        self.eliminable = frozenset(eliminable)
        self.circuit = Circuit(tiers=dict(tiers))
        self.cache = {}
        self.body_cache = {}
        self.calls = 0

    def top(self, scope) -> int:
        return max((self.level[v] for v in scope), default=-1)

    def compile(self, clauses, scope):
        key = (frozenset(tuple(sorted(c)) for c in clauses), frozenset(scope))
        hit = self.cache.get(key)
        if hit is None:
            self.calls += 1
            hit = self.cache[key] = self._compile(list(key[0]), set(key[1]))
        return hit

    def _equivalences(self, clauses):
        """Yield (x, lit) pairs with x an eliminable variable equivalent to literal ``lit``:
        from binary clause pairs, and from two variables carrying the same definition
        ``x <-> l1 & ... & lk`` in the clause set."""
        binary = {tuple(sorted(c)) for c in clauses if len(c) == 2}
        for a, b in sorted(binary):
            if tuple(sorted((-a, -b))) in binary and abs(a) != abs(b):
                # (a or b) and (-a or -b): a <-> -b
                for x, y in ((a, b), (b, a)):
                    if abs(x) in self.eliminable:
                        yield abs(x), (-y if x > 0 else y)
                        return
        seen = {}
        for c in clauses:
            if len(c) < 3:
                continue
            for x in c:
                if x < 0 or x not in self.eliminable:
                    continue
                body = frozenset(-l for l in c if l != x)
                if all(tuple(sorted((-x, l))) in binary for l in body):
                    other = seen.setdefault(body, x)
                    if other != x:
                        yield max(x, other), min(x, other)
                        return

    def _substitute(self, clauses, assign, scope):
        """Eliminate neutral inner variables equivalent to another literal. Returns clauses or
        None on conflict; updates ``assign`` and ``scope`` in place."""
        while True:
            pick = next(self._equivalences(clauses), None)
            if pick is None:
                return clauses
            v, repl = pick
            new = []
            for c in clauses:
                if v in c or -v in c:
                    c = list(dict.fromkeys(repl if l == v else -repl if l == -v else l for l in c))
                    if any(-l in c for l in c):
                        continue  # tautology
                new.append(c)
            scope.discard(v)
            res = _simplify(new, assign)
            if res is None:
                return None
            clauses, newassign = res
            assign.clear()
            assign.update(newassign)

    def _compile(self, clauses, scope):
        c = self.circuit
        res = _simplify(clauses, {})
        if res is None:
            return c.false()
        rest, assign = res
        if self.eliminable:
            rest = self._substitute(rest, assign, scope)
            if rest is None:
                return c.false()
        level = self.top(scope)
        lits = []
        for v, val in sorted(assign.items()):
            if v not in scope:
                continue
            if self.level[v] == level:
                lits.append(c.lit(v if val else -v))
                scope.discard(v)
            elif v in self.eliminable:
                # forced and weight-neutral: contributes the inner one
                scope.discard(v)
            else:
                rest.append([v if val else -v])
        key = (frozenset(tuple(sorted(x)) for x in rest), frozenset(scope))
        body = self.body_cache.get(key)
        if body is None:
            body = self.body_cache[key] = self._split(rest, scope)
        return c.conj(lits + [body])

    def _components(self, clauses, scope):
        parent = {v: v for v in scope}

        def find(v):
            while parent[v] != v:
                parent[v] = parent[parent[v]]
                v = parent[v]
            return v

        for cl in clauses:
            first = find(abs(cl[0]))
            for l in cl[1:]:
                r = find(abs(l))
                if r != first:
                    parent[r] = first
        groups = {}
        for v in scope:
            groups.setdefault(find(v), ([], set()))[1].add(v)
        for cl in clauses:
            groups[find(abs(cl[0]))][0].append(cl)
        return sorted(groups.values(), key=lambda g: min(self.rank[v] for v in g[1]))

    def _split(self, clauses, scope):
        c = self.circuit
        if not scope:
            return c.true()
        level = self.top(scope)
        comps = self._components(clauses, scope)
        if level == TIER_RANK[INNER]:
            parts = comps
        else:
            parts, grouped_cl, grouped_sc = [], [], set()
            for cl, sc in comps:
                if all(self.level[v] == level for v in sc):
                    parts.append((cl, sc))
                else:
                    grouped_cl += cl
                    grouped_sc |= sc
            if grouped_sc:
                parts.append((grouped_cl, grouped_sc))
        if len(parts) > 1:
            return c.conj([self.compile(cl, sc) for cl, sc in parts])
        cl, sc = parts[0]
        if not cl:
            (v,) = sc  # a single unconstrained variable
            return c.decision(v, c.lit(-v), c.lit(v))
        if level == TIER_RANK[OUTER] and self.outer_priority:
            v = min((u for u in sc if self.level[u] == level),
                    key=lambda u: (self.outer_priority.get(u, 0), self.rank[u]))
        else:
            v = min((u for u in sc if self.level[u] == level), key=lambda u: self.rank[u])
        neg = self.compile(cl + [[-v]], sc)
        pos = self.compile(cl + [[v]], sc)
        return c.decision(v, neg, pos)


def compile_cnf(cnf: Cnf, td=None, tiers: Optional[Mapping] = None,
                eliminable: Iterable[int] = (), outer_priority: Optional[Mapping] = None
                ) -> Circuit:
    """Compile ``cnf`` into a tier-first decision-DNNF over all of its variables.

    ``outer_priority`` (var -> key, lower decided first) overrides the decomposition order for
    outer variables; deciding high strategy bits first makes the left-biased max prefer the
    smallest strategy mask on ties.

    ``eliminable`` lists inner variables whose literal weights are both the inner one; they may be
    removed by equivalence substitution (this changes plain model counts, not 3AMC values).
    """
    tiers = dict(tiers or {v: INNER for v in cnf.variables})
    if td is not None:
        extra = set().union(*td.bags.values()) - set(cnf.variables) if td.bags else set()
        if extra:
            raise DecompositionError(f"decomposition mentions unknown variables {sorted(extra)}")
    comp = _Compiler(cnf, tiers, decision_order(td, cnf.num_vars), eliminable, outer_priority)
    if cnf.is_trivially_false():
        comp.circuit.root = comp.circuit.false()
    else:
        clauses = [list(cl) for cl in cnf.clauses]
        comp.circuit.root = comp.compile(clauses, set(cnf.variables))
    logger.debug("compiled %d variables into %d nodes (%d expansions)", cnf.num_vars,
                 comp.circuit.size(), comp.calls)
    return comp.circuit


def count_models(circuit: Circuit, num_vars: int) -> int:
    """Model count over variables ``1..num_vars`` (smoothing on the fly)."""
    vs = circuit.variables()
    counts = []
    for i, (kind, payload, kids) in enumerate(circuit.nodes):
        if kind == LIT or kind == TRUE:
            counts.append(1)
        elif kind == FALSE:
            counts.append(0)
        elif kind == AND:
            n = 1
            for k in kids:
                n *= counts[k]
            counts.append(n)
        else:
            counts.append(sum(counts[k] << len(vs[i] - vs[k]) for k in kids))
    return counts[circuit.root] << (num_vars - len(vs[circuit.root]))


def _node_levels(circuit: Circuit, tiers: Mapping) -> list:
    levels = []
    for kind, payload, kids in circuit.nodes:
        if kind == LIT:
            levels.append(TIER_RANK[tiers[abs(payload)]])
        elif kind in (TRUE, FALSE):
            levels.append(0)
        else:
            lv = max(levels[k] for k in kids)
            if kind == OR:
                lv = max(lv, TIER_RANK[tiers[payload]])
            levels.append(lv)
    return levels


def _lift(inst: AmcInstance, value, src: int, dst: int):
    if src == 0 and dst > 0:
        value, src = inst.f_im(value), 1
    if src == 1 and dst > 1:
        value = inst.f_mo(value)
    return value


def eval_circuit_3amc(circuit: Circuit, inst: AmcInstance):
    """Bottom-up 3AMC evaluation; returns an outer value."""
    sr = (inst.inner, inst.middle, inst.outer)
    levels = _node_levels(circuit, inst.tiers)
    vals = []
    for i, (kind, payload, kids) in enumerate(circuit.nodes):
        if kind == LIT:
            vals.append(inst.weights[payload])
        elif kind == TRUE:
            vals.append(inst.inner.one)
        elif kind == FALSE:
            vals.append(inst.inner.zero)
        elif kind == OR:
            lv = levels[i]
            acc = sr[lv].zero
            for k in kids:
                acc = sr[lv].plus(acc, _lift(inst, vals[k], levels[k], lv))
            vals.append(acc)
        else:
            acc = [sr[0].one, sr[1].one, sr[2].one]
            for k in kids:
                acc[levels[k]] = sr[levels[k]].times(acc[levels[k]], vals[k])
            lv = levels[i]
            v = acc[0]
            for t in range(1, lv + 1):
                v = sr[t].times(_lift(inst, v, t - 1, t), acc[t])
            vals.append(v)
    return _lift(inst, vals[circuit.root], levels[circuit.root], 2)


@dataclass(frozen=True)
class AuditReport:
    nodes: int
    and_nodes: int
    or_nodes: int


def audit(circuit: Circuit, tiers: Mapping) -> AuditReport:
    """Check decomposability, decision determinism and the tier-first shape of every and-node.

    For each tier boundary (outer | rest and outer+middle | inner), an and-node may have at most
    one child mixing both sides, and then every sibling must lie entirely above the boundary.
    """
    vs = circuit.variables()
    lv = {v: TIER_RANK[t] for v, t in tiers.items()}
    n_and = n_or = 0
    for i, (kind, payload, kids) in enumerate(circuit.nodes):
        if kind == AND:
            n_and += 1
            seen = set()
            for k in kids:
                if seen & vs[k]:
                    raise PurityError(f"and-node {i} is not decomposable")
                seen |= vs[k]
            for boundary in (2, 1):
                def above(s):
                    return all(lv[v] >= boundary for v in s)

                def below(s):
                    return all(lv[v] < boundary for v in s)

                mixed = [k for k in kids if not (above(vs[k]) or below(vs[k]))]
                if len(mixed) > 1:
                    raise PurityError(f"and-node {i} has {len(mixed)} mixed children")
                if mixed and not all(above(vs[k]) for k in kids if k != mixed[0]):
                    raise PurityError(f"and-node {i} mixes a lower-tier sibling with a mixed child")
        elif kind == OR:
            n_or += 1
            if len(kids) != 2:
                raise PurityError(f"decision node {i} must have two children")
            signs = [_decided_sign(circuit, k, payload) for k in kids]
            if sorted(signs) != [-1, 1]:
                raise PurityError(f"decision node {i} is not deterministic on variable {payload}")
    return AuditReport(len(circuit.nodes), n_and, n_or)


def _decided_sign(circuit: Circuit, node: int, var: int) -> int:
    kind, payload, kids = circuit.nodes[node]
    if kind == LIT and abs(payload) == var:
        return 1 if payload > 0 else -1
    if kind == AND:
        for k in kids:
            k_kind, k_payload, _ = circuit.nodes[k]
            if k_kind == LIT and abs(k_payload) == var:
                return 1 if k_payload > 0 else -1
    return 0


__all__ = ["Circuit", "compile_cnf", "count_models", "eval_circuit_3amc", "audit",
           "decision_order", "PurityError", "AuditReport"]

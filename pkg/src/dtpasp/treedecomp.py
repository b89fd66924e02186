"""Primal graphs, vertex separators, tree decompositions and tier-ordered decompositions."""
from __future__ import annotations

import itertools
from dataclasses import dataclass, field
from typing import Iterable, Optional

import networkx as nx
from networkx.algorithms.approximation import treewidth_min_fill_in

from .cnf import Cnf
from .completion import definability as _definability
from .errors import DecompositionError


def primal_graph(c: Cnf, include_all: bool = False) -> nx.Graph:
    """One vertex per variable occurring in ``c`` (every declared variable if ``include_all``),
    an edge for each pair of variables sharing a clause."""
    g = nx.Graph()
    if include_all:
        g.add_nodes_from(c.variables)
    for cl in c.clauses:
        vs = sorted({abs(l) for l in cl})
        g.add_nodes_from(vs)
        g.add_edges_from(itertools.combinations(vs, 2))
    return _sorted_graph(g)


def _sorted_graph(g: nx.Graph) -> nx.Graph:
    """Copy of ``g`` with vertices and edges inserted in sorted order (deterministic iteration)."""
    h = nx.Graph()
    h.add_nodes_from(sorted(g.nodes, key=_key))
    h.add_edges_from(sorted((tuple(sorted(e, key=_key)) for e in g.edges), key=lambda e: (
        _key(e[0]), _key(e[1]))))
    return h


def _key(v):
    return (0, v, "") if isinstance(v, int) else (1, 0, str(v))


@dataclass
class TreeDecomposition:
    bags: dict                     # tree node -> frozenset of graph vertices
    edges: list                    # tree edges (pairs of tree nodes)
    root: int = 0
    info: dict = field(default_factory=dict)

    @property
    def width(self) -> int:
        return max((len(b) for b in self.bags.values()), default=0) - 1

    def tree(self) -> nx.Graph:
        t = nx.Graph()
        t.add_nodes_from(self.bags)
        t.add_edges_from(self.edges)
        return t

    def neighbors(self, node) -> list:
        return [b if a == node else a for a, b in self.edges if node in (a, b)]

    def validate(self, g: nx.Graph) -> None:
        """Raise DecompositionError unless the three decomposition conditions hold for ``g``."""
        t = self.tree()
        if self.bags and not nx.is_tree(t):
            raise DecompositionError("decomposition is not a tree")
        covered = set().union(*self.bags.values()) if self.bags else set()
        missing = set(g.nodes) - covered
        if missing:
            raise DecompositionError(f"vertices not covered: {sorted(missing, key=_key)}")
        for u, v in g.edges:
            if not any(u in b and v in b for b in self.bags.values()):
                raise DecompositionError(f"edge {{{u}, {v}}} not covered")
        for v in covered:
            occ = [n for n, b in self.bags.items() if v in b]
            if not nx.is_connected(t.subgraph(occ)):
                raise DecompositionError(f"bags containing {v} are not connected")

    def is_valid(self, g: nx.Graph) -> bool:
        try:
            self.validate(g)
        except DecompositionError:
            return False
        return True

    def to_td(self, num_vertices: Optional[int] = None) -> str:
        """The ``.td`` text format; vertices must be positive ints."""
        ids = {n: k + 1 for k, n in enumerate(sorted(self.bags))}
        nv = num_vertices if num_vertices is not None else max(
            (max(b) for b in self.bags.values() if b), default=0)
        lines = [f"s td {len(self.bags)} {self.width + 1} {nv}"]
        for n in sorted(self.bags):
            lines.append(" ".join(["b", str(ids[n])] + [str(v) for v in sorted(self.bags[n])]))
        for a, b in self.edges:
            lines.append(f"{ids[a]} {ids[b]}")
        return "\n".join(lines) + "\n"


def read_td(text: str) -> TreeDecomposition:
    bags, edges = {}, []
    for line in text.splitlines():
        parts = line.split()
        if not parts or parts[0] in ("c", "s"):
            continue
        if parts[0] == "b":
            bags[int(parts[1])] = frozenset(int(v) for v in parts[2:])
        else:
            edges.append((int(parts[0]), int(parts[1])))
    return TreeDecomposition(bags, edges, root=min(bags, default=0))


def _contract(bags: dict, edges: list, protect=()) -> tuple:
    """Merge every bag that is a subset of an adjacent bag into that neighbour. Bags equal to a
    set in ``protect`` survive unless the neighbour is identical."""
    protect = {frozenset(x) for x in protect if x}
    bags = dict(bags)
    edges = [tuple(e) for e in edges]
    changed = True
    while changed:
        changed = False
        for a, b in list(edges):
            for small, big in ((a, b), (b, a)):
                if bags[small] <= bags[big] and (
                        bags[small] not in protect or bags[small] == bags[big]):
                    edges.remove((a, b))
                    edges = [(big if x == small else x, big if y == small else y) for x, y in edges]
                    del bags[small]
                    changed = True
                    break
            if changed:
                break
    return bags, edges


def tree_decomposition(g: nx.Graph) -> TreeDecomposition:
    """Min-fill heuristic decomposition, bags contracted, always a single tree."""
    g = _sorted_graph(g)
    if g.number_of_nodes() == 0:
        return TreeDecomposition({0: frozenset()}, [])
    _, t = treewidth_min_fill_in(g)
    order = sorted(t.nodes, key=lambda b: sorted(map(_key, b)))
    ids = {b: k for k, b in enumerate(order)}
    bags = {ids[b]: frozenset(b) for b in order}
    edges = sorted(tuple(sorted((ids[a], ids[b]))) for a, b in t.edges)
    forest = nx.Graph()
    forest.add_nodes_from(bags)
    forest.add_edges_from(edges)
    comps = sorted((min(c) for c in nx.connected_components(forest)))
    edges += [(comps[0], c) for c in comps[1:]]
    bags, edges = _contract(bags, edges)
    return _renumber(bags, edges)


def _renumber(bags: dict, edges: list, root=None) -> TreeDecomposition:
    ids = {n: k for k, n in enumerate(sorted(bags))}
    return TreeDecomposition({ids[n]: b for n, b in bags.items()},
                             sorted(tuple(sorted((ids[a], ids[b]))) for a, b in edges),
                             root=ids[root] if root is not None else 0)


def minimum_separator(g: nx.Graph, v: Iterable, w: Iterable) -> frozenset:
    """Smallest S drawn from ``v`` | ``w`` such that in ``g - S`` no vertex of ``w`` reaches a
    vertex outside ``v`` | ``w``. Computed as a minimum cut in the vertex-split flow network
    (unit capacity on candidate vertices, infinite elsewhere)."""
    w = set(w) & set(g.nodes)
    allowed = (set(v) | w) & set(g.nodes)
    targets = set(g.nodes) - allowed
    if not w or not targets:
        return frozenset()
    f = nx.DiGraph()
    f.add_node("_s")
    f.add_node("_t")
    for x in sorted(g.nodes, key=_key):
        if x in allowed:
            f.add_edge(("in", x), ("out", x), capacity=1)
        else:
            f.add_edge(("in", x), ("out", x))
    for a, b in sorted(g.edges, key=lambda e: (_key(e[0]), _key(e[1]))):
        f.add_edge(("out", a), ("in", b))
        f.add_edge(("out", b), ("in", a))
    for x in sorted(w, key=_key):
        f.add_edge("_s", ("in", x))
    for x in sorted(targets, key=_key):
        f.add_edge(("out", x), "_t")
    _, (source_side, _) = nx.minimum_cut(f, "_s", "_t")
    return frozenset(x for x in allowed
                     if ("in", x) in source_side and ("out", x) not in source_side)


def separates(g: nx.Graph, s: Iterable, w: Iterable, allowed: Iterable) -> bool:
    """True iff removing ``s`` leaves no path from ``w`` to a vertex outside ``allowed``."""
    s = set(s)
    h = g.subgraph(set(g.nodes) - s)
    outside = set(g.nodes) - set(allowed) - s
    for comp in nx.connected_components(h):
        if comp & set(w) and comp & outside:
            return False
    return True


def _clique(vertices) -> list:
    return list(itertools.combinations(sorted(vertices, key=_key), 2))


def _graph_on(g: nx.Graph, vertices, cliques=()) -> nx.Graph:
    h = nx.Graph(g.subgraph(vertices))
    for cl in cliques:
        h.add_nodes_from(cl)
        h.add_edges_from(_clique(cl))
    return _sorted_graph(h)


def _components_touching(g: nx.Graph, x) -> set:
    out = set()
    for comp in nx.connected_components(g):
        if comp & x:
            out |= comp
    return out


def _touching(g: nx.Graph, candidates, part) -> set:
    return {v for v in candidates if any(u in part for u in g.neighbors(v))}


def _attach(bags: dict, edges: list, part: TreeDecomposition, prefer) -> None:
    """Add ``part`` to the tree, linking the pair of bags with the largest overlap (bags holding
    ``prefer`` first)."""
    offset = max(bags) + 1 if bags else 0
    new = {offset + n: b for n, b in part.bags.items()}
    if not bags:
        bags.update(new)
        edges += [(offset + a, offset + b) for a, b in part.edges]
        return
    prefer = frozenset(prefer)
    best = max(((a, b) for a in sorted(bags) for b in sorted(new)),
                key=lambda ab: (prefer <= bags[ab[0]] and prefer <= new[ab[1]],
                                len(bags[ab[0]] & new[ab[1]]), -ab[0], -ab[1]))
    bags.update(new)
    edges += [(offset + a, offset + b) for a, b in part.edges]
    edges.append(best)


def _repair(bags: dict, edges: list) -> None:
    """Restore the connected-occurrence condition by adding vertices along tree paths."""
    t = nx.Graph()
    t.add_nodes_from(bags)
    t.add_edges_from(edges)
    for v in sorted(set().union(*bags.values()), key=_key):
        occ = [n for n in bags if v in bags[n]]
        if nx.is_connected(t.subgraph(occ)):
            continue
        span = set(occ)
        for a in occ[1:]:
            span |= set(nx.shortest_path(t, occ[0], a))
        for n in span:
            bags[n] = bags[n] | {v}


@dataclass(frozen=True)
class TierWitness:
    outer_bag: Optional[int]
    middle_bag: Optional[int]


def find_tier_witnesses(td: TreeDecomposition, g: nx.Graph, xo, xm, d_o, d_om) -> TierWitness:
    """Bags satisfying the outer/middle containment and separation conditions, or raise.

    ``d_o`` and ``d_om`` are the variables defined by X_O and by X_O | X_M (sets including the
    defining variables themselves)."""
    xo, xm = set(xo), set(xm)
    allowed_o = xo | set(d_o)
    allowed_m = xo | xm | set(d_om)
    t_o = t_m = None
    # outer variables and everything they define are fixed when the middle tier is compiled,
    # so middle paths are taken in the graph without them
    decided = xo | set(d_o)
    g_rest = g.subgraph(set(g.nodes) - decided)
    for n in sorted(td.bags):
        b = td.bags[n]
        if t_o is None and b <= allowed_o and separates(g, b, xo, allowed_o):
            t_o = n
        if t_m is None and b <= allowed_m and separates(g_rest, b - decided, xm - decided, allowed_m - decided):
            t_m = n
    # an empty tier makes its condition vacuous
    if (t_o is None and xo) or (t_m is None and xm):
        raise DecompositionError(
            f"no bag witnesses the {'outer' if t_o is None else 'middle'} tier condition")
    return TierWitness(t_o, t_m)


def amc3_decomposition(c: Cnf, xo: Iterable[int], xm: Iterable[int], xi: Iterable[int],
                       definability: Optional[str] = "syntactic") -> TreeDecomposition:
    """Decomposition of the primal graph of ``c`` honouring the outer > middle > inner order.

    ``definability`` is ``"syntactic"``, ``"semantic"`` or None (no defined variables). The
    result's ``info`` holds the separators, the witness bags and the defined-variable sets.
    """
    xo, xm, xi = set(xo), set(xm), set(xi)
    if (xo & xm) or (xo & xi) or (xm & xi) or (xo | xm | xi) != set(c.variables):
        raise ValueError("tiers must partition the CNF variables")
    g = primal_graph(c, include_all=True)
    if definability is None:
        d_o, d_om = set(xo), xo | xm
    else:
        d_o = _definability(c, xo, definability)
        d_om = _definability(c, xo | xm, definability)

    s_o = minimum_separator(g, d_o, xo)
    g_w = g.subgraph(set(g.nodes) - s_o)
    v_o = _components_touching(g_w, xo)
    g_o = _graph_on(g, v_o | s_o, [s_o])
    td_o = tree_decomposition(g_o) if v_o | s_o else None

    g_w = g_w.subgraph(set(g_w.nodes) - v_o)
    s_m = minimum_separator(g_w, d_om, xm - v_o - s_o)
    g_w = g_w.subgraph(set(g_w.nodes) - s_m)
    v_m = _components_touching(g_w, xm)
    # separator vertices without an edge into a part are covered elsewhere; dropping them
    # keeps the cliques from spreading into parts that do not need them
    keep_o = _touching(g, s_o, v_m | s_m)
    verts_m = v_m | s_m | keep_o
    g_m = _graph_on(g, verts_m, [keep_o, s_m])
    td_m = tree_decomposition(g_m) if verts_m else None

    rest = set(g.nodes) - v_o - v_m - s_o - s_m
    verts_i = rest | _touching(g, s_o | s_m, rest)
    g_i = _graph_on(g, verts_i, [s_o & verts_i, s_m & verts_i])
    td_i = tree_decomposition(g_i) if verts_i else None

    bags, edges = {}, []
    for part, prefer in ((td_o, s_o), (td_m, s_o), (td_i, s_m)):
        if part is not None and any(part.bags.values()):
            _attach(bags, edges, part, prefer)
    if not bags:
        bags = {0: frozenset()}
    _repair(bags, edges)
    bags, edges = _contract(bags, edges, protect=(s_o, s_m))
    for sep, tier in ((s_o, xo), (s_m, xm)):
        # a bag holding exactly the separator serves as the tier witness; an empty separator
        # (tier plus defined variables cover everything) gets an empty leaf bag
        if tier and frozenset(sep) not in bags.values():
            host = min((n for n, b in bags.items() if sep <= b), default=None)
            if host is not None:
                leaf = max(bags) + 1
                bags[leaf] = frozenset(sep)
                edges.append((host, leaf))
    td = _renumber(bags, edges)
    td.validate(g)
    td.info.update(separator_outer=frozenset(s_o), separator_middle=frozenset(s_m),
                   defined_outer=frozenset(d_o), defined_outer_middle=frozenset(d_om))
    w = find_tier_witnesses(td, g, xo, xm, d_o, d_om)
    td.info.update(witness_outer=w.outer_bag, witness_middle=w.middle_bag)
    return td


__all__ = ["primal_graph", "TreeDecomposition", "read_td", "tree_decomposition",
           "minimum_separator", "separates", "amc3_decomposition", "find_tier_witnesses",
           "TierWitness"]

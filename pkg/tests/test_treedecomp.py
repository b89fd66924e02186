import itertools

import networkx as nx
import pytest
from hypothesis import given, settings, strategies as st

from dtpasp.algebra import INNER, MIDDLE, OUTER
from dtpasp.cnf import read_dimacs
from dtpasp.completion import to_cnf
from dtpasp.errors import DecompositionError
from dtpasp.lang import ground
from dtpasp.randprog import random_program
from dtpasp.treedecomp import (TreeDecomposition, amc3_decomposition, minimum_separator,
                               primal_graph, read_td, separates, tree_decomposition)

OUTER_VARS, MIDDLE_VARS, INNER_VARS = {1, 2, 3, 4}, {5, 6, 7}, {8, 9}


@pytest.fixture
def crun(data_dir):
    return read_dimacs((data_dir / "crun.cnf").read_text())


def _names(c, vs):
    return {c.names[v] for v in vs}


@pytest.mark.parametrize("mode", ["syntactic", "semantic"])
def test_running_cnf_with_definability(crun, mode):
    td = amc3_decomposition(crun, OUTER_VARS, MIDDLE_VARS, INNER_VARS, definability=mode)
    assert td.width == 2
    assert _names(crun, td.info["separator_outer"]) == {"x1"}
    assert _names(crun, td.info["separator_middle"]) == {"x2", "x3"}
    assert td.is_valid(primal_graph(crun, include_all=True))
    assert td.info["witness_outer"] is not None and td.info["witness_middle"] is not None


def test_running_cnf_without_definability(crun):
    td = amc3_decomposition(crun, OUTER_VARS, MIDDLE_VARS, INNER_VARS, definability=None)
    assert td.width == 4
    assert td.info["separator_outer"] == OUTER_VARS


def test_plain_decomposition_is_smaller(crun):
    g = primal_graph(crun)
    td = tree_decomposition(g)
    td.validate(g)
    assert td.width <= 2


def test_tiers_must_partition(crun):
    with pytest.raises(ValueError):
        amc3_decomposition(crun, {1, 2}, MIDDLE_VARS, INNER_VARS)


def test_validate_reports_uncovered_edge():
    g = nx.Graph([(1, 2), (2, 3)])
    td = TreeDecomposition({0: frozenset({1, 2}), 1: frozenset({3})}, [(0, 1)])
    with pytest.raises(DecompositionError):
        td.validate(g)


def test_validate_reports_disconnected_occurrences():
    g = nx.Graph([(1, 2)])
    td = TreeDecomposition({0: frozenset({1, 2}), 1: frozenset({3}), 2: frozenset({1})},
                           [(0, 1), (1, 2)])
    with pytest.raises(DecompositionError):
        td.validate(g)


def test_td_text_round_trip(crun):
    td = amc3_decomposition(crun, OUTER_VARS, MIDDLE_VARS, INNER_VARS)
    back = read_td(td.to_td(crun.num_vars))
    assert sorted(back.bags.values(), key=sorted) == sorted(td.bags.values(), key=sorted)
    assert len(back.edges) == len(td.edges)
    assert back.width == td.width
    assert td.to_td(crun.num_vars).startswith(f"s td {len(td.bags)} {td.width + 1} 9")


# ------------------------------------------------------------------ properties

@st.composite
def graphs(draw, max_nodes=9):
    n = draw(st.integers(1, max_nodes))
    pairs = list(itertools.combinations(range(1, n + 1), 2))
    g = nx.Graph()
    g.add_nodes_from(range(1, n + 1))
    g.add_edges_from(draw(st.lists(st.sampled_from(pairs), max_size=2 * n)) if pairs else [])
    return g


@settings(max_examples=150)
@given(graphs())
def test_decomposition_is_valid(g):
    tree_decomposition(g).validate(g)


@settings(max_examples=150)
@given(graphs(max_nodes=7), st.data())
def test_separator_is_minimum(g, data):
    nodes = sorted(g.nodes)
    w = set(data.draw(st.lists(st.sampled_from(nodes), min_size=1, max_size=3)))
    v = set(data.draw(st.lists(st.sampled_from(nodes), max_size=3)))
    allowed = v | w
    s = minimum_separator(g, v, w)
    assert s <= allowed
    assert separates(g, s, w, allowed)
    smaller = any(separates(g, cand, w, allowed)
                  for k in range(len(s))
                  for cand in itertools.combinations(sorted(allowed), k))
    assert not smaller


@settings(max_examples=60)
@given(st.integers(0, 10_000), st.sampled_from(["syntactic", "semantic", None]))
def test_tiered_decomposition_of_random_programs(seed, mode):
    cnf, tiers = to_cnf(ground(random_program(seed)))
    parts = {t: {v for v in cnf.variables if tiers[v] == t} for t in (OUTER, MIDDLE, INNER)}
    if mode == "semantic" and len(parts[OUTER] | parts[MIDDLE]) > 12:
        return
    td = amc3_decomposition(cnf, parts[OUTER], parts[MIDDLE], parts[INNER], definability=mode)
    td.validate(primal_graph(cnf, include_all=True))

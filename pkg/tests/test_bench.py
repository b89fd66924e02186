import csv
import io
import time

import pytest
from hypothesis import given, settings, strategies as st

from dtpasp.bench import (CSV_COLUMNS, PROB_LATTICE, BenchResult, BenchSpec, BenchTimeout,
                          generate, generate_text, run, time_limit, write_csv)
from dtpasp.credal import world_answer_sets
from dtpasp.dtsolve import solve
from dtpasp.errors import ResourceLimitError
from dtpasp.lang import ground

TOL = 1e-9


def test_t1_listing():
    p = generate(BenchSpec("t1", 2, 4))
    gp = ground(p)
    assert sorted(str(gp.atoms[i]) for i, _ in gp.prob_facts) == ["a(0)", "a(1)"]
    assert sorted(str(gp.atoms[i]) for i in gp.decisions) == [f"da({i})" for i in range(4)]
    assert sorted((str(gp.atoms[i]), r) for i, r in gp.utilities) == [("nqr", -12), ("qr", 2)]
    text = generate_text(BenchSpec("t1", 2, 4))
    rule_lines = [l for l in text.splitlines() if ":-" in l]
    assert rule_lines == ["qr:- a(0), da(0).", "qr:- a(0), da(2).",
                          "qr:- a(1), da(1), \\+ nqr.", "nqr:- a(1), da(1), \\+ qr.",
                          "qr:- a(1), da(3), \\+ nqr.", "nqr:- a(1), da(3), \\+ qr."]


def test_t2_swaps_roles():
    text = generate_text(BenchSpec("t2", 4, 2))
    assert "qr:- a(2), da(0)." in text
    assert "nqr:- a(3), da(1), \\+ qr." in text


def test_t5_three_conjunction_rules():
    text = generate_text(BenchSpec.sized("t5", 4))
    lines = text.splitlines()
    assert sum(l.startswith(("qr:-", "nqr:-")) for l in lines) == 3
    assert sum(l.count(":- da(") for l in lines) == 4


def test_t4_rewards_only_on_qr_and_nqr():
    gp = ground(generate(BenchSpec.sized("t4", 3)))
    assert sorted(str(gp.atoms[i]) for i, _ in gp.utilities) == ["nqr", "qr"]


def test_t6_shape():
    gp = ground(generate(BenchSpec.sized("t6", 10)))
    assert len(gp.prob_facts) == 10 and len(gp.decisions) == 10
    assert sum(1 for r in gp.rules if len(r.head) == 2) == 10
    names = [str(gp.atoms[i]) for i, _ in gp.utilities]
    assert sum(n.startswith("target(") for n in names) == 10
    assert sum(n.startswith("rb(") for n in names) == 20


def test_probabilities_on_lattice():
    gp = ground(generate(BenchSpec("t1", 8, 1, seed=3)))
    assert all(p in PROB_LATTICE for _, p in gp.prob_facts)


@pytest.mark.parametrize("args", [("t9", 1, 1), ("t1", 0, 3), ("t2", 3, 0), ("t3", 2, 3),
                                  ("t1", -1, 2), ("t6", 51, 51)])
def test_invalid_specs(args):
    with pytest.raises(ValueError):
        BenchSpec(*args)


@settings(max_examples=60)
@given(st.sampled_from(["t1", "t2", "t3", "t4", "t5", "t6"]), st.integers(1, 6),
       st.integers(0, 1000))
def test_generation_is_deterministic(suite, size, seed):
    spec = BenchSpec(suite, size, size, seed)
    assert generate_text(spec) == generate_text(BenchSpec(suite, size, size, seed))


@pytest.mark.parametrize("spec", [BenchSpec("t1", 2, 3), BenchSpec("t2", 3, 2),
                                  BenchSpec.sized("t3", 3), BenchSpec.sized("t4", 3),
                                  BenchSpec.sized("t5", 3)])
def test_every_world_consistent_under_every_strategy(spec):
    gp = ground(generate(spec))
    for sigma in range(1 << len(gp.decisions)):
        chosen = [i for k, i in enumerate(gp.decisions) if sigma >> k & 1]
        assert all(len(coll) > 0 for _, coll in world_answer_sets(gp, chosen))


@pytest.mark.parametrize("spec", [BenchSpec("t1", 2, 2), BenchSpec.sized("t3", 2)])
def test_methods_agree(spec):
    a, b = run(spec, "enum").report, run(spec, "amc3").report
    for x, y in ((a.best_lower, b.best_lower), (a.best_upper, b.best_upper)):
        assert x[1] == pytest.approx(y[1], abs=TOL)
        assert x[0] == y[0]


def test_enumeration_cap_on_large_instance():
    with pytest.raises(ResourceLimitError):
        run(BenchSpec("t1", 2, 30), "enum")


def test_failed_run_recorded_when_not_raising():
    res = run(BenchSpec("t1", 2, 30), "enum", raise_errors=False)
    assert res.report is None and "ResourceLimitError" in res.error


def test_csv_rows():
    results = [run(BenchSpec("t1", 2, 2), m) for m in ("enum", "amc3")]
    buf = io.StringIO()
    assert write_csv(results, buf) == 2
    rows = list(csv.reader(io.StringIO(buf.getvalue())))
    assert tuple(rows[0]) == CSV_COLUMNS
    assert len(rows) == 3
    for row in rows[1:]:
        d = dict(zip(CSV_COLUMNS, row))
        assert d["suite"] == "t1" and d["n"] == "2" and d["d"] == "2"
        assert float(d["wall_time_seconds"]) >= 0
        assert d["lower_strategy"].startswith("{")


def test_csv_quotes_strategies_with_commas(example):
    res = BenchResult(BenchSpec("t1", 2, 2), "enum", 0.0, solve(example("ex5")))
    buf = io.StringIO()
    write_csv([res], buf)
    assert '"{da,db}"' in buf.getvalue()
    rows = list(csv.reader(io.StringIO(buf.getvalue())))
    assert rows[1][CSV_COLUMNS.index("upper_strategy")] == "{da,db}"


def test_time_limit():
    with pytest.raises(BenchTimeout):
        with time_limit(0.05):
            time.sleep(1)
    with time_limit(None):
        pass

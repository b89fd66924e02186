"""Seeded generators for the synthetic suites t1-t6 and a timing harness writing CSV rows."""
from __future__ import annotations

import csv
import logging
import random
import signal
import time
from contextlib import contextmanager
from dataclasses import dataclass
from typing import Iterable, Optional

from .dtsolve import UtilityReport
from .errors import DtpaspError, ResourceLimitError
from .lang import Program, parse

logger = logging.getLogger(__name__)

SUITES = ("t1", "t2", "t3", "t4", "t5", "t6")
PROB_LATTICE = tuple(round(0.05 * k, 2) for k in range(1, 20))
N_PRODUCTS = 100
CSV_COLUMNS = ("suite", "n", "d", "method", "seed", "wall_time_seconds", "lower_value",
               "upper_value", "lower_strategy", "upper_strategy")


@dataclass(frozen=True)
class BenchSpec:
    """``t1``/``t2`` take n and d independently; t3-t6 use a single size (n == d)."""
    suite: str
    n_prob_facts: int
    n_decisions: int
    seed: int = 0

    def __post_init__(self):
        if self.suite not in SUITES:
            raise ValueError(f"unknown suite {self.suite!r}; expected one of {SUITES}")
        if self.n_prob_facts < 0 or self.n_decisions < 0:
            raise ValueError("sizes must be non-negative")
        if self.suite == "t1" and self.n_prob_facts == 0 and self.n_decisions > 0:
            raise ValueError("t1 needs at least one probabilistic fact (j = i % n)")
        if self.suite == "t2" and self.n_decisions == 0 and self.n_prob_facts > 0:
            raise ValueError("t2 needs at least one decision atom (j = i % d)")
        if self.suite in ("t3", "t4", "t5", "t6") and self.n_prob_facts != self.n_decisions:
            raise ValueError(f"{self.suite} has a single size parameter (n must equal d)")
        if self.suite == "t6" and 2 * self.n_prob_facts > N_PRODUCTS:
            raise ValueError(f"t6 draws two distinct products per person from {N_PRODUCTS}")

    @classmethod
    def sized(cls, suite: str, size: int, seed: int = 0) -> "BenchSpec":
        return cls(suite, size, size, seed)


def _num(x) -> str:
    return str(int(x)) if float(x).is_integer() else repr(float(x))


def _pair_rules(pairs, neg: str) -> list:
    """Even index -> one qr rule; odd -> the qr/nqr pair. Evens are listed first."""
    even = [f"qr:- {a}, {d}." for i, a, d in pairs if i % 2 == 0]
    odd = []
    for i, a, d in pairs:
        if i % 2 == 1:
            odd.append(f"qr:- {a}, {d}, {neg} nqr.")
            odd.append(f"nqr:- {a}, {d}, {neg} qr.")
    return even + odd


def generate_text(spec: BenchSpec, negation: str = "\\+") -> str:
    """Program text for ``spec``; identical for identical (spec, negation)."""
    rng = random.Random(spec.seed)
    n, d = spec.n_prob_facts, spec.n_decisions
    lines = []
    if spec.suite == "t6":
        return _t6(spec, rng)
    probs = [rng.choice(PROB_LATTICE) for _ in range(n)]
    lines.append(" ".join(f"{_num(p)}::a({i})." for i, p in enumerate(probs)))
    lines.append(" ".join(f"decision da({i})." for i in range(d)))
    lines.append("utility(qr,2). utility(nqr,-12).")
    if spec.suite == "t1":
        pairs = [(i, f"a({i % n})", f"da({i})") for i in range(d)]
    elif spec.suite == "t2":
        pairs = [(i, f"a({i})", f"da({i % d})") for i in range(n)]
    else:
        pairs = [(i, f"a({i})", f"da({i})") for i in range(n)]
    if spec.suite in ("t3", "t5"):
        rewards = [rng.randint(-10, 10) for _ in range(d)]
        lines.append(" ".join(f"utility(rda({i}),{r})." for i, r in enumerate(rewards)))
    if spec.suite in ("t3", "t4", "t5"):
        lines.append(" ".join(f"rda({i}) :- da({i})." for i in range(d)))
    if spec.suite == "t5":
        even = ", ".join(f"a({i}), da({i})" for i in range(n) if i % 2 == 0)
        odd = ", ".join(f"a({i}), da({i})" for i in range(n) if i % 2 == 1)
        if even:
            lines.append(f"qr:- {even}.")
        if odd:
            lines.append(f"qr:- {odd}, {negation} nqr.")
            lines.append(f"nqr:- {odd}, {negation} qr.")
    else:
        lines += _pair_rules(pairs, negation)
    return "\n".join(l for l in lines if l) + "\n"


def _t6(spec: BenchSpec, rng: random.Random) -> str:
    k = spec.n_prob_facts
    people = range(1, k + 1)
    probs = [rng.choice(PROB_LATTICE) for _ in people]
    products = rng.sample(range(N_PRODUCTS), 2 * k)
    targets = [rng.randint(-5, 5) for _ in people]
    items = [rng.randint(-10, 10) for _ in products]
    lines = [" ".join(f"{_num(p)}::shops({i})." for i, p in zip(people, probs)),
             " ".join(f"decision target({i})." for i in people),
             " ".join(f"utility(target({i}),{r})." for i, r in zip(people, targets)),
             " ".join(f"utility(rb(item{j}),{r})." for j, r in zip(products, items))]
    for idx, i in enumerate(people):
        a, b = products[2 * idx], products[2 * idx + 1]
        lines.append(f"buy(item{a},{i}) ; buy(item{b},{i}) :- target({i}), shops({i}).")
        lines.append(f"rb(item{a}) :- buy(item{a},{i}). rb(item{b}) :- buy(item{b},{i}).")
    return "\n".join(l for l in lines if l) + "\n"


def generate(spec: BenchSpec, negation: str = "\\+") -> Program:
    return parse(generate_text(spec, negation))


@dataclass
class BenchResult:
    spec: BenchSpec
    method: str
    wall_time_seconds: float
    report: Optional[UtilityReport]
    error: Optional[str] = None

    def row(self) -> dict:
        r = self.report

        def strategy(best):
            if best is None:
                return ""
            return "{" + ",".join(sorted(r.strategy_atoms(best[0]))) + "}"

        def value(best):
            return "" if best is None else repr(best[1])
        return {
            "suite": self.spec.suite, "n": self.spec.n_prob_facts, "d": self.spec.n_decisions,
            "method": self.method, "seed": self.spec.seed,
            "wall_time_seconds": f"{self.wall_time_seconds:.6f}",
            "lower_value": value(r.best_lower) if r else self.error or "",
            "upper_value": value(r.best_upper) if r else "",
            "lower_strategy": strategy(r.best_lower) if r else "",
            "upper_strategy": strategy(r.best_upper) if r else "",
        }


class BenchTimeout(ResourceLimitError):
    pass


@contextmanager
def time_limit(seconds: Optional[float]):
    if not seconds:
        yield
        return

    def handler(signum, frame):
        raise BenchTimeout(f"timed out after {seconds} s")
    old = signal.signal(signal.SIGALRM, handler)
    signal.setitimer(signal.ITIMER_REAL, seconds)
    try:
        yield
    finally:
        signal.setitimer(signal.ITIMER_REAL, 0)
        signal.signal(signal.SIGALRM, old)


def run(spec: BenchSpec, method: str = "auto", timeout: Optional[float] = None,
        raise_errors: bool = True) -> BenchResult:
    """Generate, then time only the solve call."""
    from .pipeline import solve
    program = generate(spec)
    start = time.perf_counter()
    try:
        with time_limit(timeout):
            report = solve(program, method)
    except DtpaspError as e:
        if raise_errors:
            raise
        elapsed = time.perf_counter() - start
        logger.warning("%s %s failed after %.3f s: %s", spec, method, elapsed, e)
        return BenchResult(spec, method, elapsed, None, f"{type(e).__name__}: {e}")
    return BenchResult(spec, method, time.perf_counter() - start, report)


def write_csv(results: Iterable[BenchResult], out) -> int:
    """Write header plus one row per result to the open text file ``out``; returns row count."""
    w = csv.DictWriter(out, fieldnames=CSV_COLUMNS, quoting=csv.QUOTE_MINIMAL, lineterminator="\r\n")
    w.writeheader()
    k = 0
    for r in results:
        w.writerow(r.row())
        k += 1
    return k


__all__ = ["SUITES", "PROB_LATTICE", "CSV_COLUMNS", "BenchSpec", "BenchResult", "generate",
           "generate_text", "run", "write_csv", "BenchTimeout", "time_limit"]

"""Propositional CNF container, DIMACS input/output and exhaustive model enumeration.

Variables are positive ints, literals are signed ints (DIMACS convention).
"""
from __future__ import annotations

import re
from dataclasses import dataclass, field
from typing import Iterable, Iterator, Mapping, Optional

from .errors import ParseError


@dataclass(frozen=True)
class Cnf:
    """Clauses over variables ``1..num_vars``.

    ``definitions`` optionally records biconditionals produced by completion:
    ``v -> ((l1, l2, ...), ...)`` states that v holds iff one of the literal
    conjunctions holds. They are used for syntactic definability only.
    """
    num_vars: int
    clauses: tuple
    names: Mapping = field(default_factory=dict)
    definitions: Mapping = field(default_factory=dict)

    def __post_init__(self):
        for c in self.clauses:
            for lit in c:
                if lit == 0 or abs(lit) > self.num_vars:
                    raise ValueError(f"literal {lit} outside variables 1..{self.num_vars}")

    @property
    def variables(self) -> range:
        return range(1, self.num_vars + 1)

    def name(self, v: int) -> str:
        return self.names.get(v, f"x{v}")

    def var_of(self, name: str) -> int:
        for v, n in self.names.items():
            if n == name:
                return v
        m = re.fullmatch(r"x?(\d+)", name)
        if m and 1 <= int(m.group(1)) <= self.num_vars:
            return int(m.group(1))
        raise KeyError(name)

    def is_trivially_false(self) -> bool:
        return any(len(c) == 0 for c in self.clauses)


def make_cnf(clauses: Iterable[Iterable[int]], num_vars: Optional[int] = None,
             names: Optional[Mapping] = None, definitions: Optional[Mapping] = None) -> Cnf:
    """Normalise clauses: sort literals, drop duplicates and tautologies."""
    out = []
    seen = set()
    top = 0
    for c in clauses:
        lits = tuple(sorted(set(c), key=lambda l: (abs(l), l)))
        top = max([top] + [abs(l) for l in lits])
        if any(-l in lits for l in lits):
            continue
        if lits not in seen:
            seen.add(lits)
            out.append(lits)
    n = top if num_vars is None else num_vars
    return Cnf(n, tuple(out), dict(names or {}), dict(definitions or {}))


def read_dimacs(text: str) -> Cnf:
    """Parse DIMACS CNF. ``c v <var> <name>`` comment lines name variables."""
    names = {}
    clauses = []
    declared = None
    current = []
    for lineno, raw in enumerate(text.splitlines(), 1):
        line = raw.strip()
        if not line:
            continue
        if line.startswith("c"):
            parts = line.split()
            if len(parts) == 4 and parts[1] == "v" and parts[2].isdigit():
                names[int(parts[2])] = parts[3]
            continue
        if line.startswith("p"):
            parts = line.split()
            if len(parts) != 4 or parts[1] != "cnf":
                raise ParseError("malformed problem line", lineno, 1)
            declared = int(parts[2])
            continue
        for tok in line.split():
            try:
                lit = int(tok)
            except ValueError:
                raise ParseError(f"unexpected token {tok!r}", lineno, raw.find(tok) + 1) from None
            if lit == 0:
                clauses.append(current)
                current = []
            else:
                current.append(lit)
    if current:
        clauses.append(current)
    top = max([0] + [abs(l) for c in clauses for l in c] + list(names))
    if declared is not None and top > declared:
        raise ParseError(f"variable {top} exceeds declared count {declared}")
    return make_cnf(clauses, declared if declared is not None else top, names)


def write_dimacs(c: Cnf) -> str:
    lines = [f"c v {v} {n}" for v, n in sorted(c.names.items())]
    lines.append(f"p cnf {c.num_vars} {len(c.clauses)}")
    lines += [" ".join(map(str, cl)) + " 0" for cl in c.clauses]
    return "\n".join(lines) + "\n"


def _simplify(clauses, assign: dict):
    """Apply ``assign`` and run unit propagation. Returns (clauses, assign) or None on conflict."""
    assign = dict(assign)
    while True:
        out = []
        unit = None
        for c in clauses:
            rest = []
            sat = False
            for lit in c:
                val = assign.get(abs(lit))
                if val is None:
                    rest.append(lit)
                elif val == (lit > 0):
                    sat = True
                    break
            if sat:
                continue
            if not rest:
                return None
            if len(rest) == 1 and unit is None:
                unit = rest[0]
            out.append(rest)
        if unit is None:
            return out, assign
        assign[abs(unit)] = unit > 0
        clauses = out


def iter_models(c: Cnf, variables: Iterable[int], fixed: Optional[Mapping] = None
                ) -> Iterator[dict]:
    """Yield every assignment of ``variables`` (dict var -> bool) that, together with ``fixed``,
    satisfies ``c``. Variables of ``c`` outside both sets must not occur in any clause."""
    variables = sorted(set(variables))
    fixed = dict(fixed or {})
    res = _simplify(c.clauses, fixed)
    if res is None:
        return
    stack = [res]
    while stack:
        clauses, assign = stack.pop()
        if not clauses:
            free = [v for v in variables if v not in assign]
            for bits in range(1 << len(free)):
                full = {v: assign[v] for v in variables if v in assign}
                for k, v in enumerate(free):
                    full[v] = bool(bits >> k & 1)
                yield full
            continue
        v = abs(clauses[0][0])
        if v not in variables:
            raise ValueError(f"variable {v} is neither fixed nor enumerated")
        for val in (True, False):
            r = _simplify(clauses, {**assign, v: val})
            if r is not None:
                stack.append(r)


def count_models(c: Cnf) -> int:
    return sum(1 for _ in iter_models(c, c.variables))


def satisfies(c: Cnf, assignment: Mapping) -> bool:
    return all(any(assignment[abs(l)] == (l > 0) for l in cl) for cl in c.clauses)


__all__ = ["Cnf", "make_cnf", "read_dimacs", "write_dimacs", "iter_models", "count_models",
           "satisfies"]

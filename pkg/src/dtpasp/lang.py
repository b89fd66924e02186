"""Surface language: parsing, printing and grounding of decision-theoretic PASP programs.

The accepted syntax::

    0.3::a.                        % probabilistic fact
    decision da.                   % decision atom (also ``?::da.``)
    utility(qr, 2).                % utility attribute
    qr ; nqr :- b, not c.          % disjunctive / normal rule (``\\+`` also negates)
    :- a, b.                       % constraint
    {a} :- b.                      % choice rule
    :- #count{X : buy(s,X)} > 1.   % count aggregate in a body
"""
from __future__ import annotations

import re
from dataclasses import dataclass, field
from typing import Iterable, Iterator, Sequence, Union

from .errors import ParseError, ProgramError

# ---------------------------------------------------------------------------
# AST


@dataclass(frozen=True)
class Var:
    name: str

    def __str__(self):
        return self.name


Term = Union[str, int, Var]


def _term_str(t: Term) -> str:
    return str(t)


@dataclass(frozen=True)
class Atom:
    predicate: str
    args: tuple = ()

    @property
    def is_ground(self) -> bool:
        return not any(isinstance(a, Var) for a in self.args)

    def variables(self) -> set:
        return {a for a in self.args if isinstance(a, Var)}

    def substitute(self, subst: dict) -> "Atom":
        if not subst:
            return self
        return Atom(self.predicate, tuple(subst.get(a, a) if isinstance(a, Var) else a
                                          for a in self.args))

    def __str__(self):
        if not self.args:
            return self.predicate
        return f"{self.predicate}({','.join(_term_str(a) for a in self.args)})"


@dataclass(frozen=True)
class Literal:
    atom: Atom
    positive: bool = True

    def __str__(self):
        return str(self.atom) if self.positive else f"not {self.atom}"


COMPARATORS = ("<", "<=", ">", ">=", "=", "!=")


@dataclass(frozen=True)
class AggregateElement:
    terms: tuple
    condition: tuple  # of Literal

    def __str__(self):
        terms = ",".join(_term_str(t) for t in self.terms)
        if not self.condition:
            return terms
        return f"{terms} : {', '.join(str(c) for c in self.condition)}"


@dataclass(frozen=True)
class Aggregate:
    elements: tuple
    op: str
    guard: Term
    function: str = "count"

    def __str__(self):
        return f"#{self.function}{{{'; '.join(str(e) for e in self.elements)}}} {self.op} {self.guard}"


BodyItem = Union[Literal, Aggregate]


@dataclass(frozen=True)
class Rule:
    head: tuple = ()
    body: tuple = ()
    choice: bool = False

    @property
    def kind(self) -> str:
        if self.choice:
            return "choice"
        if not self.head:
            return "constraint"
        if len(self.head) > 1:
            return "disjunctive"
        return "normal" if self.body else "fact"

    def __str__(self):
        if self.choice:
            head = "{" + str(self.head[0]) + "}"
        else:
            head = " ; ".join(str(h) for h in self.head)
        if not self.body:
            return f"{head}."
        body = ", ".join(str(b) for b in self.body)
        return f"{head} :- {body}." if head else f":- {body}."


@dataclass(frozen=True)
class Program:
    prob_facts: tuple = ()   # (Atom, float)
    decisions: tuple = ()    # Atom
    utilities: tuple = ()    # (Atom, float)
    rules: tuple = ()        # Rule

    def __str__(self):
        return format_program(self)


def _fmt_num(x: float) -> str:
    x = float(x)
    if x.is_integer() and abs(x) < 1e15:
        return str(int(x))
    return repr(x)


def format_program(p: Program) -> str:
    lines = [f"{_fmt_num(pr)}::{a}." for a, pr in p.prob_facts]
    lines += [f"decision {d}." for d in p.decisions]
    lines += [f"utility({a},{_fmt_num(r)})." for a, r in p.utilities]
    lines += [str(r) for r in p.rules]
    return "\n".join(lines) + ("\n" if lines else "")


# ---------------------------------------------------------------------------
# Tokenizer

_TOKEN_RE = re.compile(r"""
    (?P<ws>\s+)
  | (?P<comment>%[^\n]*)
  | (?P<float>\d+\.\d+(?:[eE][-+]?\d+)?)
  | (?P<int>\d+)
  | (?P<count>\#count\b)
  | (?P<ident>[a-z][A-Za-z0-9_]*)
  | (?P<var>[A-Z_][A-Za-z0-9_]*)
  | (?P<op>::|:-|\\\+|<=|>=|!=|<>|==|[<>=:;,.(){}|?-])
""", re.VERBOSE)


@dataclass
class _Tok:
    kind: str
    text: str
    line: int
    col: int


def _tokenize(src: str) -> list:
    toks = []
    pos, line, line_start = 0, 1, 0
    while pos < len(src):
        m = _TOKEN_RE.match(src, pos)
        if m is None:
            raise ParseError(f"unexpected character {src[pos]!r}", line, pos - line_start + 1)
        kind = m.lastgroup
        text = m.group()
        if kind not in ("ws", "comment"):
            toks.append(_Tok(kind, text, line, pos - line_start + 1))
        nl = text.count("\n")
        if nl:
            line += nl
            line_start = pos + text.rfind("\n") + 1
        pos = m.end()
    toks.append(_Tok("eof", "", line, pos - line_start + 1))
    return toks


# ---------------------------------------------------------------------------
# Parser


class _Parser:
    def __init__(self, src: str):
        self.toks = _tokenize(src)
        self.i = 0
        self._anon = 0

    @property
    def tok(self) -> _Tok:
        return self.toks[self.i]

    def peek(self, k=1) -> _Tok:
        return self.toks[min(self.i + k, len(self.toks) - 1)]

    def error(self, msg, tok=None):
        tok = tok or self.tok
        found = tok.text or "end of input"
        raise ParseError(f"{msg}, found {found!r}", tok.line, tok.col)

    def accept(self, text) -> bool:
        if self.tok.kind in ("op", "ident") and self.tok.text == text:
            self.i += 1
            return True
        return False

    def expect(self, text):
        if not self.accept(text):
            self.error(f"expected {text!r}")

    # -- terms

    def number(self) -> float:
        neg = self.accept("-")
        if self.tok.kind not in ("int", "float"):
            self.error("expected a number")
        val = float(self.tok.text)
        self.i += 1
        return -val if neg else val

    def term(self) -> Term:
        t = self.tok
        if t.kind == "int":
            self.i += 1
            return int(t.text)
        if t.kind == "op" and t.text == "-" and self.peek().kind == "int":
            self.i += 2
            return -int(self.toks[self.i - 1].text)
        if t.kind == "var":
            self.i += 1
            if t.text == "_":
                self._anon += 1
                return Var(f"_Anon{self._anon}")
            return Var(t.text)
        if t.kind == "ident":
            if self.peek().kind == "op" and self.peek().text == "(":
                self.error("function symbols are not supported", self.peek())
            self.i += 1
            return t.text
        self.error("expected a term")

    def atom(self) -> Atom:
        t = self.tok
        if t.kind != "ident" or t.text == "not":
            self.error("expected an atom")
        self.i += 1
        args = []
        if self.accept("("):
            args.append(self.term())
            while self.accept(","):
                args.append(self.term())
            self.expect(")")
        return Atom(t.text, tuple(args))

    def literal(self) -> Literal:
        if self.tok.kind == "ident" and self.tok.text == "not" and self.peek().kind == "ident":
            self.i += 1
            return Literal(self.atom(), False)
        if self.accept("\\+"):
            return Literal(self.atom(), False)
        return Literal(self.atom(), True)

    def comparator(self) -> str:
        t = self.tok
        if t.kind == "op" and t.text in ("<", "<=", ">", ">=", "=", "==", "!=", "<>"):
            self.i += 1
            return {"==": "=", "<>": "!="}.get(t.text, t.text)
        self.error("expected a comparison operator")

    def aggregate(self) -> Aggregate:
        self.i += 1  # '#count'
        self.expect("{")
        elements = []
        if not (self.tok.kind == "op" and self.tok.text == "}"):
            elements.append(self.agg_element())
            while self.accept(";"):
                elements.append(self.agg_element())
        self.expect("}")
        op = self.comparator()
        guard = self.term()
        if isinstance(guard, str):
            self.error("aggregate guard must be an integer or a variable", self.toks[self.i - 1])
        return Aggregate(tuple(elements), op, guard)

    def agg_element(self) -> AggregateElement:
        terms = [self.term()]
        while self.accept(","):
            terms.append(self.term())
        cond = []
        if self.accept(":"):
            cond.append(self.literal())
            while self.accept(","):
                cond.append(self.literal())
        return AggregateElement(tuple(terms), tuple(cond))

    def body(self) -> tuple:
        items = [self.body_item()]
        while self.accept(","):
            items.append(self.body_item())
        return tuple(items)

    def body_item(self) -> BodyItem:
        if self.tok.kind == "count":
            return self.aggregate()
        return self.literal()

    # -- statements

    def program(self) -> Program:
        prob_facts, decisions, utilities, rules = [], [], [], []
        while self.tok.kind != "eof":
            self.statement(prob_facts, decisions, utilities, rules)
        return Program(tuple(prob_facts), tuple(decisions), tuple(utilities), tuple(rules))

    def statement(self, prob_facts, decisions, utilities, rules):
        t, nxt = self.tok, self.peek()
        if t.kind in ("int", "float") and nxt.text == "::":
            start = t
            prob = float(t.text)
            self.i += 2
            a = self.atom()
            self.expect(".")
            if not 0.0 <= prob <= 1.0:
                raise ProgramError(f"probability {t.text} of {a} outside [0,1] "
                                   f"(line {start.line}, column {start.col})")
            prob_facts.append((a, prob))
        elif t.text == "?" and nxt.text == "::":
            self.i += 2
            decisions.append(self.atom())
            self.expect(".")
        elif t.kind == "ident" and t.text == "decision" and nxt.kind == "ident":
            self.i += 1
            decisions.append(self.atom())
            self.expect(".")
        elif (t.kind == "ident" and t.text == "utility" and nxt.text == "("
              and self._is_utility_decl()):
            self.i += 2
            a = self.atom()
            self.expect(",")
            reward = self.number()
            self.expect(")")
            self.expect(".")
            utilities.append((a, reward))
        elif t.text == "{" or (t.kind == "int" and nxt.text == "{"):
            rules.append(self.choice_rule())
        elif t.text == ":-":
            self.i += 1
            rules.append(Rule((), self.body()))
            self.expect(".")
        else:
            head = [self.atom()]
            while self.accept(";") or self.accept("|"):
                head.append(self.atom())
            body = self.body() if self.accept(":-") else ()
            self.expect(".")
            rules.append(Rule(tuple(head), body))

    def _is_utility_decl(self) -> bool:
        # utility(<atom>, <number>). with no body; anything else is an ordinary rule.
        depth, j = 0, self.i + 1
        while j < len(self.toks):
            tx = self.toks[j]
            if tx.text == "(":
                depth += 1
            elif tx.text == ")":
                depth -= 1
                if depth == 0:
                    return self.toks[j + 1].text == "." if j + 1 < len(self.toks) else False
            elif tx.kind == "eof":
                return False
            j += 1
        return False

    def choice_rule(self) -> Rule:
        if self.tok.kind == "int":
            if self.tok.text != "0":
                self.error("only the bounds 0{a}1 are supported")
            self.i += 1
        self.expect("{")
        a = self.atom()
        self.expect("}")
        if self.tok.kind == "int":
            if self.tok.text != "1":
                self.error("only the bounds 0{a}1 are supported")
            self.i += 1
        body = self.body() if self.accept(":-") else ()
        self.expect(".")
        return Rule((a,), body, choice=True)


def parse(source: str) -> Program:
    """Parse program text and validate the declarations."""
    prog = _Parser(source).program()
    validate(prog)
    return prog


def parse_query(text: str) -> tuple:
    """Parse a comma separated conjunction of ground literals, e.g. ``"qr, not nqr"``."""
    p = _Parser(text)
    lits = [p.literal()]
    while p.accept(","):
        lits.append(p.literal())
    if p.tok.kind != "eof":
        p.error("unexpected trailing input in query")
    for lit in lits:
        if not lit.atom.is_ground:
            raise ProgramError(f"query literal {lit} is not ground")
    return tuple(lits)


def _unifiable(pattern: Atom, ground: Atom) -> bool:
    return _match(pattern, ground, {}) is not None


def validate(p: Program) -> None:
    seen = {}
    for a, _ in p.prob_facts:
        if not a.is_ground:
            raise ProgramError(f"probabilistic fact {a} is not ground")
        if a in seen:
            raise ProgramError(f"atom {a} declared twice as probabilistic fact/decision")
        seen[a] = "probabilistic fact"
    for d in p.decisions:
        if not d.is_ground:
            raise ProgramError(f"decision atom {d} is not ground")
        if d in seen:
            raise ProgramError(f"atom {d} declared twice as probabilistic fact/decision")
        seen[d] = "decision atom"
    util_seen = set()
    for a, r in p.utilities:
        if not a.is_ground:
            raise ProgramError(f"utility attribute on non-ground atom {a}")
        if a in util_seen:
            raise ProgramError(f"duplicate utility attribute on {a}")
        if r != r or r in (float("inf"), float("-inf")):
            raise ProgramError(f"utility of {a} must be finite")
        util_seen.add(a)
    if seen:
        for rule in p.rules:
            for h in rule.head:
                for a, what in seen.items():
                    if a.predicate == h.predicate and _unifiable(h, a):
                        raise ProgramError(
                            f"{what} {a} appears in the head of rule '{rule}' "
                            "(disjoint condition violated)")


# ---------------------------------------------------------------------------
# Ground representation


@dataclass(frozen=True)
class GroundAggregate:
    elements: tuple  # of (terms tuple, pos atom indices, neg atom indices)
    op: str
    guard: int


@dataclass(frozen=True)
class GroundRule:
    head: tuple = ()
    pos: tuple = ()
    neg: tuple = ()
    aggregates: tuple = ()


@dataclass(frozen=True)
class GroundProgram:
    atoms: tuple
    rules: tuple
    prob_facts: tuple = ()   # (atom index, prob)
    decisions: tuple = ()    # atom index
    utilities: tuple = ()    # (atom index, reward)
    auxiliary: frozenset = frozenset()
    index: dict = field(default=None, compare=False, repr=False, hash=False)

    def __post_init__(self):
        if self.index is None:
            object.__setattr__(self, "index", {a: i for i, a in enumerate(self.atoms)})

    def __hash__(self):
        return hash((self.atoms, self.rules))

    def atom_index(self, atom) -> int:
        """Index of an Atom or of atom text such as ``"buy(steak,anna)"``."""
        if isinstance(atom, str):
            atom = _Parser(atom).atom()
        try:
            return self.index[atom]
        except KeyError:
            raise ProgramError(f"unknown atom {atom}") from None

    def with_facts(self, indices: Iterable[int]) -> "GroundProgram":
        """Return a copy with ``i.`` facts added for every index given."""
        extra = tuple(GroundRule(head=(i,)) for i in indices)
        return GroundProgram(self.atoms, self.rules + extra, self.prob_facts, self.decisions,
                             self.utilities, self.auxiliary, self.index)

    def names(self, mask: int) -> frozenset:
        return frozenset(str(self.atoms[i]) for i in iter_bits(mask))

    def format_rule(self, r: GroundRule) -> str:
        head = " ; ".join(str(self.atoms[i]) for i in r.head)
        body = [str(self.atoms[i]) for i in r.pos] + [f"not {self.atoms[i]}" for i in r.neg]
        for agg in r.aggregates:
            els = []
            for terms, pos, neg in agg.elements:
                cond = [str(self.atoms[i]) for i in pos] + [f"not {self.atoms[i]}" for i in neg]
                els.append(",".join(map(str, terms)) + (" : " + ", ".join(cond) if cond else ""))
            body.append(f"#count{{{'; '.join(els)}}} {agg.op} {agg.guard}")
        if not body:
            return f"{head}."
        return f"{head} :- {', '.join(body)}." if head else f":- {', '.join(body)}."


def iter_bits(mask: int) -> Iterator[int]:
    while mask:
        low = mask & -mask
        yield low.bit_length() - 1
        mask ^= low


def compare(count: int, op: str, guard: int) -> bool:
    if op == "<":
        return count < guard
    if op == "<=":
        return count <= guard
    if op == ">":
        return count > guard
    if op == ">=":
        return count >= guard
    if op == "=":
        return count == guard
    return count != guard


# ---------------------------------------------------------------------------
# Grounding

AUX_PREFIX = "_choice_"


def _match(pattern: Atom, ground: Atom, subst: dict):
    if pattern.predicate != ground.predicate or len(pattern.args) != len(ground.args):
        return None
    out = subst
    for p, g in zip(pattern.args, ground.args):
        if isinstance(p, Var):
            bound = out.get(p)
            if bound is None:
                if out is subst:
                    out = dict(subst)
                out[p] = g
            elif bound != g:
                return None
        elif p != g:
            return None
    return out


def _global_vars(rule: Rule) -> set:
    vs = set()
    for h in rule.head:
        vs |= h.variables()
    for b in rule.body:
        if isinstance(b, Literal):
            vs |= b.atom.variables()
        elif isinstance(b.guard, Var):
            vs.add(b.guard)
    return vs


def check_safety(rule: Rule) -> None:
    bound = set()
    for b in rule.body:
        if isinstance(b, Literal) and b.positive:
            bound |= b.atom.variables()
    for v in sorted(_global_vars(rule) - bound, key=lambda v: v.name):
        raise ProgramError(f"unsafe rule '{rule}': variable {v} does not occur "
                           "in a positive body literal")
    glob = _global_vars(rule)
    for b in rule.body:
        if isinstance(b, Aggregate):
            for el in b.elements:
                local_bound = set(glob)
                for c in el.condition:
                    if c.positive:
                        local_bound |= c.atom.variables()
                used = {t for t in el.terms if isinstance(t, Var)}
                for c in el.condition:
                    used |= c.atom.variables()
                for v in sorted(used - local_bound, key=lambda v: v.name):
                    raise ProgramError(f"unsafe aggregate in rule '{rule}': local variable {v} "
                                       "does not occur in a positive condition literal")


def translate_choice(rule: Rule) -> list:
    """``{a} :- B`` becomes ``a :- B, not aux`` and ``aux :- B, not a``."""
    (a,) = rule.head
    aux = Atom(AUX_PREFIX + a.predicate, a.args)
    return [Rule((a,), rule.body + (Literal(aux, False),)),
            Rule((aux,), rule.body + (Literal(a, False),))]


def _substitutions(lits: Sequence[Literal], by_pred: dict, subst: dict) -> Iterator[dict]:
    if not lits:
        yield subst
        return
    first, rest = lits[0], lits[1:]
    pat = first.atom.substitute(subst)
    if pat.is_ground:
        if pat in by_pred.get(pat.predicate, ()):
            yield from _substitutions(rest, by_pred, subst)
        return
    for g in list(by_pred.get(pat.predicate, ())):
        s2 = _match(pat, g, subst)
        if s2 is not None:
            yield from _substitutions(rest, by_pred, s2)


def ground(p: Program) -> GroundProgram:
    """Instantiate ``p`` by a bottom-up fixpoint over the atoms that may become true.

    Only rule instances whose positive body can be satisfied by potentially derivable atoms are
    kept; the dropped instances can never fire, so answer sets are unchanged.
    """
    validate(p)
    rules = []
    choice_aux = set()
    for r in p.rules:
        check_safety(r)
        if r.choice:
            tr = translate_choice(r)
            rules.extend(tr)
            choice_aux.add(tr[1].head[0].predicate)
        else:
            rules.append(r)

    possible = set()
    by_pred: dict = {}

    def add(a: Atom) -> bool:
        if a in possible:
            return False
        possible.add(a)
        by_pred.setdefault(a.predicate, set()).add(a)
        return True

    for a, _ in p.prob_facts:
        add(a)
    for d in p.decisions:
        add(d)

    instances = {}  # (rule idx, frozen subst) -> subst
    changed = True
    while changed:
        changed = False
        for ri, r in enumerate(rules):
            pos = [b for b in r.body if isinstance(b, Literal) and b.positive]
            for s in list(_substitutions(pos, by_pred, {})):
                key = (ri, tuple(sorted(((v.name, val) for v, val in s.items()), key=str)))
                if key in instances:
                    continue
                instances[key] = s
                for h in r.head:
                    if add(h.substitute(s)):
                        changed = True

    order: dict = {}

    def idx(a: Atom) -> int:
        if a not in order:
            order[a] = len(order)
        return order[a]

    for a, _ in p.prob_facts:
        idx(a)
    for d in p.decisions:
        idx(d)

    ground_rules = []
    seen_rules = set()
    for (ri, _), s in sorted(instances.items(), key=lambda kv: (kv[0][0], str(kv[0][1]))):
        r = rules[ri]
        head = tuple(dict.fromkeys(idx(h.substitute(s)) for h in r.head))
        pos, neg, aggs = [], [], []
        ok = True
        for b in r.body:
            if isinstance(b, Literal):
                a = b.atom.substitute(s)
                (pos if b.positive else neg).append(idx(a))
            else:
                ga = _ground_aggregate(b, s, by_pred, idx)
                if ga is None:
                    ok = False
                    break
                aggs.append(ga)
        if not ok:
            continue
        gr = GroundRule(head, tuple(dict.fromkeys(pos)), tuple(dict.fromkeys(neg)), tuple(aggs))
        if gr not in seen_rules:
            seen_rules.add(gr)
            ground_rules.append(gr)

    utilities = tuple((idx(a), float(r)) for a, r in p.utilities)
    atoms = tuple(sorted(order, key=order.get))
    aux = frozenset(i for i, a in enumerate(atoms) if a.predicate in choice_aux)
    return GroundProgram(
        atoms=atoms,
        rules=tuple(ground_rules),
        prob_facts=tuple((order[a], float(pr)) for a, pr in p.prob_facts),
        decisions=tuple(order[d] for d in p.decisions),
        utilities=utilities,
        auxiliary=aux,
    )


def _ground_aggregate(agg: Aggregate, subst: dict, by_pred: dict, idx):
    guard = agg.guard
    if isinstance(guard, Var):
        guard = subst[guard]
    if not isinstance(guard, int):
        raise ProgramError(f"aggregate guard {guard} is not an integer")
    elements = []
    seen = set()
    for el in agg.elements:
        pos = [c for c in el.condition if c.positive]
        for s in _substitutions(pos, by_pred, subst):
            terms = tuple(s.get(t, t) if isinstance(t, Var) else t for t in el.terms)
            p_idx = tuple(idx(c.atom.substitute(s)) for c in el.condition if c.positive)
            n_idx = tuple(idx(c.atom.substitute(s)) for c in el.condition if not c.positive)
            key = (terms, p_idx, n_idx)
            if key not in seen:
                seen.add(key)
                elements.append(key)
    return GroundAggregate(tuple(elements), agg.op, guard)

"""First-order syntax over a relational vocabulary.

AST, parser and printer (round-trip stable), quantifier rank, Tarskian
evaluation, relativization to a variable tuple, and the prefix-sentence
helpers used by the translation pipeline.
"""

from __future__ import annotations

import itertools
import re
from dataclasses import dataclass

from .errors import FormulaSyntaxError
from .structures import Structure, Vocabulary

RESERVED_PREFIX = "_q"  # hygienic bound-variable names; user variables may not start with it


# ---------------------------------------------------------------------------
# terms and formulas


@dataclass(frozen=True)
class Var:
    name: str


@dataclass(frozen=True)
class Cst:
    name: str


Term = Var | Cst


@dataclass(frozen=True)
class Atom:
    pred: str
    args: tuple[Term, ...]


@dataclass(frozen=True)
class Eq:
    lhs: Term
    rhs: Term


@dataclass(frozen=True)
class Not:
    sub: "Formula"


@dataclass(frozen=True)
class And:
    lhs: "Formula"
    rhs: "Formula"


@dataclass(frozen=True)
class Or:
    lhs: "Formula"
    rhs: "Formula"


@dataclass(frozen=True)
class Implies:
    lhs: "Formula"
    rhs: "Formula"


@dataclass(frozen=True)
class Exists:
    var: str
    body: "Formula"


@dataclass(frozen=True)
class Forall:
    var: str
    body: "Formula"


Formula = Atom | Eq | Not | And | Or | Implies | Exists | Forall


def free_vars(f: Formula) -> frozenset[str]:
    if isinstance(f, Atom):
        return frozenset(t.name for t in f.args if isinstance(t, Var))
    if isinstance(f, Eq):
        return frozenset(t.name for t in (f.lhs, f.rhs) if isinstance(t, Var))
    if isinstance(f, Not):
        return free_vars(f.sub)
    if isinstance(f, (And, Or, Implies)):
        return free_vars(f.lhs) | free_vars(f.rhs)
    if isinstance(f, (Exists, Forall)):
        return free_vars(f.body) - {f.var}
    raise TypeError(f"not a formula: {f!r}")


def is_sentence(f: Formula) -> bool:
    return not free_vars(f)


def quantifier_rank(f: Formula) -> int:
    """Maximum quantifier nesting depth."""
    if isinstance(f, (Atom, Eq)):
        return 0
    if isinstance(f, Not):
        return quantifier_rank(f.sub)
    if isinstance(f, (And, Or, Implies)):
        return max(quantifier_rank(f.lhs), quantifier_rank(f.rhs))
    if isinstance(f, (Exists, Forall)):
        return 1 + quantifier_rank(f.body)
    raise TypeError(f"not a formula: {f!r}")


def is_quantifier_free(f: Formula) -> bool:
    return quantifier_rank(f) == 0


def substitute(f: Formula, var: str, term: Term) -> Formula:
    """Replace free occurrences of ``var``; assumes hygienic bound names."""

    def sub_term(t: Term) -> Term:
        return term if isinstance(t, Var) and t.name == var else t

    if isinstance(f, Atom):
        return Atom(f.pred, tuple(sub_term(t) for t in f.args))
    if isinstance(f, Eq):
        return Eq(sub_term(f.lhs), sub_term(f.rhs))
    if isinstance(f, Not):
        return Not(substitute(f.sub, var, term))
    if isinstance(f, (And, Or, Implies)):
        return type(f)(substitute(f.lhs, var, term), substitute(f.rhs, var, term))
    if isinstance(f, (Exists, Forall)):
        if f.var == var:
            return f
        return type(f)(f.var, substitute(f.body, var, term))
    raise TypeError(f"not a formula: {f!r}")


def rename_bound(f: Formula, counter=None) -> Formula:
    """Give every bound variable a fresh reserved name; capture becomes impossible."""
    counter = counter if counter is not None else itertools.count()

    def walk(g: Formula) -> Formula:
        if isinstance(g, (Atom, Eq)):
            return g
        if isinstance(g, Not):
            return Not(walk(g.sub))
        if isinstance(g, (And, Or, Implies)):
            return type(g)(walk(g.lhs), walk(g.rhs))
        if isinstance(g, (Exists, Forall)):
            fresh = f"{RESERVED_PREFIX}{next(counter)}"
            return type(g)(fresh, walk(substitute(g.body, g.var, Var(fresh))))
        raise TypeError(f"not a formula: {g!r}")

    return walk(f)


def eliminate_implications(f: Formula) -> Formula:
    if isinstance(f, (Atom, Eq)):
        return f
    if isinstance(f, Not):
        return Not(eliminate_implications(f.sub))
    if isinstance(f, Implies):
        return Or(Not(eliminate_implications(f.lhs)), eliminate_implications(f.rhs))
    if isinstance(f, (And, Or)):
        return type(f)(eliminate_implications(f.lhs), eliminate_implications(f.rhs))
    if isinstance(f, (Exists, Forall)):
        return type(f)(f.var, eliminate_implications(f.body))
    raise TypeError(f"not a formula: {f!r}")


# ---------------------------------------------------------------------------
# evaluation


def evaluate(A: Structure, f: Formula, assignment: dict[str, int] | None = None) -> bool:
    """Tarskian truth of ``f`` in ``A`` under ``assignment``."""
    assignment = dict(assignment or {})
    missing = free_vars(f) - set(assignment)
    if missing:
        raise ValueError(f"unassigned free variables: {sorted(missing)}")
    return _eval(A, eliminate_implications(f), assignment)


def _term_value(A: Structure, t: Term, assignment) -> int:
    if isinstance(t, Var):
        return assignment[t.name]
    if t.name not in A.constant_interp:
        raise ValueError(f"unknown constant {t.name}")
    return A.constant_interp[t.name]


def _eval(A: Structure, f: Formula, assignment: dict[str, int]) -> bool:
    if isinstance(f, Atom):
        if not A.vocab.has_predicate(f.pred):
            raise ValueError(f"unknown predicate {f.pred}")
        if len(f.args) != A.vocab.arity(f.pred):
            raise ValueError(f"arity mismatch for {f.pred}")
        return A.holds(f.pred, tuple(_term_value(A, t, assignment) for t in f.args))
    if isinstance(f, Eq):
        return _term_value(A, f.lhs, assignment) == _term_value(A, f.rhs, assignment)
    if isinstance(f, Not):
        return not _eval(A, f.sub, assignment)
    if isinstance(f, And):
        return _eval(A, f.lhs, assignment) and _eval(A, f.rhs, assignment)
    if isinstance(f, Or):
        return _eval(A, f.lhs, assignment) or _eval(A, f.rhs, assignment)
    if isinstance(f, (Exists, Forall)):
        shortcut = isinstance(f, Exists)
        outer = assignment.get(f.var)  # restore shadowed outer bindings
        had_outer = f.var in assignment
        result = not shortcut
        for e in range(A.size):
            assignment[f.var] = e
            if _eval(A, f.body, assignment) == shortcut:
                result = shortcut
                break
        if had_outer:
            assignment[f.var] = outer
        else:
            assignment.pop(f.var, None)
        return result
    raise TypeError(f"not a formula: {f!r}")


# ---------------------------------------------------------------------------
# simplifying constructors (used by relativize)


def _is_true(f: Formula) -> bool:
    return isinstance(f, Eq) and f.lhs == f.rhs


def _is_false(f: Formula) -> bool:
    return isinstance(f, Not) and _is_true(f.sub)


def _not(f: Formula) -> Formula:
    if _is_true(f):
        return Not(f)  # canonical falsum
    if isinstance(f, Not):
        return f.sub
    return Not(f)


def _or_all(parts: list[Formula], truth: Formula) -> Formula:
    kept: list[Formula] = []
    seen = set()
    for p in parts:
        if _is_true(p):
            return truth
        if _is_false(p) or p in seen:
            continue
        seen.add(p)
        kept.append(p)
    if not kept:
        return _not(truth)
    out = kept[0]
    for p in kept[1:]:
        out = Or(out, p)
    return out


def _and_all(parts: list[Formula], truth: Formula) -> Formula:
    kept: list[Formula] = []
    seen = set()
    for p in parts:
        if _is_false(p):
            return _not(truth)
        if _is_true(p) or p in seen:
            continue
        seen.add(p)
        kept.append(p)
    if not kept:
        return truth
    out = kept[0]
    for p in kept[1:]:
        out = And(out, p)
    return out


def _implies(a: Formula, b: Formula, truth: Formula) -> Formula:
    if _is_true(a):
        return b
    if _is_false(a) or _is_true(b):
        return truth
    if _is_false(b):
        return _not(a)
    return Implies(a, b)


# ---------------------------------------------------------------------------
# relativization


def relativize(f: Formula, xs: tuple[str, ...], constants: tuple[str, ...] = ()) -> Formula:
    """Quantifier-free formula asserting ``f`` inside the substructure induced
    by the values of ``xs`` together with the constants.

    Universal quantifiers are rewritten through negated existentials, and each
    existential is expanded into a disjunction over ``xs`` and the constants;
    the result is folded (identical-term equalities, duplicate disjuncts).
    Constants occurring in ``f`` are always used as witnesses; pass
    ``constants`` to cover vocabulary constants that ``f`` does not mention.
    """
    if not xs:
        raise ValueError("relativization needs at least one variable")
    for x in xs:
        if x.startswith(RESERVED_PREFIX):
            raise ValueError(f"variable {x} uses the reserved prefix {RESERVED_PREFIX}")
    if not is_sentence(f):
        raise ValueError("relativization is defined for sentences")

    witnesses: list[Term] = []
    for x in xs:
        if Var(x) not in witnesses:
            witnesses.append(Var(x))
    all_constants = sorted(_constants_of(f) | set(constants))
    witnesses.extend(Cst(c) for c in all_constants)
    truth = Eq(Var(xs[0]), Var(xs[0]))

    def rel(g: Formula) -> Formula:
        if isinstance(g, Eq):
            return truth if g.lhs == g.rhs else g
        if isinstance(g, Atom):
            return g
        if isinstance(g, Not):
            return _not(rel(g.sub))
        if isinstance(g, And):
            return _and_all([rel(g.lhs), rel(g.rhs)], truth)
        if isinstance(g, Or):
            return _or_all([rel(g.lhs), rel(g.rhs)], truth)
        if isinstance(g, Implies):
            return _implies(rel(g.lhs), rel(g.rhs), truth)
        if isinstance(g, Exists):
            return _or_all([rel(substitute(g.body, g.var, w)) for w in witnesses], truth)
        if isinstance(g, Forall):
            # de-Morgan-folded form of the negated-existential rewrite
            return _and_all([rel(substitute(g.body, g.var, w)) for w in witnesses], truth)
        raise TypeError(f"not a formula: {g!r}")

    return rel(rename_bound(f))


def _constants_of(f: Formula) -> set[str]:
    if isinstance(f, Atom):
        return {t.name for t in f.args if isinstance(t, Cst)}
    if isinstance(f, Eq):
        return {t.name for t in (f.lhs, f.rhs) if isinstance(t, Cst)}
    if isinstance(f, Not):
        return _constants_of(f.sub)
    if isinstance(f, (And, Or, Implies)):
        return _constants_of(f.lhs) | _constants_of(f.rhs)
    if isinstance(f, (Exists, Forall)):
        return _constants_of(f.body)
    raise TypeError(f"not a formula: {f!r}")


def relativize_check(A: Structure, f: Formula, values: tuple[int, ...]) -> bool:
    """Truth of ``f`` relativized to ``values``, evaluated directly."""
    xs = tuple(f"x{i + 1}" for i in range(len(values)))
    rel = relativize(f, xs)
    return evaluate(A, rel, dict(zip(xs, values)))


# ---------------------------------------------------------------------------
# size-bound sentence and prefix sentences


def size_bound_sentence(n: int) -> Formula:
    """Sentence true exactly in structures with at most ``n`` elements."""
    if n < 1:
        raise ValueError("size bound must be at least 1")
    xs = [f"x{i + 1}" for i in range(n)]
    body: Formula = Eq(Var("y"), Var(xs[0]))
    for x in xs[1:]:
        body = Or(body, Eq(Var("y"), Var(x)))
    out: Formula = Forall("y", body)
    for x in reversed(xs):
        out = Exists(x, out)
    return out


@dataclass(frozen=True)
class PrefixSentence:
    """A sentence shaped as a block of existentials, then universals, then a
    quantifier-free matrix."""

    exist_vars: tuple[str, ...]
    univ_vars: tuple[str, ...]
    matrix: Formula

    def __post_init__(self):
        if not is_quantifier_free(self.matrix):
            raise ValueError("matrix must be quantifier-free")
        if set(self.exist_vars) & set(self.univ_vars):
            raise ValueError("existential and universal variables must be disjoint")
        allowed = set(self.exist_vars) | set(self.univ_vars)
        if not free_vars(self.matrix) <= allowed:
            raise ValueError("matrix has free variables outside the prefix")


def assemble_prefix(k: int, p: int, matrix: Formula) -> PrefixSentence:
    """Wrap ``matrix`` in the canonical prefix ``x1..xk`` / ``y1..yp``."""
    return PrefixSentence(
        tuple(f"x{i + 1}" for i in range(k)),
        tuple(f"y{i + 1}" for i in range(p)),
        matrix,
    )


def to_formula(ps: PrefixSentence) -> Formula:
    out: Formula = ps.matrix
    for y in reversed(ps.univ_vars):
        out = Forall(y, out)
    for x in reversed(ps.exist_vars):
        out = Exists(x, out)
    return out


# ---------------------------------------------------------------------------
# parser


_TOKEN = re.compile(
    r"\s*(?:(?P<ident>[A-Za-z_][A-Za-z0-9_]*)|(?P<arrow>->)|(?P<punct>[().,!&|=]))"
)
_KEYWORDS = {"exists", "forall"}


def _tokenize(text: str):
    pos = 0
    tokens = []
    while pos < len(text):
        m = _TOKEN.match(text, pos)
        if not m or m.end() == pos:
            stripped = text[pos:].lstrip()
            if not stripped:
                break
            where = len(text) - len(stripped)
            raise FormulaSyntaxError(f"unexpected character {stripped[0]!r}", where)
        if m.group("ident"):
            tokens.append(("ident", m.group("ident"), m.start("ident")))
        elif m.group("arrow"):
            tokens.append(("->", "->", m.start("arrow")))
        else:
            p = m.group("punct")
            tokens.append((p, p, m.start("punct")))
        pos = m.end()
    tokens.append(("eof", "", len(text)))
    return tokens


class _Parser:
    def __init__(self, vocab: Vocabulary, text: str):
        self.vocab = vocab
        self.tokens = _tokenize(text)
        self.i = 0

    def peek(self):
        return self.tokens[self.i]

    def next(self):
        tok = self.tokens[self.i]
        self.i += 1
        return tok

    def expect(self, kind: str):
        tok = self.next()
        if tok[0] != kind:
            raise FormulaSyntaxError(f"expected {kind!r}, found {tok[1]!r}", tok[2])
        return tok

    def formula(self) -> Formula:
        kind, value, _ = self.peek()
        if kind == "ident" and value in _KEYWORDS:
            return self.quantified()
        return self.implication()

    def quantified(self) -> Formula:
        _, word, _ = self.next()
        tok = self.expect("ident")
        var = tok[1]
        if var in _KEYWORDS:
            raise FormulaSyntaxError(f"{var!r} cannot be a variable name", tok[2])
        self.expect(".")
        body = self.formula()
        return Exists(var, body) if word == "exists" else Forall(var, body)

    def implication(self) -> Formula:
        lhs = self.disjunction()
        if self.peek()[0] == "->":
            self.next()
            return Implies(lhs, self.implication())
        return lhs

    def disjunction(self) -> Formula:
        out = self.conjunction()
        while self.peek()[0] == "|":
            self.next()
            out = Or(out, self.conjunction())
        return out

    def conjunction(self) -> Formula:
        out = self.unary()
        while self.peek()[0] == "&":
            self.next()
            out = And(out, self.unary())
        return out

    def unary(self) -> Formula:
        kind, _, _ = self.peek()
        if kind == "!":
            self.next()
            return Not(self.unary())
        return self.primary()

    def primary(self) -> Formula:
        kind, value, pos = self.next()
        if kind == "(":
            inner = self.formula()
            self.expect(")")
            return inner
        if kind != "ident":
            raise FormulaSyntaxError(f"expected a formula, found {value!r}", pos)
        if value in _KEYWORDS:
            raise FormulaSyntaxError("quantifier must be parenthesized here", pos)
        if self.peek()[0] == "(":
            self.next()
            args = [self.term()]
            while self.peek()[0] == ",":
                self.next()
                args.append(self.term())
            self.expect(")")
            if not self.vocab.has_predicate(value):
                raise FormulaSyntaxError(f"unknown predicate {value!r}", pos)
            if self.vocab.arity(value) != len(args):
                raise FormulaSyntaxError(
                    f"predicate {value!r} expects {self.vocab.arity(value)} arguments",
                    pos,
                )
            return Atom(value, tuple(args))
        lhs = self.as_term(value, pos)
        self.expect("=")
        return Eq(lhs, self.term())

    def term(self) -> Term:
        tok = self.expect("ident")
        return self.as_term(tok[1], tok[2])

    def as_term(self, name: str, pos: int) -> Term:
        if name in _KEYWORDS:
            raise FormulaSyntaxError(f"{name!r} cannot be a term", pos)
        if self.vocab.has_predicate(name):
            raise FormulaSyntaxError(f"predicate {name!r} used as a term", pos)
        if name in self.vocab.constants:
            return Cst(name)
        return Var(name)


def parse(vocab: Vocabulary, text: str) -> Formula:
    parser = _Parser(vocab, text)
    out = parser.formula()
    kind, value, pos = parser.peek()
    if kind != "eof":
        raise FormulaSyntaxError(f"trailing input {value!r}", pos)
    return out


# ---------------------------------------------------------------------------
# printer

_LEVEL = {Implies: 1, Or: 2, And: 3, Not: 4}


def print_formula(f: Formula) -> str:
    """Render with minimal parentheses; ``parse`` of the output restores ``f``."""
    return _print(f, 0)


def _term_str(t: Term) -> str:
    return t.name


def _print(f: Formula, level: int) -> str:
    if isinstance(f, Atom):
        return f"{f.pred}({', '.join(_term_str(t) for t in f.args)})"
    if isinstance(f, Eq):
        s = f"{_term_str(f.lhs)} = {_term_str(f.rhs)}"
        return f"({s})" if level > 3 else s
    if isinstance(f, Not):
        return "!" + _print(f.sub, 4)
    if isinstance(f, (Exists, Forall)):
        word = "exists" if isinstance(f, Exists) else "forall"
        s = f"{word} {f.var}. {_print(f.body, 0)}"
        return f"({s})" if level > 0 else s
    own = _LEVEL[type(f)]
    symbol = {Implies: "->", Or: "|", And: "&"}[type(f)]
    if isinstance(f, Implies):  # right-associative
        s = f"{_print(f.lhs, own + 1)} {symbol} {_print(f.rhs, own)}"
    else:  # left-associative
        s = f"{_print(f.lhs, own)} {symbol} {_print(f.rhs, own + 1)}"
    return f"({s})" if level > own else s

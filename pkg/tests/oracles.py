"""Independent brute-force oracles and seeded generators for the test suite.

Everything here deliberately avoids the library's optimized code paths: the
embedding oracle tries every injection, and the game evaluator walks the
verifier/falsifier move tree with explicit role bookkeeping.
"""

from __future__ import annotations

import itertools
import random

from fmtk.folog import And, Atom, Cst, Eq, Exists, Forall, Implies, Not, Or, Var
from fmtk.shrink import SigmaTree
from fmtk.structures import Structure, Vocabulary

GRAPH_VOCAB = Vocabulary.make({"E": 2})


def brute_force_embedding(A: Structure, B: Structure):
    """Try every injection of A's universe into B's; no pruning at all."""
    if A.vocab != B.vocab or A.size > B.size:
        return None
    for image in itertools.permutations(range(B.size), A.size):
        mapping = dict(enumerate(image))
        if any(mapping[A.constant_interp[c]] != B.constant_interp[c]
               for c in A.vocab.constants):
            continue
        ok = True
        for name, arity in A.vocab.predicates:
            rel_a, rel_b = A.relations[name], B.relations[name]
            for t in itertools.product(range(A.size), repeat=arity):
                if (t in rel_a) != (tuple(mapping[e] for e in t) in rel_b):
                    ok = False
                    break
            if not ok:
                break
        if ok:
            return mapping
    return None


def game_evaluate(A: Structure, f, assignment=None) -> bool:
    """Truth via the verifier/falsifier move game, with role swapping at
    negations instead of boolean operators."""
    assignment = dict(assignment or {})

    def value(t):
        if isinstance(t, Var):
            return assignment[t.name]
        return A.constant_interp[t.name]

    def wins(g, verifier: bool) -> bool:
        # True iff the *original* verifier wins from this position
        if isinstance(g, Atom):
            truth = tuple(value(t) for t in g.args) in A.relations[g.pred]
            return truth == verifier
        if isinstance(g, Eq):
            return (value(g.lhs) == value(g.rhs)) == verifier
        if isinstance(g, Not):
            return wins(g.sub, not verifier)
        if isinstance(g, (Or, And)):
            chooser_is_verifier = verifier == isinstance(g, Or)
            branches = (g.lhs, g.rhs)
            if chooser_is_verifier:
                return any(wins(b, verifier) for b in branches)
            return all(wins(b, verifier) for b in branches)
        if isinstance(g, Implies):
            branches = (Not(g.lhs), g.rhs)
            if verifier:
                return any(wins(b, verifier) for b in branches)
            return all(wins(b, verifier) for b in branches)
        if isinstance(g, (Exists, Forall)):
            chooser_is_verifier = verifier == isinstance(g, Exists)
            outcomes = []
            for e in range(A.size):
                old = assignment.get(g.var)
                assignment[g.var] = e
                outcomes.append(wins(g.body, verifier))
                if old is None:
                    del assignment[g.var]
                else:
                    assignment[g.var] = old
            return any(outcomes) if chooser_is_verifier else all(outcomes)
        raise TypeError(f"not a formula: {g!r}")

    return wins(f, True)


# ---------------------------------------------------------------------------
# generators


def random_structure(rng: random.Random, vocab: Vocabulary, size: int,
                     density: float = 0.5) -> Structure:
    relations = {}
    for name, arity in vocab.predicates:
        relations[name] = frozenset(
            t
            for t in itertools.product(range(size), repeat=arity)
            if rng.random() < density
        )
    consts = {c: rng.randrange(size) for c in vocab.constants}
    return Structure(vocab, size, relations, consts)


def permuted_copy(rng: random.Random, A: Structure) -> Structure:
    perm = list(range(A.size))
    rng.shuffle(perm)
    relations = {
        name: frozenset(tuple(perm[e] for e in t) for t in tuples)
        for name, tuples in A.relations.items()
    }
    consts = {c: perm[e] for c, e in A.constant_interp.items()}
    return Structure(A.vocab, A.size, relations, consts)


def all_structures(vocab: Vocabulary, sizes) -> list[Structure]:
    out = []
    for n in sizes:
        spaces = [
            list(itertools.product(range(n), repeat=arity))
            for _, arity in vocab.predicates
        ]
        for bits in itertools.product(
            *[itertools.product((0, 1), repeat=len(s)) for s in spaces]
        ):
            relations = {
                name: frozenset(t for t, b in zip(space, chosen) if b)
                for (name, _), space, chosen in zip(vocab.predicates, spaces, bits)
            }
            out.append(Structure(vocab, n, relations))
    return out


def iso_representatives(structures: list[Structure]) -> list[Structure]:
    seen = set()
    reps = []
    for A in structures:
        best = None
        for perm in itertools.permutations(range(A.size)):
            key = tuple(
                (name, tuple(sorted(tuple(perm[e] for e in t) for t in tuples)))
                for name, tuples in sorted(A.relations.items())
            )
            if best is None or key < best:
                best = key
        if (A.size, best) not in seen:
            seen.add((A.size, best))
            reps.append(A)
    return reps


def random_formula(rng: random.Random, vocab: Vocabulary, rank: int,
                   scope: tuple[str, ...] = ()) -> "Formula":
    """Random sentence-or-formula with quantifier rank at most ``rank``; with
    an empty scope and no constants the root is forced to quantify."""
    terms = [Var(v) for v in scope] + [Cst(c) for c in vocab.constants]

    def fresh() -> str:
        return f"v{rng.randrange(10**6)}"

    def gen(r: int, terms: list, fuel: int) -> "Formula":
        can_atom = bool(terms)
        options = []
        if can_atom:
            options += ["atom", "atom", "eq"]
        if r > 0 and (fuel > 0 or not can_atom):
            options += ["exists", "forall"]
        if fuel > 0:
            options += ["not", "and", "or", "implies"]
        kind = rng.choice(options)
        if kind == "atom":
            name, arity = rng.choice(vocab.predicates)
            return Atom(name, tuple(rng.choice(terms) for _ in range(arity)))
        if kind == "eq":
            return Eq(rng.choice(terms), rng.choice(terms))
        if kind == "not":
            return Not(gen(r, terms, fuel - 1))
        if kind in ("and", "or", "implies"):
            cls = {"and": And, "or": Or, "implies": Implies}[kind]
            return cls(gen(r, terms, fuel // 2), gen(r, terms, fuel // 2))
        var = fresh()
        body = gen(r - 1, terms + [Var(var)], fuel - 1)
        return Exists(var, body) if kind == "exists" else Forall(var, body)

    return gen(rank, terms, fuel=8)


def random_tree(rng: random.Random, size: int, sigma: tuple[str, ...]) -> SigmaTree:
    parent = {0: None}
    label = {0: rng.choice(sigma)}
    for v in range(1, size):
        parent[v] = rng.randrange(v)
        label[v] = rng.choice(sigma)
    return SigmaTree(parent, label, sigma)


def random_word(rng: random.Random, size: int, sigma: tuple[str, ...]) -> SigmaTree:
    from fmtk.shrink import make_word

    return make_word([rng.choice(sigma) for _ in range(size)], sigma)

"""Core finding over finite samples and the translation of core-certified
sentences into existential-then-universal prefix form.

A class of structures is represented by a :class:`ClassSample`: an explicit
finite list for iteration plus an optional membership callback standing in
for the full class when substructures are probed. Every claim these routines
make is sample-bounded and re-checked by evaluation.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass, field

from .errors import GuardExceeded, VerificationFailed
from .folog import (
    And,
    Atom,
    Cst,
    Eq,
    Exists,
    Forall,
    Formula,
    Not,
    Or,
    PrefixSentence,
    Var,
    evaluate,
    relativize,
    size_bound_sentence,
    to_formula,
    _implies,
)
from .shrink import from_structure
from .structures import Structure, Vocabulary, find_embedding, induced_substructure
from .wqo import _order_positions

CORE_GUARD = 12  # exhaustive subset enumeration bound
MINIMAL_MODEL_GUARD = 64


@dataclass
class ClassSample:
    """Finite stand-in for a class: listed structures plus a membership test.

    ``closed`` records that the listed structures are closed under induced
    substructures (within the class); :meth:`validate_closed` checks it.
    """

    structures: list[Structure]
    closed: bool = False
    membership: "callable | None" = None

    def member(self, A: Structure) -> bool:
        return True if self.membership is None else bool(self.membership(A))

    def validate_closed(self) -> bool:
        reps = _iso_dedupe(self.structures)
        for A in self.structures:
            for size in range(1, A.size + 1):
                for combo in itertools.combinations(range(A.size), size):
                    if not set(A.constant_interp.values()) <= set(combo):
                        continue
                    sub, _ = induced_substructure(A, combo)
                    if not self.member(sub):
                        continue
                    if not any(
                        sub.size == R.size and find_embedding(sub, R) is not None
                        for R in reps
                    ):
                        return False
        return True


@dataclass
class CoreCertificate:
    """Cores found for one structure, with a short search transcript."""

    structure: Structure
    cores: list[tuple[int, ...]]
    transcript: str

    def has_core(self) -> bool:
        return bool(self.cores)


def _iso_invariant(A: Structure) -> tuple:
    counts = []
    for name, _ in A.vocab.predicates:
        rel = A.relations[name]
        counts.append((name, len(rel), tuple(sorted(
            sum(1 for t in rel if e in t) for e in range(A.size)
        ))))
    return (A.vocab, A.size, tuple(counts))


def _iso_dedupe(structures: list[Structure]) -> list[Structure]:
    buckets: dict[tuple, list[Structure]] = {}
    reps: list[Structure] = []
    for A in structures:
        bucket = buckets.setdefault(_iso_invariant(A), [])
        if not any(find_embedding(A, R) is not None for R in bucket):
            bucket.append(A)
            reps.append(A)
    return reps


def _as_class_test(crit):
    if callable(crit):
        return crit
    return lambda B: evaluate(B, crit)


def find_cores(A: Structure, crit, k: int, sample: ClassSample) -> list[tuple[int, ...]]:
    """All mark sets of size at most ``k`` whose retention forces every
    class-member substructure of ``A`` into the target class.

    ``crit`` is a sentence or a callable deciding target-class membership;
    ``sample.membership`` decides which substructures count at all. Exhaustive
    over subsets, so guarded at ``|A| <= 12``.
    """
    if A.size > CORE_GUARD:
        raise GuardExceeded(f"|A| = {A.size} exceeds the core-search guard {CORE_GUARD}")
    if not sample.member(A):
        raise ValueError("the structure is not in the sample's class")
    in_target = _as_class_test(crit)
    const_mask = 0
    for e in A.constant_interp.values():
        const_mask |= 1 << e

    bad_masks: list[int] = []
    for size in range(1, A.size + 1):
        for combo in itertools.combinations(range(A.size), size):
            mask = 0
            for e in combo:
                mask |= 1 << e
            if mask & const_mask != const_mask:
                continue
            B, _ = induced_substructure(A, combo)
            if sample.member(B) and not in_target(B):
                bad_masks.append(mask)

    cores: list[tuple[int, ...]] = []
    for size in range(k + 1):
        for combo in itertools.combinations(range(A.size), size):
            mask = 0
            for e in combo:
                mask |= 1 << e
            if all(mask & bad != mask for bad in bad_masks):
                cores.append(combo)
    return cores


def psc_check(phi: Formula, k: int, sample: ClassSample) -> tuple[bool, list[CoreCertificate]]:
    """Does every model of ``phi`` in the sample carry a core of size at most
    ``k``? Returns the verdict and one certificate per model."""
    certificates: list[CoreCertificate] = []
    for A in sample.structures:
        if not evaluate(A, phi):
            continue
        cores = find_cores(A, phi, k, sample)
        transcript = (
            f"size {A.size}; {len(cores)} core(s) of size <= {k} found"
        )
        certificates.append(CoreCertificate(A, cores, transcript))
    return all(c.has_core() for c in certificates), certificates


# ---------------------------------------------------------------------------
# translation


def translate_to_exists_forall(
    phi: Formula, k: int, p: int, constants: tuple[str, ...] = ()
) -> PrefixSentence:
    """Syntactic translation: relativize ``size-bound -> phi`` to the prefix
    variables and wrap it in ``k`` existentials and ``p`` universals.

    Semantic agreement is a separate, sample-bounded check. With a
    constant-free vocabulary the relativized size bound is a tautology (an
    induced substructure of ``k + p`` points never exceeds ``k + p``
    elements), so it folds away instead of being expanded.
    """
    if p < 1:
        raise ValueError("the universal block needs at least one variable")
    xs = tuple(f"x{i + 1}" for i in range(k))
    ys = tuple(f"y{i + 1}" for i in range(p))
    allvars = xs + ys
    truth = Eq(Var(allvars[0]), Var(allvars[0]))
    if constants:
        bound = relativize(size_bound_sentence(k + p), allvars, constants)
    else:
        bound = truth
    matrix = _implies(bound, relativize(phi, allvars, constants), truth)
    return PrefixSentence(xs, ys, matrix)


@dataclass
class TranslationResult:
    sentence: PrefixSentence
    p: int
    verified: bool
    disagreements: list[int] = field(default_factory=list)


def sample_agreement(phi: Formula, ps: PrefixSentence, sample: ClassSample) -> list[int]:
    """Indices of sample structures where the translation disagrees with ``phi``."""
    translated = to_formula(ps)
    return [
        i
        for i, A in enumerate(sample.structures)
        if evaluate(A, phi) != evaluate(A, translated)
    ]


def translate_auto(
    phi: Formula, k: int, sample: ClassSample, max_p: int = 16,
    constants: tuple[str, ...] = (),
) -> TranslationResult:
    """Try ``p = 1, 2, 4, ...`` up to ``max_p`` until the translation agrees
    with ``phi`` across the sample; reports failure past the cap."""
    p = 1
    last = None
    while p <= max_p:
        ps = translate_to_exists_forall(phi, k, p, constants)
        bad = sample_agreement(phi, ps, sample)
        last = TranslationResult(ps, p, not bad, bad)
        if not bad:
            return last
        p *= 2
    return last


def core_formula(phi: Formula, k: int, p: int, constants: tuple[str, ...] = ()) -> Formula:
    """The mark-set definer: universally quantified relativized matrix with
    the ``k`` witness variables left free."""
    ps = translate_to_exists_forall(phi, k, p, constants)
    out: Formula = ps.matrix
    for y in reversed(ps.univ_vars):
        out = Forall(y, out)
    return out


# ---------------------------------------------------------------------------
# universal sentences from minimal models


def atomic_diagram_sentence(A: Structure) -> Formula:
    """Existential closure of every atomic and negated atomic fact of ``A``;
    a structure models it exactly when ``A`` embeds into it."""
    xs = [f"x{e + 1}" for e in range(A.size)]
    facts: list[Formula] = []
    for i in range(A.size):
        for j in range(i + 1, A.size):
            facts.append(Not(Eq(Var(xs[i]), Var(xs[j]))))
    for c in A.vocab.constants:
        facts.append(Eq(Cst(c), Var(xs[A.constant_interp[c]])))
    for name, arity in A.vocab.predicates:
        rel = A.relations[name]
        for t in itertools.product(range(A.size), repeat=arity):
            atom = Atom(name, tuple(Var(xs[e]) for e in t))
            facts.append(atom if t in rel else Not(atom))
    body: Formula = facts[0] if facts else Eq(Var(xs[0]), Var(xs[0]))
    for fact in facts[1:]:
        body = And(body, fact)
    out: Formula = body
    for x in reversed(xs):
        out = Exists(x, out)
    return out


def minimal_models(structures: list[Structure]) -> list[Structure]:
    """Embedding-minimal members, up to isomorphism."""
    reps = _iso_dedupe(structures)
    return [
        A
        for A in reps
        if not any(B is not A and find_embedding(B, A) is not None for B in reps)
    ]


def forall_star_from_minimal_models(class_membership, sample: ClassSample) -> Formula:
    """Universal-form sentence for a substructure-closed class: the negated
    disjunction of the atomic diagrams of the minimal models outside it.

    Verified against the membership callback on the whole sample.
    """
    outside = [A for A in sample.structures if not class_membership(A)]
    if not outside:
        out: Formula = Forall("y1", Eq(Var("y1"), Var("y1")))
        _verify_defines(out, class_membership, sample)
        return out
    minima = minimal_models(outside)
    if len(minima) > MINIMAL_MODEL_GUARD:
        raise GuardExceeded(
            f"{len(minima)} minimal models exceed the guard {MINIMAL_MODEL_GUARD}"
        )
    disjunction: Formula = atomic_diagram_sentence(minima[0])
    for A in minima[1:]:
        disjunction = Or(disjunction, atomic_diagram_sentence(A))
    out = Not(disjunction)
    _verify_defines(out, class_membership, sample)
    return out


def _verify_defines(sentence: Formula, class_membership, sample: ClassSample):
    for A in sample.structures:
        if evaluate(A, sentence) != bool(class_membership(A)):
            raise VerificationFailed(
                "constructed sentence disagrees with the class on the sample"
            )


# ---------------------------------------------------------------------------
# sample builders and bundled class tests


def enumerate_structures(vocab: Vocabulary, max_size: int) -> list[Structure]:
    """Every labeled structure over ``vocab`` up to ``max_size`` elements."""
    if vocab.constants:
        raise ValueError("enumeration is for constant-free vocabularies")
    out = []
    for n in range(1, max_size + 1):
        spaces = []
        for name, arity in vocab.predicates:
            spaces.append(list(itertools.product(range(n), repeat=arity)))
        def rels_for(bits_per_pred):
            return {
                name: frozenset(
                    t for t, keep in zip(space, bits) if keep
                )
                for (name, _), space, bits in zip(vocab.predicates, spaces, bits_per_pred)
            }
        choice_sets = [
            list(itertools.product((False, True), repeat=len(space))) for space in spaces
        ]
        for bits_per_pred in itertools.product(*choice_sets):
            out.append(Structure(vocab, n, rels_for(bits_per_pred)))
    return out


def _degrees(A: Structure) -> list[int]:
    return [
        sum(1 for (a, b) in A.relations["E"] if a == v and b != v)
        for v in range(A.size)
    ]


def _is_symmetric_loopfree(A: Structure) -> bool:
    E = A.relations.get("E")
    if E is None:
        return False
    return all(a != b and (b, a) in E for (a, b) in E)


def _component_count(A: Structure) -> int:
    from .wqo import _components

    return len(_components(A))


def is_cycle_graph(A: Structure) -> bool:
    if not _is_symmetric_loopfree(A) or A.size < 3:
        return False
    return all(d == 2 for d in _degrees(A)) and _component_count(A) == 1


def is_path_graph(A: Structure) -> bool:
    if not _is_symmetric_loopfree(A):
        return False
    if A.size == 1:
        return not A.relations["E"]
    degs = _degrees(A)
    return (
        max(degs) <= 2
        and degs.count(1) == 2
        and _component_count(A) == 1
        and len(A.relations["E"]) == 2 * (A.size - 1)
    )


def is_path_union(A: Structure) -> bool:
    from .wqo import _components

    if not _is_symmetric_loopfree(A):
        return False
    for comp in _components(A):
        sub, _ = induced_substructure(A, comp)
        if not is_path_graph(sub):
            return False
    return True


def is_linear_order(A: Structure) -> bool:
    try:
        _order_positions(A)
        return True
    except (ValueError, KeyError):
        return False


def is_sigma_tree(A: Structure) -> bool:
    try:
        from_structure(A)
        return True
    except (ValueError, KeyError):
        return False


def is_sigma_word(A: Structure) -> bool:
    try:
        return from_structure(A).is_chain()
    except (ValueError, KeyError):
        return False


def is_paths_cycle_family(A: Structure) -> bool:
    """Member of the paths-plus-one-cycle example family."""
    from .wqo import _components, _is_cycle_component

    if not _is_symmetric_loopfree(A):
        return False
    comps = _components(A)
    cycles = [c for c in comps if _is_cycle_component(A, c)]
    if len(cycles) > 1:
        return False
    lengths: dict[int, int] = {}
    for comp in comps:
        if comp in cycles:
            continue
        sub, _ = induced_substructure(A, comp)
        if not is_path_graph(sub):
            return False
        lengths[sub.size - 1] = lengths.get(sub.size - 1, 0) + 1
    if not lengths:
        return False
    counts = set(lengths.values())
    if len(counts) != 1:
        return False
    n = counts.pop()
    if n < 1 or sorted(lengths) != list(range(3**n + 1)):
        return False
    if cycles and len(cycles[0]) != 3**n:
        return False
    return True


CLASS_TESTS = {
    "all": lambda A: True,
    "cycles": is_cycle_graph,
    "paths": is_path_graph,
    "path-unions": is_path_union,
    "linorders": is_linear_order,
    "words": is_sigma_word,
    "trees": is_sigma_tree,
    "paths-cycle-family": is_paths_cycle_family,
}

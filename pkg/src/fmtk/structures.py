"""Finite relational structures and the operations that combine them.

Elements of a structure are always the dense integers ``0 .. size-1``.
Operations that build new structures re-index deterministically:

* ``induced_substructure`` keeps the subset in increasing order and also
  returns the old->new renumbering map;
* ``disjoint_union`` (and ``bowtie``) place the left operand first, so the
  left block keeps its indices and the right block is shifted by ``|A|``;
* ``cartesian_product`` / ``tensor_product`` index pairs row-major:
  ``(a, b) -> a * |B| + b``.
"""

from __future__ import annotations

import itertools
import re
from dataclasses import dataclass

from .errors import StructureFormatError

_IDENT = re.compile(r"[A-Za-z_][A-Za-z0-9_]*\Z")


@dataclass(frozen=True)
class Vocabulary:
    """A finite relational signature: named predicates plus constant names."""

    predicates: tuple[tuple[str, int], ...]
    constants: tuple[str, ...] = ()

    def __post_init__(self):
        names = [n for n, _ in self.predicates] + list(self.constants)
        if len(set(names)) != len(names):
            raise ValueError(f"duplicate symbol names in vocabulary: {names}")
        for name in names:
            if not _IDENT.match(name):
                raise ValueError(f"symbol name is not an identifier: {name!r}")
        for name, arity in self.predicates:
            if arity < 1:
                raise ValueError(f"predicate {name} has non-positive arity {arity}")

    @staticmethod
    def make(predicates: dict[str, int], constants=()) -> "Vocabulary":
        return Vocabulary(tuple(sorted(predicates.items())), tuple(constants))

    def arity(self, name: str) -> int:
        for pred, arity in self.predicates:
            if pred == name:
                return arity
        raise KeyError(name)

    @property
    def predicate_names(self) -> tuple[str, ...]:
        return tuple(n for n, _ in self.predicates)

    def has_predicate(self, name: str) -> bool:
        return any(n == name for n, _ in self.predicates)

    def with_constants(self, names) -> "Vocabulary":
        return Vocabulary(self.predicates, self.constants + tuple(names))

    def with_predicate(self, name: str, arity: int) -> "Vocabulary":
        return Vocabulary(
            tuple(sorted(self.predicates + ((name, arity),))), self.constants
        )

    def drop_predicate(self, name: str) -> "Vocabulary":
        return Vocabulary(
            tuple(p for p in self.predicates if p[0] != name), self.constants
        )

    def fresh_name(self, base: str) -> str:
        name = base
        taken = set(self.predicate_names) | set(self.constants)
        while name in taken:
            name += "_"
        return name


class Structure:
    """A finite interpretation of a :class:`Vocabulary`.

    Immutable after construction; equality and hashing are by content, so
    structures can key caches and sets.
    """

    __slots__ = ("vocab", "size", "relations", "constant_interp", "_hash", "_rt_cache")

    def __init__(self, vocab: Vocabulary, size: int, relations=None, constant_interp=None):
        if size < 1:
            raise ValueError("structures must be nonempty")
        relations = dict(relations or {})
        constant_interp = dict(constant_interp or {})
        for name, _ in vocab.predicates:
            relations.setdefault(name, frozenset())
        for name, tuples in relations.items():
            arity = vocab.arity(name)  # raises on unknown predicate
            for t in tuples:
                if len(t) != arity:
                    raise ValueError(f"tuple {t} has wrong arity for {name}/{arity}")
                if not all(0 <= e < size for e in t):
                    raise ValueError(f"tuple {t} out of range for universe of size {size}")
        for c in vocab.constants:
            if c not in constant_interp:
                raise ValueError(f"constant {c} is not interpreted")
            if not 0 <= constant_interp[c] < size:
                raise ValueError(f"constant {c} interpreted outside the universe")
        for c in constant_interp:
            if c not in vocab.constants:
                raise ValueError(f"interpretation given for unknown constant {c}")
        object.__setattr__(self, "vocab", vocab)
        object.__setattr__(self, "size", size)
        object.__setattr__(
            self,
            "relations",
            {name: frozenset(map(tuple, tuples)) for name, tuples in relations.items()},
        )
        object.__setattr__(self, "constant_interp", constant_interp)
        object.__setattr__(self, "_hash", None)
        object.__setattr__(self, "_rt_cache", None)

    def __setattr__(self, *_):
        raise AttributeError("Structure is immutable")

    def _key(self):
        return (
            self.vocab,
            self.size,
            tuple(sorted((n, tuple(sorted(ts))) for n, ts in self.relations.items())),
            tuple(sorted(self.constant_interp.items())),
        )

    def __eq__(self, other):
        return isinstance(other, Structure) and self._key() == other._key()

    def __hash__(self):
        if self._hash is None:
            object.__setattr__(self, "_hash", hash(self._key()))
        return self._hash

    def __repr__(self):
        rels = ", ".join(f"{n}:{len(ts)}" for n, ts in sorted(self.relations.items()))
        return f"Structure(size={self.size}, {rels})"

    def holds(self, pred: str, t: tuple[int, ...]) -> bool:
        return t in self.relations[pred]

    def elements(self) -> range:
        return range(self.size)


@dataclass(frozen=True)
class MarkedStructure:
    """A structure with distinguished elements, ordered (constant view) or not
    (unary-predicate view)."""

    base: Structure
    marks: tuple[int, ...]
    ordered: bool = True

    def __post_init__(self):
        for e in self.marks:
            if not 0 <= e < self.base.size:
                raise ValueError(f"mark {e} outside the universe")
        if not self.ordered and len(set(self.marks)) != len(self.marks):
            raise ValueError("unordered marks must be distinct")

    def expand(self) -> Structure:
        """Encode the marks into the vocabulary.

        Ordered marks become fresh constants ``c1 .. ck``; unordered marks
        become a fresh unary predicate.
        """
        A = self.base
        if self.ordered:
            names = []
            vocab = A.vocab
            for i in range(len(self.marks)):
                name = vocab.fresh_name(f"c{i + 1}")
                vocab = vocab.with_constants([name])
                names.append(name)
            interp = dict(A.constant_interp)
            interp.update(zip(names, self.marks))
            return Structure(vocab, A.size, A.relations, interp)
        pred = A.vocab.fresh_name("R")
        vocab = A.vocab.with_predicate(pred, 1)
        rels = dict(A.relations)
        rels[pred] = frozenset((e,) for e in self.marks)
        return Structure(vocab, A.size, rels, A.constant_interp)

    def as_unordered(self) -> "MarkedStructure":
        return MarkedStructure(self.base, tuple(sorted(set(self.marks))), ordered=False)


def induced_substructure(A: Structure, subset) -> tuple[Structure, dict[int, int]]:
    """Restrict ``A`` to ``subset``; returns the restriction and the old->new map."""
    subset = sorted(set(subset))
    if not subset:
        raise ValueError("cannot induce on an empty subset")
    if not all(0 <= e < A.size for e in subset):
        raise ValueError("subset contains elements outside the universe")
    for c, e in A.constant_interp.items():
        if e not in subset:
            raise ValueError(f"subset drops the interpretation of constant {c}")
    renumber = {old: new for new, old in enumerate(subset)}
    keep = set(subset)
    relations = {
        name: frozenset(
            tuple(renumber[e] for e in t) for t in tuples if all(e in keep for e in t)
        )
        for name, tuples in A.relations.items()
    }
    consts = {c: renumber[e] for c, e in A.constant_interp.items()}
    return Structure(A.vocab, len(subset), relations, consts), renumber


def check_embedding_witness(A: Structure, B: Structure, mapping: dict[int, int]) -> bool:
    """True iff ``mapping`` embeds ``A`` into ``B`` as an induced substructure."""
    if A.vocab != B.vocab:
        return False
    if sorted(mapping) != list(range(A.size)):
        return False
    image = set(mapping.values())
    if len(image) != A.size or not all(0 <= b < B.size for b in image):
        return False
    for c in A.vocab.constants:
        if mapping[A.constant_interp[c]] != B.constant_interp[c]:
            return False
    for name, arity in A.vocab.predicates:
        rel_a, rel_b = A.relations[name], B.relations[name]
        for t in itertools.product(range(A.size), repeat=arity):
            if (t in rel_a) != (tuple(mapping[e] for e in t) in rel_b):
                return False
    return True


def _element_profile(A: Structure):
    """Per-element compatibility data used to order and prune the search."""
    profile = []
    for e in range(A.size):
        unary = []
        diag = []
        counts = []
        for name, arity in A.vocab.predicates:
            rel = A.relations[name]
            if arity == 1:
                unary.append((e,) in rel)
            diag.append((e,) * arity in rel)
            counts.append(sum(1 for t in rel if e in t))
        profile.append((tuple(unary), tuple(diag), tuple(counts)))
    return profile


def find_embedding(A: Structure, B: Structure) -> dict[int, int] | None:
    """Search for an isomorphism of ``A`` onto an induced substructure of ``B``.

    Backtracking over candidate targets, most-constrained source elements
    first; candidate order is deterministic. Returns the element map, or
    ``None`` after the search space is exhausted.
    """
    if A.vocab != B.vocab:
        raise ValueError("embedding requires identical vocabularies")
    if A.size > B.size:
        return None

    mapping: dict[int, int] = {}
    used: set[int] = set()
    for c in A.vocab.constants:
        a, b = A.constant_interp[c], B.constant_interp[c]
        if a in mapping:
            if mapping[a] != b:
                return None
            continue
        if b in used:
            return None
        mapping[a] = b
        used.add(b)

    prof_a, prof_b = _element_profile(A), _element_profile(B)
    binary = [(name, A.relations[name], B.relations[name])
              for name, arity in A.vocab.predicates if arity == 2]
    wide = [(name, arity, A.relations[name], B.relations[name])
            for name, arity in A.vocab.predicates if arity > 2]

    def consistent(a: int, b: int) -> bool:
        ua, da, ca = prof_a[a]
        ub, db, cb = prof_b[b]
        if ua != ub or da != db:
            return False
        if any(x > y for x, y in zip(ca, cb)):
            return False
        for _, rel_a, rel_b in binary:
            for x, y in mapping.items():
                if x == a:
                    continue
                if ((a, x) in rel_a) != ((b, y) in rel_b):
                    return False
                if ((x, a) in rel_a) != ((y, b) in rel_b):
                    return False
        if wide:
            domain = list(mapping) + [a]
            for _, arity, rel_a, rel_b in wide:
                for t in itertools.product(domain, repeat=arity):
                    if a not in t:
                        continue
                    img = tuple(b if e == a else mapping[e] for e in t)
                    if (t in rel_a) != (img in rel_b):
                        return False
        return True

    order = sorted(
        (e for e in range(A.size) if e not in mapping),
        key=lambda e: (-sum(prof_a[e][2]), e),
    )

    def extend(i: int) -> bool:
        if i == len(order):
            return True
        a = order[i]
        for b in range(B.size):
            if b in used:
                continue
            if not consistent(a, b):
                continue
            mapping[a] = b
            used.add(b)
            if extend(i + 1):
                return True
            del mapping[a]
            used.remove(b)
        return False

    if not _partial_map_respects_relations(mapping, A, B):
        return None
    return dict(mapping) if extend(0) else None


def _partial_map_respects_relations(mapping: dict[int, int], A: Structure, B: Structure) -> bool:
    # validates the pre-assigned (constant) part before the search starts
    for name, arity in A.vocab.predicates:
        rel_a, rel_b = A.relations[name], B.relations[name]
        for t in itertools.product(list(mapping), repeat=arity):
            if (t in rel_a) != (tuple(mapping[e] for e in t) in rel_b):
                return False
    return True


def is_isomorphic(A: Structure, B: Structure) -> bool:
    """Same size plus an induced embedding; a bijective induced embedding is an
    isomorphism."""
    if A.vocab != B.vocab or A.size != B.size:
        return False
    return find_embedding(A, B) is not None


def _require_constant_free(*structures: Structure):
    for s in structures:
        if s.vocab.constants:
            raise ValueError("this operation is defined for constant-free vocabularies")


def _require_same_vocab(A: Structure, B: Structure):
    if A.vocab != B.vocab:
        raise ValueError("operands must share a vocabulary")


def disjoint_union(A: Structure, B: Structure) -> Structure:
    """Side-by-side copies; no tuple mixing elements of both blocks holds."""
    _require_same_vocab(A, B)
    _require_constant_free(A, B)
    shift = A.size
    relations = {
        name: A.relations[name]
        | frozenset(tuple(e + shift for e in t) for t in B.relations[name])
        for name, _ in A.vocab.predicates
    }
    return Structure(A.vocab, A.size + B.size, relations)


def complement(A: Structure) -> Structure:
    """Flip membership of every full tuple over the universe, per predicate."""
    _require_constant_free(A)
    relations = {
        name: frozenset(
            t
            for t in itertools.product(range(A.size), repeat=arity)
            if t not in A.relations[name]
        )
        for name, arity in A.vocab.predicates
    }
    return Structure(A.vocab, A.size, relations)


def cartesian_product(A: Structure, B: Structure) -> Structure:
    """Pairs; a tuple holds iff one coordinate is constant and the other holds."""
    _require_same_vocab(A, B)
    _require_constant_free(A, B)
    nb = B.size
    relations = {}
    for name, arity in A.vocab.predicates:
        rel_a, rel_b = A.relations[name], B.relations[name]
        tuples = set()
        for pairs in itertools.product(
            itertools.product(range(A.size), range(nb)), repeat=arity
        ):
            firsts = tuple(p[0] for p in pairs)
            seconds = tuple(p[1] for p in pairs)
            if (len(set(firsts)) == 1 and seconds in rel_b) or (
                firsts in rel_a and len(set(seconds)) == 1
            ):
                tuples.add(tuple(p[0] * nb + p[1] for p in pairs))
        relations[name] = frozenset(tuples)
    return Structure(A.vocab, A.size * nb, relations)


def tensor_product(A: Structure, B: Structure) -> Structure:
    """Pairs; a tuple holds iff it holds coordinate-wise in both factors."""
    _require_same_vocab(A, B)
    _require_constant_free(A, B)
    nb = B.size
    relations = {}
    for name, arity in A.vocab.predicates:
        rel_a, rel_b = A.relations[name], B.relations[name]
        tuples = set()
        for ta in rel_a:
            for tb in rel_b:
                tuples.add(tuple(a * nb + b for a, b in zip(ta, tb)))
        relations[name] = frozenset(tuples)
    return Structure(A.vocab, A.size * nb, relations)


def bowtie(A: Structure, B: Structure) -> Structure:
    """The union-complement dual: ``!((!A) | (!B))`` with ``|`` disjoint union."""
    return complement(disjoint_union(complement(A), complement(B)))


ORDER_PRED = "le"


def word_of_structures(parts: list[Structure]) -> Structure:
    """Concatenate the parts into one structure ordered by a block pre-order.

    Within a block the order holds both ways; across blocks it follows the
    sequence. Tuples of the original predicates never mix blocks.
    """
    if not parts:
        raise ValueError("a word needs at least one part")
    vocab = parts[0].vocab
    for p in parts:
        _require_same_vocab(parts[0], p)
    _require_constant_free(*parts)
    if vocab.has_predicate(ORDER_PRED):
        raise ValueError(f"vocabulary already uses the order predicate {ORDER_PRED!r}")
    # chain shape: block i is the parent of block i+1
    shape = {i: (None if i == 0 else i - 1) for i in range(len(parts))}
    return tree_of_structures(shape, parts)


def tree_of_structures(shape: dict[int, int | None], parts: list[Structure]) -> Structure:
    """Arrange the parts along a rooted block tree.

    ``shape`` maps each block index to its parent block (one root maps to
    ``None``). The order predicate relates every element of a block to every
    element of the same block or of a descendant block.
    """
    if not parts:
        raise ValueError("a tree needs at least one part")
    if sorted(shape) != list(range(len(parts))):
        raise ValueError("shape must give a parent for every block index")
    vocab = parts[0].vocab
    for p in parts:
        _require_same_vocab(parts[0], p)
    _require_constant_free(*parts)
    if vocab.has_predicate(ORDER_PRED):
        raise ValueError(f"vocabulary already uses the order predicate {ORDER_PRED!r}")

    roots = [i for i, p in shape.items() if p is None]
    if len(roots) != 1:
        raise ValueError("shape must have exactly one root block")
    ancestors: dict[int, set[int]] = {}
    for i in shape:
        chain = set()
        j: int | None = i
        while j is not None:
            if j in chain:
                raise ValueError("shape contains a cycle")
            chain.add(j)
            j = shape[j]
        ancestors[i] = chain

    offsets = []
    total = 0
    for p in parts:
        offsets.append(total)
        total += p.size

    new_vocab = vocab.with_predicate(ORDER_PRED, 2)
    relations = {name: set() for name, _ in new_vocab.predicates}
    for i, p in enumerate(parts):
        off = offsets[i]
        for name, _ in vocab.predicates:
            for t in p.relations[name]:
                relations[name].add(tuple(e + off for e in t))
    for i in range(len(parts)):
        for j in range(len(parts)):
            if i not in ancestors[j]:  # i must be an ancestor of j, or i == j
                continue
            # i == j puts the whole block in both directions: a block pre-order
            for a in range(parts[i].size):
                for b in range(parts[j].size):
                    relations[ORDER_PRED].add((a + offsets[i], b + offsets[j]))
    return Structure(
        new_vocab, total, {n: frozenset(ts) for n, ts in relations.items()}
    )


def block_offsets(parts: list[Structure]) -> list[int]:
    """Starting index of each block inside ``word_of_structures``/``tree_of_structures``."""
    offsets, total = [], 0
    for p in parts:
        offsets.append(total)
        total += p.size
    return offsets


# ---------------------------------------------------------------------------
# text format


def serialize_structure(name: str, A: Structure) -> str:
    lines = [f"structure {name}"]
    lines.append(
        "vocab: " + ", ".join(f"{n}/{a}" for n, a in A.vocab.predicates)
    )
    lines.append(f"universe: {A.size}")
    for pred, _ in A.vocab.predicates:
        tuples = " ".join(
            "(" + ",".join(map(str, t)) + ")" for t in sorted(A.relations[pred])
        )
        lines.append(f"{pred}: {tuples}".rstrip())
    for c in A.vocab.constants:
        lines.append(f"const {c} = {A.constant_interp[c]}")
    return "\n".join(lines) + "\n"


def serialize_structures(named: dict[str, Structure]) -> str:
    return "\n".join(serialize_structure(n, A) for n, A in named.items())


def parse_structures(text: str) -> dict[str, Structure]:
    """Parse the block text format; returns structures keyed by name, in order."""
    result: dict[str, Structure] = {}
    name = None
    vocab: Vocabulary | None = None
    size = None
    relations: dict[str, set] = {}
    consts: dict[str, int] = {}

    def flush():
        nonlocal name, vocab, size, relations, consts
        if name is None:
            return
        if vocab is None or size is None:
            raise StructureFormatError(f"structure {name} is missing vocab or universe")
        if consts:
            vocab = vocab.with_constants(sorted(consts))
        result[name] = Structure(vocab, size, relations, consts)
        name, vocab, size, relations, consts = None, None, None, {}, {}

    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        try:
            if line.startswith("structure "):
                flush()
                name = line.split(None, 1)[1].strip()
                if name in result:
                    raise StructureFormatError(f"duplicate structure name {name!r}")
            elif line.startswith("vocab:"):
                preds = {}
                for item in line[len("vocab:"):].split(","):
                    item = item.strip()
                    if not item:
                        continue
                    pred, arity = item.split("/")
                    preds[pred.strip()] = int(arity)
                vocab = Vocabulary.make(preds)
            elif line.startswith("universe:"):
                size = int(line[len("universe:"):].strip())
            elif line.startswith("const "):
                lhs, rhs = line[len("const "):].split("=")
                consts[lhs.strip()] = int(rhs)
            else:
                pred, rest = line.split(":", 1)
                pred = pred.strip()
                tuples = set()
                for chunk in rest.split():
                    if not (chunk.startswith("(") and chunk.endswith(")")):
                        raise StructureFormatError(f"bad tuple {chunk!r}")
                    inner = chunk[1:-1]
                    tuples.add(tuple(int(x) for x in inner.split(",") if x != ""))
                relations[pred] = tuples
        except StructureFormatError:
            raise
        except Exception as exc:
            raise StructureFormatError(f"line {lineno}: {raw.strip()!r}: {exc}") from exc
    flush()
    if not result:
        raise StructureFormatError("no structures in input")
    return result

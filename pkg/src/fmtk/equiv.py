"""Deciding bounded-quantifier-rank equivalence of finite structures.

Two routes are provided on purpose: canonical back-and-forth rank types
(memoized, the workhorse) and an explicit game search over the move tree
(slow, independent, used to cross-check the rank types).
"""

from __future__ import annotations

import hashlib
import itertools
from dataclasses import dataclass, field

from .structures import Structure


@dataclass(frozen=True)
class RankType:
    """Canonical back-and-forth signature of ``(structure, tuple)`` at a rank.

    ``key`` is a canonical nested tuple: at rank 0 the atomic facts over the
    constants and the tuple, above that the duplicate-free sorted tuple of the
    one-element-extension keys one rank down. Two positions get equal keys
    exactly when the duplicator survives that many rounds between them.
    """

    rank: int
    key: tuple

    @property
    def fingerprint(self) -> str:
        digest = hashlib.sha256(repr((self.rank, self.key)).encode()).hexdigest()
        return digest[:16]


def _atomic_key(A: Structure, points: tuple[int, ...]) -> tuple:
    eq_bits = 0
    bit = 1
    for i in range(len(points)):
        for j in range(i + 1, len(points)):
            if points[i] == points[j]:
                eq_bits |= bit
            bit <<= 1
    masks = []
    for name, arity in A.vocab.predicates:
        rel = A.relations[name]
        mask = 0
        bit = 1
        for combo in itertools.product(points, repeat=arity):
            if combo in rel:
                mask |= bit
            bit <<= 1
        masks.append(mask)
    return (len(points), eq_bits, tuple(masks))


def rank_type(A: Structure, tup: tuple[int, ...] = (), m: int = 0) -> RankType:
    """Rank-``m`` type of ``tup`` in ``A``; memoized on the structure."""
    for e in tup:
        if not 0 <= e < A.size:
            raise ValueError(f"tuple component {e} outside the universe")
    if A._rt_cache is None:
        object.__setattr__(A, "_rt_cache", {})
    cache = A._rt_cache
    consts = tuple(A.constant_interp[c] for c in sorted(A.constant_interp))

    def rec(t: tuple[int, ...], r: int) -> tuple:
        hit = cache.get((t, r))
        if hit is not None:
            return hit
        if r == 0:
            key = _atomic_key(A, consts + t)
        else:
            key = tuple(sorted({rec(t + (b,), r - 1) for b in range(A.size)}))
        cache[(t, r)] = key
        return key

    return RankType(m, rec(tuple(tup), m))


def m_equivalent(A: Structure, B: Structure, m: int) -> bool:
    """Agreement on every sentence of quantifier rank at most ``m``."""
    if A.vocab != B.vocab:
        raise ValueError("equivalence requires identical vocabularies")
    return rank_type(A, (), m) == rank_type(B, (), m)


def marked_equivalent(A: Structure, ta: tuple[int, ...], B: Structure, tb: tuple[int, ...], m: int) -> bool:
    if A.vocab != B.vocab:
        raise ValueError("equivalence requires identical vocabularies")
    if len(ta) != len(tb):
        raise ValueError("distinguished tuples must have equal length")
    return rank_type(A, ta, m) == rank_type(B, tb, m)


# ---------------------------------------------------------------------------
# explicit game search (independent oracle)


def ef_game_equivalent(A: Structure, B: Structure, m: int) -> bool:
    """Direct minimax over the ``m``-round game tree; no rank-type sharing.

    The challenger picks an element on either side each round, the matcher
    answers on the other side; the matcher survives iff the chosen pairs
    (together with the constants) always form a partial isomorphism.
    """
    if A.vocab != B.vocab:
        raise ValueError("equivalence requires identical vocabularies")

    consts_a = tuple(A.constant_interp[c] for c in sorted(A.constant_interp))
    consts_b = tuple(B.constant_interp[c] for c in sorted(B.constant_interp))
    preds = [(name, arity, A.relations[name], B.relations[name])
             for name, arity in A.vocab.predicates]

    def extension_ok(xs: tuple[int, ...], ys: tuple[int, ...], a: int, b: int) -> bool:
        # xs -> ys extended with a -> b stays a partial isomorphism
        for x, y in zip(xs, ys):
            if (x == a) != (y == b):
                return False
        pool = xs + (a,)
        image = ys + (b,)
        for name, arity, rel_a, rel_b in preds:
            for combo in itertools.product(range(len(pool)), repeat=arity):
                if len(pool) - 1 not in combo:
                    continue  # only facts involving the new pair
                ta = tuple(pool[i] for i in combo)
                tb = tuple(image[i] for i in combo)
                if (ta in rel_a) != (tb in rel_b):
                    return False
        return True

    def initial_ok() -> bool:
        xs: tuple[int, ...] = ()
        ys: tuple[int, ...] = ()
        for a, b in zip(consts_a, consts_b):
            if not extension_ok(xs, ys, a, b):
                return False
            xs += (a,)
            ys += (b,)
        return True

    def matcher_wins(xs: tuple[int, ...], ys: tuple[int, ...], rounds: int) -> bool:
        if rounds == 0:
            return True
        for a in range(A.size):
            if not any(
                extension_ok(xs, ys, a, b) and matcher_wins(xs + (a,), ys + (b,), rounds - 1)
                for b in range(B.size)
            ):
                return False
        for b in range(B.size):
            if not any(
                extension_ok(xs, ys, a, b) and matcher_wins(xs + (a,), ys + (b,), rounds - 1)
                for a in range(A.size)
            ):
                return False
        return True

    if not initial_ok():
        return False
    return matcher_wins(consts_a, consts_b, m)


# ---------------------------------------------------------------------------
# realized classes


@dataclass
class Partition:
    """Grouping of ``(structure, tuple)`` items by rank type."""

    classes: list[list[int]] = field(default_factory=list)
    fingerprints: list[str] = field(default_factory=list)

    def class_count(self) -> int:
        return len(self.classes)


def realized_classes(items: list[tuple[Structure, tuple[int, ...]]], m: int) -> Partition:
    """Partition the items by their rank-``m`` types.

    Only classes realized among the given items are materialized; the global
    class set for a vocabulary is never enumerated.
    """
    by_key: dict[tuple, list[int]] = {}
    fingerprints: dict[tuple, str] = {}
    for idx, (A, tup) in enumerate(items):
        rt = rank_type(A, tup, m)
        by_key.setdefault(rt.key, []).append(idx)
        fingerprints.setdefault(rt.key, rt.fingerprint)
    ordered = sorted(by_key, key=lambda k: by_key[k][0])
    return Partition(
        classes=[by_key[k] for k in ordered],
        fingerprints=[fingerprints[k] for k in ordered],
    )


def class_fingerprint(A: Structure, tup: tuple[int, ...] = (), m: int = 0) -> str:
    """Stable hex fingerprint of the rank type, for logs and reports."""
    return rank_type(A, tup, m).fingerprint

"""Shrinking labeled words and trees to small equivalent sub-models.

A tree is a finite poset with one minimal element in which the predecessors
of any element form a chain; a word is the chain special case. Every reducer
returns an induced sub-poset of its input over the *original node ids*, so
marks stay valid across phases and containment is directly checkable; use
:meth:`SigmaTree.renumbered` for a dense copy.
"""

from __future__ import annotations

from dataclasses import dataclass, field

from .equiv import rank_type
from .errors import StructureFormatError, VerificationFailed
from .structures import ORDER_PRED, Structure, Vocabulary


def label_predicate(letter: str) -> str:
    return f"Q_{letter}"


class SigmaTree:
    """Finite rooted tree with letter labels; node ids are arbitrary ints."""

    __slots__ = ("nodes", "parent", "label", "alphabet", "_children", "_depth")

    def __init__(self, parent: dict[int, int | None], label: dict[int, str], alphabet=None):
        nodes = tuple(sorted(parent))
        if not nodes:
            raise ValueError("trees are nonempty")
        if sorted(label) != list(nodes):
            raise ValueError("labels must cover exactly the nodes")
        roots = [v for v, p in parent.items() if p is None]
        if len(roots) != 1:
            raise ValueError("a tree has exactly one root")
        for v, p in parent.items():
            if p is not None and p not in parent:
                raise ValueError(f"parent of {v} is not a node")
        if alphabet is None:
            alphabet = tuple(sorted(set(label.values())))
        else:
            alphabet = tuple(alphabet)
            if not set(label.values()) <= set(alphabet):
                raise ValueError("labels must come from the alphabet")
        self.nodes = nodes
        self.parent = dict(parent)
        self.label = dict(label)
        self.alphabet = alphabet
        children: dict[int, list[int]] = {v: [] for v in nodes}
        for v in nodes:
            p = self.parent[v]
            if p is not None:
                children[p].append(v)
        self._children = {v: tuple(sorted(cs)) for v, cs in children.items()}
        depth: dict[int, int] = {}
        for v in nodes:
            chain = []
            u: int | None = v
            while u is not None and u not in depth:
                chain.append(u)
                u = self.parent[u]
                if len(chain) > len(nodes):
                    raise ValueError("parent map contains a cycle")
            base = 0 if u is None else depth[u] + 1
            for w in reversed(chain):
                depth[w] = base
                base += 1
        self._depth = depth

    @property
    def size(self) -> int:
        return len(self.nodes)

    @property
    def root(self) -> int:
        return next(v for v, p in self.parent.items() if p is None)

    def children(self, v: int) -> tuple[int, ...]:
        return self._children[v]

    def depth(self, v: int) -> int:
        return self._depth[v]

    def height(self) -> int:
        return max(self._depth.values())

    def ancestors(self, v: int):
        """Strict ancestors, nearest first."""
        p = self.parent[v]
        while p is not None:
            yield p
            p = self.parent[p]

    def leq(self, a: int, b: int) -> bool:
        """Ancestor-or-equal order."""
        return a == b or a in set(self.ancestors(b))

    def descendants(self, v: int) -> frozenset[int]:
        out = {v}
        stack = [v]
        while stack:
            u = stack.pop()
            for c in self._children[u]:
                out.add(c)
                stack.append(c)
        return frozenset(out)

    def path_down(self, a: int, b: int) -> list[int]:
        """The chain from ancestor ``a`` down to ``b``, inclusive."""
        chain = [b]
        u = b
        while u != a:
            u = self.parent[u]
            if u is None:
                raise ValueError(f"{a} is not an ancestor of {b}")
            chain.append(u)
        return chain[::-1]

    def induced(self, keep) -> "SigmaTree":
        """Sub-poset on ``keep``: each kept node hangs under its nearest kept
        ancestor. ``keep`` must contain a common ancestor of all its nodes."""
        keep = set(keep)
        if not keep <= set(self.nodes):
            raise ValueError("keep set contains unknown nodes")
        parent: dict[int, int | None] = {}
        for v in keep:
            p = self.parent[v]
            while p is not None and p not in keep:
                p = self.parent[p]
            parent[v] = p
        return SigmaTree(parent, {v: self.label[v] for v in keep}, self.alphabet)

    def renumbered(self) -> tuple["SigmaTree", dict[int, int]]:
        """Dense copy with nodes ``0 .. n-1``; also returns the old->new map."""
        renum = {old: new for new, old in enumerate(self.nodes)}
        parent = {
            renum[v]: (None if p is None else renum[p]) for v, p in self.parent.items()
        }
        label = {renum[v]: letter for v, letter in self.label.items()}
        return SigmaTree(parent, label, self.alphabet), renum

    def is_chain(self) -> bool:
        return all(len(cs) <= 1 for cs in self._children.values())

    def __eq__(self, other):
        return (
            isinstance(other, SigmaTree)
            and self.parent == other.parent
            and self.label == other.label
            and self.alphabet == other.alphabet
        )

    def __hash__(self):
        return hash(
            (tuple(sorted(self.parent.items())), tuple(sorted(self.label.items())))
        )

    def __repr__(self):
        return f"SigmaTree(size={self.size}, height={self.height()})"


def make_word(letters, alphabet=None) -> SigmaTree:
    """Chain tree from a letter sequence; positions are ``1 .. len(letters)``."""
    letters = list(letters)
    if not letters:
        raise ValueError("words are nonempty")
    parent = {i + 1: (None if i == 0 else i) for i in range(len(letters))}
    label = {i + 1: letters[i] for i in range(len(letters))}
    return SigmaTree(parent, label, alphabet)


def word_letters(w: SigmaTree) -> list[str]:
    if not w.is_chain():
        raise ValueError("not a word")
    order = sorted(w.nodes, key=w.depth)
    return [w.label[v] for v in order]


def to_structure(t: SigmaTree) -> tuple[Structure, dict[int, int]]:
    """Relational encoding: reflexive ancestor order plus one unary predicate
    per letter. Returns the structure and the node->element map."""
    renum = {v: i for i, v in enumerate(t.nodes)}
    vocab = Vocabulary.make(
        {ORDER_PRED: 2, **{label_predicate(a): 1 for a in t.alphabet}}
    )
    le = set()
    for v in t.nodes:
        le.add((renum[v], renum[v]))
        for u in t.ancestors(v):
            le.add((renum[u], renum[v]))
    rels = {label_predicate(a): set() for a in t.alphabet}
    for v in t.nodes:
        rels[label_predicate(t.label[v])].add((renum[v],))
    rels[ORDER_PRED] = le
    return Structure(vocab, len(t.nodes), rels), renum


def from_structure(S: Structure) -> SigmaTree:
    """Decode :func:`to_structure` output; validates the poset-tree axioms."""
    if not S.vocab.has_predicate(ORDER_PRED):
        raise ValueError(f"expected an order predicate {ORDER_PRED!r}")
    le = S.relations[ORDER_PRED]
    letters = {}
    alphabet = []
    for name, arity in S.vocab.predicates:
        if name == ORDER_PRED:
            continue
        if arity != 1 or not name.startswith("Q_"):
            raise ValueError(f"unexpected predicate {name}")
        alphabet.append(name[2:])
        for (v,) in S.relations[name]:
            if v in letters:
                raise ValueError(f"element {v} carries two labels")
            letters[v] = name[2:]
    if sorted(letters) != list(range(S.size)):
        raise ValueError("labels must partition the universe")
    for v in range(S.size):
        if (v, v) not in le:
            raise ValueError("order must be reflexive")
    parent: dict[int, int | None] = {}
    for v in range(S.size):
        above = [u for u in range(S.size) if u != v and (u, v) in le]
        for a in above:
            for b in above:
                if (a, b) not in le and (b, a) not in le:
                    raise ValueError("predecessors of an element must form a chain")
        if not above:
            parent[v] = None
            continue
        parent[v] = max(above, key=lambda u: sum(1 for w in above if (w, u) in le))
    t = SigmaTree(parent, letters, tuple(sorted(alphabet)))
    check, _ = to_structure(t)
    if check.relations[ORDER_PRED] != frozenset(le):
        raise ValueError("order is not the ancestor order of a tree")
    return t


def join_at(s: SigmaTree, e: int, graft: "SigmaTree | list[SigmaTree]") -> SigmaTree:
    """Hang ``graft`` (a tree, or a forest joined in sequence) below node ``e``."""
    if e not in s.parent:
        raise ValueError(f"{e} is not a node of the host tree")
    grafts = graft if isinstance(graft, list) else [graft]
    parent = dict(s.parent)
    label = dict(s.label)
    alphabet = set(s.alphabet)
    offset = max(parent) + 1
    for t in grafts:
        renum = {old: offset + i for i, old in enumerate(t.nodes)}
        offset += len(t.nodes)
        for v in t.nodes:
            p = t.parent[v]
            parent[renum[v]] = e if p is None else renum[p]
            label[renum[v]] = t.label[v]
        alphabet |= set(t.alphabet)
    return SigmaTree(parent, label, tuple(sorted(alphabet)))


def is_subtree(t: SigmaTree, s: SigmaTree) -> bool:
    """Node subset with the induced order and labels."""
    if not set(t.nodes) <= set(s.nodes):
        return False
    if any(t.label[v] != s.label[v] for v in t.nodes):
        return False
    return all(
        t.leq(a, b) == s.leq(a, b) for a in t.nodes for b in t.nodes
    )


# ---------------------------------------------------------------------------
# realized-class bookkeeping


class TreeClasses:
    """Rank-type fingerprints of sub-posets of one base tree, cached by node set.

    Any subtree of a subtree of the base induces the same order as the base
    restricted to its nodes, so one cache serves a whole shrink pipeline.
    """

    def __init__(self, base: SigmaTree, m: int):
        self.base = base
        self.m = m
        self._cache: dict[tuple[frozenset[int], tuple[int, ...]], tuple] = {}

    def of(self, nodes: frozenset[int], marks: tuple[int, ...] = ()) -> tuple:
        key = (nodes, tuple(marks))
        hit = self._cache.get(key)
        if hit is None:
            sub = self.base.induced(nodes)
            S, renum = to_structure(sub)
            hit = rank_type(S, tuple(renum[v] for v in marks), self.m).key
            self._cache[key] = hit
        return hit


def trees_equivalent(t1: SigmaTree, t2: SigmaTree, m: int,
                     marks1: tuple[int, ...] = (), marks2: tuple[int, ...] = ()) -> bool:
    """Rank-``m`` equivalence of two labeled trees, optionally with marks."""
    alphabet = tuple(sorted(set(t1.alphabet) | set(t2.alphabet)))
    a = SigmaTree(t1.parent, t1.label, alphabet)
    b = SigmaTree(t2.parent, t2.label, alphabet)
    Sa, ra = to_structure(a)
    Sb, rb = to_structure(b)
    ta = tuple(ra[v] for v in marks1)
    tb = tuple(rb[v] for v in marks2)
    return rank_type(Sa, ta, m) == rank_type(Sb, tb, m)


# ---------------------------------------------------------------------------
# reducers


def reduce_degree(s: SigmaTree, W, m: int, k: int,
                  classes: TreeClasses | None = None) -> SigmaTree:
    """Keep at most ``m + k`` children per realized subtree class under every
    node; mark-covering children are always among the kept."""
    W = set(W)
    if len(W) > k:
        raise ValueError(f"|W| = {len(W)} exceeds k = {k}")
    if not W <= set(s.nodes):
        raise ValueError("marks must be nodes")
    classes = classes or TreeClasses(s, m)
    cap = m + k
    kept = set(s.nodes)
    for a in sorted(s.nodes, key=lambda v: (-s.depth(v), v)):
        if a not in kept:
            continue
        groups: dict[tuple, list[int]] = {}
        for b in s.children(a):
            if b not in kept:
                continue
            sub = frozenset(s.descendants(b) & kept)
            groups.setdefault(classes.of(sub), []).append(b)
        for members in groups.values():
            if len(members) <= cap:
                continue
            members.sort(
                key=lambda b: (
                    not (s.descendants(b) & W),
                    len(s.descendants(b) & kept),
                    b,
                )
            )
            for b in members[cap:]:
                if s.descendants(b) & W:
                    raise AssertionError("mark-covering child ranked past the cap")
                kept -= s.descendants(b) & kept
    return s.induced(kept)


def reduce_height_no_W(s: SigmaTree, m: int,
                       classes: TreeClasses | None = None) -> SigmaTree:
    """Splice out ancestor/descendant pairs whose subtrees realize the same
    class, until no root-to-leaf path repeats a class."""
    classes = classes or TreeClasses(s, m)
    cur = s
    while True:
        fp = {v: classes.of(cur.descendants(v)) for v in cur.nodes}
        best: tuple | None = None  # (-depth_b, b, depth_a, a)
        for b in cur.nodes:
            for a in cur.ancestors(b):
                if fp[a] == fp[b]:
                    cand = (-cur.depth(b), b, cur.depth(a), a)
                    if best is None or cand < best:
                        best = cand
        if best is None:
            return cur
        _, b, _, a = best
        if a == cur.root:
            kept = set(cur.descendants(b))
        else:
            kept = (set(cur.nodes) - cur.descendants(a)) | cur.descendants(b)
        cur = cur.induced(kept)


def shrink_word(w: SigmaTree, m: int) -> SigmaTree:
    """Subword equivalent at rank ``m``: the chain case of height reduction."""
    if not w.is_chain():
        raise ValueError("expected a word (chain-shaped tree)")
    return reduce_height_no_W(w, m)


def _flagged_word_class(letters: list[tuple[tuple, int]], m: int, vocab_letters) -> tuple:
    """Rank type of a chain whose letters are (class-key, flag) pairs."""
    names = {letter: f"p{idx}" for idx, letter in enumerate(sorted(vocab_letters))}
    word = make_word([names[x] for x in letters], tuple(sorted(names.values())))
    S, _ = to_structure(word)
    return rank_type(S, (), m).key


def reduce_root_distance(s: SigmaTree, b: int, m: int,
                         classes: TreeClasses | None = None) -> SigmaTree:
    """Pull ``b`` closer to the root while preserving the marked class of
    ``(tree, b)``: the root-to-``b`` path is decomposed into hanging segments,
    and the segment word is shrunk with its end letters pinned."""
    if b not in s.parent:
        raise ValueError(f"{b} is not a node")
    classes = classes or TreeClasses(s, m)
    cur = s
    while True:
        a = cur.root
        if b == a:
            return cur
        path = cur.path_down(a, b)
        n = len(path) - 1
        zsets = []
        for i in range(n):
            zsets.append(cur.descendants(path[i]) - cur.descendants(path[i + 1]))
        zsets.append(cur.descendants(b))
        letters = [(classes.of(z), 0) for z in zsets]
        letters[0] = (letters[0][0], 1)
        letters[-1] = (letters[-1][0], 2)
        vocab_letters = set(letters)

        def suffix_class(p: int) -> tuple:
            return _flagged_word_class(letters[p:], m, vocab_letters)

        suffix = {p: suffix_class(p) for p in range(len(letters))}
        best: tuple | None = None  # (-q, q, p)
        for q in range(2, len(letters)):
            for p in range(1, q):
                if suffix[p] == suffix[q]:
                    cand = (-q, q, p)
                    if best is None or cand < best:
                        best = cand
        if best is None:
            return cur
        _, q, p = best
        removed = set().union(*zsets[p:q])
        cur = cur.induced(set(cur.nodes) - removed)


def _consecutive_mark_pairs(t: SigmaTree, W: set[int]) -> list[tuple[int, int]]:
    pairs = []
    for b in sorted(W):
        between = None
        for u in t.ancestors(b):
            if u in W:
                between = u
                break
        if between is not None:
            pairs.append((between, b))
    return sorted(pairs)


def reduce_W_distances(s: SigmaTree, W, m: int,
                       classes: TreeClasses | None = None) -> SigmaTree:
    """Shorten the mark-free stretches between order-consecutive marks until
    no stretch can be reduced further."""
    W = set(W)
    if not W <= set(s.nodes):
        raise ValueError("marks must be nodes")
    classes = classes or TreeClasses(s, m)
    cur = s
    changed = True
    while changed:
        changed = False
        for a, b in _consecutive_mark_pairs(cur, W):
            path = cur.path_down(a, b)
            n = len(path) - 1
            zsets = []
            for i in range(n):
                zsets.append(cur.descendants(path[i]) - cur.descendants(path[i + 1]))
            zsets.append(cur.descendants(b))
            carrying = [i for i, z in enumerate(zsets) if z & W]
            for i_prev, i_next in zip(carrying, carrying[1:]):
                if i_next - i_prev < 2:
                    continue
                zset = cur.descendants(path[i_prev + 1]) - cur.descendants(path[i_next])
                ztree = cur.induced(zset)
                target = path[i_next - 1]
                reduced = reduce_root_distance(ztree, target, m, classes)
                if set(reduced.nodes) != zset:
                    cur = cur.induced(set(cur.nodes) - (zset - set(reduced.nodes)))
                    changed = True
                    break
            if changed:
                break
    return cur


@dataclass
class ShrinkReport:
    """Per-run log of a shrink pipeline with its verification verdicts."""

    input_size: int
    output_size: int
    phases: list[tuple[str, int, int]] = field(default_factory=list)
    verdicts: dict[str, bool] = field(default_factory=dict)

    def ok(self) -> bool:
        return all(self.verdicts.values())


def shrink_tree(s: SigmaTree, W, m: int, k: int) -> tuple[SigmaTree, ShrinkReport]:
    """Full pipeline: shorten mark distances, squash mark-free hanging
    subtrees, bound per-class degrees; every postcondition is re-verified.

    Raises :class:`VerificationFailed` (with the report attached) if any of
    containment / subtree / equivalence fails. The output contains ``W``.
    """
    W = set(W)
    if len(W) > k:
        raise ValueError(f"|W| = {len(W)} exceeds k = {k}")
    if not W <= set(s.nodes):
        raise ValueError("marks must be nodes")
    classes = TreeClasses(s, m)
    phases: list[tuple[str, int, int]] = []

    w1 = W | {s.root}
    t1 = reduce_W_distances(s, w1, m, classes)
    phases.append(("mark-distances", s.size, t1.size))

    if not W:
        t2 = reduce_height_no_W(t1, m, classes)
    else:
        kept = set(t1.nodes)
        hanging = [
            v
            for v in t1.nodes
            if not (t1.descendants(v) & w1)
            and (t1.parent[v] is None or t1.descendants(t1.parent[v]) & w1)
        ]
        for h in hanging:
            sub = t1.induced(t1.descendants(h))
            reduced = reduce_height_no_W(sub, m, classes)
            kept -= t1.descendants(h) - set(reduced.nodes)
        t2 = t1.induced(kept)
    phases.append(("hanging-heights", t1.size, t2.size))

    t3 = reduce_degree(t2, W, m, k, classes)
    phases.append(("class-degrees", t2.size, t3.size))

    verdicts = {
        "contains_marks": W <= set(t3.nodes),
        "is_subtree": is_subtree(t3, s),
        "equivalent": classes.of(frozenset(t3.nodes)) == classes.of(frozenset(s.nodes)),
    }
    report = ShrinkReport(s.size, t3.size, phases, verdicts)
    if not report.ok():
        exc = VerificationFailed(f"shrink verification failed: {verdicts}")
        exc.report = report
        raise exc
    return t3, report


# ---------------------------------------------------------------------------
# text format


def serialize_tree(name: str, t: SigmaTree, marks=()) -> str:
    lines = [f"tree {name}", "alphabet: " + " ".join(t.alphabet)]
    for v in t.nodes:
        p = t.parent[v]
        where = "root" if p is None else f"parent {p}"
        lines.append(f"node {v} label {t.label[v]} {where}")
    if marks:
        lines.append("marks: " + " ".join(str(v) for v in sorted(marks)))
    return "\n".join(lines) + "\n"


def parse_trees(text: str) -> dict[str, tuple[SigmaTree, tuple[int, ...]]]:
    """Parse the block tree format; returns ``name -> (tree, marks)``."""
    result: dict[str, tuple[SigmaTree, tuple[int, ...]]] = {}
    name = None
    alphabet: tuple[str, ...] | None = None
    parent: dict[int, int | None] = {}
    label: dict[int, str] = {}
    marks: tuple[int, ...] = ()

    def flush():
        nonlocal name, alphabet, parent, label, marks
        if name is None:
            return
        tree = SigmaTree(parent, label, alphabet)
        for v in marks:
            if v not in tree.parent:
                raise StructureFormatError(f"mark {v} is not a node of {name}")
        result[name] = (tree, marks)
        name, alphabet, parent, label, marks = None, None, {}, {}, ()

    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        try:
            words = line.split()
            if words[0] == "tree":
                flush()
                name = words[1]
            elif words[0] == "alphabet:":
                alphabet = tuple(words[1:])
            elif words[0] == "node":
                v = int(words[1])
                if words[2] != "label":
                    raise StructureFormatError("expected 'label'")
                letter = words[3]
                if words[4] == "root":
                    parent[v] = None
                elif words[4] == "parent":
                    parent[v] = int(words[5])
                else:
                    raise StructureFormatError("expected 'root' or 'parent N'")
                label[v] = letter
            elif words[0] == "marks:":
                marks = tuple(int(x) for x in words[1:])
            else:
                raise StructureFormatError(f"unrecognized line {line!r}")
        except StructureFormatError:
            raise
        except Exception as exc:
            raise StructureFormatError(f"line {lineno}: {raw.strip()!r}: {exc}") from exc
    flush()
    if not result:
        raise StructureFormatError("no trees in input")
    return result

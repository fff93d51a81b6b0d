"""End-to-end acceptance suite.

Each test covers one exit criterion at its stated tolerance (all exact
boolean checks) and prints a single PASS line with its elapsed time against
the stated budget. Run with ``pytest tests/test_acceptance.py -v -s``.
"""

import itertools
import random
import time

from fmtk.algebra import (
    COMPLEMENT,
    UNION,
    eval_expression_tree,
    leaf,
    node,
    push_complement_to_leaves,
    shrink_algebraic,
)
from fmtk.equiv import ef_game_equivalent, m_equivalent
from fmtk.folog import evaluate, parse, quantifier_rank, relativize
from fmtk.shrink import is_subtree, make_word, shrink_tree, trees_equivalent
from fmtk.structures import (
    MarkedStructure,
    Structure,
    Vocabulary,
    bowtie,
    cartesian_product,
    complement,
    disjoint_union,
    find_embedding,
    induced_substructure,
    tensor_product,
)
from fmtk.translate import (
    ClassSample,
    enumerate_structures,
    find_cores,
    forall_star_from_minimal_models,
    is_cycle_graph,
    sample_agreement,
    translate_to_exists_forall,
)
from fmtk.wqo import (
    antichain_certificate,
    linear_order_embedding_pair,
    make_cycle,
    make_Gn,
    make_Hn,
    make_linear_order,
    make_path,
)

from oracles import (
    all_structures,
    iso_representatives,
    permuted_copy,
    random_formula,
    random_structure,
    random_tree,
)

V = Vocabulary.make({"E": 2})


def _stamp(name: str, started: float, budget: float):
    elapsed = time.time() - started
    assert elapsed < budget, f"{name} took {elapsed:.1f}s, budget {budget}s"
    print(f"\n{name}: PASS ({elapsed:.1f}s < {budget:.0f}s)")


def test_criterion_1_equivalence_routes_agree():
    started = time.time()
    reps = iso_representatives(all_structures(V, (1, 2, 3)))
    assert len(reps) == 116
    for A in reps:
        for B in reps:
            for m in (0, 1, 2):
                assert m_equivalent(A, B, m) == ef_game_equivalent(A, B, m), (A, B, m)

    rng = random.Random(411)
    for _ in range(200):
        A = random_structure(rng, V, rng.randint(1, 6), rng.choice([0.2, 0.5, 0.8]))
        if rng.random() < 0.4:
            B = permuted_copy(rng, A)
        else:
            B = random_structure(rng, V, rng.randint(1, 6), rng.choice([0.2, 0.5, 0.8]))
        m = rng.randint(0, 3)
        assert m_equivalent(A, B, m) == ef_game_equivalent(A, B, m), (A, B, m)
    _stamp("criterion 1 (rank-type vs game search)", started, 60)


def test_criterion_2_threshold_fixtures():
    started = time.time()
    for m in range(4):
        base = 2**m
        for a in range(base, base + 4):
            for b in range(a, base + 4):
                assert m_equivalent(make_linear_order(a), make_linear_order(b), m)
    for m in range(3):
        base = 3**m
        for a in range(base, base + 4):
            for b in range(a, base + 4):
                assert m_equivalent(make_path(a), make_path(b), m)
    for a in range(4, 9):
        for b in range(a, 9):
            assert m_equivalent(make_cycle(a), make_cycle(b), 2)
    _stamp("criterion 2 (order/path/cycle thresholds)", started, 30)


def test_criterion_3_relativization_contract():
    started = time.time()
    rng = random.Random(433)
    structures = all_structures(V, (1, 2, 3))
    sentences = [random_formula(rng, V, rng.randint(1, 2)) for _ in range(30)]
    for f in sentences:
        for length in (1, 2):
            xs = tuple(f"x{i + 1}" for i in range(length))
            rel = relativize(f, xs)
            for A in structures:
                for values in itertools.product(range(A.size), repeat=length):
                    sub, _ = induced_substructure(A, set(values))
                    assert evaluate(A, rel, dict(zip(xs, values))) == evaluate(sub, f)
    _stamp("criterion 3 (relativization semantics)", started, 60)


def test_criterion_4_tree_shrinking():
    started = time.time()
    rng = random.Random(444)
    for _ in range(100):
        size = rng.randint(1, 25)
        sigma = ("a", "b")[: rng.randint(1, 2)]
        t = random_tree(rng, size, sigma)
        m = rng.randint(0, 2)
        k = rng.randint(0, 2)
        marks = set(rng.sample(list(t.nodes), min(k, size)))
        out, report = shrink_tree(t, marks, m, k)
        assert report.ok()
        assert marks <= set(out.nodes)
        assert is_subtree(out, t)
        assert trees_equivalent(out, t, m)

    sizes = set()
    for n in range(10, 61):
        out, report = shrink_tree(make_word(["a"] * n), {n}, 1, 1)
        assert report.ok()
        sizes.add(out.size)
    assert len(sizes) == 1
    _stamp("criterion 4 (tree shrink + boundedness)", started, 300)


def _uc_shapes(height):
    if height == 0:
        return ["leaf"]
    smaller = _uc_shapes(height - 1)
    return (
        smaller
        + [("!", s) for s in smaller]
        + [("u", a, b) for a in smaller for b in smaller]
    )


def test_criterion_5_operation_algebra():
    started = time.time()
    rng = random.Random(455)
    leaves = [random_structure(rng, V, n) for n in (1, 2, 3) for _ in range(2)]

    def build(shape):
        if shape == "leaf":
            return leaf(rng.choice(leaves))
        if shape[0] == "!":
            return node(COMPLEMENT, build(shape[1]))
        return node(UNION, build(shape[1]), build(shape[2]))

    for shape in _uc_shapes(3):
        t = build(shape)
        pushed = push_complement_to_leaves(t)
        assert eval_expression_tree(pushed) == eval_expression_tree(t)

    def rand_uc(depth):
        if depth == 0 or rng.random() < 0.3:
            return leaf(rng.choice(leaves[:2]))
        if rng.random() < 0.4:
            return node(COMPLEMENT, rand_uc(depth - 1))
        return node(UNION, rand_uc(depth - 1), rand_uc(depth - 1))

    for _ in range(50):
        t = rand_uc(4)
        E = eval_expression_tree(t)
        m, k = rng.randint(0, 2), rng.randint(0, 2)
        W = rng.sample(range(E.size), min(k, E.size))
        out, report = shrink_algebraic(t, W, m, k)
        assert report.ok()

    def union_witness(inclusion, left, right):
        w = dict(inclusion)
        w.update({left.size + j: A1.size + j for j in range(right.size)})
        return w

    def product_witness(inclusion, left, right):
        return {
            a * right.size + b: inclusion[a] * right.size + b
            for a in range(left.size)
            for b in range(right.size)
        }

    from fmtk.structures import check_embedding_witness

    ops = {
        disjoint_union: union_witness,
        bowtie: union_witness,
        cartesian_product: product_witness,
        tensor_product: product_witness,
    }
    compact = (
        lambda m: make_linear_order(2**m + rng.randint(0, 2)),
        lambda m: make_cycle(max(3, 2**m) + rng.randint(0, 2)),
    )
    additive_only = compact + (lambda m: make_path(3**m + rng.randint(0, 2)),)
    for _ in range(200):
        m = rng.randint(0, 2)
        op = rng.choice(list(ops))
        # product structures grow quadratically; keep their factors compact
        fam = rng.choice(compact if op in (cartesian_product, tensor_product) else additive_only)
        A1, B1 = fam(m), fam(m)
        A2, B2 = fam(m), fam(m)
        # P2 congruence for the complement and the binary operation
        assert m_equivalent(complement(A1), complement(B1), m)
        assert m_equivalent(op(A1, A2), op(B1, B2), m)
        # P1 monotonicity, certified by the canonical inclusion witness
        kept = rng.sample(range(A1.size), rng.randint(1, A1.size))
        sub, renum = induced_substructure(A1, kept)
        inclusion = {new: old for old, new in renum.items()}
        assert check_embedding_witness(complement(sub), complement(A1), inclusion)
        witness = ops[op](inclusion, sub, A2)
        assert check_embedding_witness(op(sub, A2), op(A1, A2), witness)
        # P3 containment for the additive operations
        if op in (disjoint_union, bowtie):
            out = op(A1, A2)
            assert check_embedding_witness(A1, out, {e: e for e in range(A1.size)})
            assert check_embedding_witness(
                A2, out, {e: A1.size + e for e in range(A2.size)}
            )
    _stamp("criterion 5 (composition algebra)", started, 300)


def test_criterion_6_translation():
    started = time.time()
    sample = ClassSample([make_cycle(n) for n in range(3, 9)], membership=is_cycle_graph)
    picks = [
        "forall x. forall y. (E(x,y) -> E(y,x))",
        "forall x. !E(x,x)",
        "exists x. E(x,x)",
        "forall x. forall y. (E(x,y) -> !(x = y))",
        "forall x. forall y. ((E(x,y) & E(y,x)) -> !(x = y))",
    ]
    for text in picks:
        phi = parse(V, text)
        m = quantifier_rank(phi)
        ps = translate_to_exists_forall(phi, 0, max(2**m, 1))
        assert sample_agreement(phi, ps, sample) == [], text

    witness = Structure(V, 2, {"E": {(0, 0), (0, 1), (1, 1)}})
    phi = parse(V, "exists x. forall y. E(x,y)")
    cores = find_cores(witness, phi, 1, ClassSample([witness], membership=lambda s: True))
    assert (0,) in cores and (1,) in cores
    _stamp("criterion 6 (prefix-form translation + cores)", started, 60)


def test_criterion_7_embedding_scans():
    started = time.time()
    rng = random.Random(477)
    for k in (1, 2, 3):
        items = []
        for _ in range(20):
            n = rng.randint(max(k, 2), 12)
            items.append((make_linear_order(n), tuple(rng.randrange(n) for _ in range(k))))
        got = linear_order_embedding_pair(items, k)
        expanded = [MarkedStructure(A, marks).expand() for A, marks in items]
        hits = [
            (i + 1, j + 1)
            for j in range(20)
            for i in range(j)
            if find_embedding(expanded[i], expanded[j]) is not None
        ]
        assert (got is None) == (not hits)
        if got:
            assert find_embedding(expanded[got[0] - 1], expanded[got[1] - 1]) is not None

    marked_paths = [MarkedStructure(make_path(n), (0, n)) for n in range(2, 6)]
    ok, _ = antichain_certificate(marked_paths)
    assert ok

    for m, n in ((0, 1), (1, 1), (1, 2)):
        assert m_equivalent(make_Gn(n), make_Hn(n), m)
    _stamp("criterion 7 (marked-order scans, antichains, path families)", started, 180)


def test_criterion_8_minimal_model_sentences():
    started = time.time()
    sample = ClassSample(enumerate_structures(V, 3), membership=lambda s: True)
    for name, membership in (
        ("edgeless", lambda s: not s.relations["E"]),
        ("loop-free", lambda s: all(a != b for a, b in s.relations["E"])),
    ):
        sentence = forall_star_from_minimal_models(membership, sample)
        for A in sample.structures:
            assert evaluate(A, sentence) == membership(A), name
    _stamp("criterion 8 (universal sentences from minimal models)", started, 30)

import random

import pytest

from fmtk.equiv import m_equivalent
from fmtk.errors import GuardExceeded
from fmtk.structures import (
    MarkedStructure,
    check_embedding_witness,
    disjoint_union,
    find_embedding,
    is_isomorphic,
    tensor_product,
)
from fmtk.wqo import (
    antichain_certificate,
    dickson_pair,
    linear_order_embedding_pair,
    make_cycle,
    make_Gn,
    make_grid,
    make_Hn,
    make_linear_order,
    make_path,
    mark_orderings,
    order_type_tuple,
    shrink_cycle_with_W,
    shrink_path_with_W,
    to_Sk,
    to_Sk_pred,
    witness_HnGn,
)


class TestDickson:
    def test_documented_example(self):
        assert dickson_pair([(3, 1), (2, 2), (1, 3), (4, 4)]) == (1, 4)

    def test_antichain(self):
        assert dickson_pair([(1, 2), (2, 1)]) is None

    def test_constant_sequence(self):
        assert dickson_pair([(2, 2), (2, 2), (2, 2)]) == (1, 2)

    def test_dimension_mismatch(self):
        with pytest.raises(ValueError):
            dickson_pair([(1, 2), (1, 2, 3)])


class TestMarkedLinearOrders:
    def test_identical_items(self):
        item = (make_linear_order(4), (1, 3))
        assert linear_order_embedding_pair([item, item], 2) == (1, 2)

    def test_pair_verified_by_embedding(self):
        items = [
            (make_linear_order(4), (0, 2)),
            (make_linear_order(6), (0, 3)),
        ]
        assert linear_order_embedding_pair(items, 2) == (1, 2)

    def test_matches_exhaustive_oracle(self):
        rng = random.Random(70)
        for trial in range(10):
            k = rng.randint(1, 3)
            items = []
            for _ in range(10):
                n = rng.randint(max(k, 2), 12)
                order = make_linear_order(n)
                marks = tuple(rng.randrange(n) for _ in range(k))
                items.append((order, marks))
            got = linear_order_embedding_pair(items, k)
            expanded = [MarkedStructure(A, marks).expand() for A, marks in items]
            oracle_hits = [
                (i + 1, j + 1)
                for j in range(len(items))
                for i in range(j)
                if find_embedding(expanded[i], expanded[j]) is not None
            ]
            assert (got is None) == (not oracle_hits)
            if got is not None:
                i, j = got
                assert find_embedding(expanded[i - 1], expanded[j - 1]) is not None

    def test_gap_counts(self):
        order = make_linear_order(6)
        assert order_type_tuple(order, (0, 3)) == (1, 4, 3)

    def test_mark_count_must_match(self):
        with pytest.raises(ValueError):
            linear_order_embedding_pair([(make_linear_order(3), (0,))], 2)


class TestMarkEncodings:
    def test_empty_marks_give_empty_predicate(self):
        A = make_path(2)
        expanded = to_Sk_pred(A, []).expand()
        pred = next(n for n, _ in expanded.vocab.predicates if n != "E")
        assert expanded.relations[pred] == frozenset()

    def test_ordered_forgets_to_unordered(self):
        A = make_path(3)
        ms = to_Sk(A, (2, 0))
        assert ms.as_unordered().marks == (0, 2)

    def test_predicate_embedding_lifts_to_some_ordering(self):
        # an unordered-mark embedding induces an ordered one after permuting
        rng = random.Random(71)
        for _ in range(30):
            n = rng.randint(2, 5)
            A = make_path(n - 1)
            B = make_path(rng.randint(n - 1, 6))
            marks_a = tuple(rng.sample(range(A.size), 2))
            marks_b_pool = range(B.size)
            marks_b = tuple(rng.sample(marks_b_pool, 2))
            unordered = find_embedding(
                to_Sk_pred(A, marks_a).expand(), to_Sk_pred(B, marks_b).expand()
            )
            if unordered is None:
                continue
            ordered_hits = [
                perm
                for perm in mark_orderings(to_Sk_pred(A, marks_a))
                if find_embedding(
                    perm.expand(), to_Sk(B, tuple(sorted(marks_b))).expand()
                )
                is not None
            ]
            assert ordered_hits


class TestAntichain:
    def test_endpoint_marked_paths(self):
        items = [
            MarkedStructure(make_path(n), (0, n)) for n in range(2, 6)
        ]
        ok, pair = antichain_certificate(items)
        assert ok and pair is None

    def test_unmarked_paths_are_not_an_antichain(self):
        items = [MarkedStructure(make_path(n), ()) for n in range(2, 6)]
        ok, pair = antichain_certificate(items)
        assert not ok and pair == (1, 2)

    def test_singleton(self):
        ok, _ = antichain_certificate([MarkedStructure(make_path(2), (0,))])
        assert ok


class TestGenerators:
    def test_h1_size(self):
        assert make_Hn(1).size == 10  # one copy each of paths with 1..4 vertices

    def test_g1_size(self):
        assert make_Gn(1).size == 13

    def test_cycle_three_is_triangle(self):
        c3 = make_cycle(3)
        assert c3.relations["E"] == frozenset(
            (i, j) for i in range(3) for j in range(3) if i != j
        )

    def test_grid_is_tensor_of_orders(self):
        assert make_grid(3, 4) == tensor_product(
            make_linear_order(3), make_linear_order(4)
        )

    def test_hn_guard(self):
        with pytest.raises(GuardExceeded):
            make_Hn(3)
        with pytest.warns(UserWarning):
            make_Hn(3, override_guard=True)

    def test_path_convention(self):
        assert make_path(0).size == 1
        assert make_path(3).size == 4


class TestPathsCyclesFacts:
    def test_paths_equivalent_past_threshold(self):
        for m in (1, 2):
            base = 3**m
            assert m_equivalent(make_path(base), make_path(base + 2), m)

    def test_copies_collapse(self):
        def n_copies(count, length):
            out = make_path(length)
            for _ in range(count - 1):
                out = disjoint_union(out, make_path(length))
            return out

        assert m_equivalent(n_copies(2, 4), n_copies(1, 3), 1)
        assert m_equivalent(n_copies(3, 10), n_copies(2, 9), 2)

    def test_gn_equivalent_hn(self):
        for m, n in ((0, 1), (1, 1), (1, 2)):
            assert m_equivalent(make_Gn(n), make_Hn(n), m)


class TestShrinkPath:
    def test_single_mark_gives_single_vertex(self):
        P = make_path(9)
        out, renum = shrink_path_with_W(P, {4}, 1, 1)
        assert out.size == 1 and 4 in renum

    def test_short_path_whole_span(self):
        P = make_path(3)
        out, renum = shrink_path_with_W(P, {0, 3}, 0, 2)
        assert out.size == 4

    def test_far_marks_split_into_segments(self):
        P = make_path(30)
        out, renum = shrink_path_with_W(P, {0, 30}, 0, 2)
        assert {0, 30} <= set(renum)
        # two end segments, no middle
        from fmtk.wqo import _components

        assert len(_components(out)) == 2
        assert out.size < 31

    def test_empty_marks_leading_segment(self):
        P = make_path(100)
        out, _ = shrink_path_with_W(P, set(), 0, 0)
        assert out.size == 3 ** (0 + 0 + 2) + 1

    def test_output_is_induced_with_witness(self):
        rng = random.Random(72)
        for _ in range(20):
            n = rng.randint(1, 30)
            P = make_path(n)
            k = rng.randint(0, 3)
            W = set(rng.sample(range(n + 1), min(k, n + 1)))
            out, renum = shrink_path_with_W(P, W, rng.randint(0, 1), k)
            assert W <= set(renum)
            witness = {new: old for old, new in renum.items()}
            assert check_embedding_witness(out, P, witness)
            from fmtk.wqo import _components

            comps = _components(out)
            assert len(comps) <= max(1, len(W))


class TestShrinkCycle:
    def test_empty_marks(self):
        C = make_cycle(6)
        out, _ = shrink_cycle_with_W(C, set(), 0, 0)
        assert out.size <= 6

    def test_single_mark_single_vertex(self):
        C = make_cycle(6)
        out, renum = shrink_cycle_with_W(C, {3}, 1, 1)
        assert out.size == 1 and 3 in renum

    def test_never_contains_a_cycle(self):
        rng = random.Random(73)
        from fmtk.translate import is_path_union

        for _ in range(15):
            n = rng.randint(3, 20)
            k = rng.randint(0, 2)
            W = set(rng.sample(range(n), min(k, n - 1)))
            out, _ = shrink_cycle_with_W(make_cycle(n), W, rng.randint(0, 1), k)
            assert is_path_union(out)

    def test_k_must_leave_a_spare_vertex(self):
        with pytest.raises(ValueError):
            shrink_cycle_with_W(make_cycle(3), {0, 1, 2}, 0, 3)


class TestWitnessHnGn:
    def test_h1_no_marks_returns_whole(self):
        H1 = make_Hn(1)
        out, renum = witness_HnGn(H1, set(), 0, 0, n=1)
        assert out.size == H1.size  # pattern already at most the target

    def test_g1_cycle_marks_replaced_by_segments(self):
        G1 = make_Gn(1)
        # cycle component of G1 is vertices 0..2
        out, renum = witness_HnGn(G1, {1}, 0, 1, n=1)
        assert 1 in renum
        assert out.size < G1.size
        assert is_isomorphic(out, make_Hn(1))
        witness = {new: old for old, new in renum.items()}
        assert check_embedding_witness(out, G1, witness)

    def test_g2_rank_one_verified(self):
        G2 = make_Gn(2)
        marks = {0, 20}  # one on the cycle, one in the path part
        out, renum = witness_HnGn(G2, marks, 1, 2, n=2)
        assert marks <= set(renum)
        witness = {new: old for old, new in renum.items()}
        assert check_embedding_witness(out, G2, witness)
        assert m_equivalent(out, G2, 1)

    def test_h2_marks_in_long_paths(self):
        H2 = make_Hn(2)
        out, renum = witness_HnGn(H2, {H2.size - 1}, 1, 1, n=2)
        assert H2.size - 1 in renum
        assert m_equivalent(out, H2, 1)

    def test_g2_single_mark_all_verdicts(self):
        G2 = make_Gn(2)
        out, renum = witness_HnGn(G2, {5}, 1, 1, n=2)
        assert 5 in renum
        witness = {new: old for old, new in renum.items()}
        assert check_embedding_witness(out, G2, witness)
        assert m_equivalent(out, G2, 1)

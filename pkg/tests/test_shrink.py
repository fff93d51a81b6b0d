import random

import pytest

from fmtk.shrink import (
    SigmaTree,
    from_structure,
    is_subtree,
    join_at,
    make_word,
    parse_trees,
    reduce_W_distances,
    reduce_degree,
    reduce_height_no_W,
    reduce_root_distance,
    serialize_tree,
    shrink_tree,
    shrink_word,
    to_structure,
    trees_equivalent,
    word_letters,
)
from fmtk.structures import find_embedding

from oracles import random_tree, random_word


def chain(n, letter="a"):
    return make_word([letter] * n)


def star(leaves, letter="a"):
    parent = {0: None, **{i: 0 for i in range(1, leaves + 1)}}
    return SigmaTree(parent, {i: letter for i in range(leaves + 1)})


class TestSigmaTree:
    def test_single_root_enforced(self):
        with pytest.raises(ValueError):
            SigmaTree({0: None, 1: None}, {0: "a", 1: "a"})

    def test_cycle_rejected(self):
        with pytest.raises(ValueError):
            SigmaTree({0: 1, 1: 0}, {0: "a", 1: "a"})

    def test_induced_reattaches_to_nearest_kept_ancestor(self):
        t = chain(4)
        sub = t.induced({1, 4})
        assert sub.parent == {1: None, 4: 1}

    def test_renumbered(self):
        t = chain(3).induced({1, 3})
        dense, renum = t.renumbered()
        assert dense.nodes == (0, 1)
        assert renum == {1: 0, 3: 1}

    def test_word_positions_start_at_one(self):
        w = make_word("abc")
        assert w.nodes == (1, 2, 3)
        assert word_letters(w) == ["a", "b", "c"]


class TestStructureRoundTrip:
    def test_single_node(self):
        t = SigmaTree({0: None}, {0: "a"})
        S, renum = to_structure(t)
        assert S.relations["Q_a"] == frozenset({(0,)})
        assert S.relations["le"] == frozenset({(0, 0)})

    def test_chain_of_two_has_three_order_pairs(self):
        S, _ = to_structure(chain(2).renumbered()[0])
        assert len(S.relations["le"]) == 3

    def test_round_trip_identity(self):
        rng = random.Random(50)
        for _ in range(25):
            t = random_tree(rng, rng.randint(1, 10), ("a", "b"))
            S, _ = to_structure(t)
            assert from_structure(S) == t

    def test_from_structure_rejects_non_tree_order(self):
        t = random_tree(random.Random(0), 4, ("a",))
        S, _ = to_structure(t)
        broken = S.relations["le"] | {(3, 2), (2, 3)}
        from fmtk.structures import Structure

        bad = Structure(S.vocab, S.size, {**S.relations, "le": broken})
        with pytest.raises(ValueError):
            from_structure(bad)


class TestJoin:
    def test_leaf_under_root(self):
        single = SigmaTree({0: None}, {0: "a"})
        out = join_at(single, 0, SigmaTree({0: None}, {0: "b"}))
        assert out.size == 2 and out.parent[1] == 0

    def test_size_adds(self):
        rng = random.Random(51)
        s = random_tree(rng, 6, ("a",))
        t = random_tree(rng, 4, ("a",))
        assert join_at(s, 3, t).size == 10

    def test_removing_graft_recovers_host(self):
        rng = random.Random(52)
        s = random_tree(rng, 5, ("a", "b"))
        t = random_tree(rng, 3, ("a", "b"))
        joined = join_at(s, 2, t)
        recovered = joined.induced(s.nodes)
        assert recovered == SigmaTree(s.parent, s.label, joined.alphabet)

    def test_invalid_attach_point(self):
        with pytest.raises(ValueError):
            join_at(chain(2), 99, chain(1))


class TestReduceDegree:
    def test_star_collapses(self):
        s = star(10)
        out = reduce_degree(s, [], 1, 0)
        assert len(out.children(0)) == 1
        assert trees_equivalent(out, s, 1)

    def test_fixpoint_unchanged(self):
        s = star(10)
        out = reduce_degree(s, [], 1, 0)
        assert reduce_degree(out, [], 1, 0) == out

    def test_small_tree_unchanged(self):
        s = star(2)
        assert reduce_degree(s, [], 1, 1) == s

    def test_marked_leaf_retained(self):
        out = reduce_degree(star(10), [7], 1, 1)
        assert 7 in out.nodes

    def test_per_class_cap_holds_in_output(self):
        rng = random.Random(62)
        from fmtk.shrink import TreeClasses

        for _ in range(15):
            s = random_tree(rng, rng.randint(3, 22), ("a", "b"))
            m, k = rng.randint(0, 2), rng.randint(0, 2)
            marks = set(rng.sample(list(s.nodes), min(k, s.size)))
            out = reduce_degree(s, marks, m, k)
            classes = TreeClasses(out, m)
            for v in out.nodes:
                per_class = {}
                for c in out.children(v):
                    key = classes.of(out.descendants(c))
                    per_class[key] = per_class.get(key, 0) + 1
                assert all(n <= m + k for n in per_class.values())
            assert trees_equivalent(out, s, m)
            assert marks <= set(out.nodes)

    def test_too_many_marks_rejected(self):
        with pytest.raises(ValueError):
            reduce_degree(star(3), [1, 2], 1, 1)


class TestReduceHeight:
    def test_long_unary_chain(self):
        s = chain(30)
        out = reduce_height_no_W(s, 1)
        assert out.size < 5
        assert trees_equivalent(out, s, 1)

    def test_single_node_unchanged(self):
        s = SigmaTree({0: None}, {0: "a"})
        assert reduce_height_no_W(s, 1) == s

    def test_height_bounded_by_realized_classes(self):
        rng = random.Random(53)
        for _ in range(15):
            s = random_tree(rng, rng.randint(2, 20), ("a", "b"))
            m = rng.randint(0, 2)
            out = reduce_height_no_W(s, m)
            from fmtk.shrink import TreeClasses

            classes = TreeClasses(out, m)
            distinct = {classes.of(out.descendants(v)) for v in out.nodes}
            # longest chain has pairwise distinct subtree classes
            assert out.height() + 1 <= len(distinct)
            assert trees_equivalent(out, s, m)
            assert reduce_height_no_W(out, m) == out


class TestShrinkWord:
    def test_unary_word_rank_two(self):
        w = chain(20)
        v = shrink_word(w, 2)
        assert len(v.nodes) <= 4
        assert trees_equivalent(v, w, 2)

    def test_single_letter_unchanged(self):
        w = make_word("a")
        assert shrink_word(w, 2) == w

    def test_positions_preserved_in_order(self):
        w = make_word("abbaabba")
        v = shrink_word(w, 1)
        kept = sorted(v.nodes, key=v.depth)
        assert kept == sorted(v.nodes)  # order of positions = chain order

    def test_random_words_verified(self):
        rng = random.Random(54)
        for _ in range(100):
            w = random_word(rng, rng.randint(1, 40), ("a", "b"))
            m = rng.randint(0, 2)
            v = shrink_word(w, m)
            assert v.is_chain()
            assert is_subtree(v, w)
            assert trees_equivalent(v, w, m)

    def test_rejects_non_chain(self):
        with pytest.raises(ValueError):
            shrink_word(star(2), 1)


class TestReduceRootDistance:
    def test_target_at_root_unchanged(self):
        s = chain(5)
        assert reduce_root_distance(s, 1, 1) == s

    def test_deep_chain_pulls_target_up(self):
        s = chain(25)
        out = reduce_root_distance(s, 25, 1)
        assert out.size < 25 and 25 in out.nodes
        assert trees_equivalent(out, s, 1, (25,), (25,))

    def test_end_segments_always_kept(self):
        # first and last path segments survive every splice
        rng = random.Random(55)
        for _ in range(20):
            s = random_tree(rng, rng.randint(2, 18), ("a",))
            b = max(s.nodes, key=lambda v: (s.depth(v), v))
            out = reduce_root_distance(s, b, 1)
            assert out.root == s.root and b in out.nodes
            assert trees_equivalent(out, s, 1, (b,), (b,))
            assert is_subtree(out, s)
            assert reduce_root_distance(out, b, 1) == out


class TestReduceWDistances:
    def test_no_pair_unchanged(self):
        s = chain(10)
        assert reduce_W_distances(s, {3}, 1) == s

    def test_adjacent_marks_unchanged(self):
        s = chain(10)
        assert reduce_W_distances(s, {4, 5}, 1) == s

    def test_far_marks_pulled_together(self):
        s = chain(25)
        out = reduce_W_distances(s, {1, 25}, 1)
        assert {1, 25} <= set(out.nodes)
        assert out.size < 25
        assert trees_equivalent(out, s, 1)
        assert is_subtree(out, s)

    def test_consecutive_relation_preserved(self):
        rng = random.Random(56)
        for _ in range(15):
            s = random_tree(rng, rng.randint(4, 20), ("a", "b"))
            marks = set(rng.sample(list(s.nodes), min(3, s.size)))
            out = reduce_W_distances(s, marks, 1)
            assert marks <= set(out.nodes)
            for a in marks:
                for b in marks:
                    if a != b:
                        assert s.leq(a, b) == out.leq(a, b)
            assert reduce_W_distances(out, marks, 1) == out


class TestShrinkTree:
    def test_everything_marked_unchanged(self):
        rng = random.Random(57)
        t = random_tree(rng, 3, ("a",))
        out, report = shrink_tree(t, set(t.nodes), 1, 3)
        assert out == t and report.ok()

    def test_random_trees_all_postconditions(self):
        rng = random.Random(58)
        for _ in range(60):
            size = rng.randint(1, 25)
            t = random_tree(rng, size, ("a", "b")[: rng.randint(1, 2)])
            k = rng.randint(0, 2)
            marks = set(rng.sample(list(t.nodes), min(k, size)))
            m = rng.randint(0, 2)
            out, report = shrink_tree(t, marks, m, k)
            assert report.ok()
            assert marks <= set(out.nodes)
            assert is_subtree(out, t)
            assert trees_equivalent(out, t, m)

    def test_mark_bound_enforced(self):
        t = random_tree(random.Random(59), 5, ("a",))
        with pytest.raises(ValueError):
            shrink_tree(t, {0, 1, 2}, 1, 2)

    def test_unary_chain_sizes_stabilize(self):
        # growing inputs, fixed mark pattern: output size becomes constant
        sizes = set()
        for n in range(10, 61):
            out, report = shrink_tree(chain(n), {n}, 1, 1)
            assert report.ok()
            sizes.add(out.size)
        assert sizes == {5}

    def test_subtree_witnessed_by_identity_embedding(self):
        rng = random.Random(60)
        t = random_tree(rng, 12, ("a", "b"))
        out, _ = shrink_tree(t, {t.nodes[3]}, 1, 1)
        S_out, renum_out = to_structure(out)
        S_in, renum_in = to_structure(t)
        witness = {renum_out[v]: renum_in[v] for v in out.nodes}
        from fmtk.structures import check_embedding_witness

        assert check_embedding_witness(S_out, S_in, witness)
        assert find_embedding(S_out, S_in) is not None


class TestTreeTextFormat:
    def test_round_trip(self):
        rng = random.Random(61)
        t = random_tree(rng, 8, ("a", "b"))
        text = serialize_tree("demo", t, (2, 5))
        parsed, marks = parse_trees(text)["demo"]
        assert parsed == t and marks == (2, 5)

    def test_bad_mark_rejected(self):
        text = "tree x\nalphabet: a\nnode 0 label a root\nmarks: 9\n"
        with pytest.raises(ValueError):
            parse_trees(text)

    def test_unknown_line_rejected(self):
        with pytest.raises(ValueError):
            parse_trees("tree x\nnonsense here\n")

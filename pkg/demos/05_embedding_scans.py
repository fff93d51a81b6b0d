"""Embedding scans over sequences of marked structures.

Sequences of marked linear orders always contain an embedding pair once they
are long enough; marked paths do not. This demo runs the gap-count scan on
orders, certifies a path antichain, and shrinks members of the
paths-plus-one-cycle family around marked nodes.
"""

from fmtk.equiv import m_equivalent
from fmtk.structures import MarkedStructure, is_isomorphic
from fmtk.wqo import (
    antichain_certificate,
    dickson_pair,
    linear_order_embedding_pair,
    make_Gn,
    make_Hn,
    make_cycle,
    make_linear_order,
    make_path,
    shrink_cycle_with_W,
    witness_HnGn,
)

# Componentwise domination in tuples of counts: the engine behind the
# order scan.
print("dominated pair in [(3,1),(2,2),(1,3),(4,4)]:",
      dickson_pair([(3, 1), (2, 2), (1, 3), (4, 4)]))
print("an antichain has none:", dickson_pair([(1, 2), (2, 1)]))

# Marked linear orders: group by the relative pattern of the marks, compare
# inclusive gap counts, verify the winning pair by an actual embedding.
items = [
    (make_linear_order(5), (0, 3)),
    (make_linear_order(4), (2, 0)),
    (make_linear_order(7), (1, 5)),
]
print("\nembedding pair among three marked orders:",
      linear_order_embedding_pair(items, 2))

# Paths with both endpoints marked are pairwise incomparable: keeping the
# endpoints pins the whole path.
marked_paths = [MarkedStructure(make_path(n), (0, n)) for n in range(2, 6)]
ok, _ = antichain_certificate(marked_paths)
print("endpoint-marked paths P2..P5 form an antichain:", ok)

# Without marks they chain into each other immediately.
plain = [MarkedStructure(make_path(n), ()) for n in range(2, 6)]
ok, pair = antichain_certificate(plain)
print("unmarked paths are comparable:", not ok, "first pair:", pair)

# The paths-plus-one-cycle family: a big member shrinks onto its small
# pattern; marked cycle nodes survive as path segments.
G1 = make_Gn(1)
out, renum = witness_HnGn(G1, {1}, 0, 1, n=1)
print(f"\nshrunk the 13-vertex family member to {out.size} vertices;")
print("result matches the path-family pattern:", is_isomorphic(out, make_Hn(1)))

G2 = make_Gn(2)
out, renum = witness_HnGn(G2, {0, 20}, 1, 2, n=2)
print(f"the 119-vertex member keeps both marks in {out.size} vertices,",
      "rank-1 equivalent:", m_equivalent(out, G2, 1))

# A marked cycle alone becomes a union of short paths.
seg, renum = shrink_cycle_with_W(make_cycle(9), {0, 4}, 0, 2)
print("cycle of 9 with two marks becomes", seg.size, "vertices of paths")

"""How far can a sentence with m nested quantifiers see?

Two structures are rank-m equivalent when no first-order sentence with at
most m nested quantifiers tells them apart. This demo decides that relation
two independent ways: canonical back-and-forth types, and a brute-force
search over the m-round challenge game.
"""

from fmtk.equiv import class_fingerprint, ef_game_equivalent, m_equivalent, realized_classes
from fmtk.wqo import make_cycle, make_linear_order, make_path

# Cycles: with 2 rounds, a challenger cannot measure length once both cycles
# have at least 4 vertices. The matcher always has a vertex at the right
# adjacency pattern.
c4, c5, c3 = make_cycle(4), make_cycle(5), make_cycle(3)
print("C4 vs C5 at rank 2:", m_equivalent(c4, c5, 2))
print("C3 vs C4 at rank 2:", m_equivalent(c3, c4, 2))
print("the game search agrees:", ef_game_equivalent(c4, c5, 2))

# The same at rank 3 needs cycles of size >= 8.
print("C8 vs C9 at rank 3:", m_equivalent(make_cycle(8), make_cycle(9), 3))

# Linear orders blur together once they have 2^m elements.
for m in (1, 2, 3):
    a, b = make_linear_order(2**m), make_linear_order(2**m + 5)
    print(f"orders of {2**m} and {2**m + 5} elements at rank {m}:",
          m_equivalent(a, b, m))

# Paths need length 3^m: an endpoint is visible to a challenger who walks
# inward, so paths resist longer than orders.
print("P3 vs P5 at rank 1:", m_equivalent(make_path(3), make_path(5), 1))
print("P1 vs P2 at rank 2:", m_equivalent(make_path(1), make_path(2), 2))

# Rank types have stable fingerprints, so equivalence classes can be logged
# and compared across runs.
print("fingerprint of C4 at rank 2: ", class_fingerprint(c4, (), 2))
print("fingerprint of C5 at rank 2: ", class_fingerprint(c5, (), 2))

# Grouping a pile of structures by fingerprint gives the realized classes.
items = [(make_cycle(n), ()) for n in range(3, 9)]
part = realized_classes(items, 2)
print("cycles C3..C8 fall into", part.class_count(), "classes at rank 2:",
      part.classes)

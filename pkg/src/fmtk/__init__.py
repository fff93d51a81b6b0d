"""fmtk: a toolkit for finite relational structures.

Decides bounded-quantifier-rank equivalence, shrinks words/trees/operation
compositions to small equivalent sub-models around marked elements, and
translates sentences whose models carry small cores into
existential-then-universal prefix form, with brute-force cross-checks at desk
scale.
"""

from .structures import (
    MarkedStructure,
    Structure,
    Vocabulary,
    bowtie,
    cartesian_product,
    complement,
    disjoint_union,
    find_embedding,
    induced_substructure,
    is_isomorphic,
    tensor_product,
    tree_of_structures,
    word_of_structures,
)
from .equiv import ef_game_equivalent, m_equivalent, rank_type, realized_classes

__all__ = [
    "MarkedStructure",
    "Structure",
    "Vocabulary",
    "bowtie",
    "cartesian_product",
    "complement",
    "disjoint_union",
    "ef_game_equivalent",
    "find_embedding",
    "induced_substructure",
    "is_isomorphic",
    "m_equivalent",
    "rank_type",
    "realized_classes",
    "tensor_product",
    "tree_of_structures",
    "word_of_structures",
]

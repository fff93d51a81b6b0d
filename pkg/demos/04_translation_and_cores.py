"""Cores, preservation checking, and translation to prefix form.

A sentence whose models each carry a small "core" (a mark set whose
retention forces every class-member substructure to stay a model) can be
rewritten with a block of existentials followed by universals. This demo
finds cores by brute force, checks the preservation property over a sample,
runs the translation, and derives universal sentences from minimal models.
"""

from fmtk.folog import evaluate, parse, print_formula, quantifier_rank, to_formula
from fmtk.structures import Structure, Vocabulary
from fmtk.translate import (
    ClassSample,
    core_formula,
    enumerate_structures,
    find_cores,
    forall_star_from_minimal_models,
    is_cycle_graph,
    psc_check,
    sample_agreement,
    translate_to_exists_forall,
)
from fmtk.wqo import make_cycle

V = Vocabulary.make({"E": 2})

# A classic subtlety: in this two-element model of "some x relates to all y",
# only 0 is a witness, yet both {0} and {1} are cores.
A = Structure(V, 2, {"E": {(0, 0), (0, 1), (1, 1)}})
phi = parse(V, "exists x. forall y. E(x,y)")
sample = ClassSample([A], membership=lambda s: True)
print("cores of the two-element model:", find_cores(A, phi, 1, sample))

# The core-defining formula agrees with the brute-force search.
cf = core_formula(phi, 1, 4)
satisfied = [a for a in range(A.size) if evaluate(A, cf, {"x1": a})]
print("elements satisfying the core formula:", satisfied)

# Preservation fails at k=0 when some model loses its witness in a
# substructure, and holds with one-element cores on complete digraphs.
fragile = Structure(V, 2, {"E": {(0, 0), (0, 1)}})
ok0, _ = psc_check(phi, 0, ClassSample([fragile], membership=lambda s: True))
print("preserved with empty cores over the fragile model:", ok0)

# Translation over the cycles sample: a rank-m sentence gets 2^m universals.
cycles = ClassSample([make_cycle(n) for n in range(3, 9)], membership=is_cycle_graph)
for text in ("forall x. !E(x,x)", "exists x. E(x,x)"):
    f = parse(V, text)
    ps = translate_to_exists_forall(f, 0, 2 ** quantifier_rank(f))
    agree = sample_agreement(f, ps, cycles) == []
    print(f"\ninput:      {text}")
    print(f"translated: {print_formula(to_formula(ps))}")
    print(f"agrees on every cycle in the sample: {agree}")

# Universal sentences out of minimal models: the loop-free graphs are
# exactly those avoiding the one-vertex loop.
everything = ClassSample(enumerate_structures(V, 3), membership=lambda s: True)
loop_free = forall_star_from_minimal_models(
    lambda s: all(a != b for a, b in s.relations["E"]), everything
)
print("\nloop-free graphs are defined by:", print_formula(loop_free))

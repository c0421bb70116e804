"""
Morphisms between causal models
===============================

A morphism relabels (and possibly merges or pads) outcomes variable by
variable, in a way every mechanism respects.  We look at coin models on the
structure X -> Y.
"""

# %%
from causal_theories import (
    CausalStructure,
    StochCausalModel,
    classify_morphism,
    find_morphisms,
    terminal_morphism,
    trivial_model,
    validate_morphism,
)
from causal_theories.files import data_path, load_morphism
from causal_theories.model import ModelMorphism

G = CausalStructure.build("XY", [("X", "Y")])
fair = trivial_model(G, ["heads", "tails"], [0.5, 0.5])
biased = trivial_model(G, ["heads", "tails"], [0.3, 0.7])

# %%
# Swapping heads and tails everywhere is an automorphism of the fair model.
# There are four in all: each variable may be swapped or not.

swap = load_morphism(data_path("swap_morphism.json"))
print(validate_morphism(swap), classify_morphism(swap).kind)
print(len(find_morphisms(fair, fair)), "automorphisms")

# %%
# No deterministic relabelling pushes a fair coin onto a biased one, so the
# search over all candidates comes back empty.  The explicit identity map
# fails at the prior of X.

print(find_morphisms(fair, biased))
print(validate_morphism(load_morphism(data_path("fair_to_biased_morphism.json"))))

# %%
# Every model maps to the one-point model, by forgetting everything.  Such a
# map is a coarse graining.

t = terminal_morphism(fair)
c = classify_morphism(t)
print(c.kind, [s.outcomes for s in c.intermediate.spaces])

# %%
# In general a morphism factors as a coarse graining followed by an embedding.
# Here X merges two outcomes and lands in a space with an unused third one.

src = StochCausalModel.build(G, {"X": ["0", "1", "2"], "Y": ["0", "1"]},
                             {"X": [[0.2], [0.3], [0.5]], "Y": [[1, 1, 0.4], [0, 0, 0.6]]})
tgt = StochCausalModel.build(G, {"X": ["p", "q", "r"], "Y": ["0", "1"]},
                             {"X": [[0.5], [0.0], [0.5]], "Y": [[1, 0.7, 0.4], [0, 0.3, 0.6]]})
phi = ModelMorphism.from_maps(src, tgt, {"X": {"0": "p", "1": "p", "2": "r"}, "Y": {"0": "0", "1": "1"}})
c = classify_morphism(phi)
print(c.kind)
for v in G.vertices:
    print(G.names[v], src.spaces[v].outcomes, "->", c.intermediate.spaces[v].outcomes, "->", tgt.spaces[v].outcomes)

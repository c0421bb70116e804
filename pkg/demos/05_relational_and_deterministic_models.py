"""
Other semantics: possibility and determinism
============================================

The same diagrams can be read with boolean matrices (which outcomes are
possible at all) or with functions (deterministic models).
"""

# %%
import itertools

import numpy as np

from causal_theories import CausalStructure, SetCausalModel, evaluate, evaluate_rel, joint_prior
from causal_theories.diagram import causal_conditional, prior
from causal_theories.files import data_path, load_model

m = load_model(data_path("food_model.json"))
G = m.structure

# %%
# Forgetting the numbers and keeping only which entries are positive gives a
# relational model.  Its prior marks the possible outcome triples, which are
# exactly those of positive probability.

R = evaluate_rel(prior(G, G.vertices), m.support_model())
labels = list(itertools.product(*(s.outcomes for s in m.spaces)))
for t, possible, p in zip(labels, R.data[:, 0], joint_prior(m).values):
    print(f"  {','.join(t):10s} possible={bool(possible)!s:5s} p={p:.2f}")

# %%
# A deterministic model assigns a function to each mechanism.  Here C is the
# logical AND of A and B, with both roots fixed to their first outcome.

H = CausalStructure.build("ABC", [("A", "C"), ("B", "C")])
det = SetCausalModel.build(H, [["t", "f"]] * 3, [[0], [0], [0, 1, 1, 1]])
K = evaluate(prior(H, H.vertices), det)
det_labels = list(itertools.product(*(s.outcomes for s in det.spaces)))
print("joint is a point mass at", det_labels[int(np.argmax(K.data[:, 0]))])

# %%
# Conditionals in a deterministic model are functions too.

print(evaluate(causal_conditional(H, ["A", "B"], ["C"]), det).data)

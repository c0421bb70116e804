"""
A three-variable Bayesian network
=================================

Two independent causes A and B and a common effect C.  We load the bundled
model, read off its joint distribution, and check what the graph says about
independence.
"""

# %%
import numpy as np

from causal_theories import (
    check_compatibility,
    conditional_from_joint,
    cond_independent,
    joint_prior,
    marginal_prior,
)
from causal_theories.files import data_path, format_matrix, load_model

np.set_printoptions(precision=4, suppress=True)

m = load_model(data_path("food_model.json"))
G = m.structure
print("variables:", G.names)
print("arrows:   ", [f"{G.names[s]} -> {G.names[t]}" for s, t in G.sorted_arrows()])

# %%
# The mechanism of C is a 2 x 4 column-stochastic matrix: one column per joint
# outcome of its parents (A, B), the last parent varying fastest.

print(format_matrix(m.mechanism("C"), digits=3))

# %%
# The joint prior is the evaluation of the diagram that runs every mechanism
# and copies each variable once per child plus once to the output.

P = joint_prior(m)
for outcome, p in zip(np.ndindex(*P.table.shape), P.values):
    labels = ",".join(f.outcomes[i] for f, i in zip(P.factors, outcome))
    print(f"  P({labels}) = {p:.2f}")

# %%
# Marginals can come from the joint or from their own, smaller diagrams.  The
# two routes agree.

print("P(C) from its own diagram:", marginal_prior(m, ["C"]).values)
print("P(A,B):                   ", marginal_prior(m, ["A", "B"]).values)

# %%
# Conditioning the joint recovers the mechanism of C, and also lets us reason
# backwards from an observed effect.

print(format_matrix(conditional_from_joint(P, ["C"], ["A", "B"]), digits=3))
print()
print(format_matrix(conditional_from_joint(P, ["A", "B"], ["C"]), digits=3))

# %%
# A and B are d-separated by the empty set but not by C.  Observing a common
# effect couples its causes.

print("A _||_ B      graph:", G.d_separated(["A"], ["B"], []), " data:", cond_independent(P, ["A"], ["B"]))
print("A _||_ B | C  graph:", G.d_separated(["A"], ["B"], ["C"]), " data:", cond_independent(P, ["A"], ["B"], ["C"]))
print("path:", G.describe_path(G.unblocked_path(["A"], ["B"], ["C"])))

# %%
# Finally, the joint factorizes along the graph.

verdict = check_compatibility(G, P)
print("compatible with the collider:", bool(verdict))

"""
Building causal conditionals
============================

How the diagram for [w'||w] is assembled from the reasoning subgraph, and
why only ancestors can be informative.
"""

# %%
from causal_theories import diagrams_equal, is_inferential
from causal_theories.diagram import causal_conditional, copy, discard, identity, par, seq
from causal_theories.files import data_path, load_structure

G = load_structure(data_path("six_vertex_structure.json"))
print([f"{G.names[s]}->{G.names[t]}" for s, t in G.sorted_arrows()])

# %%
# To predict D and E from B we need every arrow that can carry information
# towards D or E without starting at B's own causes.

sub = G.reasoning_subgraph(["B"], ["D", "E"])
print("arrows:", sorted(f"{G.names[s]}->{G.names[t]}" for s, t in sub.arrows))
print("out-degrees:", {G.names[v]: k for v, k in sorted(sub.out_degree.items())})

# %%
# Each non-given vertex contributes its mechanism, then copies to feed its
# children (plus one output wire if it is a target).  F plays no part.

f = causal_conditional(G, ["B"], ["D", "E"])
for (kind, v), n in sorted(f.census().items(), key=lambda kv: (kv[0][0], kv[0][1])):
    print(f"  {n} x {kind} {G.names[v]}")

# %%
# Equality of diagrams is taken modulo the comonoid laws.  Copying and
# discarding one branch is the identity, and copy chains may be bracketed
# either way.

print(diagrams_equal(seq(copy(0), par(identity(0), discard(0))), identity(0)))
print(diagrams_equal(seq(copy(0), par(copy(0), identity(0))), seq(copy(0), par(identity(0), copy(0)))))

# %%
# A conditional [v||u] connects its input to its output exactly when u is an
# ancestor of v.  Otherwise the input is simply discarded.

for u, v in [("B", "E"), ("A", "F"), ("E", "B"), ("D", "C")]:
    g = causal_conditional(G, [u], [v])
    print(f"[{v}||{u}] inferential: {is_inferential(g)}  ancestor: {G.is_ancestor(u, v)}")

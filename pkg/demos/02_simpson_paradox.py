"""
Simpson's paradox, two ways
===========================

The same treatment data read through two causal structures.  If blood
pressure B mediates the effect of treatment T on recovery R, the causal
conditional [R||T] keeps B's dependence on T.  If B is instead a confounder,
[R||T] cuts it.
"""

# %%
import numpy as np

from causal_theories import conditional, conditional_from_joint, evaluate, joint_prior
from causal_theories.cli import nullified_diagram
from causal_theories.diagram import causal_conditional, to_dot
from causal_theories.files import data_path, format_matrix, load_model

mediator = load_model(data_path("simpson_mediator.json"))
confounder = load_model(data_path("simpson_confounder.json"))

# %%
# In the mediator model T -> B -> R and T -> R.  The diagram for [R||T] copies
# the treatment wire: one branch into B's mechanism, one straight into R's.

G = mediator.structure
f = causal_conditional(G, ["T"], ["R"])
print({f"{k} {G.names[v]}": n for (k, v), n in f.census().items()})
print(format_matrix(conditional(mediator, ["R"], ["T"])))

# %%
# Replacing the copy by a fresh draw of T (so B no longer listens to the
# treatment actually given) produces a different matrix.  This is the
# "nullified" diagram.

print(format_matrix(evaluate(nullified_diagram(G), mediator)))

# %%
# In the confounder model B -> T, B -> R and T -> R.  Now B is not downstream
# of T, so [R||T] feeds R's B-port from B's own prior and the numbers match
# the nullified diagram above.

print(format_matrix(conditional(confounder, ["R"], ["T"])))

# %%
# Plain conditioning on the confounder model's joint gives yet another answer.
# The gap between the two is the paradox.

observed = conditional_from_joint(joint_prior(confounder), ["R"], ["T"])
print(format_matrix(observed))
print("difference:", np.round(observed.data - conditional(confounder, ["R"], ["T"]).data, 4).tolist())

# %%
# The diagram itself, for graphviz:

print(to_dot(f, G, "[R || T]"))

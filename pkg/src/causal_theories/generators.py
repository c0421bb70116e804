"""Random causal structures and models, for property tests and experiments."""

from __future__ import annotations

import numpy as np

from . import diagram as dg
from .model import SetCausalModel, StochCausalModel
from .stoch import StochMatrix
from .structure import CausalStructure


def random_dag(rng: np.random.Generator, n: int, density: float | None = None) -> CausalStructure:
    """A random DAG on ``n`` vertices named ``X0 .. X{n-1}``.

    Arrows only run forward in a hidden random order, so the declaration
    order is generally not topological.
    """
    if density is None:
        density = rng.uniform(0.1, 0.9)
    order = rng.permutation(n)
    names = [f"X{i}" for i in range(n)]
    arrows = []
    for i in range(n):
        for j in range(i + 1, n):
            if rng.random() < density:
                arrows.append((names[order[i]], names[order[j]]))
    return CausalStructure.build(names, arrows)


def random_stochastic(rng: np.random.Generator, rows: int, cols: int, alpha: float = 1.0) -> np.ndarray:
    """A random column-stochastic array with Dirichlet columns."""
    return rng.dirichlet(np.full(rows, alpha), size=cols).T


def random_deterministic(rng: np.random.Generator, rows: int, cols: int) -> np.ndarray:
    data = np.zeros((rows, cols))
    data[rng.integers(0, rows, size=cols), np.arange(cols)] = 1.0
    return data


def _random_spaces(rng, G: CausalStructure, max_card: int):
    return [[f"{name.lower()}{k}" for k in range(rng.integers(2, max_card + 1))] for name in G.names]


def random_model(rng: np.random.Generator, G: CausalStructure | None = None, n: int | None = None,
                 max_card: int = 3, alpha: float = 1.0) -> StochCausalModel:
    """A random stochastic model; cardinalities are drawn from ``2..max_card``."""
    if G is None:
        G = random_dag(rng, n if n is not None else int(rng.integers(1, 6)))
    outcomes = _random_spaces(rng, G, max_card)
    mechs = []
    for v in G.vertices:
        k = int(np.prod([len(outcomes[p]) for p in G.parents(v)], dtype=int))
        mechs.append(random_stochastic(rng, len(outcomes[v]), k, alpha))
    return StochCausalModel.build(G, outcomes, mechs)


def random_set_model(rng: np.random.Generator, G: CausalStructure, max_card: int = 3) -> SetCausalModel:
    outcomes = _random_spaces(rng, G, max_card)
    funcs = []
    for v in G.vertices:
        k = int(np.prod([len(outcomes[p]) for p in G.parents(v)], dtype=int))
        funcs.append(rng.integers(0, len(outcomes[v]), size=k).tolist())
    return SetCausalModel.build(G, outcomes, funcs)


def random_matrix(rng: np.random.Generator, rows: int, cols: int, deterministic: bool = False) -> StochMatrix:
    data = random_deterministic(rng, rows, cols) if deterministic else random_stochastic(rng, rows, cols)
    return StochMatrix(data)


def random_layer(rng: np.random.Generator, G: CausalStructure, dom: dg.TheoryObject) -> dg.Diagram:
    """A random diagram with domain ``dom`` built as a shuffled tensor of generators.

    Each wire is kept, copied, discarded or, together with the other
    parents of some child, fed into that child's mechanism.  Now and then a
    root mechanism is added from nothing.
    """
    pool = list(dom)
    rng.shuffle(pool)
    blocks = []
    while pool:
        v = pool.pop()
        choice = rng.integers(0, 4)
        if choice == 3:
            options = []
            for c in G.children(v):
                rest = list(G.parents(c))
                rest.remove(v)
                if all(pool.count(u) >= rest.count(u) for u in set(rest)):
                    options.append(c)
            if options:
                c = options[rng.integers(0, len(options))]
                for u in G.parents(c):
                    if u != v:
                        pool.remove(u)
                blocks.append(dg.mechanism(G, c))
                continue
        blocks.append([dg.identity(v), dg.copy(v), dg.discard(v), dg.identity(v)][choice])
    roots = [v for v in G.vertices if not G.parents(v)]
    if roots and rng.random() < 0.3:
        blocks.append(dg.mechanism(G, roots[rng.integers(0, len(roots))]))
    order = rng.permutation(len(blocks))
    return dg.par_all(*(blocks[i] for i in order))


def random_object(rng: np.random.Generator, G: CausalStructure, max_size: int = 3) -> dg.TheoryObject:
    k = int(rng.integers(0, max_size + 1))
    return dg.TheoryObject(tuple(int(v) for v in rng.integers(0, len(G), size=k)))


def random_diagram(rng: np.random.Generator, G: CausalStructure, layers: int = 3,
                   dom: dg.TheoryObject | None = None, max_wires: int = 6) -> dg.Diagram:
    """A random well-typed diagram: a composite of ``layers`` random layers.

    Layers that would widen the diagram beyond ``max_wires`` wires are
    redrawn, which keeps the evaluated matrices small.
    """
    if dom is None:
        dom = random_object(rng, G)
    f = dg.identity(dom)
    for _ in range(layers):
        for _attempt in range(20):
            layer = random_layer(rng, G, f.cod)
            if len(layer.cod) <= max_wires:
                break
        else:
            layer = dg.identity(f.cod)
        f = dg.seq(f, layer)
    return f

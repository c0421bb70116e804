"""Models of causal theories and their morphisms.

A model sends each variable to a finite outcome space and each causal
mechanism to a matrix.  :func:`evaluate` extends a model to every diagram by
composing layer after layer of tensored generators, so a stochastic model is
a strong monoidal functor made concrete.

Matrix axes need an order even though objects of the theory are multisets.
The evaluator always orders a boundary by ascending variable index, breaking
ties by boundary position.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass
from typing import Callable, Iterable, Iterator, Mapping, Sequence

import numpy as np

from . import diagram as dg
from .diagram import BOUNDARY, COPY, MECHANISM, Diagram
from .errors import (
    FactorMismatch,
    InvalidMorphism,
    ModelMismatch,
    NotADistribution,
    StructureMismatch,
)
from .stoch import (
    POINT,
    TOL,
    BoolMatrix,
    FinSpace,
    JointDistribution,
    StochMatrix,
    _perm_index,
    compose,
    conditional_from_joint,
    cond_independent,
    copy_matrix,
    factor_deterministic,
    function_of,
    identity_matrix,
    induced_matrix,
    is_deterministic,
    is_injective,
    is_surjective,
    product_size,
    support,
    tensor,
)
from .structure import CausalStructure, Vertex

# -- models ---------------------------------------------------------------------


def _named_spaces(G: CausalStructure, outcomes) -> tuple[FinSpace, ...]:
    if isinstance(outcomes, Mapping):
        missing = [n for n in G.names if n not in outcomes]
        if missing:
            raise ModelMismatch(f"no outcomes given for {missing}")
        outcomes = [outcomes[n] for n in G.names]
    outcomes = list(outcomes)
    if len(outcomes) != len(G):
        raise ModelMismatch(f"{len(outcomes)} outcome spaces for {len(G)} variables")
    return tuple(
        o.renamed(n) if isinstance(o, FinSpace) else FinSpace(n, tuple(o))
        for n, o in zip(G.names, outcomes)
    )


def _per_variable(G: CausalStructure, values, what: str) -> list:
    if isinstance(values, Mapping):
        missing = [n for n in G.names if n not in values]
        if missing:
            raise ModelMismatch(f"no {what} given for {missing}")
        return [values[n] for n in G.names]
    values = list(values)
    if len(values) != len(G):
        raise ModelMismatch(f"{len(values)} {what} for {len(G)} variables")
    return values


class _Model:
    structure: CausalStructure
    spaces: tuple[FinSpace, ...]

    def space(self, v: Vertex) -> FinSpace:
        return self.spaces[self.structure.index(v)]

    def parent_spaces(self, v: Vertex) -> tuple[FinSpace, ...]:
        return tuple(self.spaces[p] for p in self.structure.parents(v))

    def _check_mechanisms(self) -> None:
        G = self.structure
        if len(self.spaces) != len(G) or len(self.mechanisms) != len(G):
            raise ModelMismatch("need one space and one mechanism per variable")
        for v in G.vertices:
            m = self.mechanisms[v]
            if m.dom != self.parent_spaces(v) or m.cod != (self.spaces[v],):
                raise ModelMismatch(
                    f"mechanism for {G.names[v]} has type {[s.name for s in m.dom]} -> {[s.name for s in m.cod]}, "
                    f"expected {[G.names[p] for p in G.parents(v)]} -> [{G.names[v]}]"
                )


@dataclass(frozen=True, eq=False)
class StochCausalModel(_Model):
    """A stochastic causal model: one outcome space and one stochastic mechanism per variable.

    The mechanism of ``v`` maps the ordered product of its parents' spaces
    (canonical parent order) to the space of ``v``.
    """

    structure: CausalStructure
    spaces: tuple[FinSpace, ...]
    mechanisms: tuple[StochMatrix, ...]

    def __post_init__(self) -> None:
        object.__setattr__(self, "spaces", tuple(self.spaces))
        object.__setattr__(self, "mechanisms", tuple(self.mechanisms))
        self._check_mechanisms()

    @classmethod
    def build(cls, G: CausalStructure, outcomes, mechanisms) -> StochCausalModel:
        """Build a model from outcome labels and mechanism arrays.

        ``outcomes`` and ``mechanisms`` are either mappings keyed by variable
        name or sequences in canonical order.  Each mechanism array is in
        matrix orientation: one row per outcome of the variable, one column
        per joint parent outcome (row-major over parents).
        """
        spaces = _named_spaces(G, outcomes)
        mechs = []
        for v, arr in enumerate(_per_variable(G, mechanisms, "mechanisms")):
            dom = tuple(spaces[p] for p in G.parents(v))
            mechs.append(arr if isinstance(arr, StochMatrix) and arr.dom == dom
                         else StochMatrix(np.asarray(arr, dtype=float), dom, spaces[v]))
        return cls(G, spaces, tuple(mechs))

    def mechanism(self, v: Vertex) -> StochMatrix:
        return self.mechanisms[self.structure.index(v)]

    def support_model(self) -> RelCausalModel:
        """The possibilistic shadow of this model: which outcomes can occur."""
        return RelCausalModel(self.structure, self.spaces, tuple(support(m) for m in self.mechanisms))

    def __repr__(self) -> str:
        return f"<StochCausalModel {list(self.structure.names)}>"


@dataclass(frozen=True, eq=False)
class RelCausalModel(_Model):
    structure: CausalStructure
    spaces: tuple[FinSpace, ...]
    mechanisms: tuple[BoolMatrix, ...]

    def __post_init__(self) -> None:
        object.__setattr__(self, "spaces", tuple(self.spaces))
        object.__setattr__(self, "mechanisms", tuple(self.mechanisms))
        self._check_mechanisms()

    @classmethod
    def build(cls, G: CausalStructure, outcomes, relations) -> RelCausalModel:
        spaces = _named_spaces(G, outcomes)
        mechs = []
        for v, arr in enumerate(_per_variable(G, relations, "relations")):
            dom = tuple(spaces[p] for p in G.parents(v))
            mechs.append(BoolMatrix(np.asarray(arr, dtype=bool), dom, spaces[v]))
        return cls(G, spaces, tuple(mechs))


@dataclass(frozen=True, eq=False)
class SetCausalModel(_Model):
    """A deterministic model: each mechanism is a function on outcome indices.

    ``functions[v][k]`` is the outcome index of ``v`` for the ``k``-th joint
    parent outcome (row-major over parents).  A root's function has one
    entry: its default outcome.
    """

    structure: CausalStructure
    spaces: tuple[FinSpace, ...]
    functions: tuple[tuple[int, ...], ...]

    def __post_init__(self) -> None:
        object.__setattr__(self, "spaces", tuple(self.spaces))
        object.__setattr__(self, "functions", tuple(tuple(int(x) for x in f) for f in self.functions))
        G = self.structure
        if len(self.spaces) != len(G) or len(self.functions) != len(G):
            raise ModelMismatch("need one space and one function per variable")
        for v in G.vertices:
            f = self.functions[v]
            if len(f) != product_size(self.parent_spaces(v)):
                raise ModelMismatch(f"function for {G.names[v]} is not total on its parents' outcomes")
            if any(not 0 <= x < self.spaces[v].size for x in f):
                raise ModelMismatch(f"function for {G.names[v]} leaves its outcome space")

    @classmethod
    def build(cls, G: CausalStructure, outcomes, functions) -> SetCausalModel:
        spaces = _named_spaces(G, outcomes)
        return cls(G, spaces, tuple(_per_variable(G, functions, "functions")))

    @property
    def mechanisms(self) -> tuple[StochMatrix, ...]:
        return tuple(induced_matrix(self.parent_spaces(v), self.spaces[v], self.functions[v])
                     for v in self.structure.vertices)

    def induced(self) -> StochCausalModel:
        return StochCausalModel(self.structure, self.spaces, self.mechanisms)


# -- evaluation -------------------------------------------------------------------


@dataclass(frozen=True)
class _Backend:
    dtype: type
    matmul: Callable[[np.ndarray, np.ndarray], np.ndarray]


_STOCH = _Backend(float, lambda a, b: a @ b)
_BOOL = _Backend(bool, lambda a, b: (a.astype(np.int64) @ b.astype(np.int64)) > 0)


def _canonical(labels: Sequence[int]) -> list[int]:
    return sorted(range(len(labels)), key=lambda i: (labels[i], i))


def _evaluate(d: Diagram, model, backend: _Backend) -> tuple[np.ndarray, tuple[FinSpace, ...], tuple[FinSpace, ...]]:
    G = model.structure
    spaces = model.spaces
    n = len(G)
    for box in d.boxes:
        if not 0 <= box.var < n:
            raise ModelMismatch(f"diagram uses variable {box.var}, model has {n}")
        if box.kind == MECHANISM and box.inputs != G.parents(box.var):
            raise ModelMismatch(f"mechanism box for {G.names[box.var]} has inputs {box.inputs}, "
                                f"model expects {G.parents(box.var)}")
    for v in d.inputs + d.outputs:
        if not 0 <= v < n:
            raise ModelMismatch(f"diagram boundary uses variable {v}, model has {n}")

    def box_array(box) -> np.ndarray:
        if box.kind == MECHANISM:
            return np.asarray(model.mechanisms[box.var].data, dtype=backend.dtype)
        if box.kind == COPY:
            return copy_matrix(spaces[box.var]).data.astype(backend.dtype)
        return np.ones((1, spaces[box.var].size), dtype=backend.dtype)

    def permute(M: np.ndarray, frontier: list[int], order: list[int]) -> np.ndarray:
        # multiplying by a permutation matrix only reorders rows
        perm = [frontier.index(w) for w in order]
        if perm == list(range(len(perm))):
            return M
        return M[_perm_index([spaces[d.wires[w].label] for w in frontier], perm)]

    consumer_of = {w.dst: i for i, w in enumerate(d.wires)}
    producer_of = {w.src: i for i, w in enumerate(d.wires)}

    in_order = _canonical(d.inputs)
    frontier = [producer_of[(BOUNDARY, i)] for i in in_order]
    M = np.eye(product_size([spaces[d.inputs[i]] for i in in_order]), dtype=backend.dtype)

    # stratify: a box sits one layer above the highest box feeding it
    depth: dict[int, int] = {}
    for b in d.box_order():
        feeders = [d.wires[consumer_of[(b, p)]].src[0] for p in range(len(d.boxes[b].inputs))]
        depth[b] = 1 + max((depth[f] for f in feeders if f != BOUNDARY), default=-1)
    layers: dict[int, list[int]] = {}
    for b, k in depth.items():
        layers.setdefault(k, []).append(b)

    for k in sorted(layers):
        boxes = sorted(layers[k])
        consumed = [consumer_of[(b, p)] for b in boxes for p in range(len(d.boxes[b].inputs))]
        taken = set(consumed)
        passthrough = [w for w in frontier if w not in taken]
        M = permute(M, frontier, consumed + passthrough)
        op = np.ones((1, 1), dtype=backend.dtype)
        for b in boxes:
            op = np.kron(op, box_array(d.boxes[b])).astype(backend.dtype)
        # (op x id) . M without forming the identity: passthrough wires are the trailing axes
        cols = M.shape[1]
        M = backend.matmul(op, M.reshape(op.shape[1], -1)).reshape(-1, cols)
        produced = [producer_of[(b, p)] for b in boxes for p in range(len(d.boxes[b].outputs))]
        frontier = produced + passthrough
        ordered = sorted(frontier, key=lambda w: (d.wires[w].label, w))
        M = permute(M, frontier, ordered)
        frontier = ordered

    out_order = _canonical(d.outputs)
    M = permute(M, frontier, [consumer_of[(BOUNDARY, j)] for j in out_order])
    dom = tuple(spaces[d.inputs[i]] for i in in_order)
    cod = tuple(spaces[d.outputs[j]] for j in out_order)
    return M, dom, cod


def evaluate(d: Diagram, m: StochCausalModel) -> StochMatrix:
    """The stochastic matrix a model assigns to a diagram.

    Rows follow the codomain and columns the domain, each ordered by
    ascending variable index.
    """
    if isinstance(m, SetCausalModel):
        return evaluate_set(d, m)
    M, dom, cod = _evaluate(d, m, _STOCH)
    return StochMatrix(M, dom, cod)


def evaluate_rel(d: Diagram, m: RelCausalModel) -> BoolMatrix:
    M, dom, cod = _evaluate(d, m, _BOOL)
    return BoolMatrix(M, dom, cod)


def evaluate_set(d: Diagram, m: SetCausalModel) -> StochMatrix:
    M, dom, cod = _evaluate(d, m.induced(), _STOCH)
    K = StochMatrix(M, dom, cod)
    assert is_deterministic(K), "deterministic models must evaluate to deterministic maps"
    return K


def conditional(m: StochCausalModel, targets: Iterable[Vertex], given: Iterable[Vertex] = ()) -> StochMatrix:
    """Evaluate the causal conditional of ``targets`` given ``given``."""
    return evaluate(dg.causal_conditional(m.structure, given, targets), m)


def joint_prior(m: StochCausalModel) -> JointDistribution:
    """The joint distribution over all variables, in canonical order."""
    K = evaluate(dg.prior(m.structure, m.structure.vertices), m)
    return JointDistribution.from_matrix(K)


def marginal_prior(m: StochCausalModel, w: Iterable[Vertex]) -> JointDistribution:
    """The prior on ``w``, computed from its own (usually smaller) diagram."""
    K = evaluate(dg.prior(m.structure, w), m)
    return JointDistribution.from_matrix(K)


# -- compatibility ------------------------------------------------------------------


@dataclass(frozen=True)
class Compatibility:
    """Verdict of :func:`check_compatibility`.

    On success ``conditionals`` maps each variable name to its conditional
    given its parents; on failure ``offending`` names the first outcome tuple
    where the factorization breaks.
    """

    compatible: bool
    conditionals: dict[str, StochMatrix] | None = None
    offending: tuple[str, ...] | None = None
    joint_value: float | None = None
    product_value: float | None = None

    def __bool__(self) -> bool:
        return self.compatible


def _check_factors(G: CausalStructure, P: JointDistribution) -> None:
    if P.names != G.names:
        raise FactorMismatch(f"joint factors {list(P.names)} do not match variables {list(G.names)}")


def check_compatibility(G: CausalStructure, P: JointDistribution, tol: float = TOL) -> Compatibility:
    """Whether ``P`` factorizes as the product of each variable's conditional given its parents."""
    _check_factors(G, P)
    conds = [conditional_from_joint(P, [v], G.parents(v)) for v in G.vertices]
    zero = [set(c.zero_mass_columns) for c in conds]
    sizes = [f.size for f in P.factors]
    table = P.table
    for x in np.ndindex(*sizes):
        prod = 1.0
        skip = False
        for v in G.vertices:
            col = 0
            for p in G.parents(v):
                col = col * sizes[p] + x[p]
            if col in zero[v]:
                skip = True
                break
            prod *= conds[v].data[x[v], col]
        if skip:
            continue
        if abs(table[x] - prod) > tol:
            labels = tuple(f.outcomes[i] for f, i in zip(P.factors, x))
            return Compatibility(False, offending=labels, joint_value=float(table[x]), product_value=prod)
    return Compatibility(True, conditionals={G.names[v]: conds[v] for v in G.vertices})


def ordered_markov(G: CausalStructure, P: JointDistribution, tol: float = TOL) -> bool:
    """Each variable is independent of its other predecessors given its parents."""
    _check_factors(G, P)
    order = G.ancestral_ordering()
    for i, v in enumerate(order):
        pa = set(G.parents(v))
        rest = [u for u in order[:i] if u not in pa]
        if not cond_independent(P, [v], rest, pa, tol):
            return False
    return True


def parental_markov(G: CausalStructure, P: JointDistribution, tol: float = TOL) -> bool:
    """Each variable is independent of its non-descendants given its parents."""
    _check_factors(G, P)
    for v in G.vertices:
        pa = set(G.parents(v))
        nondesc = [u for u in G.vertices if u != v and u not in pa and u not in G.descendants(v)]
        if not cond_independent(P, [v], nondesc, pa, tol):
            return False
    return True


# -- trivial and terminal models ----------------------------------------------------------


def trivial_model(G: CausalStructure, s: FinSpace | Sequence[str], dist: Sequence[float]) -> StochCausalModel:
    """Every variable gets the space ``s`` and the distribution ``dist``, whatever its parents."""
    dist = np.asarray(dist, dtype=float).reshape(-1)
    labels = s.outcomes if isinstance(s, FinSpace) else tuple(s)
    if dist.size != len(labels) or dist.min(initial=0) < -TOL or abs(dist.sum() - 1.0) > TOL:
        raise NotADistribution(f"{dist.tolist()} is not a distribution on {len(labels)} outcomes")
    spaces = _named_spaces(G, [labels] * len(G))
    mechs = []
    for v in G.vertices:
        k = product_size([spaces[p] for p in G.parents(v)])
        mechs.append(np.tile(dist.reshape(-1, 1), (1, k)))
    return StochCausalModel.build(G, spaces, mechs)


def terminal_model(G: CausalStructure) -> StochCausalModel:
    return trivial_model(G, POINT, [1.0])


# -- morphisms ------------------------------------------------------------------------


@dataclass(frozen=True, eq=False)
class ModelMorphism:
    """Per-variable maps ``components[v]: source.space(v) -> target.space(v)``."""

    source: StochCausalModel
    target: StochCausalModel
    components: tuple[StochMatrix, ...]

    def __post_init__(self) -> None:
        if self.source.structure != self.target.structure:
            raise StructureMismatch("source and target models have different causal structures")
        G = self.source.structure
        comps = tuple(self.components)
        if len(comps) != len(G):
            raise ModelMismatch(f"{len(comps)} components for {len(G)} variables")
        for v, a in enumerate(comps):
            if a.dom != (self.source.spaces[v],) or a.cod != (self.target.spaces[v],):
                raise ModelMismatch(f"component for {G.names[v]} has the wrong type")
        object.__setattr__(self, "components", comps)

    @property
    def structure(self) -> CausalStructure:
        return self.source.structure

    @classmethod
    def from_maps(cls, source: StochCausalModel, target: StochCausalModel,
                  maps: Mapping[str, Mapping[str, str]] | Sequence[Sequence[int]]) -> ModelMorphism:
        """Build from outcome maps: label-to-label dicts per variable name, or index tables."""
        G = source.structure
        comps = []
        for v in G.vertices:
            s, t = source.spaces[v], target.spaces[v]
            if isinstance(maps, Mapping):
                table = maps[G.names[v]]
                f = [t.index(table[label]) for label in s.outcomes]
            else:
                f = list(maps[v])
            comps.append(induced_matrix(s, t, f))
        return cls(source, target, tuple(comps))

    def component(self, w: Iterable[Vertex]) -> StochMatrix:
        """The component on a product of variables, ordered canonically."""
        return tensor(*(self.components[v] for v in self.structure.subset(w)))


def identity_morphism(m: StochCausalModel) -> ModelMorphism:
    return ModelMorphism(m, m, tuple(identity_matrix(s) for s in m.spaces))


def terminal_morphism(m: StochCausalModel) -> ModelMorphism:
    T = terminal_model(m.structure)
    return ModelMorphism(m, T, tuple(induced_matrix(s, T.spaces[v], [0] * s.size)
                                     for v, s in enumerate(m.spaces)))


@dataclass(frozen=True)
class MorphismVerdict:
    valid: bool
    variable: str | None = None
    reason: str | None = None
    residual: float = 0.0

    def __bool__(self) -> bool:
        return self.valid


def validate_morphism(phi: ModelMorphism, tol: float = TOL) -> MorphismVerdict:
    """Check determinism of every component and commutation of every mechanism square.

    For a root variable the square is the prior triangle: the pushforward of
    the source prior must equal the target prior.
    """
    G = phi.structure
    for v in G.vertices:
        if not is_deterministic(phi.components[v], tol):
            return MorphismVerdict(False, G.names[v], "component is not deterministic")
    for v in G.vertices:
        pa = G.parents(v)
        lhs = compose(phi.components[v], phi.source.mechanisms[v])
        rhs = compose(phi.target.mechanisms[v], phi.component(pa))
        err = float(np.max(np.abs(lhs.data - rhs.data)))
        if err > tol:
            what = "prior triangle" if not pa else "mechanism square"
            return MorphismVerdict(False, G.names[v], f"{what} does not commute", err)
    return MorphismVerdict(True)


def deterministic_maps(dom: FinSpace, cod: FinSpace) -> Iterator[StochMatrix]:
    """All deterministic maps between two spaces (``cod.size ** dom.size`` of them)."""
    for f in itertools.product(range(cod.size), repeat=dom.size):
        yield induced_matrix(dom, cod, f)


def candidate_morphisms(P: StochCausalModel, Q: StochCausalModel) -> Iterator[ModelMorphism]:
    """Every family of deterministic components from ``P`` to ``Q``, valid or not."""
    per_var = [list(deterministic_maps(s, t)) for s, t in zip(P.spaces, Q.spaces)]
    for comps in itertools.product(*per_var):
        yield ModelMorphism(P, Q, comps)


def find_morphisms(P: StochCausalModel, Q: StochCausalModel, tol: float = TOL) -> list[ModelMorphism]:
    """Exhaustively search for the valid morphisms ``P => Q``."""
    return [phi for phi in candidate_morphisms(P, Q) if validate_morphism(phi, tol)]


@dataclass(frozen=True)
class Classification:
    kind: str  # "isomorphism", "embedding", "coarse graining" or "general"
    intermediate: StochCausalModel
    coarse: ModelMorphism
    embed: ModelMorphism

    @property
    def is_embedding(self) -> bool:
        return self.kind in ("isomorphism", "embedding")

    @property
    def is_coarse_graining(self) -> bool:
        return self.kind in ("isomorphism", "coarse graining")


def classify_morphism(phi: ModelMorphism, tol: float = TOL) -> Classification:
    """Factor a valid morphism as a coarse graining followed by an embedding."""
    verdict = validate_morphism(phi, tol)
    if not verdict:
        raise InvalidMorphism(f"not a morphism of models: {verdict.reason} at {verdict.variable}")
    G = phi.structure
    P = phi.source
    parts = [factor_deterministic(a) for a in phi.components]
    mid_spaces = tuple(c.cod[0] for c, _ in parts)
    # a section picks the first preimage of each image outcome
    sections = []
    for c, _ in parts:
        f = function_of(c)
        sections.append(induced_matrix(c.cod, c.dom, [f.index(y) for y in range(c.shape[0])]))
    mechs = []
    for v in G.vertices:
        s = tensor(*(sections[p] for p in G.parents(v)))
        mechs.append(compose(parts[v][0], compose(P.mechanisms[v], s)))
    mid = StochCausalModel(G, mid_spaces, tuple(mechs))
    coarse = ModelMorphism(P, mid, tuple(c for c, _ in parts))
    embed = ModelMorphism(mid, phi.target, tuple(e for _, e in parts))

    inj = all(is_injective(a) for a in phi.components)
    surj = all(is_surjective(a) for a in phi.components)
    kind = {(True, True): "isomorphism", (True, False): "embedding",
            (False, True): "coarse graining", (False, False): "general"}[(inj, surj)]
    return Classification(kind, mid, coarse, embed)


def is_comonoid_homomorphism(K: StochMatrix, tol: float = TOL) -> bool:
    """Whether ``K`` commutes with copying: copy . K == (K x K) . copy.

    Products are flattened first; copying a product is copying its tuples.
    """
    dom, cod = FinSpace.of_size(K.shape[1]), FinSpace.of_size(K.shape[0])
    flat = StochMatrix(K.data, dom, cod)
    lhs = compose(copy_matrix(cod), flat)
    rhs = compose(tensor(flat, flat), copy_matrix(dom))
    return bool(np.all(np.abs(lhs.data - rhs.data) <= tol))

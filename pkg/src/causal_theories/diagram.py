"""String diagrams of a causal theory as open acyclic port graphs.

A :class:`Diagram` is a set of boxes (causal mechanisms, copies and discards)
joined by wires.  Every wire carries one variable and has exactly one
producer (a boundary input or a box output port) and one consumer (a boundary
output or a box input port).  Objects of the theory are multisets of
variables, so there is no swap generator: the order of boundary ports is kept
only for bookkeeping and never affects equality.
"""

from __future__ import annotations

from collections import Counter, defaultdict
from dataclasses import dataclass
from typing import Iterable, Sequence

import networkx as nx
from networkx.algorithms import isomorphism

from .errors import CodomainMismatch, MalformedDiagram
from .structure import CausalStructure, Vertex

MECHANISM = "mechanism"
COPY = "copy"
DISCARD = "discard"

BOUNDARY = -1  # box index used for boundary endpoints


@dataclass(frozen=True, order=True)
class TheoryObject:
    """A multiset of variables, stored as a sorted tuple of vertex indices."""

    elements: tuple[int, ...] = ()

    def __post_init__(self) -> None:
        els = tuple(sorted(self.elements))
        if any(e < 0 for e in els):
            raise ValueError("variables are non-negative indices")
        object.__setattr__(self, "elements", els)

    @classmethod
    def of(cls, *vs: int) -> TheoryObject:
        return cls(tuple(vs))

    def multiplicity(self, v: int) -> int:
        return self.elements.count(v)

    def counts(self) -> dict[int, int]:
        return dict(Counter(self.elements))

    def __add__(self, other: TheoryObject) -> TheoryObject:
        return TheoryObject(self.elements + other.elements)

    def __len__(self) -> int:
        return len(self.elements)

    def __iter__(self):
        return iter(self.elements)

    @property
    def is_unit(self) -> bool:
        return not self.elements

    def names(self, G: CausalStructure) -> str:
        return " ".join(G.names[v] for v in self.elements) or "()"


UNIT = TheoryObject()


@dataclass(frozen=True)
class Box:
    kind: str
    var: int
    inputs: tuple[int, ...]
    outputs: tuple[int, ...]

    def __post_init__(self) -> None:
        if self.kind == MECHANISM:
            ok = self.outputs == (self.var,) and list(self.inputs) == sorted(set(self.inputs))
        elif self.kind == COPY:
            ok = self.inputs == (self.var,) and self.outputs == (self.var, self.var)
        elif self.kind == DISCARD:
            ok = self.inputs == (self.var,) and self.outputs == ()
        else:
            raise MalformedDiagram(f"unknown box kind {self.kind!r}")
        if not ok:
            raise MalformedDiagram(f"ill-typed {self.kind} box: {self.inputs} -> {self.outputs}")

    def label(self, G: CausalStructure | None = None) -> str:
        name = (lambda v: G.names[v]) if G is not None else str
        if self.kind == MECHANISM:
            if self.inputs:
                return f"{name(self.var)}|{''.join(name(u) for u in self.inputs)}"
            return name(self.var)
        return f"{self.kind} {name(self.var)}"


@dataclass(frozen=True)
class Wire:
    label: int
    src: tuple[int, int]  # (box index or BOUNDARY, port)
    dst: tuple[int, int]


@dataclass(frozen=True)
class Diagram:
    boxes: tuple[Box, ...]
    wires: tuple[Wire, ...]
    inputs: tuple[int, ...]
    outputs: tuple[int, ...]

    def __post_init__(self) -> None:
        self._validate()

    def _validate(self) -> None:
        produced: Counter = Counter()
        consumed: Counter = Counter()
        for w in self.wires:
            b, p = w.src
            if b == BOUNDARY:
                ok = 0 <= p < len(self.inputs) and self.inputs[p] == w.label
            else:
                ok = 0 <= b < len(self.boxes) and 0 <= p < len(self.boxes[b].outputs) and self.boxes[b].outputs[p] == w.label
            if not ok:
                raise MalformedDiagram(f"wire {w} has a bad or mistyped producer")
            b, p = w.dst
            if b == BOUNDARY:
                ok = 0 <= p < len(self.outputs) and self.outputs[p] == w.label
            else:
                ok = 0 <= b < len(self.boxes) and 0 <= p < len(self.boxes[b].inputs) and self.boxes[b].inputs[p] == w.label
            if not ok:
                raise MalformedDiagram(f"wire {w} has a bad or mistyped consumer")
            produced[w.src] += 1
            consumed[w.dst] += 1
        want_src = [(BOUNDARY, i) for i in range(len(self.inputs))]
        want_dst = [(BOUNDARY, j) for j in range(len(self.outputs))]
        for b, box in enumerate(self.boxes):
            want_src += [(b, p) for p in range(len(box.outputs))]
            want_dst += [(b, p) for p in range(len(box.inputs))]
        if Counter(want_src) != produced:
            raise MalformedDiagram("every producer port must feed exactly one wire")
        if Counter(want_dst) != consumed:
            raise MalformedDiagram("every consumer port must take exactly one wire")
        try:
            self.box_order()
        except nx.NetworkXUnfeasible:
            raise MalformedDiagram("diagram contains a directed cycle of boxes") from None

    def box_graph(self) -> nx.DiGraph:
        g = nx.DiGraph()
        g.add_nodes_from(range(len(self.boxes)))
        g.add_edges_from((w.src[0], w.dst[0]) for w in self.wires if w.src[0] != BOUNDARY and w.dst[0] != BOUNDARY)
        return g

    def box_order(self) -> list[int]:
        return list(nx.lexicographical_topological_sort(self.box_graph()))

    @property
    def dom(self) -> TheoryObject:
        return TheoryObject(self.inputs)

    @property
    def cod(self) -> TheoryObject:
        return TheoryObject(self.outputs)

    def census(self) -> Counter:
        """Count boxes by ``(kind, variable)``."""
        return Counter((b.kind, b.var) for b in self.boxes)

    def __repr__(self) -> str:
        return f"<Diagram {self.dom.elements} -> {self.cod.elements}, {len(self.boxes)} boxes, {len(self.wires)} wires>"


def dom(f: Diagram) -> TheoryObject:
    return f.dom


def cod(f: Diagram) -> TheoryObject:
    return f.cod


def _as_object(w) -> TheoryObject:
    if isinstance(w, TheoryObject):
        return w
    if isinstance(w, int):
        return TheoryObject((w,))
    return TheoryObject(tuple(w))


# -- generators -----------------------------------------------------------------


def identity(w: TheoryObject | Iterable[int] | int = UNIT) -> Diagram:
    els = _as_object(w).elements
    wires = tuple(Wire(v, (BOUNDARY, i), (BOUNDARY, i)) for i, v in enumerate(els))
    return Diagram((), wires, els, els)


def _single(box: Box) -> Diagram:
    wires = [Wire(v, (BOUNDARY, i), (0, i)) for i, v in enumerate(box.inputs)]
    wires += [Wire(v, (0, j), (BOUNDARY, j)) for j, v in enumerate(box.outputs)]
    return Diagram((box,), tuple(wires), box.inputs, box.outputs)


def mechanism(G: CausalStructure, v: Vertex) -> Diagram:
    """The causal mechanism of ``v``: inputs are its parents in canonical order."""
    v = G.index(v)
    return _single(Box(MECHANISM, v, G.parents(v), (v,)))


def copy(v: int) -> Diagram:
    return _single(Box(COPY, v, (v,), (v, v)))


def discard(v: int) -> Diagram:
    return _single(Box(DISCARD, v, (v,), ()))


# -- composition ----------------------------------------------------------------------


def _shift(end: tuple[int, int], boxes: int, boundary: int) -> tuple[int, int]:
    b, p = end
    return (b, p + boundary) if b == BOUNDARY else (b + boxes, p)


def seq(f: Diagram, g: Diagram) -> Diagram:
    """Sequential composite: first ``f``, then ``g``.

    Within each variable, ``f``'s boundary outputs are matched to ``g``'s
    boundary inputs in order of boundary position.
    """
    if f.cod != g.dom:
        raise CodomainMismatch(f"codomain {f.cod.elements} does not match domain {g.dom.elements}")
    by_label_out: dict[int, list[int]] = defaultdict(list)
    for j, v in enumerate(f.outputs):
        by_label_out[v].append(j)
    by_label_in: dict[int, list[int]] = defaultdict(list)
    for i, v in enumerate(g.inputs):
        by_label_in[v].append(i)
    match = {}  # g input index -> f output index
    for v, ins in by_label_in.items():
        match.update(zip(ins, by_label_out[v]))

    n = len(f.boxes)
    g_from_input = {w.src[1]: w for w in g.wires if w.src[0] == BOUNDARY}
    out_to_g_input = {j: i for i, j in match.items()}
    wires = []
    for w in f.wires:
        if w.dst[0] == BOUNDARY:
            gw = g_from_input[out_to_g_input[w.dst[1]]]
            wires.append(Wire(w.label, w.src, _shift(gw.dst, n, 0)))
        else:
            wires.append(w)
    for w in g.wires:
        if w.src[0] != BOUNDARY:
            wires.append(Wire(w.label, _shift(w.src, n, 0), _shift(w.dst, n, 0)))
    return Diagram(f.boxes + g.boxes, tuple(wires), f.inputs, g.outputs)


def par(f: Diagram, g: Diagram) -> Diagram:
    """Monoidal product: disjoint union, ``g`` placed after ``f``."""
    n, ni, no = len(f.boxes), len(f.inputs), len(f.outputs)
    wires = list(f.wires)
    for w in g.wires:
        src = _shift(w.src, n, ni)
        dst = _shift(w.dst, n, no)
        wires.append(Wire(w.label, src, dst))
    return Diagram(f.boxes + g.boxes, tuple(wires), f.inputs + g.inputs, f.outputs + g.outputs)


def seq_all(*fs: Diagram) -> Diagram:
    out = fs[0]
    for f in fs[1:]:
        out = seq(out, f)
    return out


def par_all(*fs: Diagram) -> Diagram:
    out = identity()
    for f in fs:
        out = par(out, f)
    return out


# -- connectivity -------------------------------------------------------------------------


def is_inferential(f: Diagram) -> bool:
    """Whether some boundary input is connected to some boundary output.

    Connectivity is taken in the undirected incidence graph of wires and
    boxes; a diagram that is not connected this way factors through the
    monoidal unit.
    """
    g = nx.Graph()
    for w in f.wires:
        a = ("in", w.src[1]) if w.src[0] == BOUNDARY else ("box", w.src[0])
        b = ("out", w.dst[1]) if w.dst[0] == BOUNDARY else ("box", w.dst[0])
        g.add_edge(a, b)
    for comp in nx.connected_components(g):
        kinds = {n[0] for n in comp}
        if "in" in kinds and "out" in kinds:
            return True
    return False


# -- causal conditionals --------------------------------------------------------------------


class _Builder:
    def __init__(self) -> None:
        self.boxes: list[Box] = []
        self.wires: list[list] = []  # [label, src, dst]

    def box(self, box: Box) -> int:
        self.boxes.append(box)
        return len(self.boxes) - 1

    def wire(self, label: int, src: tuple[int, int]) -> int:
        self.wires.append([label, src, None])
        return len(self.wires) - 1

    def connect(self, wire: int, dst: tuple[int, int]) -> None:
        self.wires[wire][2] = dst

    def fan_out(self, v: int, source: int, n: int) -> list[int]:
        """Split wire ``source`` into ``n`` branches by a chain of ``n - 1`` copies.

        For ``n == 0`` the wire is discarded instead.
        """
        if n == 0:
            b = self.box(Box(DISCARD, v, (v,), ()))
            self.connect(source, (b, 0))
            return []
        branches = [source]
        for _ in range(n - 1):
            last = branches.pop()
            b = self.box(Box(COPY, v, (v,), (v, v)))
            self.connect(last, (b, 0))
            branches += [self.wire(v, (b, 0)), self.wire(v, (b, 1))]
        return branches

    def freeze(self, inputs: Sequence[int], outputs: Sequence[int]) -> Diagram:
        wires = tuple(Wire(l, s, d) for l, s, d in self.wires)
        return Diagram(tuple(self.boxes), wires, tuple(inputs), tuple(outputs))


def causal_conditional(G: CausalStructure, given: Iterable[Vertex], targets: Iterable[Vertex]) -> Diagram:
    """The causal conditional predicting ``targets`` from ``given``.

    Every vertex of the reasoning subgraph contributes its mechanism (unless
    it is given) followed by enough copies to feed each of its subgraph
    children, plus one boundary output for targets.  A given vertex with no
    children in the subgraph is discarded.
    """
    sub = G.reasoning_subgraph(given, targets)
    ins = sorted(sub.given)
    outs = sorted(sub.targets)
    bld = _Builder()
    mech_box: dict[int, int] = {}
    feeds: dict[tuple[int, int], int] = {}  # (parent, child) -> wire

    for v in G.ancestral_ordering():
        if v not in sub.vertices:
            continue
        if v in sub.given:
            source = bld.wire(v, (BOUNDARY, ins.index(v)))
        else:
            b = bld.box(Box(MECHANISM, v, G.parents(v), (v,)))
            mech_box[v] = b
            source = bld.wire(v, (b, 0))
        children = sub.children(v)
        branches = bld.fan_out(v, source, len(children) + (v in sub.targets))
        if v in sub.targets:
            bld.connect(branches.pop(0), (BOUNDARY, outs.index(v)))
        for c, wire in zip(children, branches):
            feeds[(v, c)] = wire

    for v, b in mech_box.items():
        for port, u in enumerate(G.parents(v)):
            bld.connect(feeds[(u, v)], (b, port))
    return bld.freeze(ins, outs)


def prior(G: CausalStructure, w: Iterable[Vertex]) -> Diagram:
    return causal_conditional(G, (), w)


# -- normal forms and equality ---------------------------------------------------------------


def normal_form(f: Diagram) -> nx.MultiDiGraph:
    """Graph of ``f`` modulo the comonoid laws.

    Chains of copies on one variable are merged into a single unordered
    fan-out node, and fan-out branches ending in a discard are removed
    (a fan-out left with one branch becomes a plain wire).
    """
    nodes: dict = {}
    for i, v in enumerate(f.inputs):
        nodes[("in", i)] = ("in", v)
    for j, v in enumerate(f.outputs):
        nodes[("out", j)] = ("out", v)
    for b, box in enumerate(f.boxes):
        nodes[("box", b)] = ("fan" if box.kind == COPY else box.kind, box.var)

    def node(end, side):
        b, p = end
        return (side, p) if b == BOUNDARY else ("box", b)

    edges = [[node(w.src, "in"), node(w.dst, "out"), w.dst[1] if w.dst[0] != BOUNDARY else None]
             for w in f.wires]

    def kind(n):
        return nodes[n][0]

    changed = True
    while changed:
        changed = False
        # coassociativity: absorb a fan fed by another fan
        for e in edges:
            if kind(e[0]) == "fan" and kind(e[1]) == "fan":
                parent, child = e[0], e[1]
                edges.remove(e)
                del nodes[child]
                for e2 in edges:
                    if e2[0] == child:
                        e2[0] = parent
                changed = True
                break
        if changed:
            continue
        # counitality: drop discarded fan branches
        for e in edges:
            if kind(e[0]) == "fan" and kind(e[1]) == DISCARD:
                fan = e[0]
                edges.remove(e)
                del nodes[e[1]]
                outgoing = [e2 for e2 in edges if e2[0] == fan]
                if len(outgoing) == 1:
                    incoming = next(e2 for e2 in edges if e2[1] == fan)
                    incoming[1], incoming[2] = outgoing[0][1], outgoing[0][2]
                    edges.remove(outgoing[0])
                    del nodes[fan]
                elif not outgoing:
                    nodes[fan] = (DISCARD, nodes[fan][1])
                changed = True
                break

    g = nx.MultiDiGraph()
    for n, (k, v) in nodes.items():
        g.add_node(n, sig=(k, v))
    for s, t, port in edges:
        # ports matter only on mechanism inputs; fan-outs are cocommutative
        g.add_edge(s, t, port=port if kind(t) == MECHANISM else None)
    return g


def diagrams_equal(f: Diagram, g: Diagram) -> bool:
    """Equality of morphisms up to the comonoid laws and boundary reordering."""
    if f.dom != g.dom or f.cod != g.cod:
        return False
    nf, ng = normal_form(f), normal_form(g)
    return nx.is_isomorphic(
        nf, ng,
        node_match=isomorphism.categorical_node_match("sig", None),
        edge_match=isomorphism.categorical_multiedge_match("port", None),
    )


# -- DOT output ------------------------------------------------------------------------------------


def _quote(s: str) -> str:
    return '"' + s.replace("\\", "\\\\").replace('"', '\\"') + '"'


def to_dot(f: Diagram, G: CausalStructure | None = None, title: str = "diagram") -> str:
    """Graphviz DOT text for ``f`` with stable node ids ``kind_variable_ordinal``."""
    name = (lambda v: G.names[v]) if G is not None else str
    ordinal: Counter = Counter()

    def next_id(kind: str, v: int) -> str:
        key = (kind, v)
        n = ordinal[key]
        ordinal[key] += 1
        return f"{kind}_{name(v)}_{n}"

    in_ids = [next_id("in", v) for v in f.inputs]
    out_ids = [next_id("out", v) for v in f.outputs]
    box_ids = [next_id(b.kind, b.var) for b in f.boxes]

    lines = [f"digraph {_quote(title)} {{", "  rankdir=BT;", '  node [fontname="Helvetica"];']
    if in_ids:
        lines.append("  { rank=source;")
        lines += [f"    {_quote(i)} [shape=plaintext, label={_quote(name(v))}];" for i, v in zip(in_ids, f.inputs)]
        lines.append("  }")
    if out_ids:
        lines.append("  { rank=sink;")
        lines += [f"    {_quote(o)} [shape=plaintext, label={_quote(name(v))}];" for o, v in zip(out_ids, f.outputs)]
        lines.append("  }")
    for bid, box in zip(box_ids, f.boxes):
        if box.kind == MECHANISM:
            shape = "box" if box.inputs else "triangle"
            lines.append(f"  {_quote(bid)} [shape={shape}, label={_quote(box.label(G))}];")
        elif box.kind == COPY:
            lines.append(f"  {_quote(bid)} [shape=point, width=0.12, xlabel={_quote(name(box.var))}];")
        else:
            lines.append(f"  {_quote(bid)} [shape=point, width=0.08, style=hollow, xlabel={_quote(name(box.var))}];")
    for w in f.wires:
        s = in_ids[w.src[1]] if w.src[0] == BOUNDARY else box_ids[w.src[0]]
        t = out_ids[w.dst[1]] if w.dst[0] == BOUNDARY else box_ids[w.dst[0]]
        lines.append(f"  {_quote(s)} -> {_quote(t)} [label={_quote(name(w.label))}];")
    lines.append("}")
    return "\n".join(lines) + "\n"

"""Directed acyclic causal structures.

A :class:`CausalStructure` is an immutable DAG whose vertices are variable
names.  The declaration order of the names fixes the canonical index of each
variable, and that index order is used everywhere downstream: mechanism input
ports, product-space layouts and file formats.
"""

from __future__ import annotations

import heapq
from collections import deque
from dataclasses import dataclass, field
from functools import cached_property
from typing import Iterable, Iterator, Sequence, Union

from .errors import (
    CycleDetected,
    DuplicateArrow,
    DuplicateVertex,
    IndexOutOfRange,
    OverlappingSubsets,
    SelfLoop,
    SubsetsNotDisjoint,
    UnknownVertexName,
)

Vertex = Union[int, str]


@dataclass(frozen=True)
class CausalStructure:
    """A causal structure: variable names plus direct-cause arrows.

    Use :meth:`build` (or the module-level :func:`build`) to construct one
    from names; the raw constructor expects validated index pairs and is
    re-checked in ``__post_init__`` anyway.
    """

    names: tuple[str, ...]
    arrows: frozenset[tuple[int, int]] = field(default_factory=frozenset)

    def __post_init__(self) -> None:
        seen = set()
        for name in self.names:
            if name in seen:
                raise DuplicateVertex(f"duplicate vertex name {name!r}")
            seen.add(name)
        n = len(self.names)
        for s, t in self.arrows:
            if not (0 <= s < n and 0 <= t < n):
                raise IndexOutOfRange(f"arrow ({s}, {t}) has an endpoint outside 0..{n - 1}")
            if s == t:
                raise SelfLoop(f"self-loop on {self.names[s]!r}")
        cycle = self._find_cycle()
        if cycle is not None:
            raise CycleDetected([self.names[i] for i in cycle])

    @classmethod
    def build(cls, names: Sequence[str], arrows: Iterable[tuple[str, str]] = ()) -> CausalStructure:
        names = tuple(names)
        index: dict[str, int] = {}
        for i, name in enumerate(names):
            if name in index:
                raise DuplicateVertex(f"duplicate vertex name {name!r}")
            index[name] = i
        pairs: set[tuple[int, int]] = set()
        for s, t in arrows:
            for end in (s, t):
                if end not in index:
                    raise UnknownVertexName(f"arrow endpoint {end!r} is not a declared vertex")
            if s == t:
                raise SelfLoop(f"self-loop on {s!r}")
            pair = (index[s], index[t])
            if pair in pairs:
                raise DuplicateArrow(f"duplicate arrow {s} -> {t}")
            pairs.add(pair)
        return cls(names, frozenset(pairs))

    # -- basic queries -------------------------------------------------

    def __len__(self) -> int:
        return len(self.names)

    @property
    def vertices(self) -> range:
        return range(len(self.names))

    def index(self, v: Vertex) -> int:
        """Resolve a vertex given by name or canonical index."""
        if isinstance(v, str):
            try:
                return self._name_index[v]
            except KeyError:
                raise UnknownVertexName(f"unknown variable {v!r}") from None
        if isinstance(v, bool) or not isinstance(v, int) or not 0 <= v < len(self.names):
            raise IndexOutOfRange(f"vertex index {v!r} out of range for {len(self.names)} vertices")
        return v

    def subset(self, vs: Iterable[Vertex]) -> tuple[int, ...]:
        """Resolve a collection of vertices into a sorted, duplicate-free index tuple."""
        return tuple(sorted({self.index(v) for v in vs}))

    def name(self, v: int) -> str:
        return self.names[self.index(v)]

    @cached_property
    def _name_index(self) -> dict[str, int]:
        return {name: i for i, name in enumerate(self.names)}

    @cached_property
    def _parents(self) -> tuple[tuple[int, ...], ...]:
        pa: list[list[int]] = [[] for _ in self.names]
        for s, t in self.arrows:
            pa[t].append(s)
        return tuple(tuple(sorted(p)) for p in pa)

    @cached_property
    def _children(self) -> tuple[tuple[int, ...], ...]:
        ch: list[list[int]] = [[] for _ in self.names]
        for s, t in self.arrows:
            ch[s].append(t)
        return tuple(tuple(sorted(c)) for c in ch)

    def parents(self, v: Vertex) -> tuple[int, ...]:
        """Parents of ``v`` in ascending canonical order.

        This order fixes the input-port order of the mechanism for ``v``.
        """
        return self._parents[self.index(v)]

    def children(self, v: Vertex) -> tuple[int, ...]:
        return self._children[self.index(v)]

    def sorted_arrows(self) -> list[tuple[int, int]]:
        return sorted(self.arrows)

    def _find_cycle(self) -> list[int] | None:
        children: list[list[int]] = [[] for _ in self.names]
        for s, t in sorted(self.arrows):
            children[s].append(t)
        WHITE, GREY, BLACK = 0, 1, 2
        colour = [WHITE] * len(self.names)
        stack: list[int] = []

        def visit(u: int) -> list[int] | None:
            colour[u] = GREY
            stack.append(u)
            for c in children[u]:
                if colour[c] == GREY:
                    return stack[stack.index(c):] + [c]
                if colour[c] == WHITE:
                    found = visit(c)
                    if found is not None:
                        return found
            stack.pop()
            colour[u] = BLACK
            return None

        for u in range(len(self.names)):
            if colour[u] == WHITE:
                found = visit(u)
                if found is not None:
                    return found
        return None

    # -- orderings and ancestry ----------------------------------------

    @cached_property
    def _order(self) -> tuple[int, ...]:
        indegree = [len(p) for p in self._parents]
        ready = [v for v in self.vertices if indegree[v] == 0]
        heapq.heapify(ready)
        order = []
        while ready:
            v = heapq.heappop(ready)
            order.append(v)
            for c in self._children[v]:
                indegree[c] -= 1
                if indegree[c] == 0:
                    heapq.heappush(ready, c)
        return tuple(order)

    def ancestral_ordering(self) -> tuple[int, ...]:
        """A topological order, breaking ties by smallest canonical index."""
        return self._order

    @cached_property
    def _descendants(self) -> tuple[frozenset[int], ...]:
        desc: list[frozenset[int]] = [frozenset()] * len(self.names)
        for v in reversed(self._order):
            acc: set[int] = set()
            for c in self._children[v]:
                acc.add(c)
                acc |= desc[c]
            desc[v] = frozenset(acc)
        return tuple(desc)

    def descendants(self, v: Vertex) -> frozenset[int]:
        """Strict descendants: vertices reachable by a path of at least one arrow."""
        return self._descendants[self.index(v)]

    def ancestors(self, v: Vertex) -> frozenset[int]:
        v = self.index(v)
        return frozenset(u for u in self.vertices if v in self._descendants[u])

    def is_ancestor(self, u: Vertex, v: Vertex) -> bool:
        """True iff a directed path with at least one arrow runs from ``u`` to ``v``."""
        return self.index(v) in self._descendants[self.index(u)]

    # -- d-separation --------------------------------------------------

    def _disjoint_triple(self, U, T, S) -> tuple[frozenset[int], frozenset[int], frozenset[int]]:
        U, T, S = (frozenset(self.subset(x)) for x in (U, T, S))
        if U & T or U & S or T & S:
            raise SubsetsNotDisjoint("d-separation needs pairwise disjoint vertex sets")
        return U, T, S

    def d_separated(self, U: Iterable[Vertex], T: Iterable[Vertex], S: Iterable[Vertex] = ()) -> bool:
        """Whether ``S`` d-separates ``U`` from ``T``.

        Reachability ("Bayes ball") formulation: a ball starts at ``U`` and may
        pass a vertex according to the direction it arrived from and whether
        the vertex is observed or has an observed descendant.
        """
        U, T, S = self._disjoint_triple(U, T, S)
        if not U or not T:
            return True
        # S together with all its ancestors: colliders here are opened
        opened = set(S)
        for s in S:
            opened |= self.ancestors(s)

        UP, DOWN = 0, 1  # arrived from a child / from a parent
        queue = deque((u, UP) for u in sorted(U))
        visited = set()
        while queue:
            y, d = queue.popleft()
            if (y, d) in visited:
                continue
            visited.add((y, d))
            if y not in S and y in T:
                return False
            if d == UP and y not in S:
                queue.extend((z, UP) for z in self._parents[y])
                queue.extend((z, DOWN) for z in self._children[y])
            elif d == DOWN:
                if y not in S:
                    queue.extend((z, DOWN) for z in self._children[y])
                if y in opened:
                    queue.extend((z, UP) for z in self._parents[y])
        return True

    def undirected_paths(self, u: int, t: int) -> Iterator[tuple[int, ...]]:
        """All simple paths from ``u`` to ``t`` in the skeleton of the graph."""
        nbrs = [set(self._parents[v]) | set(self._children[v]) for v in self.vertices]

        def extend(path: list[int]) -> Iterator[tuple[int, ...]]:
            last = path[-1]
            if last == t:
                yield tuple(path)
                return
            for nxt in sorted(nbrs[last]):
                if nxt not in path:
                    path.append(nxt)
                    yield from extend(path)
                    path.pop()

        yield from extend([u])

    def path_blocked(self, path: Sequence[int], S: Iterable[int]) -> bool:
        S = set(S)
        for a, m, b in zip(path, path[1:], path[2:]):
            collider = (a, m) in self.arrows and (b, m) in self.arrows
            if collider:
                if m not in S and not (self._descendants[m] & S):
                    return True
            elif m in S:
                return True
        return False

    def unblocked_path(self, U, T, S=()) -> tuple[int, ...] | None:
        """First active undirected path from ``U`` to ``T`` given ``S``, by enumeration.

        Exponential in the worst case; intended for small graphs, explanations
        and as an independent check of :meth:`d_separated`.
        """
        U, T, S = self._disjoint_triple(U, T, S)
        for u in sorted(U):
            for t in sorted(T):
                for path in self.undirected_paths(u, t):
                    if not self.path_blocked(path, S):
                        return path
        return None

    def d_separated_by_paths(self, U, T, S=()) -> bool:
        return self.unblocked_path(U, T, S) is None

    def describe_path(self, path: Sequence[int]) -> str:
        out = [self.names[path[0]]]
        for a, b in zip(path, path[1:]):
            out.append("->" if (a, b) in self.arrows else "<-")
            out.append(self.names[b])
        return " ".join(out)

    # -- reasoning subgraph --------------------------------------------

    def reasoning_subgraph(self, given: Iterable[Vertex], targets: Iterable[Vertex]) -> ReasoningSubgraph:
        """The smallest subgraph carrying every path into ``targets`` that avoids ``given``.

        An arrow is kept when its target lies in ``targets``, or when a
        directed path leads from its target into ``targets`` with no vertex of
        ``given`` as a source along the way.
        """
        w = frozenset(self.subset(given))
        w2 = frozenset(self.subset(targets))
        if w & w2:
            names = ", ".join(self.names[v] for v in sorted(w & w2))
            raise OverlappingSubsets(f"variables on both sides of the conditional: {names}")
        # feeds[x]: x in targets, or x outside given with an arrow into a feeding vertex
        feeds = [False] * len(self.names)
        for x in reversed(self._order):
            feeds[x] = x in w2 or (x not in w and any(feeds[c] for c in self._children[x]))
        arrows = frozenset(a for a in self.arrows if feeds[a[1]])
        vertices = set(w) | set(w2)
        for s, t in arrows:
            vertices.update((s, t))
        out_degree = {v: 0 for v in vertices}
        for s, _ in arrows:
            out_degree[s] += 1
        return ReasoningSubgraph(self, w, w2, arrows, frozenset(vertices), out_degree)

    def __repr__(self) -> str:
        arrows = ", ".join(f"{self.names[s]}->{self.names[t]}" for s, t in self.sorted_arrows())
        return f"CausalStructure({list(self.names)}, [{arrows}])"


@dataclass(frozen=True)
class ReasoningSubgraph:
    structure: CausalStructure
    given: frozenset[int]
    targets: frozenset[int]
    arrows: frozenset[tuple[int, int]]
    vertices: frozenset[int]
    out_degree: dict[int, int]

    def parents(self, v: int) -> tuple[int, ...]:
        return tuple(sorted(s for s, t in self.arrows if t == v))

    def children(self, v: int) -> tuple[int, ...]:
        return tuple(sorted(t for s, t in self.arrows if s == v))

    def internal(self) -> frozenset[int]:
        return self.vertices - self.given - self.targets


def build(names: Sequence[str], arrows: Iterable[tuple[str, str]] = ()) -> CausalStructure:
    return CausalStructure.build(names, arrows)

"""Finite stochastic-map semantics.

Morphisms between finite outcome spaces are column-stochastic matrices:
rows are indexed by codomain outcomes, columns by domain outcomes.  A product
of spaces is laid out row-major in factor order (last factor fastest), which
is exactly the layout produced by :func:`numpy.kron`, so tensor products and
product spaces agree by construction.

A boolean backend (relations, i.e. :class:`BoolMatrix`) lives alongside.
"""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass, field
from typing import Callable, Iterable, Sequence, Union

import numpy as np

from .errors import (
    DisjointnessViolated,
    InvariantError,
    NotADistribution,
    NotDeterministic,
    NotStochastic,
    ShapeMismatch,
    UnknownFactor,
)

TOL = 1e-9


@dataclass(frozen=True)
class FinSpace:
    """A finite outcome space: a name and an ordered tuple of outcome labels."""

    name: str
    outcomes: tuple[str, ...]

    def __post_init__(self) -> None:
        object.__setattr__(self, "outcomes", tuple(str(o) for o in self.outcomes))
        if not self.outcomes:
            raise InvariantError(f"space {self.name!r} has no outcomes")
        if len(set(self.outcomes)) != len(self.outcomes):
            raise InvariantError(f"space {self.name!r} has repeated outcome labels")

    @classmethod
    def of_size(cls, n: int, name: str = "") -> FinSpace:
        return cls(name, tuple(str(i) for i in range(n)))

    @property
    def size(self) -> int:
        return len(self.outcomes)

    def __len__(self) -> int:
        return len(self.outcomes)

    def index(self, label: str) -> int:
        try:
            return self.outcomes.index(label)
        except ValueError:
            raise UnknownFactor(f"{label!r} is not an outcome of {self.name!r}") from None

    def renamed(self, name: str) -> FinSpace:
        return FinSpace(name, self.outcomes)

    def __repr__(self) -> str:
        return f"FinSpace({self.name!r}, {list(self.outcomes)})"


POINT = FinSpace("*", ("*",))

Spaces = tuple[FinSpace, ...]
SpaceLike = Union[FinSpace, Sequence[FinSpace], None]


def _as_spaces(s: SpaceLike) -> Spaces:
    if s is None:
        return ()
    if isinstance(s, FinSpace):
        return (s,)
    return tuple(s)


def product_size(spaces: Sequence[FinSpace]) -> int:
    return math.prod(s.size for s in spaces)


def product_labels(spaces: Sequence[FinSpace]) -> list[str]:
    """Outcome labels of a product space in layout order."""
    if not spaces:
        return ["()"]
    return [",".join(t) for t in itertools.product(*(s.outcomes for s in spaces))]


def space_names(spaces: Sequence[FinSpace]) -> str:
    return "".join(s.name for s in spaces) or "()"


class _Matrix:
    """Shared plumbing for stochastic and boolean matrices."""

    data: np.ndarray
    dom: Spaces
    cod: Spaces

    def _init(self, data, dom: SpaceLike, cod: SpaceLike, dtype) -> None:
        arr = np.array(data, dtype=dtype)
        if arr.ndim == 1:
            arr = arr.reshape(-1, 1)
        if arr.ndim != 2:
            raise ShapeMismatch(f"matrix data must be 2-dimensional, got shape {arr.shape}")
        dom = _as_spaces(dom) if dom is not None else ((FinSpace.of_size(arr.shape[1]),) if arr.shape[1] > 1 else ())
        cod = _as_spaces(cod) if cod is not None else ((FinSpace.of_size(arr.shape[0]),) if arr.shape[0] > 1 else ())
        if arr.shape != (product_size(cod), product_size(dom)):
            raise ShapeMismatch(
                f"data shape {arr.shape} does not match {space_names(cod)} x {space_names(dom)} "
                f"= ({product_size(cod)}, {product_size(dom)})"
            )
        arr.setflags(write=False)
        self.data, self.dom, self.cod = arr, dom, cod

    @property
    def shape(self) -> tuple[int, int]:
        return self.data.shape

    def __array__(self, dtype=None, copy=None):
        return self.data if dtype is None else self.data.astype(dtype)

    def column(self, j: int) -> np.ndarray:
        return self.data[:, j]


class StochMatrix(_Matrix):
    """A column-stochastic matrix between (products of) finite spaces.

    ``dom`` and ``cod`` may be a single :class:`FinSpace`, a sequence of them
    (an ordered product) or ``None``, in which case an anonymous space of the
    right size is used (the empty product for size one).
    """

    def __init__(self, data, dom: SpaceLike = None, cod: SpaceLike = None,
                 zero_mass_columns: Sequence[int] = (), tol: float = TOL):
        self._init(data, dom, cod, float)
        d = self.data
        if d.size and (d.min() < -tol or d.max() > 1 + tol):
            raise NotStochastic(f"entries outside [0, 1] in matrix {space_names(self.dom)} -> {space_names(self.cod)}")
        sums = d.sum(axis=0)
        bad = np.flatnonzero(np.abs(sums - 1.0) > tol)
        if bad.size:
            j = int(bad[0])
            raise NotStochastic(
                f"column {product_labels(self.dom)[j]} of {space_names(self.dom)} -> {space_names(self.cod)} "
                f"sums to {sums[j]:.12g}, not 1"
            )
        # columns that were filled in by convention rather than computed
        self.zero_mass_columns = tuple(zero_mass_columns)

    def __repr__(self) -> str:
        return f"StochMatrix({space_names(self.dom)} -> {space_names(self.cod)}, {self.data.tolist()})"

    def allclose(self, other, tol: float = TOL) -> bool:
        other = np.asarray(other, dtype=float)
        return other.shape == self.shape and bool(np.all(np.abs(self.data - other) <= tol))


class BoolMatrix(_Matrix):
    """A relation between finite spaces as a boolean matrix (rows = codomain)."""

    def __init__(self, data, dom: SpaceLike = None, cod: SpaceLike = None):
        self._init(data, dom, cod, bool)

    def __repr__(self) -> str:
        return f"BoolMatrix({space_names(self.dom)} -> {space_names(self.cod)}, {self.data.astype(int).tolist()})"

    def __eq__(self, other) -> bool:
        if not isinstance(other, BoolMatrix):
            return NotImplemented
        return self.dom == other.dom and self.cod == other.cod and np.array_equal(self.data, other.data)

    __hash__ = None  # type: ignore[assignment]


# -- constructors -----------------------------------------------------------


def identity_matrix(spaces: SpaceLike) -> StochMatrix:
    spaces = _as_spaces(spaces)
    return StochMatrix(np.eye(product_size(spaces)), spaces, spaces)


def copy_matrix(s: FinSpace) -> StochMatrix:
    """The copy map x -> (x, x)."""
    n = s.size
    data = np.zeros((n * n, n))
    data[np.arange(n) * (n + 1), np.arange(n)] = 1.0
    return StochMatrix(data, s, (s, s))


def discard_matrix(spaces: SpaceLike) -> StochMatrix:
    spaces = _as_spaces(spaces)
    return StochMatrix(np.ones((1, product_size(spaces))), spaces, ())


def permutation_matrix(spaces: Sequence[FinSpace], perm: Sequence[int]) -> StochMatrix:
    """Reorder the factors of a product: output factor ``i`` is input factor ``perm[i]``."""
    spaces = tuple(spaces)
    if sorted(perm) != list(range(len(spaces))):
        raise ShapeMismatch(f"{list(perm)} is not a permutation of {len(spaces)} factors")
    return StochMatrix(_perm_array(spaces, perm), spaces, tuple(spaces[p] for p in perm))


def _perm_index(spaces: Sequence[FinSpace], perm: Sequence[int]) -> np.ndarray:
    """Row ``i`` of the permutation matrix is the unit vector at ``index[i]``."""
    sizes = [s.size for s in spaces]
    return np.arange(math.prod(sizes)).reshape(sizes).transpose(list(perm)).reshape(-1)


def _perm_array(spaces: Sequence[FinSpace], perm: Sequence[int]) -> np.ndarray:
    idx = _perm_index(spaces, perm)
    return np.eye(idx.size)[idx]


def swap_matrix(a: FinSpace, b: FinSpace) -> StochMatrix:
    return permutation_matrix((a, b), (1, 0))


def induced_matrix(dom: SpaceLike, cod: SpaceLike, f: Callable[[int], int] | Sequence[int]) -> StochMatrix:
    """The deterministic stochastic map induced by a function on outcome indices."""
    dom, cod = _as_spaces(dom), _as_spaces(cod)
    table = [f(x) for x in range(product_size(dom))] if callable(f) else list(f)
    data = np.zeros((product_size(cod), product_size(dom)))
    data[table, np.arange(len(table))] = 1.0
    return StochMatrix(data, dom, cod)


def point_matrix(s: FinSpace, label: str) -> StochMatrix:
    return induced_matrix((), s, [s.index(label)])


# -- algebra ------------------------------------------------------------------


def compose(L: StochMatrix, K: StochMatrix) -> StochMatrix:
    """The composite ``L . K`` (first K, then L)."""
    if L.dom != K.cod:
        raise ShapeMismatch(f"cannot compose: codomain {space_names(K.cod)} is not domain {space_names(L.dom)}")
    return StochMatrix(L.data @ K.data, K.dom, L.cod)


def tensor(*Ks: StochMatrix) -> StochMatrix:
    """Kronecker product; domain and codomain are the ordered products."""
    data = np.ones((1, 1))
    dom: Spaces = ()
    cod: Spaces = ()
    for K in Ks:
        data = np.kron(data, K.data)
        dom += K.dom
        cod += K.cod
    return StochMatrix(data, dom, cod)


def is_deterministic(K: StochMatrix, tol: float = TOL) -> bool:
    d = K.data
    return bool(np.all((np.abs(d) <= tol) | (np.abs(d - 1.0) <= tol)))


def function_of(K: StochMatrix) -> list[int]:
    """The outcome-index function inducing a deterministic matrix."""
    if not is_deterministic(K):
        raise NotDeterministic(f"{space_names(K.dom)} -> {space_names(K.cod)} is not deterministic")
    return [int(i) for i in np.argmax(K.data, axis=0)]


def is_permutation(K: StochMatrix, tol: float = TOL) -> bool:
    if K.shape[0] != K.shape[1] or not is_deterministic(K, tol):
        return False
    ones = np.abs(K.data - 1.0) <= tol
    return bool(np.all(ones.sum(axis=0) == 1) and np.all(ones.sum(axis=1) == 1))


def has_stochastic_inverse(K: StochMatrix, tol: float = TOL) -> StochMatrix | None:
    """The stochastic inverse of ``K`` if one exists, else ``None``.

    In finite semantics the invertible stochastic matrices are exactly the
    permutation matrices, whose inverse is the transpose.
    """
    if not is_permutation(K, tol):
        return None
    return StochMatrix(np.round(K.data).T, K.cod, K.dom)


def is_injective(K: StochMatrix) -> bool:
    f = function_of(K)
    return len(set(f)) == len(f)


def is_surjective(K: StochMatrix) -> bool:
    return len(set(function_of(K))) == K.shape[0]


def factor_deterministic(K: StochMatrix) -> tuple[StochMatrix, StochMatrix]:
    """Split a deterministic map into ``(coarse, embed)`` with ``K = embed . coarse``.

    The intermediate space is the image of ``K``, its outcomes listed in order
    of first occurrence over the domain.
    """
    f = function_of(K)
    image = list(dict.fromkeys(f))
    labels = product_labels(K.cod)
    if len(K.cod) == 1:
        name = K.cod[0].name
    else:
        name = "im(" + space_names(K.cod) + ")"
    mid = FinSpace(name, tuple(labels[i] for i in image))
    pos = {y: i for i, y in enumerate(image)}
    coarse = induced_matrix(K.dom, mid, [pos[y] for y in f])
    embed = induced_matrix(mid, K.cod, image)
    return coarse, embed


# -- boolean backend ------------------------------------------------------------


def bool_compose(L: BoolMatrix, K: BoolMatrix) -> BoolMatrix:
    if L.dom != K.cod:
        raise ShapeMismatch(f"cannot compose relations: {space_names(K.cod)} is not {space_names(L.dom)}")
    data = (L.data.astype(np.int64) @ K.data.astype(np.int64)) > 0
    return BoolMatrix(data, K.dom, L.cod)


def bool_tensor(*Ks: BoolMatrix) -> BoolMatrix:
    data = np.ones((1, 1), dtype=bool)
    dom: Spaces = ()
    cod: Spaces = ()
    for K in Ks:
        data = np.kron(data, K.data).astype(bool)
        dom += K.dom
        cod += K.cod
    return BoolMatrix(data, dom, cod)


def support(K: StochMatrix) -> BoolMatrix:
    return BoolMatrix(K.data > 0, K.dom, K.cod)


def bool_identity(spaces: SpaceLike) -> BoolMatrix:
    return support(identity_matrix(spaces))


def bool_copy(s: FinSpace) -> BoolMatrix:
    return support(copy_matrix(s))


def bool_discard(spaces: SpaceLike) -> BoolMatrix:
    return support(discard_matrix(spaces))


# -- joint distributions --------------------------------------------------------------

FactorRef = Union[int, str]


@dataclass(frozen=True, eq=False)
class JointDistribution:
    """A probability table over an ordered product of finite spaces.

    ``values`` is the flat row-major table (last factor fastest).
    """

    factors: Spaces
    values: np.ndarray = field(repr=False)

    def __post_init__(self) -> None:
        factors = tuple(self.factors)
        vals = np.array(self.values, dtype=float).reshape(-1)
        if vals.size != product_size(factors):
            raise ShapeMismatch(f"{vals.size} values for a product of size {product_size(factors)}")
        if vals.size and vals.min() < -TOL:
            raise NotADistribution("negative probability")
        if abs(vals.sum() - 1.0) > TOL:
            raise NotADistribution(f"probabilities sum to {vals.sum():.12g}, not 1")
        vals.setflags(write=False)
        object.__setattr__(self, "factors", factors)
        object.__setattr__(self, "values", vals)

    @classmethod
    def from_matrix(cls, K: StochMatrix) -> JointDistribution:
        if K.shape[1] != 1:
            raise ShapeMismatch("a joint distribution is a matrix out of the one-point space")
        return cls(K.cod, K.data[:, 0])

    def as_matrix(self) -> StochMatrix:
        return StochMatrix(self.values.reshape(-1, 1), (), self.factors)

    @property
    def names(self) -> tuple[str, ...]:
        return tuple(f.name for f in self.factors)

    @property
    def table(self) -> np.ndarray:
        return self.values.reshape([f.size for f in self.factors])

    def factor_index(self, ref: FactorRef) -> int:
        if isinstance(ref, str):
            for i, f in enumerate(self.factors):
                if f.name == ref:
                    return i
            raise UnknownFactor(f"no factor named {ref!r}; factors are {list(self.names)}")
        if not 0 <= ref < len(self.factors):
            raise UnknownFactor(f"factor index {ref} out of range")
        return ref

    def factor_indices(self, refs: Iterable[FactorRef]) -> tuple[int, ...]:
        return tuple(sorted({self.factor_index(r) for r in refs}))

    def prob(self, *labels: str) -> float:
        idx = tuple(f.index(l) for f, l in zip(self.factors, labels))
        return float(self.table[idx])

    def allclose(self, other, tol: float = TOL) -> bool:
        vals = other.values if isinstance(other, JointDistribution) else np.asarray(other, dtype=float).reshape(-1)
        return vals.shape == self.values.shape and bool(np.all(np.abs(self.values - vals) <= tol))

    def __repr__(self) -> str:
        return f"JointDistribution({list(self.names)}, {self.values.tolist()})"


def _grouped(P: JointDistribution, groups: Sequence[Sequence[int]]) -> np.ndarray:
    """Marginal table with one axis per group, each group flattened in factor order."""
    keep = [i for g in groups for i in g]
    drop = tuple(i for i in range(len(P.factors)) if i not in keep)
    t = P.table.sum(axis=drop) if drop else P.table
    kept_sorted = sorted(keep)
    t = t.transpose([kept_sorted.index(i) for i in keep])
    return t.reshape([product_size([P.factors[i] for i in g]) for g in groups])


def marginalize(P: JointDistribution, keep: Iterable[FactorRef]) -> JointDistribution:
    """Sum out every factor not in ``keep``; kept factors stay in their original order."""
    idx = P.factor_indices(keep)
    return JointDistribution(tuple(P.factors[i] for i in idx), _grouped(P, [idx]))


def marginalize_by_discarding(P: JointDistribution, keep: Iterable[FactorRef]) -> JointDistribution:
    """Marginalize by composing with identities on kept factors and discards elsewhere."""
    idx = set(P.factor_indices(keep))
    proj = tensor(*(identity_matrix(f) if i in idx else discard_matrix(f) for i, f in enumerate(P.factors)))
    return JointDistribution.from_matrix(compose(proj, P.as_matrix()))


def conditional_from_joint(P: JointDistribution, targets: Iterable[FactorRef],
                           givens: Iterable[FactorRef] = ()) -> StochMatrix:
    """The conditional of ``targets`` given ``givens`` as a stochastic matrix.

    Factors outside both sets are marginalized out first.  Columns for given
    outcomes of zero probability are filled uniformly and listed in the
    result's ``zero_mass_columns``.
    """
    t = P.factor_indices(targets)
    g = P.factor_indices(givens)
    if set(t) & set(g):
        raise DisjointnessViolated("targets and givens overlap")
    joint = _grouped(P, [t, g])  # (targets, givens)
    mass = joint.sum(axis=0)
    n_t = joint.shape[0]
    cond = np.full_like(joint, 1.0 / n_t)
    positive = mass > 0
    cond[:, positive] = joint[:, positive] / mass[positive]
    # rounding can leave tiny negatives in summed tables
    cond = np.clip(cond, 0.0, 1.0)
    cond[:, positive] /= cond[:, positive].sum(axis=0)
    return StochMatrix(
        cond,
        tuple(P.factors[i] for i in g),
        tuple(P.factors[i] for i in t),
        zero_mass_columns=[int(j) for j in np.flatnonzero(~positive)],
    )


def independent(P: JointDistribution, split: Iterable[FactorRef], tol: float = TOL) -> bool:
    """Whether the factors in ``split`` are independent of the remaining ones."""
    a = P.factor_indices(split)
    b = tuple(i for i in range(len(P.factors)) if i not in a)
    if not a or not b:
        return True
    t = _grouped(P, [a, b])
    prod = np.outer(t.sum(axis=1), t.sum(axis=0))
    return bool(np.all(np.abs(t - prod) <= tol))


def cond_independent(P: JointDistribution, X: Iterable[FactorRef], Y: Iterable[FactorRef],
                     Z: Iterable[FactorRef] = (), tol: float = TOL, method: str = "product") -> bool:
    """Whether ``X`` and ``Y`` are independent conditional on ``Z``.

    ``method`` picks one of three equivalent tests, all restricted to
    conditioning outcomes of positive probability:

    ``"product"``
        P(x, y | z) = P(x | z) P(y | z)
    ``"x_given_yz"``
        P(x | y, z) = P(x | z)
    ``"y_given_xz"``
        P(y | x, z) = P(y | z)
    """
    x, y, z = P.factor_indices(X), P.factor_indices(Y), P.factor_indices(Z)
    if set(x) & set(y) or set(x) & set(z) or set(y) & set(z):
        raise DisjointnessViolated("X, Y and Z must be pairwise disjoint")
    if not x or not y:
        return True
    if method == "y_given_xz":
        x, y, method = y, x, "x_given_yz"
    t = _grouped(P, [x, y, z])  # (x, y, z)
    pz = t.sum(axis=(0, 1))
    pxz = t.sum(axis=1)
    pyz = t.sum(axis=0)
    for k in np.flatnonzero(pz > 0):
        px_z = pxz[:, k] / pz[k]
        if method == "product":
            lhs = t[:, :, k] / pz[k]
            rhs = np.outer(px_z, pyz[:, k] / pz[k])
            if np.any(np.abs(lhs - rhs) > tol):
                return False
        elif method == "x_given_yz":
            for j in np.flatnonzero(pyz[:, k] > 0):
                if np.any(np.abs(t[:, j, k] / pyz[j, k] - px_z) > tol):
                    return False
        else:
            raise ValueError(f"unknown method {method!r}")
    return True

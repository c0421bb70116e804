"""Acceptance gate.

Each criterion is a plain function that raises ``AssertionError`` on failure.
Under pytest every criterion is its own test and prints a PASS/FAIL line
(shown with ``-s``); run the file directly for the summary on its own::

    python3 tests/test_acceptance.py
"""

from __future__ import annotations

import itertools
import sys
import time
from pathlib import Path

import numpy as np
import pytest

sys.path.insert(0, str(Path(__file__).parent))

from causal_theories import (  # noqa: E402
    check_compatibility,
    classify_morphism,
    compose,
    conditional,
    conditional_from_joint,
    cond_independent,
    evaluate,
    evaluate_rel,
    find_morphisms,
    is_inferential,
    joint_prior,
    marginal_prior,
    marginalize,
    par,
    prior,
    seq,
    tensor,
    terminal_morphism,
    trivial_model,
    validate_morphism,
)
from causal_theories.cli import nullified_diagram  # noqa: E402
from causal_theories.diagram import causal_conditional  # noqa: E402
from causal_theories.files import data_path, load_model, load_morphism  # noqa: E402
from causal_theories.generators import (  # noqa: E402
    random_dag,
    random_deterministic,
    random_diagram,
    random_model,
    random_stochastic,
)
from causal_theories.model import candidate_morphisms, is_comonoid_homomorphism  # noqa: E402
from causal_theories.stoch import (  # noqa: E402
    FinSpace,
    StochMatrix,
    copy_matrix,
    discard_matrix,
    factor_deterministic,
    has_stochastic_inverse,
    identity_matrix,
    induced_matrix,
    is_deterministic,
    swap_matrix,
)
from causal_theories.structure import CausalStructure  # noqa: E402

from oracles import tensor_in_par_order  # noqa: E402

TOL = 1e-9
SEED = 20261019


def close(actual, expected, tol=TOL):
    a = np.asarray(actual, dtype=float)
    e = np.asarray(expected, dtype=float)
    assert a.shape == e.shape, f"shape {a.shape} != {e.shape}"
    err = float(np.max(np.abs(a - e))) if a.size else 0.0
    assert err <= tol, f"max deviation {err:.3g} exceeds {tol:g}"


# -- 1 -------------------------------------------------------------------------------------


def criterion_1():
    m = load_model(data_path("food_model.json"))
    P = joint_prior(m)
    close(P.values, [0.24, 0, 0.18, 0.18, 0.06, 0.10, 0, 0.24])
    close(marginalize(P, ["A"]).values, [0.6, 0.4])
    close(marginalize(P, ["B"]).values, [0.4, 0.6])
    close(marginalize(P, ["A", "B"]).values, [0.24, 0.36, 0.16, 0.24])
    close(conditional_from_joint(P, ["C"], ["A", "B"]).data, [[1, 0.5, 0.375, 0], [0, 0.5, 0.625, 1]])
    ab_c = conditional_from_joint(P, ["A", "B"], ["C"])
    close(ab_c.data[:, 0], [0.5, 0.375, 0.125, 0])


# -- 2, 3 ------------------------------------------------------------------------------------


def criterion_2():
    m = load_model(data_path("simpson_mediator.json"))
    close(conditional(m, ["R"], ["T"]).data, [[0.39, 0.42], [0.61, 0.58]])
    close(evaluate(nullified_diagram(m.structure), m).data, [[0.51, 0.34], [0.49, 0.66]])


def criterion_3():
    m = load_model(data_path("simpson_confounder.json"))
    close(conditional(m, ["R"], ["T"]).data, [[0.51, 0.34], [0.49, 0.66]])


# -- 4, 5 -------------------------------------------------------------------------------------


def criterion_4():
    rng = np.random.default_rng(SEED)
    start = time.perf_counter()
    for _ in range(100):
        m = random_model(rng, n=int(rng.integers(1, 6)), max_card=3)
        verdict = check_compatibility(m.structure, joint_prior(m), TOL)
        assert verdict, f"incompatible at {verdict.offending}"
    elapsed = time.perf_counter() - start
    assert elapsed < 5.0, f"took {elapsed:.2f} s"


def criterion_5():
    rng = np.random.default_rng(SEED + 5)
    for _ in range(100):
        m = random_model(rng, n=int(rng.integers(1, 6)), max_card=3)
        G = m.structure
        w = [v for v in G.vertices if rng.random() < 0.5] or [int(rng.integers(0, len(G)))]
        close(marginal_prior(m, w).values, marginalize(joint_prior(m), w).values)


# -- 6 ----------------------------------------------------------------------------------------------


def criterion_6():
    rng = np.random.default_rng(SEED + 6)
    separated = 0
    for _ in range(200):
        m = random_model(rng, n=int(rng.integers(2, 6)), max_card=3)
        G = m.structure
        u, t = (int(x) for x in rng.choice(len(G), size=2, replace=False))
        S = [v for v in G.vertices if v not in (u, t) and rng.random() < 0.4]
        fast = G.d_separated([u], [t], S)
        assert fast == G.d_separated_by_paths([u], [t], S), f"oracles disagree on {u}, {t} | {S}"
        if fast:
            separated += 1
            assert cond_independent(joint_prior(m), [u], [t], S, tol=1e-7)
    assert separated > 0


# -- 7 -------------------------------------------------------------------------------------------------


def criterion_7():
    rng = np.random.default_rng(SEED + 7)
    for _ in range(50):
        G = random_dag(rng, int(rng.integers(2, 7)))
        for u, v in itertools.permutations(G.vertices, 2):
            f = causal_conditional(G, [u], [v])
            assert is_inferential(f) == G.is_ancestor(u, v), (G, u, v)


# -- 8 -----------------------------------------------------------------------------------------


def criterion_8():
    rng = np.random.default_rng(SEED + 8)
    for _ in range(100):
        m = random_model(rng, n=int(rng.integers(1, 5)), max_card=3)
        G = m.structure
        f = random_diagram(rng, G, layers=int(rng.integers(1, 3)), max_wires=5)
        g = random_diagram(rng, G, layers=int(rng.integers(1, 3)), dom=f.cod, max_wires=5)
        close(evaluate(seq(f, g), m).data, compose(evaluate(g, m), evaluate(f, m)).data)
        h = random_diagram(rng, G, layers=1, max_wires=3)
        F, H = evaluate(f, m), evaluate(h, m)
        close(evaluate(par(f, h), m).data, tensor_in_par_order(F, H, f, h).data)

    for n in range(1, 6):
        s = FinSpace.of_size(n, "X")
        c, d, i = copy_matrix(s), discard_matrix(s), identity_matrix(s)
        assert np.array_equal(compose(tensor(c, i), c).data, compose(tensor(i, c), c).data)
        assert np.array_equal(compose(tensor(d, i), c).data, i.data)
        assert np.array_equal(compose(tensor(i, d), c).data, i.data)
        assert np.array_equal(compose(swap_matrix(s, s), c).data, c.data)


# -- 9 -----------------------------------------------------------------------------------------------


def _has_stochastic_inverse_by_linalg(A: np.ndarray) -> bool:
    if abs(np.linalg.det(A)) < 1e-12:
        return False
    return bool(np.all(np.linalg.inv(A) >= -1e-9))


def criterion_9():
    rng = np.random.default_rng(SEED + 9)
    for _ in range(100):
        r, c = (int(x) for x in rng.integers(1, 5, size=2))
        K = StochMatrix(random_deterministic(rng, r, c))
        assert is_deterministic(K) and is_comonoid_homomorphism(K)
        N = StochMatrix(random_stochastic(rng, max(r, 2), c))
        assert is_deterministic(N) == is_comonoid_homomorphism(N)

    for n in (1, 2, 3):
        for f in itertools.product(range(n), repeat=n):
            K = induced_matrix(FinSpace.of_size(n), FinSpace.of_size(n), f)
            inv = has_stochastic_inverse(K)
            assert (inv is not None) == (len(set(f)) == n) == _has_stochastic_inverse_by_linalg(K.data)
            if inv is not None:
                assert np.array_equal(compose(inv, K).data, np.eye(n))
        for _ in range(50):
            K = StochMatrix(random_stochastic(rng, n, n, alpha=0.5))
            perm = bool(np.all((np.abs(K.data) <= TOL) | (np.abs(K.data - 1) <= TOL)))
            assert (has_stochastic_inverse(K) is not None) == perm == _has_stochastic_inverse_by_linalg(K.data)
    for _ in range(200):
        kind = rng.integers(0, 3)
        if kind == 0:
            data = np.eye(4)[:, rng.permutation(4)]
        elif kind == 1:
            data = random_deterministic(rng, 4, 4)
        else:
            data = random_stochastic(rng, 4, 4)
        K = StochMatrix(data)
        assert (has_stochastic_inverse(K) is not None) == _has_stochastic_inverse_by_linalg(data)

    for _ in range(100):
        r, c = (int(x) for x in rng.integers(1, 7, size=2))
        K = StochMatrix(random_deterministic(rng, r, c))
        coarse, embed = factor_deterministic(K)
        assert np.array_equal(compose(embed, coarse).data, K.data)


# -- 10 -----------------------------------------------------------------------------------------------


def criterion_10():
    swap = load_morphism(data_path("swap_morphism.json"))
    assert validate_morphism(swap)

    G = CausalStructure.build("XY", [("X", "Y")])
    fair = trivial_model(G, ["b1", "b2"], [0.5, 0.5])
    biased = trivial_model(G, ["b1", "b2"], [0.3, 0.7])
    # the two priors share no deterministic pushforward, so X alone rules out all 4 candidates
    candidates = list(candidate_morphisms(fair, biased))
    assert len(candidates) == 16
    x_maps = {tuple(phi.components[0].data.argmax(axis=0)) for phi in candidates}
    assert len(x_maps) == 4
    assert all(not validate_morphism(phi) for phi in candidates)
    assert find_morphisms(fair, biased) == []
    assert find_morphisms(biased, fair) == []

    term = terminal_morphism(fair)
    assert validate_morphism(term)
    assert classify_morphism(term).kind == "coarse graining"
    assert validate_morphism(load_morphism(data_path("terminal_morphism.json")))


# -- 11 -----------------------------------------------------------------------------------------------


def criterion_11():
    m = load_model(data_path("food_model.json"))
    R = evaluate_rel(prior(m.structure, m.structure.vertices), m.support_model())
    labels = [s.outcomes for s in m.spaces]
    support = {t for t, on in zip(itertools.product(*labels), R.data[:, 0]) if on}
    P = joint_prior(m)
    positive = {t for t, p in zip(itertools.product(*labels), P.values) if p > 0}
    assert len(positive) == 6
    assert support == positive


CRITERIA = {
    1: ("food example values", criterion_1),
    2: ("Simpson mediator and nullified diagram", criterion_2),
    3: ("Simpson confounder", criterion_3),
    4: ("joint priors are compatible (100 models)", criterion_4),
    5: ("marginal prior = marginalized joint (100 pairs)", criterion_5),
    6: ("d-separation soundness (200 instances)", criterion_6),
    7: ("inferential iff ancestor (50 DAGs)", criterion_7),
    8: ("functor and comonoid laws", criterion_8),
    9: ("determinism, inverses and factorization", criterion_9),
    10: ("morphisms of trivial models", criterion_10),
    11: ("relational food support", criterion_11),
}


def run(number: int) -> tuple[bool, str]:
    title, fn = CRITERIA[number]
    try:
        fn()
    except AssertionError as e:
        return False, f"FAIL  {number:2d}  {title}: {e}"
    return True, f"PASS  {number:2d}  {title}"


@pytest.mark.parametrize("number", sorted(CRITERIA))
def test_criterion(number):
    ok, line = run(number)
    print(line)
    assert ok, line


if __name__ == "__main__":
    results = [run(n) for n in sorted(CRITERIA)]
    for _, line in results:
        print(line)
    sys.exit(0 if all(ok for ok, _ in results) else 1)

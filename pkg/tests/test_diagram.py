from collections import Counter

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from numpy.testing import assert_array_equal

from causal_theories import evaluate
from causal_theories.diagram import (
    COPY,
    DISCARD,
    MECHANISM,
    TheoryObject,
    causal_conditional,
    copy,
    diagrams_equal,
    discard,
    identity,
    is_inferential,
    mechanism,
    par,
    prior,
    seq,
    to_dot,
)
from causal_theories.errors import CodomainMismatch, OverlappingSubsets
from causal_theories.generators import random_dag, random_diagram, random_model

from test_structure import dags


def census(f, G):
    return {(k, G.names[v]): n for (k, v), n in f.census().items()}


class TestObjects:
    def test_multiset(self):
        w = TheoryObject.of(2, 0, 2)
        assert w.elements == (0, 2, 2)
        assert w.multiplicity(2) == 2
        assert w + TheoryObject.of(1) == TheoryObject.of(0, 1, 2, 2)
        assert TheoryObject().is_unit


class TestComposition:
    def test_identity_types(self):
        f = identity([1, 0])
        assert f.dom == f.cod == TheoryObject.of(0, 1)
        assert not f.boxes

    def test_mechanism_type(self, food_graph):
        f = mechanism(food_graph, "C")
        assert f.dom == TheoryObject.of(0, 1)
        assert f.cod == TheoryObject.of(2)

    def test_seq_checks_types(self, food_graph):
        with pytest.raises(CodomainMismatch):
            seq(mechanism(food_graph, "A"), mechanism(food_graph, "C"))

    def test_seq_with_identities(self, food_graph):
        f = mechanism(food_graph, "C")
        assert diagrams_equal(seq(identity(f.dom), f), f)
        assert diagrams_equal(seq(f, identity(f.cod)), f)

    def test_par_types_and_unit(self, food_graph):
        f = par(mechanism(food_graph, "A"), mechanism(food_graph, "B"))
        assert f.dom == TheoryObject() and f.cod == TheoryObject.of(0, 1)
        assert diagrams_equal(par(identity(), f), f)

    def test_seq_matches_by_position_within_a_variable(self):
        # copy A, then feed the second branch to a discard
        f = seq(copy(0), par(identity(0), discard(0)))
        assert diagrams_equal(f, identity(0))
        assert f.census() == Counter({(COPY, 0): 1, (DISCARD, 0): 1})

    def test_build_collider_prior_by_hand(self, food_graph):
        G = food_graph
        ab = par(seq(mechanism(G, "A"), copy(0)), seq(mechanism(G, "B"), copy(1)))
        # ab outputs A A B B; C consumes one A and one B
        f = seq(ab, par(identity([0, 1]), mechanism(G, "C")))
        assert diagrams_equal(f, prior(G, G.vertices))

    def test_associativity(self, rng):
        for _ in range(20):
            m = random_model(rng, n=4)
            G = m.structure
            f = random_diagram(rng, G, layers=1)
            g = random_diagram(rng, G, layers=1, dom=f.cod)
            h = random_diagram(rng, G, layers=1, dom=g.cod)
            assert diagrams_equal(seq(seq(f, g), h), seq(f, seq(g, h)))


class TestComonoidEquations:
    def test_coassociativity(self):
        left = seq(copy(0), par(copy(0), identity(0)))
        right = seq(copy(0), par(identity(0), copy(0)))
        assert diagrams_equal(left, right)

    def test_counitality(self):
        assert diagrams_equal(seq(copy(0), par(discard(0), identity(0))), identity(0))
        assert diagrams_equal(seq(copy(0), par(identity(0), discard(0))), identity(0))

    def test_fully_discarded_copy(self):
        assert diagrams_equal(seq(copy(0), par(discard(0), discard(0))), discard(0))

    def test_cocommutativity_is_free(self, food_graph):
        G = food_graph
        # copy A and send the two branches to the two outputs in either order
        a = seq(mechanism(G, "A"), copy(0))
        assert diagrams_equal(par(a, mechanism(G, "B")), par(mechanism(G, "B"), a))

    def test_distinct_morphisms(self, food_graph):
        G = food_graph
        assert not diagrams_equal(copy(0), par(identity(0), identity(0)))
        assert not diagrams_equal(mechanism(G, "A"), mechanism(G, "B"))
        # discarding a mechanism output is not the empty diagram
        assert not diagrams_equal(seq(mechanism(G, "A"), discard(0)), identity())

    def test_mechanism_input_ports_matter(self):
        from causal_theories import CausalStructure

        G = CausalStructure.build("XYZ", [("X", "Z"), ("Y", "Z")])
        # X feeds Z with a second copy of X discarded, versus Y's copy discarded
        f = seq(par(seq(mechanism(G, "X"), copy(0)), mechanism(G, "Y")),
                par(discard(0), mechanism(G, "Z")))
        assert diagrams_equal(f, prior(G, ["Z"]))


class TestCausalConditional:
    def test_worked_example_census(self, six_graph):
        f = causal_conditional(six_graph, ["B"], ["D", "E"])
        assert census(f, six_graph) == {
            (MECHANISM, "A"): 1,
            (MECHANISM, "C"): 1,
            (MECHANISM, "D"): 1,
            (MECHANISM, "E"): 1,
            (COPY, "C"): 1,
            (COPY, "D"): 1,
        }
        assert f.dom == TheoryObject.of(six_graph.index("B"))
        assert f.cod == TheoryObject.of(six_graph.index("D"), six_graph.index("E"))

    def test_mediator_r_given_t(self, mediator):
        G = mediator.structure
        f = causal_conditional(G, ["T"], ["R"])
        assert census(f, G) == {(MECHANISM, "B"): 1, (MECHANISM, "R"): 1, (COPY, "T"): 1}

    def test_prior_of_collider(self, food_graph):
        f = prior(food_graph, food_graph.vertices)
        assert census(f, food_graph) == {
            (MECHANISM, "A"): 1, (MECHANISM, "B"): 1, (MECHANISM, "C"): 1,
            (COPY, "A"): 1, (COPY, "B"): 1,
        }

    def test_prior_of_single_root(self, food_graph):
        assert diagrams_equal(prior(food_graph, ["A"]), mechanism(food_graph, "A"))

    def test_given_without_children_is_discarded(self, food_graph):
        f = causal_conditional(food_graph, ["A"], ["B"])
        assert census(f, food_graph) == {(MECHANISM, "B"): 1, (DISCARD, "A"): 1}
        assert not is_inferential(f)

    def test_empty_conditional(self, food_graph):
        f = causal_conditional(food_graph, [], [])
        assert not f.boxes and not f.wires

    def test_overlap(self, food_graph):
        with pytest.raises(OverlappingSubsets):
            causal_conditional(food_graph, ["A"], ["A"])

    @settings(max_examples=100)
    @given(dags(), st.data())
    def test_census_matches_out_degrees(self, G, data):
        vs = list(G.vertices)
        labels = data.draw(st.lists(st.sampled_from("WT--"), min_size=len(vs), max_size=len(vs)))
        w = {v for v, l in zip(vs, labels) if l == "W"}
        w2 = {v for v, l in zip(vs, labels) if l == "T"}
        f = causal_conditional(G, w, w2)
        sub = G.reasoning_subgraph(w, w2)
        c = f.census()
        for v in sub.vertices:
            branches = sub.out_degree[v] + (v in w2)
            assert c[(COPY, v)] == max(branches - 1, 0)
            assert c[(DISCARD, v)] == (branches == 0)
            assert c[(MECHANISM, v)] == (v not in w)
        assert sum(c.values()) == sum(c[(k, v)] for k in (COPY, DISCARD, MECHANISM) for v in sub.vertices)
        assert f.dom == TheoryObject(tuple(w)) and f.cod == TheoryObject(tuple(w2))

    def test_whole_prior_has_every_mechanism(self, rng):
        for _ in range(20):
            G = random_dag(rng, 5)
            c = prior(G, G.vertices).census()
            assert all(c[(MECHANISM, v)] == 1 for v in G.vertices)
            assert all(c[(COPY, v)] == len(G.children(v)) for v in G.vertices)


class TestInferential:
    def test_examples(self, six_graph):
        G = six_graph
        assert is_inferential(causal_conditional(G, ["B"], ["E"]))
        assert is_inferential(causal_conditional(G, ["A"], ["F"]))
        assert not is_inferential(causal_conditional(G, ["E"], ["B"]))
        assert not is_inferential(causal_conditional(G, ["D"], ["C"]))

    def test_identity_and_discard(self):
        assert is_inferential(identity(0))
        assert not is_inferential(discard(0))
        assert not is_inferential(identity())

    @settings(max_examples=60)
    @given(dags())
    def test_iff_ancestor(self, G):
        for u in G.vertices:
            for v in G.vertices:
                if u != v:
                    assert is_inferential(causal_conditional(G, [u], [v])) == G.is_ancestor(u, v)


class TestDot:
    def test_deterministic_and_well_formed(self, six_graph):
        f = causal_conditional(six_graph, ["B"], ["D", "E"])
        a = to_dot(f, six_graph, "DE given B")
        b = to_dot(causal_conditional(six_graph, ["B"], ["D", "E"]), six_graph, "DE given B")
        assert a == b
        assert a.startswith('digraph "DE given B" {')
        assert a.rstrip().endswith("}")
        assert a.count(" -> ") == len(f.wires)
        assert '"mechanism_E_0" [shape=box, label="E|CD"];' in a
        assert '"mechanism_A_0" [shape=triangle, label="A"];' in a
        assert '"in_B_0"' in a and '"out_D_0"' in a

    def test_quotes_names(self):
        from causal_theories import CausalStructure

        G = CausalStructure.build(['say "hi"'], [])
        assert '\\"hi\\"' in to_dot(mechanism(G, 0), G)


def test_evaluation_respects_diagram_equality(mediator):
    t_copy = seq(copy(0), par(identity(0), seq(copy(0), par(identity(0), discard(0)))))
    assert diagrams_equal(t_copy, copy(0))
    assert_array_equal(evaluate(t_copy, mediator).data, evaluate(copy(0), mediator).data)

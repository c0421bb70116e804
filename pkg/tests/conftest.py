import numpy as np
import pytest

from causal_theories import CausalStructure, StochCausalModel
from causal_theories.files import data_path, load_joint, load_model


@pytest.fixture
def food_graph():
    return CausalStructure.build("ABC", [("A", "C"), ("B", "C")])


@pytest.fixture
def six_graph():
    # the worked example graph used for [DE||B]
    return CausalStructure.build(
        "ABCDEF",
        [("A", "B"), ("A", "C"), ("B", "C"), ("C", "D"), ("C", "E"), ("D", "E"), ("E", "F")],
    )


@pytest.fixture
def food_model() -> StochCausalModel:
    return load_model(data_path("food_model.json"))


@pytest.fixture
def food_joint():
    return load_joint(data_path("food_joint.json"))


@pytest.fixture
def mediator() -> StochCausalModel:
    return load_model(data_path("simpson_mediator.json"))


@pytest.fixture
def confounder() -> StochCausalModel:
    return load_model(data_path("simpson_confounder.json"))


@pytest.fixture
def rng():
    return np.random.default_rng(20261019)

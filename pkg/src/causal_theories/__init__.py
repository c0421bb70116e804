"""Causal theories: string diagrams over causal structures and their stochastic models."""

from .diagram import (
    Diagram,
    TheoryObject,
    causal_conditional,
    copy,
    diagrams_equal,
    discard,
    identity,
    is_inferential,
    mechanism,
    normal_form,
    par,
    prior,
    seq,
    to_dot,
)
from .errors import CausalTheoryError
from .model import (
    Classification,
    Compatibility,
    ModelMorphism,
    MorphismVerdict,
    RelCausalModel,
    SetCausalModel,
    StochCausalModel,
    check_compatibility,
    classify_morphism,
    conditional,
    evaluate,
    evaluate_rel,
    evaluate_set,
    find_morphisms,
    joint_prior,
    marginal_prior,
    terminal_model,
    terminal_morphism,
    trivial_model,
    validate_morphism,
)
from .stoch import (
    TOL,
    BoolMatrix,
    FinSpace,
    JointDistribution,
    StochMatrix,
    compose,
    conditional_from_joint,
    cond_independent,
    independent,
    marginalize,
    tensor,
)
from .structure import CausalStructure, ReasoningSubgraph, build

__version__ = "0.1.0"

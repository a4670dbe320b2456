from .statespace import StateSpaceModel, discretize, static_gain
from .riccati import RiccatiError, solve_care, solve_riccati
from .norms import UnstableSystemError, hinf_norm
from .weights import TransferWeight, make_current_weight, make_tracking_weight
from .plant import GeneralizedPlant, RankConditionError, build_generalized_plant
from .hinf import ControllerRealization, SynthesisError, close_loop, synthesize, verify

__all__ = [
    "StateSpaceModel", "discretize", "static_gain",
    "RiccatiError", "solve_care", "solve_riccati",
    "UnstableSystemError", "hinf_norm",
    "TransferWeight", "make_current_weight", "make_tracking_weight",
    "GeneralizedPlant", "RankConditionError", "build_generalized_plant",
    "ControllerRealization", "SynthesisError", "close_loop", "synthesize", "verify",
]

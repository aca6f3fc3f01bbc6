"""
Deep feedforward networks: forward pass, back-propagation and
gradient-norm instrumentation
"""

from .gradcheck import gradient_check
from .network import (
    BackwardTrace,
    ForwardTrace,
    NetworkParams,
    backprop_step,
    backward,
    forward,
    init_network,
    log_gradient_profile,
    propagate,
)
from .nonlinearity import Nonlinearity, OutputActivation, softmax
from .objectives import ObjectiveKind, check_pairing, objective_value, output_delta
from .persistence import load_network, save_network

__all__ = [
    "gradient_check",
    "BackwardTrace", "ForwardTrace", "NetworkParams", "backprop_step", "backward",
    "forward", "init_network", "log_gradient_profile", "propagate",
    "Nonlinearity", "OutputActivation", "softmax",
    "ObjectiveKind", "check_pairing", "objective_value", "output_delta",
    "load_network", "save_network",
]

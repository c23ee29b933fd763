from .backend import BACKEND_NAME, kernels, load_backend
from .network import (
    ACTIVATIONS,
    DenseLayer,
    LstmCell,
    Network,
    RecurrentState,
    init_dense,
    init_lstm,
)
from .optim import RmsPropState, rmsprop_step
from .tape import GradientTape, Node, backward
from .weights_io import load_weights, save_weights

__all__ = [
    "ACTIVATIONS",
    "BACKEND_NAME",
    "DenseLayer",
    "GradientTape",
    "LstmCell",
    "Network",
    "Node",
    "RecurrentState",
    "RmsPropState",
    "backward",
    "init_dense",
    "init_lstm",
    "kernels",
    "load_backend",
    "load_weights",
    "rmsprop_step",
    "save_weights",
]

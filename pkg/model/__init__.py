"""
Model module initialization.
"""
from model.params import Hyperparams, TrainSchedule
from model.network import LatentState, Network, PosteriorSummary, normalize_columns
from model.generative import generate, sample_hidden_units, sample_prior
from model.serialization import load_network, save_network

__all__ = [
    "Hyperparams",
    "LatentState",
    "Network",
    "PosteriorSummary",
    "TrainSchedule",
    "generate",
    "load_network",
    "normalize_columns",
    "sample_hidden_units",
    "sample_prior",
    "save_network",
]

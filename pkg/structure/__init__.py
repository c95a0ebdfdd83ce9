"""
Structure module initialization.
"""
from structure.layerwise import LayerwiseTrainer, TrainedStack, depth_criterion, prune, train_layerwise

__all__ = ["LayerwiseTrainer", "TrainedStack", "depth_criterion", "prune", "train_layerwise"]

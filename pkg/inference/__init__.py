"""
Inference module initialization.
"""
from inference.conditionals import (
    crt_uppass,
    propagate_p,
    sample_gamma0_c0,
    sample_phi,
    sample_pj_cj,
    sample_r,
    sample_theta,
    sample_token_topics,
    split_counts,
)
from inference.gibbs import GibbsSampler, IterationReport
from inference.workers import DocumentShards

__all__ = [
    "DocumentShards",
    "GibbsSampler",
    "IterationReport",
    "crt_uppass",
    "propagate_p",
    "sample_gamma0_c0",
    "sample_phi",
    "sample_pj_cj",
    "sample_r",
    "sample_theta",
    "sample_token_topics",
    "split_counts",
]

"""
Sampling module initialization.
"""
from sampling.rng import Rng
from sampling.count_dist import (
    multinomial_split,
    poisson_log_pair,
    sample_categorical,
    sample_crt,
    sample_crt_array,
    sample_dirichlet,
    sample_dirichlet_columns,
    sample_gamma,
    sample_log,
    sample_nb,
)
from sampling.stirling import StirlingTable, crt_pmf, log_pmf, nb_pmf, poisson_log_joint_pmf

__all__ = [
    "Rng",
    "StirlingTable",
    "crt_pmf",
    "log_pmf",
    "nb_pmf",
    "poisson_log_joint_pmf",
    "multinomial_split",
    "poisson_log_pair",
    "sample_categorical",
    "sample_crt",
    "sample_crt_array",
    "sample_dirichlet",
    "sample_dirichlet_columns",
    "sample_gamma",
    "sample_log",
    "sample_nb",
]

"""
Forward simulation of the gamma belief network, top layer down.
"""
import logging
from typing import List, Tuple, Union

import numpy as np

from errors import ModelError
from inference.conditionals import P_CLAMP, propagate_p, sample_beta
from ingestion.corpus import CountMatrix
from model.network import LatentState, Network
from model.params import Hyperparams
from sampling.count_dist import sample_dirichlet_columns, sample_gamma
from sampling.rng import Rng

logger = logging.getLogger(__name__)


def broadcast_c_schedule(c_sched: Union[float, np.ndarray, List], T: int, J: int) -> np.ndarray:
    """Broadcast a schedule of c^(2..T+1) to a (T, J) array."""
    c = np.asarray(c_sched, dtype=float)
    if c.ndim == 0:
        c = np.full(T, float(c))
    if c.shape[0] != T or c.ndim > 2:
        raise ModelError(f"c schedule needs {T} layers (c^(2)..c^({T + 1})), got shape {c.shape}")
    if c.ndim == 2 and c.shape[1] != J:
        raise ModelError(f"c schedule covers {c.shape[1]} documents, expected {J}")
    c = np.broadcast_to(c[:, None] if c.ndim == 1 else c, (T, J)).astype(float)
    if not np.all(np.isfinite(c)) or np.any(c <= 0):
        raise ModelError("every c in the schedule must be positive and finite")
    return c


def scalars_from_c(c_rows: np.ndarray) -> Tuple[np.ndarray, np.ndarray]:
    """(c, p) arrays of a LatentState from c^(2..T+1); p^(2) = 1 / (1 + c^(2))."""
    T, J = c_rows.shape
    c, p = LatentState.empty_scalars(T, J)
    c[2:] = c_rows
    p[2] = 1.0 / (1.0 + c[2])
    for t in range(3, T + 2):
        p[t] = propagate_p(p[t - 1], c[t])
    return c, p


def sample_hidden_units(network: Network, c: np.ndarray, rng: Rng) -> List[np.ndarray]:
    """
    theta^(T) ~ Gam(r, 1/c^(T+1)), then theta^(t) ~ Gam(Phi^(t+1) theta^(t+1), 1/c^(t+1)) downward.

    Args:
        c: (T + 2) x J array indexed by layer, as in LatentState

    Returns:
        [theta^(1), ..., theta^(T)]
    """
    T, J = network.depth, c.shape[1]
    theta: List[np.ndarray] = [None] * T
    for t in range(T, 0, -1):
        shape = network.prior_weights(t, theta[t] if t < T else None, J)
        theta[t - 1] = sample_gamma(shape, 1.0 / c[t + 1][None, :], rng)
    return theta


def _poisson_counts(phi1: np.ndarray, theta1: np.ndarray, rng: Rng) -> CountMatrix:
    rate = phi1 @ theta1
    return CountMatrix.from_dense(rng.generator.poisson(rate))


def generate(network: Network, J: int, c_sched, rng: Rng) -> Tuple[CountMatrix, LatentState]:
    """
    Draw J documents from the network.

    Args:
        network: trained or hand-built network
        J: number of documents
        c_sched: c^(2)..c^(T+1); a scalar, a length-T vector or a (T, J) array

    Returns:
        (x^(1), latent state holding every theta^(t), c and p)
    """
    if J < 0:
        raise ModelError(f"document count must be >= 0, got {J}")
    T = network.depth
    c, p = scalars_from_c(broadcast_c_schedule(c_sched, T, J))
    theta = sample_hidden_units(network, c, rng)
    counts = _poisson_counts(network.phi[0], theta[0], rng)
    state = LatentState(theta=theta, x=[counts] + [None] * T, m=[None] * T, phi_counts=[None] * T, c=c, p=p)
    logger.debug(f"Generated {J} documents with {counts.total()} tokens from a depth-{T} network")
    return counts, state


def sample_prior(widths: Tuple[int, ...], J: int, hyper: Hyperparams, rng: Rng) -> Tuple[Network, LatentState]:
    """
    Joint draw of every global and per-document variable from the prior,
    followed by x^(1); the forward half of a sampler self-consistency check.
    """
    if len(widths) < 2 or min(widths) < 1:
        raise ModelError(f"widths must name V and at least one layer, got {widths}")
    T = len(widths) - 1
    h = hyper
    gamma0 = sample_gamma(h.a0, 1.0 / h.b0, rng)
    c0 = sample_gamma(h.e0, 1.0 / h.f0, rng)
    phi = [
        sample_dirichlet_columns(np.full((widths[t - 1], widths[t]), h.eta_for(t)), rng)
        for t in range(1, T + 1)
    ]
    r = sample_gamma(np.full(widths[-1], gamma0 / widths[-1]), 1.0 / c0, rng)
    network = Network(phi=phi, r=r, gamma0=gamma0, c0=c0)

    c, p = LatentState.empty_scalars(T, J)
    p[2] = np.clip(sample_beta(np.full(J, h.a0), np.full(J, h.b0), rng), P_CLAMP, 1.0 - P_CLAMP)
    c[2] = (1.0 - p[2]) / p[2]
    for t in range(3, T + 2):
        c[t] = sample_gamma(np.full(J, h.e0), 1.0 / h.f0, rng)
        p[t] = propagate_p(p[t - 1], c[t])
    theta = sample_hidden_units(network, c, rng)
    counts = _poisson_counts(phi[0], theta[0], rng)
    state = LatentState(theta=theta, x=[counts] + [None] * T, m=[None] * T, phi_counts=[None] * T, c=c, p=p)
    return network, state

"""
Conditional updates of the upward-downward Gibbs sampler.

Each function is one step of an iteration and takes its `Rng` explicitly.
Matrices keep the model's orientation: counts and hidden units are
(factors x documents), connection weights are (rows of layer t-1 x factors
of layer t).
"""
import math
from typing import List, Optional, Tuple, Union

import numpy as np
from scipy import sparse

from errors import DegenerateWeightsError, DimensionError, NumericDomainError
from ingestion.corpus import CountMatrix
from sampling.count_dist import (
    sample_categorical,
    sample_crt_array,
    sample_dirichlet_columns,
    sample_gamma,
)
from sampling.rng import Rng

P_CLAMP = 1e-12

Counts = Union[CountMatrix, sparse.spmatrix, np.ndarray]


def propagate_p(p_prev, c_next):
    """p^(t+1) = -ln(1 - p^(t)) / (c^(t+1) - ln(1 - p^(t))); arrays broadcast."""
    p_prev = np.asarray(p_prev, dtype=float)
    c_next = np.asarray(c_next, dtype=float)
    if np.any(p_prev >= 1) or np.any(p_prev < 0):
        raise NumericDomainError("p must lie in [0, 1) to propagate")
    if np.any(c_next <= 0):
        raise NumericDomainError("c must be positive to propagate p")
    q = -np.log1p(-p_prev)
    out = q / (c_next + q)
    return float(out) if out.ndim == 0 else out


def _nonzero_entries(counts: Counts) -> Tuple[np.ndarray, np.ndarray, np.ndarray, Tuple[int, int]]:
    if isinstance(counts, CountMatrix):
        counts = counts.matrix
    if sparse.issparse(counts):
        coo = sparse.coo_matrix(counts)
        keep = coo.data > 0
        return coo.row[keep], coo.col[keep], coo.data[keep].astype(np.int64), coo.shape
    dense = np.asarray(counts)
    rows, cols = np.nonzero(dense)
    return rows, cols, dense[rows, cols].astype(np.int64), dense.shape


def _split_draws(rows: np.ndarray, cols: np.ndarray, vals: np.ndarray, phi: np.ndarray,
                 theta: np.ndarray, rng: Rng) -> np.ndarray:
    """(nnz x K) multinomial split of each count with weights phi_{vk} theta_{kj}."""
    weights = phi[rows, :] * theta[:, cols].T
    totals = weights.sum(axis=1)
    if np.any(totals <= 0) or not np.all(np.isfinite(totals)):
        bad = int(np.flatnonzero(~(totals > 0))[0])
        raise DegenerateWeightsError(f"all-zero weights for count {vals[bad]} at ({rows[bad]}, {cols[bad]})")
    return rng.generator.multinomial(vals, weights / totals[:, None])


def split_counts(x_layer: Counts, phi: np.ndarray, theta: np.ndarray, rng: Rng) -> Tuple[np.ndarray, np.ndarray]:
    """
    Multinomial split of every nonzero x^(t)_{vj} over the factors of layer t
    with probabilities proportional to phi_{vk} theta_{kj}.

    Returns:
        (phi_counts, m): x^(t)_{v.k} (K_{t-1} x K_t) and m^(t)(t+1) (K_t x J)
    """
    rows, cols, vals, shape = _nonzero_entries(x_layer)
    K_prev, K = phi.shape
    if shape[0] != K_prev or theta.shape != (K, shape[1]):
        raise DimensionError(f"counts {shape}, phi {phi.shape} and theta {theta.shape} do not agree")
    phi_counts = np.zeros((K_prev, K), dtype=np.int64)
    m_t = np.zeros((shape[1], K), dtype=np.int64)
    if vals.size == 0:
        return phi_counts, m_t.T.copy()
    draws = _split_draws(rows, cols, vals, phi, theta, rng)
    np.add.at(phi_counts, rows, draws)
    np.add.at(m_t, cols, draws)
    return phi_counts, m_t.T.copy()


def init_token_topics(counts: CountMatrix, phi: np.ndarray, prior_weights: np.ndarray, rng: Rng):
    """
    Initial layer-1 token assignments: each count x_{vj} is split over topics
    in proportion to phi_{vk} prior_{kj}, and its tokens take those topics.

    Returns:
        (words, docs, z, phi_counts, m) with tokens in `expand_tokens` order
    """
    csc = counts.matrix
    K = phi.shape[1]
    if phi.shape[0] != counts.V or prior_weights.shape != (K, counts.J):
        raise DimensionError(f"phi {phi.shape} and prior {prior_weights.shape} do not fit a {counts.shape} corpus")
    words, docs = counts.expand_tokens()
    rows = csc.indices.astype(np.int64)
    cols = np.repeat(np.arange(counts.J), np.diff(csc.indptr))
    vals = csc.data.astype(np.int64)
    phi_counts = np.zeros((counts.V, K), dtype=np.int64)
    m_t = np.zeros((counts.J, K), dtype=np.int64)
    if vals.size == 0:
        return words, docs, np.zeros(0, dtype=np.int64), phi_counts, m_t.T.copy()
    draws = _split_draws(rows, cols, vals, phi, prior_weights, rng)
    z = np.repeat(np.tile(np.arange(K, dtype=np.int64), vals.size), draws.ravel())
    np.add.at(phi_counts, rows, draws)
    np.add.at(m_t, cols, draws)
    return words, docs, z, phi_counts, m_t.T.copy()


def token_conditional(v: int, j: int, nvk: np.ndarray, ndk: np.ndarray, nk: np.ndarray,
                      prior: np.ndarray, eta: float) -> np.ndarray:
    """Unnormalised collapsed weights for one token whose assignment is removed.

    `nvk` is x_{v.k} (V x K), `ndk` is x_{.jk} stored documents-first (J x K),
    `prior` is the documents-first prior weights (J x K).
    """
    V = nvk.shape[0]
    return (eta + nvk[v]) / (V * eta + nk) * (ndk[j] + prior[j])


def sample_token_topics(
    words: np.ndarray,
    docs: np.ndarray,
    z: np.ndarray,
    phi_counts: np.ndarray,
    m: np.ndarray,
    prior_weights: np.ndarray,
    eta: float,
    rng: Rng,
) -> Tuple[np.ndarray, np.ndarray, np.ndarray]:
    """
    One collapsed sweep over all layer-1 tokens with Phi^(1) and theta^(1)
    marginalised out.

    Args:
        words, docs: token-level term and document ids
        z: current assignments (updated in place)
        phi_counts: x^(1)_{v.k} (V x K) consistent with `z`
        m: x^(1)_{.jk} (K x J) consistent with `z`
        prior_weights: K x J, Phi^(2) theta^(2) or r broadcast
        eta: eta^(1)

    Returns:
        (z, phi_counts, m) after the sweep
    """
    K, J = m.shape
    if prior_weights.shape != (K, J) or phi_counts.shape[1] != K:
        raise DimensionError("token sweep inputs do not agree on the number of topics")
    if np.any(prior_weights < 0) or np.any(prior_weights.sum(axis=0) <= 0):
        raise DegenerateWeightsError("prior weights must be nonnegative and not all zero")
    nvk = phi_counts
    ndk = m.T.copy()
    prior = np.ascontiguousarray(prior_weights.T)
    nk = nvk.sum(axis=0)
    uniforms = rng.generator.random(words.size)
    for i in range(words.size):
        v, j, k = words[i], docs[i], z[i]
        nvk[v, k] -= 1
        ndk[j, k] -= 1
        nk[k] -= 1
        k = sample_categorical(token_conditional(v, j, nvk, ndk, nk, prior, eta), uniforms[i])
        z[i] = k
        nvk[v, k] += 1
        ndk[j, k] += 1
        nk[k] += 1
    return z, nvk, ndk.T.copy()


def crt_uppass(m: np.ndarray, phi_next: Optional[np.ndarray], theta_next: Optional[np.ndarray], rng: Rng,
               r: Optional[np.ndarray] = None) -> np.ndarray:
    """x^(t+1)_{kj} ~ CRT(m_{kj}, phi^(t+1)_{k:} theta^(t+1)_j), with r at the top layer."""
    if phi_next is None:
        if r is None:
            raise DimensionError("the top layer needs r as its CRT rate")
        rate = np.asarray(r, dtype=float)[:, None]
    else:
        rate = phi_next @ theta_next
    return sample_crt_array(m, rate, rng)


def sample_phi(phi_counts: np.ndarray, eta: float, rng: Rng) -> np.ndarray:
    """Each column ~ Dir(eta + x^(t)_{1.k}, ..., eta + x^(t)_{K_{t-1}.k})."""
    return sample_dirichlet_columns(eta + np.asarray(phi_counts, dtype=float), rng)


def sample_theta(prior_shape: np.ndarray, m: np.ndarray, c_next: np.ndarray, p_t: np.ndarray, rng: Rng) -> np.ndarray:
    """theta^(t)_j ~ Gam(prior_shape_j + m_j, 1 / (c^(t+1)_j - ln(1 - p^(t)_j)))."""
    rate = np.asarray(c_next, dtype=float) - np.log1p(-np.asarray(p_t, dtype=float))
    if not np.all(np.isfinite(rate)) or np.any(rate <= 0):
        raise NumericDomainError("theta update has a non-positive or non-finite rate")
    return sample_gamma(prior_shape + m, 1.0 / rate[None, :], rng)


def sample_r(x_top: np.ndarray, gamma0: float, c0: float, p_top: np.ndarray, rng: Rng) -> np.ndarray:
    """r_k ~ Gam(gamma0 / K_T + x^(T+1)_{k.}, 1 / (c0 - sum_j ln(1 - p^(T+1)_j)))."""
    K_T = x_top.shape[0]
    rate = c0 - float(np.sum(np.log1p(-np.asarray(p_top, dtype=float))))
    if not math.isfinite(rate) or rate <= 0:
        raise NumericDomainError(f"r update has invalid rate {rate}")
    return sample_gamma(gamma0 / K_T + x_top.sum(axis=1), 1.0 / rate, rng)


def sample_gamma0_c0(
    r: np.ndarray,
    x_top_rows: np.ndarray,
    p_top: np.ndarray,
    gamma0: float,
    a0: float,
    b0: float,
    e0: float,
    f0: float,
    rng: Rng,
) -> Tuple[float, float]:
    """
    c0 ~ Gam(e0 + gamma0, 1 / (f0 + sum_k r_k)); then gamma0 through the CRT
    augmentation l_k ~ CRT(x^(T+1)_{k.}, gamma0 / K_T),
    gamma0 ~ Gam(a0 + sum_k l_k, 1 / (b0 - ln(1 - p_tilde))).
    """
    K_T = r.size
    if gamma0 <= 0:
        raise NumericDomainError(f"gamma0 must be positive, got {gamma0}")
    c0 = sample_gamma(e0 + gamma0, 1.0 / (f0 + float(r.sum())), rng)
    sum_log = float(np.sum(np.log1p(-np.asarray(p_top, dtype=float))))
    p_tilde = -sum_log / (c0 - sum_log)
    if not 0 <= p_tilde < 1:
        raise NumericDomainError(f"p_tilde {p_tilde} outside [0, 1)")
    tables = int(sample_crt_array(np.asarray(x_top_rows, dtype=np.int64), gamma0 / K_T, rng).sum())
    gamma0 = sample_gamma(a0 + tables, 1.0 / (b0 - math.log1p(-p_tilde)), rng)
    return float(gamma0), float(c0)


def sample_beta(a: np.ndarray, b: np.ndarray, rng: Rng) -> np.ndarray:
    """Beta via two floored gamma draws, so tiny shapes never yield NaN."""
    ga = sample_gamma(a, 1.0, rng)
    gb = sample_gamma(b, 1.0, rng)
    return ga / (ga + gb)


def sample_pj_cj(
    m1_totals: np.ndarray,
    theta_totals: List[np.ndarray],
    a0: float,
    b0: float,
    e0: float,
    f0: float,
    rng: Rng,
) -> Tuple[np.ndarray, np.ndarray]:
    """
    Per-document p and c for one block of documents.

    Args:
        m1_totals: m^(1)(2)_{.j}
        theta_totals: theta^(t)_{.j} for t = 2..T+1, with r_. in the last slot

    Returns:
        (c, p) arrays of shape (T + 2, J): c^(2..T+1) and p^(1..T+1) filled
    """
    T = len(theta_totals)
    J = m1_totals.size
    c = np.full((T + 2, J), np.nan)
    p = np.full((T + 2, J), np.nan)
    p[1] = 1.0 - math.exp(-1.0)
    p2 = sample_beta(a0 + m1_totals, b0 + theta_totals[0], rng)
    p[2] = np.clip(p2, P_CLAMP, 1.0 - P_CLAMP)
    c[2] = (1.0 - p[2]) / p[2]
    for t in range(3, T + 2):
        upper = theta_totals[t - 2]
        lower = theta_totals[t - 3]
        c[t] = sample_gamma(e0 + upper, 1.0 / (f0 + lower), rng)
        p[t] = propagate_p(p[t - 1], c[t])
    return c, p

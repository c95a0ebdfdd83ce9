"""
Sampling kernels for the count distributions of the augmentation scheme.

Scalar kernels (`sample_crt`, `sample_log`, `sample_nb`, `poisson_log_pair`,
`multinomial_split`) follow their definitions literally; the `*_array`
variants are the vectorised forms the Gibbs sampler uses on whole layers.
Every kernel takes an explicit `Rng` and touches no global state.
"""
import math
from typing import Tuple, Union

import numpy as np

from errors import DegenerateWeightsError, InvalidParameterError
from sampling.rng import Rng

GAMMA_FLOOR = 1e-300
LOG_P_MAX = 1.0 - 1e-12

ArrayLike = Union[float, np.ndarray]


def _require_positive(name: str, value: ArrayLike) -> np.ndarray:
    arr = np.asarray(value, dtype=float)
    if not np.all(np.isfinite(arr)) or np.any(arr <= 0):
        raise InvalidParameterError(f"{name} must be positive and finite")
    return arr


def sample_crt(n: int, r: float, rng: Rng) -> int:
    """Chinese restaurant table draw: sum_{i=1..n} Bernoulli(r / (r + i - 1))."""
    if n < 0:
        raise InvalidParameterError(f"CRT customer count must be >= 0, got {n}")
    if not (math.isfinite(r) and r > 0):
        raise InvalidParameterError(f"CRT concentration must be positive and finite, got {r}")
    if n == 0:
        return 0
    probs = r / (r + np.arange(n))
    return int(np.count_nonzero(rng.generator.random(n) < probs))


def sample_crt_array(m: np.ndarray, rate: np.ndarray, rng: Rng) -> np.ndarray:
    """Entrywise CRT(m, rate) for integer array `m` and broadcastable `rate`."""
    m = np.asarray(m, dtype=np.int64)
    rate = np.broadcast_to(np.asarray(rate, dtype=float), m.shape)
    out = np.zeros(m.shape, dtype=np.int64)
    if np.any(m < 0):
        raise InvalidParameterError("CRT customer counts must be >= 0")
    active = m > 0
    if not np.any(active):
        return out
    counts = m[active]
    rates = rate[active]
    if not np.all(np.isfinite(rates)) or np.any(rates <= 0):
        raise InvalidParameterError("CRT rate must be positive and finite wherever the count is positive")
    owner = np.repeat(np.arange(counts.size), counts)
    starts = np.cumsum(counts) - counts
    position = np.arange(owner.size) - starts[owner]
    r_rep = rates[owner]
    hits = rng.generator.random(owner.size) < r_rep / (r_rep + position)
    out[active] = np.bincount(owner, weights=hits, minlength=counts.size).astype(np.int64)
    return out


def sample_log(p: float, rng: Rng) -> int:
    """Logarithmic draw by inverse CDF with the recurrence P(u+1) = P(u) p u / (u+1)."""
    if not 0 < p < LOG_P_MAX:
        raise InvalidParameterError(f"logarithmic p must lie in (0, 1 - 1e-12), got {p}")
    u = rng.generator.random()
    term = p / -math.log1p(-p)
    cdf = term
    k = 1
    while cdf <= u:
        term *= p * k / (k + 1)
        if term == 0.0:
            break
        cdf += term
        k += 1
    return k


def sample_gamma(shape: ArrayLike, scale: ArrayLike, rng: Rng, size=None) -> ArrayLike:
    """Gamma draw with shape < 1 handled by boosting, floored at 1e-300.

    Gam(a) = Gam(a + 1) * U^(1/a) is evaluated in log space so tiny shapes
    never produce NaN.
    """
    a = _require_positive("gamma shape", shape)
    s = _require_positive("gamma scale", scale)
    out_shape = size if size is not None else np.broadcast_shapes(a.shape, s.shape)
    a = np.broadcast_to(a, out_shape)
    small = a < 1.0
    draws = rng.generator.standard_gamma(np.where(small, a + 1.0, a), size=out_shape)
    if np.any(small):
        u = rng.generator.random(out_shape)
        with np.errstate(divide="ignore", under="ignore"):
            boost = np.exp(np.log(u) / a)
        draws = np.where(small, draws * boost, draws)
    with np.errstate(under="ignore"):
        draws = np.maximum(draws * s, GAMMA_FLOOR)
    if np.ndim(draws) == 0:
        return float(draws)
    return draws


def sample_dirichlet(concentration: np.ndarray, rng: Rng) -> np.ndarray:
    """Normalised gamma draws; every entry > 0 and the vector sums to 1."""
    alpha = np.asarray(concentration, dtype=float)
    if alpha.ndim != 1 or alpha.size == 0:
        raise InvalidParameterError("Dirichlet concentration must be a nonempty vector")
    g = sample_gamma(alpha, 1.0, rng)
    return g / g.sum()


def sample_dirichlet_columns(concentration: np.ndarray, rng: Rng) -> np.ndarray:
    """Independent Dirichlet draw for every column of a concentration matrix."""
    alpha = np.asarray(concentration, dtype=float)
    g = sample_gamma(alpha, 1.0, rng)
    return g / g.sum(axis=0, keepdims=True)


def sample_nb(r: float, p: float, rng: Rng) -> int:
    """NB(r, p) as the gamma mixed Poisson Pois(Gam(r, p / (1 - p)))."""
    if not (math.isfinite(r) and r > 0) or not 0 <= p < 1:
        raise InvalidParameterError(f"invalid NB parameters r={r}, p={p}")
    if p == 0:
        return 0
    lam = sample_gamma(r, p / (1.0 - p), rng)
    return int(rng.generator.poisson(lam))


def poisson_log_pair(r: float, p: float, rng: Rng) -> Tuple[int, int]:
    """(n, l) with l ~ Pois(-r ln(1 - p)) and n the sum of l Log(p) draws."""
    if not (math.isfinite(r) and r > 0) or not 0 < p < 1:
        raise InvalidParameterError(f"invalid Poisson-logarithmic parameters r={r}, p={p}")
    l = int(rng.generator.poisson(-r * math.log1p(-p)))
    n = sum(sample_log(p, rng) for _ in range(l))
    return n, l


def multinomial_split(x: int, weights: np.ndarray, rng: Rng) -> np.ndarray:
    """Split `x` over the buckets of `weights`; zero-weight buckets stay empty."""
    w = np.asarray(weights, dtype=float)
    if x < 0:
        raise InvalidParameterError(f"count to split must be >= 0, got {x}")
    if np.any(w < 0) or not np.all(np.isfinite(w)):
        raise InvalidParameterError("split weights must be nonnegative and finite")
    out = np.zeros(w.size, dtype=np.int64)
    if x == 0:
        return out
    support = np.flatnonzero(w)
    if support.size == 0:
        raise DegenerateWeightsError(f"cannot split {x} over all-zero weights")
    out[support] = rng.generator.multinomial(x, w[support] / w[support].sum())
    return out


def sample_categorical(weights: np.ndarray, u: float) -> int:
    """Cumulative-sum inversion: the first index whose cumulative weight is > u * total."""
    cum = np.cumsum(weights)
    idx = int(np.searchsorted(cum, u * cum[-1], side="right"))
    if idx >= cum.size:
        # u * total rounded up to total; fall back to the last positive bucket
        idx = int(np.flatnonzero(np.asarray(weights) > 0)[-1])
    return idx

"""
Exact probability oracles built on unsigned Stirling numbers of the first kind.

These are test and diagnostic oracles: they are exact for small counts and
refuse to go beyond the table they were built with.
"""
import math
from functools import lru_cache
from typing import List

import numpy as np
from scipy.special import gammaln

from errors import CapacityError, InvalidParameterError

DEFAULT_MAX_N = 64


class StirlingTable:
    """Triangular table of |s(n, l)| for 0 <= l <= n <= max_n.

    Entries are stored as Python integers, so the recursion
    |s(n+1, l)| = n |s(n, l)| + |s(n, l-1)| holds exactly.
    """

    def __init__(self, max_n: int = DEFAULT_MAX_N):
        if max_n < 0:
            raise InvalidParameterError(f"max_n must be >= 0, got {max_n}")
        self.max_n = int(max_n)
        rows: List[List[int]] = [[1]]
        for n in range(self.max_n):
            prev = rows[n]
            row = [0] * (n + 2)
            for l in range(1, n + 2):
                below = prev[l] if l <= n else 0
                row[l] = n * below + prev[l - 1]
            rows.append(row)
        self.entries = rows

    def exact(self, n: int, l: int) -> int:
        self._check(n)
        if l < 0 or l > n:
            return 0
        return self.entries[n][l]

    def log(self, n: int, l: int) -> float:
        """ln |s(n, l)|, -inf where the entry is zero."""
        value = self.exact(n, l)
        return math.log(value) if value > 0 else -math.inf

    def _check(self, n: int) -> None:
        if n < 0:
            raise InvalidParameterError(f"n must be >= 0, got {n}")
        if n > self.max_n:
            raise CapacityError(f"n={n} exceeds Stirling table capacity max_n={self.max_n}")


@lru_cache(maxsize=4)
def default_table(max_n: int = DEFAULT_MAX_N) -> StirlingTable:
    return StirlingTable(max_n)


def crt_pmf(n: int, r: float, table: StirlingTable = None) -> np.ndarray:
    """P(l | n, r) = Gamma(r) r^l / Gamma(n + r) |s(n, l)| for l = 0..n."""
    table = table or default_table()
    table._check(n)
    if not (np.isfinite(r) and r > 0):
        raise InvalidParameterError(f"CRT concentration must be positive and finite, got {r}")
    log_norm = gammaln(r) - gammaln(n + r)
    out = np.zeros(n + 1)
    for l in range(n + 1):
        log_s = table.log(n, l)
        if log_s > -math.inf:
            out[l] = math.exp(log_norm + l * math.log(r) + log_s)
    return out


def log_pmf(u: int, p: float) -> float:
    """Logarithmic distribution: P(u | p) = p^u / (-u ln(1 - p)), u >= 1."""
    if not 0 < p < 1:
        raise InvalidParameterError(f"logarithmic p must lie in (0, 1), got {p}")
    if u < 1:
        return 0.0
    return math.exp(u * math.log(p) - math.log(u) - math.log(-math.log1p(-p)))


def nb_pmf(n: int, r: float, p: float) -> float:
    """NB(r, p): Gamma(n + r) / (n! Gamma(r)) p^n (1 - p)^r."""
    if r <= 0 or not 0 <= p < 1:
        raise InvalidParameterError(f"invalid NB parameters r={r}, p={p}")
    if n < 0:
        return 0.0
    if p == 0:
        return 1.0 if n == 0 else 0.0
    log_p = gammaln(n + r) - gammaln(n + 1) - gammaln(r) + n * math.log(p) + r * math.log1p(-p)
    return float(math.exp(log_p))


def poisson_log_joint_pmf(n: int, l: int, r: float, p: float, table: StirlingTable = None) -> float:
    """Joint P(n, l | r, p) = |s(n, l)| r^l p^n (1 - p)^r / n!."""
    table = table or default_table()
    if r <= 0 or not 0 < p < 1:
        raise InvalidParameterError(f"invalid Poisson-logarithmic parameters r={r}, p={p}")
    if l < 0 or l > n:
        return 0.0
    log_s = table.log(n, l)
    if log_s == -math.inf:
        return 0.0
    return math.exp(log_s + l * math.log(r) + n * math.log(p) + r * math.log1p(-p) - gammaln(n + 1))

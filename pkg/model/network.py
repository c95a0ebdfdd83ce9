"""
Model data types: the trained network, one chain's latent state, and
posterior summaries.

Layer numbering follows the model: layer t = 1..T.  Python lists are 0-based,
so `phi[t - 1]` is Phi^(t) (K_{t-1} x K_t) and `theta[t - 1]` is theta^(t)
(K_t x J).  Per-document scalars `c` and `p` are (T + 2) x J arrays indexed
directly by layer number; rows that the model never defines hold NaN.
"""
import copy
import math
from dataclasses import dataclass, field
from typing import Any, Dict, List, Optional, Tuple, Type

import numpy as np

from errors import ModelError, PGBNError
from ingestion.corpus import CountMatrix

COLUMN_TOL = 1e-10
P1 = 1.0 - math.exp(-1.0)


@dataclass
class Network:
    """Per-layer column-stochastic Phi^(t), top-layer shapes r, and (gamma0, c0)."""
    phi: List[np.ndarray]
    r: np.ndarray
    gamma0: float = 1.0
    c0: float = 1.0
    metadata: Dict[str, Any] = field(default_factory=dict)

    def __post_init__(self):
        self.phi = [np.asarray(p, dtype=float) for p in self.phi]
        self.r = np.asarray(self.r, dtype=float)
        self.check()

    @property
    def depth(self) -> int:
        return len(self.phi)

    @property
    def widths(self) -> Tuple[int, ...]:
        return (self.phi[0].shape[0],) + tuple(p.shape[1] for p in self.phi)

    @property
    def V(self) -> int:
        return self.phi[0].shape[0]

    def check(self, error: Type[PGBNError] = ModelError) -> None:
        """Raise `error` unless every structural invariant holds."""
        if not self.phi:
            raise error("a network needs at least one layer")
        for t, p in enumerate(self.phi, start=1):
            if p.ndim != 2 or min(p.shape) < 1:
                raise error(f"Phi^({t}) must be a nonempty matrix, got shape {p.shape}")
            if t > 1 and p.shape[0] != self.phi[t - 2].shape[1]:
                raise error(f"Phi^({t}) has {p.shape[0]} rows but layer {t - 1} has width {self.phi[t - 2].shape[1]}")
            if not np.all(np.isfinite(p)) or np.any(p < 0):
                raise error(f"Phi^({t}) must be finite and nonnegative")
            sums = p.sum(axis=0)
            bad = np.flatnonzero(np.abs(sums - 1.0) > COLUMN_TOL)
            if bad.size:
                raise error(f"column {int(bad[0])} of Phi^({t}) sums to {sums[bad[0]]!r}, not 1")
        if self.r.shape != (self.phi[-1].shape[1],):
            raise error(f"r has shape {self.r.shape}, expected ({self.phi[-1].shape[1]},)")
        if not np.all(np.isfinite(self.r)) or np.any(self.r <= 0):
            raise error("r must be finite and positive")
        if not (self.gamma0 > 0 and self.c0 > 0):
            raise error("gamma0 and c0 must be positive")

    def copy(self) -> "Network":
        return Network(
            phi=[p.copy() for p in self.phi],
            r=self.r.copy(),
            gamma0=float(self.gamma0),
            c0=float(self.c0),
            metadata=copy.deepcopy(self.metadata),
        )

    def with_top_layer(self, phi_top: np.ndarray, r_top: np.ndarray) -> "Network":
        """A deeper network: the old r is replaced by Phi^(T+1) theta^(T+1)."""
        return Network(
            phi=[p.copy() for p in self.phi] + [np.asarray(phi_top, dtype=float)],
            r=np.asarray(r_top, dtype=float),
            gamma0=self.gamma0,
            c0=self.c0,
            metadata=copy.deepcopy(self.metadata),
        )

    def prior_weights(self, t: int, theta_next: Optional[np.ndarray], J: int) -> np.ndarray:
        """Gamma shapes of theta^(t): Phi^(t+1) theta^(t+1), or r broadcast at the top."""
        if t == self.depth:
            return np.repeat(self.r[:, None], J, axis=1)
        if theta_next is None:
            raise ModelError(f"theta^({t + 1}) is needed for the prior of layer {t}")
        return self.phi[t] @ theta_next


@dataclass
class LatentState:
    """All per-document latent variables of one Gibbs chain.

    `x[t - 1]` is x^(t) (K_{t-1} x J): `x[0]` the observed CountMatrix, deeper
    entries dense integer arrays, `x[T]` the top counts x^(T+1).  `m[t - 1]` is
    m^(t)(t+1) = x^(t)_{.jk} (K_t x J) and `phi_counts[t - 1]` is x^(t)_{v.k}
    (K_{t-1} x K_t).  Layer-1 token assignments live in `words`, `docs`, `z`.
    """
    theta: List[Optional[np.ndarray]]
    x: List[Any]
    m: List[Optional[np.ndarray]]
    phi_counts: List[Optional[np.ndarray]]
    c: np.ndarray
    p: np.ndarray
    words: Optional[np.ndarray] = None
    docs: Optional[np.ndarray] = None
    z: Optional[np.ndarray] = None

    @property
    def depth(self) -> int:
        return len(self.theta)

    @property
    def J(self) -> int:
        return self.c.shape[1]

    @property
    def counts(self) -> CountMatrix:
        return self.x[0]

    @staticmethod
    def empty_scalars(T: int, J: int) -> Tuple[np.ndarray, np.ndarray]:
        """(c, p) arrays with p^(1) = 1 - e^-1 and every undefined row NaN."""
        c = np.full((T + 2, J), np.nan)
        p = np.full((T + 2, J), np.nan)
        p[1] = P1
        return c, p

    def layer_totals(self) -> List[int]:
        """Sum_j x^(t)_{.j} for t = 1..T+1 (zero where not yet sampled)."""
        totals = [int(self.x[0].total())]
        for xt in self.x[1:]:
            totals.append(int(xt.sum()) if xt is not None else 0)
        return totals

    def check_conservation(self) -> None:
        """Exact integer identities between each layer's counts and its splits."""
        doc_totals = self.x[0].doc_totals()
        for t in range(1, self.depth + 1):
            m = self.m[t - 1]
            if m is None:
                continue
            below = doc_totals if t == 1 else self.x[t - 1].sum(axis=0)
            if not np.array_equal(m.sum(axis=0), below):
                raise ModelError(f"m^({t})({t + 1}) does not conserve the layer-{t} document totals")
            pc = self.phi_counts[t - 1]
            if pc is not None and int(pc.sum()) != int(below.sum()):
                raise ModelError(f"x^({t})_(v.k) does not conserve the layer-{t} total")
            up = self.x[t]
            if up is not None and (np.any(up > m) or np.any((up == 0) != (m == 0))):
                raise ModelError(f"x^({t + 1}) violates 0 < x <= m on the support of m")


@dataclass
class PosteriorSummary:
    """Averages over collected samples."""
    theta1_mean: np.ndarray
    feature_props: np.ndarray
    phi_mean: List[np.ndarray]
    sample_count: int
    empty_docs: np.ndarray = field(default_factory=lambda: np.zeros(0, dtype=bool))

    def __post_init__(self):
        sums = self.feature_props.sum(axis=0)
        if self.feature_props.size and np.any(np.abs(sums - 1.0) > COLUMN_TOL):
            raise ModelError("feature proportions must sum to 1 in every column")


def normalize_columns(matrix: np.ndarray) -> np.ndarray:
    """Column-normalise a positive matrix so every column sums to 1."""
    sums = matrix.sum(axis=0, keepdims=True)
    return matrix / sums

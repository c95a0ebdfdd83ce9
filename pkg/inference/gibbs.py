"""
Upward-downward Gibbs sampler for one chain of a gamma belief network.

One call to `GibbsSampler.iteration` runs, in order:

    layer 1      collapsed token sweep (or blocked split), Phi^(1), x^(2) by CRT
    t = 2..T     split x^(t), Phi^(t), x^(t+1) by CRT
    scalars      p^(2), c^(2), c^(t), p^(t) per document
    downward     gamma0 and c0, r, then theta^(T) .. theta^(2) (.. theta^(1) when blocked)

Per-document steps run over `DocumentShards`; the token sweep and the global
updates run serially.
"""
import logging
import time
from dataclasses import dataclass
from typing import List, Optional, Tuple

import numpy as np
from scipy.special import gammaln

from errors import DimensionError, InvalidParameterError
from inference.conditionals import (
    crt_uppass,
    init_token_topics,
    propagate_p,
    sample_gamma0_c0,
    sample_phi,
    sample_pj_cj,
    sample_r,
    sample_theta,
    sample_token_topics,
    split_counts,
)
from inference.workers import DocumentShards
from ingestion.corpus import CountMatrix
from model.network import LatentState, Network
from model.params import Hyperparams
from sampling.rng import Rng

logger = logging.getLogger(__name__)

LAYER1_SAMPLERS = ("collapsed", "blocked")


@dataclass
class IterationReport:
    """Per-iteration summary: widths, layer totals, a log-likelihood proxy and timing."""
    iteration: int
    depth: int
    widths: Tuple[int, ...]
    layer_totals: List[int]
    loglik: float
    seconds: float

    def progress_line(self) -> str:
        """`depth=T iter=i K_T=k total1=.. totalT+1=..`"""
        totals = " ".join(f"total{t}={n}" for t, n in enumerate(self.layer_totals, start=1))
        return f"depth={self.depth} iter={self.iteration} K_T={self.widths[-1]} {totals}"


def _columns(x, lo: int, hi: int):
    if isinstance(x, CountMatrix):
        return x.matrix[:, lo:hi]
    return x[:, lo:hi]


class GibbsSampler:
    """
    Owns one network copy and one `LatentState` and advances them together.

    Args:
        network: starting network; copied, never mutated
        counts: observed V x J counts
        hyper: hyperparameters
        rng: root stream of the chain; iteration i draws from `rng.spawn(i)`
        layer1_sampler: "collapsed" (token-level) or "blocked" (multinomial split)
        workers: number of document shards
        update_globals: when False, Phi, r, gamma0 and c0 stay fixed and only
            per-document latents move (layer 1 is then always blocked)
        state: optional starting latent state
    """

    def __init__(
        self,
        network: Network,
        counts: CountMatrix,
        hyper: Hyperparams,
        rng: Rng,
        layer1_sampler: str = "collapsed",
        workers: int = 1,
        update_globals: bool = True,
        state: Optional[LatentState] = None,
    ):
        if layer1_sampler not in LAYER1_SAMPLERS:
            raise InvalidParameterError(f"layer1_sampler must be one of {LAYER1_SAMPLERS}, got {layer1_sampler!r}")
        if counts.V != network.V:
            raise DimensionError(f"corpus has {counts.V} terms but the network has {network.V}")
        if not update_globals and layer1_sampler == "collapsed":
            logger.debug("Fixed Phi^(1) requires the blocked layer-1 sampler; switching")
            layer1_sampler = "blocked"
        self.network = network.copy()
        self.counts = counts
        self.hyper = hyper
        self.rng = rng
        self.layer1_sampler = layer1_sampler
        self.update_globals = update_globals
        self.shards = DocumentShards(counts.J, workers)
        self.iteration_count = 0
        self._stream = 0
        self.state = state if state is not None else self._initial_state()
        if self.collapsed and self.state.z is None:
            self._init_tokens(self.rng.spawn(2**63))

    @property
    def collapsed(self) -> bool:
        return self.layer1_sampler == "collapsed"

    @property
    def depth(self) -> int:
        return self.network.depth

    @property
    def J(self) -> int:
        return self.counts.J

    def _initial_state(self) -> LatentState:
        T, J = self.depth, self.J
        c, p = LatentState.empty_scalars(T, J)
        c[2:] = 1.0
        p[2] = 1.0 / (1.0 + c[2])
        for t in range(3, T + 2):
            p[t] = propagate_p(p[t - 1], c[t])
        theta = [np.ones((k, J)) for k in self.network.widths[1:]]
        return LatentState(
            theta=theta,
            x=[self.counts] + [None] * T,
            m=[None] * T,
            phi_counts=[None] * T,
            c=c,
            p=p,
        )

    def _init_tokens(self, rng: Rng) -> None:
        prior = self.prior_weights(1)
        words, docs, z, pc, m1 = init_token_topics(self.counts, self.network.phi[0], prior, rng)
        self.state.words, self.state.docs, self.state.z = words, docs, z
        self.state.phi_counts[0] = pc
        self.state.m[0] = m1

    def close(self) -> None:
        self.shards.close()

    def _next_rng(self, it_rng: Rng) -> Rng:
        rng = it_rng.spawn(self._stream)
        self._stream += 1
        return rng

    def prior_weights(self, t: int) -> np.ndarray:
        """Gamma shapes of theta^(t) under the current network and state."""
        theta_next = self.state.theta[t] if t < self.depth else None
        return self.network.prior_weights(t, theta_next, self.J)

    # Sharded per-document steps

    def _split(self, t: int, rng: Rng) -> Tuple[np.ndarray, np.ndarray]:
        x_layer = self.state.x[t - 1]
        phi, theta = self.network.phi[t - 1], self.state.theta[t - 1]

        def block(lo: int, hi: int, block_rng: Rng):
            return split_counts(_columns(x_layer, lo, hi), phi, theta[:, lo:hi], block_rng)

        parts = self.shards.map(block, rng)
        phi_counts = np.sum([pc for pc, _ in parts], axis=0).astype(np.int64)
        m = np.concatenate([m for _, m in parts], axis=1)
        return phi_counts, m

    def _uppass(self, t: int, rng: Rng) -> np.ndarray:
        m = self.state.m[t - 1]
        if t == self.depth:
            r = self.network.r
            return self.shards.map_columns(lambda lo, hi, b: crt_uppass(m[:, lo:hi], None, None, b, r=r), rng)
        phi_next, theta_next = self.network.phi[t], self.state.theta[t]
        return self.shards.map_columns(
            lambda lo, hi, b: crt_uppass(m[:, lo:hi], phi_next, theta_next[:, lo:hi], b), rng
        )

    def _theta(self, t: int, rng: Rng) -> np.ndarray:
        shape = self.prior_weights(t)
        m = self.state.m[t - 1]
        c_next, p_t = self.state.c[t + 1], self.state.p[t]
        return self.shards.map_columns(
            lambda lo, hi, b: sample_theta(shape[:, lo:hi], m[:, lo:hi], c_next[lo:hi], p_t[lo:hi], b), rng
        )

    def _scalars(self, rng: Rng) -> Tuple[np.ndarray, np.ndarray]:
        h = self.hyper
        m1_totals = self.state.m[0].sum(axis=0)
        theta_totals = [th.sum(axis=0) for th in self.state.theta[1:]]
        theta_totals.append(np.full(self.J, float(self.network.r.sum())))

        def block(lo: int, hi: int, b: Rng):
            return sample_pj_cj(m1_totals[lo:hi], [tt[lo:hi] for tt in theta_totals], h.a0, h.b0, h.e0, h.f0, b)

        parts = self.shards.map(block, rng)
        return np.concatenate([c for c, _ in parts], axis=1), np.concatenate([p for _, p in parts], axis=1)

    # One iteration

    def iteration(self) -> IterationReport:
        start = time.perf_counter()
        T = self.depth
        st, net, h = self.state, self.network, self.hyper
        it_rng = self.rng.spawn(self.iteration_count)
        self._stream = 0

        prior1 = self.prior_weights(1)
        if self.collapsed:
            st.z, st.phi_counts[0], st.m[0] = sample_token_topics(
                st.words, st.docs, st.z, st.phi_counts[0], st.m[0], prior1, h.eta_for(1), self._next_rng(it_rng)
            )
        else:
            st.phi_counts[0], st.m[0] = self._split(1, self._next_rng(it_rng))
        if self.update_globals:
            net.phi[0] = sample_phi(st.phi_counts[0], h.eta_for(1), self._next_rng(it_rng))
        st.x[1] = self._uppass(1, self._next_rng(it_rng))

        for t in range(2, T + 1):
            st.phi_counts[t - 1], st.m[t - 1] = self._split(t, self._next_rng(it_rng))
            if self.update_globals:
                net.phi[t - 1] = sample_phi(st.phi_counts[t - 1], h.eta_for(t), self._next_rng(it_rng))
            st.x[t] = self._uppass(t, self._next_rng(it_rng))

        st.c, st.p = self._scalars(self._next_rng(it_rng))

        if self.update_globals:
            x_top = st.x[T]
            net.gamma0, net.c0 = sample_gamma0_c0(
                net.r, x_top.sum(axis=1), st.p[T + 1], net.gamma0, h.a0, h.b0, h.e0, h.f0, self._next_rng(it_rng)
            )
            net.r = sample_r(x_top, net.gamma0, net.c0, st.p[T + 1], self._next_rng(it_rng))

        lowest = 2 if self.collapsed else 1
        for t in range(T, lowest - 1, -1):
            st.theta[t - 1] = self._theta(t, self._next_rng(it_rng))

        self.iteration_count += 1
        return IterationReport(
            iteration=self.iteration_count,
            depth=T,
            widths=net.widths,
            layer_totals=st.layer_totals(),
            loglik=self.loglik(),
            seconds=time.perf_counter() - start,
        )

    # Reporting and structure changes

    def theta1_mean(self) -> np.ndarray:
        """E[theta^(1) | rest] = (prior + m^(1)(2)) / (c^(2) - ln(1 - p^(1)))."""
        rate = self.state.c[2] - np.log1p(-self.state.p[1])
        return (self.prior_weights(1) + self.state.m[0]) / rate[None, :]

    def loglik(self) -> float:
        """Poisson log-likelihood of x^(1) at Phi^(1) times the conditional mean of theta^(1)."""
        theta = self.theta1_mean()
        csc = self.counts.matrix
        if csc.nnz == 0:
            return -float(theta.sum())
        cols = np.repeat(np.arange(self.J), np.diff(csc.indptr))
        rate = np.einsum("ik,ki->i", self.network.phi[0][csc.indices], theta[:, cols])
        x = csc.data.astype(float)
        return float(np.sum(x * np.log(rate)) - theta.sum() - np.sum(gammaln(x + 1.0)))

    def materialize_theta1(self, rng: Rng) -> np.ndarray:
        """Draw theta^(1) from its conditional; under the blocked sampler it is already current."""
        if not self.collapsed:
            return self.state.theta[0]
        self.state.theta[0] = self._theta(1, rng)
        return self.state.theta[0]

    def top_usage(self) -> np.ndarray:
        """x^(T)_{..k} for every factor k of the top layer."""
        m_top = self.state.m[self.depth - 1]
        if m_top is None:
            return np.zeros(self.network.widths[-1], dtype=np.int64)
        return m_top.sum(axis=1)

    def resample_r(self, rng: Rng) -> None:
        """Redraw r given the current top-layer counts."""
        T = self.depth
        self.network.r = sample_r(self.state.x[T], self.network.gamma0, self.network.c0, self.state.p[T + 1], rng)

    def add_layer(self, phi_top: np.ndarray, r_top: np.ndarray) -> None:
        """Grow the chain by one layer; the new theta starts at all ones and c^(T+2) at 1."""
        T, J = self.depth, self.J
        self.network = self.network.with_top_layer(phi_top, r_top)
        st = self.state
        st.theta.append(np.ones((self.network.widths[-1], J)))
        st.x.append(None)
        st.m.append(None)
        st.phi_counts.append(None)
        c, p = LatentState.empty_scalars(T + 1, J)
        c[: T + 2], p[: T + 2] = st.c, st.p
        c[T + 2] = 1.0
        p[T + 2] = propagate_p(p[T + 1], c[T + 2])
        st.c, st.p = c, p

    def replace_counts(self, counts: CountMatrix, rng: Optional[Rng] = None) -> None:
        """
        Swap in new observed counts of the same shape.

        Under the collapsed sampler the token topics of the new counts are drawn
        from their conditional given the current Phi^(1) and theta^(1), so
        theta^(1) must be current (see `materialize_theta1`) and `rng` is required.
        """
        if counts.shape != self.counts.shape:
            raise DimensionError(f"expected counts of shape {self.counts.shape}, got {counts.shape}")
        if self.collapsed and rng is None:
            raise InvalidParameterError("redrawing token topics for new counts needs an rng")
        self.counts = counts
        self.state.x[0] = counts
        if self.collapsed:
            words, docs, z, pc, m1 = init_token_topics(counts, self.network.phi[0], self.state.theta[0], rng)
            self.state.words, self.state.docs, self.state.z = words, docs, z
            self.state.phi_counts[0] = pc
            self.state.m[0] = m1

"""
Greedy layer-wise training with width inference.

Depth T = 1 starts from K_1max factors.  Every later depth puts a new layer
of width K_{T-1} (the inferred width below it) on top of the chain, retrains
all layers jointly, and prunes the new layer's unused factors once, after
its burn-in.
"""
import logging
from dataclasses import dataclass, field
from typing import Callable, List, Optional, Tuple

import numpy as np
from tqdm import tqdm

from errors import StructureError
from inference.gibbs import GibbsSampler, IterationReport
from ingestion.corpus import CountMatrix
from model.network import LatentState, Network, normalize_columns
from model.params import Hyperparams, TrainSchedule
from sampling.count_dist import sample_dirichlet_columns, sample_gamma
from sampling.rng import Rng

logger = logging.getLogger(__name__)


@dataclass
class TrainedStack:
    """Networks of depth 1..T_max from one layer-wise run, with their iteration reports."""
    networks: List[Network] = field(default_factory=list)
    reports: List[List[IterationReport]] = field(default_factory=list)
    final_state: Optional[LatentState] = None

    @property
    def widths(self) -> List[Tuple[int, ...]]:
        return [n.widths for n in self.networks]


def depth_criterion(state: LatentState) -> List[int]:
    """Sum_j x^(t)_{.j} for t = 1..T+1; non-increasing in t."""
    return state.layer_totals()


def prune(network: Network, state: LatentState,
          usage_history: Optional[np.ndarray] = None) -> Tuple[Network, LatentState]:
    """
    Remove the top-layer factors whose count x^(T)_{..k} is zero.

    When every factor is unused, the one with the largest `usage_history`
    (accumulated counts over earlier iterations) is kept.

    Returns:
        (network, state): a new network, and `state` updated in place
    """
    T = network.depth
    K = network.widths[-1]
    m_top = state.m[T - 1]
    usage = m_top.sum(axis=1) if m_top is not None else np.zeros(K, dtype=np.int64)
    keep = np.flatnonzero(usage > 0)
    if keep.size == 0:
        history = usage_history if usage_history is not None else np.zeros(K)
        keep = np.array([int(np.argmax(history))])
        logger.warning(f"Every factor of layer {T} is unused; keeping factor {keep[0]} with the largest past count")
    if keep.size == K:
        return network, state

    pruned = Network(
        phi=network.phi[:-1] + [network.phi[-1][:, keep]],
        r=network.r[keep],
        gamma0=network.gamma0,
        c0=network.c0,
        metadata=dict(network.metadata),
    )
    state.theta[T - 1] = state.theta[T - 1][keep]
    if m_top is not None:
        state.m[T - 1] = m_top[keep]
        state.phi_counts[T - 1] = state.phi_counts[T - 1][:, keep]
    if state.x[T] is not None:
        state.x[T] = state.x[T][keep]
    if T == 1 and state.z is not None:
        remap = np.full(K, -1, dtype=np.int64)
        remap[keep] = np.arange(keep.size)
        state.z = remap[state.z]
        if np.any(state.z < 0):
            raise StructureError("pruned a layer-1 topic that still owns tokens")
    logger.info(f"Pruned layer {T} from {K} to {keep.size} factors")
    return pruned, state


def _initial_layer(rows: int, width: int, eta: float, gamma0: float, c0: float,
                   rng: Rng) -> Tuple[np.ndarray, np.ndarray]:
    """Phi columns ~ Dir(eta, ..., eta) and r_k ~ Gam(gamma0 / K, 1 / c0)."""
    phi = sample_dirichlet_columns(np.full((rows, width), eta), rng)
    r = sample_gamma(np.full(width, gamma0 / width), 1.0 / c0, rng)
    return phi, r


def _layer_medians(state: LatentState) -> List[float]:
    return [float(np.median(state.c[t])) if state.J else 1.0 for t in range(2, state.depth + 2)]


def _layer_usage(state: LatentState) -> List[List[int]]:
    return [m.sum(axis=1).astype(int).tolist() for m in state.m if m is not None]


class LayerwiseTrainer:
    """Runs the depth-by-depth schedule on one Gibbs chain."""

    def __init__(self, corpus: CountMatrix, hyper: Hyperparams, schedule: TrainSchedule, rng: Rng,
                 verbose: bool = False, on_network: Optional[Callable[[Network], None]] = None):
        if corpus.V == 0 or corpus.J == 0:
            raise StructureError(f"cannot train on an empty {corpus.V}x{corpus.J} corpus")
        self.corpus = corpus
        self.hyper = hyper
        self.schedule = schedule
        self.init_rng = rng.spawn(0)
        self.chain_rng = rng.spawn(1)
        self.verbose = verbose
        self.on_network = on_network
        self.sampler: Optional[GibbsSampler] = None

    def _start(self) -> None:
        h = self.hyper
        phi, r = _initial_layer(self.corpus.V, self.schedule.k1_max, h.eta_for(1), h.gamma0, h.c0, self.init_rng)
        network = Network(phi=[phi], r=r, gamma0=h.gamma0, c0=h.c0)
        self.sampler = GibbsSampler(
            network, self.corpus, h, self.chain_rng,
            layer1_sampler=self.schedule.layer1_sampler, workers=self.schedule.workers,
        )

    def _grow(self, T: int) -> None:
        net = self.sampler.network
        width = net.widths[-1]
        phi, r = _initial_layer(width, width, self.hyper.eta_for(T), net.gamma0, net.c0, self.init_rng)
        self.sampler.add_layer(phi, r)
        logger.info(f"Added layer {T} with K_{T}max={width}")

    def _train_depth(self, T: int) -> Tuple[Network, List[IterationReport]]:
        sampler = self.sampler
        burn, collect = self.schedule.burn_for(T), self.schedule.collect_for(T)
        history = np.zeros(sampler.network.widths[-1])
        phi_sum: Optional[List[np.ndarray]] = None
        r_sum: Optional[np.ndarray] = None
        reports: List[IterationReport] = []

        steps = range(1, burn + collect + 1)
        for i in tqdm(steps, desc=f"depth {T}", disable=not self.verbose):
            report = sampler.iteration()
            report.iteration = i
            reports.append(report)
            if i == 1 or i % self.schedule.log_every == 0 or i == burn + collect:
                logger.info(report.progress_line())
            if i <= burn:
                history += sampler.top_usage()
            if i == burn:
                sampler.network, sampler.state = prune(sampler.network, sampler.state, history)
                sampler.resample_r(self.init_rng)
            elif i > burn and self.schedule.network_output == "mean":
                if phi_sum is None:
                    phi_sum = [np.zeros_like(p) for p in sampler.network.phi]
                    r_sum = np.zeros_like(sampler.network.r)
                for acc, p in zip(phi_sum, sampler.network.phi):
                    acc += p
                r_sum += sampler.network.r

        network = sampler.network.copy()
        output = "last"
        if phi_sum is not None:
            network = Network(
                phi=[normalize_columns(p / collect) for p in phi_sum],
                r=r_sum / collect,
                gamma0=network.gamma0,
                c0=network.c0,
            )
            output = "mean"
        elif self.schedule.network_output == "mean":
            logger.warning(f"No collection iterations at depth {T}; exporting the last sample")
        network.metadata = {
            "depth": T,
            "output": output,
            "burn": burn,
            "collect": collect,
            "hyperparams": self.hyper.model_dump(),
            "layer1_sampler": sampler.layer1_sampler,
            "c_median": _layer_medians(sampler.state),
            "usage": _layer_usage(sampler.state),
            "layer_totals": depth_criterion(sampler.state),
        }
        return network, reports

    def run(self) -> TrainedStack:
        stack = TrainedStack()
        self._start()
        try:
            for T in range(1, self.schedule.t_max + 1):
                if T > 1:
                    self._grow(T)
                network, reports = self._train_depth(T)
                stack.networks.append(network)
                stack.reports.append(reports)
                logger.info(f"Finished depth {T}: widths {network.widths}")
                if self.on_network is not None:
                    self.on_network(network)
        finally:
            self.sampler.close()
        stack.final_state = self.sampler.state
        return stack


def train_layerwise(corpus: CountMatrix, hyper: Hyperparams, schedule: TrainSchedule, rng: Rng,
                    verbose: bool = False, on_network: Optional[Callable[[Network], None]] = None) -> TrainedStack:
    """
    Train networks of depth 1..T_max, each on top of the previous one.

    Args:
        corpus: V x J training counts
        hyper: hyperparameters (eta per layer, a0, b0, e0, f0, initial gamma0 and c0)
        schedule: B_T, C_T, K_1max, T_max, sampler options
        rng: root stream; the same seed and schedule give the same stack
        verbose: show a progress bar per depth
        on_network: called with every finished network, e.g. to checkpoint it

    Returns:
        TrainedStack with one network per depth
    """
    return LayerwiseTrainer(corpus, hyper, schedule, rng, verbose=verbose, on_network=on_network).run()

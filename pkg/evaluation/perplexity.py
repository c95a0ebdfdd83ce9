"""
Per-heldout-word perplexity.

With S collected samples, document j predicts term v with

    p_vj = sum_s (Phi^(1,s) theta^(1,s))_vj / sum_s theta^(1,s)_{.j}

(columns of Phi sum to one, so the denominator is the total rate of the
document), and perplexity = exp(-sum_vj y_vj ln p_vj / N_heldout).
"""
import logging
from dataclasses import dataclass, field
from typing import Optional

import numpy as np

from errors import DimensionError, InvalidParameterError
from inference.gibbs import GibbsSampler
from ingestion.corpus import CountMatrix, HeldoutMask
from model.network import Network
from model.params import Hyperparams
from sampling.rng import Rng

logger = logging.getLogger(__name__)

PROB_FLOOR = 1e-300


@dataclass
class PerplexityReport:
    """Perplexity of a heldout set together with the per-document log-likelihoods behind it."""
    perplexity: float
    samples_used: int
    doc_loglik: np.ndarray
    heldout_tokens: int
    floored: int = 0
    config: dict = field(default_factory=dict)

    def as_dict(self) -> dict:
        return {
            "perplexity": float(self.perplexity),
            "samples_used": int(self.samples_used),
            "heldout_tokens": int(self.heldout_tokens),
            "floored": int(self.floored),
            "doc_loglik": [float(v) for v in self.doc_loglik],
        }


def hyper_for(network: Network) -> Hyperparams:
    """Hyperparameters recorded with a trained network, or the defaults."""
    recorded = network.metadata.get("hyperparams") if network.metadata else None
    return Hyperparams.from_mapping(recorded) if recorded else Hyperparams()


def _heldout_entries(heldout: CountMatrix):
    csc = heldout.matrix
    cols = np.repeat(np.arange(heldout.J), np.diff(csc.indptr))
    return csc.indices.astype(np.int64), cols, csc.data.astype(float)


def _report(heldout: CountMatrix, probs: np.ndarray, samples: int) -> PerplexityReport:
    rows, cols, y = _heldout_entries(heldout)
    if y.size == 0:
        raise InvalidParameterError("the heldout set holds no tokens")
    low = probs < PROB_FLOOR
    floored = int(np.count_nonzero(low))
    if floored:
        logger.warning(f"{floored} heldout entries had predictive probability below {PROB_FLOOR}; floored")
        probs = np.where(low, PROB_FLOOR, probs)
    terms = y * np.log(probs)
    doc_loglik = np.bincount(cols, weights=terms, minlength=heldout.J)
    n_tokens = int(y.sum())
    perplexity = float(np.exp(-terms.sum() / n_tokens))
    return PerplexityReport(
        perplexity=perplexity, samples_used=samples, doc_loglik=doc_loglik, heldout_tokens=n_tokens, floored=floored
    )


def perplexity_from_predictive(heldout: CountMatrix, predictive: np.ndarray, samples: int = 1) -> PerplexityReport:
    """Perplexity of `heldout` under a V x J matrix of per-document term probabilities."""
    predictive = np.asarray(predictive, dtype=float)
    if predictive.shape != heldout.shape:
        raise DimensionError(f"predictive {predictive.shape} does not match heldout {heldout.shape}")
    rows, cols, _ = _heldout_entries(heldout)
    return _report(heldout, predictive[rows, cols], samples)


class PredictiveAccumulator:
    """Running sums of Phi theta at the heldout entries and of theta totals."""

    def __init__(self, heldout: CountMatrix):
        self.heldout = heldout
        self.rows, self.cols, _ = _heldout_entries(heldout)
        self.numerator = np.zeros(self.rows.size)
        self.denominator = np.zeros(heldout.J)
        self.samples = 0

    def add(self, phi1: np.ndarray, theta1: np.ndarray) -> None:
        self.numerator += np.einsum("ik,ki->i", phi1[self.rows], theta1[:, self.cols])
        self.denominator += theta1.sum(axis=0)
        self.samples += 1

    def report(self) -> PerplexityReport:
        if self.samples == 0:
            raise InvalidParameterError("no samples were collected; increase collect or lower thin")
        return _report(self.heldout, self.numerator / self.denominator[self.cols], self.samples)


def heldout_perplexity(
    network: Network,
    mask: HeldoutMask,
    burnin: int,
    collect: int,
    thin: int,
    rng: Rng,
    hyper: Optional[Hyperparams] = None,
    frozen_phi: bool = False,
    layer1_sampler: str = "collapsed",
    workers: int = 1,
) -> PerplexityReport:
    """
    Run a chain on the training part of `mask` and score its heldout part.

    Args:
        network: trained network the chain starts from
        mask: token-level train/heldout split of the evaluation corpus
        burnin: iterations before collection starts
        collect: iterations after burn-in; one sample every `thin` of them
        thin: collection interval
        frozen_phi: keep Phi and r at the trained values and resample only
            per-document latents; by default both are resampled
    """
    if burnin < 0 or collect < 1 or thin < 1:
        raise InvalidParameterError(f"need burnin >= 0, collect >= 1, thin >= 1; got {burnin}, {collect}, {thin}")
    if mask.heldout.total() == 0:
        raise InvalidParameterError("the heldout set holds no tokens")
    hyper = hyper or hyper_for(network)
    sampler = GibbsSampler(
        network, mask.train, hyper, rng.spawn(0),
        layer1_sampler=layer1_sampler, workers=workers, update_globals=not frozen_phi,
    )
    draws = rng.spawn(1)
    acc = PredictiveAccumulator(mask.heldout)
    try:
        for i in range(1, burnin + collect + 1):
            sampler.iteration()
            if i > burnin and (i - burnin) % thin == 0:
                theta1 = sampler.materialize_theta1(draws.spawn(i))
                acc.add(sampler.network.phi[0], theta1)
    finally:
        sampler.close()
    report = acc.report()
    logger.info(
        f"Perplexity {report.perplexity:.4f} over {report.heldout_tokens} heldout tokens "
        f"from {report.samples_used} samples"
    )
    return report

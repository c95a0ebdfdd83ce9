"""
Document features: posterior mean of theta^(1)_j / theta^(1)_{.j} under a fixed network.
"""
import logging
from pathlib import Path
from typing import Any, Dict, Optional, Sequence

import numpy as np

from errors import InvalidParameterError
from evaluation.perplexity import hyper_for
from inference.gibbs import GibbsSampler
from ingestion.corpus import CountMatrix
from model.network import Network, PosteriorSummary
from model.params import Hyperparams
from sampling.rng import Rng

logger = logging.getLogger(__name__)


def extract_features(
    network: Network,
    docs: CountMatrix,
    burnin: int,
    collect: int,
    rng: Rng,
    hyper: Optional[Hyperparams] = None,
    workers: int = 1,
) -> PosteriorSummary:
    """
    Average theta^(1) and its normalised form over `collect` samples taken
    after `burnin` iterations; Phi, r, gamma0 and c0 stay fixed.

    Documents without tokens get the uniform vector 1/K_1 and are flagged
    in `empty_docs`.
    """
    if burnin < 0 or collect < 1:
        raise InvalidParameterError(f"need burnin >= 0 and collect >= 1, got {burnin} and {collect}")
    hyper = hyper or hyper_for(network)
    K1 = network.widths[1]
    sampler = GibbsSampler(network, docs, hyper, rng, layer1_sampler="blocked", workers=workers, update_globals=False)
    theta_sum = np.zeros((K1, docs.J))
    props_sum = np.zeros((K1, docs.J))
    try:
        for i in range(1, burnin + collect + 1):
            sampler.iteration()
            if i > burnin:
                theta1 = sampler.state.theta[0]
                theta_sum += theta1
                props_sum += theta1 / theta1.sum(axis=0, keepdims=True)
    finally:
        sampler.close()

    props = props_sum / collect
    empty = docs.doc_totals() == 0
    if np.any(empty):
        logger.warning(f"{int(empty.sum())} documents have no tokens; giving them uniform features")
        props[:, empty] = 1.0 / K1
    props = props / props.sum(axis=0, keepdims=True)
    return PosteriorSummary(
        theta1_mean=theta_sum / collect,
        feature_props=props,
        phi_mean=[p.copy() for p in network.phi],
        sample_count=collect,
        empty_docs=empty,
    )


def _echo_header(config_echo: Optional[Dict[str, Any]]) -> str:
    lines = [f"{key}={value}" for key, value in (config_echo or {}).items()]
    return "\n".join(lines)


def save_features(path: str, summary: PosteriorSummary, doc_ids: Optional[Sequence[int]] = None,
                  config_echo: Optional[Dict[str, Any]] = None, delimiter: str = ",") -> None:
    """Write one `doc_id,f1..fK` row per document under a `#` configuration header."""
    props = summary.feature_props
    K, J = props.shape
    ids = np.arange(J) if doc_ids is None else np.asarray(doc_ids)
    table = np.column_stack([ids, props.T])
    columns = delimiter.join(["doc_id"] + [f"f{k + 1}" for k in range(K)])
    header = "\n".join(h for h in (_echo_header(config_echo), columns) if h)
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    np.savetxt(path, table, delimiter=delimiter, header=header, fmt=["%d"] + ["%.17g"] * K)
    logger.info(f"Saved {J}x{K} feature matrix to {path}")


def load_features(path: str, delimiter: str = ",") -> np.ndarray:
    """Feature rows written by `save_features`, without the id column (J x K)."""
    table = np.loadtxt(path, delimiter=delimiter, ndmin=2)
    return table[:, 1:]

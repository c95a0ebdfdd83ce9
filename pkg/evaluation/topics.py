"""
Topic inspection: projecting factors of any layer to the vocabulary,
ranking them by usage, and generating synthetic documents.
"""
import logging
from dataclasses import dataclass
from pathlib import Path
from typing import Any, Dict, List, Optional, Sequence

import numpy as np

from errors import InvalidParameterError
from ingestion.corpus import Vocabulary
from model.generative import broadcast_c_schedule, sample_hidden_units, scalars_from_c
from model.network import Network
from sampling.rng import Rng

logger = logging.getLogger(__name__)


def _check_layer(network: Network, t: int) -> None:
    if not 1 <= t <= network.depth:
        raise InvalidParameterError(f"layer must lie in 1..{network.depth}, got {t}")


def project_layer(network: Network, t: int) -> np.ndarray:
    """Phi^(1) ... Phi^(t): every factor of layer t as a column over the vocabulary (V x K_t)."""
    _check_layer(network, t)
    out = network.phi[t - 1]
    for layer in range(t - 1, 0, -1):
        out = network.phi[layer - 1] @ out
    return out


def project_topic(network: Network, t: int, k: int) -> np.ndarray:
    """
    Word distribution of factor k (0-based) of layer t (1-based).

    Returns:
        V-dimensional probability vector
    """
    _check_layer(network, t)
    K = network.widths[t]
    if not 0 <= k < K:
        raise InvalidParameterError(f"factor must lie in 0..{K - 1} for layer {t}, got {k}")
    vec = network.phi[t - 1][:, k]
    for layer in range(t - 1, 0, -1):
        vec = network.phi[layer - 1] @ vec
    return vec


def rank_terms(weights: np.ndarray, top: Optional[int] = None) -> np.ndarray:
    """Term indices by decreasing weight; ties go to the lower index."""
    weights = np.asarray(weights, dtype=float)
    order = np.lexsort((np.arange(weights.size), -weights))
    return order if top is None else order[:top]


def topic_usage(network: Network, t: int) -> np.ndarray:
    """
    Popularity of each factor of layer t: the recorded latent count x^(t)_{..k}
    when training stored it, otherwise the prior mass Phi^(t+1) ... Phi^(T) r.
    """
    _check_layer(network, t)
    usage = (network.metadata or {}).get("usage")
    if usage and len(usage) >= t and len(usage[t - 1]) == network.widths[t]:
        return np.asarray(usage[t - 1], dtype=float)
    mass = network.r
    for layer in range(network.depth, t, -1):
        mass = network.phi[layer - 1] @ mass
    return mass


@dataclass
class TopicSummary:
    rank: int
    layer: int
    factor: int
    usage: float
    terms: List[str]

    def line(self) -> str:
        return f"{self.rank} {self.layer} {self.factor} {' '.join(self.terms)}"


def ranked_topics(network: Network, t: int, vocab: Optional[Vocabulary] = None, top_words: int = 5,
                  limit: Optional[int] = None) -> List[TopicSummary]:
    """Factors of layer t in decreasing usage, each with its top projected terms."""
    projected = project_layer(network, t)
    usage = topic_usage(network, t)
    order = rank_terms(usage, limit)
    out = []
    for rank, k in enumerate(order, start=1):
        ids = rank_terms(projected[:, k], top_words)
        terms = [vocab[i] for i in ids] if vocab is not None else [str(i) for i in ids]
        out.append(TopicSummary(rank=rank, layer=t, factor=int(k), usage=float(usage[k]), terms=terms))
    return out


def _header_lines(config_echo: Optional[Dict[str, Any]]) -> List[str]:
    return [f"# {key}={value}" for key, value in (config_echo or {}).items()]


def save_topics(path: str, network: Network, vocab: Optional[Vocabulary] = None, top_words: int = 5,
                config_echo: Optional[Dict[str, Any]] = None) -> List[TopicSummary]:
    """Write `rank layer factor top-words` lines for every layer."""
    lines = _header_lines(config_echo) + ["# rank layer factor top-words"]
    topics: List[TopicSummary] = []
    for t in range(1, network.depth + 1):
        layer_topics = ranked_topics(network, t, vocab, top_words)
        topics.extend(layer_topics)
        lines.extend(s.line() for s in layer_topics)
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    path.write_text("\n".join(lines) + "\n", encoding="utf-8")
    logger.info(f"Saved {len(topics)} topics over {network.depth} layers to {path}")
    return topics


@dataclass
class GeneratedDocument:
    rates: np.ndarray
    top_terms: np.ndarray
    counts: Optional[np.ndarray] = None


def default_c_schedule(network: Network) -> List[float]:
    """Per-layer medians of c^(t) recorded at training time, or all ones."""
    medians = (network.metadata or {}).get("c_median")
    if medians and len(medians) == network.depth:
        return [float(c) for c in medians]
    logger.warning("Network carries no c medians; generating with c^(t) = 1")
    return [1.0] * network.depth


def generate_documents(network: Network, c_sched: Optional[Sequence[float]], n_docs: int, top_m: int, rng: Rng,
                       sample_counts: bool = True) -> List[GeneratedDocument]:
    """
    Draw theta^(T) ~ Gam(r, 1/c^(T+1)), pass it down the network, and rank the
    terms of each document by its rate Phi^(1) theta^(1).
    """
    if n_docs < 0 or top_m < 1:
        raise InvalidParameterError(f"need n_docs >= 0 and top_m >= 1, got {n_docs} and {top_m}")
    if c_sched is None:
        c_sched = default_c_schedule(network)
    c, _ = scalars_from_c(broadcast_c_schedule(c_sched, network.depth, n_docs))
    theta = sample_hidden_units(network, c, rng)
    rates = network.phi[0] @ theta[0]
    counts = rng.generator.poisson(rates) if sample_counts else None
    docs = []
    for j in range(n_docs):
        docs.append(GeneratedDocument(
            rates=rates[:, j],
            top_terms=rank_terms(rates[:, j], min(top_m, network.V)),
            counts=counts[:, j] if counts is not None else None,
        ))
    return docs


def save_documents(path: str, docs: List[GeneratedDocument], vocab: Optional[Vocabulary] = None,
                   config_echo: Optional[Dict[str, Any]] = None) -> None:
    """One line per document: its index followed by its top-ranked terms."""
    lines = _header_lines(config_echo) + ["# doc top-terms"]
    for j, doc in enumerate(docs):
        words = [vocab[i] for i in doc.top_terms] if vocab is not None else [str(i) for i in doc.top_terms]
        lines.append(f"{j} {' '.join(words)}")
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    path.write_text("\n".join(lines) + "\n", encoding="utf-8")
    logger.info(f"Saved {len(docs)} generated documents to {path}")

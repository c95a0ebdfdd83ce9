"""
Vocabulary filtering and token-level heldout masking.
"""
import logging
from typing import Iterable, Optional, Tuple

import numpy as np
from scipy import sparse

from errors import DimensionError, InvalidParameterError
from ingestion.corpus import CountMatrix, HeldoutMask, Vocabulary
from sampling.rng import Rng

logger = logging.getLogger(__name__)


class CorpusFilter:
    """Vocabulary reduction strategies; surviving counts are never altered."""

    @staticmethod
    def filter_vocab(
        matrix: CountMatrix,
        vocab: Vocabulary,
        stoplist: Iterable[str] = (),
        min_count: int = 0,
    ) -> Tuple[Vocabulary, CountMatrix]:
        """
        Drop stopwords and rare terms, then reindex.

        Args:
            matrix: V x J counts
            vocab: Vocabulary of size V
            stoplist: Terms to remove
            min_count: Minimum corpus frequency a term needs to survive

        Returns:
            (reduced vocabulary, reduced matrix); documents that become empty
            are kept as all-zero columns
        """
        if vocab.size != matrix.V:
            raise DimensionError(f"vocabulary has {vocab.size} terms but matrix has V={matrix.V}")
        if min_count < 0:
            raise InvalidParameterError(f"min_count must be >= 0, got {min_count}")
        stop = set(stoplist)
        totals = matrix.term_totals()
        keep = [v for v, term in enumerate(vocab.terms) if term not in stop and totals[v] >= min_count]
        logger.info(f"filter_vocab: kept {len(keep)} of {vocab.size} terms (min_count={min_count}, stoplist={len(stop)})")
        return vocab.subset(keep), matrix.select_terms(keep)

    @staticmethod
    def top_terms(
        matrix: CountMatrix,
        vocab: Optional[Vocabulary],
        n: int,
    ) -> Tuple[Optional[Vocabulary], CountMatrix]:
        """Keep the `n` most frequent terms (ties by ascending index), original order preserved."""
        if n <= 0 or n >= matrix.V:
            return vocab, matrix
        totals = matrix.term_totals()
        order = np.lexsort((np.arange(matrix.V), -totals))
        keep = np.sort(order[:n])
        logger.info(f"top_terms: kept the {n} most frequent of {matrix.V} terms")
        return (vocab.subset(keep.tolist()) if vocab is not None else None), matrix.select_terms(keep)

    @staticmethod
    def split_size(total: int, fraction: float) -> int:
        """Round-half-up of fraction * total."""
        return int(np.floor(fraction * total + 0.5))

    @classmethod
    def mask_tokens(cls, matrix: CountMatrix, fraction: float, rng: Rng) -> HeldoutMask:
        """
        Move exactly round(fraction * x_.j) tokens of every document into the
        training part, uniformly without replacement; the rest is heldout.
        """
        if not 0 < fraction < 1:
            raise InvalidParameterError(f"fraction must lie in (0, 1), got {fraction}")
        csc = matrix.matrix
        train_data = np.zeros_like(csc.data)
        for j in range(matrix.J):
            start, stop = csc.indptr[j], csc.indptr[j + 1]
            counts = csc.data[start:stop]
            n_train = cls.split_size(int(counts.sum()), fraction)
            if n_train == 0:
                continue
            train_data[start:stop] = rng.generator.multivariate_hypergeometric(counts, n_train)
        train = CountMatrix(sparse.csc_matrix((train_data, csc.indices, csc.indptr), shape=csc.shape))
        heldout = CountMatrix(sparse.csc_matrix((csc.data - train_data, csc.indices, csc.indptr), shape=csc.shape))
        logger.info(f"mask_tokens: train={train.total()} heldout={heldout.total()} fraction={fraction}")
        return HeldoutMask(train=train, heldout=heldout, fraction=fraction)


def filter_vocab(matrix: CountMatrix, vocab: Vocabulary, stoplist: Iterable[str] = (),
                 min_count: int = 0) -> Tuple[Vocabulary, CountMatrix]:
    return CorpusFilter.filter_vocab(matrix, vocab, stoplist, min_count)


def top_terms(matrix: CountMatrix, vocab: Optional[Vocabulary], n: int):
    return CorpusFilter.top_terms(matrix, vocab, n)


def mask_tokens(matrix: CountMatrix, fraction: float, rng: Rng) -> HeldoutMask:
    return CorpusFilter.mask_tokens(matrix, fraction, rng)

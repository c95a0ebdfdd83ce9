import numpy as np
import pytest

from ingestion.corpus import CountMatrix
from model.network import Network
from model.params import Hyperparams
from sampling.rng import Rng


def random_network(widths, seed=0, eta=0.5):
    """Network with Dirichlet columns and gamma r for the given (V, K_1, ..., K_T)."""
    gen = np.random.default_rng(seed)
    phi = [gen.dirichlet(np.full(widths[t - 1], eta), size=widths[t]).T for t in range(1, len(widths))]
    r = gen.gamma(1.0, 1.0, size=widths[-1]) + 0.1
    return Network(phi=phi, r=r)


def block_corpus(n_topics=4, words_per_topic=10, docs=40, tokens=60, seed=0):
    """Documents that each draw their tokens from one disjoint block of terms."""
    gen = np.random.default_rng(seed)
    V = n_topics * words_per_topic
    dense = np.zeros((V, docs), dtype=np.int64)
    labels = np.arange(docs) % n_topics
    for j, k in enumerate(labels):
        block = np.arange(k * words_per_topic, (k + 1) * words_per_topic)
        dense[:, j] = np.bincount(gen.choice(block, size=tokens), minlength=V)
    return CountMatrix.from_dense(dense), labels


@pytest.fixture
def rng():
    return Rng(20150101)


@pytest.fixture
def toy_corpus():
    gen = np.random.default_rng(7)
    dense = gen.poisson(0.8, size=(50, 20))
    dense[np.arange(20) % 50, np.arange(20)] += 1
    return CountMatrix.from_dense(dense)


@pytest.fixture
def hyper():
    return Hyperparams(eta=0.1, a0=0.01, b0=0.01, e0=1.0, f0=1.0, k1_max=8, t_max=2, b_iters=[10], c_iters=[5])

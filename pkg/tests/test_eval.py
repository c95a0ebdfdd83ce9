import math

import numpy as np
import pytest

from conftest import block_corpus, random_network
from errors import InvalidParameterError
from evaluation import (
    extract_features,
    generate_documents,
    heldout_perplexity,
    load_features,
    perplexity_from_predictive,
    project_layer,
    project_topic,
    ranked_topics,
    save_features,
    save_topics,
)
from evaluation.perplexity import PredictiveAccumulator
from evaluation.topics import rank_terms, topic_usage
from ingestion.corpus import CountMatrix
from ingestion.preprocessing import mask_tokens
from model.generative import generate
from model.network import Network
from model.params import Hyperparams
from sampling.rng import Rng
from structure import train_layerwise


def test_uniform_predictive_gives_vocabulary_size(toy_corpus):
    predictive = np.full(toy_corpus.shape, 1.0 / toy_corpus.V)
    report = perplexity_from_predictive(toy_corpus, predictive)
    assert report.perplexity == pytest.approx(toy_corpus.V, rel=1e-12)
    assert report.heldout_tokens == toy_corpus.total()


def test_certain_prediction_gives_one():
    heldout = CountMatrix.from_dense([[1], [0]])
    report = perplexity_from_predictive(heldout, np.array([[1.0], [0.0]]))
    assert report.perplexity == pytest.approx(1.0)


def test_hand_computed_perplexity():
    heldout = CountMatrix.from_dense([[2], [1], [0]])
    predictive = np.array([[0.5], [0.25], [0.25]])
    report = perplexity_from_predictive(heldout, predictive)
    assert report.perplexity == pytest.approx(2 ** (4 / 3), rel=1e-12)
    assert report.doc_loglik[0] == pytest.approx(4 * math.log(0.5))


def test_zero_probability_is_floored_and_counted():
    heldout = CountMatrix.from_dense([[1], [1]])
    report = perplexity_from_predictive(heldout, np.array([[1.0], [0.0]]))
    assert report.floored == 1
    assert math.isfinite(report.perplexity)


def test_empty_heldout_is_an_error():
    heldout = CountMatrix.from_dense(np.zeros((3, 2), dtype=int))
    with pytest.raises(InvalidParameterError):
        perplexity_from_predictive(heldout, np.full((3, 2), 1 / 3))


def test_accumulator_averages_rates_not_probabilities():
    heldout = CountMatrix.from_dense([[1], [0]])
    acc = PredictiveAccumulator(heldout)
    acc.add(np.array([[1.0], [0.0]]), np.array([[3.0]]))
    acc.add(np.array([[0.0], [1.0]]), np.array([[1.0]]))
    report = acc.report()
    assert report.samples_used == 2
    assert report.perplexity == pytest.approx(4 / 3)


def test_heldout_perplexity_runs_a_chain(toy_corpus, hyper):
    net = random_network((toy_corpus.V, 5, 2))
    mask = mask_tokens(toy_corpus, 0.5, Rng(3))
    report = heldout_perplexity(net, mask, burnin=5, collect=6, thin=2, rng=Rng(4), hyper=hyper)
    assert report.samples_used == 3
    assert 1.0 < report.perplexity < 10 * toy_corpus.V
    again = heldout_perplexity(net, mask, burnin=5, collect=6, thin=2, rng=Rng(4), hyper=hyper)
    assert again.perplexity == report.perplexity


def test_heldout_perplexity_with_frozen_network(toy_corpus, hyper):
    net = random_network((toy_corpus.V, 4))
    mask = mask_tokens(toy_corpus, 0.5, Rng(3))
    report = heldout_perplexity(net, mask, 2, 2, 1, Rng(5), hyper=hyper, frozen_phi=True)
    assert report.samples_used == 2


def test_heldout_perplexity_rejects_bad_schedule(toy_corpus, hyper):
    mask = mask_tokens(toy_corpus, 0.5, Rng(3))
    with pytest.raises(InvalidParameterError):
        heldout_perplexity(random_network((toy_corpus.V, 3)), mask, 1, 2, 5, Rng(0), hyper=hyper)


def test_features_are_proportions(toy_corpus, hyper):
    net = random_network((toy_corpus.V, 5, 3))
    summary = extract_features(net, toy_corpus, burnin=3, collect=4, rng=Rng(1), hyper=hyper)
    assert summary.feature_props.shape == (5, toy_corpus.J)
    assert np.allclose(summary.feature_props.sum(axis=0), 1.0)
    assert summary.sample_count == 4
    assert not summary.empty_docs.any()


def test_single_factor_features_are_ones(toy_corpus, hyper):
    net = random_network((toy_corpus.V, 1))
    summary = extract_features(net, toy_corpus, 1, 2, Rng(1), hyper=hyper)
    assert np.allclose(summary.feature_props, 1.0)


def test_empty_documents_get_uniform_features(hyper):
    docs = CountMatrix.from_dense([[3, 0], [1, 0], [0, 0]])
    net = random_network((3, 4))
    summary = extract_features(net, docs, 1, 2, Rng(2), hyper=hyper)
    assert summary.empty_docs.tolist() == [False, True]
    assert np.allclose(summary.feature_props[:, 1], 0.25)


def test_features_file_round_trip(tmp_path, toy_corpus, hyper):
    summary = extract_features(random_network((toy_corpus.V, 3)), toy_corpus, 1, 1, Rng(1), hyper=hyper)
    path = tmp_path / "features.csv"
    save_features(str(path), summary, config_echo={"seed": 1})
    assert path.read_text().startswith("# seed=1\n# doc_id,f1,f2,f3\n")
    assert np.allclose(load_features(str(path)), summary.feature_props.T)


def test_projected_topics_are_distributions():
    net = random_network((30, 6, 4, 2))
    for t in (1, 2, 3):
        projected = project_layer(net, t)
        assert projected.shape == (30, net.widths[t])
        assert np.allclose(projected.sum(axis=0), 1.0)
        assert np.allclose(project_topic(net, t, 0), projected[:, 0])


def test_identity_lower_layer_passes_topics_through():
    upper = np.array([[0.5, 0.1], [0.25, 0.1], [0.25, 0.8]])
    net = Network(phi=[np.eye(3), upper], r=np.ones(2))
    assert np.allclose(project_topic(net, 2, 1), upper[:, 1])


def test_project_topic_rejects_bad_indices():
    net = random_network((10, 3))
    with pytest.raises(InvalidParameterError):
        project_topic(net, 2, 0)
    with pytest.raises(InvalidParameterError):
        project_topic(net, 1, 3)


def test_rank_terms_breaks_ties_by_index():
    assert rank_terms(np.array([0.2, 0.5, 0.2, 0.5])).tolist() == [1, 3, 0, 2]
    assert rank_terms(np.array([3.0, 1.0, 2.0]), 2).tolist() == [0, 2]


def test_ranked_topics_follow_recorded_usage():
    net = random_network((10, 3))
    net.metadata = {"usage": [[5, 50, 20]]}
    assert topic_usage(net, 1).tolist() == [5, 50, 20]
    assert [s.factor for s in ranked_topics(net, 1)] == [1, 2, 0]


def test_save_topics_writes_every_layer(tmp_path):
    net = random_network((12, 4, 2))
    path = tmp_path / "topics.txt"
    topics = save_topics(str(path), net, top_words=3)
    lines = [l for l in path.read_text().splitlines() if not l.startswith("#")]
    assert len(lines) == len(topics) == 6
    assert all(len(l.split()) == 6 for l in lines)


def test_generated_documents_rank_terms_by_rate(rng):
    net = Network(phi=[np.eye(8)], r=np.full(8, 2.0))
    docs = generate_documents(net, [1.0], n_docs=5, top_m=3, rng=rng)
    assert len(docs) == 5
    for doc in docs:
        assert doc.top_terms.size == 3
        assert doc.rates[doc.top_terms[0]] == doc.rates.max()
        assert doc.counts.shape == (8,)


def test_generation_without_c_schedule_uses_recorded_medians(rng):
    net = random_network((10, 4, 2))
    net.metadata = {"c_median": [1.0, 2.0]}
    docs = generate_documents(net, None, n_docs=2, top_m=20, rng=rng, sample_counts=False)
    assert docs[0].top_terms.size == 10
    assert docs[0].counts is None


@pytest.mark.slow
def test_second_layer_does_not_hurt_heldout_perplexity():
    hyper = Hyperparams(eta=0.05, k1_max=20, t_max=2, b_iters=[300], c_iters=[100])
    shallow, deep = [], []
    for seed in range(5):
        source = random_network((40, 10, 3), seed=seed, eta=0.1)
        source = Network(phi=source.phi, r=np.full(3, 30.0))
        counts, _ = generate(source, 300, 1.0, Rng(seed).spawn(0))
        train, test = counts.select_docs(range(200)), counts.select_docs(range(200, 300))
        stack = train_layerwise(train, hyper, hyper.schedule(layer1_sampler="blocked"), Rng(seed).spawn(1))
        mask = mask_tokens(test, 0.3, Rng(seed).spawn(2))
        scores = [
            heldout_perplexity(net, mask, 100, 100, 5, Rng(seed).spawn(3), hyper=hyper,
                               layer1_sampler="blocked").perplexity
            for net in stack.networks
        ]
        shallow.append(scores[0])
        deep.append(scores[1])
    assert np.median(deep) <= 1.01 * np.median(shallow)


def test_features_recover_disjoint_topics():
    counts, labels = block_corpus(n_topics=4, words_per_topic=10, docs=40, tokens=60, seed=2)
    phi = np.full((40, 4), 1e-3)
    for k in range(4):
        phi[k * 10:(k + 1) * 10, k] = 1.0
    net = Network(phi=[phi / phi.sum(axis=0)], r=np.ones(4))
    summary = extract_features(net, counts, 10, 10, Rng(9), hyper=Hyperparams(eta=0.1))
    assert np.mean(summary.feature_props.argmax(axis=0) == labels) >= 0.95


def test_more_collected_samples_lower_perplexity(toy_corpus, hyper):
    net = random_network((toy_corpus.V, 5))
    mask = mask_tokens(toy_corpus, 0.5, Rng(3))
    one = heldout_perplexity(net, mask, burnin=20, collect=1, thin=1, rng=Rng(4), hyper=hyper)
    many = heldout_perplexity(net, mask, burnin=20, collect=50, thin=1, rng=Rng(4), hyper=hyper)
    assert many.samples_used == 50
    assert many.perplexity < one.perplexity


def test_generated_rates_average_to_iterated_gamma_means():
    net = random_network((6, 3, 2), seed=4)
    docs = generate_documents(net, [2.0, 0.5], 100_000, 6, Rng(12), sample_counts=False)
    rates = np.column_stack([d.rates for d in docs])
    expected = net.phi[0] @ net.phi[1] @ net.r / (2.0 * 0.5)
    tolerance = 4 * rates.std(axis=1) / math.sqrt(rates.shape[1])
    assert np.all(np.abs(rates.mean(axis=1) - expected) < tolerance)

import numpy as np
import pytest

from conftest import random_network
from errors import DimensionError, InvalidParameterError
from inference import DocumentShards, GibbsSampler
from sampling.rng import Rng


def _sampler(corpus, hyper, widths=(6, 3), seed=3, **kwargs):
    net = random_network((corpus.V,) + tuple(widths), seed=seed)
    return GibbsSampler(net, corpus, hyper, Rng(seed), **kwargs)


@pytest.mark.parametrize("layer1_sampler", ["collapsed", "blocked"])
def test_counts_are_conserved_every_iteration(toy_corpus, hyper, layer1_sampler):
    sampler = _sampler(toy_corpus, hyper, layer1_sampler=layer1_sampler)
    for _ in range(50):
        report = sampler.iteration()
        sampler.state.check_conservation()
        totals = report.layer_totals
        assert totals[0] == toy_corpus.total()
        assert all(a >= b for a, b in zip(totals, totals[1:]))
        assert np.isfinite(report.loglik)
    sampler.close()


def test_network_stays_valid(toy_corpus, hyper):
    sampler = _sampler(toy_corpus, hyper, widths=(5, 4, 2))
    for _ in range(10):
        sampler.iteration()
    sampler.network.check()
    assert sampler.network.widths == (toy_corpus.V, 5, 4, 2)
    assert np.all(np.isfinite(sampler.state.p[1:]))
    assert np.all((sampler.state.p[1:] > 0) & (sampler.state.p[1:] < 1))


def _run(corpus, hyper, workers, n=5, **kwargs):
    sampler = _sampler(corpus, hyper, workers=workers, **kwargs)
    for _ in range(n):
        sampler.iteration()
    sampler.close()
    return sampler


@pytest.mark.parametrize("workers", [1, 3])
def test_same_seed_same_chain(toy_corpus, hyper, workers):
    a = _run(toy_corpus, hyper, workers, layer1_sampler="blocked")
    b = _run(toy_corpus, hyper, workers, layer1_sampler="blocked")
    for pa, pb in zip(a.network.phi, b.network.phi):
        assert np.array_equal(pa, pb)
    assert np.array_equal(a.network.r, b.network.r)
    for ta, tb in zip(a.state.theta, b.state.theta):
        assert np.array_equal(ta, tb)


def test_collapsed_chain_is_reproducible(toy_corpus, hyper):
    a = _run(toy_corpus, hyper, 2)
    b = _run(toy_corpus, hyper, 2)
    assert np.array_equal(a.state.z, b.state.z)
    assert np.array_equal(a.network.phi[0], b.network.phi[0])


def test_fixed_globals_leave_network_untouched(toy_corpus, hyper):
    net = random_network((toy_corpus.V, 4, 2))
    sampler = GibbsSampler(net, toy_corpus, hyper, Rng(1), update_globals=False)
    assert sampler.layer1_sampler == "blocked"
    for _ in range(5):
        sampler.iteration()
    for before, after in zip(net.phi, sampler.network.phi):
        assert np.array_equal(before, after)
    assert np.array_equal(net.r, sampler.network.r)
    assert sampler.state.theta[0].shape == (4, toy_corpus.J)


def test_add_layer_extends_state(toy_corpus, hyper):
    sampler = _sampler(toy_corpus, hyper, widths=(4,))
    sampler.iteration()
    sampler.add_layer(np.full((4, 3), 0.25), np.ones(3))
    st = sampler.state
    assert sampler.depth == 2
    assert st.c.shape == (4, toy_corpus.J)
    assert np.all(st.c[3] == 1.0)
    assert st.theta[1].shape == (3, toy_corpus.J)
    sampler.iteration()
    st.check_conservation()


def test_materialized_theta1_has_layer1_shape(toy_corpus, hyper):
    sampler = _sampler(toy_corpus, hyper)
    sampler.iteration()
    theta1 = sampler.materialize_theta1(Rng(9))
    assert theta1.shape == (6, toy_corpus.J)
    assert np.all(theta1 > 0)


def test_replace_counts_checks_its_inputs(toy_corpus, hyper):
    with pytest.raises(InvalidParameterError):
        _sampler(toy_corpus, hyper).replace_counts(toy_corpus)
    blocked = _sampler(toy_corpus, hyper, layer1_sampler="blocked")
    with pytest.raises(DimensionError):
        blocked.replace_counts(toy_corpus.select_docs([0, 1]))


def test_collapsed_sampler_follows_new_counts(toy_corpus, hyper):
    sampler = _sampler(toy_corpus, hyper)
    sampler.iteration()
    sampler.materialize_theta1(Rng(8))
    doubled = toy_corpus + toy_corpus
    sampler.replace_counts(doubled, Rng(9))
    st = sampler.state
    assert st.z.size == doubled.total()
    assert np.array_equal(st.phi_counts[0].sum(axis=1), doubled.term_totals())
    assert np.array_equal(st.m[0].sum(axis=0), doubled.doc_totals())
    assert np.array_equal(np.bincount(st.z, minlength=6), st.m[0].sum(axis=1))
    report = sampler.iteration()
    assert report.layer_totals[0] == doubled.total()


def test_unknown_layer1_sampler(toy_corpus, hyper):
    with pytest.raises(InvalidParameterError):
        _sampler(toy_corpus, hyper, layer1_sampler="exact")


def test_progress_line_format(toy_corpus, hyper):
    report = _sampler(toy_corpus, hyper, widths=(4,)).iteration()
    line = report.progress_line()
    assert line.startswith("depth=1 iter=1 K_T=4 total1=")
    assert "total2=" in line


def test_document_shards_cover_corpus_in_order():
    shards = DocumentShards(10, 3)
    assert shards.blocks[0][0] == 0 and shards.blocks[-1][1] == 10
    assert all(a[1] == b[0] for a, b in zip(shards.blocks, shards.blocks[1:]))
    out = shards.map_columns(lambda lo, hi, rng: np.arange(lo, hi)[None, :], Rng(0))
    assert out.ravel().tolist() == list(range(10))
    shards.close()


def test_document_shards_never_exceed_documents():
    with DocumentShards(2, 8) as shards:
        assert len(shards.blocks) == 2

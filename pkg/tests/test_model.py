import numpy as np
import pytest

from conftest import random_network
from errors import ConfigError, ModelError
from model import Hyperparams, Network, generate, sample_prior
from model.generative import broadcast_c_schedule, scalars_from_c
from model.network import P1
from inference.conditionals import propagate_p
from sampling.rng import Rng


def test_network_reports_widths():
    net = random_network((30, 6, 3))
    assert net.depth == 2
    assert net.widths == (30, 6, 3)
    assert net.V == 30


def test_network_rejects_off_simplex_columns():
    phi = np.full((4, 2), 0.25)
    phi[0, 1] = 0.15
    with pytest.raises(ModelError):
        Network(phi=[phi], r=np.ones(2))


def test_network_rejects_mismatched_layers():
    with pytest.raises(ModelError):
        Network(phi=[np.full((4, 3), 0.25), np.full((2, 2), 0.5)], r=np.ones(2))


def test_network_rejects_nonpositive_r():
    with pytest.raises(ModelError):
        Network(phi=[np.full((4, 2), 0.25)], r=np.array([1.0, 0.0]))


def test_with_top_layer_keeps_lower_layers():
    net = random_network((20, 5))
    deeper = net.with_top_layer(np.full((5, 2), 0.2), np.ones(2))
    assert deeper.widths == (20, 5, 2)
    assert np.array_equal(deeper.phi[0], net.phi[0])
    assert net.depth == 1


def test_generate_shapes_and_scalars(rng):
    net = random_network((40, 8, 4))
    counts, state = generate(net, 25, [1.0, 2.0], rng)
    assert counts.shape == (40, 25)
    assert [th.shape for th in state.theta] == [(8, 25), (4, 25)]
    assert np.allclose(state.p[1], P1)
    assert np.allclose(state.p[2], 0.5)
    assert np.allclose(state.p[3], propagate_p(0.5, 2.0))


def test_generate_zero_documents(rng):
    counts, _ = generate(random_network((10, 3)), 0, 1.0, rng)
    assert counts.shape == (10, 0)
    assert counts.total() == 0


def test_generate_is_reproducible():
    net = random_network((25, 5, 2))
    a, _ = generate(net, 10, 1.0, Rng(11))
    b, _ = generate(net, 10, 1.0, Rng(11))
    assert a == b


def test_generate_mean_matches_rates(rng):
    phi = np.eye(3)
    net = Network(phi=[phi], r=np.array([2.0, 4.0, 6.0]))
    counts, _ = generate(net, 20_000, 1.0, rng)
    means = counts.to_dense().mean(axis=1)
    assert np.allclose(means, [2.0, 4.0, 6.0], rtol=0.05)


def test_c_schedule_must_match_depth():
    with pytest.raises(ModelError):
        broadcast_c_schedule([1.0, 1.0, 1.0], 2, 5)
    with pytest.raises(ModelError):
        broadcast_c_schedule([1.0, -1.0], 2, 5)


def test_scalars_from_c():
    c, p = scalars_from_c(np.array([[3.0, 1.0]]))
    assert np.allclose(p[2], [0.25, 0.5])
    assert np.all(np.isnan(c[:2]))


def test_sample_prior_is_consistent(rng):
    hyper = Hyperparams(a0=2.0, b0=2.0, e0=2.0, f0=2.0, eta=0.5)
    net, state = sample_prior((15, 4, 2), 12, hyper, rng)
    assert net.widths == (15, 4, 2)
    assert state.counts.shape == (15, 12)
    assert np.all((state.p[2] > 0) & (state.p[2] < 1))
    assert np.allclose(state.c[2], (1 - state.p[2]) / state.p[2])


def test_hyperparams_broadcast_and_validation():
    hyper = Hyperparams(eta=0.1, b_iters=100, c_iters=[10, 20])
    assert hyper.eta_for(3) == 0.1
    schedule = hyper.schedule()
    assert schedule.burn_for(2) == 100
    assert schedule.collect_for(1) == 10 and schedule.collect_for(5) == 20
    with pytest.raises(ConfigError):
        Hyperparams.from_mapping({"eta": [0.1, 0.0]})
    with pytest.raises(ConfigError):
        Hyperparams.from_mapping({"b_iters": 0})


def test_schedule_options_override_hyperparams():
    hyper = Hyperparams(k1_max=30, t_max=3, b_iters=[20], c_iters=[5])
    schedule = hyper.schedule(t_max=1, k1_max=8, burn=[4], layer1_sampler="blocked")
    assert schedule.t_max == 1 and schedule.k1_max == 8
    assert schedule.burn_for(1) == 4 and schedule.collect_for(1) == 5
    assert schedule.layer1_sampler == "blocked"
    assert hyper.schedule().t_max == 3


def test_identity_chain_overdispersion_grows_with_depth():
    eye = np.eye(2)
    network = Network(phi=[eye, eye, eye], r=np.ones(2))
    counts, _ = generate(network, 250_000, 1.0, Rng(17))
    x = counts.to_dense().ravel().astype(float)
    # p2 = 0.5, T = 3: mean r p / (1 - p) = 1, VMR (1 + 2 p) / (1 - p) = 4
    assert abs(x.mean() - 1.0) < 0.02
    assert abs(x.var() / x.mean() - 4.0) < 0.2

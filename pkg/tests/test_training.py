import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from fogfl.data import DataShard, partition, synthetic_clusters
from fogfl.training import (ModelState, _with_bias, accuracy, fog_aggregate,
                            global_loss, global_update, local_round,
                            lr_schedule, softmax_loss_grad, ue_rng)


def make_shards(J=4, n=80, q=3, classes=2, seed=0):
    ds = synthetic_clusters(n, q, classes, np.random.default_rng(seed))
    return ds, partition(ds, J, "iid", np.random.default_rng(seed + 1))


def test_local_trajectory_identity():
    # w_L - w_0 == -eta * delta, replaying the same batch draws independently
    ds, shards = make_shards()
    shard = shards[0]
    model = ModelState(np.random.default_rng(3).normal(size=(4, 2)) * 0.1)
    eta, L, B, reg = 0.05, 6, 10, 1e-3
    upd = local_round(model, shard, L, B, eta, np.random.default_rng(99), reg)

    rng = np.random.default_rng(99)
    Xb = _with_bias(shard.X)
    w = model.w.copy()
    for _ in range(L):
        idx = rng.choice(shard.n, size=B, replace=False)
        _, grad = softmax_loss_grad(w, Xb[idx], shard.y[idx], reg)
        w -= eta * grad
    assert np.max(np.abs((w - model.w) - (-eta * upd.delta))) < 1e-10


def test_hierarchical_equals_direct_aggregation():
    ds, shards = make_shards(J=6)
    model = ModelState.zeros(3, 2)
    ups = [local_round(model, s, 4, 10, 0.02, ue_rng(0, 0, j), 1e-3)
           for j, s in enumerate(shards)]
    # two fogs of three UEs each, then the cloud sum
    d1, l1 = fog_aggregate(ups[:3])
    d2, l2 = fog_aggregate(ups[3:])
    direct, l_direct = fog_aggregate(ups)
    assert np.max(np.abs((d1 + d2) - direct)) < 1e-12
    assert l1 + l2 == pytest.approx(l_direct, abs=1e-12)
    m_two = global_update(model, [d1, d2], 0.02, 6)
    m_one = global_update(model, [direct], 0.02, 6)
    assert np.max(np.abs(m_two.w - m_one.w)) < 1e-12


def test_gradient_matches_finite_differences():
    rng = np.random.default_rng(5)
    X = _with_bias(rng.normal(size=(30, 3)))
    y = rng.integers(0, 2, size=30)
    w = rng.normal(size=(4, 2)) * 0.3
    _, grad = softmax_loss_grad(w, X, y, 1e-3)
    h = 1e-6
    flat = w.ravel()
    coords = rng.choice(flat.size, size=min(100, flat.size), replace=False)
    for k in coords:
        wp, wm = flat.copy(), flat.copy()
        wp[k] += h
        wm[k] -= h
        lp, _ = softmax_loss_grad(wp.reshape(w.shape), X, y, 1e-3)
        lm, _ = softmax_loss_grad(wm.reshape(w.shape), X, y, 1e-3)
        fd = (lp - lm) / (2 * h)
        assert abs(grad.ravel()[k] - fd) <= 1e-5 * max(1.0, abs(fd))


def test_global_loss_is_mean_of_shards():
    ds, shards = make_shards(J=4)
    w = np.zeros((4, 2))
    losses = [softmax_loss_grad(w, _with_bias(s.X), s.y, 1e-3)[0]
              for s in shards]
    assert global_loss(w, shards, 1e-3) == pytest.approx(np.mean(losses))


def test_local_round_validation():
    ds, shards = make_shards()
    model = ModelState.zeros(3, 2)
    with pytest.raises(ValueError):
        local_round(model, shards[0], 2, shards[0].n + 1, 0.1,
                    np.random.default_rng(0), 1e-3)
    with pytest.raises(ValueError):
        local_round(model, shards[0], 2, 5, 0.0, np.random.default_rng(0), 1e-3)


def test_lr_schedule_modes():
    assert lr_schedule(0, 0.001, 1.01) == pytest.approx(0.001)
    assert lr_schedule(10, 0.001, 1.01) == pytest.approx(0.001 / 1.01 ** 10)
    assert lr_schedule(0, 0.0, lam=1.0, psi=80.0) == pytest.approx(16.0 / 81.0)
    with pytest.raises(ValueError):
        lr_schedule(0, 0.001)


def test_accuracy_perfect_separation():
    X = np.array([[1.0, 0.0], [-1.0, 0.0]])
    y = np.array([0, 1])
    w = np.zeros((3, 2))
    w[0, 0], w[0, 1] = 1.0, -1.0
    assert accuracy(w, X, y) == 1.0


def test_ue_rng_streams_are_independent():
    a = ue_rng(0, 1, 2).normal(size=4)
    b = ue_rng(0, 1, 3).normal(size=4)
    c = ue_rng(0, 1, 2).normal(size=4)
    assert np.array_equal(a, c)
    assert not np.array_equal(a, b)


@given(eta=st.floats(1e-4, 0.5), count=st.integers(1, 20))
def test_global_update_step_identity(eta, count):
    model = ModelState(np.ones((3, 2)))
    delta = np.full((3, 2), 2.0)
    out = global_update(model, [delta], eta, count)
    assert np.allclose(out.w, 1.0 - eta * 2.0 / count)
    assert out.g == model.g + 1


def test_single_step_update_is_unbiased():
    # at L=1, delta is one stochastic gradient at the start model; its mean
    # over many independent batch draws must match the full-shard gradient
    ds, shards = make_shards(J=1, n=200, q=3, classes=2)
    shard = shards[0]
    model = ModelState(np.random.default_rng(7).normal(size=(4, 2)) * 0.1)
    reg = 1e-3
    Xb = _with_bias(shard.X)
    _, full_grad = softmax_loss_grad(model.w, Xb, shard.y, reg)

    n_seeds = 1000
    samples = np.empty((n_seeds,) + model.w.shape)
    for s in range(n_seeds):
        upd = local_round(model, shard, 1, 20, 0.05,
                          np.random.default_rng([1234, s]), reg)
        samples[s] = upd.delta
    mean = samples.mean(axis=0)
    se = samples.std(axis=0, ddof=1) / np.sqrt(n_seeds)
    assert np.all(np.abs(mean - full_grad) <= 3.0 * se + 1e-12)

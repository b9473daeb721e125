import warnings

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from hypothesis.extra.numpy import arrays

from babblereach.codec import (Autoencoder, NormStats, TrainHyper, decode, denormalize,
                               encode, fit, fit_norm_stats, half_sse, loss_and_gradients,
                               normalize, sgd_epoch)
from babblereach.errors import ConfigurationError

ACTS = ("tanh", "tanh", "tanh", "logistic")


@pytest.fixture
def model():
    return Autoencoder.initialise((6, 5, 2, 5, 6), ACTS, rng_seed=3)


@pytest.fixture
def batch():
    return np.random.default_rng(0).uniform(0, 1, (12, 6))


class TestNormalisation:
    def test_bounds(self):
        stats = NormStats(np.array([0.0, -1.0]), np.array([2.0, 1.0]))
        np.testing.assert_allclose(normalize([[0, -1], [2, 1], [1, 0]], stats),
                                   [[0, 0], [1, 1], [0.5, 0.5]])

    def test_clamps_counted(self):
        stats = NormStats(np.zeros(2), np.ones(2))
        z, n = normalize([[1.5, -0.2], [0.5, 0.5]], stats, return_clamps=True)
        np.testing.assert_allclose(z, [[1, 0], [0.5, 0.5]])
        assert n == 2

    def test_constant_feature(self):
        X = np.array([[1.0, 3.0], [2.0, 3.0]])
        with pytest.warns(UserWarning, match="constant"):
            stats = fit_norm_stats(X)
        z = normalize(X, stats)
        np.testing.assert_allclose(z[:, 1], 0.5)
        np.testing.assert_allclose(denormalize(z, stats), X)

    def test_empty(self):
        with pytest.raises(ConfigurationError):
            fit_norm_stats(np.zeros((0, 3)))

    @settings(max_examples=50, deadline=None)
    @given(arrays(float, (8, 3), elements=st.floats(-100, 100)))
    def test_round_trip(self, X):
        with warnings.catch_warnings():
            warnings.simplefilter("ignore")
            stats = fit_norm_stats(X)
        z = normalize(X, stats)
        assert z.min() >= 0 and z.max() <= 1
        np.testing.assert_allclose(denormalize(z, stats), X, atol=1e-9 * (1 + np.abs(X).max()))


class TestGradients:
    def test_against_finite_differences(self, model, batch):
        _, grad = loss_and_gradients(model, batch)
        eps = 1e-6
        fd = np.empty_like(model.theta)
        for k in range(model.theta.size):
            up, dn = model.theta.copy(), model.theta.copy()
            up[k] += eps
            dn[k] -= eps
            fd[k] = (loss_and_gradients(model, batch, theta=up)[0]
                     - loss_and_gradients(model, batch, theta=dn)[0]) / (2 * eps)
        np.testing.assert_allclose(grad, fd, rtol=1e-5, atol=1e-9)

    def test_loss_is_half_sse(self, model, batch):
        loss, _ = loss_and_gradients(model, batch)
        assert loss == pytest.approx(half_sse(model, batch), rel=1e-12)

    def test_sgd_epoch_matches_per_sample_steps(self, model, batch):
        order = np.array([3, 0, 7, 7, 11, 1])
        lr = 0.3
        theta = model.theta.copy()
        expected_loss = 0.0
        for idx in order:
            loss, g = loss_and_gradients(model, batch[idx], theta=theta)
            expected_loss += loss
            theta = theta - lr * g
        got = sgd_epoch(model, batch, order, lr)
        np.testing.assert_allclose(model.theta, theta, rtol=1e-10, atol=1e-12)
        assert got == pytest.approx(expected_loss / len(order), rel=1e-10)


class TestModel:
    def test_shapes(self, model, batch):
        a = encode(batch, model)
        assert a.shape == (12, 2) and np.all(np.abs(a) < 1)
        z = decode(a, model)
        assert z.shape == (12, 6) and np.all((z > 0) & (z < 1))
        assert encode(batch[0], model).shape == (2,)

    def test_wrong_width(self, model):
        with pytest.raises(ConfigurationError):
            encode(np.zeros(4), model)

    def test_round_trip(self, tmp_path, model):
        model.history = {"epochs_run": 3}
        path = tmp_path / "codec.json"
        model.save(path)
        again = Autoencoder.load(path)
        np.testing.assert_array_equal(again.theta, model.theta)
        assert again.sizes == model.sizes and again.activations == model.activations

    def test_bad_sizes(self):
        with pytest.raises(ConfigurationError):
            Autoencoder.initialise((4, 3, 5), ("tanh", "logistic"))


@pytest.fixture(scope="module")
def curve():
    # a 1-D curve embedded in 4-D: a bottleneck of 1 should capture it
    t = np.random.default_rng(2).uniform(0, 1, 300)
    return 0.5 + 0.35 * np.stack([np.sin(2 * t), np.cos(2 * t), t - 0.5, 0.5 * t * t], 1)


class TestFit:
    def test_loss_never_increases(self, curve):
        m = fit(curve, 1, TrainHyper(learning_rate=0.5, epochs=60, patience=100))
        losses = np.array(m.history["train_loss"])
        assert np.all(np.diff(losses) <= 0)
        assert m.history["train_rmse"] < 0.05

    def test_deterministic(self, curve):
        hyper = TrainHyper(epochs=5)
        np.testing.assert_array_equal(fit(curve, 2, hyper).theta, fit(curve, 2, hyper).theta)

    def test_bad_bottleneck(self, curve):
        with pytest.raises(ConfigurationError):
            fit(curve, 0, TrainHyper(epochs=1))

    def test_collinear_points_one_unit(self):
        points = np.array([[0.1, 0.2], [0.3, 0.4], [0.5, 0.6], [0.7, 0.8]])
        m = fit(points, 1, TrainHyper(epochs=10_000))
        losses = m.history["train_loss"]
        assert losses[100] < losses[0]
        assert m.history["train_rmse"] < 0.05

    def test_linear_identity_is_reachable(self):
        X = np.random.default_rng(0).uniform(0.2, 0.8, (30, 4))
        m = fit(X, 4, TrainHyper(epochs=3000, validation_fraction=0.0),
                activations=("linear",) * 4)
        assert m.history["train_rmse"] <= 1e-3

"""Bottleneck autoencoder between motor-sensory space and the reduced space.

Training is plain per-sample stochastic gradient descent with backpropagation.
All parameters live in one flat vector so the inner loop can be compiled.
"""

import logging
import warnings
from dataclasses import dataclass, field

import numpy as np
from numba import njit

from . import serialization
from .babble import Dataset
from .errors import ConfigurationError, TrainingError

log = logging.getLogger(__name__)

MODEL_FORMAT = "babblereach.codec"

LINEAR, TANH, LOGISTIC = 0, 1, 2
_ACT_CODES = {"linear": LINEAR, "tanh": TANH, "logistic": LOGISTIC}


# --------------------------------------------------------------------------
# normalisation

@dataclass(frozen=True)
class NormStats:
    minimum: np.ndarray
    maximum: np.ndarray

    @property
    def constant(self):
        return ~(self.maximum > self.minimum)

    @property
    def span(self):
        return np.where(self.constant, 1.0, self.maximum - self.minimum)

    def to_dict(self):
        return {"min": self.minimum.tolist(), "max": self.maximum.tolist()}

    @classmethod
    def from_dict(cls, d):
        return cls(np.array(d["min"], dtype=float), np.array(d["max"], dtype=float))


def _raw_features(data):
    if isinstance(data, Dataset):
        return data.train_features()
    return np.atleast_2d(np.asarray(data, dtype=float))


def fit_norm_stats(data):
    """Per-feature min and max over every training sample."""
    X = _raw_features(data)
    if X.size == 0:
        raise ConfigurationError("cannot fit normalisation on an empty dataset")
    stats = NormStats(X.min(axis=0), X.max(axis=0))
    if stats.constant.any():
        warnings.warn(f"constant features {np.flatnonzero(stats.constant).tolist()} "
                      "are mapped to 0.5", stacklevel=2)
    return stats


def normalize(x, stats, return_clamps=False):
    """Min-max scale into [0, 1]; out-of-range values are clamped.

    With ``return_clamps`` the number of clamped entries is returned as well.
    """
    x = np.asarray(x, dtype=float)
    z = (x - stats.minimum) / stats.span
    clamped = (z < 0) | (z > 1)
    z = np.clip(z, 0.0, 1.0)
    z = np.where(stats.constant, 0.5, z)
    if return_clamps:
        return z, int(np.count_nonzero(clamped & ~stats.constant))
    return z


def denormalize(z, stats):
    z = np.asarray(z, dtype=float)
    return np.where(stats.constant, stats.minimum, stats.minimum + z * stats.span)


# --------------------------------------------------------------------------
# model

@dataclass
class TrainHyper:
    learning_rate: float = 0.1
    epochs: int = 50_000
    rng_seed: int = 0
    hidden: int = 16
    validation_fraction: float = 0.1
    check_every: int = 1
    patience: int = 1000
    min_learning_rate: float = 1e-6

    def __post_init__(self):
        if not self.learning_rate > 0:
            raise ConfigurationError("learning_rate must be positive")
        if self.epochs < 1:
            raise ConfigurationError("epochs must be >= 1")

    def to_dict(self):
        return dict(self.__dict__)


@dataclass
class Autoencoder:
    """Fully connected autoencoder; ``sizes`` is the layer-width chain.

    Layer ``l`` maps ``sizes[l]`` units to ``sizes[l + 1]`` units as
    ``act(a @ W + b)``.  The bottleneck is the narrowest layer and splits the
    net into encoder and decoder halves.
    """

    sizes: tuple
    activations: tuple
    theta: np.ndarray
    stats: NormStats = None
    history: dict = field(default_factory=dict)

    def __post_init__(self):
        self.sizes = tuple(int(s) for s in self.sizes)
        self.activations = tuple(self.activations)
        if len(self.activations) != len(self.sizes) - 1:
            raise ConfigurationError("need one activation per layer")
        if any(a not in _ACT_CODES for a in self.activations):
            raise ConfigurationError(f"activations must be among {sorted(_ACT_CODES)}")
        if self.sizes[0] != self.sizes[-1]:
            raise ConfigurationError("autoencoder input and output widths differ")
        self.theta = np.ascontiguousarray(self.theta, dtype=float)
        if self.theta.size != _n_params(self.sizes):
            raise ConfigurationError("parameter vector does not match layer sizes")

    @classmethod
    def initialise(cls, sizes, activations, rng_seed=0):
        """Weights uniform in +-1/sqrt(fan_in), biases zero."""
        rng = np.random.default_rng(rng_seed)
        parts = []
        for fan_in, fan_out in zip(sizes[:-1], sizes[1:]):
            bound = 1.0 / np.sqrt(fan_in)
            parts.append(rng.uniform(-bound, bound, size=fan_in * fan_out))
            parts.append(np.zeros(fan_out))
        return cls(sizes, activations, np.concatenate(parts))

    @property
    def n_layers(self):
        return len(self.sizes) - 1

    @property
    def bottleneck_layer(self):
        return int(np.argmin(self.sizes))

    @property
    def bottleneck(self):
        return self.sizes[self.bottleneck_layer]

    @property
    def input_dim(self):
        return self.sizes[0]

    def layers(self, theta=None):
        """(W, b) views into the flat parameter vector."""
        theta = self.theta if theta is None else theta
        out, k = [], 0
        for fan_in, fan_out in zip(self.sizes[:-1], self.sizes[1:]):
            W = theta[k:k + fan_in * fan_out].reshape(fan_in, fan_out)
            k += fan_in * fan_out
            out.append((W, theta[k:k + fan_out]))
            k += fan_out
        return out

    def _run(self, X, first, last):
        a = np.atleast_2d(np.asarray(X, dtype=float))
        if a.shape[1] != self.sizes[first]:
            raise ConfigurationError(
                f"expected {self.sizes[first]} features, got {a.shape[1]}")
        for (W, b), act in list(zip(self.layers(), self.activations))[first:last]:
            a = _activate(a @ W + b, act)
        return a

    def reconstruct(self, X):
        return self._run(X, 0, self.n_layers)

    def to_dict(self):
        return {
            "format": MODEL_FORMAT,
            "version": 1,
            "sizes": list(self.sizes),
            "activations": list(self.activations),
            "weights": [W.tolist() for W, _ in self.layers()],
            "biases": [b.tolist() for _, b in self.layers()],
            "norm_stats": None if self.stats is None else self.stats.to_dict(),
            "history": self.history,
        }

    @classmethod
    def from_dict(cls, d):
        serialization.check_header(d, MODEL_FORMAT, 1)
        parts = []
        for W, b in zip(d["weights"], d["biases"]):
            parts += [np.array(W, dtype=float).ravel(), np.array(b, dtype=float)]
        stats = None if d["norm_stats"] is None else NormStats.from_dict(d["norm_stats"])
        return cls(d["sizes"], d["activations"], np.concatenate(parts), stats,
                   d.get("history", {}))

    def save(self, path):
        return serialization.write_json(path, self.to_dict())

    @classmethod
    def load(cls, path):
        return cls.from_dict(serialization.read_json(path))


def _n_params(sizes):
    return sum(i * o + o for i, o in zip(sizes[:-1], sizes[1:]))


def _activate(z, act):
    if act == "tanh":
        return np.tanh(z)
    if act == "logistic":
        return 0.5 * (1.0 + np.tanh(0.5 * z))
    return z


def _act_grad(a, act):
    """Derivative expressed through the activation output."""
    if act == "tanh":
        return 1.0 - a * a
    if act == "logistic":
        return a * (1.0 - a)
    return np.ones_like(a)


def encode(point, model):
    """Motor-sensory features in [0, 1] -> reduced coordinates."""
    single = np.ndim(point) == 1
    out = model._run(point, 0, model.bottleneck_layer)
    return out[0] if single else out


def decode(reduced, model):
    """Reduced coordinates -> normalised motor-sensory features."""
    single = np.ndim(reduced) == 1
    out = model._run(reduced, model.bottleneck_layer, model.n_layers)
    return out[0] if single else out


def loss_and_gradients(model, X, T=None, theta=None):
    """Half squared reconstruction error averaged over the batch.

    Returns ``(loss, grad)`` where ``grad`` is flat and aligned with
    ``model.theta``.  ``T`` defaults to ``X`` (autoencoding).
    """
    theta = model.theta if theta is None else theta
    X = np.atleast_2d(np.asarray(X, dtype=float))
    T = X if T is None else np.atleast_2d(np.asarray(T, dtype=float))
    layers = model.layers(theta)
    acts = [X]
    for (W, b), act in zip(layers, model.activations):
        acts.append(_activate(acts[-1] @ W + b, act))
    n = X.shape[0]
    err = acts[-1] - T
    loss = 0.5 * float(np.sum(err * err)) / n
    grads = []
    delta = err * _act_grad(acts[-1], model.activations[-1]) / n
    for l in range(model.n_layers - 1, -1, -1):
        W, _ = layers[l]
        grads.append(delta.sum(axis=0))
        grads.append((acts[l].T @ delta).ravel())
        if l:
            delta = (delta @ W.T) * _act_grad(acts[l], model.activations[l - 1])
    return loss, np.concatenate(grads[::-1])


# --------------------------------------------------------------------------
# training

@njit(cache=True)
def _act_inplace(z, code):
    for k in range(z.size):
        if code == 1:
            z[k] = np.tanh(z[k])
        elif code == 2:
            z[k] = 0.5 * (1.0 + np.tanh(0.5 * z[k]))


@njit(cache=True)
def _dact(a, code):
    if code == 1:
        return 1.0 - a * a
    if code == 2:
        return a * (1.0 - a)
    return 1.0


@njit(cache=True)
def _sgd_epoch(theta, sizes, codes, X, order, lr):
    """One pass of per-sample gradient steps; returns the mean pre-step loss."""
    n_layers = sizes.size - 1
    width = sizes.max()
    acts = np.zeros((n_layers + 1, width))
    delta = np.zeros(width)
    prev = np.zeros(width)
    w_off = np.zeros(n_layers, dtype=np.int64)
    b_off = np.zeros(n_layers, dtype=np.int64)
    k = 0
    for l in range(n_layers):
        w_off[l] = k
        k += sizes[l] * sizes[l + 1]
        b_off[l] = k
        k += sizes[l + 1]
    total = 0.0
    for idx in order:
        x = X[idx]
        for i in range(sizes[0]):
            acts[0, i] = x[i]
        for l in range(n_layers):
            fi, fo = sizes[l], sizes[l + 1]
            for o in range(fo):
                s = theta[b_off[l] + o]
                for i in range(fi):
                    s += acts[l, i] * theta[w_off[l] + i * fo + o]
                acts[l + 1, o] = s
            _act_inplace(acts[l + 1, :fo], codes[l])
        out = sizes[n_layers]
        for o in range(out):
            e = acts[n_layers, o] - x[o]
            total += 0.5 * e * e
            delta[o] = e * _dact(acts[n_layers, o], codes[n_layers - 1])
        for l in range(n_layers - 1, -1, -1):
            fi, fo = sizes[l], sizes[l + 1]
            if l > 0:
                for i in range(fi):
                    s = 0.0
                    for o in range(fo):
                        s += theta[w_off[l] + i * fo + o] * delta[o]
                    prev[i] = s * _dact(acts[l, i], codes[l - 1])
            for i in range(fi):
                a = acts[l, i]
                for o in range(fo):
                    theta[w_off[l] + i * fo + o] -= lr * a * delta[o]
            for o in range(fo):
                theta[b_off[l] + o] -= lr * delta[o]
            if l > 0:
                for i in range(fi):
                    delta[i] = prev[i]
    return total / order.size


def sgd_epoch(model, X, order, learning_rate):
    """Per-sample SGD over ``X[order]``; updates ``model.theta`` in place."""
    sizes = np.asarray(model.sizes, dtype=np.int64)
    codes = np.asarray([_ACT_CODES[a] for a in model.activations], dtype=np.int64)
    X = np.ascontiguousarray(X, dtype=float)
    return _sgd_epoch(model.theta, sizes, codes, X, np.asarray(order, dtype=np.int64),
                      float(learning_rate))


def half_sse(model, Z):
    """Half squared reconstruction error averaged over rows."""
    Z = np.atleast_2d(Z)
    return 0.5 * float(np.sum((model.reconstruct(Z) - Z) ** 2)) / len(Z)


def rmse(model, Z):
    """Root-mean-square reconstruction error over all samples and features."""
    Z = np.atleast_2d(Z)
    return float(np.sqrt(np.mean((model.reconstruct(Z) - Z) ** 2)))


def explained_variance(model, Z):
    Z = np.atleast_2d(Z)
    resid = model.reconstruct(Z) - Z
    total = np.var(Z, axis=0).sum()
    return float(1.0 - np.var(resid, axis=0).sum() / total) if total > 0 else 1.0


def fit(Z, bottleneck, hyper=None, activations=None, Z_test=None):
    """Train an autoencoder on already normalised rows ``Z``.

    Learning rate halves (and the epoch is undone) whenever the full training
    loss rises, so the recorded loss never increases.  A random
    ``validation_fraction`` of rows drives early stopping; the best validated
    parameters are returned.
    """
    hyper = hyper or TrainHyper()
    Z = np.ascontiguousarray(np.atleast_2d(Z), dtype=float)
    n, dim = Z.shape
    if not 1 <= bottleneck <= dim:
        raise ConfigurationError(f"bottleneck must be in [1, {dim}]")
    sizes = (dim, hyper.hidden, bottleneck, hyper.hidden, dim)
    activations = activations or ("tanh", "tanh", "tanh", "logistic")
    model = Autoencoder.initialise(sizes, activations, hyper.rng_seed)
    rng = np.random.default_rng(hyper.rng_seed)

    n_val = int(round(hyper.validation_fraction * n)) if n >= 10 else 0
    perm = rng.permutation(n)
    val, tr = Z[perm[:n_val]], Z[perm[n_val:]]

    lr = hyper.learning_rate
    losses = [half_sse(model, tr)]
    best_val, best_theta, stale = np.inf, model.theta.copy(), 0
    for epoch in range(1, hyper.epochs + 1):
        saved = model.theta.copy()
        sgd_epoch(model, tr, rng.permutation(len(tr)), lr)
        loss = half_sse(model, tr)
        if not np.isfinite(loss):
            raise TrainingError(f"training loss became non-finite at epoch {epoch}", epoch)
        if loss > losses[-1]:
            model.theta = saved
            lr *= 0.5
            log.debug("epoch %d: loss rose, learning rate -> %g", epoch, lr)
            if lr < hyper.min_learning_rate:
                break
            continue
        losses.append(loss)
        if n_val and epoch % hyper.check_every == 0:
            v = rmse(model, val)
            if v < best_val:
                best_val, best_theta, stale = v, model.theta.copy(), 0
            else:
                stale += 1
                if stale >= hyper.patience:
                    log.info("early stop at epoch %d", epoch)
                    break
    if n_val:
        model.theta = best_theta
    model.history = {
        "epochs_run": epoch,
        "final_learning_rate": lr,
        "train_loss": losses,
        "train_rmse": rmse(model, Z),
        "validation_rmse": rmse(model, val) if n_val else None,
        "test_rmse": None if Z_test is None else rmse(model, Z_test),
        "test_explained_variance": (None if Z_test is None
                                    else explained_variance(model, Z_test)),
    }
    return model


def train_autoencoder(data, stats, bottleneck, hyper=None, test_data=None):
    """Normalise ``data`` (a Dataset or raw feature rows) with ``stats`` and fit.

    ``test_data`` (trajectories or raw rows) gives the held-out RMSE recorded
    in ``model.history``.
    """
    Z = normalize(_raw_features(data), stats)
    if bottleneck >= Z.shape[1]:
        raise ConfigurationError("bottleneck must be smaller than the input width")
    Z_test = None
    if test_data is not None:
        if isinstance(test_data, (list, tuple)):
            test_data = np.vstack([t.features for t in test_data])
        Z_test = normalize(test_data, stats)
    model = fit(Z, bottleneck, hyper, Z_test=Z_test)
    model.stats = stats
    log.info("codec |A'|=%d train RMSE %.4f test RMSE %s", bottleneck,
             model.history["train_rmse"], model.history["test_rmse"])
    return model


def encode_states(features, model):
    """Raw motor-sensory rows -> reduced coordinates via the model's stats."""
    return encode(normalize(features, model.stats), model)


def decode_states(reduced, model):
    """Reduced coordinates -> raw motor-sensory rows."""
    return denormalize(decode(reduced, model), model.stats)

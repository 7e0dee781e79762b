"""Weighted multinomial logistic regression trained with mini-batch SGD.

The objective is weighted cross-entropy plus an L2 penalty:

    loss(W, b) = -sum_i w_i * ln softmax(x_i W + b)[y_i] / sum_i w_i
                 + l2 * ||W||^2

Weights are initialized to zero (the objective is convex, so initialization
is immaterial and this removes a randomness source).  Shuffling is keyed by
(seed, epoch); early stopping tracks mean loss on the validation set when
given, otherwise on the training set, and the parameters from the best epoch
are returned.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field

import numpy as np
import scipy.sparse as sp

MODEL_FORMAT_VERSION = 1


@dataclass
class ClassifierConfig:
    learning_rate: float = 1e-2
    epochs: int = 20
    patience: int = 5
    batch_size: int = 32
    l2: float = 0.0
    seed: int = 0

    def __post_init__(self):
        if self.learning_rate <= 0:
            raise ValueError("learning_rate must be positive")
        if self.epochs < 1 or self.patience < 1 or self.batch_size < 1:
            raise ValueError("epochs, patience and batch_size must be >= 1")
        if self.l2 < 0:
            raise ValueError("l2 must be nonnegative")


@dataclass
class Model:
    weights: np.ndarray       # V x K
    bias: np.ndarray          # K
    training_log: list = field(default_factory=list)


def _log_softmax(logits: np.ndarray) -> np.ndarray:
    m = logits.max(axis=1, keepdims=True)
    lse = m + np.log(np.exp(logits - m).sum(axis=1, keepdims=True))
    return logits - lse


def loss_and_grad(weights, bias, x, y, sample_weights, l2):
    """Weighted cross-entropy loss with L2 penalty, plus analytic gradients."""
    n = x.shape[0]
    logits = x @ weights + bias
    logp = _log_softmax(logits)
    wsum = sample_weights.sum()
    loss = -(sample_weights * logp[np.arange(n), y]).sum() / wsum
    loss += l2 * (weights ** 2).sum()

    g = np.exp(logp)
    g[np.arange(n), y] -= 1.0
    g *= (sample_weights / wsum)[:, None]
    gw = x.T @ g + 2.0 * l2 * weights
    gb = g.sum(axis=0)
    return loss, gw, gb


def _mean_loss(weights, bias, x, y, sample_weights, l2):
    n = x.shape[0]
    logp = _log_softmax(x @ weights + bias)
    wsum = sample_weights.sum()
    return float(
        -(sample_weights * logp[np.arange(n), y]).sum() / wsum + l2 * (weights ** 2).sum()
    )


def _as_labels(labels) -> np.ndarray:
    if hasattr(labels, "labels"):
        return np.asarray(labels.labels, dtype=np.int64)
    return np.asarray(labels, dtype=np.int64)


def train(features, labels, sample_weights=None, cfg: ClassifierConfig | None = None,
          val=None, num_classes: int | None = None) -> Model:
    """Fit by mini-batch SGD and return the best-epoch parameters.

    ``val`` is an optional ``(features, labels)`` pair used for early
    stopping.  Per-batch gradients are normalized by the batch weight sum, so
    uniformly scaling all sample weights leaves the trajectory unchanged and
    zero-weight samples are inert.
    """
    cfg = cfg or ClassifierConfig()
    y = _as_labels(labels)
    n = features.shape[0]
    if len(y) != n:
        raise ValueError("feature and label lengths disagree")
    k = int(num_classes if num_classes is not None else y.max() + 1)
    if sample_weights is None:
        sw = np.ones(n)
    else:
        sw = np.asarray(sample_weights, dtype=float)
        if (sw < 0).any():
            raise ValueError("sample weights must be nonnegative")
        if sw.sum() == 0:
            raise ValueError("sample weights must not all be zero")

    w = np.zeros((features.shape[1], k))
    b = np.zeros(k)
    best_loss = np.inf
    best_w, best_b = w.copy(), b.copy()
    bad_epochs = 0
    log: list[float] = []

    if val is not None:
        val_x, val_y = val[0], _as_labels(val[1])
        val_w = np.ones(len(val_y))

    for epoch in range(cfg.epochs):
        rng = np.random.default_rng([cfg.seed, epoch])
        perm = rng.permutation(n)
        for start in range(0, n, cfg.batch_size):
            idx = perm[start:start + cfg.batch_size]
            bw = sw[idx]
            if bw.sum() == 0:
                continue
            loss, gw, gb = loss_and_grad(w, b, features[idx], y[idx], bw, cfg.l2)
            if not np.isfinite(loss):
                raise RuntimeError(f"non-finite loss at epoch {epoch}; learning rate too large?")
            w = w - cfg.learning_rate * gw
            b = b - cfg.learning_rate * gb
        if val is not None:
            epoch_loss = _mean_loss(w, b, val_x, val_y, val_w, cfg.l2)
        else:
            epoch_loss = _mean_loss(w, b, features, y, sw, cfg.l2)
        if not np.isfinite(epoch_loss):
            raise RuntimeError(f"non-finite loss at epoch {epoch}; learning rate too large?")
        log.append(epoch_loss)
        if epoch_loss < best_loss:
            best_loss = epoch_loss
            best_w, best_b = w.copy(), b.copy()
            bad_epochs = 0
        else:
            bad_epochs += 1
            if bad_epochs >= cfg.patience:
                break

    return Model(weights=best_w, bias=best_b, training_log=log)


def predict_proba(model: Model, features) -> np.ndarray:
    """Softmax class probabilities, one row per sample, rows summing to 1."""
    if features.shape[1] != model.weights.shape[0]:
        raise ValueError("feature width does not match model")
    return np.exp(_log_softmax(features @ model.weights + model.bias))


def save_model(model: Model, path) -> None:
    """Serialize to a versioned JSON artifact; floats round-trip exactly."""
    payload = {
        "format_version": MODEL_FORMAT_VERSION,
        "weights": model.weights.tolist(),
        "bias": model.bias.tolist(),
        "training_log": model.training_log,
    }
    with open(path, "w", encoding="utf-8") as f:
        json.dump(payload, f)


def load_model(path) -> Model:
    with open(path, encoding="utf-8") as f:
        payload = json.load(f)
    if payload.get("format_version") != MODEL_FORMAT_VERSION:
        raise ValueError(f"unsupported model format version {payload.get('format_version')}")
    return Model(
        weights=np.array(payload["weights"], dtype=float),
        bias=np.array(payload["bias"], dtype=float),
        training_log=list(payload["training_log"]),
    )

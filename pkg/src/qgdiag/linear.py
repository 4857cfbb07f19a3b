"""Full-batch logistic regression, shared by the identifier and verifier.

Loss is the mean binary cross-entropy over samples *and* labels plus an L2
penalty on the weights (biases are not penalized):

    L(W, b) = (1 / (n * L)) * sum_ik BCE(sigmoid(x_i . w_k + b_k), y_ik)
              + (l2 / 2) * ||W||^2

Training is deterministic: zero initialization, fixed epoch count, no
shuffling, so identical inputs yield bit-identical parameters.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from typing import Callable, List, Optional, Tuple

import numpy as np

__all__ = ["Hyperparameters", "sigmoid", "loss_and_gradient", "fit_logistic", "FitResult"]


@dataclass(frozen=True)
class Hyperparameters:
    learning_rate: float = 0.5
    epochs: int = 2000
    l2: float = 1e-3
    seed: int = 0
    # Dev metric cadence for early stopping; ignored when no dev callback.
    eval_every: int = 10


def sigmoid(z: np.ndarray) -> np.ndarray:
    out = np.empty_like(z, dtype=float)
    pos = z >= 0
    out[pos] = 1.0 / (1.0 + np.exp(-z[pos]))
    ez = np.exp(z[~pos])
    out[~pos] = ez / (1.0 + ez)
    return out


def _bce(p: np.ndarray, y: np.ndarray) -> np.ndarray:
    # Clip to dodge log(0) at saturation; interior probabilities are exact.
    p = np.clip(p, 1e-12, 1.0 - 1e-12)
    return -(y * np.log(p) + (1.0 - y) * np.log(1.0 - p))


def loss_and_gradient(
    weights: np.ndarray,
    bias: np.ndarray,
    x: np.ndarray,
    y: np.ndarray,
    l2: float,
) -> Tuple[float, np.ndarray, np.ndarray]:
    """Loss plus exact analytic gradients.

    weights: (L, D); bias: (L,); x: (n, D); y: (n, L) in {0, 1}.
    """
    if x.shape[0] == 0:
        raise ValueError("batch must be non-empty")
    n, num_labels = y.shape
    probs = sigmoid(x @ weights.T + bias)
    loss = float(_bce(probs, y).mean()) + 0.5 * l2 * float((weights ** 2).sum())
    residual = (probs - y) / (n * num_labels)
    grad_w = residual.T @ x + l2 * weights
    grad_b = residual.sum(axis=0)
    if not np.isfinite(loss):
        raise FloatingPointError("non-finite loss; lower the learning rate")
    return loss, grad_w, grad_b


@dataclass
class FitResult:
    weights: np.ndarray
    bias: np.ndarray
    loss_curve: List[float] = field(default_factory=list)
    best_epoch: Optional[int] = None  # set when early stopping was active
    dev_curve: List[Tuple[int, float]] = field(default_factory=list)


def fit_logistic(
    x: np.ndarray,
    y: np.ndarray,
    h: Hyperparameters,
    dev_metric: Optional[Callable[[np.ndarray, np.ndarray], float]] = None,
) -> FitResult:
    """Gradient descent from zero init for ``h.epochs`` full-batch steps.

    When ``dev_metric`` is given it is called with the current (weights, bias)
    every ``h.eval_every`` epochs and at the end; the parameters with the
    highest metric win (ties go to the earliest epoch).
    """
    if x.shape[0] == 0:
        raise ValueError("training data must be non-empty")
    n, dim = x.shape
    num_labels = y.shape[1]
    weights = np.zeros((num_labels, dim))
    bias = np.zeros(num_labels)
    result = FitResult(weights=weights, bias=bias)

    best_score = -np.inf
    best_params: Optional[Tuple[np.ndarray, np.ndarray, int]] = None

    def consider(epoch: int) -> None:
        nonlocal best_score, best_params
        score = dev_metric(weights, bias)
        result.dev_curve.append((epoch, score))
        if score > best_score:
            best_score = score
            best_params = (weights.copy(), bias.copy(), epoch)

    for epoch in range(h.epochs):
        loss, grad_w, grad_b = loss_and_gradient(weights, bias, x, y, h.l2)
        result.loss_curve.append(loss)
        weights -= h.learning_rate * grad_w
        bias -= h.learning_rate * grad_b
        if dev_metric is not None and (epoch + 1) % h.eval_every == 0:
            consider(epoch + 1)
    final_loss, _, _ = loss_and_gradient(weights, bias, x, y, h.l2)
    result.loss_curve.append(final_loss)
    if dev_metric is not None:
        if h.epochs % h.eval_every != 0 or h.epochs == 0:
            consider(h.epochs)
        assert best_params is not None
        weights, bias, best_epoch = best_params
        result.best_epoch = best_epoch
    result.weights = weights
    result.bias = bias
    return result

"""Multinomial logistic regression trained with mini-batch Adam.

Stands in for the deep models on the library side: same training protocol
(cross-entropy loss, stratified 80:20 train/validation split, early
stopping on validation accuracy with best-epoch restore), but a convex
model that trains in seconds on flattened feature images.
"""

import math
from dataclasses import dataclass, field
from typing import Optional

import numpy as np

from .dataset import N_CLASSES
from .errors import (
    DegenerateLabels,
    DimensionMismatch,
    LengthMismatch,
    NoErrors,
    NonFiniteLoss,
)


@dataclass(frozen=True)
class TrainConfig:
    batch_size: int = 256
    learning_rate: float = 1e-3
    beta1: float = 0.9
    beta2: float = 0.999
    epsilon: float = 1e-8
    val_fraction: float = 0.2
    patience: int = 10
    max_epochs: int = 500
    seed: int = 0

    def __post_init__(self):
        if not 0.0 < self.val_fraction < 1.0:
            raise ValueError("val_fraction must be in (0, 1)")
        if self.patience < 1 or self.max_epochs < 1 or self.batch_size < 1:
            raise ValueError("patience, max_epochs and batch_size must be positive")


@dataclass
class BaselineModel:
    weights: np.ndarray  # (feature_dim, N_CLASSES)
    bias: np.ndarray  # (N_CLASSES,)
    feature_spec: str = ""
    history: Optional[dict] = field(default=None, repr=False)

    @property
    def feature_dim(self) -> int:
        return self.weights.shape[0]


@dataclass(frozen=True)
class ConfusionMatrix:
    counts: np.ndarray  # (N_CLASSES, N_CLASSES), rows true, columns predicted

    @property
    def total(self) -> int:
        return int(self.counts.sum())

    @property
    def accuracy(self) -> float:
        return float(np.trace(self.counts)) / self.total


def softmax(logits):
    z = logits - logits.max(axis=1, keepdims=True)
    e = np.exp(z)
    return e / e.sum(axis=1, keepdims=True)


def cross_entropy_and_grad(weights, bias, features, labels):
    """Mean cross-entropy and its analytic gradients."""
    n = len(labels)
    probs = softmax(features @ weights + bias)
    loss = -np.mean(np.log(np.maximum(probs[np.arange(n), labels], 1e-300)))
    probs[np.arange(n), labels] -= 1.0
    probs /= n
    return loss, features.T @ probs, probs.sum(axis=0)


def stratified_split(labels, val_fraction, rng):
    """Per-class 80:20 split; proportions preserved to within one sample."""
    train_idx, val_idx = [], []
    for cls in np.unique(labels):
        idx = rng.permutation(np.flatnonzero(labels == cls))
        n_val = int(np.floor(len(idx) * val_fraction + 0.5))
        val_idx.extend(idx[:n_val])
        train_idx.extend(idx[n_val:])
    if not val_idx:  # tiny corpora: keep the monitor non-empty
        val_idx.append(train_idx.pop())
    if not train_idx:
        train_idx.append(val_idx.pop())
    return np.sort(np.asarray(train_idx)), np.sort(np.asarray(val_idx))


def train_baseline(features, labels, config: TrainConfig,
                   feature_spec: str = "") -> BaselineModel:
    """Fit softmax regression with Adam and early stopping.

    Deterministic for a fixed seed.  The returned model carries the
    parameters of the best-validation-accuracy epoch and a training
    history (per-epoch loss and validation accuracy).
    """
    x = np.asarray(features, dtype=float)
    y = np.asarray(labels, dtype=int)
    if x.ndim != 2 or len(x) != len(y):
        raise DimensionMismatch("features must be (n, d) aligned with labels")
    if len(np.unique(y)) < 2:
        raise DegenerateLabels("training needs at least 2 distinct classes")
    if y.min() < 0 or y.max() >= N_CLASSES:
        raise DegenerateLabels(f"labels must lie in [0, {N_CLASSES})")

    rng = np.random.default_rng(config.seed)
    train_idx, val_idx = stratified_split(y, config.val_fraction, rng)
    x_train, y_train = x[train_idx], y[train_idx]
    x_val, y_val = x[val_idx], y[val_idx]

    d = x.shape[1]
    w = np.zeros((d, N_CLASSES))
    b = np.zeros(N_CLASSES)
    m_w = np.zeros_like(w); v_w = np.zeros_like(w)
    m_b = np.zeros_like(b); v_b = np.zeros_like(b)
    step = 0

    best = (w.copy(), b.copy())
    best_acc = -1.0
    best_epoch = -1
    bad_epochs = 0
    losses, val_accs = [], []

    for epoch in range(config.max_epochs):
        order = rng.permutation(len(y_train))
        epoch_loss = 0.0
        for start in range(0, len(order), config.batch_size):
            batch = order[start:start + config.batch_size]
            loss, g_w, g_b = cross_entropy_and_grad(w, b, x_train[batch], y_train[batch])
            if not math.isfinite(loss):
                raise NonFiniteLoss(f"loss became non-finite at epoch {epoch}")
            epoch_loss += loss * len(batch)
            step += 1
            for g, mm, vv, param in ((g_w, m_w, v_w, w), (g_b, m_b, v_b, b)):
                mm *= config.beta1; mm += (1 - config.beta1) * g
                vv *= config.beta2; vv += (1 - config.beta2) * g * g
                m_hat = mm / (1 - config.beta1 ** step)
                v_hat = vv / (1 - config.beta2 ** step)
                param -= config.learning_rate * m_hat / (np.sqrt(v_hat) + config.epsilon)
        losses.append(epoch_loss / len(y_train))

        val_acc = float(np.mean(predict_logits(w, b, x_val).argmax(axis=1) == y_val))
        val_accs.append(val_acc)
        if val_acc > best_acc:
            best_acc = val_acc
            best = (w.copy(), b.copy())
            best_epoch = epoch
            bad_epochs = 0
        else:
            bad_epochs += 1
            if bad_epochs >= config.patience:
                break

    return BaselineModel(
        weights=best[0], bias=best[1], feature_spec=feature_spec,
        history={
            "train_loss": losses,
            "val_accuracy": val_accs,
            "best_epoch": best_epoch,
            "best_val_accuracy": best_acc,
            "epochs_run": len(losses),
        })


def predict_logits(weights, bias, features):
    return features @ weights + bias


def predict(model: BaselineModel, features) -> np.ndarray:
    """Class indices by row-wise argmax; ties go to the lower index."""
    x = np.asarray(features, dtype=float)
    if x.ndim != 2 or x.shape[1] != model.feature_dim:
        raise DimensionMismatch(
            f"features must be (m, {model.feature_dim}), got {x.shape}")
    return predict_logits(model.weights, model.bias, x).argmax(axis=1)


def confusion_matrix(true_labels, predicted) -> ConfusionMatrix:
    t = np.asarray(true_labels, dtype=int)
    p = np.asarray(predicted, dtype=int)
    if len(t) != len(p):
        raise LengthMismatch(f"got {len(t)} true labels but {len(p)} predictions")
    counts = np.zeros((N_CLASSES, N_CLASSES), dtype=int)
    np.add.at(counts, (t, p), 1)
    return ConfusionMatrix(counts=counts)


def top_confusable_pairs(cm: ConfusionMatrix, k: int = 5):
    """Unordered letter pairs ranked by share of total off-diagonal error.

    Returns [((letter_a, letter_b), percent), ...] sorted by descending
    share, alphabetical pair on ties.
    """
    from .dataset import LETTERS

    counts = cm.counts
    off_total = counts.sum() - np.trace(counts)
    if off_total == 0:
        raise NoErrors("confusion matrix has no off-diagonal mass")
    pairs = []
    for i in range(N_CLASSES):
        for j in range(i + 1, N_CLASSES):
            mass = counts[i, j] + counts[j, i]
            if mass:
                pairs.append(((LETTERS[i], LETTERS[j]), 100.0 * mass / off_total))
    pairs.sort(key=lambda item: (-item[1], item[0]))
    return pairs[:k]

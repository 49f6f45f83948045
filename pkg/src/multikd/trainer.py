"""Distillation losses with analytic gradients and a small SGD trainer.

The student is a two-layer relu classifier, deliberately tiny: large
enough that soft targets have headroom over one-hot labels, small
enough that full finite-difference gradient checks stay cheap.

The total loss is alpha * cross-entropy + (1 - alpha) * distillation
term. The cross-entropy always uses plain (tau = 1) student
probabilities; only the distillation term is temperature-softened and
carries the tau^2 prefactor. Strategy NONE trains on the plain
cross-entropy alone (alpha does not apply; this is the baseline).
"""

from __future__ import annotations

import time
from dataclasses import dataclass

import numpy as np

from . import config as cfg
from .ensemble import TargetSet, validate_labels
from .errors import NumericalError, ValidationError
from .numerics import EPS, kl_rows, softmax_t
from .rng import SplitMix64


@dataclass
class StudentModel:
    """Parameters of logits = w2 @ relu(w1 @ x + b1) + b2."""

    w1: np.ndarray  # hidden x d_in
    b1: np.ndarray  # hidden
    w2: np.ndarray  # classes x hidden
    b2: np.ndarray  # classes

    @property
    def d_in(self) -> int:
        return self.w1.shape[1]

    @property
    def hidden_dim(self) -> int:
        return self.w1.shape[0]

    @property
    def n_classes(self) -> int:
        return self.w2.shape[0]

    def copy(self) -> "StudentModel":
        return StudentModel(self.w1.copy(), self.b1.copy(), self.w2.copy(), self.b2.copy())


@dataclass
class Batch:
    features: np.ndarray
    labels: np.ndarray
    targets: TargetSet


@dataclass
class TrainResult:
    model: StudentModel
    loss_trace: list[float]
    epoch_seconds: list[float]


def init_student(d_in: int, hidden_dim: int, n_classes: int, prng: SplitMix64) -> StudentModel:
    """Weights uniform in [-1/sqrt(fan_in), +1/sqrt(fan_in)], zero biases.

    Draw order is fixed (w1 row-major, then w2 row-major) so a given
    generator state always yields the same model.
    """
    if min(d_in, hidden_dim, n_classes) < 1:
        raise ValidationError("model dimensions must be positive")

    def uniform_matrix(rows: int, columns: int, bound: float) -> np.ndarray:
        out = np.empty((rows, columns), dtype=np.float64)
        for i in range(rows):
            for j in range(columns):
                out[i, j] = (2.0 * prng.uniform() - 1.0) * bound
        return out

    w1 = uniform_matrix(hidden_dim, d_in, 1.0 / np.sqrt(d_in))
    w2 = uniform_matrix(n_classes, hidden_dim, 1.0 / np.sqrt(hidden_dim))
    return StudentModel(w1, np.zeros(hidden_dim), w2, np.zeros(n_classes))


def _forward_cached(model: StudentModel, features: np.ndarray):
    pre = features @ model.w1.T + model.b1
    hidden = np.maximum(pre, 0.0)
    return hidden @ model.w2.T + model.b2, hidden, pre


def forward(model: StudentModel, features) -> np.ndarray:
    """Student logits for a B x D feature matrix (or a single row)."""
    arr = np.asarray(features, dtype=np.float64)
    squeeze = arr.ndim == 1
    if squeeze:
        arr = arr[None, :]
    if arr.shape[1] != model.d_in:
        raise ValidationError(f"features have {arr.shape[1]} dims, model expects {model.d_in}")
    logits = _forward_cached(model, arr)[0]
    return logits[0] if squeeze else logits


def ce_loss(student_probs, labels) -> float:
    """Mean negative log-probability of the true class."""
    probs = np.asarray(student_probs, dtype=np.float64)
    labels = validate_labels(labels, probs.shape[1])
    if labels.size != probs.shape[0]:
        raise ValidationError("labels misaligned with probability rows")
    picked = probs[np.arange(labels.size), labels]
    return float(-np.mean(np.log(np.maximum(picked, EPS))))


def kd_loss(student_logits, target, tau: float) -> float:
    """tau^2 times the mean KL from the target rows to the softened student."""
    logits = np.asarray(student_logits, dtype=np.float64)
    target = np.asarray(target, dtype=np.float64)
    if logits.shape != target.shape:
        raise ValidationError(f"dimension mismatch: logits {logits.shape} vs target {target.shape}")
    student = softmax_t(logits, tau)
    return float(tau * tau * np.mean(kl_rows(target, student)))


def avg1_loss(student_logits, targets: list[np.ndarray], tau: float) -> float:
    """Equal-weight multi-task distillation: mean of the per-teacher losses."""
    if len(targets) == 0:
        raise ValidationError("avg1_loss needs at least one target matrix")
    return float(np.mean([kd_loss(student_logits, t, tau) for t in targets]))


def total_loss(student_logits, labels, target_set: TargetSet, config: cfg.DistillConfig) -> float:
    if target_set.strategy != config.strategy:
        raise ValidationError(
            f"target set built for {target_set.strategy}, config says {config.strategy}"
        )
    logits = np.asarray(student_logits, dtype=np.float64)
    ce = ce_loss(softmax_t(logits, 1.0), labels)
    if config.strategy == cfg.NONE:
        return ce
    if config.strategy == cfg.AVG1:
        kd = avg1_loss(logits, target_set.targets, config.tau)
    else:
        kd = kd_loss(logits, target_set.targets[0], config.tau)
    return config.alpha * ce + (1.0 - config.alpha) * kd


def loss_gradient(student_logits, labels, target_set: TargetSet, config: cfg.DistillConfig) -> np.ndarray:
    """Exact gradient of total_loss with respect to the student logits.

    Per row: alpha * (p1 - onehot) / N for the cross-entropy part, plus
    (1 - alpha) * tau * (p_tau - target) / N for the distillation part
    (the tau^2 prefactor and the 1/tau softmax chain rule leave one tau).
    AVG1 uses the elementwise mean of its K targets.
    """
    if target_set.strategy != config.strategy:
        raise ValidationError(
            f"target set built for {target_set.strategy}, config says {config.strategy}"
        )
    logits = np.asarray(student_logits, dtype=np.float64)
    labels = validate_labels(labels, logits.shape[1])
    n = logits.shape[0]
    p1 = softmax_t(logits, 1.0)
    ce_grad = p1.copy()
    ce_grad[np.arange(n), labels] -= 1.0
    ce_grad /= n
    if config.strategy == cfg.NONE:
        return ce_grad
    if config.strategy == cfg.AVG1:
        target = np.mean(target_set.targets, axis=0)
    else:
        target = target_set.targets[0]
    p_tau = softmax_t(logits, config.tau)
    kd_grad = (1.0 - config.alpha) * config.tau * (p_tau - target) / n
    return config.alpha * ce_grad + kd_grad


def backward_step(model: StudentModel, batch: Batch, config: cfg.DistillConfig) -> float:
    """One SGD step on a batch; returns the pre-step loss.

    The logit gradient from loss_gradient is pushed through both layers
    analytically; relu uses the zero subgradient at exactly 0.
    """
    logits, hidden, pre = _forward_cached(model, batch.features)
    if not np.isfinite(logits).all():
        raise NumericalError("non-finite student logits; training aborted")
    loss = total_loss(logits, batch.labels, batch.targets, config)
    if not np.isfinite(loss):
        raise NumericalError(f"non-finite loss {loss}; training aborted")
    g_logits = loss_gradient(logits, batch.labels, batch.targets, config)
    if not np.isfinite(g_logits).all():
        raise NumericalError("non-finite logit gradient; training aborted")

    g_w2 = g_logits.T @ hidden
    g_b2 = g_logits.sum(axis=0)
    g_hidden = (g_logits @ model.w2) * (pre > 0.0)
    g_w1 = g_hidden.T @ batch.features
    g_b1 = g_hidden.sum(axis=0)

    lr = config.lr
    model.w2 -= lr * g_w2
    model.b2 -= lr * g_b2
    model.w1 -= lr * g_w1
    model.b1 -= lr * g_b1
    if not (np.isfinite(model.w1).all() and np.isfinite(model.w2).all()):
        raise NumericalError("non-finite parameters after update; training aborted")
    return loss


def parameter_gradients(model: StudentModel, batch: Batch, config: cfg.DistillConfig):
    """Analytic (w1, b1, w2, b2) gradients without updating the model."""
    logits, hidden, pre = _forward_cached(model, batch.features)
    g_logits = loss_gradient(logits, batch.labels, batch.targets, config)
    g_w2 = g_logits.T @ hidden
    g_b2 = g_logits.sum(axis=0)
    g_hidden = (g_logits @ model.w2) * (pre > 0.0)
    g_w1 = g_hidden.T @ batch.features
    g_b1 = g_hidden.sum(axis=0)
    return g_w1, g_b1, g_w2, g_b2


def train(
    model: StudentModel,
    features: np.ndarray,
    labels: np.ndarray,
    target_set: TargetSet,
    config: cfg.DistillConfig,
) -> TrainResult:
    """SGD over epochs * ceil(N / batch) steps, shuffled by config.seed.

    Deterministic: the seed fixes the batch order, and every reduction
    runs in a fixed order, so the final parameters and the loss trace
    are bit-identical across runs. The per-epoch wall-clock times in
    the result are measurements and carry no such guarantee.
    """
    features = np.asarray(features, dtype=np.float64)
    labels = validate_labels(labels, model.n_classes)
    n = features.shape[0]
    if labels.size != n:
        raise ValidationError("features and labels misaligned")
    if target_set.strategy != cfg.NONE:
        for t in target_set.targets:
            if t.shape != (n, model.n_classes):
                raise ValidationError(
                    f"target matrix {t.shape} misaligned with data ({n}, {model.n_classes})"
                )
    prng = SplitMix64(config.seed)
    trace: list[float] = []
    times: list[float] = []
    for _ in range(config.epochs):
        started = time.perf_counter()
        order = np.array(prng.permutation(n), dtype=np.int64)
        step_losses = []
        for lo in range(0, n, config.batch_size):
            idx = order[lo : lo + config.batch_size]
            batch = Batch(features[idx], labels[idx], target_set.slice(idx))
            step_losses.append(backward_step(model, batch, config))
        trace.append(float(np.mean(step_losses)))
        times.append(time.perf_counter() - started)
    return TrainResult(model, trace, times)


def evaluate(model: StudentModel, features, labels) -> float:
    """Top-1 accuracy; argmax over logits (softmax preserves the argmax)."""
    features = np.asarray(features, dtype=np.float64)
    if features.ndim != 2 or features.shape[0] == 0:
        raise ValidationError("evaluate needs a non-empty N x D feature matrix")
    labels = validate_labels(labels, model.n_classes)
    if labels.size != features.shape[0]:
        raise ValidationError("features and labels misaligned")
    preds = np.argmax(_forward_cached(model, features)[0], axis=1)
    return float(np.mean(preds == labels))

"""Probability and divergence kernels.

Every routine here is a pure function of float64 arrays. Distributions
are rows: a valid probability row is nonnegative and sums to 1 within
1e-9. A probability floor EPS is applied only to arguments of log, so
the 0*log(0) = 0 convention survives while log(0) never occurs.

Row functions accept 1-D arrays; softmax_t also broadcasts over the
rows of a 2-D array. Reductions use numpy's fixed evaluation order, so
results are bit-reproducible for a fixed input order.
"""

from __future__ import annotations

import numpy as np

from .errors import ValidationError

EPS = 1e-12
PROB_SUM_TOL = 1e-9


def as_float_array(values, name: str = "values") -> np.ndarray:
    arr = np.asarray(values, dtype=np.float64)
    if arr.size == 0:
        raise ValidationError(f"{name} must be non-empty")
    return arr


def validate_logit_row(values, name: str = "logits") -> np.ndarray:
    arr = as_float_array(values, name)
    if not np.isfinite(arr).all():
        raise ValidationError(f"{name} must be finite (no NaN/Inf)")
    return arr


def validate_prob_row(values, name: str = "probs") -> np.ndarray:
    """Check nonnegativity and unit sum (within 1e-9) of a distribution row."""
    arr = validate_logit_row(values, name)
    if (arr < 0.0).any():
        raise ValidationError(f"{name} has negative entries")
    sums = arr.sum(axis=-1)
    if np.max(np.abs(sums - 1.0)) > PROB_SUM_TOL:
        raise ValidationError(f"{name} rows must sum to 1 within {PROB_SUM_TOL}")
    return arr


def validate_tau(tau: float) -> float:
    tau = float(tau)
    if not np.isfinite(tau) or tau <= 0.0:
        raise ValidationError(f"temperature must be a positive real, got {tau}")
    return tau


def softmax_t(logits, tau: float = 1.0) -> np.ndarray:
    """Temperature-softened softmax, stabilized by max subtraction.

    Works on a single row or row-wise on a matrix. Output rows sum to 1
    within 1e-12 and are invariant to adding a constant to the logits.
    """
    tau = validate_tau(tau)
    arr = validate_logit_row(logits)
    scaled = arr / tau
    shifted = scaled - scaled.max(axis=-1, keepdims=True)
    e = np.exp(shifted)
    return e / e.sum(axis=-1, keepdims=True)


def kl_divergence(q, p) -> float:
    """KL(q || p) = sum q*log(q/p) with 0*log(0)=0 and p floored at EPS."""
    q = validate_prob_row(q, "q")
    p = validate_prob_row(p, "p")
    if q.shape != p.shape:
        raise ValidationError(f"dimension mismatch: {q.shape} vs {p.shape}")
    return float(kl_rows(q, p))


def kl_rows(q: np.ndarray, p: np.ndarray) -> np.ndarray:
    """Row-wise KL for pre-validated stacked distributions (no checks)."""
    log_q = np.log(np.where(q > 0.0, q, 1.0))
    log_p = np.log(np.maximum(p, EPS))
    return (q * (log_q - log_p)).sum(axis=-1)


def cross_entropy_dist(target, pred) -> float:
    """-sum target*log(pred) with pred floored at EPS."""
    target = validate_prob_row(target, "target")
    pred = validate_prob_row(pred, "pred")
    if target.shape != pred.shape:
        raise ValidationError(f"dimension mismatch: {target.shape} vs {pred.shape}")
    return float(cross_entropy_rows(target, pred))


def cross_entropy_rows(target: np.ndarray, pred: np.ndarray) -> np.ndarray:
    """Row-wise cross-entropy for pre-validated stacks (no checks)."""
    return -(target * np.log(np.maximum(pred, EPS))).sum(axis=-1)


def entropy(p) -> float:
    """Shannon entropy -sum p*log(p) in nats, with 0*log(0)=0."""
    p = validate_prob_row(p)
    return float(entropy_rows(p))


def entropy_rows(p: np.ndarray) -> np.ndarray:
    return -(p * np.log(np.where(p > 0.0, p, 1.0))).sum(axis=-1)


def top1(p) -> int:
    """Index of the largest entry; ties break toward the lowest index."""
    arr = as_float_array(p, "row")
    if arr.ndim != 1:
        raise ValidationError("top1 expects a single row")
    return int(np.argmax(arr))

"""Independent high-precision oracles used to freeze expected values.

All routines re-evaluate the exact float64 inputs with 50-digit
decimal arithmetic and plain term-by-term summation, sharing no code
with the implementation under test.
"""

from decimal import Decimal, getcontext

getcontext().prec = 50


def _d(x) -> Decimal:
    return Decimal(float(x))  # exact binary-to-decimal conversion


def dec_softmax(logits, tau):
    exps = [(_d(x) / _d(tau)).exp() for x in logits]
    total = sum(exps)
    return tuple(float(e / total) for e in exps)


def dec_kl(q, p):
    total = Decimal(0)
    for a, b in zip(q, p):
        if a > 0.0:
            total += _d(a) * (_d(a).ln() - _d(b).ln())
    return float(total)


def dec_cross_entropy(target, pred):
    total = Decimal(0)
    for a, b in zip(target, pred):
        if a != 0.0:
            total -= _d(a) * _d(b).ln()
    return float(total)


def dec_entropy(p):
    total = Decimal(0)
    for a in p:
        if a > 0.0:
            total -= _d(a) * _d(a).ln()
    return float(total)


def fd_gradient(fn, x, step=1e-5):
    """Central finite differences of a scalar function of a flat vector."""
    import numpy as np

    x = np.asarray(x, dtype=np.float64)
    grad = np.zeros_like(x)
    for i in range(x.size):
        bumped = x.copy()
        bumped.flat[i] = x.flat[i] + step
        hi = fn(bumped)
        bumped.flat[i] = x.flat[i] - step
        lo = fn(bumped)
        grad.flat[i] = (hi - lo) / (2.0 * step)
    return grad


def rel_err(a, b, floor=1e-6):
    import numpy as np

    a = np.asarray(a, dtype=np.float64)
    b = np.asarray(b, dtype=np.float64)
    denom = np.maximum(np.maximum(np.abs(a), np.abs(b)), floor)
    return float(np.max(np.abs(a - b) / denom))

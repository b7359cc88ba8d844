"""Small-array numerics: a lean log-sum-exp and domain guards.

The solvers here work on alphabets of a handful of symbols; scipy's
logsumexp spends more time in dispatch than in arithmetic at that size, so
the hot loops use this minimal max-shift version instead.
"""

from __future__ import annotations

import numpy as np

NEG_INF = -np.inf

# kernels whose log dynamic range exceeds this stay in log domain
LINEAR_DOMAIN_SPAN = 500.0


def lse(a: np.ndarray, axis: int | None = None) -> np.ndarray | float:
    """log(sum(exp(a))) with max shifting; tolerates -inf entries."""
    m = np.max(a, axis=axis, keepdims=True)
    shift = np.where(np.isfinite(m), m, 0.0)
    with np.errstate(divide="ignore"):
        out = np.log(np.sum(np.exp(a - shift), axis=axis)) + np.squeeze(shift, axis=axis)
    if axis is None:
        return float(out)
    return out


def log_kernel_span(lk: np.ndarray) -> float:
    finite = lk[np.isfinite(lk)]
    if finite.size == 0:
        return np.inf
    return float(finite.max() - finite.min())

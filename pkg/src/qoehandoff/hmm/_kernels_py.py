"""Pure-NumPy forward / forward-backward kernels.

Fallback used when the compiled extension is unavailable (or explicitly
requested via QOEHANDOFF_PURE_PYTHON=1). Both backends share the same
contract: inputs are per-frame emission log-densities, a prior and a
row-stochastic transition matrix; recursions are scaled per step so that
traces of arbitrary length cannot underflow, and the log-evidence is
accumulated from the scaling factors.
"""

from __future__ import annotations

import numpy as np

BACKEND = "python"


def forward(frame_logprob: np.ndarray, prior: np.ndarray,
            tm: np.ndarray) -> tuple[np.ndarray, float]:
    """Filtered state posteriors for each frame plus the total log-evidence."""
    T, N = frame_logprob.shape
    filtered = np.empty((T, N))
    loglik = 0.0
    pred = prior
    for t in range(T):
        m = frame_logprob[t].max()
        a = pred * np.exp(frame_logprob[t] - m)
        c = a.sum()
        filtered[t] = a / c
        loglik += np.log(c) + m
        pred = filtered[t] @ tm
    return filtered, float(loglik)


def forward_backward(frame_logprob: np.ndarray, prior: np.ndarray,
                     tm: np.ndarray) -> tuple[np.ndarray, np.ndarray, float]:
    """Smoothed posteriors and summed pairwise transition posteriors.

    Returns (gamma, xi_sum, loglik) where gamma[t] is the posterior over
    states at frame t given the whole sequence and xi_sum[i, j] is the
    expected number of i->j transitions.
    """
    T, N = frame_logprob.shape
    m = frame_logprob.max(axis=1)
    b = np.exp(frame_logprob - m[:, None])

    alpha = np.empty((T, N))
    scale = np.empty(T)
    a = prior * b[0]
    scale[0] = a.sum()
    alpha[0] = a / scale[0]
    for t in range(1, T):
        a = (alpha[t - 1] @ tm) * b[t]
        scale[t] = a.sum()
        alpha[t] = a / scale[t]
    loglik = float(np.log(scale).sum() + m.sum())

    beta = np.empty((T, N))
    beta[T - 1] = 1.0
    xi_sum = np.zeros((N, N))
    for t in range(T - 2, -1, -1):
        w = b[t + 1] * beta[t + 1]
        beta[t] = (tm @ w) / scale[t + 1]
        xi_sum += np.outer(alpha[t], w) * tm / scale[t + 1]

    gamma = alpha * beta
    gamma /= gamma.sum(axis=1, keepdims=True)
    return gamma, xi_sum, loglik

"""Brute-force reference implementations used as ground truth in tests.

Everything here works on plain float64 numpy arrays with explicit
per-token loops and no masking tricks, and deliberately shares no helper
code with the fast paths, so agreement between the two is evidence
rather than tautology. Performance is a non-goal.
"""

from __future__ import annotations

import math

import numpy as np


def _arr(x) -> np.ndarray:
    return np.asarray(getattr(x, "data", x), dtype=np.float64)


def _softmax(logits: np.ndarray) -> np.ndarray:
    shifted = logits - logits.max()
    e = np.exp(shifted)
    return e / e.sum()


def dense_scout_oracle(xt, p) -> np.ndarray:
    """Checkpoint attention, one explicit softmax per token.

    For token t (1-indexed) the allowed list is the rows of ``xt`` at
    checkpoint positions <= t, in order, followed by row t itself. Each
    row is projected on its own; scores are q.k / sqrt(d).
    """
    x = _arr(xt)
    wq, wk, wv = _arr(p.wq), _arr(p.wk), _arr(p.wv)
    k = int(p.interval)
    n, d = x.shape
    ckpts = [j for j in range(k, n + 1, k)]
    out = np.zeros_like(x)
    for t in range(1, n + 1):
        q = x[t - 1] @ wq
        positions = [j for j in ckpts if j <= t] + [t]
        keys = [x[j - 1] @ wk for j in positions]
        vals = [x[j - 1] @ wv for j in positions]
        logits = np.array([float(np.dot(q, key)) for key in keys]) / math.sqrt(d)
        weights = _softmax(logits)
        acc = np.zeros(d)
        for w_i, v_i in zip(weights, vals):
            acc = acc + w_i * v_i
        out[t - 1] = acc
    return out


def naive_swa(x1, p) -> np.ndarray:
    """Sliding-window attention: token t attends rows t-w .. t, causally."""
    x = _arr(x1)
    wq, wk, wv = _arr(p.wq), _arr(p.wk), _arr(p.wv)
    w = int(p.window)
    n, d = x.shape
    out = np.zeros_like(x)
    for t in range(1, n + 1):
        q = x[t - 1] @ wq
        window = list(range(max(1, t - w), t + 1))
        keys = [x[j - 1] @ wk for j in window]
        vals = [x[j - 1] @ wv for j in window]
        logits = np.array([float(np.dot(q, key)) for key in keys]) / math.sqrt(d)
        weights = _softmax(logits)
        acc = np.zeros(d)
        for w_i, v_i in zip(weights, vals):
            acc = acc + w_i * v_i
        out[t - 1] = acc
    return out


def naive_ssm(x1, p) -> np.ndarray:
    """Selective-decay recurrence, transcribed with per-channel scalar loops.

    Per token t: a = sigmoid(x_t Wa), b = x_t Wb, c = x_t Wc (all length
    N). Channel c keeps its own state h in R^N updated as
    h <- a * h + b * x[t, c]; the output is y[t, c] = c . h.
    """
    x = _arr(x1)
    wa, wb, wc = _arr(p.wa), _arr(p.wb), _arr(p.wc)
    n, d = x.shape
    nstate = wa.shape[1]
    h = [np.zeros(nstate) for _ in range(d)]
    out = np.zeros_like(x)
    for t in range(n):
        a = 1.0 / (1.0 + np.exp(-(x[t] @ wa)))
        b = x[t] @ wb
        c = x[t] @ wc
        for ch in range(d):
            h[ch] = a * h[ch] + b * x[t, ch]
            out[t, ch] = float(np.dot(c, h[ch]))
    return out


def full_causal_attention(x_in, wq_in, wk_in, wv_in) -> np.ndarray:
    """Standard causal attention over every prefix token, per-token loop."""
    x = _arr(x_in)
    wq, wk, wv = _arr(wq_in), _arr(wk_in), _arr(wv_in)
    n, d = x.shape
    out = np.zeros_like(x)
    for t in range(1, n + 1):
        q = x[t - 1] @ wq
        keys = [x[j] @ wk for j in range(t)]
        vals = [x[j] @ wv for j in range(t)]
        logits = np.array([float(np.dot(q, key)) for key in keys]) / math.sqrt(d)
        weights = _softmax(logits)
        acc = np.zeros(d)
        for w_i, v_i in zip(weights, vals):
            acc = acc + w_i * v_i
        out[t - 1] = acc
    return out


def matmul_oracle(a, b) -> np.ndarray:
    """Triple-loop matrix product."""
    a, b = _arr(a), _arr(b)
    m, p = a.shape
    p2, q = b.shape
    assert p == p2
    out = np.zeros((m, q))
    for i in range(m):
        for j in range(q):
            acc = 0.0
            for kk in range(p):
                acc += a[i, kk] * b[kk, j]
            out[i, j] = acc
    return out

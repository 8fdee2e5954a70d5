"""Sparse attention over compressed checkpoint tokens.

Every k-th row of the mixed sequence is kept as a checkpoint. Token t
attends causally to the checkpoints at positions <= t (the checkpoint at
t itself is visible to t) plus a diagonal self term, with one softmax
over the concatenated scores. During incremental decoding only the
projected checkpoint rows are cached, so the cache holds floor(n/k)
entries after n tokens instead of n.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from . import tensor as T
from .errors import ConfigError, InternalError, UsageError
from .tensor import METER, Tensor


@dataclass
class AttnParams:
    wq: Tensor
    wk: Tensor
    wv: Tensor
    interval: int  # checkpoint spacing, >= 1

    def __post_init__(self):
        if self.interval < 1:
            raise ConfigError(f"checkpoint interval must be >= 1, got {self.interval}")


@dataclass
class ScoutScores:
    """Inspection view of one attention call (not on the training fast path).

    ``checkpoint_scores`` holds the scaled, causally masked token-by-
    checkpoint logits (masked entries carry the large negative fill),
    ``self_scores`` the scaled diagonal q.k terms, and ``weights`` the
    row-stochastic softmax over their concatenation.
    """
    checkpoint_scores: np.ndarray
    self_scores: np.ndarray
    weights: np.ndarray


def checkpoint_indices(n: int, k: int) -> list[int]:
    """1-indexed checkpoint positions k, 2k, ..., floor(n/k)*k."""
    if k < 1:
        raise ConfigError(f"checkpoint interval must be >= 1, got {k}")
    if n < 0:
        raise ConfigError(f"sequence length must be >= 0, got {n}")
    return list(range(k, n + 1, k))


def compress(xt: Tensor, idx: list[int]) -> Tensor:
    """Select the rows at the given 1-indexed positions (no pooling)."""
    n = xt.shape[0]
    for i in idx:
        if not (1 <= i <= n):
            raise InternalError(f"checkpoint position {i} outside 1..{n}")
    return T.row_select(xt, [i - 1 for i in idx])


def causal_checkpoint_mask(n: int, idx: list[int]) -> np.ndarray:
    """allowed[t-1][j] is True iff checkpoint position idx[j] <= t."""
    positions = np.asarray(idx, dtype=np.int64)
    tokens = np.arange(1, n + 1, dtype=np.int64)
    return positions[None, :] <= tokens[:, None]


def scout_attention(xt: Tensor, p: AttnParams,
                    return_scores: bool = False):
    """Batch checkpoint attention over a mixed sequence ``xt`` of shape (n, d).

    Output row t is a convex combination of the cached checkpoint values
    at positions <= t and the token's own value row. With no checkpoints
    in range the softmax collapses onto the self term and the output is
    exactly the value projection.
    """
    n, d = xt.shape
    idx = checkpoint_indices(n, p.interval)
    m = len(idx)
    q = T.matmul(xt, p.wq)
    k = T.matmul(xt, p.wk)
    v = T.matmul(xt, p.wv)
    k_c = compress(k, idx)
    v_c = compress(v, idx)
    comp_scores = T.matmul_t(q, k_c)
    keep = causal_checkpoint_mask(n, idx)
    comp_scores = T.masked_fill(comp_scores, keep, T.mask_fill_value(xt.dtype))
    self_scores = T.row_sum(T.mul(q, k))
    logits = T.scale(T.concat_cols(comp_scores, T.as_column(self_scores)),
                     1.0 / math.sqrt(d))
    weights = T.softmax_rows(logits)
    comp_weights = T.slice_cols(weights, 0, m)
    self_weights = T.take_col(weights, m)
    out = T.add(T.matmul(comp_weights, v_c), T.scale_rows(v, self_weights))
    if return_scores:
        scores = ScoutScores(
            checkpoint_scores=logits.data[:, :m].copy(),
            self_scores=logits.data[:, m].copy(),
            weights=weights.data.copy(),
        )
        return out, scores
    return out


class CheckpointCache:
    """Projected checkpoint keys/values seen so far, for incremental decoding.

    Holds exactly floor(pos / interval) entries after ``pos`` tokens.
    ``score_dots`` counts every query-key dot product actually computed,
    which is the unit the efficiency accounting is stated in.
    """

    def __init__(self, interval: int, dtype=np.float64):
        if interval < 1:
            raise ConfigError(f"checkpoint interval must be >= 1, got {interval}")
        self.interval = interval
        self.dtype = np.dtype(dtype)
        self.keys: list[np.ndarray] = []
        self.values: list[np.ndarray] = []
        self.positions: list[int] = []
        self.pos = 0
        self.score_dots = 0
        self._tracked = 0

    def __del__(self):
        try:
            METER.sub(self._tracked)
        except Exception:
            pass

    @property
    def entries(self) -> int:
        return len(self.positions)

    @property
    def cached_bytes(self) -> int:
        return self._tracked

    def _append(self, k_row: np.ndarray, v_row: np.ndarray, position: int) -> None:
        self.keys.append(k_row)
        self.values.append(v_row)
        self.positions.append(position)
        added = k_row.nbytes + v_row.nbytes
        self._tracked += added
        METER.add(added)

    def step(self, xt_row: np.ndarray, p: AttnParams) -> np.ndarray:
        """Attention output for the next token row; appends its checkpoint first
        when the new position is a multiple of the interval (the mask is
        inclusive, so a token sees its own checkpoint)."""
        t = self.pos + 1
        d = xt_row.shape[0]
        q = T._mm(xt_row, p.wq.data)
        k = T._mm(xt_row, p.wk.data)
        v = T._mm(xt_row, p.wv.data)
        if t % self.interval == 0:
            self._append(k, v, t)
        m = len(self.keys)
        self_score = (q * k).astype(np.float64, copy=False).sum(dtype=np.float64)
        self_score = np.asarray([self_score], dtype=self.dtype)
        if m:
            comp = T._mm(np.stack(self.keys), q)
            logits = np.concatenate([comp, self_score])
        else:
            logits = self_score
        logits = logits * self.dtype.type(1.0 / math.sqrt(d))
        self.score_dots += m + 1
        weights = T.softmax64(logits, self.dtype)
        if m:
            out = T._mm(weights[:m], np.stack(self.values)) + weights[m] * v
        else:
            out = weights[0] * v
        self.pos = t
        return out.astype(self.dtype, copy=False)


def scout_attention_step(cache: CheckpointCache, xt_t: Tensor, p: AttnParams,
                         position: int | None = None) -> tuple[CheckpointCache, Tensor]:
    """Incremental form of ``scout_attention``; returns row t of the batch result."""
    if position is not None and position != cache.pos + 1:
        raise UsageError(f"cache expected position {cache.pos + 1}, got {position}")
    row = xt_t.data if isinstance(xt_t, Tensor) else np.asarray(xt_t)
    out = cache.step(row, p)
    return cache, Tensor(out)

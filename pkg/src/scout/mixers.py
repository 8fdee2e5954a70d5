"""Linear token mixers and the pre-attention block.

Two interchangeable mixers inject recent context into each token in
linear-ish time: causal sliding-window attention (``swa``) and a
selective-decay state-space recurrence (``ssm``). ``ltm_block`` wraps a
mixer with the surrounding norms, residuals, and the optional
intermediate MLP.
"""

from __future__ import annotations

import math
from collections import deque
from dataclasses import dataclass, field

import numpy as np

from . import tensor as T
from .errors import ShapeError, UsageError
from .tensor import Tensor


@dataclass
class SwaParams:
    """Projections for sliding-window attention over the last ``window`` tokens plus self."""
    wq: Tensor
    wk: Tensor
    wv: Tensor
    window: int

    def __post_init__(self):
        if self.window < 0:
            raise ShapeError(f"window must be >= 0, got {self.window}")


@dataclass
class SsmParams:
    """Input-dependent generators for the selective recurrence.

    Each of wa/wb/wc maps a token row (d,) to a length-N vector: the
    sigmoid of x@wa is the per-step decay, x@wb the input gate, x@wc the
    readout. All d channels share these vectors but keep separate state.
    """
    wa: Tensor
    wb: Tensor
    wc: Tensor

    @property
    def state_size(self) -> int:
        return self.wa.shape[1]


@dataclass
class NormParams:
    gain: Tensor
    bias: Tensor


@dataclass
class MlpParams:
    w_in: Tensor
    w_out: Tensor


@dataclass
class BlockParams:
    """Everything ltm_block needs: mixer, norms, and the optional mid MLP."""
    norm_in: NormParams
    mixer: SwaParams | SsmParams
    use_intermediate_mlp: bool
    norm_mid: NormParams | None = None
    mlp_mid: MlpParams | None = None


def mlp(x: Tensor, p: MlpParams) -> Tensor:
    return T.matmul(T.silu(T.matmul(x, p.w_in)), p.w_out)


def swa_forward(x1: Tensor, p: SwaParams) -> Tensor:
    """Causal attention restricted to each token's last ``window`` predecessors plus itself."""
    n, d = x1.shape
    q = T.matmul(x1, p.wq)
    k = T.matmul(x1, p.wk)
    v = T.matmul(x1, p.wv)
    scores = T.scale(T.matmul_t(q, k), 1.0 / math.sqrt(d))
    offsets = np.arange(n)[:, None] - np.arange(n)[None, :]
    keep = (offsets >= 0) & (offsets <= p.window)
    weights = T.softmax_rows(T.masked_fill(scores, keep, T.mask_fill_value(x1.dtype)))
    return T.matmul(weights, v)


def ssm_forward(x1: Tensor, p: SsmParams) -> Tensor:
    """Sequential scan of the selective recurrence; h starts at zero."""
    n, d = x1.shape
    h = Tensor(np.zeros((d, p.state_size), dtype=x1.dtype))
    rows = []
    for t in range(n):
        xt = T.take_row(x1, t)
        h, yt = _ssm_step_tensors(h, xt, p)
        rows.append(yt)
    return T.stack_rows(rows)


def _ssm_step_tensors(h: Tensor, xt: Tensor, p: SsmParams) -> tuple[Tensor, Tensor]:
    a = T.sigmoid(T.matmul(xt, p.wa))
    b = T.matmul(xt, p.wb)
    c = T.matmul(xt, p.wc)
    h_next = T.add(T.scale_cols(h, a), T.outer(xt, b))
    return h_next, T.matmul(h_next, c)


def ltm_block(x: Tensor, p: BlockParams) -> Tensor:
    """Norm, mix, residual, then (optionally) a second norm + MLP + residual."""
    x1 = T.layer_norm(x, p.norm_in.gain, p.norm_in.bias)
    if isinstance(p.mixer, SwaParams):
        mixed = swa_forward(x1, p.mixer)
    else:
        mixed = ssm_forward(x1, p.mixer)
    x2 = T.add(x, mixed)
    if not p.use_intermediate_mlp:
        return x2
    return T.add(x2, mlp(T.layer_norm(x2, p.norm_mid.gain, p.norm_mid.bias), p.mlp_mid))


# ---------------------------------------------------------------------------
# incremental stepping


@dataclass
class SwaState:
    """Ring buffer of the last ``window`` post-norm rows, oldest first."""
    window: int
    rows: deque = field(default_factory=deque)
    pos: int = 0

    @property
    def buffered(self) -> int:
        return len(self.rows)


@dataclass
class SsmState:
    h: np.ndarray
    pos: int = 0


def init_mixer_state(p: SwaParams | SsmParams, d: int, dtype) -> SwaState | SsmState:
    if isinstance(p, SwaParams):
        return SwaState(window=p.window)
    return SsmState(h=np.zeros((d, p.state_size), dtype=dtype))


def mixer_step(state, x1_t: Tensor, p: SwaParams | SsmParams,
               position: int | None = None):
    """Advance one token; returns (state, row t of the batch forward).

    ``position`` (1-indexed) is validated against the state's counter
    when given.
    """
    if position is not None and position != state.pos + 1:
        raise UsageError(f"mixer_step expected position {state.pos + 1}, got {position}")
    xt = x1_t.data if isinstance(x1_t, Tensor) else np.asarray(x1_t)
    if isinstance(p, SwaParams):
        out = _swa_step(state, xt, p)
    else:
        out = _ssm_step(state, xt, p)
    state.pos += 1
    return state, Tensor(out)


def _swa_step(state: SwaState, xt: np.ndarray, p: SwaParams) -> np.ndarray:
    d = xt.shape[0]
    window_rows = list(state.rows) + [xt]
    xwin = np.stack(window_rows)
    q = T._mm(xt, p.wq.data)
    keys = T._mm(xwin, p.wk.data)
    vals = T._mm(xwin, p.wv.data)
    logits = T._mm(keys, q) * xt.dtype.type(1.0 / math.sqrt(d))
    weights = T.softmax64(logits, xt.dtype)
    out = T._mm(weights, vals)
    if p.window > 0:
        state.rows.append(xt.copy())
        if len(state.rows) > p.window:
            state.rows.popleft()
    return out


def _ssm_step(state: SsmState, xt: np.ndarray, p: SsmParams) -> np.ndarray:
    with np.errstate(over="ignore"):
        a = 1.0 / (1.0 + np.exp(-T._mm(xt, p.wa.data)))
    b = T._mm(xt, p.wb.data)
    c = T._mm(xt, p.wc.data)
    state.h = state.h * a[None, :] + np.outer(xt, b).astype(state.h.dtype)
    return T._mm(state.h, c)

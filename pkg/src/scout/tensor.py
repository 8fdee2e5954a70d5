"""Dense tensors with tape-based reverse-mode autodiff.

Values are numpy arrays of one to three axes (plus 0-d scalars produced
by reductions) in float32 or float64. Every operation checks that its
result is finite, so NaN/Inf surface as a NumericError at the op that
produced them instead of propagating silently.

Numerics contract: float64 matmuls run through einsum with a fixed
summation order, which makes every output row bit-independent of how
many other rows are in the batch (a prefix of the input yields a bitwise
prefix of the output). float32 tensors store 4-byte values but matmuls
accumulate in float64 and round once per op, so they inherit the same
stability at float32 resolution.
"""

from __future__ import annotations

import hashlib
import json
import math
import threading
from contextlib import contextmanager
from typing import Callable, Iterable, Sequence

import numpy as np

from .errors import NumericError, ShapeError, UsageError

FLOAT_DTYPES = {32: np.float32, 64: np.float64}


def dtype_for(precision: int) -> np.dtype:
    try:
        return np.dtype(FLOAT_DTYPES[precision])
    except KeyError:
        raise UsageError(f"precision must be 32 or 64, got {precision!r}") from None


def mask_fill_value(dtype) -> float:
    # Large negative but finite: exp() underflows to exactly 0 after the
    # row-max shift, and adding ordinary scores cannot overflow to -inf.
    return float(np.finfo(dtype).min / 4)


class MemoryMeter:
    """Tracks live bytes held by tensors and caches, and the peak."""

    def __init__(self):
        self.live = 0
        self.peak = 0

    def add(self, nbytes: int) -> None:
        self.live += nbytes
        if self.live > self.peak:
            self.peak = self.live

    def sub(self, nbytes: int) -> None:
        self.live -= nbytes

    def reset_peak(self) -> None:
        self.peak = self.live


METER = MemoryMeter()

_STATE = threading.local()


def grad_enabled() -> bool:
    return getattr(_STATE, "grad_enabled", True)


@contextmanager
def no_grad():
    """Disable graph recording inside the block (inference / finite differences)."""
    prev = grad_enabled()
    _STATE.grad_enabled = False
    try:
        yield
    finally:
        _STATE.grad_enabled = prev


class Tensor:
    """A numpy array plus an optional handle into the autodiff tape.

    Interior nodes keep references to their parents and a vjp closure;
    leaves (parameters, inputs) have neither. Gradients accumulate into
    ``.grad`` when ``backward`` runs.
    """

    __slots__ = ("data", "requires_grad", "grad", "op", "parents", "vjp", "__weakref__")

    def __init__(self, data, requires_grad: bool = False, dtype=None,
                 op: str = "leaf", parents: tuple = (), vjp=None):
        arr = np.asarray(data, dtype=dtype)
        if arr.dtype not in (np.float32, np.float64):
            arr = arr.astype(np.float64)
        if arr.ndim > 3:
            raise ShapeError(f"tensors support at most 3 axes, got shape {arr.shape}")
        self.data = arr
        self.requires_grad = requires_grad
        self.grad: np.ndarray | None = None
        self.op = op
        self.parents = parents
        self.vjp = vjp
        METER.add(arr.nbytes)

    def __del__(self):
        try:
            METER.sub(self.data.nbytes)
        except Exception:
            pass

    @property
    def shape(self):
        return self.data.shape

    @property
    def ndim(self):
        return self.data.ndim

    @property
    def size(self):
        return self.data.size

    @property
    def dtype(self):
        return self.data.dtype

    def item(self) -> float:
        if self.size != 1:
            raise UsageError(f"item() needs a single-element tensor, got shape {self.shape}")
        return float(self.data.reshape(-1)[0])

    def detach(self) -> "Tensor":
        return Tensor(self.data, requires_grad=False)

    def backward(self) -> None:
        backward(self)

    def __repr__(self):
        return f"Tensor(shape={tuple(self.shape)}, dtype={self.data.dtype.name}, op={self.op!r})"

    def __add__(self, other):
        return add(self, other)

    def __sub__(self, other):
        return sub(self, other)

    def __mul__(self, other):
        if isinstance(other, (int, float)):
            return scale(self, other)
        return mul(self, other)

    def __rmul__(self, other):
        return self.__mul__(other)

    def __neg__(self):
        return scale(self, -1.0)

    def __matmul__(self, other):
        return matmul(self, other)


def as_tensor(x, dtype=None) -> Tensor:
    if isinstance(x, Tensor):
        return x
    return Tensor(x, dtype=dtype)


def _check_finite(arr: np.ndarray, op: str) -> None:
    if not np.isfinite(arr).all():
        raise NumericError(f"{op} produced a non-finite value")


def _result(data: np.ndarray, op: str, parents: tuple, vjp) -> Tensor:
    _check_finite(data, op)
    if grad_enabled() and any(p.requires_grad for p in parents):
        return Tensor(data, requires_grad=True, op=op, parents=parents, vjp=vjp)
    return Tensor(data, op=op)


def _mm(a: np.ndarray, b: np.ndarray) -> np.ndarray:
    """Forward matmul kernel; see the module docstring for the ordering contract."""
    if a.dtype == np.float64 and b.dtype == np.float64:
        if a.ndim == 2 and b.ndim == 2:
            sub = "ij,jk->ik"
        elif a.ndim == 1 and b.ndim == 2:
            sub = "j,jk->k"
        elif a.ndim == 2 and b.ndim == 1:
            sub = "ij,j->i"
        else:
            sub = "j,j->"
        return np.einsum(sub, a, b, optimize=False)
    out = a.astype(np.float64) @ b.astype(np.float64)
    return out.astype(np.float32)


def _mm_grad(a: np.ndarray, b: np.ndarray) -> np.ndarray:
    # Gradient-path matmul: plain BLAS in native dtype. Backward never
    # feeds the cross-shape bit-stability contract, so transposed views
    # and float32 accumulation are fine here and much faster.
    return a @ b


# ---------------------------------------------------------------------------
# ops


def add(a: Tensor, b: Tensor) -> Tensor:
    a, b = as_tensor(a), as_tensor(b)
    if a.shape != b.shape:
        raise ShapeError(f"add needs matching shapes, got {a.shape} and {b.shape}")
    return _result(a.data + b.data, "add", (a, b), lambda g: (g, g))


def sub(a: Tensor, b: Tensor) -> Tensor:
    a, b = as_tensor(a), as_tensor(b)
    if a.shape != b.shape:
        raise ShapeError(f"sub needs matching shapes, got {a.shape} and {b.shape}")
    return _result(a.data - b.data, "sub", (a, b), lambda g: (g, -g))


def mul(a: Tensor, b: Tensor) -> Tensor:
    a, b = as_tensor(a), as_tensor(b)
    if a.shape != b.shape:
        raise ShapeError(f"mul needs matching shapes, got {a.shape} and {b.shape}")
    with np.errstate(over="ignore"):  # the finite guard turns overflow into an error
        out = a.data * b.data
    return _result(out, "mul", (a, b), lambda g: (g * b.data, g * a.data))


def scale(a: Tensor, c: float) -> Tensor:
    a = as_tensor(a)
    c = float(c)
    return _result(a.data * c, "scale", (a,), lambda g: (g * c,))


def matmul(a: Tensor, b: Tensor) -> Tensor:
    """Matrix (or vector) product, differentiable in both operands."""
    a, b = as_tensor(a), as_tensor(b)
    if a.ndim < 1 or b.ndim < 1 or a.ndim > 2 or b.ndim > 2:
        raise ShapeError(f"matmul supports 1/2-axis operands, got {a.shape} and {b.shape}")
    inner_a = a.shape[-1]
    inner_b = b.shape[0]
    if inner_a != inner_b:
        raise ShapeError(f"matmul inner axes differ: {a.shape} vs {b.shape}")
    ad, bd = a.data, b.data

    def vjp(g):
        if ad.ndim == 2 and bd.ndim == 2:
            return _mm_grad(g, bd.T), _mm_grad(ad.T, g)
        if ad.ndim == 1 and bd.ndim == 2:
            return _mm_grad(bd, g), np.outer(ad, g).astype(bd.dtype)
        if ad.ndim == 2 and bd.ndim == 1:
            return np.outer(g, bd).astype(ad.dtype), _mm_grad(ad.T, g)
        return g * bd, g * ad

    return _result(_mm(ad, bd), "matmul", (a, b), vjp)


def matmul_t(a: Tensor, b: Tensor) -> Tensor:
    """a @ b.T for 2-axis operands, differentiable in both.

    Kept separate from ``matmul`` because summing the last axis of both
    row-major operands is the formulation whose float64 bits stay stable
    when either extent grows (materializing b.T selects a different
    einsum kernel for narrow outputs).
    """
    a, b = as_tensor(a), as_tensor(b)
    if a.ndim != 2 or b.ndim != 2 or a.shape[1] != b.shape[1]:
        raise ShapeError(f"matmul_t needs (n,d) and (m,d), got {a.shape} and {b.shape}")
    ad, bd = a.data, b.data
    if ad.dtype == np.float64 and bd.dtype == np.float64:
        out = np.einsum("ij,kj->ik", ad, bd, optimize=False)
    else:
        out = (ad.astype(np.float64) @ bd.astype(np.float64).T).astype(np.float32)

    def vjp(g):
        return _mm_grad(g, bd), _mm_grad(g.T, ad)

    return _result(out, "matmul_t", (a, b), vjp)


def transpose(a: Tensor) -> Tensor:
    a = as_tensor(a)
    if a.ndim != 2:
        raise ShapeError(f"transpose needs a 2-axis tensor, got {a.shape}")
    return _result(a.data.T.copy(), "transpose", (a,), lambda g: (g.T.copy(),))


def row_select(a: Tensor, idx) -> Tensor:
    """Gather rows by (0-indexed) integer list; repeated indices allowed."""
    a = as_tensor(a)
    if a.ndim != 2:
        raise ShapeError(f"row_select needs a 2-axis tensor, got {a.shape}")
    idx = np.asarray(idx, dtype=np.intp)
    n = a.shape[0]
    if idx.size and (idx.min() < 0 or idx.max() >= n):
        raise ShapeError(f"row index out of range for {n} rows: {idx}")

    def vjp(g):
        da = np.zeros_like(a.data)
        np.add.at(da, idx, g)
        return (da,)

    return _result(a.data[idx].copy(), "row_select", (a,), vjp)


def take_row(a: Tensor, i: int) -> Tensor:
    a = as_tensor(a)
    if a.ndim != 2 or not (0 <= i < a.shape[0]):
        raise ShapeError(f"take_row({i}) invalid for shape {a.shape}")

    def vjp(g):
        da = np.zeros_like(a.data)
        da[i] = g
        return (da,)

    return _result(a.data[i].copy(), "take_row", (a,), vjp)


def stack_rows(rows: Sequence[Tensor]) -> Tensor:
    rows = tuple(as_tensor(r) for r in rows)
    if not rows:
        raise ShapeError("stack_rows needs at least one row")
    if any(r.ndim != 1 or r.shape != rows[0].shape for r in rows):
        raise ShapeError("stack_rows needs 1-axis tensors of equal length")

    def vjp(g):
        return tuple(g[i].copy() for i in range(len(rows)))

    return _result(np.stack([r.data for r in rows]), "stack_rows", rows, vjp)


def concat_cols(a: Tensor, b: Tensor) -> Tensor:
    a, b = as_tensor(a), as_tensor(b)
    if a.ndim != 2 or b.ndim != 2 or a.shape[0] != b.shape[0]:
        raise ShapeError(f"concat_cols needs matching row counts, got {a.shape} and {b.shape}")
    p = a.shape[1]

    def vjp(g):
        return g[:, :p].copy(), g[:, p:].copy()

    return _result(np.concatenate([a.data, b.data], axis=1), "concat_cols", (a, b), vjp)


def slice_cols(a: Tensor, start: int, stop: int) -> Tensor:
    a = as_tensor(a)
    if a.ndim != 2 or not (0 <= start <= stop <= a.shape[1]):
        raise ShapeError(f"slice_cols({start},{stop}) invalid for shape {a.shape}")

    def vjp(g):
        da = np.zeros_like(a.data)
        da[:, start:stop] = g
        return (da,)

    return _result(a.data[:, start:stop].copy(), "slice_cols", (a,), vjp)


def take_col(a: Tensor, j: int) -> Tensor:
    a = as_tensor(a)
    if a.ndim != 2 or not (0 <= j < a.shape[1]):
        raise ShapeError(f"take_col({j}) invalid for shape {a.shape}")

    def vjp(g):
        da = np.zeros_like(a.data)
        da[:, j] = g
        return (da,)

    return _result(a.data[:, j].copy(), "take_col", (a,), vjp)


def as_column(v: Tensor) -> Tensor:
    v = as_tensor(v)
    if v.ndim != 1:
        raise ShapeError(f"as_column needs a 1-axis tensor, got {v.shape}")
    return _result(v.data[:, None].copy(), "as_column", (v,), lambda g: (g[:, 0].copy(),))


def _acc64(arr: np.ndarray) -> np.ndarray:
    # Order-sensitive reductions accumulate in float64 and round once, so
    # float32 results do not depend on batching (see module docstring).
    return arr.astype(np.float64, copy=False)


def row_sum(a: Tensor) -> Tensor:
    a = as_tensor(a)
    if a.ndim != 2:
        raise ShapeError(f"row_sum needs a 2-axis tensor, got {a.shape}")
    out = _acc64(a.data).sum(axis=1).astype(a.dtype)
    return _result(out, "row_sum", (a,),
                   lambda g: (np.repeat(g[:, None], a.shape[1], axis=1),))


def sum_all(a: Tensor) -> Tensor:
    a = as_tensor(a)
    out = _acc64(a.data).sum().astype(a.dtype)
    return _result(out, "sum_all", (a,), lambda g: (np.full_like(a.data, g),))


def mean_all(a: Tensor) -> Tensor:
    a = as_tensor(a)
    inv = 1.0 / a.size
    out = _acc64(a.data).mean().astype(a.dtype)
    return _result(out, "mean_all", (a,),
                   lambda g: (np.full_like(a.data, g * inv),))


def scale_rows(m: Tensor, s: Tensor) -> Tensor:
    """Multiply row i of ``m`` by scalar ``s[i]``."""
    m, s = as_tensor(m), as_tensor(s)
    if m.ndim != 2 or s.ndim != 1 or m.shape[0] != s.shape[0]:
        raise ShapeError(f"scale_rows needs (n,d) and (n,), got {m.shape} and {s.shape}")

    def vjp(g):
        return g * s.data[:, None], (g * m.data).sum(axis=1)

    return _result(m.data * s.data[:, None], "scale_rows", (m, s), vjp)


def scale_cols(m: Tensor, v: Tensor) -> Tensor:
    """Multiply column j of ``m`` by scalar ``v[j]``."""
    m, v = as_tensor(m), as_tensor(v)
    if m.ndim != 2 or v.ndim != 1 or m.shape[1] != v.shape[0]:
        raise ShapeError(f"scale_cols needs (n,d) and (d,), got {m.shape} and {v.shape}")

    def vjp(g):
        return g * v.data[None, :], (g * m.data).sum(axis=0)

    return _result(m.data * v.data[None, :], "scale_cols", (m, v), vjp)


def outer(u: Tensor, v: Tensor) -> Tensor:
    u, v = as_tensor(u), as_tensor(v)
    if u.ndim != 1 or v.ndim != 1:
        raise ShapeError(f"outer needs 1-axis tensors, got {u.shape} and {v.shape}")

    def vjp(g):
        return _mm_grad(g, v.data), _mm_grad(u.data, g)

    return _result(np.outer(u.data, v.data), "outer", (u, v), vjp)


def sigmoid(a: Tensor) -> Tensor:
    a = as_tensor(a)
    with np.errstate(over="ignore"):
        out = 1.0 / (1.0 + np.exp(-a.data))
    return _result(out, "sigmoid", (a,), lambda g: (g * out * (1.0 - out),))


def silu(a: Tensor) -> Tensor:
    """x * sigmoid(x), the smooth gate used inside the MLPs."""
    a = as_tensor(a)
    with np.errstate(over="ignore"):
        sig = 1.0 / (1.0 + np.exp(-a.data))
    out = a.data * sig
    return _result(out, "silu", (a,),
                   lambda g: (g * sig * (1.0 + a.data * (1.0 - sig)),))


def masked_fill(a: Tensor, keep, fill: float) -> Tensor:
    """Replace entries where ``keep`` is False by the constant ``fill``."""
    a = as_tensor(a)
    keep = np.asarray(keep, dtype=bool)
    if keep.shape != a.shape:
        raise ShapeError(f"mask shape {keep.shape} does not match {a.shape}")
    out = np.where(keep, a.data, a.dtype.type(fill))
    return _result(out, "masked_fill", (a,), lambda g: (np.where(keep, g, 0.0),))


def _seq_sum_rows(e: np.ndarray) -> np.ndarray:
    # Strict left-to-right accumulation. Masked attention rows carry exact
    # zeros wherever scores were filled; sequential order makes the sum
    # identical to summing only the surviving entries, so softmax weights
    # do not depend on how much masked padding a row carries.
    return np.cumsum(e, axis=-1)[..., -1:]


def softmax_rows(a: Tensor) -> Tensor:
    """Row-wise softmax, stabilized by subtracting each row's max."""
    a = as_tensor(a)
    if a.ndim not in (1, 2):
        raise ShapeError(f"softmax_rows needs 1 or 2 axes, got {a.shape}")
    x = _acc64(a.data)
    e = np.exp(x - x.max(axis=-1, keepdims=True))
    out = (e / _seq_sum_rows(e)).astype(a.dtype)

    def vjp(g):
        inner = (g * out).sum(axis=-1, keepdims=True)
        return (out * (g - inner),)

    return _result(out, "softmax_rows", (a,), vjp)


def softmax64(logits: np.ndarray, dtype) -> np.ndarray:
    """Raw-array softmax for the incremental paths; accumulates in float64
    with the same sequential sum as ``softmax_rows`` and rounds once."""
    x = logits.astype(np.float64, copy=False)
    e = np.exp(x - x.max())
    return (e / _seq_sum_rows(e)).astype(dtype)


def logsumexp_rows(a: Tensor) -> Tensor:
    a = as_tensor(a)
    if a.ndim != 2:
        raise ShapeError(f"logsumexp_rows needs a 2-axis tensor, got {a.shape}")
    x = _acc64(a.data)
    mx = x.max(axis=1, keepdims=True)
    e = np.exp(x - mx)
    s = e.sum(axis=1, keepdims=True)
    out = (np.log(s) + mx)[:, 0].astype(a.dtype)
    soft = (e / s).astype(a.dtype)

    def vjp(g):
        return (g[:, None] * soft,)

    return _result(out, "logsumexp_rows", (a,), vjp)


def take_per_row(a: Tensor, cols) -> Tensor:
    """out[i] = a[i, cols[i]]."""
    a = as_tensor(a)
    cols = np.asarray(cols, dtype=np.intp)
    if a.ndim != 2 or cols.shape != (a.shape[0],):
        raise ShapeError(f"take_per_row needs one column per row, got {a.shape} and {cols.shape}")
    if cols.size and (cols.min() < 0 or cols.max() >= a.shape[1]):
        raise ShapeError(f"column index out of range for {a.shape[1]} columns")
    rows = np.arange(a.shape[0])

    def vjp(g):
        da = np.zeros_like(a.data)
        np.add.at(da, (rows, cols), g)
        return (da,)

    return _result(a.data[rows, cols].copy(), "take_per_row", (a,), vjp)


def layer_norm(x: Tensor, gain: Tensor, bias: Tensor, eps: float = 1e-5) -> Tensor:
    """Normalize each row to zero mean / unit variance, then apply gain and bias."""
    x, gain, bias = as_tensor(x), as_tensor(gain), as_tensor(bias)
    d = x.shape[-1]
    if gain.shape != (d,) or bias.shape != (d,):
        raise ShapeError(f"gain/bias must have shape ({d},), got {gain.shape} and {bias.shape}")
    x64 = _acc64(x.data)
    mu = x64.mean(axis=-1, keepdims=True)
    centered = x64 - mu
    var = (centered * centered).mean(axis=-1, keepdims=True)
    inv64 = 1.0 / np.sqrt(var + eps)
    xhat = (centered * inv64).astype(x.dtype)
    out = (xhat.astype(np.float64) * _acc64(gain.data) + _acc64(bias.data)).astype(x.dtype)
    inv = inv64.astype(x.dtype)

    def vjp(g):
        dxhat = g * gain.data
        m1 = dxhat.mean(axis=-1, keepdims=True)
        m2 = (dxhat * xhat).mean(axis=-1, keepdims=True)
        dx = inv * (dxhat - m1 - xhat * m2)
        axes = tuple(range(g.ndim - 1))
        dgain = (g * xhat).sum(axis=axes) if axes else (g * xhat)
        dbias = g.sum(axis=axes) if axes else g.copy()
        return dx, dgain, dbias

    return _result(out, "layer_norm", (x, gain, bias), vjp)


# ---------------------------------------------------------------------------
# autodiff driver


class Graph:
    """Topologically ordered record of the ops reachable from a root tensor."""

    def __init__(self, nodes: list[Tensor]):
        self.nodes = nodes

    @classmethod
    def trace(cls, root: Tensor) -> "Graph":
        order: list[Tensor] = []
        seen: set[int] = set()
        stack: list[tuple[Tensor, bool]] = [(root, False)]
        while stack:
            node, expanded = stack.pop()
            if expanded:
                order.append(node)
                continue
            if id(node) in seen:
                continue
            seen.add(id(node))
            stack.append((node, True))
            for p in node.parents:
                if id(p) not in seen:
                    stack.append((p, False))
        return cls(order)


def backward(loss: Tensor, wrt: Iterable[Tensor] | None = None) -> dict[Tensor, np.ndarray]:
    """Reverse-accumulate d(loss)/d(node) for every node reachable from ``loss``.

    Gradients are added into each tensor's ``.grad`` (callers zero them
    between steps). Returns a map for the reachable tensors; when ``wrt``
    is given, tensors not on any path to the loss map to zeros.
    """
    if loss.size != 1:
        raise UsageError(f"backward needs a scalar loss, got shape {loss.shape}")
    graph = Graph.trace(loss)
    grads: dict[int, np.ndarray] = {id(loss): np.ones_like(loss.data)}
    out: dict[Tensor, np.ndarray] = {}
    for node in reversed(graph.nodes):
        g = grads.pop(id(node), None)
        if g is None:
            continue
        _check_finite(g, f"backward({node.op})")
        node.grad = g if node.grad is None else node.grad + g
        out[node] = node.grad
        if node.vjp is None:
            continue
        for parent, pg in zip(node.parents, node.vjp(g)):
            if pg is None:
                continue
            if pg.shape != parent.shape:
                raise ShapeError(
                    f"vjp of {node.op} returned shape {pg.shape} for parent {parent.shape}")
            prev = grads.get(id(parent))
            grads[id(parent)] = pg if prev is None else prev + pg
    if wrt is not None:
        for t in wrt:
            if t not in out:
                t.grad = np.zeros_like(t.data) if t.grad is None else t.grad
                out[t] = t.grad
    return out


def zero_grads(tensors: Iterable[Tensor]) -> None:
    for t in tensors:
        t.grad = None


def grad_check(f: Callable[[Tensor], Tensor], x: Tensor, h: float = 1e-5) -> float:
    """Compare analytic gradients of ``f`` at ``x`` against central differences.

    Returns max over coordinates of
    ``|analytic - numeric| / max(1e-8, |analytic|)``. float64 only;
    differences are meaningless at float32 resolution.
    """
    if x.dtype != np.float64:
        raise UsageError("grad_check requires float64 tensors")
    probe = Tensor(x.data.copy(), requires_grad=True)
    out = f(probe)
    if out.size != 1:
        raise UsageError(f"grad_check needs a scalar-valued f, got shape {out.shape}")
    analytic = backward(out, wrt=[probe])[probe]
    flat = probe.data.reshape(-1)
    aflat = analytic.reshape(-1)
    worst = 0.0
    with no_grad():
        for i in range(flat.size):
            orig = flat[i]
            flat[i] = orig + h
            fp = f(probe).item()
            flat[i] = orig - h
            fm = f(probe).item()
            flat[i] = orig
            numeric = (fp - fm) / (2.0 * h)
            err = float(abs(aflat[i] - numeric) / max(1e-8, abs(aflat[i])))
            if err > worst:
                worst = err
    return worst


def check_param_grads(loss_fn: Callable[[], Tensor],
                      named: dict[str, Tensor], h: float = 1e-5) -> tuple[float, str]:
    """grad_check over a whole parameter set; returns (max rel error, worst name)."""
    zero_grads(named.values())
    loss = loss_fn()
    grads = backward(loss, wrt=list(named.values()))
    worst, worst_name = 0.0, ""
    with no_grad():
        for name, p in named.items():
            if p.dtype != np.float64:
                raise UsageError("check_param_grads requires float64 parameters")
            aflat = grads[p].reshape(-1)
            flat = p.data.reshape(-1)
            for i in range(flat.size):
                orig = flat[i]
                flat[i] = orig + h
                fp = loss_fn().item()
                flat[i] = orig - h
                fm = loss_fn().item()
                flat[i] = orig
                numeric = (fp - fm) / (2.0 * h)
                err = float(abs(aflat[i] - numeric) / max(1e-8, abs(aflat[i])))
                if err > worst:
                    worst, worst_name = err, f"{name}[{i}]"
    zero_grads(named.values())
    return worst, worst_name


# ---------------------------------------------------------------------------
# seeded randomness


class Rng:
    """Seeded source of named, independent random streams.

    Streams are derived from (seed, sha256(name)), so the same seed and
    the same name give the same draws on every platform and run,
    regardless of the order streams are created in.
    """

    def __init__(self, seed: int):
        self.seed = int(seed)

    def stream(self, name: str) -> np.random.Generator:
        tag = int.from_bytes(hashlib.sha256(name.encode()).digest()[:8], "little")
        return np.random.Generator(np.random.PCG64(np.random.SeedSequence([self.seed, tag])))

    def normal(self, name: str, shape, std: float, dtype=np.float64) -> np.ndarray:
        return self.stream(name).normal(0.0, std, size=shape).astype(dtype)


def init_param(rng: Rng, name: str, shape, fan_in: int, dtype=np.float64,
               std: float | None = None) -> Tensor:
    """Scaled-normal parameter, std 1/sqrt(fan_in) unless overridden."""
    if std is None:
        std = 1.0 / math.sqrt(fan_in)
    return Tensor(rng.normal(name, shape, std, dtype=dtype), requires_grad=True)


# ---------------------------------------------------------------------------
# parameter file format

_MAGIC = "scout-tensors 1"


def save_tensors(path, named: dict[str, np.ndarray | Tensor]) -> None:
    """Write tensors as a text manifest followed by raw little-endian arrays."""
    entries = []
    blobs = []
    offset = 0
    for name, value in named.items():
        arr = value.data if isinstance(value, Tensor) else np.asarray(value)
        arr = np.ascontiguousarray(arr)
        blob = arr.astype(arr.dtype.newbyteorder("<"), copy=False).tobytes()
        entries.append({
            "name": name,
            "shape": list(arr.shape),
            "dtype": arr.dtype.name,
            "offset": offset,
            "nbytes": len(blob),
        })
        blobs.append(blob)
        offset += len(blob)
    header = _MAGIC + "\n" + json.dumps({"tensors": entries}) + "\n\n"
    with open(path, "wb") as fh:
        fh.write(header.encode("utf-8"))
        for blob in blobs:
            fh.write(blob)


def load_tensors(path) -> dict[str, np.ndarray]:
    with open(path, "rb") as fh:
        raw = fh.read()
    sep = raw.find(b"\n\n")
    if sep < 0 or not raw.startswith(_MAGIC.encode()):
        raise UsageError(f"{path} is not a tensor file")
    header = raw[:sep].decode("utf-8").split("\n", 1)[1]
    body = raw[sep + 2:]
    out: dict[str, np.ndarray] = {}
    for entry in json.loads(header)["tensors"]:
        dt = np.dtype(entry["dtype"]).newbyteorder("<")
        blob = body[entry["offset"]:entry["offset"] + entry["nbytes"]]
        arr = np.frombuffer(blob, dtype=dt).reshape(entry["shape"])
        out[entry["name"]] = arr.astype(arr.dtype.newbyteorder("="))
    return out

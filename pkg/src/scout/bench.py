"""Efficiency verification: exact score-dot and cache-entry accounting.

Compute is counted in query-key dot products, the unit the scaling
claims are stated in. Every benched run keeps double books: an
instrumented counter incremented by the attention caches as they work,
and a closed-form count; a run is only reported if the two agree
exactly. Three attention variants share the identical surrounding stack
(mixer, MLPs, norms) and differ only in what they cache:

  scout  checkpoint rows only           floor(n/k) entries, sum(t//k)+n dots
  full   every projected key/value      n entries, n(n+1)/2 dots
  swa    ring of the last w keys/values min(n,w) entries, sum(min(t,w+1)) dots

Wall-clock medians are reported but never asserted; only counters and
fit slopes are contractual.
"""

from __future__ import annotations

import math
import statistics
import time
from dataclasses import dataclass

import numpy as np

from . import tensor as T
from .attention import AttnParams, CheckpointCache
from .errors import ConfigError, InternalError
from .model import ModelParams, ScoutConfig, init_gen_state, init_params, model_step, param_count
from .tensor import METER

VARIANTS = ("scout", "full", "swa")


@dataclass
class BenchRow:
    variant: str
    n: int
    score_dots: int        # per layer; every layer is checked to agree
    cache_entries: int     # per layer, after the full run
    wall_ms: float         # median over repeats
    peak_bytes: int


def count_score_dots(variant: str, n: int, k: int | None = None,
                     w: int | None = None) -> int:
    """Closed-form per-layer dot count for generating n tokens."""
    if variant == "scout":
        if not k or k < 1:
            raise ConfigError(f"scout count needs k >= 1, got {k}")
        return sum(t // k for t in range(1, n + 1)) + n
    if variant == "full":
        return n * (n + 1) // 2
    if variant == "swa":
        if w is None or w < 0:
            raise ConfigError(f"swa count needs w >= 0, got {w}")
        return sum(min(t, w + 1) for t in range(1, n + 1))
    raise ConfigError(f"unknown variant {variant!r}, expected one of {VARIANTS}")


class FullAttentionCache:
    """Growing KV cache attending over every previous token plus self."""

    def __init__(self, dtype=np.float64):
        self.dtype = np.dtype(dtype)
        self.keys: list[np.ndarray] = []
        self.values: list[np.ndarray] = []
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
        return len(self.keys)

    def step(self, xt_row: np.ndarray, p: AttnParams) -> np.ndarray:
        d = xt_row.shape[0]
        q = T._mm(xt_row, p.wq.data)
        k = T._mm(xt_row, p.wk.data)
        v = T._mm(xt_row, p.wv.data)
        self.keys.append(k)
        self.values.append(v)
        self._tracked += k.nbytes + v.nbytes
        METER.add(k.nbytes + v.nbytes)
        logits = T._mm(np.stack(self.keys), q) * self.dtype.type(1.0 / math.sqrt(d))
        self.score_dots += len(self.keys)
        weights = T.softmax64(logits, self.dtype)
        out = T._mm(weights, np.stack(self.values))
        self.pos += 1
        return out.astype(self.dtype, copy=False)


class WindowAttentionCache:
    """Ring KV cache: the last ``window`` tokens plus self are attended."""

    def __init__(self, window: int, dtype=np.float64):
        if window < 0:
            raise ConfigError(f"window must be >= 0, got {window}")
        self.window = window
        self.dtype = np.dtype(dtype)
        self.keys: list[np.ndarray] = []
        self.values: list[np.ndarray] = []
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
        return len(self.keys)

    def step(self, xt_row: np.ndarray, p: AttnParams) -> np.ndarray:
        d = xt_row.shape[0]
        q = T._mm(xt_row, p.wq.data)
        k = T._mm(xt_row, p.wk.data)
        v = T._mm(xt_row, p.wv.data)
        stacked_k = np.stack(self.keys + [k])
        stacked_v = np.stack(self.values + [v])
        logits = T._mm(stacked_k, q) * self.dtype.type(1.0 / math.sqrt(d))
        self.score_dots += stacked_k.shape[0]
        weights = T.softmax64(logits, self.dtype)
        out = T._mm(weights, stacked_v)
        if self.window > 0:
            self.keys.append(k)
            self.values.append(v)
            self._tracked += k.nbytes + v.nbytes
            METER.add(k.nbytes + v.nbytes)
            if len(self.keys) > self.window:
                old_k = self.keys.pop(0)
                old_v = self.values.pop(0)
                self._tracked -= old_k.nbytes + old_v.nbytes
                METER.sub(old_k.nbytes + old_v.nbytes)
        self.pos += 1
        return out.astype(self.dtype, copy=False)


def _cache_factory(variant: str, cfg: ScoutConfig):
    if variant == "scout":
        return lambda lp: CheckpointCache(cfg.checkpoint_interval, dtype=cfg.dtype)
    if variant == "full":
        return lambda lp: FullAttentionCache(dtype=cfg.dtype)
    if variant == "swa":
        return lambda lp: WindowAttentionCache(cfg.window, dtype=cfg.dtype)
    raise ConfigError(f"unknown variant {variant!r}, expected one of {VARIANTS}")


def expected_cache_entries(variant: str, n: int, cfg: ScoutConfig) -> int:
    if variant == "scout":
        return n // cfg.checkpoint_interval
    if variant == "full":
        return n
    return min(n, cfg.window)


def predict_live_bytes(variant: str, n: int, cfg: ScoutConfig) -> int:
    """Upper-bound estimate used by the refusal guard, not a measurement."""
    item = np.dtype(cfg.dtype).itemsize
    params = param_count(cfg) * item
    cache_rows = expected_cache_entries(variant, n, cfg)
    caches = cfg.n_layers * cache_rows * 2 * cfg.width * item
    mixer_state = cfg.n_layers * max(cfg.window, cfg.state_size) * cfg.width * item
    transient = 64 * cfg.width * max(cfg.width, n // max(cfg.checkpoint_interval, 1) + 8) * item
    return params + caches + mixer_state + transient


def measure(variant: str, n: int, cfg: ScoutConfig, repeats: int = 3,
            max_bytes: int | None = None, params: ModelParams | None = None) -> BenchRow:
    """Generate n tokens incrementally from a 1-token prompt and account exactly."""
    if variant not in VARIANTS:
        raise ConfigError(f"unknown variant {variant!r}, expected one of {VARIANTS}")
    if n < 1:
        raise ConfigError(f"bench length must be >= 1, got {n}")
    if max_bytes is not None:
        predicted = predict_live_bytes(variant, n, cfg)
        if predicted > max_bytes:
            raise ConfigError(
                f"refusing {variant} n={n}: predicted {predicted} live bytes "
                f"exceeds bench.max_bytes={max_bytes}")
    mp = params if params is not None else init_params(cfg)
    expected_dots = count_score_dots(variant, n, k=cfg.checkpoint_interval, w=cfg.window)
    expected_entries = expected_cache_entries(variant, n, cfg)
    walls = []
    peak = 0
    for _ in range(repeats):
        state = init_gen_state(mp, cache_factory=_cache_factory(variant, cfg))
        METER.reset_peak()
        t0 = time.perf_counter()
        token = 0
        logits = model_step(state, token, mp)
        for _ in range(n - 1):
            token = int(np.argmax(logits))
            logits = model_step(state, token, mp)
        walls.append((time.perf_counter() - t0) * 1e3)
        peak = max(peak, METER.peak)
        for i, cache in enumerate(state.caches):
            if cache.score_dots != expected_dots:
                raise InternalError(
                    f"{variant} n={n} layer {i}: instrumented {cache.score_dots} dots, "
                    f"closed form says {expected_dots}")
            if cache.entries != expected_entries:
                raise InternalError(
                    f"{variant} n={n} layer {i}: {cache.entries} cache entries, "
                    f"expected {expected_entries}")
    return BenchRow(variant=variant, n=n, score_dots=expected_dots,
                    cache_entries=expected_entries,
                    wall_ms=statistics.median(walls), peak_bytes=peak)


def run_grid(cfg: ScoutConfig, lengths, variants, repeats: int,
             max_bytes: int | None = None, log=None) -> list[BenchRow]:
    mp = init_params(cfg)
    rows = []
    for variant in variants:
        for n in lengths:
            row = measure(variant, n, cfg, repeats=repeats, max_bytes=max_bytes, params=mp)
            rows.append(row)
            if log:
                log(f"bench {variant} n={n}: dots={row.score_dots} "
                    f"entries={row.cache_entries} wall={row.wall_ms:.1f}ms")
    return rows


def fit_loglog(ns, ys) -> tuple[float, float]:
    """Least-squares slope/intercept of log(y) against log(n)."""
    x = np.log(np.asarray(ns, dtype=np.float64))
    y = np.log(np.asarray(ys, dtype=np.float64))
    slope, intercept = np.polyfit(x, y, 1)
    return float(slope), float(intercept)


def scaling_summary(k: int, w: int, lengths=(512, 1024, 2048, 4096)) -> dict:
    """Closed-form slopes and the full/scout ratio the efficiency claims pin down."""
    scout = [count_score_dots("scout", n, k=k) for n in lengths]
    full = [count_score_dots("full", n) for n in lengths]
    swa = [count_score_dots("swa", n, w=w) for n in lengths]
    s_scout, b_scout = fit_loglog(lengths, scout)
    s_full, b_full = fit_loglog(lengths, full)
    s_swa, _ = fit_loglog(lengths, swa)
    # Offset between the two fitted lines, read at the grid's log-center
    # (raw intercepts sit at n=1, decades outside the fit range, where the
    # small slope mismatch between the curves distorts the comparison).
    x_mid = float(np.mean(np.log(np.asarray(lengths, dtype=np.float64))))
    offset = (b_full + s_full * x_mid) - (b_scout + s_scout * x_mid)
    return {
        "lengths": list(lengths),
        "scout_dots": scout,
        "full_dots": full,
        "swa_dots": swa,
        "scout_slope": s_scout,
        "full_slope": s_full,
        "swa_slope": s_swa,
        "intercept_ratio": math.exp(offset),
        "ratio_at_largest": full[-1] / scout[-1],
    }

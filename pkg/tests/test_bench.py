"""Bench subsystem: closed forms, double bookkeeping, scaling fits, guards."""

import math

import numpy as np
import pytest

from scout.bench import (BenchRow, count_score_dots, expected_cache_entries,
                         fit_loglog, measure, predict_live_bytes, run_grid,
                         scaling_summary)
from scout.errors import ConfigError
from scout.model import ScoutConfig


def bench_cfg(**kw):
    base = dict(width=16, n_layers=2, checkpoint_interval=4, mixer="swa", window=8,
                mlp_ratio=2, vocab=19, max_seq=512, seed=3, precision=32)
    base.update(kw)
    return ScoutConfig(**base)


# ---------------------------------------------------------------------------
# closed forms


def test_scout_count_enumerated_case():
    assert count_score_dots("scout", 4, k=2) == 8


def test_full_count_small():
    assert count_score_dots("full", 4) == 10
    assert count_score_dots("full", 1) == 1


def test_swa_count_matches_direct_sum():
    for n, w in ((1, 0), (5, 2), (64, 8), (100, 100)):
        expected = sum(min(t, w + 1) for t in range(1, n + 1))
        assert count_score_dots("swa", n, w=w) == expected


def test_scout_k1_approaches_dense_plus_self():
    n = 50
    assert count_score_dots("scout", n, k=1) == n * (n + 1) // 2 + n


def test_count_rejects_bad_args():
    with pytest.raises(ConfigError):
        count_score_dots("scout", 4, k=0)
    with pytest.raises(ConfigError):
        count_score_dots("warp", 4)


def test_ratio_within_5pct_of_k_at_4096():
    ratio = count_score_dots("full", 4096) / count_score_dots("scout", 4096, k=16)
    assert abs(ratio / 16.0 - 1.0) < 0.05


# ---------------------------------------------------------------------------
# instrumented runs


@pytest.mark.parametrize("variant", ["scout", "full", "swa"])
def test_measure_double_bookkeeping(variant):
    cfg = bench_cfg()
    for n in (16, 33, 64):
        row = measure(variant, n, cfg, repeats=1)
        assert row.score_dots == count_score_dots(
            variant, n, k=cfg.checkpoint_interval, w=cfg.window)
        assert row.cache_entries == expected_cache_entries(variant, n, cfg)
        assert row.wall_ms > 0
        assert row.peak_bytes > 0


def test_measure_cache_entries_per_variant():
    cfg = bench_cfg(checkpoint_interval=4, window=8)
    n = 37
    assert measure("scout", n, cfg, repeats=1).cache_entries == 37 // 4
    assert measure("full", n, cfg, repeats=1).cache_entries == 37
    assert measure("swa", n, cfg, repeats=1).cache_entries == 8


def test_peak_bytes_orders_variants_at_long_n():
    cfg = bench_cfg()
    n = 256
    scout = measure("scout", n, cfg, repeats=1).peak_bytes
    full = measure("full", n, cfg, repeats=1).peak_bytes
    assert full > scout  # the whole point of checkpoint caching


def test_oom_guard_refuses():
    cfg = bench_cfg()
    with pytest.raises(ConfigError) as exc:
        measure("full", 512, cfg, repeats=1, max_bytes=1000)
    assert "max_bytes" in str(exc.value)


def test_run_grid_covers_all_cells():
    cfg = bench_cfg()
    rows = run_grid(cfg, lengths=(8, 16), variants=("scout", "full"), repeats=1)
    assert {(r.variant, r.n) for r in rows} == {("scout", 8), ("scout", 16),
                                                ("full", 8), ("full", 16)}


# ---------------------------------------------------------------------------
# scaling shape


def test_loglog_fit_recovers_powers():
    ns = (512, 1024, 2048, 4096)
    slope, intercept = fit_loglog(ns, [7.0 * n ** 2 for n in ns])
    assert slope == pytest.approx(2.0, abs=1e-9)
    assert math.exp(intercept) == pytest.approx(7.0, rel=1e-9)


def test_scaling_summary_contractual_grid():
    s = scaling_summary(k=16, w=64)
    assert abs(s["scout_slope"] - 2.0) <= 0.05
    assert abs(s["full_slope"] - 2.0) <= 0.05
    assert abs(s["swa_slope"] - 1.0) <= 0.05
    assert abs(s["intercept_ratio"] / 16.0 - 1.0) <= 0.10
    assert abs(s["ratio_at_largest"] / 16.0 - 1.0) <= 0.05


def test_scaling_summary_other_intervals():
    for k in (2, 4, 8):
        s = scaling_summary(k=k, w=64)
        assert abs(s["scout_slope"] - 2.0) <= 0.05
        assert abs(s["intercept_ratio"] / k - 1.0) <= 0.10


def test_cache_growth_is_step_function():
    cfg = bench_cfg(checkpoint_interval=8)
    entries = [expected_cache_entries("scout", n, cfg) for n in range(1, 33)]
    assert entries == [n // 8 for n in range(1, 33)]
    assert [expected_cache_entries("full", n, cfg) for n in (5, 9)] == [5, 9]


def test_predict_live_bytes_monotone_in_n():
    cfg = bench_cfg()
    a = predict_live_bytes("full", 64, cfg)
    b = predict_live_bytes("full", 4096, cfg)
    assert b > a

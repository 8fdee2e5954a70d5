"""Checkpoint attention: indices, compression, masking, batch/step paths."""

import numpy as np
import pytest

from scout import oracles
from scout import tensor as T
from scout.attention import (AttnParams, CheckpointCache, ScoutScores,
                             causal_checkpoint_mask, checkpoint_indices,
                             compress, scout_attention, scout_attention_step)
from scout.errors import ConfigError, InternalError, UsageError
from scout.tensor import Tensor


def attn_params(stream, d, k, scale=1.0):
    return AttnParams(wq=Tensor(stream.normal(0, scale, size=(d, d))),
                      wk=Tensor(stream.normal(0, scale, size=(d, d))),
                      wv=Tensor(stream.normal(0, scale, size=(d, d))), interval=k)


# ---------------------------------------------------------------------------
# checkpoint selection


def test_indices_paper_case():
    assert checkpoint_indices(25, 10) == [10, 20]


def test_indices_short_sequence_empty():
    assert checkpoint_indices(5, 10) == []


def test_indices_boundary_includes_last_token():
    assert checkpoint_indices(20, 10) == [10, 20]
    assert checkpoint_indices(0, 3) == []


def test_indices_reject_bad_interval():
    with pytest.raises(ConfigError):
        checkpoint_indices(10, 0)


def test_compress_empty_and_last(stream):
    x = Tensor(stream.normal(size=(5, 3)))
    assert compress(x, []).shape == (0, 3)
    assert np.array_equal(compress(x, [5]).data, x.data[4:5])


def test_compress_is_pure_row_selection(stream):
    x = Tensor(stream.normal(size=(8, 3)))
    out = compress(x, checkpoint_indices(8, 2))
    assert np.array_equal(out.data, x.data[[1, 3, 5, 7]])


def test_compress_out_of_range_is_internal_error(stream):
    x = Tensor(stream.normal(size=(4, 2)))
    with pytest.raises(InternalError):
        compress(x, [5])


# ---------------------------------------------------------------------------
# mask


def test_mask_first_row_all_false_for_k_gt_1():
    mask = causal_checkpoint_mask(6, checkpoint_indices(6, 2))
    assert not mask[0].any()


def test_mask_enumerated_n4_k2():
    mask = causal_checkpoint_mask(4, checkpoint_indices(4, 2))
    expected = np.array([[False, False],
                         [True, False],
                         [True, False],
                         [True, True]])
    assert np.array_equal(mask, expected)
    # 4 allowed pairs plus 4 self terms = 8 score dot products
    assert int(mask.sum()) + 4 == 8


# ---------------------------------------------------------------------------
# batch attention


def test_attention_no_checkpoints_outputs_value_projection(stream):
    x = Tensor(stream.normal(size=(5, 4)))
    p = attn_params(stream, 4, 9)  # k > n
    out = scout_attention(x, p)
    assert np.abs(out.data - T.matmul(x, p.wv).data).max() < 1e-14


def test_attention_first_checkpoint_token_splits_weight(stream):
    # at t == k the checkpoint key equals the token's own key: two equal
    # logits, weights (1/2, 1/2), and the output collapses to V_t
    d, k = 4, 3
    x = Tensor(stream.normal(size=(k, d)))
    p = attn_params(stream, d, k)
    out, scores = scout_attention(x, p, return_scores=True)
    assert scores.weights[k - 1, 0] == pytest.approx(0.5, abs=1e-12)
    assert scores.weights[k - 1, 1] == pytest.approx(0.5, abs=1e-12)
    v_t = (x.data[k - 1] @ p.wv.data)
    assert np.abs(out.data[k - 1] - v_t).max() < 1e-12


def test_attention_matches_dense_oracle(stream):
    x = Tensor(stream.normal(size=(32, 8)))
    p = attn_params(stream, 8, 4, scale=1 / np.sqrt(8))
    diff = np.abs(scout_attention(x, p).data - oracles.dense_scout_oracle(x, p)).max()
    assert diff < 1e-10


def test_scores_rows_sum_to_one_and_masked_entries_filled(stream):
    x = Tensor(stream.normal(size=(11, 4)))
    p = attn_params(stream, 4, 3)
    _, scores = scout_attention(x, p, return_scores=True)
    assert isinstance(scores, ScoutScores)
    assert np.abs(scores.weights.sum(axis=1) - 1.0).max() < 1e-12
    mask = causal_checkpoint_mask(11, checkpoint_indices(11, 3))
    fill = T.mask_fill_value(np.float64) / np.sqrt(4)
    assert (scores.checkpoint_scores[~mask] == fill).all()
    assert (scores.checkpoint_scores[mask] > fill).all()


def test_attention_gradients(stream):
    d, n, k = 4, 10, 3
    x = Tensor(stream.normal(size=(n, d)))
    probe = Tensor(stream.normal(size=(n, d)))
    p = attn_params(stream, d, k)
    named = {}
    for field in ("wq", "wk", "wv"):
        t = getattr(p, field)
        t.requires_grad = True
        named[field] = t

    def loss():
        return T.mean_all(T.mul(scout_attention(x, p), probe))

    err, worst = T.check_param_grads(loss, named)
    assert err < 1e-4, f"worst {worst}: {err}"


def test_attention_input_gradient(stream):
    d, n, k = 3, 7, 2
    p = attn_params(stream, d, k)
    probe = Tensor(stream.normal(size=(n, d)))

    def f(x):
        return T.mean_all(T.mul(scout_attention(x, p), probe))

    assert T.grad_check(f, Tensor(stream.normal(size=(n, d)))) < 1e-4


# ---------------------------------------------------------------------------
# sparsity signature


def test_perturbing_non_checkpoint_token_leaves_later_rows_bit_exact(stream):
    n, d, k = 20, 4, 4
    x = stream.normal(size=(n, d))
    p = attn_params(stream, d, k)
    base = scout_attention(Tensor(x), p).data
    for t in (0, 4, 9, 16):  # positions 1,5,10,17: not multiples of 4
        bumped = x.copy()
        bumped[t] += 0.3
        pert = scout_attention(Tensor(bumped), p).data
        assert np.array_equal(pert[:t], base[:t])
        assert not np.array_equal(pert[t], base[t])
        assert np.array_equal(pert[t + 1:], base[t + 1:])


def test_perturbing_checkpoint_token_changes_later_rows(stream):
    n, d, k = 20, 4, 4
    x = stream.normal(size=(n, d))
    p = attn_params(stream, d, k)
    base = scout_attention(Tensor(x), p).data
    for t in (3, 7, 15):  # positions 4,8,16: checkpoints
        bumped = x.copy()
        bumped[t] += 0.3
        pert = scout_attention(Tensor(bumped), p).data
        assert np.array_equal(pert[:t], base[:t])
        assert not np.array_equal(pert[t + 1:], base[t + 1:])


# ---------------------------------------------------------------------------
# incremental cache


def test_step_reproduces_batch_n64_k8(stream):
    n, d, k = 64, 8, 8
    x = stream.normal(size=(n, d))
    p = attn_params(stream, d, k)
    batch = scout_attention(Tensor(x), p).data
    cache = CheckpointCache(k)
    rows = []
    for t in range(n):
        cache, out = scout_attention_step(cache, Tensor(x[t]), p, position=t + 1)
        rows.append(out.data)
    assert np.abs(np.stack(rows) - batch).max() < 1e-10
    assert cache.entries == n // k
    assert cache.positions == list(range(k, n + 1, k))


def test_cache_entry_count_and_size_exact(stream):
    d, k = 6, 4
    p = attn_params(stream, d, k)
    for n in (1, 3, 4, 9, 24):
        cache = CheckpointCache(k)
        for t in range(n):
            cache.step(stream.normal(size=d), p)
        assert cache.entries == n // k
        # floor(n/k) entries, each one key row and one value row of d floats
        assert cache.cached_bytes == (n // k) * 2 * d * 8


def test_first_token_with_empty_cache_outputs_value(stream):
    d = 5
    p = attn_params(stream, d, 3)
    cache = CheckpointCache(3)
    x = stream.normal(size=d)
    out = cache.step(x, p)
    assert np.abs(out - x @ p.wv.data).max() < 1e-14
    assert cache.entries == 0 and cache.score_dots == 1


def test_step_position_desync_raises(stream):
    p = attn_params(stream, 4, 2)
    cache = CheckpointCache(2)
    scout_attention_step(cache, Tensor(np.zeros(4)), p, position=1)
    with pytest.raises(UsageError):
        scout_attention_step(cache, Tensor(np.zeros(4)), p, position=3)


def test_score_dot_counter_matches_mask_enumeration(stream):
    d, k, n = 4, 2, 17
    p = attn_params(stream, d, k)
    cache = CheckpointCache(k)
    for t in range(n):
        cache.step(stream.normal(size=d), p)
    mask_count = int(causal_checkpoint_mask(n, checkpoint_indices(n, k)).sum())
    assert cache.score_dots == mask_count + n
    assert cache.score_dots == sum(t // k for t in range(1, n + 1)) + n


def test_oracle_grid_small(stream):
    # randomized cross-check over interval extremes including k=1 doubling
    for k in (1, 2, 5):
        for n in (1, 4, 13):
            x = Tensor(stream.normal(size=(n, 4)))
            p = attn_params(stream, 4, k)
            fast = scout_attention(x, p).data
            slow = oracles.dense_scout_oracle(x, p)
            assert np.abs(fast - slow).max() < 1e-10

"""Character-level training loop: AdamW, cosine schedule, telemetry, eval.

Deterministic end to end: batches come from a named stream of the run
seed, the optimizer is plain single-threaded math, and two runs with the
same seed produce bit-identical loss trajectories.
"""

from __future__ import annotations

import csv
import math
import time
from dataclasses import dataclass, field, replace
from pathlib import Path

import numpy as np

from . import tensor as T
from .errors import ConfigError, InputError, NumericError
from .model import (ModelParams, ScoutConfig, init_params, model_forward,
                    named_parameters, save_model)
from .tensor import Rng, Tensor

TRAIN_CSV_HEADER = ["step", "loss", "lr", "grad_norm", "wall_ms"]


class CharTokenizer:
    """Bidirectional char/id maps over the corpus alphabet, sorted by codepoint."""

    def __init__(self, alphabet: str):
        self.chars = sorted(set(alphabet))
        self.id_of = {c: i for i, c in enumerate(self.chars)}

    @classmethod
    def from_text(cls, text: str) -> "CharTokenizer":
        return cls(text)

    @classmethod
    def from_codepoints(cls, codes) -> "CharTokenizer":
        return cls("".join(chr(int(c)) for c in np.asarray(codes).reshape(-1)))

    @property
    def vocab_size(self) -> int:
        return len(self.chars)

    def codepoints(self) -> np.ndarray:
        return np.array([ord(c) for c in self.chars], dtype=np.float64)

    def encode(self, text: str) -> np.ndarray:
        try:
            return np.array([self.id_of[c] for c in text], dtype=np.intp)
        except KeyError as exc:
            raise InputError(f"character {exc.args[0]!r} is not in the vocabulary") from None

    def decode(self, ids) -> str:
        return "".join(self.chars[int(i)] for i in np.asarray(ids).reshape(-1))


@dataclass
class TrainConfig:
    peak_lr: float = 3e-4
    weight_decay: float = 0.1
    clip_norm: float = 1.0
    warmup_steps: int = 100
    total_steps: int = 2000
    batch_tokens: int = 1024
    eval_interval: int = 200
    eval_tokens: int = 16384
    val_fraction: float = 0.1
    seed: int = 0
    beta1: float = 0.9
    beta2: float = 0.95
    eps: float = 1e-8
    corpus: str = ""
    out_dir: str = ""

    def validate(self) -> "TrainConfig":
        if self.warmup_steps > self.total_steps:
            raise ConfigError(
                f"train.warmup_steps ({self.warmup_steps}) exceeds total_steps ({self.total_steps})")
        for name in ("peak_lr", "clip_norm", "batch_tokens", "total_steps"):
            if getattr(self, name) <= 0:
                raise ConfigError(f"train.{name} must be positive")
        if not (0.0 < self.val_fraction < 1.0):
            raise ConfigError(f"train.val_fraction must be in (0,1), got {self.val_fraction}")
        return self


@dataclass
class TrainRecord:
    step: int
    loss: float
    lr: float
    grad_norm: float
    wall_ms: float


def cosine_lr(step: int, c: TrainConfig) -> float:
    """Linear 0->peak over warmup, cosine peak->peak/10 until total, flat after."""
    if step < 0:
        raise ConfigError(f"step must be >= 0, got {step}")
    floor = c.peak_lr / 10.0
    if step <= c.warmup_steps:
        if c.warmup_steps == 0:
            return c.peak_lr
        return c.peak_lr * step / c.warmup_steps
    if step >= c.total_steps:
        return floor
    frac = (step - c.warmup_steps) / (c.total_steps - c.warmup_steps)
    return floor + (c.peak_lr - floor) * 0.5 * (1.0 + math.cos(math.pi * frac))


@dataclass
class Moments:
    m: dict[str, np.ndarray] = field(default_factory=dict)
    v: dict[str, np.ndarray] = field(default_factory=dict)


def global_grad_norm(grads: dict[str, np.ndarray]) -> float:
    total = 0.0
    for g in grads.values():
        total += float((g.astype(np.float64) ** 2).sum())
    return math.sqrt(total)


def adamw_step(params: dict[str, Tensor], grads: dict[str, np.ndarray],
               moments: Moments, step: int, c: TrainConfig,
               lr: float | None = None) -> tuple[Moments, float]:
    """One AdamW update after global-norm clipping; returns (moments, pre-clip norm).

    Weight decay is decoupled and applied to matrices only (norm gains
    and biases are exempt). Bias correction uses ``step`` starting at 1.
    """
    for name, g in grads.items():
        if not np.isfinite(g).all():
            raise NumericError(f"non-finite gradient for {name!r} at step {step}")
    if lr is None:
        lr = cosine_lr(step, c)
    norm = global_grad_norm(grads)
    clip_scale = 1.0 if norm <= c.clip_norm else c.clip_norm / norm
    b1, b2 = c.beta1, c.beta2
    bc1 = 1.0 - b1 ** step
    bc2 = 1.0 - b2 ** step
    for name, p in params.items():
        g = grads[name].astype(np.float64) * clip_scale
        m = moments.m.get(name)
        v = moments.v.get(name)
        if m is None:
            m = np.zeros(p.shape, dtype=np.float64)
            v = np.zeros(p.shape, dtype=np.float64)
        m = b1 * m + (1.0 - b1) * g
        v = b2 * v + (1.0 - b2) * (g * g)
        moments.m[name] = m
        moments.v[name] = v
        update = (m / bc1) / (np.sqrt(v / bc2) + c.eps)
        new = p.data.astype(np.float64) - lr * update
        if c.weight_decay and p.data.ndim >= 2:
            new -= lr * c.weight_decay * p.data.astype(np.float64)
        p.data[...] = new.astype(p.dtype)
    return moments, norm


def cross_entropy(logits: Tensor, targets) -> Tensor:
    """Mean next-token cross entropy for one (n, vocab) logits block."""
    lse = T.logsumexp_rows(logits)
    picked = T.take_per_row(logits, targets)
    return T.mean_all(T.sub(lse, picked))


def sequence_loss(ids: np.ndarray, mp: ModelParams) -> Tensor:
    """Teacher-forced loss over one contiguous chunk (inputs = ids[:-1])."""
    return cross_entropy(model_forward(ids[:-1], mp), ids[1:])


def eval_ppl(mp: ModelParams, ids) -> float:
    """exp(mean next-token cross entropy), teacher forced, in eval chunks."""
    ids = np.asarray(ids, dtype=np.intp)
    if ids.size < 2:
        raise ConfigError(f"eval needs at least 2 tokens, got {ids.size}")
    seq = mp.config.max_seq
    total, count = 0.0, 0
    with T.no_grad():
        start = 0
        while start + 1 < ids.size:
            chunk = ids[start:start + seq + 1]
            if chunk.size < 2:
                break
            loss = sequence_loss(chunk, mp).item()
            total += loss * (chunk.size - 1)
            count += chunk.size - 1
            start += seq
    return math.exp(total / count)


def load_corpus(path) -> str:
    try:
        text = Path(path).read_text(encoding="utf-8")
    except FileNotFoundError:
        raise
    if not text:
        raise ConfigError(f"corpus {path} is empty")
    return text


def split_corpus(ids: np.ndarray, val_fraction: float) -> tuple[np.ndarray, np.ndarray]:
    cut = int(len(ids) * (1.0 - val_fraction))
    return ids[:cut], ids[cut:]


def _sample_chunks(stream, train_ids: np.ndarray, n_chunks: int, seq: int) -> list[np.ndarray]:
    # Contiguous windows of seq+1 ids (inputs plus shifted targets).
    high = len(train_ids) - (seq + 1)
    offsets = stream.integers(0, high + 1, size=n_chunks)
    return [train_ids[o:o + seq + 1] for o in offsets]


def train(model_cfg: ScoutConfig, train_cfg: TrainConfig, corpus_path,
          out_dir, log=None) -> tuple[list[TrainRecord], dict]:
    """Run the full loop; writes train_log.csv, eval_log.csv, and best.ckpt.

    Returns the step records plus a summary dict (initial/final/best val
    loss, tokenizer, output paths).
    """
    train_cfg.validate()
    text = load_corpus(corpus_path)
    tok = CharTokenizer.from_text(text)
    cfg = replace(model_cfg, vocab=tok.vocab_size).validate()
    ids = tok.encode(text)
    train_ids, val_ids = split_corpus(ids, train_cfg.val_fraction)
    seq = cfg.max_seq
    n_chunks = max(1, train_cfg.batch_tokens // seq)
    if len(train_ids) < seq + 1:
        raise ConfigError(
            f"corpus too small: {len(train_ids)} train tokens but one chunk needs {seq + 1}")
    if val_ids.size < 2:
        raise ConfigError("corpus too small to carve out a validation split")

    out_dir = Path(out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    mp = init_params(cfg)
    params = named_parameters(mp)
    moments = Moments()
    batch_stream = Rng(train_cfg.seed).stream("batches")
    records: list[TrainRecord] = []
    eval_rows: list[tuple[int, float, float]] = []
    best_val = math.inf
    ckpt_path = out_dir / "best.ckpt"
    extra = {"tokenizer/codepoints": tok.codepoints()}

    def run_eval(step: int) -> float:
        limit = min(val_ids.size, train_cfg.eval_tokens)
        ppl = eval_ppl(mp, val_ids[:limit])
        val_loss = math.log(ppl)
        eval_rows.append((step, val_loss, ppl))
        return val_loss

    initial_val = run_eval(0)
    train_csv = out_dir / "train_log.csv"
    with open(train_csv, "w", newline="") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(TRAIN_CSV_HEADER)
        for step in range(1, train_cfg.total_steps + 1):
            t0 = time.perf_counter()
            chunks = _sample_chunks(batch_stream, train_ids, n_chunks, seq)
            T.zero_grads(params.values())
            loss_total = 0.0
            for chunk in chunks:
                loss = T.scale(sequence_loss(chunk, mp), 1.0 / n_chunks)
                T.backward(loss)
                loss_total += loss.item() * n_chunks
            grads = {name: (p.grad if p.grad is not None else np.zeros(p.shape, dtype=p.dtype))
                     for name, p in params.items()}
            lr = cosine_lr(step, train_cfg)
            moments, norm = adamw_step(params, grads, moments, step, train_cfg, lr=lr)
            wall_ms = (time.perf_counter() - t0) * 1e3
            rec = TrainRecord(step=step, loss=loss_total / n_chunks, lr=lr,
                              grad_norm=norm, wall_ms=wall_ms)
            records.append(rec)
            writer.writerow([rec.step, f"{rec.loss:.10f}", f"{rec.lr:.10e}",
                             f"{rec.grad_norm:.10f}", f"{rec.wall_ms:.3f}"])
            if log and (step % 50 == 0 or step == 1):
                log(f"step {step}/{train_cfg.total_steps} loss {rec.loss:.4f} "
                    f"lr {lr:.2e} gnorm {norm:.3f}")
            if step % train_cfg.eval_interval == 0 or step == train_cfg.total_steps:
                val_loss = run_eval(step)
                if val_loss < best_val:
                    best_val = val_loss
                    save_model(ckpt_path, mp, extra=extra)
                if log:
                    log(f"step {step} val_loss {val_loss:.4f} ppl {math.exp(val_loss):.2f}")

    eval_csv = out_dir / "eval_log.csv"
    with open(eval_csv, "w", newline="") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(["step", "val_loss", "val_ppl"])
        for row in eval_rows:
            writer.writerow([row[0], f"{row[1]:.10f}", f"{row[2]:.6f}"])

    summary = {
        "initial_val_loss": initial_val,
        "final_val_loss": eval_rows[-1][1],
        "best_val_loss": best_val,
        "tokenizer": tok,
        "model": mp,
        "train_csv": str(train_csv),
        "eval_csv": str(eval_csv),
        "checkpoint": str(ckpt_path),
        "records": records,
    }
    return records, summary


@dataclass
class AblationRow:
    interval: int
    window: int
    use_intermediate_mlp: bool
    params: int
    initial_loss: float
    final_loss: float
    val_loss: float
    val_ppl: float
    diverged: bool


def run_ablation_grid(model_cfg: ScoutConfig, train_cfg: TrainConfig, corpus_path,
                      out_dir, intervals=(2, 4, 8), windows=(32, 64),
                      mlp_flags=(True, False), log=None) -> list[AblationRow]:
    """Train every (interval, window, mid-MLP) cell briefly and tabulate."""
    from .model import param_count
    rows = []
    out_dir = Path(out_dir)
    for k in intervals:
        for w in windows:
            for flag in mlp_flags:
                cfg = replace(model_cfg, checkpoint_interval=k, window=w,
                              use_intermediate_mlp=flag, mixer="swa")
                cell = f"k{k}_w{w}_mlp{'on' if flag else 'off'}"
                if log:
                    log(f"ablation cell {cell}")
                records, summary = train(cfg, train_cfg, corpus_path, out_dir / cell)
                losses = [r.loss for r in records]
                diverged = (not all(math.isfinite(x) for x in losses)
                            or losses[-1] >= losses[0])
                rows.append(AblationRow(
                    interval=k, window=w, use_intermediate_mlp=flag,
                    params=param_count(summary["model"].config),
                    initial_loss=losses[0], final_loss=losses[-1],
                    val_loss=summary["final_val_loss"],
                    val_ppl=math.exp(summary["final_val_loss"]),
                    diverged=diverged,
                ))
    return rows

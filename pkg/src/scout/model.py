"""Full layer stack: embeddings, mixed layers, head, and incremental generation.

A layer is: pre-attention block (norm + mixer + residual, optional mid
MLP), checkpoint attention with its own residual, then a final norm +
MLP + residual. The model wraps ``n_layers`` of those between an
embedding table and an (optionally tied) output projection, with a final
norm before the head. No positional encodings are used: the recurrent
mixer is order-aware by construction and the windowed mixer by its
causal mask.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from . import tensor as T
from .attention import AttnParams, CheckpointCache, scout_attention
from .errors import ConfigError, InputError, UsageError
from .mixers import (BlockParams, MlpParams, NormParams, SsmParams, SwaParams,
                     init_mixer_state, ltm_block, mixer_step, mlp)
from .tensor import Rng, Tensor, dtype_for

MIXERS = ("swa", "ssm")


@dataclass
class ScoutConfig:
    """Architecture and ablation knobs; every test-suite model is built from one."""
    width: int = 128              # token embedding size
    n_layers: int = 4
    checkpoint_interval: int = 8
    mixer: str = "swa"
    window: int = 64              # swa only: predecessors attended besides self
    state_size: int = 16          # ssm only: recurrent state per channel
    mlp_ratio: int = 4
    use_intermediate_mlp: bool = True
    vocab: int = 100
    max_seq: int = 512
    seed: int = 0
    precision: int = 64
    tie_embeddings: bool = False

    def validate(self) -> "ScoutConfig":
        positive = ["width", "n_layers", "checkpoint_interval", "mlp_ratio",
                    "vocab", "max_seq", "state_size"]
        for name in positive:
            if getattr(self, name) < 1:
                raise ConfigError(f"model.{name} must be positive, got {getattr(self, name)}")
        if self.window < 0:
            raise ConfigError(f"model.window must be >= 0, got {self.window}")
        if self.mixer not in MIXERS:
            raise ConfigError(f"model.mixer must be one of {MIXERS}, got {self.mixer!r}")
        if self.precision not in (32, 64):
            raise ConfigError(f"model.precision must be 32 or 64, got {self.precision}")
        return self

    @property
    def dtype(self):
        return dtype_for(self.precision)


@dataclass
class LayerParams:
    block: BlockParams
    attn: AttnParams
    norm_out: NormParams
    mlp_out: MlpParams


@dataclass
class ModelParams:
    config: ScoutConfig
    embed: Tensor
    layers: list[LayerParams]
    norm_final: NormParams
    head: Tensor | None  # None when tied to the embedding


def _norm(rng: Rng, name: str, d: int, dtype) -> NormParams:
    return NormParams(
        gain=Tensor(np.ones(d, dtype=dtype), requires_grad=True),
        bias=Tensor(np.zeros(d, dtype=dtype), requires_grad=True),
    )


def _mlp(rng: Rng, name: str, d: int, ratio: int, dtype) -> MlpParams:
    hidden = ratio * d
    return MlpParams(
        w_in=T.init_param(rng, f"{name}.w_in", (d, hidden), fan_in=d, dtype=dtype),
        w_out=T.init_param(rng, f"{name}.w_out", (hidden, d), fan_in=hidden, dtype=dtype),
    )


def _mixer(rng: Rng, name: str, cfg: ScoutConfig, dtype):
    d = cfg.width
    if cfg.mixer == "swa":
        return SwaParams(
            wq=T.init_param(rng, f"{name}.wq", (d, d), fan_in=d, dtype=dtype),
            wk=T.init_param(rng, f"{name}.wk", (d, d), fan_in=d, dtype=dtype),
            wv=T.init_param(rng, f"{name}.wv", (d, d), fan_in=d, dtype=dtype),
            window=cfg.window,
        )
    return SsmParams(
        wa=T.init_param(rng, f"{name}.wa", (d, cfg.state_size), fan_in=d, dtype=dtype),
        wb=T.init_param(rng, f"{name}.wb", (d, cfg.state_size), fan_in=d, dtype=dtype),
        wc=T.init_param(rng, f"{name}.wc", (d, cfg.state_size), fan_in=d, dtype=dtype),
    )


def init_params(cfg: ScoutConfig) -> ModelParams:
    cfg.validate()
    rng = Rng(cfg.seed)
    d, dtype = cfg.width, cfg.dtype
    layers = []
    for i in range(cfg.n_layers):
        name = f"layers.{i}"
        block = BlockParams(
            norm_in=_norm(rng, f"{name}.norm_in", d, dtype),
            mixer=_mixer(rng, f"{name}.mixer", cfg, dtype),
            use_intermediate_mlp=cfg.use_intermediate_mlp,
            norm_mid=_norm(rng, f"{name}.norm_mid", d, dtype) if cfg.use_intermediate_mlp else None,
            mlp_mid=_mlp(rng, f"{name}.mlp_mid", d, cfg.mlp_ratio, dtype) if cfg.use_intermediate_mlp else None,
        )
        attn = AttnParams(
            wq=T.init_param(rng, f"{name}.attn.wq", (d, d), fan_in=d, dtype=dtype),
            wk=T.init_param(rng, f"{name}.attn.wk", (d, d), fan_in=d, dtype=dtype),
            wv=T.init_param(rng, f"{name}.attn.wv", (d, d), fan_in=d, dtype=dtype),
            interval=cfg.checkpoint_interval,
        )
        layers.append(LayerParams(
            block=block,
            attn=attn,
            norm_out=_norm(rng, f"{name}.norm_out", d, dtype),
            mlp_out=_mlp(rng, f"{name}.mlp_out", d, cfg.mlp_ratio, dtype),
        ))
    embed = T.init_param(rng, "embed", (cfg.vocab, d), fan_in=d, dtype=dtype)
    head = None
    if not cfg.tie_embeddings:
        # 1/fan_in (not 1/sqrt) keeps initial logits near zero, so an
        # untrained model scores close to the uniform baseline.
        head = T.init_param(rng, "head", (d, cfg.vocab), fan_in=d, dtype=dtype,
                            std=1.0 / d)
    return ModelParams(config=cfg, embed=embed, layers=layers,
                       norm_final=_norm(rng, "norm_final", d, dtype), head=head)


def named_parameters(mp: ModelParams) -> dict[str, Tensor]:
    out: dict[str, Tensor] = {"embed": mp.embed}
    for i, lp in enumerate(mp.layers):
        name = f"layers.{i}"
        out[f"{name}.norm_in.gain"] = lp.block.norm_in.gain
        out[f"{name}.norm_in.bias"] = lp.block.norm_in.bias
        mx = lp.block.mixer
        if isinstance(mx, SwaParams):
            out[f"{name}.mixer.wq"] = mx.wq
            out[f"{name}.mixer.wk"] = mx.wk
            out[f"{name}.mixer.wv"] = mx.wv
        else:
            out[f"{name}.mixer.wa"] = mx.wa
            out[f"{name}.mixer.wb"] = mx.wb
            out[f"{name}.mixer.wc"] = mx.wc
        if lp.block.use_intermediate_mlp:
            out[f"{name}.norm_mid.gain"] = lp.block.norm_mid.gain
            out[f"{name}.norm_mid.bias"] = lp.block.norm_mid.bias
            out[f"{name}.mlp_mid.w_in"] = lp.block.mlp_mid.w_in
            out[f"{name}.mlp_mid.w_out"] = lp.block.mlp_mid.w_out
        out[f"{name}.attn.wq"] = lp.attn.wq
        out[f"{name}.attn.wk"] = lp.attn.wk
        out[f"{name}.attn.wv"] = lp.attn.wv
        out[f"{name}.norm_out.gain"] = lp.norm_out.gain
        out[f"{name}.norm_out.bias"] = lp.norm_out.bias
        out[f"{name}.mlp_out.w_in"] = lp.mlp_out.w_in
        out[f"{name}.mlp_out.w_out"] = lp.mlp_out.w_out
    out["norm_final.gain"] = mp.norm_final.gain
    out["norm_final.bias"] = mp.norm_final.bias
    if mp.head is not None:
        out["head"] = mp.head
    return out


def intermediate_mlp_param_count(cfg: ScoutConfig) -> int:
    """Parameters added by the mid MLP branch (its norm pair plus both mats)."""
    d = cfg.width
    return 2 * d + 2 * cfg.mlp_ratio * d * d


def param_count(cfg: ScoutConfig) -> int:
    """Exact parameter count implied by a config (never measured, derived)."""
    d = cfg.width
    mixer = 3 * d * d if cfg.mixer == "swa" else 3 * d * cfg.state_size
    per_layer = 2 * d + mixer + 3 * d * d + 2 * d + 2 * cfg.mlp_ratio * d * d
    if cfg.use_intermediate_mlp:
        per_layer += intermediate_mlp_param_count(cfg)
    total = cfg.vocab * d + cfg.n_layers * per_layer + 2 * d
    if not cfg.tie_embeddings:
        total += d * cfg.vocab
    return total


def layer_forward(x: Tensor, lp: LayerParams) -> Tensor:
    """One full layer: mix, attend over checkpoints, then the output MLP."""
    xt = ltm_block(x, lp.block)
    out = scout_attention(xt, lp.attn)
    y1 = T.add(out, xt)
    return T.add(y1, mlp(T.layer_norm(y1, lp.norm_out.gain, lp.norm_out.bias), lp.mlp_out))


def model_forward(ids, mp: ModelParams) -> Tensor:
    """Logits for every position of a token id sequence, shape (n, vocab)."""
    ids = np.asarray(ids, dtype=np.intp)
    if ids.ndim != 1 or ids.size == 0:
        raise UsageError(f"model_forward needs a non-empty 1-d id sequence, got shape {ids.shape}")
    if ids.min() < 0 or ids.max() >= mp.config.vocab:
        raise InputError(
            f"token id out of range: ids span [{ids.min()}, {ids.max()}], vocab={mp.config.vocab}")
    x = T.row_select(mp.embed, ids)
    for lp in mp.layers:
        x = layer_forward(x, lp)
    x = T.layer_norm(x, mp.norm_final.gain, mp.norm_final.bias)
    head = mp.head if mp.head is not None else T.transpose(mp.embed)
    return T.matmul(x, head)


# ---------------------------------------------------------------------------
# incremental decoding


@dataclass
class GenState:
    """Per-layer (mixer state, attention cache) pairs plus one shared position."""
    mixers: list
    caches: list
    pos: int = 0

    @property
    def score_dots(self) -> int:
        return sum(c.score_dots for c in self.caches)

    @property
    def cache_entries(self) -> list[int]:
        return [c.entries for c in self.caches]


def init_gen_state(mp: ModelParams, cache_factory=None) -> GenState:
    cfg = mp.config
    mixers = [init_mixer_state(lp.block.mixer, cfg.width, cfg.dtype) for lp in mp.layers]
    if cache_factory is None:
        caches = [CheckpointCache(cfg.checkpoint_interval, dtype=cfg.dtype) for _ in mp.layers]
    else:
        caches = [cache_factory(lp) for lp in mp.layers]
    return GenState(mixers=mixers, caches=caches)


def model_step(state: GenState, token_id: int, mp: ModelParams) -> np.ndarray:
    """Process one token through every layer; returns that position's logits."""
    cfg = mp.config
    if not (0 <= token_id < cfg.vocab):
        raise InputError(f"token id {token_id} out of range for vocab {cfg.vocab}")
    t = state.pos + 1
    with T.no_grad():
        x = T.take_row(mp.embed, int(token_id))
        for lp, mstate, cache in zip(mp.layers, state.mixers, state.caches):
            blk = lp.block
            x1 = T.layer_norm(x, blk.norm_in.gain, blk.norm_in.bias)
            _, mixed = mixer_step(mstate, x1, blk.mixer, position=t)
            x2 = T.add(x, mixed)
            if blk.use_intermediate_mlp:
                xt = T.add(x2, mlp(T.layer_norm(x2, blk.norm_mid.gain, blk.norm_mid.bias),
                                   blk.mlp_mid))
            else:
                xt = x2
            if cache.pos != t - 1:
                raise UsageError(f"attention cache at position {cache.pos}, expected {t - 1}")
            attn_out = Tensor(cache.step(xt.data, lp.attn))
            y1 = T.add(attn_out, xt)
            x = T.add(y1, mlp(T.layer_norm(y1, lp.norm_out.gain, lp.norm_out.bias), lp.mlp_out))
        x = T.layer_norm(x, mp.norm_final.gain, mp.norm_final.bias)
        head = mp.head if mp.head is not None else T.transpose(mp.embed)
        logits = T.matmul(x, head)
    state.pos = t
    return logits.data


@dataclass
class Sampling:
    kind: str = "greedy"          # "greedy" or "temperature"
    temperature: float = 1.0
    seed: int = 0


def _pick(logits: np.ndarray, sampling: Sampling, stream) -> int:
    if sampling.kind == "greedy" or sampling.temperature == 0.0:
        return int(np.argmax(logits))
    probs = T.softmax64(logits / sampling.temperature, np.float64)
    probs = probs / probs.sum()
    return int(stream.choice(probs.size, p=probs))


def generate(mp: ModelParams, prompt, steps: int, sampling: Sampling | None = None,
             state: GenState | None = None, return_logits: bool = False):
    """Extend ``prompt`` by ``steps`` tokens using the incremental path.

    Greedy decoding is deterministic; temperature sampling draws from a
    stream derived from ``sampling.seed``. With ``return_logits`` the
    per-position logits matrix (one row per processed position) is
    returned alongside the ids.
    """
    prompt = list(np.asarray(prompt, dtype=np.intp).reshape(-1))
    if not prompt:
        raise UsageError("generate needs a non-empty prompt")
    sampling = sampling or Sampling()
    state = state or init_gen_state(mp)
    if state.pos != 0:
        raise UsageError("generate needs a fresh GenState")
    stream = Rng(sampling.seed).stream("sampling")
    ids = list(map(int, prompt))
    rows = []
    logits = None
    for tok in ids:
        logits = model_step(state, tok, mp)
        rows.append(logits)
    for _ in range(steps):
        nxt = _pick(logits, sampling, stream)
        ids.append(nxt)
        logits = model_step(state, nxt, mp)
        rows.append(logits)
    if return_logits:
        return ids, np.stack(rows)
    return ids


# ---------------------------------------------------------------------------
# parameter file round trip


def save_model(path, mp: ModelParams, extra: dict[str, np.ndarray] | None = None) -> None:
    named = {k: v for k, v in named_parameters(mp).items()}
    if extra:
        for k, v in extra.items():
            named[k] = v
    T.save_tensors(path, named)


def load_model(path, cfg: ScoutConfig) -> tuple[ModelParams, dict[str, np.ndarray]]:
    """Rebuild a model from a tensor file; non-parameter entries are returned as-is."""
    stored = T.load_tensors(path)
    mp = init_params(cfg)
    params = named_parameters(mp)
    extra = {k: v for k, v in stored.items() if k not in params}
    for name, p in params.items():
        if name not in stored:
            raise ConfigError(f"checkpoint is missing parameter {name!r}")
        arr = stored[name]
        if tuple(arr.shape) != tuple(p.shape):
            raise ConfigError(
                f"checkpoint parameter {name!r} has shape {tuple(arr.shape)}, "
                f"config implies {tuple(p.shape)}")
        p.data[...] = arr
    return mp, extra

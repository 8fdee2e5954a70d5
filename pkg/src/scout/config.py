"""Run configuration files: flat key=value lines under [model]/[train]/[bench].

Full-line and trailing ``#`` comments are allowed. Every key must match
a known field; unknown sections or keys are rejected with the offending
line number, and bad values name the field they were meant for. Missing
keys fall back to the dataclass defaults.
"""

from __future__ import annotations

from dataclasses import dataclass, field, fields
from pathlib import Path

from .bench import VARIANTS
from .errors import ConfigError
from .model import ScoutConfig
from .training import TrainConfig


@dataclass
class BenchConfig:
    lengths: list[int] = field(default_factory=lambda: [512, 1024, 2048, 4096])
    variants: list[str] = field(default_factory=lambda: ["scout", "full", "swa"])
    repeats: int = 3
    max_bytes: int = 2 * 1024 ** 3

    def validate(self) -> "BenchConfig":
        if not self.lengths or any(n < 1 for n in self.lengths):
            raise ConfigError(f"bench.lengths must be positive, got {self.lengths}")
        for v in self.variants:
            if v not in VARIANTS:
                raise ConfigError(f"bench.variants entry {v!r} not in {VARIANTS}")
        if self.repeats < 1:
            raise ConfigError(f"bench.repeats must be >= 1, got {self.repeats}")
        if self.max_bytes < 1:
            raise ConfigError(f"bench.max_bytes must be >= 1, got {self.max_bytes}")
        return self


@dataclass
class RunConfig:
    model: ScoutConfig
    train: TrainConfig
    bench: BenchConfig

    def validate(self) -> "RunConfig":
        self.model.validate()
        self.train.validate()
        self.bench.validate()
        return self


_SECTIONS = {"model": ScoutConfig, "train": TrainConfig, "bench": BenchConfig}


def _convert(raw: str, typ, where: str):
    raw = raw.strip()
    try:
        if typ is int:
            return int(raw)
        if typ is float:
            return float(raw)
        if typ is bool:
            low = raw.lower()
            if low in ("true", "yes", "1", "on"):
                return True
            if low in ("false", "no", "0", "off"):
                return False
            raise ValueError(f"expected true/false, got {raw!r}")
        if typ is str:
            return raw
        if typ == list[int]:
            return [int(x) for x in raw.split(",") if x.strip()]
        if typ == list[str]:
            return [x.strip() for x in raw.split(",") if x.strip()]
    except ValueError as exc:
        raise ConfigError(f"{where}: {exc}") from None
    raise ConfigError(f"{where}: unsupported field type {typ!r}")


def parse_run_config(path) -> RunConfig:
    path = Path(path)
    text = path.read_text(encoding="utf-8")
    values: dict[str, dict[str, object]] = {name: {} for name in _SECTIONS}
    field_types = {
        name: {f.name: f.type for f in fields(cls)} for name, cls in _SECTIONS.items()
    }
    section = None
    for lineno, raw_line in enumerate(text.splitlines(), start=1):
        line = raw_line.split("#", 1)[0].strip()
        if not line:
            continue
        where = f"{path.name}:{lineno}"
        if line.startswith("[") and line.endswith("]"):
            section = line[1:-1].strip()
            if section not in _SECTIONS:
                raise ConfigError(f"{where}: unknown section [{section}], "
                                  f"expected one of {sorted(_SECTIONS)}")
            continue
        if "=" not in line:
            raise ConfigError(f"{where}: expected 'key = value', got {raw_line.strip()!r}")
        if section is None:
            raise ConfigError(f"{where}: key outside any [section]")
        key, raw_value = (part.strip() for part in line.split("=", 1))
        types = field_types[section]
        if key not in types:
            raise ConfigError(f"{where}: unknown key {key!r} in [{section}] "
                              f"(known: {', '.join(sorted(types))})")
        if key in values[section]:
            raise ConfigError(f"{where}: duplicate key {key!r} in [{section}]")
        # dataclass field types arrive as strings under future annotations
        typ = types[key]
        if isinstance(typ, str):
            typ = {"int": int, "float": float, "bool": bool, "str": str,
                   "list[int]": list[int], "list[str]": list[str]}[typ]
        values[section][key] = _convert(raw_value, typ, f"{where}: field {section}.{key}")
    cfg = RunConfig(
        model=ScoutConfig(**values["model"]),
        train=TrainConfig(**values["train"]),
        bench=BenchConfig(**values["bench"]),
    )
    return cfg.validate()


def default_config_text() -> str:
    """A fully commented config with every key at its default."""
    return """\
# scout run configuration (key = value under [model]/[train]/[bench])

[model]
width = 128                # embedding size
n_layers = 4
checkpoint_interval = 8    # one checkpoint row kept every this many tokens
mixer = swa                # swa | ssm
window = 64                # swa: predecessors attended besides self
state_size = 16            # ssm: recurrent state per channel
mlp_ratio = 4
use_intermediate_mlp = true
vocab = 100                # overridden by the tokenizer when training
max_seq = 512
seed = 0
precision = 32             # 32 for training speed, 64 for verification
tie_embeddings = false

[train]
peak_lr = 3e-4
weight_decay = 0.1
clip_norm = 1.0
warmup_steps = 100
total_steps = 2000
batch_tokens = 1024
eval_interval = 200
eval_tokens = 16384
val_fraction = 0.1
seed = 0
corpus =                   # path to a UTF-8 text file
out_dir =                  # defaults to runs/<config name>

[bench]
lengths = 512,1024,2048,4096
variants = scout,full,swa
repeats = 3
max_bytes = 2147483648
"""

"""Checkpoint-compressed sparse attention with linear token mixers.

A desk-scale, fully verifiable stack: a small autodiff tensor core, two
linear token mixers (sliding-window attention and a selective-decay
recurrence), sparse attention over checkpoint rows with an O(n/k) decode
cache, brute-force oracles, a character-level training harness, and an
exact-count efficiency benchmark.
"""

from .attention import (AttnParams, CheckpointCache, ScoutScores,
                        causal_checkpoint_mask, checkpoint_indices, compress,
                        scout_attention, scout_attention_step)
from .errors import (ConfigError, InputError, InternalError, NumericError,
                     ScoutError, ShapeError, UsageError)
from .mixers import (BlockParams, MlpParams, NormParams, SsmParams, SwaParams,
                     ltm_block, mixer_step, ssm_forward, swa_forward)
from .model import (GenState, LayerParams, ModelParams, Sampling, ScoutConfig,
                    generate, init_gen_state, init_params, layer_forward,
                    load_model, model_forward, model_step, named_parameters,
                    param_count, save_model)
from .tensor import (Graph, MemoryMeter, METER, Rng, Tensor, backward,
                     grad_check, load_tensors, no_grad, save_tensors)
from .training import (CharTokenizer, TrainConfig, TrainRecord, adamw_step,
                       cosine_lr, eval_ppl, train)

__version__ = "0.1.0"

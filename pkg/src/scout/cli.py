"""Command-line entry point.

stdout carries machine-parsable output only (CSV rows or JSON lines);
progress and human summaries go to stderr. Exit codes: 0 ok, 2 usage,
3 bad config/input, 4 I/O problem, 5 verification failure.
"""

from __future__ import annotations

import argparse
import csv
import io
import json
import math
import sys
from dataclasses import asdict, replace
from pathlib import Path

import numpy as np

from .bench import run_grid, scaling_summary
from .checks import run_checks
from .config import parse_run_config
from .errors import ConfigError, InputError, UsageError
from .model import Sampling, generate, load_model, param_count
from .training import CharTokenizer, eval_ppl, run_ablation_grid, train

EXIT_OK = 0
EXIT_FAILURE = 1
EXIT_USAGE = 2
EXIT_CONFIG = 3
EXIT_IO = 4
EXIT_CHECK = 5

BENCH_CSV_HEADER = ["variant", "n", "score_dots", "cache_entries", "wall_ms", "peak_bytes"]
ABLATION_CSV_HEADER = ["checkpoint_interval", "window", "use_intermediate_mlp", "params",
                       "initial_loss", "final_loss", "val_loss", "val_ppl", "diverged"]


def _err(msg: str) -> None:
    print(msg, file=sys.stderr)


def _load_config(args) -> "RunConfig":
    cfg = parse_run_config(args.config)
    if getattr(args, "precision", None):
        cfg.model = replace(cfg.model, precision=int(args.precision))
    return cfg


def _load_checkpoint(args, cfg):
    from .tensor import load_tensors
    stored = load_tensors(args.checkpoint)
    if "tokenizer/codepoints" not in stored:
        raise ConfigError(f"{args.checkpoint} carries no tokenizer; was it written by train?")
    tok = CharTokenizer.from_codepoints(stored["tokenizer/codepoints"])
    # the trained vocab is the tokenizer's, whatever the config file says
    mp, _ = load_model(args.checkpoint, replace(cfg.model, vocab=tok.vocab_size))
    return mp, tok


def cmd_train(args) -> int:
    cfg = _load_config(args)
    corpus = args.corpus or cfg.train.corpus
    if not corpus:
        raise ConfigError("no corpus: set train.corpus in the config or pass --corpus")
    out_dir = args.out or cfg.train.out_dir or f"runs/{Path(args.config).stem}"
    _err(f"training {cfg.model.mixer} model "
         f"({param_count(cfg.model)} params at config vocab) -> {out_dir}")

    def on_eval(step, val_loss, ppl):
        print(json.dumps({"event": "eval", "step": step,
                          "val_loss": val_loss, "val_ppl": ppl}), flush=True)

    records, summary = train(cfg.model, cfg.train, corpus, out_dir, log=_err)
    from .plotting import save_train_figure
    fig = save_train_figure(records,
                            [(s, l, p) for s, l, p in _read_eval_csv(summary["eval_csv"])],
                            Path(out_dir) / "train_curves.png")
    print(json.dumps({
        "event": "done",
        "steps": len(records),
        "initial_val_loss": summary["initial_val_loss"],
        "final_val_loss": summary["final_val_loss"],
        "best_val_loss": summary["best_val_loss"],
        "checkpoint": summary["checkpoint"],
        "train_csv": summary["train_csv"],
        "eval_csv": summary["eval_csv"],
        "figure": fig,
    }))
    _err(f"done: val loss {summary['initial_val_loss']:.4f} -> "
         f"{summary['final_val_loss']:.4f}; best checkpoint {summary['checkpoint']}")
    return EXIT_OK


def _read_eval_csv(path):
    with open(path, newline="") as fh:
        reader = csv.DictReader(fh)
        return [(int(r["step"]), float(r["val_loss"]), float(r["val_ppl"])) for r in reader]


def cmd_eval(args) -> int:
    cfg = _load_config(args)
    mp, tok = _load_checkpoint(args, cfg)
    text = Path(args.text).read_text(encoding="utf-8")
    ids = tok.encode(text)
    ppl = eval_ppl(mp, ids)
    print(json.dumps({"tokens": int(ids.size), "cross_entropy": math.log(ppl),
                      "perplexity": ppl}))
    _err(f"{ids.size} tokens: perplexity {ppl:.3f}")
    return EXIT_OK


def cmd_generate(args) -> int:
    cfg = _load_config(args)
    mp, tok = _load_checkpoint(args, cfg)
    prompt_ids = tok.encode(args.prompt)
    if args.temp is not None:
        sampling = Sampling(kind="temperature", temperature=args.temp, seed=args.seed)
    else:
        sampling = Sampling(kind="greedy")
    ids = generate(mp, prompt_ids, steps=args.steps, sampling=sampling)
    print(json.dumps({"ids": [int(i) for i in ids], "text": tok.decode(ids)}))
    _err(f"generated {args.steps} tokens "
         f"({'greedy' if sampling.kind == 'greedy' else f'temp={args.temp}'})")
    return EXIT_OK


def cmd_bench(args) -> int:
    cfg = _load_config(args)
    rows = run_grid(cfg.model, cfg.bench.lengths, cfg.bench.variants,
                    repeats=cfg.bench.repeats, max_bytes=cfg.bench.max_bytes, log=_err)
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(BENCH_CSV_HEADER)
    for r in rows:
        writer.writerow([r.variant, r.n, r.score_dots, r.cache_entries,
                         f"{r.wall_ms:.3f}", r.peak_bytes])
    sys.stdout.write(buf.getvalue())
    out = Path(args.out)
    out.parent.mkdir(parents=True, exist_ok=True)
    out.write_text(buf.getvalue())
    from .plotting import save_bench_figure
    fig = save_bench_figure(rows, out.with_name(out.stem + "_scaling.png"))
    summary = scaling_summary(cfg.model.checkpoint_interval, cfg.model.window,
                              lengths=cfg.bench.lengths)
    _err(f"wrote {out} and {fig}")
    _err(f"slopes: scout {summary['scout_slope']:.3f}, full {summary['full_slope']:.3f}, "
         f"swa {summary['swa_slope']:.3f}; full/scout at n={cfg.bench.lengths[-1]}: "
         f"{summary['ratio_at_largest']:.2f}")
    return EXIT_OK


def cmd_check(args) -> int:
    failed = 0

    def emit(res):
        nonlocal failed
        failed += 0 if res.passed else 1
        print(json.dumps({"check": res.name, "passed": bool(res.passed),
                          "seconds": round(res.seconds, 2), "detail": res.detail}),
              flush=True)
        _err(f"{'PASS' if res.passed else 'FAIL'} {res.name} "
             f"[{res.seconds:.1f}s] {res.detail}")

    run_checks(quick=args.quick, emit=emit)
    if failed:
        _err(f"{failed} check(s) failed")
        return EXIT_CHECK
    _err("all checks passed")
    return EXIT_OK


def cmd_ablate(args) -> int:
    cfg = _load_config(args)
    corpus = args.corpus or cfg.train.corpus
    if not corpus:
        raise ConfigError("no corpus: set train.corpus in the config or pass --corpus")
    tc = replace(cfg.train, total_steps=args.steps,
                 warmup_steps=min(cfg.train.warmup_steps, max(1, args.steps // 10)))
    out = Path(args.out)
    out.parent.mkdir(parents=True, exist_ok=True)
    rows = run_ablation_grid(cfg.model, tc, corpus, out.parent / (out.stem + "_runs"),
                             log=_err)
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(ABLATION_CSV_HEADER)
    for r in rows:
        writer.writerow([r.interval, r.window, r.use_intermediate_mlp, r.params,
                         f"{r.initial_loss:.6f}", f"{r.final_loss:.6f}",
                         f"{r.val_loss:.6f}", f"{r.val_ppl:.4f}", r.diverged])
    sys.stdout.write(buf.getvalue())
    out.write_text(buf.getvalue())
    from .plotting import save_ablation_figure
    fig = save_ablation_figure(rows, out.with_name(out.stem + "_grid.png"))
    _err(f"wrote {out} and {fig}; {sum(r.diverged for r in rows)} of {len(rows)} cells diverged")
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="scout",
        description="checkpoint-compressed attention: train, evaluate, benchmark, verify")
    parser.add_argument("--precision", choices=["32", "64"],
                        help="override model.precision from the config")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("train", help="train on a UTF-8 corpus")
    p.add_argument("config")
    p.add_argument("--corpus", help="overrides train.corpus")
    p.add_argument("--out", help="output directory (default runs/<config stem>)")
    p.set_defaults(fn=cmd_train)

    p = sub.add_parser("eval", help="perplexity of a checkpoint on a text file")
    p.add_argument("config")
    p.add_argument("checkpoint")
    p.add_argument("text")
    p.set_defaults(fn=cmd_eval)

    p = sub.add_parser("generate", help="decode from a checkpoint")
    p.add_argument("config")
    p.add_argument("checkpoint")
    p.add_argument("--prompt", required=True)
    p.add_argument("--steps", type=int, default=128)
    group = p.add_mutually_exclusive_group()
    group.add_argument("--greedy", action="store_true", default=True)
    group.add_argument("--temp", type=float, default=None)
    p.add_argument("--seed", type=int, default=0, help="sampling seed for --temp")
    p.set_defaults(fn=cmd_generate)

    p = sub.add_parser("bench", help="exact-count efficiency grid")
    p.add_argument("config")
    p.add_argument("--out", required=True, help="CSV path; figure lands beside it")
    p.set_defaults(fn=cmd_bench)

    p = sub.add_parser("check", help="run the verification suite")
    p.add_argument("--quick", action="store_true", help="reduced grids, same properties")
    p.set_defaults(fn=cmd_check)

    p = sub.add_parser("ablate", help="train the interval/window/MLP grid briefly")
    p.add_argument("config")
    p.add_argument("--out", required=True, help="CSV path; figure lands beside it")
    p.add_argument("--corpus", help="overrides train.corpus")
    p.add_argument("--steps", type=int, default=300)
    p.set_defaults(fn=cmd_ablate)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.fn(args)
    except (ConfigError, InputError) as exc:
        _err(f"config error: {exc}")
        return EXIT_CONFIG
    except UsageError as exc:
        _err(f"usage error: {exc}")
        return EXIT_USAGE
    except FileNotFoundError as exc:
        _err(f"missing file: {exc}")
        return EXIT_IO
    except OSError as exc:
        _err(f"i/o error: {exc}")
        return EXIT_IO


if __name__ == "__main__":
    sys.exit(main())

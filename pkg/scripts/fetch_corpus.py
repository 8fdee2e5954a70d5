#!/usr/bin/env python3
"""Fetch a public-domain book as a training corpus, or synthesize one offline.

Usage:
    python scripts/fetch_corpus.py data/corpus.txt
    python scripts/fetch_corpus.py data/corpus.txt --synthetic --chars 1000000

The download target is Project Gutenberg's Pride and Prejudice (~0.7 MB);
any UTF-8 text file works equally well. --synthetic needs no network and
produces a deterministic pseudo-prose corpus from the packaged generator.
"""

import argparse
import sys
import urllib.request
from pathlib import Path

URL = "https://www.gutenberg.org/files/1342/1342-0.txt"


def main() -> int:
    parser = argparse.ArgumentParser(description=__doc__)
    parser.add_argument("out", help="where to write the corpus")
    parser.add_argument("--synthetic", action="store_true",
                        help="generate deterministic text instead of downloading")
    parser.add_argument("--chars", type=int, default=1_000_000,
                        help="synthetic corpus size in characters")
    parser.add_argument("--seed", type=int, default=11)
    args = parser.parse_args()
    out = Path(args.out)
    out.parent.mkdir(parents=True, exist_ok=True)
    if args.synthetic:
        from scout.data import synthetic_text
        out.write_text(synthetic_text(args.chars, seed=args.seed), encoding="utf-8")
        print(f"wrote {out} ({out.stat().st_size} bytes, synthetic seed {args.seed})")
        return 0
    print(f"downloading {URL} ...")
    with urllib.request.urlopen(URL) as resp:
        text = resp.read().decode("utf-8")
    out.write_text(text, encoding="utf-8")
    print(f"wrote {out} ({out.stat().st_size} bytes)")
    return 0


if __name__ == "__main__":
    sys.exit(main())

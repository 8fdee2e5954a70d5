"""Corpus helpers: a deterministic synthetic text generator for offline runs.

Real corpora are any UTF-8 text file (see scripts/fetch_corpus.py). The
synthetic generator exists so smoke tests and CI can run without network
access; it produces word-salad prose with enough character-level
structure (word shapes, casing, punctuation, digits) for a small model
to learn from, and is bit-reproducible from its seed.
"""

from __future__ import annotations

import numpy as np

_WORDS = (
    "the of and to in is was he for it with as his on be at by had not are "
    "but from or have an they which one you were her all she there would "
    "their we him been has when who will more no if out so said what up its "
    "about into than them can only other new some could time these two may "
    "then do first any my now such like our over man me even most made after "
    "also did many before must through back years where much your way well "
    "down should because each just those people how too little state good "
    "very make world still own see men work long get here between both life "
    "being under never day same another know while last might us great old "
    "year off come since against go came right used take three"
).split()

_NAMES = ("Alder Brook Cedar Dunes Ember Fjord Glade Harbor Inlet Juniper "
          "Knoll Larch Meadow Nettle Orchard Pine Quarry Ridge Slate Thorn").split()


def synthetic_text(n_chars: int, seed: int = 0) -> str:
    """Deterministic pseudo-prose of at least ``n_chars`` characters."""
    rng = np.random.Generator(np.random.PCG64(np.random.SeedSequence([seed, 0x7e57])))
    pieces: list[str] = []
    total = 0
    sentence_len = 0
    while total < n_chars:
        words = []
        n_words = int(rng.integers(4, 14))
        for i in range(n_words):
            r = rng.random()
            if r < 0.04:
                w = str(int(rng.integers(0, 1000)))
            elif r < 0.10:
                w = _NAMES[int(rng.integers(0, len(_NAMES)))]
            else:
                w = _WORDS[int(rng.integers(0, len(_WORDS)))]
            if i == 0:
                w = w.capitalize()
            words.append(w)
            if 0 < i < n_words - 1 and rng.random() < 0.08:
                words[-1] += ","
        ending = "." if rng.random() < 0.9 else ("?" if rng.random() < 0.5 else "!")
        sentence = " ".join(words) + ending
        sentence_len += 1
        if sentence_len >= int(rng.integers(3, 7)):
            sentence += "\n\n"
            sentence_len = 0
        else:
            sentence += " "
        pieces.append(sentence)
        total += len(sentence)
    return "".join(pieces)[:n_chars]

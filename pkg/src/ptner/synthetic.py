"""Synthetic fully-typed NER corpus: separable by token features, with noise.

Each entity type has its own head-word morphology (suffixes and casing) and a
set of trigger words that tend to precede it. Noise comes from heads shared by
several types (context decides), O-words carrying entity-like suffixes, and
heads held out of training so that dev/test need suffix and shape features.
"""
from __future__ import annotations

from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .corpus import Corpus, Sentence, write_conll
from .labels import EntitySpan, LabelSpace, encode_spans

SYLLABLES = ["ka", "ro", "mi", "te", "sul", "bra", "no", "vi", "zen", "dor", "pla", "gu",
             "fe", "lo", "tri", "xa", "mo", "ne", "qui", "sta"]

# suffixes, casing, modifier words and triggers per type
STYLES = {
    "DNA": dict(suffixes=["-1", "-2", "a", "b", "3"], upper=True,
                modifiers=["promoter", "enhancer", "gene", "locus", "region"],
                triggers=["transcription", "upstream", "encoding", "cloned", "sequence"]),
    "protein": dict(suffixes=["ase", "in", "kinase", "ogen", "ulin"], upper=False,
                    modifiers=["receptor", "factor", "complex", "subunit", "domain"],
                    triggers=["binding", "phosphorylated", "activated", "inhibits", "secreted"]),
    "cell_type": dict(suffixes=["cyte", "blast", "phage", "phil", "cells"], upper=False,
                      modifiers=["human", "resting", "mature", "primary", "peripheral"],
                      triggers=["differentiation", "isolated", "infiltrating", "cultured", "from"]),
}

FILLER = ["the", "of", "in", "and", "was", "were", "a", "to", "by", "with", "that", "we",
          "show", "these", "results", "is", "for", "data", "analysis", "observed", "levels",
          "increased", "response", "study", "effect", "not", "also", "both", "after", "an",
          "shown", "found", "role", "between", "cases", "during", "via", "its", "high", "low"]


@dataclass
class SyntheticConfig:
    train: int = 4000
    dev: int = 400
    test: int = 800
    heads_per_type: int = 60
    heldout_fraction: float = 0.25
    shared_heads: int = 12
    shared_prob: float = 0.12
    trigger_prob: float = 0.7
    decoy_prob: float = 0.15
    min_len: int = 8
    max_len: int = 22
    seed: int = 13


def _word(rng, style, length=None) -> str:
    n = length or int(rng.integers(1, 3))
    stem = "".join(rng.choice(SYLLABLES, size=n))
    w = stem + rng.choice(style["suffixes"])
    return w.upper() if style["upper"] else w


class Generator:
    def __init__(self, config: SyntheticConfig, types=tuple(STYLES)):
        self.config = config
        self.types = list(types)
        self.space = LabelSpace.from_names(self.types)
        rng = np.random.default_rng(config.seed)
        self.heads = {}
        for name in self.space.types:
            style = STYLES[name]
            words = sorted({_word(rng, style) for _ in range(config.heads_per_type * 3)})
            words = list(rng.permutation(words)[:config.heads_per_type])
            self.heads[name] = words
        n_held = int(round(config.heldout_fraction * config.heads_per_type))
        self.train_heads = {k: v[n_held:] for k, v in self.heads.items()}
        # neutral-looking ambiguous heads, typed by context only
        self.shared = ["".join(rng.choice(SYLLABLES, size=2)) + "x" for _ in range(config.shared_heads)]
        self.decoys = [_word(rng, STYLES[name]) for name in self.space.types for _ in range(5)]

    def sentence(self, rng: np.random.Generator, heldout: bool) -> tuple[list[str], list[EntitySpan]]:
        c = self.config
        length = int(rng.integers(c.min_len, c.max_len + 1))
        tokens: list[str] = []
        spans: list[EntitySpan] = []
        n_ent = int(rng.integers(1, 4))
        slots = sorted(rng.choice(length, size=n_ent, replace=False))
        pos = 0
        for slot in slots:
            while pos < slot:
                tokens.append(self._filler(rng))
                pos += 1
            t = int(rng.integers(0, len(self.space.types)))
            name = self.space.types[t]
            style = STYLES[name]
            if rng.random() < c.trigger_prob:
                tokens.append(rng.choice(style["triggers"]))
            start = len(tokens)
            if rng.random() < 0.35:
                tokens.append(rng.choice(style["modifiers"]))
            pool = self.heads[name] if heldout else self.train_heads[name]
            tokens.append(rng.choice(self.shared) if rng.random() < c.shared_prob else rng.choice(pool))
            if rng.random() < 0.2:
                tokens.append(rng.choice(style["modifiers"]))
            spans.append(EntitySpan(start, len(tokens) - 1, t))
            pos += 1
        while pos < length:
            tokens.append(self._filler(rng))
            pos += 1
        return [str(x) for x in tokens], spans

    def _filler(self, rng) -> str:
        if rng.random() < self.config.decoy_prob:
            return str(rng.choice(self.decoys)).lower() + "s"
        return str(rng.choice(FILLER))

    def corpus(self, n: int, seed: int, split: str, heldout: bool) -> Corpus:
        rng = np.random.default_rng(seed)
        sents = []
        for _ in range(n):
            tokens, spans = self.sentence(rng, heldout)
            sents.append(Sentence(tokens, encode_spans(spans, len(tokens), self.space),
                                  self.space.all_types))
        return Corpus(sents, self.space, split, name=f"synthetic.{split}")


def generate(config: SyntheticConfig | None = None) -> dict[str, Corpus]:
    config = config or SyntheticConfig()
    gen = Generator(config)
    return {
        "train": gen.corpus(config.train, config.seed + 1, "train", heldout=False),
        "dev": gen.corpus(config.dev, config.seed + 2, "dev", heldout=True),
        "test": gen.corpus(config.test, config.seed + 3, "test", heldout=True),
    }


def write_synthetic(out_dir: str | Path, config: SyntheticConfig | None = None) -> dict[str, Path]:
    out_dir = Path(out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    paths = {}
    for split, corpus in generate(config).items():
        paths[split] = out_dir / f"{split}.conll"
        write_conll(corpus, paths[split])
    return paths

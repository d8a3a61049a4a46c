"""Sparse token features standing in for a learned token representation."""
from __future__ import annotations

from collections import Counter
from dataclasses import dataclass
from typing import Iterable, Sequence

import numpy as np

WINDOW = 2
BIAS = "bias"


def word_shape(token: str) -> str:
    """A=upper, a=lower, 0=digit, anything else kept literally."""
    out = []
    for ch in token:
        if ch.isupper():
            out.append("A")
        elif ch.islower():
            out.append("a")
        elif ch.isdigit():
            out.append("0")
        else:
            out.append(ch)
    return "".join(out)


def _token_features(token: str) -> list[str]:
    if token in ("BOS", "EOS"):
        return [f"w={token}"]
    lower = token.lower()
    feats = [f"w={token}", f"lw={lower}", f"sh={word_shape(token)}"]
    for n in (1, 2, 3):
        if len(lower) >= n:
            feats.append(f"p{n}={lower[:n]}")
            feats.append(f"s{n}={lower[-n:]}")
    return feats


def token_templates(tokens: Sequence[str], t: int) -> list[str]:
    """Feature strings for position ``t`` over a +-2 window, with BOS/EOS sentinels."""
    feats = [BIAS]
    for off in range(-WINDOW, WINDOW + 1):
        i = t + off
        tok = "BOS" if i < 0 else "EOS" if i >= len(tokens) else tokens[i]
        feats.extend(f"[{off}]{f}" for f in _token_features(tok))
    return feats


class FeatureVocab:
    def __init__(self, names: Iterable[str] = ()):
        self._ids: dict[str, int] = {}
        self.frozen = False
        self.add(BIAS)
        for n in names:
            self.add(n)

    def __len__(self) -> int:
        return len(self._ids)

    def __contains__(self, name: str) -> bool:
        return name in self._ids

    def add(self, name: str) -> int:
        if name in self._ids:
            return self._ids[name]
        if self.frozen:
            raise RuntimeError("vocabulary is frozen")
        self._ids[name] = len(self._ids)
        return self._ids[name]

    def get(self, name: str) -> int | None:
        return self._ids.get(name)

    def freeze(self) -> "FeatureVocab":
        self.frozen = True
        return self

    def names(self) -> list[str]:
        return list(self._ids)

    @classmethod
    def build(cls, sentences: Iterable[Sequence[str]], min_count: int = 1) -> "FeatureVocab":
        """Vocabulary of every template feature seen at least ``min_count`` times."""
        counts: Counter = Counter()
        for tokens in sentences:
            for t in range(len(tokens)):
                counts.update(token_templates(tokens, t))
        vocab = cls()
        for name, c in counts.items():
            if c >= min_count:
                vocab.add(name)
        return vocab.freeze()


@dataclass(frozen=True, eq=False)
class FeaturizedSentence:
    """Active feature ids per position, flattened.

    ``feat_ids[i]`` is active at position ``positions[i]``; ids are unique
    within a position.
    """

    feat_ids: np.ndarray
    positions: np.ndarray
    length: int
    gold: np.ndarray
    source_typeset: frozenset

    def active(self, t: int) -> np.ndarray:
        return self.feat_ids[self.positions == t]


def extract(tokens: Sequence[str], vocab: FeatureVocab, grow: bool = False,
            gold: Sequence[int] | None = None,
            source_typeset: Iterable[int] = ()) -> FeaturizedSentence:
    if grow and vocab.frozen:
        raise RuntimeError("cannot grow a frozen vocabulary")
    ids, pos = [], []
    for t in range(len(tokens)):
        seen = set()
        for name in token_templates(tokens, t):
            fid = vocab.add(name) if grow else vocab.get(name)
            if fid is None or fid in seen:
                continue
            seen.add(fid)
            ids.append(fid)
            pos.append(t)
    gold_arr = np.asarray(gold if gold is not None else [0] * len(tokens), dtype=np.int64)
    return FeaturizedSentence(
        feat_ids=np.asarray(ids, dtype=np.int64),
        positions=np.asarray(pos, dtype=np.int64),
        length=len(tokens),
        gold=gold_arr,
        source_typeset=frozenset(source_typeset),
    )


def extract_sentence(sentence, vocab: FeatureVocab, grow: bool = False) -> FeaturizedSentence:
    """Featurize a ``corpus.Sentence`` keeping its gold labels and type set."""
    return extract(sentence.tokens, vocab, grow, sentence.gold, sentence.source_typeset)

"""CoNLL two-column I/O, n-fold type masking and fully-typed subsampling."""
from __future__ import annotations

import json
import logging
from dataclasses import dataclass
from pathlib import Path
from typing import Iterable, Sequence

import numpy as np

from .labels import LabelError, LabelSpace, decode_labels, encode_spans, project, spans_from_tags

logger = logging.getLogger(__name__)


@dataclass(frozen=True, eq=False)
class Sentence:
    tokens: tuple[str, ...]
    gold: tuple[int, ...]
    source_typeset: frozenset

    def __post_init__(self):
        object.__setattr__(self, "tokens", tuple(self.tokens))
        object.__setattr__(self, "gold", tuple(int(g) for g in self.gold))
        object.__setattr__(self, "source_typeset", frozenset(self.source_typeset))
        if not self.tokens or len(self.tokens) != len(self.gold):
            raise ValueError("a sentence needs as many labels as tokens, and at least one")

    def __eq__(self, other):
        if not isinstance(other, Sentence):
            return NotImplemented
        return (self.tokens, self.gold, self.source_typeset) == (
            other.tokens, other.gold, other.source_typeset)

    def __hash__(self):
        return hash((self.tokens, self.gold))

    def __len__(self):
        return len(self.tokens)


@dataclass
class Corpus:
    sentences: list[Sentence]
    space: LabelSpace
    split_tag: str = "train"
    name: str = ""

    def __len__(self):
        return len(self.sentences)

    def __iter__(self):
        return iter(self.sentences)

    def entity_counts(self) -> dict[str, int]:
        counts = {name: 0 for name in self.space.types}
        for s in self.sentences:
            for sp in decode_labels(s.gold, self.space):
                counts[self.space.types[sp.type]] += 1
        return counts

    def typesets(self) -> set[frozenset]:
        return {s.source_typeset for s in self.sentences}

    def check(self) -> None:
        """Every gold entity must be typed within its sentence's type set."""
        types = self.space.label_types()
        for i, s in enumerate(self.sentences):
            bad = {int(types[g]) for g in s.gold if g} - s.source_typeset
            if bad:
                raise LabelError(f"sentence {i} carries types {sorted(bad)} outside its type set")


def _conll_blocks(lines: Iterable[str]):
    block, first = [], None
    for lineno, line in enumerate(lines, 1):
        line = line.rstrip("\n").rstrip("\r")
        if not line.strip():
            if block:
                yield first, block
            block, first = [], None
            continue
        if first is None:
            first = lineno
        block.append((lineno, line))
    if block:
        yield first, block


def scan_types(path: str | Path) -> set[str]:
    """Entity type names appearing in a CoNLL file."""
    names = set()
    with open(path, encoding="utf-8") as fh:
        for line in fh:
            parts = line.split()
            if len(parts) >= 2 and parts[-1] != "O":
                names.add(parts[-1].partition("-")[2])
    return names


def read_conll(path: str | Path, space: LabelSpace, typeset: Iterable[int] | None = None,
               split_tag: str = "train") -> Corpus:
    """Read ``token<TAB>label`` lines; blank lines separate sentences.

    Labels are re-encoded through spans, so IOB2 input comes out in the space's
    schema. ``typeset`` defaults to every type of the space.
    """
    typeset = space.all_types if typeset is None else frozenset(typeset)
    sentences = []
    path = Path(path)
    with open(path, encoding="utf-8") as fh:
        for _, block in _conll_blocks(fh):
            tokens, tags = [], []
            for lineno, line in block:
                parts = line.split("\t") if "\t" in line else line.split()
                if len(parts) < 2:
                    raise LabelError(f"{path}:{lineno}: expected 'token<TAB>label'")
                try:
                    tags.append(space.parse(parts[-1].strip()))
                except LabelError as err:
                    raise LabelError(f"{path}:{lineno}: {err}") from None
                tokens.append(parts[0])
            spans = spans_from_tags(tags)
            sentences.append(Sentence(tokens, encode_spans(spans, len(tokens), space), typeset))
    corpus = Corpus(sentences, space, split_tag, name=path.name)
    corpus.check()
    return corpus


def read_tokens(path: str | Path) -> list[list[str]]:
    """Sentences of a CoNLL-like file, first column only; labels may be absent."""
    with open(path, encoding="utf-8") as fh:
        return [[line.split()[0] for _, line in block] for _, block in _conll_blocks(fh)]


def write_columns(path: str | Path, sentences: Iterable[Sequence[Sequence[str]]]) -> None:
    """Write one TAB-separated row per token, a blank line after each sentence."""
    path = Path(path)
    try:
        with open(path, "w", encoding="utf-8", newline="\n") as fh:
            for rows in sentences:
                for row in rows:
                    fh.write("\t".join(row) + "\n")
                fh.write("\n")
    except OSError as err:
        raise OSError(f"cannot write {path}: {err}") from err


def write_conll(corpus: Corpus, path: str | Path) -> None:
    to_str = corpus.space.to_string
    write_columns(path, ([(tok, to_str(g)) for tok, g in zip(s.tokens, s.gold)]
                         for s in corpus.sentences))


def fold_sizes(n_items: int, n: int) -> list[int]:
    base, rem = divmod(n_items, n)
    return [base + (j < rem) for j in range(n)]


def fold_indices(corpus_size: int, n: int, seed: int) -> list[np.ndarray]:
    """Source sentence indices of each fold.

    Seeded permutation cut into contiguous near-equal chunks; the earliest
    folds take the remainder.
    """
    order = np.random.default_rng(seed).permutation(corpus_size)
    out, offset = [], 0
    for size in fold_sizes(corpus_size, n):
        out.append(np.sort(order[offset:offset + size]))
        offset += size
    return out


def prefix_space(space: LabelSpace, n_types: int) -> LabelSpace:
    """Label space of the first ``n_types`` types; label ids are unchanged."""
    return LabelSpace(space.types[:n_types], space.schema)


def mask_split(corpus: Corpus, n: int, seed: int) -> list[Corpus]:
    """Split a fully-typed corpus into ``n`` folds, fold j keeping only type j.

    Types past the first ``n`` are dropped entirely, so the folds live in the
    label space of the first ``n`` types.
    """
    if not 1 <= n <= corpus.space.n_types:
        raise ValueError(f"cannot make {n} folds from {corpus.space.n_types} types")
    space = prefix_space(corpus.space, n)
    folds = []
    for j, idx in enumerate(fold_indices(len(corpus), n, seed)):
        keep = frozenset([j])
        sents = [Sentence(corpus.sentences[i].tokens,
                          project(corpus.sentences[i].gold, keep, corpus.space), keep)
                 for i in idx]
        folds.append(Corpus(sents, space, corpus.split_tag, name=f"fold{j}.{space.types[j]}"))
    return folds


def restrict_types(corpus: Corpus, n_types: int) -> Corpus:
    """Project every sentence onto the first ``n_types`` types."""
    keep = frozenset(range(n_types))
    sents = [Sentence(s.tokens, project(s.gold, keep, corpus.space), keep & s.source_typeset)
             for s in corpus.sentences]
    return Corpus(sents, prefix_space(corpus.space, n_types), corpus.split_tag, corpus.name)


def subsample_standard(corpus: Corpus, n_types: int, s_sentences: int, seed: int) -> Corpus:
    """Seeded uniform sample of ``s_sentences`` sentences, fully typed over the first ``n_types``."""
    if not 0 <= s_sentences <= len(corpus):
        raise ValueError(f"cannot sample {s_sentences} of {len(corpus)} sentences")
    if s_sentences == len(corpus):
        idx = np.arange(len(corpus))
    else:
        idx = np.sort(np.random.default_rng(seed).choice(len(corpus), s_sentences, replace=False))
    sub = Corpus([corpus.sentences[i] for i in idx], corpus.space, corpus.split_tag, corpus.name)
    return restrict_types(sub, n_types)


def single_type(corpus: Corpus, type_index: int) -> Corpus:
    keep = frozenset([type_index])
    sents = [Sentence(s.tokens, project(s.gold, keep, corpus.space), keep) for s in corpus.sentences]
    return Corpus(sents, corpus.space, corpus.split_tag, corpus.name)


def mask_stats(folds: Sequence[Corpus]) -> dict:
    """Per-fold sentence counts and entity counts of the kept type."""
    space = folds[0].space
    stats = {"n_folds": len(folds), "folds": []}
    for j, fold in enumerate(folds):
        stats["folds"].append({
            "fold": j,
            "type": space.types[j],
            "sentences": len(fold),
            "entities": fold.entity_counts()[space.types[j]],
        })
    return stats


def write_mask_output(folds: Sequence[Corpus], out_dir: str | Path) -> dict:
    out_dir = Path(out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    for j, fold in enumerate(folds):
        write_conll(fold, out_dir / f"fold{j}.{fold.space.types[j]}.conll")
    stats = mask_stats(folds)
    (out_dir / "stats.json").write_text(json.dumps(stats, indent=2, sort_keys=True) + "\n")
    return stats

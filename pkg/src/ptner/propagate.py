"""Label-propagation baseline.

One model per fold is trained on that fold alone; each model then labels the
other folds with the types it was trained on. Retraining uses the marginal
objective over lattices that combine the gold constraints with the propagated
spans.
"""
from __future__ import annotations

import logging
from dataclasses import dataclass
from typing import NamedTuple, Sequence

import numpy as np

from .corpus import Corpus
from .crf import core
from .crf.core import Lattice, Model
from .features import FeaturizedSentence, FeatureVocab, extract_sentence
from .labels import EntitySpan, LabelSpace, decode_labels, encode_spans, project
from .objectives import regime
from .trainer import TrainConfig, TrainItem, TrainResult, build_items, sgd_train

logger = logging.getLogger(__name__)


class PropagatedSpan(NamedTuple):
    span: EntitySpan
    source: int  # index of the fold whose model predicted it


@dataclass
class AnnotatedFold:
    corpus: Corpus
    propagated: list[list[PropagatedSpan]]

    def n_propagated(self) -> int:
        return sum(len(p) for p in self.propagated)


def fold_typeset(fold: Corpus) -> frozenset:
    typesets = fold.typesets()
    if len(typesets) != 1:
        raise ValueError(f"fold {fold.name!r} mixes type sets {sorted(map(sorted, typesets))}")
    return next(iter(typesets))


def cross_annotate(folds: Sequence[Corpus], models: Sequence[Model], vocab: FeatureVocab | None = None
                   ) -> list[AnnotatedFold]:
    """Let every fold's model label the sentences of every other fold."""
    if len(models) != len(folds):
        raise ValueError(f"{len(models)} models for {len(folds)} folds")
    typesets = [fold_typeset(f) for f in folds]
    for j, (fold, model) in enumerate(zip(folds, models)):
        if model.space.n_labels != fold.space.n_labels or model.space.types != fold.space.types:
            raise ValueError(f"model {j} label space does not match fold {j}")
        trained = model.metadata.get("typeset")
        if trained is not None and set(trained) != {fold.space.types[t] for t in typesets[j]}:
            raise ValueError(f"model {j} was trained on {trained}, fold {j} is typed "
                             f"{sorted(fold.space.types[t] for t in typesets[j])}")
    out = []
    for i, fold in enumerate(folds):
        propagated = []
        for s in fold:
            spans = []
            for j, model in enumerate(models):
                if j == i:
                    continue
                fs = extract_sentence(s, vocab or model.vocab)
                pred = core.decode(fs, model)
                for sp in decode_labels(pred, model.space):
                    if sp.type in typesets[j] and sp.type not in typesets[i]:
                        spans.append(PropagatedSpan(sp, j))
            propagated.append(spans)
        out.append(AnnotatedFold(fold, propagated))
    return out


def merge_constraints(gold: Sequence[int], source_typeset, propagated: Sequence[PropagatedSpan],
                      space: LabelSpace, hard: bool = False) -> tuple[Lattice, int]:
    """Gold constraint lattice narrowed by propagated spans.

    A covered position allows only the propagated label(s) and O (only the
    propagated labels when ``hard``). If that empties a position, the gold
    lattice's set is kept there and a conflict is counted.
    """
    allowed = core.constraint_lattice(gold, source_typeset, space).allowed.copy()
    T = len(gold)
    proposal = np.zeros_like(allowed)
    covered = np.zeros(T, dtype=bool)
    for p in propagated:
        labels = encode_spans([p.span], T, space)
        for t in range(p.span.start, p.span.end + 1):
            proposal[t, labels[t]] = True
            covered[t] = True
    if not hard:
        proposal[covered, 0] = True
    conflicts = 0
    for t in np.flatnonzero(covered):
        narrowed = allowed[t] & proposal[t]
        if narrowed.any():
            allowed[t] = narrowed
        else:
            conflicts += 1
    if conflicts:
        logger.debug("%d propagated positions conflict with gold; gold kept", conflicts)
    return Lattice(allowed), conflicts


def propagate_items(annotated: Sequence[AnnotatedFold], vocab: FeatureVocab, hard: bool = False
                    ) -> tuple[list[TrainItem], int]:
    items, conflicts = [], 0
    for af in annotated:
        space = af.corpus.space
        for s, prop in zip(af.corpus, af.propagated):
            lattice, c = merge_constraints(s.gold, s.source_typeset, prop, space, hard)
            conflicts += c
            items.append(TrainItem(extract_sentence(s, vocab), lattice))
    if conflicts:
        logger.info("merge: %d positions where propagated labels conflicted with gold", conflicts)
    return items, conflicts


def train_fold_models(folds: Sequence[Corpus], vocab: FeatureVocab, config: TrainConfig,
                      dev: Sequence[FeaturizedSentence] | None = None) -> list[Model]:
    """One single-dataset model per fold (gold labels taken as hard targets)."""
    models = []
    for j, fold in enumerate(folds):
        ts = fold_typeset(fold)
        logger.info("training fold model %d on types %s", j, sorted(ts))
        items = build_items([fold], vocab, regime("standard"))
        fold_dev = _project_dev(dev, ts, fold.space) if dev else None
        res = sgd_train(items, fold.space, vocab, config, fold_dev)
        res.model.metadata["typeset"] = sorted(fold.space.types[t] for t in ts)
        models.append(res.model)
    return models


def _project_dev(dev: Sequence[FeaturizedSentence], typeset, space: LabelSpace) -> list[FeaturizedSentence]:
    return [FeaturizedSentence(fs.feat_ids, fs.positions, fs.length,
                               np.asarray(project(fs.gold, typeset, space), dtype=np.int64),
                               frozenset(typeset)) for fs in dev]


@dataclass
class PropagateRun:
    result: TrainResult
    fold_models: list[Model]
    annotated: list[AnnotatedFold]
    conflicts: int


def run_propagate(folds: Sequence[Corpus], vocab: FeatureVocab, config: TrainConfig,
                  dev: Sequence[FeaturizedSentence] | None = None, hard: bool = False,
                  fold_models: Sequence[Model] | None = None) -> PropagateRun:
    """Train fold models, cross-annotate, then retrain on the merged lattices."""
    models = list(fold_models) if fold_models is not None else train_fold_models(folds, vocab, config, dev)
    annotated = cross_annotate(folds, models, vocab)
    items, conflicts = propagate_items(annotated, vocab, hard)
    result = sgd_train(items, folds[0].space, vocab, config, dev)
    result.model.metadata["propagate"] = {"hard": hard, "conflicts": conflicts,
                                          "propagated_spans": sum(a.n_propagated() for a in annotated)}
    return PropagateRun(result, models, annotated, conflicts)

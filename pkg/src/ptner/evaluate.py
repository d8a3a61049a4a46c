"""Entity-level F1 and sentence-level error indicators.

``sentence_error`` is 1 when the gold sequence fails to score strictly above
every other sequence; ``partial_error`` is 1 when no sequence agreeing with the
gold labels on a type set scores strictly above every sequence that disagrees.
Both use the exact complement maximization, so ties count as errors.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from typing import Iterable, Sequence

import numpy as np

from .crf import core
from .crf.core import Lattice, Model, ScoreTable
from .features import FeaturizedSentence
from .labels import LabelSpace, count_repairs, decode_labels, typeset_names


@dataclass
class Counts:
    tp: int = 0
    fp: int = 0
    fn: int = 0

    @property
    def precision(self) -> float:
        return self.tp / (self.tp + self.fp) if self.tp + self.fp else 0.0

    @property
    def recall(self) -> float:
        return self.tp / (self.tp + self.fn) if self.tp + self.fn else 0.0

    @property
    def f1(self) -> float:
        p, r = self.precision, self.recall
        return 2 * p * r / (p + r) if p + r else 0.0

    def as_dict(self) -> dict:
        return {"tp": self.tp, "fp": self.fp, "fn": self.fn, "precision": self.precision,
                "recall": self.recall, "f1": self.f1}


@dataclass
class EvalReport:
    per_type: dict[str, Counts]
    micro: Counts
    sentences: int
    repairs: int = 0
    e_all: float | None = None
    partial_errors: dict[str, float] = field(default_factory=dict)
    error_counts: dict[str, int] = field(default_factory=dict)

    def to_json(self) -> dict:
        out = {
            "sentences": self.sentences,
            "micro": self.micro.as_dict(),
            "per_type": {k: v.as_dict() for k, v in self.per_type.items()},
            "decode_repairs": self.repairs,
        }
        if self.e_all is not None:
            out["e_all"] = self.e_all
            out["partial_errors"] = dict(self.partial_errors)
            out["error_counts"] = dict(self.error_counts)
        return out


def f1_report(pred: Sequence[Sequence[int]], gold: Sequence[Sequence[int]], space: LabelSpace) -> EvalReport:
    """Exact-match entity F1, per type and micro-averaged over pooled counts."""
    if len(pred) != len(gold):
        raise ValueError(f"{len(pred)} predicted vs {len(gold)} gold sentences")
    per_type = {name: Counts() for name in space.types}
    repairs = 0
    for i, (p, g) in enumerate(zip(pred, gold)):
        if len(p) != len(g):
            raise ValueError(f"sentence {i}: {len(p)} predicted vs {len(g)} gold labels")
        repairs += count_repairs(p, space)
        ps, gs = set(decode_labels(p, space)), set(decode_labels(g, space))
        for sp in ps & gs:
            per_type[space.types[sp.type]].tp += 1
        for sp in ps - gs:
            per_type[space.types[sp.type]].fp += 1
        for sp in gs - ps:
            per_type[space.types[sp.type]].fn += 1
    micro = Counts(sum(c.tp for c in per_type.values()), sum(c.fp for c in per_type.values()),
                   sum(c.fn for c in per_type.values()))
    return EvalReport(per_type, micro, len(gold), repairs)


def gold_error(scores: ScoreTable, gold: Sequence[int]) -> int:
    lattice = Lattice.singleton(gold, scores.n_labels)
    return int(core.path_score(scores, gold) <= core.best_score_outside(scores, lattice))


def lattice_error(scores: ScoreTable, lattice: Lattice) -> int:
    _, inside = core.viterbi(scores, lattice)
    return int(inside <= core.best_score_outside(scores, lattice))


def sentence_error(fsent: FeaturizedSentence, gold: Sequence[int], model: Model) -> int:
    return gold_error(core.score_table(fsent, model), gold)


def partial_error(fsent: FeaturizedSentence, gold: Sequence[int], typeset: Iterable[int], model: Model) -> int:
    """Partial error w.r.t. ``typeset``; ``gold`` may be fully typed or pre-projected."""
    lattice = core.projected_lattice(gold, typeset, model.space)
    return lattice_error(core.score_table(fsent, model), lattice)


def typeset_key(typeset: Iterable[int], space: LabelSpace) -> str:
    return "+".join(typeset_names(typeset, space)) or "(none)"


def predict(fsents: Sequence[FeaturizedSentence], model: Model) -> list[list[int]]:
    return [core.decode(fs, model) for fs in fsents]


def micro_f1(fsents: Sequence[FeaturizedSentence], model: Model) -> float:
    return f1_report(predict(fsents, model), [fs.gold for fs in fsents], model.space).micro.f1


def evaluate(fsents: Sequence[FeaturizedSentence], model: Model,
             typesets: Sequence[Iterable[int]] | None = None,
             with_errors: bool = True) -> tuple[EvalReport, list[list[int]]]:
    """F1 on unconstrained Viterbi predictions plus E_all and per-type-set error rates.

    ``fsents`` carry fully-typed gold labels. ``typesets`` defaults to one
    singleton set per type.
    """
    space = model.space
    preds = predict(fsents, model)
    report = f1_report(preds, [fs.gold for fs in fsents], space)
    if not with_errors or not fsents:
        return report, preds
    if typesets is None:
        typesets = [frozenset([t]) for t in range(space.n_types)]
    typesets = [frozenset(ts) for ts in typesets]
    n_all = 0
    n_part = np.zeros(len(typesets), dtype=np.int64)
    for fs in fsents:
        scores = core.score_table(fs, model)
        n_all += gold_error(scores, fs.gold)
        for i, ts in enumerate(typesets):
            n_part[i] += lattice_error(scores, core.projected_lattice(fs.gold, ts, space))
    n = len(fsents)
    report.e_all = n_all / n
    report.error_counts = {"all": int(n_all)}
    for ts, c in zip(typesets, n_part):
        key = typeset_key(ts, space)
        report.partial_errors[key] = int(c) / n
        report.error_counts[key] = int(c)
    return report, preds

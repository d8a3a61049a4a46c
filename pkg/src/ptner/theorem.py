"""Exact checks of the partial-error bounds on small random instances.

For a gold sequence ``y`` and type sets ``T_1..T_N`` whose constraint lattices
intersect in ``{y}`` alone, the sentence error equals the max of the partial
errors, and on any corpus ``sum_i E_i / N <= E_all <= sum_i E_i``. Everything
here is computed with integer error counts, so the inequalities are checked
with no tolerance.
"""
from __future__ import annotations

import logging
from dataclasses import dataclass, field
from typing import Iterable, Sequence

import numpy as np

from .crf import core, oracle
from .crf.core import Model
from .evaluate import gold_error, lattice_error, typeset_key
from .features import FeaturizedSentence, FeatureVocab
from .labels import EntitySpan, LabelSpace, encode_spans

logger = logging.getLogger(__name__)

ORACLE_LIMIT = 200_000


def check_no_ambiguity(gold: Sequence[int], typesets: Sequence[Iterable[int]], space: LabelSpace) -> bool:
    """True iff the type-set lattices of ``gold`` intersect in exactly one sequence."""
    allowed = np.ones((len(gold), space.n_labels), dtype=bool)
    for ts in typesets:
        allowed &= core.projected_lattice(gold, ts, space).allowed
    return bool((allowed.sum(axis=1) == 1).all())


# -- random instances ---------------------------------------------------------

def random_space(n_types: int) -> LabelSpace:
    return LabelSpace(tuple(f"T{i}" for i in range(n_types)))


def random_model(rng: np.random.Generator, space: LabelSpace, n_features: int = 6,
                 kind: str = "uniform") -> Model:
    """Weights i.i.d. uniform in [-1, 1]; ``integer`` draws from {-1, 0, 1}
    (many exact ties); ``zero`` is the all-tie model."""
    vocab = FeatureVocab(f"f{i}" for i in range(n_features - 1)).freeze()
    model = Model.zeros(space, vocab)
    if kind == "zero":
        return model
    for p in model.params():
        if kind == "integer":
            p[...] = rng.integers(-1, 2, size=p.shape)
        else:
            p[...] = rng.uniform(-1.0, 1.0, size=p.shape)
    return model


def random_sentence(rng: np.random.Generator, length: int, space: LabelSpace, n_features: int,
                    generic: bool = False) -> FeaturizedSentence:
    """Random active features plus a random fully-typed gold sequence.

    ``generic`` draws gold uniformly from all label sequences (schema-invalid
    ones included); otherwise gold encodes random non-overlapping spans.
    """
    ids, pos = [], []
    for t in range(length):
        k = int(rng.integers(1, min(3, n_features) + 1))
        chosen = rng.choice(n_features, size=k, replace=False)
        ids.extend(int(c) for c in chosen)
        pos.extend([t] * k)
    if generic:
        gold = rng.integers(0, space.n_labels, size=length).tolist()
    else:
        spans, t = [], 0
        while t < length:
            if rng.random() < 0.4:
                end = min(length - 1, t + int(rng.integers(0, 3)))
                spans.append(EntitySpan(t, end, int(rng.integers(0, space.n_types))))
                t = end + 1
            t += 1
        gold = encode_spans(spans, length, space)
    return FeaturizedSentence(np.asarray(ids, dtype=np.int64), np.asarray(pos, dtype=np.int64),
                              length, np.asarray(gold, dtype=np.int64), space.all_types)


def random_partition(rng: np.random.Generator, n_types: int, n_splits: int) -> list[frozenset]:
    """Disjoint non-empty type sets covering every type."""
    if not 1 <= n_splits <= n_types:
        raise ValueError(f"cannot split {n_types} types into {n_splits} sets")
    owner = np.concatenate([np.arange(n_splits), rng.integers(0, n_splits, n_types - n_splits)])
    owner = rng.permutation(owner)
    return [frozenset(np.flatnonzero(owner == i).tolist()) for i in range(n_splits)]


# -- oracle indicators --------------------------------------------------------

def oracle_errors(scores: core.ScoreTable, gold: Sequence[int], typesets: Sequence[frozenset],
                  space: LabelSpace) -> tuple[int, list[int]]:
    """Sentence and partial error indicators by enumerating every sequence."""
    paths, total = oracle.all_path_scores(scores)
    T = len(gold)
    is_gold = (paths == np.asarray(gold)).all(axis=1)
    d_all = int(total[is_gold][0] <= (total[~is_gold].max() if (~is_gold).any() else -np.inf))
    parts = []
    for ts in typesets:
        member = core.projected_lattice(gold, ts, space).allowed[np.arange(T), paths].all(axis=1)
        inside = total[member].max()
        outside = total[~member].max() if (~member).any() else -np.inf
        parts.append(int(inside <= outside))
    return d_all, parts


# -- Lemma: per-sentence identity ---------------------------------------------

@dataclass
class LemmaReport:
    trials: int = 0
    checked: int = 0
    violations: int = 0
    bound_violations: int = 0
    premise_failures: int = 0
    oracle_checked: int = 0
    oracle_mismatches: int = 0
    zero_model_trials: int = 0
    errors_seen: int = 0
    failures: list = field(default_factory=list)

    @property
    def ok(self) -> bool:
        return self.violations == 0 and self.bound_violations == 0 and self.oracle_mismatches == 0

    def to_json(self) -> dict:
        out = {k: v for k, v in self.__dict__.items() if k != "failures"}
        out["failures"] = self.failures[:20]
        out["ok"] = self.ok
        return out


def plant_gold(rng: np.random.Generator, model: Model, fs: FeaturizedSentence, scale: float = 4.0) -> None:
    """Push the gold path up by a random margin so that some trials are correct."""
    for t in range(fs.length):
        fid = fs.active(t)[0]
        model.emission[fid, fs.gold[t]] += rng.uniform(0.0, scale)
    for t in range(1, fs.length):
        model.transitions[fs.gold[t - 1], fs.gold[t]] += rng.uniform(0.0, scale)


def _model_kind(i: int, rng: np.random.Generator) -> str:
    if i % 10 == 0:
        return "zero"
    u = rng.random()
    return "integer" if u < 0.25 else "planted" if u < 0.65 else "uniform"


def verify_lemma1(trials: int = 1000, max_len: int = 4, n_types: int = 2, n_splits: int = 2,
                  seed: int = 0, covering: bool = True, n_features: int = 6) -> LemmaReport:
    """Check sentence error == max of partial errors on random instances.

    Each trial draws a model, a sentence and a type-set split from its own
    child seed. Instances small enough are cross-checked by enumeration.
    """
    space = random_space(n_types)
    report = LemmaReport()
    for i, child in enumerate(np.random.SeedSequence(seed).spawn(trials)):
        rng = np.random.default_rng(child)
        kind = _model_kind(i, rng)
        model = random_model(rng, space, n_features, "uniform" if kind == "planted" else kind)
        T = int(rng.integers(1, max_len + 1))
        fs = random_sentence(rng, T, space, n_features, generic=bool(rng.random() < 0.5))
        if kind == "planted":
            plant_gold(rng, model, fs)
        typesets = random_partition(rng, n_types, n_splits)
        if not covering and rng.random() < 0.5:
            typesets = typesets[:-1] or [frozenset()]
        report.trials += 1
        report.zero_model_trials += kind == "zero"
        if not check_no_ambiguity(fs.gold, typesets, space):
            report.premise_failures += 1
            continue
        scores = core.score_table(fs, model)
        d_all = gold_error(scores, fs.gold)
        parts = [lattice_error(scores, core.projected_lattice(fs.gold, ts, space)) for ts in typesets]
        report.checked += 1
        report.errors_seen += d_all
        if d_all != max(parts):
            report.violations += 1
            report.failures.append({"trial": i, "kind": kind, "gold": fs.gold.tolist(),
                                    "delta": d_all, "partial": parts})
        if not (max(parts) <= d_all <= sum(parts)):
            report.bound_violations += 1
        if space.n_labels ** T <= ORACLE_LIMIT:
            o_all, o_parts = oracle_errors(scores, fs.gold, typesets, space)
            report.oracle_checked += 1
            if o_all != d_all or o_parts != parts:
                report.oracle_mismatches += 1
                report.failures.append({"trial": i, "kind": kind, "oracle": [o_all, o_parts],
                                        "dp": [d_all, parts]})
    return report


# -- Theorem: corpus-level bounds ---------------------------------------------

@dataclass
class TheoremReport:
    sentences: int
    excluded: int
    n_splits: int
    error_count_all: int
    error_counts: dict[str, int]
    lemma_violations: int

    @property
    def e_all(self) -> float:
        return self.error_count_all / self.sentences if self.sentences else 0.0

    @property
    def partial_rates(self) -> dict[str, float]:
        n = self.sentences or 1
        return {k: v / n for k, v in self.error_counts.items()}

    @property
    def lower_holds(self) -> bool:
        # sum_i E_i / N <= E_all, compared on integer counts
        return sum(self.error_counts.values()) <= self.n_splits * self.error_count_all

    @property
    def upper_holds(self) -> bool:
        return self.error_count_all <= sum(self.error_counts.values())

    @property
    def ok(self) -> bool:
        return self.lower_holds and self.upper_holds and self.lemma_violations == 0

    def to_json(self) -> dict:
        total = sum(self.error_counts.values())
        n = self.sentences or 1
        return {
            "sentences": self.sentences,
            "excluded_ambiguous": self.excluded,
            "n_splits": self.n_splits,
            "e_all": self.e_all,
            "partial_errors": self.partial_rates,
            "lower_bound": total / self.n_splits / n,
            "upper_bound": total / n,
            "lower_slack": self.e_all - total / self.n_splits / n,
            "upper_slack": total / n - self.e_all,
            "lower_holds": self.lower_holds,
            "upper_holds": self.upper_holds,
            "lemma_violations": self.lemma_violations,
            "ok": self.ok,
        }


def verify_theorem1(model: Model, fsents: Sequence[FeaturizedSentence],
                    typesets: Sequence[Iterable[int]]) -> TheoremReport:
    """Exact E_all and partial error rates of ``model`` on fully-typed ``fsents``.

    Sentences where the type sets leave the gold ambiguous are excluded and
    counted.
    """
    typesets = [frozenset(ts) for ts in typesets]
    space = model.space
    keys = [typeset_key(ts, space) for ts in typesets]
    counts = dict.fromkeys(keys, 0)
    n = excluded = c_all = lemma = 0
    for fs in fsents:
        if not check_no_ambiguity(fs.gold, typesets, space):
            excluded += 1
            continue
        scores = core.score_table(fs, model)
        d = gold_error(scores, fs.gold)
        parts = [lattice_error(scores, core.projected_lattice(fs.gold, ts, space)) for ts in typesets]
        n += 1
        c_all += d
        lemma += d != max(parts)
        for k, p in zip(keys, parts):
            counts[k] += p
    if excluded:
        logger.warning("%d sentences excluded: type sets leave their gold ambiguous", excluded)
    return TheoremReport(n, excluded, len(typesets), c_all, counts, lemma)


def random_theorem_trials(trials: int, max_len: int, n_types: int, n_splits: int, seed: int,
                          corpus_size: int = 50, n_features: int = 6) -> list[dict]:
    """Theorem check on random models, each scored on its own random corpus.

    The zero model is always included. Planted models get the gold paths of
    their corpus pushed up, so their error rates land strictly inside (0, 1).
    """
    space = random_space(n_types)
    n_models = max(1, trials // corpus_size)
    out = []
    for i, child in enumerate(np.random.SeedSequence([seed, 1]).spawn(n_models + 1)):
        rng = np.random.default_rng(child)
        kind = "zero" if i == 0 else ("integer", "uniform", "planted")[i % 3]
        model = random_model(rng, space, n_features, "uniform" if kind == "planted" else kind)
        fsents = [random_sentence(rng, int(rng.integers(1, max_len + 1)), space, n_features,
                                  generic=bool(rng.random() < 0.5))
                  for _ in range(corpus_size)]
        if kind == "planted":
            for fs in fsents:
                plant_gold(rng, model, fs, scale=1.0)
        typesets = random_partition(rng, n_types, n_splits)
        rep = verify_theorem1(model, fsents, typesets).to_json()
        rep.update({"model": i, "kind": kind, "typesets": [sorted(ts) for ts in typesets]})
        out.append(rep)
    return out

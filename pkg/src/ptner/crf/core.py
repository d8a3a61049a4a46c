"""Linear-chain CRF over a label lattice.

A path ``y`` scores ``start[y0] + sum_t emit[t, y_t] + sum_t trans[y_{t-1}, y_t]
+ stop[y_{T-1}]``, the log of the product of potentials. A :class:`Lattice`
restricts each position to a set of labels; the full lattice allows every label
everywhere, so it spans all ``L**T`` generic sequences.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from typing import Iterable, Sequence

import numpy as np

from ..features import FeaturizedSentence, FeatureVocab
from ..labels import LabelError, LabelSpace, project
from . import kernels

NEG_INF = -np.inf


@dataclass
class Model:
    space: LabelSpace
    vocab: FeatureVocab
    emission: np.ndarray  # (n_features, n_labels)
    transitions: np.ndarray  # (n_labels, n_labels)
    start: np.ndarray
    stop: np.ndarray
    hard_transitions: bool = False
    metadata: dict = field(default_factory=dict)

    @classmethod
    def zeros(cls, space: LabelSpace, vocab: FeatureVocab, hard_transitions: bool = False) -> "Model":
        L = space.n_labels
        return cls(space, vocab, np.zeros((len(vocab), L)), np.zeros((L, L)),
                   np.zeros(L), np.zeros(L), hard_transitions)

    def __post_init__(self):
        F, L = len(self.vocab), self.space.n_labels
        if self.emission.shape != (F, L) or self.transitions.shape != (L, L) \
                or self.start.shape != (L,) or self.stop.shape != (L,):
            raise ValueError("model dimensions do not match label space and vocabulary")

    def params(self) -> list[np.ndarray]:
        return [self.emission, self.transitions, self.start, self.stop]

    def copy(self) -> "Model":
        return Model(self.space, self.vocab, self.emission.copy(), self.transitions.copy(),
                     self.start.copy(), self.stop.copy(), self.hard_transitions,
                     dict(self.metadata))


@dataclass(frozen=True, eq=False)
class ScoreTable:
    emit: np.ndarray  # (T, L)
    trans: np.ndarray
    start: np.ndarray
    stop: np.ndarray

    @property
    def length(self) -> int:
        return self.emit.shape[0]

    @property
    def n_labels(self) -> int:
        return self.emit.shape[1]

    def shifted(self, t: int, c: float) -> "ScoreTable":
        emit = self.emit.copy()
        emit[t] += c
        return ScoreTable(emit, self.trans, self.start, self.stop)


@dataclass(frozen=True, eq=False)
class Lattice:
    allowed: np.ndarray  # (T, L) bool

    def __post_init__(self):
        a = np.ascontiguousarray(self.allowed, dtype=bool)
        if a.ndim != 2 or not a.any(axis=1).all():
            raise ValueError("every lattice position needs at least one allowed label")
        object.__setattr__(self, "allowed", a)

    @classmethod
    def full(cls, length: int, n_labels: int) -> "Lattice":
        return cls(np.ones((length, n_labels), dtype=bool))

    @classmethod
    def singleton(cls, labels: Sequence[int], n_labels: int) -> "Lattice":
        a = np.zeros((len(labels), n_labels), dtype=bool)
        a[np.arange(len(labels)), labels] = True
        return cls(a)

    @property
    def length(self) -> int:
        return self.allowed.shape[0]

    def is_full(self) -> bool:
        return bool(self.allowed.all())

    def size(self) -> int:
        """Number of sequences in the product set."""
        return int(np.prod(self.allowed.sum(axis=1).astype(object)))

    def contains(self, labels: Sequence[int]) -> bool:
        return bool(self.allowed[np.arange(self.length), np.asarray(labels)].all())

    def intersect(self, other: "Lattice") -> np.ndarray:
        """Position-wise intersection as a raw mask (may have empty positions)."""
        return self.allowed & other.allowed

    def allowed_sets(self) -> list[set[int]]:
        return [set(np.flatnonzero(row).tolist()) for row in self.allowed]


def score_table(fsent: FeaturizedSentence, model: Model) -> ScoreTable:
    emit = kernels.emission_scores(model.emission, fsent.feat_ids, fsent.positions, fsent.length)
    trans, start, stop = model.transitions, model.start, model.stop
    if model.hard_transitions:
        m_start, m_trans, m_stop = model.space.transition_mask()
        trans = np.where(m_trans, trans, NEG_INF)
        start = np.where(m_start, start, NEG_INF)
        stop = np.where(m_stop, stop, NEG_INF)
    return ScoreTable(emit, trans, start, stop)


def constraint_lattice(gold: Sequence[int], source_typeset: Iterable[int], space: LabelSpace) -> Lattice:
    """Sequences whose projection onto ``source_typeset`` equals ``gold``.

    ``gold`` must already be typed within ``source_typeset``.
    """
    typeset = frozenset(source_typeset)
    if not typeset <= space.all_types:
        raise LabelError(f"type set {sorted(typeset)} not within the label space")
    label_types = space.label_types()
    outside = np.array([lt < 0 or lt not in typeset for lt in label_types])
    allowed = np.zeros((len(gold), space.n_labels), dtype=bool)
    for t, g in enumerate(gold):
        g = int(g)
        if g == 0:
            allowed[t] = outside
        elif label_types[g] in typeset:
            allowed[t, g] = True
        else:
            raise LabelError(
                f"gold label {space.to_string(g)} at position {t} is outside the "
                f"annotated type set {sorted(typeset)}"
            )
    return Lattice(allowed)


def projected_lattice(gold: Sequence[int], typeset: Iterable[int], space: LabelSpace) -> Lattice:
    """Constraint lattice from gold typed with any types (projected first)."""
    typeset = frozenset(typeset)
    return constraint_lattice(project(gold, typeset, space), typeset, space)


def _args(scores: ScoreTable, lattice: Lattice):
    if lattice.allowed.shape != scores.emit.shape:
        raise ValueError("lattice shape does not match score table")
    return scores.emit, scores.trans, scores.start, scores.stop, lattice.allowed


def _full(scores: ScoreTable) -> Lattice:
    return Lattice.full(scores.length, scores.n_labels)


def log_partition(scores: ScoreTable, lattice: Lattice | None = None) -> float:
    lattice = lattice or _full(scores)
    return float(kernels.forward(*_args(scores, lattice))[1])


@dataclass(frozen=True, eq=False)
class Marginals:
    node: np.ndarray  # (T, L)
    edge: np.ndarray  # (T-1, L, L)
    log_z: float


def marginals(scores: ScoreTable, lattice: Lattice | None = None) -> Marginals:
    lattice = lattice or _full(scores)
    node, edge, log_z = kernels.marginals(*_args(scores, lattice))
    return Marginals(node, edge, float(log_z))


def viterbi(scores: ScoreTable, lattice: Lattice | None = None) -> tuple[list[int], float]:
    lattice = lattice or _full(scores)
    path, score = kernels.viterbi(*_args(scores, lattice))
    return path.tolist(), float(score)


def best_score_outside(scores: ScoreTable, lattice: Lattice) -> float:
    """Max path score over sequences that leave ``lattice`` somewhere; -inf if none."""
    return float(kernels.best_outside(*_args(scores, lattice))[1])


def best_outside(scores: ScoreTable, lattice: Lattice) -> tuple[list[int], float]:
    path, score = kernels.best_outside(*_args(scores, lattice))
    return path.tolist(), float(score)


def path_score(scores: ScoreTable, labels: Sequence[int]) -> float:
    labels = np.asarray(labels, dtype=np.int64)
    return float(kernels.path_score(scores.emit, scores.trans, scores.start, scores.stop, labels))


def decode(fsent: FeaturizedSentence, model: Model) -> list[int]:
    """Unconstrained Viterbi labels for one sentence."""
    return viterbi(score_table(fsent, model))[0]

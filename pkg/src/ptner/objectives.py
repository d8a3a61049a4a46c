"""Training objectives: negative log-likelihood of a target lattice.

Both objectives have the form ``log Z(full) - log Z(target)``. The standard
objective's target is the single gold path; the marginal objective's target is
every sequence that agrees with the gold labels on the sentence's annotated
types. The gradient is the difference of expected feature counts under the two
lattices.
"""
from __future__ import annotations

from dataclasses import dataclass
from typing import Callable

import numpy as np

from .crf import core
from .crf import kernels
from .crf.core import Lattice, Model
from .features import FeaturizedSentence
from .labels import LabelSpace

LatticeSelector = Callable[[FeaturizedSentence, LabelSpace], Lattice]


@dataclass(frozen=True, eq=False)
class SentenceGrad:
    """Gradient of one sentence's loss, emission part kept sparse."""

    feat_ids: np.ndarray
    positions: np.ndarray
    node: np.ndarray  # (T, L) expected-count difference per position
    trans: np.ndarray
    start: np.ndarray
    stop: np.ndarray

    def dense(self, model: Model) -> list[np.ndarray]:
        emission = np.zeros_like(model.emission)
        kernels.scatter_rows(emission, self.feat_ids, self.positions, self.node, 1.0)
        return [emission, self.trans, self.start, self.stop]


class GradAccumulator:
    """Dense sum of sentence gradients; cleared between steps."""

    def __init__(self, model: Model):
        self.grads = [np.zeros_like(p) for p in model.params()]
        self.count = 0

    def add(self, g: SentenceGrad, scale: float = 1.0) -> None:
        emission, trans, start, stop = self.grads
        kernels.scatter_rows(emission, g.feat_ids, g.positions, g.node, scale)
        trans += scale * g.trans
        start += scale * g.start
        stop += scale * g.stop
        self.count += 1

    def clear(self) -> None:
        for g in self.grads:
            g.fill(0.0)
        self.count = 0

    def norm(self) -> float:
        return float(np.sqrt(sum(np.vdot(g, g) for g in self.grads)))


def lattice_nll(fsent: FeaturizedSentence, model: Model, target: Lattice) -> tuple[float, SentenceGrad]:
    """``-log p(target | X)`` and its gradient."""
    scores = core.score_table(fsent, model)
    full = core.marginals(scores)
    sub = core.marginals(scores, target)
    loss = full.log_z - sub.log_z
    node = full.node - sub.node
    trans = (full.edge - sub.edge).sum(axis=0)
    grad = SentenceGrad(fsent.feat_ids, fsent.positions, node, trans,
                        node[0].copy(), node[-1].copy())
    return loss, grad


def gold_lattice(fsent: FeaturizedSentence, space: LabelSpace) -> Lattice:
    return Lattice.singleton(fsent.gold, space.n_labels)


def partial_lattice(fsent: FeaturizedSentence, space: LabelSpace) -> Lattice:
    return core.constraint_lattice(fsent.gold, fsent.source_typeset, space)


def standard_nll(fsent: FeaturizedSentence, model: Model) -> tuple[float, SentenceGrad]:
    return lattice_nll(fsent, model, gold_lattice(fsent, model.space))


def marginal_nll(fsent: FeaturizedSentence, model: Model) -> tuple[float, SentenceGrad]:
    return lattice_nll(fsent, model, partial_lattice(fsent, model.space))


REGIMES = ("concat", "partial", "propagate", "standard", "one_type")


def regime(name: str) -> LatticeSelector:
    """Target-lattice selector for a training regime.

    ``concat``, ``standard`` and ``one_type`` treat every label as fully typed
    (O is a hard O); ``partial`` marginalizes over the types a sentence was
    not annotated for. ``propagate`` trains on lattices built by
    :mod:`ptner.propagate` and uses the partial selector as its base.
    """
    name = name.replace("-", "_")
    if name in ("concat", "standard", "one_type"):
        return gold_lattice
    if name in ("partial", "propagate"):
        return partial_lattice
    raise ValueError(f"unknown regime {name!r}; expected one of {', '.join(REGIMES)}")

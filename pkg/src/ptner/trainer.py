"""Minibatch SGD with classical momentum, 1/(1+rho*t) decay and norm clipping."""
from __future__ import annotations

import dataclasses
import json
import logging
import os
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from pathlib import Path
from typing import Sequence

import numpy as np

from .corpus import Corpus
from .crf.core import Lattice, Model
from .evaluate import micro_f1
from .features import FeaturizedSentence, FeatureVocab, extract_sentence
from .labels import LabelSpace
from .objectives import GradAccumulator, LatticeSelector, lattice_nll, regime

logger = logging.getLogger(__name__)


@dataclass
class TrainConfig:
    batch_size: int = 32
    momentum: float = 0.9
    eta0: float = 0.015
    rho: float = 0.05
    clip: float = 5.0
    epochs: int = 30
    patience: int = 8
    seed: int = 0
    objective: str = "marginal"
    weight_decay: float = 0.0
    hard_transitions: bool = False

    def __post_init__(self):
        if self.batch_size < 1 or self.eta0 <= 0 or self.rho < 0 or self.clip <= 0:
            raise ValueError(f"invalid training config {self}")
        if self.objective not in ("standard", "marginal"):
            raise ValueError(f"objective must be 'standard' or 'marginal', not {self.objective!r}")

    @classmethod
    def from_dict(cls, data: dict) -> "TrainConfig":
        names = {f.name for f in dataclasses.fields(cls)}
        unknown = set(data) - names
        if unknown:
            raise ValueError(f"unknown config keys: {sorted(unknown)}")
        return cls(**data)

    @classmethod
    def from_json(cls, path: str | Path) -> "TrainConfig":
        return cls.from_dict(json.loads(Path(path).read_text()))

    def to_dict(self) -> dict:
        return dataclasses.asdict(self)


def learning_rate(config: TrainConfig, epoch: int) -> float:
    return config.eta0 / (1.0 + config.rho * epoch)


@dataclass(frozen=True, eq=False)
class TrainItem:
    fsent: FeaturizedSentence
    target: Lattice


@dataclass
class TrainResult:
    model: Model
    best_epoch: int
    history: list[dict] = field(default_factory=list)


def build_items(corpora: Sequence[Corpus], vocab: FeatureVocab, selector: LatticeSelector,
                space: LabelSpace | None = None) -> list[TrainItem]:
    space = space or corpora[0].space
    items = []
    for corpus in corpora:
        for s in corpus:
            fs = extract_sentence(s, vocab)
            items.append(TrainItem(fs, selector(fs, space)))
    return items


def n_threads() -> int:
    try:
        return max(1, int(os.environ.get("PTNER_THREADS", "1")))
    except ValueError:
        return 1


def sgd_train(items: Sequence[TrainItem], space: LabelSpace, vocab: FeatureVocab,
              config: TrainConfig, dev: Sequence[FeaturizedSentence] | None = None,
              init: Model | None = None) -> TrainResult:
    """Train on a pooled list of (sentence, target lattice) items.

    Returns the epoch snapshot with the best dev micro-F1 (the last epoch when
    there is no dev set).
    """
    if not items:
        raise ValueError("empty training pool")
    model = init.copy() if init is not None else Model.zeros(space, vocab, config.hard_transitions)
    velocity = [np.zeros_like(p) for p in model.params()]
    acc = GradAccumulator(model)
    rng = np.random.default_rng(config.seed)
    threads = n_threads()
    pool = ThreadPoolExecutor(threads) if threads > 1 else None

    best = (-1.0, -1, model.copy())
    history = []
    stale = 0
    try:
        for epoch in range(config.epochs):
            eta = learning_rate(config, epoch)
            order = rng.permutation(len(items))
            total_loss = 0.0
            skipped = 0
            for b in range(0, len(order), config.batch_size):
                batch = [items[i] for i in order[b:b + config.batch_size]]
                work = lambda it: lattice_nll(it.fsent, model, it.target)  # noqa: E731
                results = list(pool.map(work, batch)) if pool else [work(it) for it in batch]
                acc.clear()
                for loss, grad in results:
                    if not np.isfinite(loss):
                        skipped += 1
                        continue
                    total_loss += loss
                    acc.add(grad)
                if acc.count == 0:
                    continue
                scale = 1.0 / acc.count
                for g, p in zip(acc.grads, model.params()):
                    g *= scale
                    if config.weight_decay:
                        g += config.weight_decay * p
                norm = acc.norm()
                if norm > config.clip:
                    for g in acc.grads:
                        g *= config.clip / norm
                for v, g, p in zip(velocity, acc.grads, model.params()):
                    v *= config.momentum
                    v -= eta * g
                    p += v
            record = {"epoch": epoch, "eta": eta, "loss": total_loss / len(items)}
            if skipped:
                record["skipped"] = skipped
                logger.warning("epoch %d: skipped %d sentences with infeasible targets", epoch, skipped)
            if dev:
                f1 = micro_f1(dev, model)
                record["dev_f1"] = f1
                if f1 > best[0]:
                    best = (f1, epoch, model.copy())
                    stale = 0
                else:
                    stale += 1
            else:
                best = (0.0, epoch, model.copy())
            history.append(record)
            logger.info("epoch %d %s", epoch, {k: round(v, 5) if isinstance(v, float) else v
                                               for k, v in record.items()})
            if dev and stale >= config.patience:
                logger.info("early stop after %d stale epochs", stale)
                break
    finally:
        if pool:
            pool.shutdown()

    _, best_epoch, best_model = best
    best_model.metadata.update({"best_epoch": best_epoch, "config": config.to_dict(),
                                "decay_unit": "epoch"})
    return TrainResult(best_model, best_epoch, history)


def train_regime(corpora: Sequence[Corpus], name: str, vocab: FeatureVocab, config: TrainConfig,
                 dev: Sequence[FeaturizedSentence] | None = None) -> TrainResult:
    """Pool ``corpora`` and train with the target lattices of regime ``name``."""
    selector = regime(name)
    items = build_items(corpora, vocab, selector)
    return sgd_train(items, corpora[0].space, vocab, config, dev)

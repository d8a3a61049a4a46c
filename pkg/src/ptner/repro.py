"""Mask -> train every regime -> evaluate, producing a Table-2-shaped comparison."""
from __future__ import annotations

import csv
import json
import logging
from dataclasses import dataclass
from pathlib import Path

from .corpus import Corpus, fold_sizes, mask_split, restrict_types, single_type, \
    subsample_standard, write_mask_output
from .evaluate import EvalReport, evaluate
from .features import FeatureVocab, extract_sentence
from .modelio import save_model
from .propagate import run_propagate
from .theorem import verify_theorem1
from .trainer import TrainConfig, train_regime

logger = logging.getLogger(__name__)


@dataclass
class Row:
    method: str
    report: EvalReport
    theorem: dict | None = None

    def f1(self, type_name: str) -> float | None:
        c = self.report.per_type.get(type_name)
        return None if c is None else c.f1


def run_repro(train: Corpus, dev: Corpus, test: Corpus, n_folds: int, config: TrainConfig,
              out_dir: str | Path, seed: int = 0, one_type: bool = False,
              hard_propagate: bool = False) -> list[Row]:
    out_dir = Path(out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    folds = mask_split(train, n_folds, seed)
    write_mask_output(folds, out_dir / "folds")
    space = folds[0].space
    train_n = restrict_types(train, n_folds)
    dev_n = restrict_types(dev, n_folds)
    test_n = restrict_types(test, n_folds)

    vocab = FeatureVocab.build(s.tokens for s in train)
    dev_fs = [extract_sentence(s, vocab) for s in dev_n]
    test_fs = [extract_sentence(s, vocab) for s in test_n]
    typesets = [frozenset([t]) for t in range(n_folds)]

    runs = {}
    logger.info("training concat")
    runs["Concat"] = train_regime(folds, "concat", vocab, config, dev_fs).model
    logger.info("training propagate")
    prop = run_propagate(folds, vocab, config, dev_fs, hard=hard_propagate)
    runs["Propagate"] = prop.result.model
    logger.info("training partial")
    runs["Partial"] = train_regime(folds, "partial", vocab, config, dev_fs).model
    s_size = fold_sizes(len(train), n_folds)[0]
    logger.info("training standard (%d sentences)", s_size)
    runs[f"Standard ({s_size} sent. w. {n_folds} types)"] = train_regime(
        [subsample_standard(train, n_folds, s_size, seed)], "standard", vocab, config, dev_fs).model
    logger.info("training standard (all sentences)")
    runs[f"Standard (all sent. w. {n_folds} types)"] = train_regime(
        [train_n], "standard", vocab, config, dev_fs).model
    if one_type:
        for t in range(n_folds):
            name = space.types[t]
            logger.info("training 1-type %s", name)
            one = train_regime([single_type(train_n, t)], "one_type", vocab, config,
                               [extract_sentence(s, vocab) for s in single_type(dev_n, t)]).model
            runs[f"1-Type ({name})"] = one

    rows = []
    models_dir = out_dir / "models"
    models_dir.mkdir(exist_ok=True)
    for i, (method, model) in enumerate(runs.items()):
        save_model(model, models_dir / f"{i}.{_slug(method)}.model")
        report, _ = evaluate(test_fs, model, typesets)
        theorem = verify_theorem1(model, test_fs, typesets).to_json()
        rows.append(Row(method, report, theorem))
    write_table(rows, space.types, out_dir)
    return rows


def _slug(method: str) -> str:
    return "".join(c if c.isalnum() else "_" for c in method.lower()).strip("_")


def write_table(rows: list[Row], types, out_dir: Path) -> None:
    header = ["method", *types, "micro_f1", "e_all"]
    with open(out_dir / "table.csv", "w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(header)
        for r in rows:
            w.writerow([r.method, *[_pct(r.f1(t)) for t in types], _pct(r.report.micro.f1),
                        f"{r.report.e_all:.4f}"])
    lines = ["| Method | " + " | ".join(types) + " | Micro F1 | E_all |",
             "|---" * (len(types) + 3) + "|"]
    for r in rows:
        cells = [_pct(r.f1(t)) for t in types] + [_pct(r.report.micro.f1), f"{r.report.e_all:.4f}"]
        lines.append(f"| {r.method} | " + " | ".join(cells) + " |")
    (out_dir / "table.md").write_text("\n".join(lines) + "\n")
    reports = {r.method: {"report": r.report.to_json(), "theorem": r.theorem} for r in rows}
    (out_dir / "reports.json").write_text(json.dumps(reports, indent=2, sort_keys=True) + "\n")


def _pct(x: float | None) -> str:
    return "--" if x is None else f"{100 * x:.2f}"

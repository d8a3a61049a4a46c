"""Command-line entry point.

Exit codes: 0 success, 1 runtime error (bad input, failed check), 2 usage.
Every command writes a ``*.meta.json`` next to its outputs recording the
command line, config, seeds, input file hashes and library versions.
"""
from __future__ import annotations

import argparse
import hashlib
import json
import logging
import platform
import sys
import zipfile
from importlib import metadata as importlib_metadata
from pathlib import Path
from typing import Sequence

import numpy as np

from . import __version__
from .corpus import Corpus, Sentence, mask_split, read_conll, read_tokens, scan_types, \
    write_columns, write_mask_output
from .crf import BACKEND_NAME, core
from .evaluate import evaluate
from .features import FeatureVocab, extract, extract_sentence
from .labels import IOB2, IOBES, LabelError, LabelSpace, encode_spans, project, typeset_names
from .modelio import load_model, save_model
from .propagate import run_propagate
from .repro import run_repro
from .synthetic import SyntheticConfig, write_synthetic
from .theorem import random_theorem_trials, verify_lemma1, verify_theorem1
from .trainer import TrainConfig, train_regime

logger = logging.getLogger("ptner")

REGIMES = ("concat", "partial", "propagate", "standard", "one-type")


# -- run metadata -------------------------------------------------------------

def sha256(path: str | Path) -> str:
    h = hashlib.sha256()
    with open(path, "rb") as fh:
        for chunk in iter(lambda: fh.read(1 << 20), b""):
            h.update(chunk)
    return h.hexdigest()


def versions() -> dict:
    out = {"ptner": __version__, "python": platform.python_version(), "numpy": np.__version__,
           "backend": BACKEND_NAME}
    try:
        out["numba"] = importlib_metadata.version("numba")
    except importlib_metadata.PackageNotFoundError:
        out["numba"] = None
    return out


def write_meta(path: str | Path, argv: Sequence[str], inputs: Sequence[str | Path] = (),
               config: dict | None = None, seeds: dict | None = None, **extra) -> None:
    meta = {
        "command": list(argv),
        "config": config,
        "seeds": seeds or {},
        "inputs": {str(p): sha256(p) for p in inputs},
        "versions": versions(),
        **extra,
    }
    Path(path).write_text(json.dumps(meta, indent=2, sort_keys=True, default=str) + "\n")


def _dump(path: str | Path, data) -> None:
    Path(path).write_text(json.dumps(data, indent=2, sort_keys=True) + "\n")


# -- input helpers ------------------------------------------------------------

def parse_spec(spec: str) -> tuple[Path, list[str] | None]:
    """``path`` or ``path::TYPE1,TYPE2`` (explicit annotated type set)."""
    path, sep, types = spec.partition("::")
    if not sep:
        return Path(path), None
    names = [t for t in types.split(",") if t]
    if not names:
        raise argparse.ArgumentTypeError(f"empty type list in {spec!r}")
    return Path(path), names


def read_projected(path: Path, space: LabelSpace, typeset=None, split: str = "train") -> Corpus:
    """Read ``path`` into ``space``; entities of types outside ``typeset`` become O."""
    keep = space.all_types if typeset is None else frozenset(typeset)
    extra = sorted(scan_types(path) - set(space.types))
    wide = LabelSpace(space.types + tuple(extra), space.schema) if extra else space
    corpus = read_conll(path, wide, split_tag=split)
    if extra:
        logger.warning("%s: dropping entity types %s", path, extra)
    sents = [Sentence(s.tokens, project(s.gold, keep, wide), keep) for s in corpus]
    return Corpus(sents, space, split, corpus.name)


def load_train_files(specs: Sequence[str], schema: str) -> list[Corpus]:
    parsed = [parse_spec(s) for s in specs]
    typesets = []
    for path, names in parsed:
        names = names if names is not None else sorted(scan_types(path))
        if not names:
            raise LabelError(f"{path}: no entities found; give its types as {path}::TYPE,...")
        typesets.append(names)
    space = LabelSpace.from_names({n for ts in typesets for n in ts}, schema)
    return [read_projected(path, space, space.typeset(ts)) for (path, _), ts in zip(parsed, typesets)]


def load_config(path: str | None) -> TrainConfig:
    return TrainConfig.from_json(path) if path else TrainConfig()


def parse_typesets(items: Sequence[str] | None, space: LabelSpace) -> list[frozenset]:
    if not items:
        return [frozenset([t]) for t in range(space.n_types)]
    return [space.typeset(item.split(",")) for item in items]


# -- commands -----------------------------------------------------------------

def cmd_mask(args, argv) -> int:
    space = LabelSpace.from_names(scan_types(args.input))
    corpus = read_conll(args.input, space)
    folds = mask_split(corpus, args.folds, args.seed)
    stats = write_mask_output(folds, args.out_dir)
    write_meta(Path(args.out_dir) / "mask.meta.json", argv, [args.input], seeds={"split": args.seed},
               types=list(space.types))
    print(json.dumps(stats, indent=2, sort_keys=True))
    return 0


def _train_corpora(args) -> tuple[list[Corpus], FeatureVocab, list]:
    corpora = load_train_files(args.train, args.schema)
    space = corpora[0].space
    vocab = FeatureVocab.build(s.tokens for c in corpora for s in c)
    dev = []
    if args.dev:
        dev = [extract_sentence(s, vocab) for s in read_projected(Path(args.dev), space, split="dev")]
    return corpora, vocab, dev


def _inputs(args) -> list[Path]:
    return [parse_spec(s)[0] for s in args.train] + ([Path(args.dev)] if args.dev else [])


def cmd_train(args, argv) -> int:
    config = load_config(args.config)
    if args.hard_transitions:
        config.hard_transitions = True
    corpora, vocab, dev = _train_corpora(args)
    space = corpora[0].space
    if args.regime == "propagate":
        result = run_propagate(corpora, vocab, config, dev or None).result
    else:
        if args.regime == "one-type" and space.n_types != 1:
            raise ValueError(f"one-type training needs a single type, got {list(space.types)}")
        result = train_regime(corpora, args.regime.replace("-", "_"), vocab, config, dev or None)
    model = result.model
    model.metadata.update({"regime": args.regime, "typeset": list(space.types)})
    out = Path(args.model_out)
    out.parent.mkdir(parents=True, exist_ok=True)
    save_model(model, out)
    write_meta(out.with_name(out.name + ".meta.json"), argv, _inputs(args) + _config_input(args),
               config.to_dict(), {"train": config.seed}, regime=args.regime,
               best_epoch=result.best_epoch, history=result.history)
    logger.info("best epoch %d, model written to %s", result.best_epoch, out)
    return 0


def _config_input(args) -> list[Path]:
    return [Path(args.config)] if args.config else []


def cmd_propagate(args, argv) -> int:
    config = load_config(args.config)
    if args.hard_transitions:
        config.hard_transitions = True
    corpora, vocab, dev = _train_corpora(args)
    run = run_propagate(corpora, vocab, config, dev or None, hard=args.hard_propagate)
    out_dir = Path(args.out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    for j, (model, af) in enumerate(zip(run.fold_models, run.annotated)):
        save_model(model, out_dir / f"fold{j}.model")
        space = af.corpus.space
        rows = []
        for s, prop in zip(af.corpus, af.propagated):
            labels = ["O"] * len(s)
            for p in prop:
                enc = encode_spans([p.span], len(s), space)
                for t in range(p.span.start, p.span.end + 1):
                    if labels[t] == "O":
                        labels[t] = space.to_string(enc[t])
            rows.append([(tok, space.to_string(g), lab) for tok, g, lab in zip(s.tokens, s.gold, labels)])
        write_columns(out_dir / f"annotated{j}.conll", rows)
    model_out = Path(args.model_out) if args.model_out else out_dir / "propagate.model"
    run.result.model.metadata.update({"regime": "propagate", "typeset": list(corpora[0].space.types)})
    save_model(run.result.model, model_out)
    write_meta(out_dir / "propagate.meta.json", argv, _inputs(args) + _config_input(args),
               config.to_dict(), {"train": config.seed}, conflicts=run.conflicts,
               propagated_spans=sum(a.n_propagated() for a in run.annotated),
               best_epoch=run.result.best_epoch, history=run.result.history)
    return 0


def cmd_predict(args, argv) -> int:
    model = load_model(args.model)
    sentences = read_tokens(args.input)
    rows = []
    for tokens in sentences:
        pred = core.decode(extract(tokens, model.vocab), model)
        rows.append([(tok, model.space.to_string(p)) for tok, p in zip(tokens, pred)])
    write_columns(args.output, rows)
    write_meta(Path(args.output).with_name(Path(args.output).name + ".meta.json"), argv,
               [args.model, args.input])
    return 0


def cmd_eval(args, argv) -> int:
    model = load_model(args.model)
    test = read_projected(Path(args.test), model.space, split="test")
    fsents = [extract_sentence(s, model.vocab) for s in test]
    typesets = parse_typesets(args.typesets, model.space)
    report, preds = evaluate(fsents, model, typesets)
    out = report.to_json()
    out["typesets"] = [typeset_names(ts, model.space) for ts in typesets]
    _dump(args.report, out)
    if args.predictions:
        to_str = model.space.to_string
        write_columns(args.predictions, ([(tok, to_str(g), to_str(p)) for tok, g, p in zip(s.tokens, s.gold, pr)]
                                         for s, pr in zip(test, preds)))
    write_meta(Path(args.report).with_name(Path(args.report).name + ".meta.json"), argv,
               [args.model, args.test])
    print(f"micro F1 {out['micro']['f1']:.4f}  E_all {out.get('e_all', float('nan')):.4f}")
    return 0


def cmd_verify(args, argv) -> int:
    lemma = verify_lemma1(args.trials, args.max_len, args.types, args.splits, args.seed)
    trials = random_theorem_trials(args.trials, args.max_len, args.types, args.splits, args.seed)
    report = {"lemma": lemma.to_json(), "theorem_random": trials}
    ok = lemma.ok and all(t["ok"] for t in trials)
    inputs = []
    if args.model:
        if not args.test:
            raise ValueError("--model needs --test")
        model = load_model(args.model)
        test = read_projected(Path(args.test), model.space, split="test")
        typesets = parse_typesets(args.typesets, model.space)
        rep = verify_theorem1(model, [extract_sentence(s, model.vocab) for s in test], typesets)
        report["theorem_model"] = rep.to_json()
        ok = ok and rep.ok
        inputs = [args.model, args.test]
    report["ok"] = ok
    _dump(args.report, report)
    write_meta(Path(args.report).with_name(Path(args.report).name + ".meta.json"), argv, inputs,
               seeds={"trials": args.seed})
    print(f"lemma: {lemma.checked} checked, {lemma.violations} violations; "
          f"theorem: {'ok' if ok else 'VIOLATED'}")
    return 0 if ok else 1


def cmd_repro(args, argv) -> int:
    config = load_config(args.config)
    out_dir = Path(args.out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    if args.synthetic:
        syn = SyntheticConfig(train=args.synthetic_size, seed=args.synthetic_seed)
        paths = write_synthetic(out_dir / "data", syn)
        train_path, dev_path, test_path = paths["train"], paths["dev"], paths["test"]
    elif args.train and args.dev and args.test:
        train_path, dev_path, test_path = Path(args.train), Path(args.dev), Path(args.test)
    else:
        raise ValueError("repro needs --synthetic or all of --train, --dev, --test")
    space = LabelSpace.from_names(scan_types(train_path))
    train = read_conll(train_path, space)
    dev = read_projected(dev_path, space, split="dev")
    test = read_projected(test_path, space, split="test")
    rows = run_repro(train, dev, test, args.folds, config, out_dir, seed=args.seed,
                     one_type=args.one_type, hard_propagate=args.hard_propagate)
    write_meta(out_dir / "repro.meta.json", argv, [train_path, dev_path, test_path] + _config_input(args),
               config.to_dict(), {"split": args.seed, "train": config.seed},
               methods=[r.method for r in rows])
    print((out_dir / "table.md").read_text(), end="")
    return 0


def cmd_synth(args, argv) -> int:
    syn = SyntheticConfig(train=args.train_size, seed=args.seed)
    write_synthetic(args.out_dir, syn)
    write_meta(Path(args.out_dir) / "synth.meta.json", argv, seeds={"data": args.seed},
               config=syn.__dict__)
    return 0


# -- parser -------------------------------------------------------------------

def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="ptner", description=__doc__.splitlines()[0])
    p.add_argument("-v", "--verbose", action="store_true", help="log training progress")
    sub = p.add_subparsers(dest="command", required=True)

    s = sub.add_parser("mask", help="split a fully-typed corpus into partially-typed folds")
    s.add_argument("--input", required=True)
    s.add_argument("--folds", type=int, required=True)
    s.add_argument("--seed", type=int, default=0)
    s.add_argument("--out-dir", required=True)
    s.set_defaults(func=cmd_mask)

    def train_args(s):
        s.add_argument("--train", nargs="+", required=True, metavar="PATH[::TYPES]",
                       help="CoNLL files; a file's type set defaults to the types it contains")
        s.add_argument("--dev", help="fully-typed dev file for model selection")
        s.add_argument("--config", help="TrainConfig JSON")
        s.add_argument("--schema", choices=(IOBES, IOB2), default=IOBES)
        s.add_argument("--hard-transitions", action="store_true",
                       help="forbid schema-invalid transitions at score time")

    s = sub.add_parser("train", help="train one model")
    s.add_argument("--regime", choices=REGIMES, required=True)
    train_args(s)
    s.add_argument("--model-out", required=True)
    s.set_defaults(func=cmd_train)

    s = sub.add_parser("propagate", help="fold models, cross-annotation, retraining")
    train_args(s)
    s.add_argument("--out-dir", required=True)
    s.add_argument("--model-out")
    s.add_argument("--hard-propagate", action="store_true",
                   help="propagated spans exclude O at the positions they cover")
    s.set_defaults(func=cmd_propagate)

    s = sub.add_parser("predict", help="label a token file")
    s.add_argument("--model", required=True)
    s.add_argument("--input", required=True)
    s.add_argument("--output", required=True)
    s.set_defaults(func=cmd_predict)

    s = sub.add_parser("eval", help="F1 and sentence error rates on a fully-typed file")
    s.add_argument("--model", required=True)
    s.add_argument("--test", required=True)
    s.add_argument("--report", required=True)
    s.add_argument("--predictions", help="write token, gold, predicted columns here")
    s.add_argument("--typesets", nargs="+", metavar="T1,T2",
                   help="type sets for partial error rates (default: one per type)")
    s.set_defaults(func=cmd_eval)

    s = sub.add_parser("verify-theorem", help="exact checks of the partial-error bounds")
    s.add_argument("--trials", type=int, default=1000)
    s.add_argument("--max-len", type=int, default=4)
    s.add_argument("--types", type=int, default=2)
    s.add_argument("--splits", type=int, default=2)
    s.add_argument("--seed", type=int, default=0)
    s.add_argument("--report", required=True)
    s.add_argument("--model")
    s.add_argument("--test")
    s.add_argument("--typesets", nargs="+", metavar="T1,T2")
    s.set_defaults(func=cmd_verify)

    s = sub.add_parser("repro", help="mask, train every regime, evaluate, tabulate")
    s.add_argument("--train")
    s.add_argument("--dev")
    s.add_argument("--test")
    s.add_argument("--synthetic", action="store_true", help="generate the corpus instead")
    s.add_argument("--synthetic-size", type=int, default=SyntheticConfig.train)
    s.add_argument("--synthetic-seed", type=int, default=SyntheticConfig.seed)
    s.add_argument("--folds", type=int, default=3)
    s.add_argument("--seed", type=int, default=0, help="fold assignment seed")
    s.add_argument("--config")
    s.add_argument("--one-type", action="store_true", help="also train one model per type")
    s.add_argument("--hard-propagate", action="store_true")
    s.add_argument("--out-dir", required=True)
    s.set_defaults(func=cmd_repro)

    s = sub.add_parser("synth", help="write the synthetic train/dev/test corpus")
    s.add_argument("--out-dir", required=True)
    s.add_argument("--train-size", type=int, default=SyntheticConfig.train)
    s.add_argument("--seed", type=int, default=SyntheticConfig.seed)
    s.set_defaults(func=cmd_synth)
    return p


def main(argv: Sequence[str] | None = None) -> int:
    argv = list(sys.argv[1:] if argv is None else argv)
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code or 0)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    try:
        return args.func(args, argv)
    except (OSError, ValueError, KeyError, zipfile.BadZipFile) as err:
        print(f"ptner {args.command}: error: {err}", file=sys.stderr)
        return 1

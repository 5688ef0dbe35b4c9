"""Command-line entry point: stats, train, evaluate, baseline, explain, align,
taxonomy export.

Settings resolve as defaults <- ``--config`` JSON file <- flags. Every JSON
output carries the resolved run configuration and a schema version.
Exit codes: 0 success, 2 input error, 3 numerical failure.
"""

from __future__ import annotations

import argparse
import csv
import io
import json
import logging
import sys
from dataclasses import asdict, dataclass, field, fields, replace
from pathlib import Path
from typing import Optional

import numpy as np

from . import __version__
from .alignment import DEFAULT_THRESHOLD, alignment_report
from .attribution import BASELINES, METHODS, AttributionResult, IGConfig, explain
from .corpus import Corpus, corpus_stats, load_corpus
from .errors import E2RError, InputError, NumericalError
from .evaluation import baseline_expected_scores, classification_report, majority_baseline
from .model import Model, ModelConfig, predict_batch
from .taxonomy import DEFAULT_TABLE, TaxonomyTable
from .text import DEFAULT_MAX_LEN
from .training import TrainConfig, cross_validate, encode_dataset, task_instances

SCHEMA_VERSION = 1
log = logging.getLogger("e2rstrat")


@dataclass
class RunConfig:
    corpus: Optional[str] = None
    taxonomy: Optional[str] = None
    out: str = "out"
    seed: int = 0
    task: str = "strategy"
    checkpoint: Optional[str] = None
    attributions: Optional[str] = None
    text: Optional[str] = None
    target: Optional[str] = None
    threshold: float = DEFAULT_THRESHOLD
    top_n: int = 20
    train: TrainConfig = field(default_factory=TrainConfig)
    embed_dim: int = 32
    hidden_dim: int = 32
    max_len: int = DEFAULT_MAX_LEN
    ig: IGConfig = field(default_factory=IGConfig)

    def to_dict(self) -> dict:
        d = asdict(self)
        return d

    def model_config(self) -> ModelConfig:
        return ModelConfig(vocab_size=1, embed_dim=self.embed_dim, hidden_dim=self.hidden_dim,
                           max_len=self.max_len, seed=self.seed)


# flag name -> (RunConfig path)
_FLAG_MAP = {
    "corpus": ("corpus",), "taxonomy": ("taxonomy",), "out": ("out",), "seed": ("seed",),
    "task": ("task",), "checkpoint": ("checkpoint",), "attributions": ("attributions",),
    "text": ("text",), "target": ("target",), "threshold": ("threshold",), "top_n": ("top_n",),
    "embed_dim": ("embed_dim",), "hidden_dim": ("hidden_dim",), "max_len": ("max_len",),
    "folds": ("train", "folds"), "lr": ("train", "learning_rate"), "epochs": ("train", "max_epochs"),
    "patience": ("train", "patience"), "batch_size": ("train", "batch_size"),
    "weight_decay": ("train", "weight_decay"), "clip": ("train", "clip_threshold"),
    "steps": ("ig", "steps"), "baseline": ("ig", "baseline"), "method": ("ig", "method"),
}


def _apply(cfg: RunConfig, path: tuple, value) -> RunConfig:
    if len(path) == 1:
        setattr(cfg, path[0], value)
    else:
        sub = getattr(cfg, path[0])
        setattr(cfg, path[0], replace(sub, **{path[1]: value}))
    return cfg


def resolve_config(args: argparse.Namespace) -> RunConfig:
    cfg = RunConfig()
    if getattr(args, "config", None):
        path = Path(args.config)
        if not path.is_file():
            raise InputError(f"config file not found: {path}")
        try:
            data = json.loads(path.read_text(encoding="utf-8"))
        except json.JSONDecodeError as exc:
            raise InputError(f"{path}: invalid JSON ({exc})") from exc
        for key, value in data.items():
            if key == "train":
                cfg.train = replace(cfg.train, **value)
            elif key == "ig":
                cfg.ig = replace(cfg.ig, **value)
            elif key in {f.name for f in fields(RunConfig)}:
                setattr(cfg, key, value)
            else:
                raise InputError(f"unknown config key {key!r}")
    for flag, path in _FLAG_MAP.items():
        value = getattr(args, flag, None)
        if value is not None:
            _apply(cfg, path, value)
    # the run seed drives the training splits too unless set explicitly
    if getattr(args, "seed", None) is not None:
        cfg.train = replace(cfg.train, seed=cfg.seed)
    cfg.train.validate()
    cfg.ig.validate()
    return cfg


# -- output helpers ----------------------------------------------------------

def _envelope(cfg: RunConfig, command: str, payload: dict) -> dict:
    return {"schema_version": SCHEMA_VERSION, "command": command,
            "run_config": cfg.to_dict(), **payload}


def _write_json(path: Path, obj) -> None:
    path.parent.mkdir(parents=True, exist_ok=True)
    path.write_text(json.dumps(obj, indent=2, ensure_ascii=False) + "\n", encoding="utf-8")


def _write_text(path: Path, text: str) -> None:
    path.parent.mkdir(parents=True, exist_ok=True)
    path.write_text(text, encoding="utf-8")


def _load_table(cfg: RunConfig) -> TaxonomyTable:
    if cfg.taxonomy is None:
        return DEFAULT_TABLE
    path = Path(cfg.taxonomy)
    if not path.is_file():
        raise InputError(f"taxonomy file not found: {path}")
    return TaxonomyTable.load(path)


def _load_corpus(cfg: RunConfig) -> Corpus:
    if cfg.corpus is None:
        raise InputError("--corpus is required")
    path = Path(cfg.corpus)
    if not path.is_file():
        raise InputError(f"corpus file not found: {path}")
    return load_corpus(path, _load_table(cfg))


def _load_checkpoint(cfg: RunConfig):
    if cfg.checkpoint is None:
        raise InputError("--checkpoint is required")
    path = Path(cfg.checkpoint)
    if not path.is_file():
        raise InputError(f"checkpoint not found: {path}")
    model, vocab = Model.load(path)
    if vocab is None:
        raise InputError(f"{path} has no embedded vocabulary")
    return model, vocab


# -- commands ---------------------------------------------------------------

def cmd_stats(cfg: RunConfig) -> int:
    corpus = _load_corpus(cfg)
    stats = corpus_stats(corpus)
    out = Path(cfg.out)
    _write_json(out / "stats.json", _envelope(cfg, "stats", {"stats": stats.to_dict()}))
    _write_text(out / "stats.csv", stats.to_csv())
    print(stats.to_csv(), end="")
    return 0


def cmd_train(cfg: RunConfig) -> int:
    corpus = _load_corpus(cfg)
    result = cross_validate(corpus, cfg.train, cfg.model_config(), task=cfg.task)
    out = Path(cfg.out)
    rows = []
    folds = []
    for f in result.folds:
        f.model.save(out / f"fold_{f.fold_index}" / "checkpoint.json", result.vocab)
        for h in f.history:
            rows.append([h["epoch"], f.fold_index, h["train_loss"], h["val_loss"], h["val_macro_f1"]])
        folds.append({"fold": f.fold_index, "best_epoch": f.best_epoch, "epochs_run": len(f.history),
                      "train_accuracy": f.train_accuracy, "report": f.report.to_dict()})
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(["epoch", "fold", "train_loss", "val_loss", "val_macro_f1"])
    w.writerows(rows)
    _write_text(out / "history.csv", buf.getvalue())
    result.vocab.save(out / "vocab.json")
    _write_json(out / "report.json", _envelope(cfg, "train", {
        "class_names": list(result.class_names), "folds": folds,
        "averaged": result.report.to_dict()}))
    _write_text(out / "report.txt", result.report.to_text())
    _write_json(out / "run_config.json", _envelope(cfg, "train", {}))
    print(result.report.to_text(), end="")
    return 0


def cmd_evaluate(cfg: RunConfig) -> int:
    corpus = _load_corpus(cfg)
    model, vocab = _load_checkpoint(cfg)
    texts, targets, class_names = task_instances(corpus, cfg.task)
    if tuple(class_names) != model.class_names:
        raise InputError(f"checkpoint classes {model.class_names} do not match task {cfg.task!r}")
    if not texts:
        raise InputError("corpus has no instances for this task")
    data = encode_dataset(texts, targets, vocab, model.config.max_len)
    pred = np.argmax(predict_batch(model, data.ids, data.lengths), axis=1)
    present = sorted(set(data.targets.tolist()) | set(pred.tolist()))
    report = classification_report([class_names[t] for t in data.targets],
                                   [class_names[t] for t in pred],
                                   labels=[class_names[t] for t in present])
    out = Path(cfg.out)
    _write_json(out / "evaluation.json", _envelope(cfg, "evaluate", {"report": report.to_dict()}))
    _write_text(out / "evaluation.txt", report.to_text())
    print(report.to_text(), end="")
    return 0


def cmd_baseline(cfg: RunConfig) -> int:
    corpus = _load_corpus(cfg)
    _, targets, class_names = task_instances(corpus, cfg.task)
    if not targets:
        raise InputError("corpus has no instances for this task")
    gold = [class_names[t] for t in targets]
    base = majority_baseline(sorted(targets))
    predicted = [class_names[base.label]] * len(gold)
    labels = [class_names[t] for t in sorted(set(targets))]
    report = classification_report(gold, predicted, labels=labels)
    p = gold.count(class_names[base.label]) / len(gold)
    expected = baseline_expected_scores(p, len(labels))
    out = Path(cfg.out)
    _write_json(out / "baseline.json", _envelope(cfg, "baseline", {
        "majority_class": class_names[base.label], "majority_proportion": p,
        "report": report.to_dict(), "expected": expected}))
    text = (report.to_text()
            + f"\nmajority class: {class_names[base.label]} (proportion {p:.3f})\n"
            + f"closed form: accuracy {expected['accuracy']:.3f}  weighted F1 "
              f"{expected['weighted_f1']:.3f}  macro F1 {expected['macro_f1']:.3f}\n")
    _write_text(out / "baseline.txt", text)
    print(text, end="")
    return 0


def _ig_config(cfg: RunConfig, model: Model) -> IGConfig:
    if cfg.target is None:
        return cfg.ig
    if cfg.target not in model.class_names:
        raise InputError(f"unknown target class {cfg.target!r}; choose from {model.class_names}")
    return replace(cfg.ig, target=model.class_names.index(cfg.target))


def _explain_records(cfg: RunConfig, model: Model, vocab) -> list[dict]:
    igc = _ig_config(cfg, model)
    if cfg.text is not None:
        return [{"id": "text", **explain(model, cfg.text, vocab, igc).to_dict()}]
    corpus = _load_corpus(cfg)
    return [{"id": p.id, **explain(model, p.complex_text, vocab, igc).to_dict()} for p in corpus.pairs]


def cmd_explain(cfg: RunConfig) -> int:
    model, vocab = _load_checkpoint(cfg)
    records = _explain_records(cfg, model, vocab)
    out = Path(cfg.out)
    _write_json(out / "explanations.json", _envelope(cfg, "explain", {"records": records}))
    tables = []
    for r in records:
        res = AttributionResult.from_dict(r)
        probs = ", ".join(f"{k}: {v:.2f}" for k, v in r["prediction"]["probabilities"].items())
        tables.append(f"[{r['id']}] {r['sentence']}\n{probs}\n{res.to_text()}"
                      f"completeness gap: {r['completeness_gap']:.3e}\n")
    text = "\n".join(tables)
    _write_text(out / "explanations.txt", text)
    print(text, end="")
    return 0


def cmd_align(cfg: RunConfig) -> int:
    corpus = _load_corpus(cfg)
    if cfg.attributions is not None:
        path = Path(cfg.attributions)
        if not path.is_file():
            raise InputError(f"attributions file not found: {path}")
        records = json.loads(path.read_text(encoding="utf-8"))["records"]
    else:
        model, vocab = _load_checkpoint(cfg)
        records = _explain_records(replace(cfg, text=None), model, vocab)
    attrs = {r["id"]: AttributionResult.from_dict(r) for r in records}
    try:
        report = alignment_report(corpus, attrs, cfg.threshold, cfg.top_n)
    except KeyError as exc:
        raise InputError(str(exc.args[0])) from None
    out = Path(cfg.out)
    _write_json(out / "align.json", _envelope(cfg, "align", report.to_dict()))
    _write_text(out / "top_removed.csv", report.top_csv())
    print(f"complex words: {report.total_complex_words}  removed: {report.removed_complex_words}"
          f"  ({report.percent})")
    return 0


def cmd_taxonomy_export(cfg: RunConfig) -> int:
    table = _load_table(cfg)
    _write_text(Path(cfg.out) / "taxonomy.json", table.dumps())
    print(table.dumps(), end="")
    return 0


COMMANDS = {
    "stats": cmd_stats, "train": cmd_train, "evaluate": cmd_evaluate, "baseline": cmd_baseline,
    "explain": cmd_explain, "align": cmd_align, "taxonomy": cmd_taxonomy_export,
}


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="e2rstrat", description=__doc__.splitlines()[0])
    parser.add_argument("--version", action="version", version=__version__)
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--config", help="JSON file with run settings")
    common.add_argument("--corpus")
    common.add_argument("--taxonomy")
    common.add_argument("--out")
    common.add_argument("--seed", type=int)
    common.add_argument("--task", choices=("strategy", "complexity"))
    common.add_argument("--max-len", dest="max_len", type=int)
    common.add_argument("-v", "--verbose", action="store_true")

    sub = parser.add_subparsers(dest="command", required=True)
    sub.add_parser("stats", parents=[common], help="corpus statistics")

    p = sub.add_parser("train", parents=[common], help="stratified k-fold training")
    p.add_argument("--folds", type=int)
    p.add_argument("--lr", type=float)
    p.add_argument("--epochs", type=int)
    p.add_argument("--patience", type=int)
    p.add_argument("--batch-size", dest="batch_size", type=int)
    p.add_argument("--weight-decay", dest="weight_decay", type=float)
    p.add_argument("--clip", type=float)
    p.add_argument("--embed-dim", dest="embed_dim", type=int)
    p.add_argument("--hidden-dim", dest="hidden_dim", type=int)

    p = sub.add_parser("evaluate", parents=[common], help="score a checkpoint on a corpus")
    p.add_argument("--checkpoint")

    sub.add_parser("baseline", parents=[common], help="majority-class baseline")

    for name in ("explain", "align"):
        p = sub.add_parser(name, parents=[common],
                           help="Integrated Gradients" if name == "explain" else "complex/removed word overlap")
        p.add_argument("--checkpoint")
        p.add_argument("--steps", type=int)
        p.add_argument("--baseline", choices=BASELINES)
        p.add_argument("--method", choices=METHODS)
        p.add_argument("--target", help="class name to attribute (default: predicted)")
        if name == "explain":
            p.add_argument("--text", help="explain one sentence instead of a corpus")
        else:
            p.add_argument("--attributions", help="explanations.json from `explain`")
            p.add_argument("--threshold", type=float)
            p.add_argument("--top-n", dest="top_n", type=int)

    p = sub.add_parser("taxonomy", parents=[common], help="taxonomy utilities")
    p.add_argument("action", choices=("export",))
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    logging.basicConfig(level=logging.DEBUG if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    try:
        cfg = resolve_config(args)
        return COMMANDS[args.command](cfg)
    except NumericalError as exc:
        print(f"error: numerical failure: {exc}", file=sys.stderr)
        return 3
    except (E2RError, OSError, TypeError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())

"""Training recipe: inverse-frequency class weights, weighted cross-entropy,
gradient-norm clipping, stratified k-fold splits and early stopping."""

from __future__ import annotations

import logging
import warnings
from collections import Counter
from dataclasses import asdict, dataclass, field, replace
from typing import Hashable, Mapping, Optional, Sequence

import numpy as np

from .corpus import Corpus
from .errors import EmptyInput, InvalidConfig, InvalidK, NumericalError
from .evaluation import ClassificationReport, average_reports, classification_report
from .model import (COMPLEXITY_CLASSES, STRATEGY_CLASSES, PROB_FLOOR, Model, ModelConfig,
                    init_model, loss_and_grads, predict_batch)
from .text import DEFAULT_MAX_LEN, Vocabulary, build_vocab, encode

log = logging.getLogger(__name__)


@dataclass(frozen=True)
class TrainConfig:
    learning_rate: float = 0.5
    batch_size: int = 8
    weight_decay: float = 0.01
    max_epochs: int = 20
    patience: int = 3
    clip_threshold: float = 1.0
    folds: int = 5
    seed: int = 0

    def validate(self) -> None:
        for name in ("learning_rate", "batch_size", "max_epochs", "patience", "clip_threshold", "folds"):
            if not getattr(self, name) > 0:
                raise InvalidConfig(f"{name} must be positive")
        if self.weight_decay < 0:
            raise InvalidConfig("weight_decay must be non-negative")


# Values used for the large pre-trained models; too slow for the desk model.
LARGE_MODEL_PRESET = TrainConfig(learning_rate=5e-6)


# -- class weights and loss -----------------------------------------------

@dataclass(frozen=True)
class ClassWeights:
    weights: Mapping[Hashable, float]
    frequencies: Mapping[Hashable, int]
    total: int

    def __getitem__(self, label) -> float:
        return self.weights[label]

    def for_targets(self, targets: Sequence, default: float = 1.0) -> np.ndarray:
        return np.array([self.weights.get(t, default) for t in targets], dtype=np.float64)


def compute_class_weights(labels: Sequence[Hashable]) -> ClassWeights:
    """w_c = (1 / freq_c) * (N / 2) for every class present in ``labels``."""
    labels = list(labels)
    if not labels:
        raise EmptyInput("cannot weight an empty label list")
    freq = Counter(labels)
    n = len(labels)
    weights = {c: (1.0 / f) * (n / 2.0) for c, f in freq.items()}
    return ClassWeights(weights, dict(freq), n)


def weighted_cross_entropy(probabilities, targets: Sequence, weights) -> float:
    """Weighted mean of -log p[y]; ``weights`` is a ClassWeights or per-sample array.

    Probabilities are floored at 1e-12 before the log.
    """
    probs = np.atleast_2d(np.asarray(probabilities, dtype=np.float64))
    targets = list(targets)
    if len(targets) == 0:
        raise EmptyInput("empty batch")
    if isinstance(weights, ClassWeights):
        w = weights.for_targets(targets)
        idx = np.array([t if isinstance(t, (int, np.integer)) else int(t.index) for t in targets])
    else:
        w = np.asarray(weights, dtype=np.float64)
        idx = np.asarray(targets)
    p = probs[np.arange(len(targets)), idx]
    if not np.all(np.isfinite(p)):
        raise NumericalError("non-finite probability in loss")
    nll = -np.log(np.maximum(p, PROB_FLOOR))
    return float(np.dot(w, nll) / w.sum())


def clip_gradient_norm(gradients, threshold: float = 1.0) -> np.ndarray:
    """Rescale ``gradients`` to L2 norm ``threshold`` if it is larger; otherwise
    return the input unchanged (same values, no copy)."""
    if threshold <= 0:
        raise ValueError("threshold must be positive")
    g = np.asarray(gradients)
    norm = float(np.linalg.norm(g))
    if norm > threshold:
        return g * (threshold / norm)
    return g


# -- stratified folds ------------------------------------------------------

def stratified_folds(labels: Sequence[Hashable], k: int, seed: int = 0) -> list[np.ndarray]:
    """Partition indices into k folds with per-class counts differing by <= 1.

    Each class's indices are shuffled then dealt round-robin; the dealing
    offset carries over between classes so fold sizes also stay within 1.
    """
    n = len(labels)
    if k < 2 or k > n:
        raise InvalidK(f"k must be in [2, {n}], got {k}")
    rng = np.random.default_rng(seed)
    by_class: dict = {}
    for i, lab in enumerate(labels):
        by_class.setdefault(lab, []).append(i)
    folds: list[list[int]] = [[] for _ in range(k)]
    offset = 0
    for lab in sorted(by_class, key=_stable_key):
        idx = np.array(by_class[lab])
        rng.shuffle(idx)
        for j, i in enumerate(idx):
            folds[(offset + j) % k].append(int(i))
        offset = (offset + len(idx)) % k
    return [np.array(sorted(f), dtype=np.int64) for f in folds]


def _stable_key(label):
    index = getattr(label, "index", None)
    if isinstance(index, int):
        return (0, index, "")
    return (1, 0, repr(label))


# -- datasets ---------------------------------------------------------------

@dataclass
class EncodedDataset:
    ids: np.ndarray       # (N, max_len) int
    lengths: np.ndarray   # (N,)
    targets: np.ndarray   # (N,) class indices
    texts: list = field(default_factory=list)

    def __len__(self):
        return len(self.targets)

    def subset(self, idx) -> "EncodedDataset":
        idx = np.asarray(idx, dtype=np.intp)
        return EncodedDataset(self.ids[idx], self.lengths[idx], self.targets[idx],
                              [self.texts[i] for i in idx] if self.texts else [])


def encode_dataset(texts: Sequence[str], targets: Sequence[int], vocab: Vocabulary,
                   max_len: int = DEFAULT_MAX_LEN) -> EncodedDataset:
    enc = [encode(t, vocab, max_len) for t in texts]
    return EncodedDataset(
        np.array([e.ids for e in enc], dtype=np.int64).reshape(len(enc), max_len),
        np.array([e.true_length for e in enc], dtype=np.int64),
        np.asarray(targets, dtype=np.int64),
        list(texts),
    )


def task_instances(corpus: Corpus, task: str = "strategy") -> tuple[list[str], list[int], tuple]:
    """(texts, class indices, class names) for a task.

    ``strategy``: each labeled complex sentence with its strategy class.
    ``complexity``: every complex side as Complex, every simple side as Simple.
    """
    if task == "strategy":
        pairs = [p for p in corpus.pairs if p.label is not None]
        return [p.complex_text for p in pairs], [p.label.index for p in pairs], STRATEGY_CLASSES
    if task == "complexity":
        texts, targets = [], []
        for p in corpus.pairs:
            texts.append(p.complex_text)
            targets.append(1)
            for s in p.simple_texts:
                texts.append(s)
                targets.append(0)
        return texts, targets, COMPLEXITY_CLASSES
    raise InvalidConfig(f"unknown task {task!r}")


# -- training loop ----------------------------------------------------------

class EarlyStopping:
    """Tracks the best validation loss and keeps a snapshot of its parameters."""

    def __init__(self, patience: int):
        self.patience = patience
        self.best_loss = np.inf
        self.best_epoch = 0
        self.best_state = None
        self.bad_epochs = 0

    def update(self, epoch: int, val_loss: float, state=None) -> bool:
        """Record an epoch; return True when training should stop."""
        if val_loss < self.best_loss:
            self.best_loss = val_loss
            self.best_epoch = epoch
            self.best_state = state
            self.bad_epochs = 0
        else:
            self.bad_epochs += 1
        return self.bad_epochs >= self.patience


def _dataset_loss(model: Model, data: EncodedDataset, weights: ClassWeights) -> tuple[float, np.ndarray]:
    probs = predict_batch(model, data.ids, data.lengths)
    loss = weighted_cross_entropy(probs, data.targets, weights.for_targets(data.targets))
    return loss, probs


def accuracy(model: Model, data: EncodedDataset) -> float:
    probs = predict_batch(model, data.ids, data.lengths)
    return float(np.mean(np.argmax(probs, axis=1) == data.targets))


def sgd_step(model: Model, grads: dict, config: TrainConfig) -> float:
    """Clipped gradient step with decoupled weight decay. Returns the pre-clip norm."""
    names = list(grads)
    flat = np.concatenate([grads[k].ravel() for k in names])
    norm = float(np.linalg.norm(flat))
    if not np.isfinite(norm):
        raise NumericalError("non-finite gradient")
    flat = clip_gradient_norm(flat, config.clip_threshold)
    pos = 0
    lr, wd = config.learning_rate, config.weight_decay
    for k in names:
        p = model.params[k]
        g = flat[pos:pos + p.size].reshape(p.shape)
        pos += p.size
        model.params[k] = p - lr * g - lr * wd * p
    return norm


def train_with_early_stopping(model: Model, train: EncodedDataset, val: EncodedDataset,
                              weights: ClassWeights, config: TrainConfig,
                              rng: Optional[np.random.Generator] = None) -> tuple[Model, list[dict], int]:
    """Mini-batch gradient descent with per-batch clipping and early stopping on
    validation loss. Returns (model at the best epoch, history, best epoch)."""
    config.validate()
    if len(train) == 0 or len(val) == 0:
        raise EmptyInput("train and validation splits must be non-empty")
    rng = rng if rng is not None else np.random.default_rng(config.seed)
    model = model.copy()
    stopper = EarlyStopping(config.patience)
    history = []
    for epoch in range(1, config.max_epochs + 1):
        order = rng.permutation(len(train))
        for start in range(0, len(order), config.batch_size):
            b = order[start:start + config.batch_size]
            tgt = train.targets[b]
            _, grads = loss_and_grads(model, train.ids[b], train.lengths[b], tgt,
                                      weights.for_targets(tgt))
            sgd_step(model, grads, config)
        train_loss, _ = _dataset_loss(model, train, weights)
        val_loss, val_probs = _dataset_loss(model, val, weights)
        if not (np.isfinite(train_loss) and np.isfinite(val_loss)):
            raise NumericalError(f"loss diverged at epoch {epoch}")
        val_pred = np.argmax(val_probs, axis=1)
        val_f1 = classification_report(list(val.targets), list(val_pred)).macro["f1"]
        history.append({"epoch": epoch, "train_loss": train_loss, "val_loss": val_loss,
                        "val_macro_f1": val_f1})
        log.debug("epoch %d train_loss %.4f val_loss %.4f", epoch, train_loss, val_loss)
        if stopper.update(epoch, val_loss, model.flat()):
            break
    best = model.copy()
    best.set_flat(stopper.best_state)
    return best, history, stopper.best_epoch


# -- cross-validation ------------------------------------------------------

@dataclass
class FoldResult:
    fold_index: int
    history: list
    best_epoch: int
    report: ClassificationReport
    train_accuracy: float
    model: Model = field(repr=False, default=None)
    val_indices: np.ndarray = field(repr=False, default=None)


@dataclass
class CrossValidationResult:
    folds: list
    report: ClassificationReport
    vocab: Vocabulary
    class_names: tuple


def cross_validate(corpus: Corpus, config: TrainConfig = TrainConfig(),
                   model_config: Optional[ModelConfig] = None, task: str = "strategy",
                   vocab: Optional[Vocabulary] = None) -> CrossValidationResult:
    """Stratified k-fold training; class weights come from each training split.

    ``model_config`` supplies embed/hidden sizes, max_len and seed; vocabulary
    size and class count are filled in here.
    """
    config.validate()
    texts, targets, class_names = task_instances(corpus, task)
    if not texts:
        raise EmptyInput("no labeled instances to train on")
    counts = Counter(targets)
    if min(counts.values()) < config.folds:
        warnings.warn(f"some classes have fewer than {config.folds} samples; "
                      "they will be missing from some validation folds", stacklevel=2)
    vocab = vocab if vocab is not None else build_vocab(texts)
    base = model_config or ModelConfig(vocab_size=vocab.size)
    base = replace(base, vocab_size=vocab.size, num_classes=len(class_names))
    data = encode_dataset(texts, targets, vocab, base.max_len)
    folds = stratified_folds(targets, config.folds, config.seed)
    labels_all = np.arange(len(texts))
    results = []
    for fi, val_idx in enumerate(folds):
        train_idx = np.setdiff1d(labels_all, val_idx)
        train, val = data.subset(train_idx), data.subset(val_idx)
        weights = compute_class_weights(list(train.targets))
        model = init_model(replace(base, seed=base.seed + fi), class_names)
        rng = np.random.default_rng([config.seed, fi])
        model, history, best_epoch = train_with_early_stopping(model, train, val, weights, config, rng)
        val_pred = np.argmax(predict_batch(model, val.ids, val.lengths), axis=1)
        present = sorted(set(val.targets.tolist()) | set(val_pred.tolist()))
        report = classification_report([class_names[t] for t in val.targets],
                                       [class_names[t] for t in val_pred],
                                       labels=[class_names[t] for t in present])
        results.append(FoldResult(fi, history, best_epoch, report, accuracy(model, train),
                                  model, val_idx))
    seen = {lab for r in results for lab in r.report.per_class}
    averaged = average_reports([r.report for r in results],
                               labels=[n for n in class_names if n in seen])
    return CrossValidationResult(results, averaged, vocab, tuple(class_names))


def config_dict(config: TrainConfig) -> dict:
    return asdict(config)

"""Small differentiable text classifier in plain numpy.

Architecture: embedding lookup -> masked mean pooling -> one hidden layer
(tanh, or identity for an exactly linear model) -> linear head -> softmax.
All arithmetic is float64. Gradients are derived by hand; see
``loss_and_grads`` and ``grad_wrt_embeddings``.
"""

from __future__ import annotations

import json
from dataclasses import asdict, dataclass
from pathlib import Path
from typing import Optional, Sequence

import numpy as np

from .errors import DimensionMismatch, InputError, InvalidConfig
from .taxonomy import CLASS_LABELS
from .text import Encoded, Vocabulary

CHECKPOINT_FORMAT = "e2rstrat-model"
CHECKPOINT_VERSION = 1

STRATEGY_CLASSES = tuple(c.value for c in CLASS_LABELS)
COMPLEXITY_CLASSES = ("Simple", "Complex")

PARAM_NAMES = ("embedding", "W1", "b1", "W2", "b2")


@dataclass(frozen=True)
class ModelConfig:
    vocab_size: int
    embed_dim: int = 32
    hidden_dim: int = 32
    num_classes: int = 7
    max_len: int = 64
    seed: int = 0
    activation: str = "tanh"  # or "linear"

    def validate(self) -> None:
        for name in ("vocab_size", "embed_dim", "hidden_dim", "max_len"):
            if getattr(self, name) < 1:
                raise InvalidConfig(f"{name} must be >= 1, got {getattr(self, name)}")
        if self.num_classes < 2:
            raise InvalidConfig(f"num_classes must be >= 2, got {self.num_classes}")
        if self.activation not in ("tanh", "linear"):
            raise InvalidConfig(f"unknown activation {self.activation!r}")


@dataclass
class Prediction:
    probabilities: np.ndarray
    predicted: int
    label: Optional[str] = None
    logits: Optional[np.ndarray] = None

    def to_dict(self, class_names: Sequence[str]) -> dict:
        return {
            "predicted": self.label,
            "probabilities": {n: float(p) for n, p in zip(class_names, self.probabilities)},
        }


class Model:
    def __init__(self, config: ModelConfig, params: dict, class_names: Sequence[str] | None = None):
        config.validate()
        self.config = config
        self.params = params
        if class_names is None:
            class_names = (STRATEGY_CLASSES if config.num_classes == len(STRATEGY_CLASSES)
                           else tuple(str(i) for i in range(config.num_classes)))
        if len(class_names) != config.num_classes:
            raise InvalidConfig("class_names length differs from num_classes")
        self.class_names = tuple(class_names)
        self._check_shapes()

    def _check_shapes(self):
        c = self.config
        expected = {
            "embedding": (c.vocab_size, c.embed_dim),
            "W1": (c.hidden_dim, c.embed_dim),
            "b1": (c.hidden_dim,),
            "W2": (c.num_classes, c.hidden_dim),
            "b2": (c.num_classes,),
        }
        for name, shape in expected.items():
            if self.params[name].shape != shape:
                raise DimensionMismatch(f"{name}: expected {shape}, got {self.params[name].shape}")
            if not np.all(np.isfinite(self.params[name])):
                raise InvalidConfig(f"{name} contains non-finite values")

    def copy(self) -> "Model":
        return Model(self.config, {k: v.copy() for k, v in self.params.items()}, self.class_names)

    # flat parameter vector, fixed order
    def flat(self) -> np.ndarray:
        return np.concatenate([self.params[k].ravel() for k in PARAM_NAMES])

    def set_flat(self, vec: np.ndarray) -> None:
        pos = 0
        for k in PARAM_NAMES:
            n = self.params[k].size
            self.params[k] = vec[pos:pos + n].reshape(self.params[k].shape).copy()
            pos += n

    def lookup(self, ids) -> np.ndarray:
        return self.params["embedding"][np.asarray(ids)]

    # checkpoint I/O ----------------------------------------------------

    def to_dict(self, vocab: Vocabulary | None = None) -> dict:
        out = {
            "format": CHECKPOINT_FORMAT,
            "version": CHECKPOINT_VERSION,
            "config": asdict(self.config),
            "class_names": list(self.class_names),
            "params": {k: {"shape": list(self.params[k].shape),
                           "data": self.params[k].ravel().tolist()} for k in PARAM_NAMES},
        }
        if vocab is not None:
            out["vocab"] = vocab.to_dict()
        return out

    def save(self, path, vocab: Vocabulary | None = None) -> None:
        path = Path(path)
        path.parent.mkdir(parents=True, exist_ok=True)
        path.write_text(json.dumps(self.to_dict(vocab)), encoding="utf-8")

    @classmethod
    def from_dict(cls, data: dict) -> tuple["Model", Optional[Vocabulary]]:
        if data.get("format") != CHECKPOINT_FORMAT:
            raise InputError("not a model checkpoint")
        if data.get("version") != CHECKPOINT_VERSION:
            raise InputError(f"unsupported checkpoint version {data.get('version')!r}")
        config = ModelConfig(**data["config"])
        params = {k: np.asarray(v["data"], dtype=np.float64).reshape(v["shape"])
                  for k, v in data["params"].items()}
        vocab = Vocabulary(data["vocab"]) if "vocab" in data else None
        return cls(config, params, data["class_names"]), vocab

    @classmethod
    def load(cls, path) -> tuple["Model", Optional[Vocabulary]]:
        try:
            data = json.loads(Path(path).read_text(encoding="utf-8"))
        except json.JSONDecodeError as exc:
            raise InputError(f"{path}: invalid checkpoint JSON ({exc})") from exc
        return cls.from_dict(data)


def init_model(config: ModelConfig, class_names: Sequence[str] | None = None) -> Model:
    """Seeded initialization. The output head starts at zero, so an untrained
    model predicts the uniform distribution."""
    config.validate()
    rng = np.random.default_rng(config.seed)
    params = {
        "embedding": rng.standard_normal((config.vocab_size, config.embed_dim)),
        "W1": rng.standard_normal((config.hidden_dim, config.embed_dim)) / np.sqrt(config.embed_dim),
        "b1": np.zeros(config.hidden_dim),
        "W2": np.zeros((config.num_classes, config.hidden_dim)),
        "b2": np.zeros(config.num_classes),
    }
    return Model(config, params, class_names)


# -- core arithmetic (batched) ---------------------------------------------

def _activate(z, kind):
    if kind == "tanh":
        h = np.tanh(z)
        return h, 1.0 - h * h
    return z, np.ones_like(z)


def softmax(logits: np.ndarray) -> np.ndarray:
    shifted = logits - logits.max(axis=-1, keepdims=True)
    e = np.exp(shifted)
    return e / e.sum(axis=-1, keepdims=True)


def _forward_batch(model: Model, emb: np.ndarray, mask: np.ndarray):
    """emb: (B, L, d); mask: (B, L). Returns logits and the cache for backprop."""
    p = model.params
    counts = mask.sum(axis=1, keepdims=True)
    if np.any(counts == 0):
        raise DimensionMismatch("mask selects no positions")
    pooled = np.einsum("bl,bld->bd", mask, emb) / counts
    z = pooled @ p["W1"].T + p["b1"]
    h, dact = _activate(z, model.config.activation)
    logits = h @ p["W2"].T + p["b2"]
    return logits, (pooled, counts, h, dact)


def _mask_from_length(true_length: int, max_len: int) -> np.ndarray:
    m = np.zeros(max_len)
    m[:true_length] = 1.0
    return m


def _check_ids(model: Model, ids) -> np.ndarray:
    ids = np.asarray(ids)
    if ids.ndim != 1 or ids.shape[0] != model.config.max_len:
        raise DimensionMismatch(f"expected {model.config.max_len} ids, got shape {ids.shape}")
    if ids.min() < 0 or ids.max() >= model.config.vocab_size:
        raise DimensionMismatch(f"token id out of range [0, {model.config.vocab_size})")
    return ids


def _check_embeddings(model: Model, embeddings, mask) -> tuple[np.ndarray, np.ndarray]:
    c = model.config
    embeddings = np.asarray(embeddings, dtype=np.float64)
    if embeddings.shape != (c.max_len, c.embed_dim):
        raise DimensionMismatch(f"expected embeddings {(c.max_len, c.embed_dim)}, got {embeddings.shape}")
    mask = np.asarray(mask, dtype=np.float64)
    if mask.shape != (c.max_len,):
        raise DimensionMismatch(f"expected mask of length {c.max_len}, got {mask.shape}")
    return embeddings, mask


def _prediction(model: Model, logits: np.ndarray) -> Prediction:
    probs = softmax(logits)
    k = int(np.argmax(probs))  # first maximum -> lowest index on ties
    return Prediction(probs, k, model.class_names[k], logits)


def forward_from_embeddings(model: Model, embeddings, mask) -> Prediction:
    embeddings, mask = _check_embeddings(model, embeddings, mask)
    logits, _ = _forward_batch(model, embeddings[None], mask[None])
    return _prediction(model, logits[0])


def forward(model: Model, encoded: Encoded) -> Prediction:
    ids = _check_ids(model, encoded.ids)
    mask = _mask_from_length(encoded.true_length, len(ids))
    return forward_from_embeddings(model, model.lookup(ids), mask)


def logits_from_embeddings(model: Model, embeddings, mask) -> np.ndarray:
    """Batched logits; ``embeddings`` (B, L, d) or (L, d) with a matching mask."""
    embeddings = np.asarray(embeddings, dtype=np.float64)
    single = embeddings.ndim == 2
    if single:
        embeddings = embeddings[None]
    mask = np.broadcast_to(np.asarray(mask, dtype=np.float64), embeddings.shape[:2])
    logits, _ = _forward_batch(model, embeddings, mask)
    return logits[0] if single else logits


def grad_wrt_embeddings(model: Model, embeddings, target_class: int, mask=None) -> np.ndarray:
    """d logit[target_class] / d embeddings.

    Accepts (L, d) or a batch (B, L, d); the mask defaults to all positions.
    Masked-out positions get exactly zero gradient.
    """
    c = model.config
    if not 0 <= target_class < c.num_classes:
        raise DimensionMismatch(f"target_class {target_class} outside [0, {c.num_classes})")
    embeddings = np.asarray(embeddings, dtype=np.float64)
    single = embeddings.ndim == 2
    if single:
        embeddings = embeddings[None]
    if embeddings.shape[1:] != (c.max_len, c.embed_dim):
        raise DimensionMismatch(f"expected embeddings (*, {c.max_len}, {c.embed_dim}), got {embeddings.shape}")
    if mask is None:
        mask = np.ones(c.max_len)
    mask = np.broadcast_to(np.asarray(mask, dtype=np.float64), embeddings.shape[:2])
    _, (pooled, counts, h, dact) = _forward_batch(model, embeddings, mask)
    dz = model.params["W2"][target_class] * dact           # (B, H)
    dpooled = dz @ model.params["W1"]                       # (B, d)
    grad = (mask / counts)[:, :, None] * dpooled[:, None, :]
    return grad[0] if single else grad


# -- training loss --------------------------------------------------------

PROB_FLOOR = 1e-12


def loss_and_grads(model: Model, ids: np.ndarray, lengths: np.ndarray, targets: np.ndarray,
                   sample_weights: np.ndarray) -> tuple[float, dict]:
    """Weighted-mean cross-entropy over a batch and its parameter gradients.

    loss = sum_i w_i * -log p_i[y_i] / sum_i w_i
    """
    ids = np.asarray(ids)
    B, L = ids.shape
    mask = (np.arange(L)[None, :] < np.asarray(lengths)[:, None]).astype(np.float64)
    emb = model.params["embedding"][ids]
    logits, (pooled, counts, h, dact) = _forward_batch(model, emb, mask)
    probs = softmax(logits)
    w = np.asarray(sample_weights, dtype=np.float64)
    wsum = w.sum()
    rows = np.arange(B)
    nll = -np.log(np.maximum(probs[rows, targets], PROB_FLOOR))
    loss = float(np.dot(w, nll) / wsum)

    dlogits = probs.copy()
    dlogits[rows, targets] -= 1.0
    dlogits *= (w / wsum)[:, None]
    p = model.params
    grads = {"W2": dlogits.T @ h, "b2": dlogits.sum(axis=0)}
    dz = (dlogits @ p["W2"]) * dact
    grads["W1"] = dz.T @ pooled
    grads["b1"] = dz.sum(axis=0)
    dpooled = dz @ p["W1"]
    demb = (mask / counts)[:, :, None] * dpooled[:, None, :]
    gE = np.zeros_like(p["embedding"])
    np.add.at(gE, ids, demb)
    grads["embedding"] = gE
    return loss, grads


def predict_batch(model: Model, ids: np.ndarray, lengths: np.ndarray) -> np.ndarray:
    """Class probabilities for a batch of encoded rows."""
    ids = np.asarray(ids)
    mask = (np.arange(ids.shape[1])[None, :] < np.asarray(lengths)[:, None]).astype(np.float64)
    logits, _ = _forward_batch(model, model.params["embedding"][ids], mask)
    return softmax(logits)

"""Integrated Gradients over input embeddings, word-level scores and
contribution buckets."""

from __future__ import annotations

import enum
from dataclasses import dataclass, field
from typing import Optional

import numpy as np

from .errors import DimensionMismatch, InputError
from .model import Model, Prediction, forward, grad_wrt_embeddings, logits_from_embeddings
from .text import PAD, Encoded, Vocabulary, decode, encode

BASELINES = ("pad_embedding", "zero_embedding")
METHODS = ("riemann_trapezoid", "riemann_right", "riemann_left", "riemann_middle", "gausslegendre")


@dataclass(frozen=True)
class IGConfig:
    """``steps`` is the number of subintervals m of [0, 1] (Gauss-Legendre: nodes)."""

    steps: int = 64
    baseline: str = "pad_embedding"
    target: Optional[int] = None  # None: the predicted class
    method: str = "riemann_trapezoid"

    def validate(self):
        if self.steps < 1:
            raise InputError("steps must be >= 1")
        if self.baseline not in BASELINES:
            raise InputError(f"baseline must be one of {BASELINES}")
        if self.method not in METHODS:
            raise InputError(f"method must be one of {METHODS}")


def quadrature(method: str, steps: int) -> tuple[np.ndarray, np.ndarray]:
    """Nodes in [0, 1] and weights summing to 1 for the path integral."""
    m = steps
    if method == "riemann_right":
        return np.arange(1, m + 1) / m, np.full(m, 1.0 / m)
    if method == "riemann_left":
        return np.arange(0, m) / m, np.full(m, 1.0 / m)
    if method == "riemann_middle":
        return (np.arange(m) + 0.5) / m, np.full(m, 1.0 / m)
    if method == "riemann_trapezoid":
        w = np.full(m + 1, 1.0 / m)
        w[0] = w[-1] = 0.5 / m
        return np.arange(0, m + 1) / m, w
    if method == "gausslegendre":
        x, w = np.polynomial.legendre.leggauss(m)
        return (x + 1) / 2, w / 2
    raise InputError(f"unknown quadrature {method!r}")


class BucketLabel(enum.Enum):
    Neutral = "Neutral"
    SlightlyEasy = "Slightly Easy"
    Easy = "Easy"
    SlightlyComplex = "Slightly Complex"
    ModeratelyComplex = "Moderately Complex"
    HighlyComplex = "Highly Complex"


DEFAULT_THRESHOLDS = (0.10, 0.16, 0.20)


def bucket_label(score: float, thresholds=DEFAULT_THRESHOLDS) -> BucketLabel:
    """Map an attribution score to a contribution bucket.

    Positive side: [t1, t2) slightly, [t2, t3) moderately, >= t3 highly complex.
    Negative side mirrors the first two cut-offs: (-t2, -t1] slightly easy,
    <= -t2 easy. Anything with |s| < t1 is neutral.
    """
    t1, t2, t3 = thresholds
    if score >= t3:
        return BucketLabel.HighlyComplex
    if score >= t2:
        return BucketLabel.ModeratelyComplex
    if score >= t1:
        return BucketLabel.SlightlyComplex
    if score <= -t2:
        return BucketLabel.Easy
    if score <= -t1:
        return BucketLabel.SlightlyEasy
    return BucketLabel.Neutral


def baseline_embeddings(model: Model, encoded: Encoded, kind: str = "pad_embedding") -> np.ndarray:
    shape = (len(encoded.ids), model.config.embed_dim)
    if kind == "zero_embedding":
        return np.zeros(shape)
    if kind == "pad_embedding":
        return np.broadcast_to(model.params["embedding"][PAD], shape).copy()
    raise InputError(f"unknown baseline {kind!r}")


def path_integral(model: Model, x: np.ndarray, baseline: np.ndarray, mask: np.ndarray,
                  target: int, steps: int, method: str = "riemann_trapezoid") -> np.ndarray:
    """IG_i = (x_i - x'_i) * sum_k w_k dF/dx_i(x' + a_k (x - x')).

    With ``riemann_right`` this is the classic (1/m) sum_{k=1..m} form.
    """
    diff = x - baseline
    alphas, weights = quadrature(method, steps)
    total = np.zeros_like(x)
    chunk = 128  # bounds memory for long paths; summation order stays fixed
    for start in range(0, len(alphas), chunk):
        a = alphas[start:start + chunk, None, None]
        w = weights[start:start + chunk, None, None]
        path = baseline[None] + a * diff[None]
        total += (w * grad_wrt_embeddings(model, path, target, mask)).sum(axis=0)
    return diff * total


def integrated_gradients(model: Model, encoded: Encoded, config: IGConfig = IGConfig()) -> np.ndarray:
    """Per-coordinate attributions, shape (max_len, embed_dim), for the target logit."""
    config.validate()
    if len(encoded.ids) != model.config.max_len:
        raise DimensionMismatch(f"expected {model.config.max_len} ids, got {len(encoded.ids)}")
    pred = forward(model, encoded)  # also validates ids
    target = pred.predicted if config.target is None else config.target
    x = model.lookup(encoded.ids)
    base = baseline_embeddings(model, encoded, config.baseline)
    return path_integral(model, x, base, encoded.mask, target, config.steps, config.method)


@dataclass
class AttributionResult:
    tokens: list
    scores: list
    prediction: Optional[Prediction] = None
    completeness_gap: float = 0.0
    sentence: str = ""
    target: Optional[int] = None
    class_names: tuple = field(default=(), repr=False)

    def buckets(self, thresholds=DEFAULT_THRESHOLDS) -> list:
        return [bucket_label(s, thresholds) for s in self.scores]

    def to_dict(self, thresholds=DEFAULT_THRESHOLDS) -> dict:
        out = {"sentence": self.sentence}
        if self.prediction is not None:
            out["prediction"] = self.prediction.to_dict(self.class_names)
        if self.target is not None and self.class_names:
            out["target"] = self.class_names[self.target]
        out["words"] = [{"word": w, "attribution": float(s), "bucket": b.value}
                        for w, s, b in zip(self.tokens, self.scores, self.buckets(thresholds))]
        out["completeness_gap"] = float(self.completeness_gap)
        return out

    @classmethod
    def from_dict(cls, data: dict) -> "AttributionResult":
        words = data.get("words", [])
        return cls([w["word"] for w in words], [float(w["attribution"]) for w in words],
                   completeness_gap=float(data.get("completeness_gap", 0.0)),
                   sentence=data.get("sentence", ""))

    def to_text(self, digits: int = 2, thresholds=DEFAULT_THRESHOLDS) -> str:
        width = max([len(t) for t in self.tokens] + [4])
        lines = [f"{'Word':<{width}}  {'Attribution':>11}  Contribution"]
        for w, s, b in zip(self.tokens, self.scores, self.buckets(thresholds)):
            lines.append(f"{w:<{width}}  {s:>11.{digits}f}  {b.value}")
        return "\n".join(lines) + "\n"


def token_attributions(matrix: np.ndarray, encoded: Encoded, vocab: Optional[Vocabulary] = None,
                       output_delta: float = 0.0, prediction: Optional[Prediction] = None) -> AttributionResult:
    """Sum each word's embedding-coordinate attributions (sign kept).

    CLS and PAD positions are dropped from the word list but still count
    towards the completeness gap |sum(matrix) - output_delta|.
    """
    matrix = np.asarray(matrix, dtype=np.float64)
    if matrix.ndim != 2 or matrix.shape[0] != len(encoded.ids):
        raise DimensionMismatch(f"attribution matrix rows {matrix.shape} vs {len(encoded.ids)} ids")
    scores = matrix[1:encoded.true_length].sum(axis=1)
    if encoded.tokens:
        tokens = list(encoded.tokens)
    elif vocab is not None:
        tokens = decode(encoded, vocab)
    else:
        tokens = [str(i) for i in encoded.ids[1:encoded.true_length]]
    gap = abs(float(matrix.sum()) - float(output_delta))
    return AttributionResult(tokens, [float(s) for s in scores], prediction, gap)


def explain(model: Model, text: str | Encoded, vocab: Vocabulary,
            config: IGConfig = IGConfig()) -> AttributionResult:
    """Encode (if needed), run IG and collect word scores plus diagnostics."""
    config.validate()
    encoded = encode(text, vocab, model.config.max_len) if isinstance(text, str) else text
    pred = forward(model, encoded)
    target = pred.predicted if config.target is None else config.target
    if not 0 <= target < model.config.num_classes:
        raise DimensionMismatch(f"target {target} outside [0, {model.config.num_classes})")
    x = model.lookup(encoded.ids)
    base = baseline_embeddings(model, encoded, config.baseline)
    mask = encoded.mask
    matrix = path_integral(model, x, base, mask, target, config.steps, config.method)
    f_x = logits_from_embeddings(model, x, mask)[target]
    f_base = logits_from_embeddings(model, base, mask)[target]
    result = token_attributions(matrix, encoded, vocab, f_x - f_base, pred)
    result.sentence = text if isinstance(text, str) else " ".join(result.tokens)
    result.target = target
    result.class_names = model.class_names
    return result

"""Deterministic synthetic parallel corpus for smoke runs and demos.

Each strategy class gets its own cue vocabulary; sentences mix cue words
with shared filler so the classes are learnable but not trivial copies.
"""

from __future__ import annotations

from importlib import resources

import numpy as np

from .corpus import Corpus, SentencePair, Source, parse_corpus
from .taxonomy import CLASS_LABELS, ClassLabel

CUES = {
    ClassLabel.Explanation: ["co-design", "means", "explained", "definition", "stands", "clarify"],
    ClassLabel.GrammaticalAdjustments: ["was", "been", "having", "whom", "whereby", "shall"],
    ClassLabel.Modulation: ["supported", "whereas", "meanwhile", "collaboration", "sharing", "thereafter"],
    ClassLabel.Omission: ["sir", "kcb", "rhetorical", "indeed", "course", "notwithstanding"],
    ClassLabel.Substitution: ["conversation", "utilise", "commence", "reside", "acquire", "endeavour"],
    ClassLabel.Transposition: ["aim", "intention", "provision", "delivery", "implementation", "assessment"],
    ClassLabel.SyntacticChanges: ["citizens", "which", "whose", "clause", "therein", "hereby"],
}

FILLER = ["the", "government", "people", "services", "care", "will", "and", "to", "in",
          "scotland", "their", "for", "support", "community", "we", "our", "with", "local"]

EASY = ["we", "will", "help", "people", "in", "scotland", "get", "good", "care", "you", "can"]

_SOURCES = list(Source)


def _sentence(rng, cues, n_cue, n_fill):
    words = list(rng.choice(cues, size=n_cue, replace=False)) + list(rng.choice(FILLER, size=n_fill))
    rng.shuffle(words)
    text = " ".join(words)
    return text[0].upper() + text[1:] + "."


def make_synthetic_corpus(counts: dict | None = None, seed: int = 0, name: str = "synthetic") -> Corpus:
    """Build a labeled corpus; ``counts`` maps ClassLabel -> number of pairs."""
    if counts is None:
        counts = {c: 6 if i < 5 else 5 for i, c in enumerate(CLASS_LABELS)}  # 40 pairs
    rng = np.random.default_rng(seed)
    pairs = []
    for label in CLASS_LABELS:
        for j in range(counts.get(label, 0)):
            complex_text = _sentence(rng, CUES[label], 3, int(rng.integers(5, 10)))
            n_simple = int(rng.integers(1, 3))
            simple = tuple(_sentence(rng, EASY, 3, int(rng.integers(2, 5)))
                           for _ in range(n_simple))
            pid = f"{label.value[:4].lower()}-{j:02d}"
            pairs.append(SentencePair(pid, complex_text, simple, label,
                                      _SOURCES[int(rng.integers(len(_SOURCES)))]))
    order = rng.permutation(len(pairs))
    return Corpus(tuple(pairs[i] for i in order), name)


def bundled_corpus() -> Corpus:
    """The 40-instance synthetic corpus shipped with the package."""
    text = resources.files("e2rstrat.data").joinpath("synthetic_corpus.jsonl").read_text("utf-8")
    return parse_corpus(text.splitlines(), name="synthetic_corpus")


def bundled_corpus_path():
    return resources.files("e2rstrat.data").joinpath("synthetic_corpus.jsonl")

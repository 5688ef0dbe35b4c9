"""Agreement between model-attributed complex words and the words human
editors dropped from the Easy-to-Read versions."""

from __future__ import annotations

import csv
import io
from collections import Counter
from dataclasses import dataclass, field
from typing import Mapping

from .attribution import AttributionResult
from .corpus import Corpus, normalize_words, word_tokenize
from .errors import EmptyInput

DEFAULT_THRESHOLD = 0.10


def _norm(word: str) -> str:
    toks = word_tokenize(word)
    return " ".join(toks).casefold()


def extract_complex_words(attr: AttributionResult, threshold: float = DEFAULT_THRESHOLD) -> set:
    if threshold <= 0:
        raise ValueError("threshold must be positive")
    out = set()
    for w, s in zip(attr.tokens, attr.scores):
        if s >= threshold:
            w = _norm(w)
            if w:
                out.add(w)
    return out


def removed_words(complex_sentence: str, simple_sentences) -> set:
    """Normalized words of the complex sentence missing from every simple version."""
    kept = set()
    for s in simple_sentences:
        kept.update(normalize_words(s))
    return set(normalize_words(complex_sentence)) - kept


@dataclass
class AlignmentReport:
    total_complex_words: int
    removed_complex_words: int
    top_removed: list = field(default_factory=list)  # [(word, frequency)]
    pairs_used: int = 0

    @property
    def zero_total(self) -> bool:
        return self.total_complex_words == 0

    @property
    def overlap_ratio(self) -> float:
        if self.zero_total:
            return 0.0
        return self.removed_complex_words / self.total_complex_words

    @property
    def percent(self) -> str:
        return format_percent(self.removed_complex_words, self.total_complex_words)

    def to_dict(self) -> dict:
        return {
            "totals": {"complex_words": self.total_complex_words,
                       "removed_complex_words": self.removed_complex_words,
                       "pairs": self.pairs_used},
            "ratio": self.overlap_ratio,
            "ratio_percent": self.percent,
            "zero_total": self.zero_total,
            "top_removed": [{"word": w, "frequency": n} for w, n in self.top_removed],
        }

    def top_csv(self) -> str:
        buf = io.StringIO()
        wr = csv.writer(buf, lineterminator="\n")
        wr.writerow(["word", "frequency"])
        wr.writerows(self.top_removed)
        return buf.getvalue()


def format_percent(removed: int, total: int, digits: int = 2) -> str:
    if total == 0:
        return f"{0:.{digits}f}%"
    return f"{100.0 * removed / total:.{digits}f}%"


def alignment_report(corpus: Corpus, attributions: Mapping[str, AttributionResult],
                     threshold: float = DEFAULT_THRESHOLD, top_n: int = 20) -> AlignmentReport:
    """Aggregate complex / removed counts over pairs that have a simple side.

    Words are de-duplicated within a sentence and counted once per sentence.
    """
    total = removed = used = 0
    freq: Counter = Counter()
    for pair in corpus.pairs:
        if not pair.simple_texts:
            continue
        if pair.id not in attributions:
            raise KeyError(f"no attribution for pair {pair.id!r}")
        used += 1
        complex_words = extract_complex_words(attributions[pair.id], threshold)
        hit = complex_words & removed_words(pair.complex_text, pair.simple_texts)
        total += len(complex_words)
        removed += len(hit)
        freq.update(hit)
    if used == 0:
        raise EmptyInput("no pair has a simplified counterpart")
    top = sorted(freq.items(), key=lambda kv: (-kv[1], kv[0]))[:top_n]
    return AlignmentReport(total, removed, top, used)

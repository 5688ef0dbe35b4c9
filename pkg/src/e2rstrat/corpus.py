"""Parallel complex / Easy-to-Read corpus: loading, tokenization, statistics."""

from __future__ import annotations

import csv
import enum
import io
import json
from dataclasses import dataclass, field
from pathlib import Path
from typing import Iterable, Optional

import numpy as np

from .errors import DuplicateId, ParseError, UnknownCode
from .taxonomy import DEFAULT_TABLE, ClassLabel, TaxonomyTable, resolve_label


class Source(enum.Enum):
    Health = "Health"
    PublicInfo = "PublicInfo"
    Politics = "Politics"
    Other = "Other"


@dataclass(frozen=True)
class SentencePair:
    id: str
    complex_text: str
    simple_texts: tuple[str, ...] = ()
    label: Optional[ClassLabel] = None
    source: Source = Source.Other

    def __post_init__(self):
        if not self.complex_text:
            raise ValueError(f"pair {self.id!r}: complex_text is empty")
        object.__setattr__(self, "simple_texts", tuple(self.simple_texts))

    def to_record(self) -> dict:
        return {
            "id": self.id,
            "source": self.source.value,
            "complex": self.complex_text,
            "simple": list(self.simple_texts),
            "label": None if self.label is None else self.label.value,
        }


@dataclass(frozen=True)
class Corpus:
    pairs: tuple[SentencePair, ...]
    name: str = "corpus"

    def __post_init__(self):
        object.__setattr__(self, "pairs", tuple(self.pairs))
        seen = set()
        for p in self.pairs:
            if p.id in seen:
                raise DuplicateId(f"duplicate pair id {p.id!r}")
            seen.add(p.id)

    def __len__(self):
        return len(self.pairs)

    def __iter__(self):
        return iter(self.pairs)

    def labeled(self) -> "Corpus":
        return Corpus(tuple(p for p in self.pairs if p.label is not None), self.name)

    @property
    def labels(self) -> list[ClassLabel]:
        return [p.label for p in self.pairs]

    def texts(self) -> list[str]:
        """Every sentence in the corpus, complex sides first per pair."""
        out = []
        for p in self.pairs:
            out.append(p.complex_text)
            out.extend(p.simple_texts)
        return out

    def dumps(self) -> str:
        return "".join(json.dumps(p.to_record(), ensure_ascii=False) + "\n" for p in self.pairs)

    def save(self, path) -> None:
        Path(path).write_text(self.dumps(), encoding="utf-8")


# -- tokenization ---------------------------------------------------------

# Anything that is not alphanumeric counts as punctuation at token edges.
def _strip_edges(tok: str) -> str:
    start, end = 0, len(tok)
    while start < end and not tok[start].isalnum():
        start += 1
    while end > start and not tok[end - 1].isalnum():
        end -= 1
    return tok[start:end]


def word_tokenize(text: str) -> list[str]:
    """Whitespace split, edge punctuation stripped, internal ``-``/``'`` kept."""
    out = []
    for raw in text.split():
        tok = _strip_edges(raw)
        if tok:
            out.append(tok)
    return out


def normalize_words(text: str) -> list[str]:
    return [t.casefold() for t in word_tokenize(text)]


# -- loading --------------------------------------------------------------

def _parse_record(obj, lineno: int, table: TaxonomyTable) -> SentencePair:
    if not isinstance(obj, dict):
        raise ParseError("record is not a JSON object", line=lineno)
    for name in ("id", "complex"):
        if name not in obj:
            raise ParseError(f"missing required field {name!r}", line=lineno, field=name)
    pid, complex_text = obj["id"], obj["complex"]
    if not isinstance(pid, str) or not pid:
        raise ParseError("field 'id' must be a non-empty string", line=lineno, field="id")
    if not isinstance(complex_text, str) or not complex_text.strip():
        raise ParseError("field 'complex' must be a non-empty string", line=lineno, field="complex")
    simple = obj.get("simple", [])
    if isinstance(simple, str):
        simple = [simple]
    if not isinstance(simple, list) or not all(isinstance(s, str) for s in simple):
        raise ParseError("field 'simple' must be a list of strings", line=lineno, field="simple")
    try:
        source = Source(obj.get("source") or "Other")
    except ValueError:
        raise ParseError(f"unknown source {obj.get('source')!r}", line=lineno, field="source") from None
    label = obj.get("label")
    if label is not None:
        if not isinstance(label, str):
            raise ParseError("field 'label' must be a string or null", line=lineno, field="label")
        try:
            label = resolve_label(label, table)
        except UnknownCode as exc:
            raise UnknownCode(f"line {lineno}: {exc}") from None
    return SentencePair(pid, complex_text, tuple(simple), label, source)


def parse_corpus(lines: Iterable[str], table: TaxonomyTable = DEFAULT_TABLE,
                 name: str = "corpus") -> Corpus:
    pairs = []
    seen = {}
    for lineno, line in enumerate(lines, start=1):
        if not line.strip():
            continue
        try:
            obj = json.loads(line)
        except json.JSONDecodeError as exc:
            raise ParseError(f"invalid JSON ({exc.msg})", line=lineno) from None
        pair = _parse_record(obj, lineno, table)
        if pair.id in seen:
            raise DuplicateId(f"line {lineno}: id {pair.id!r} already used on line {seen[pair.id]}")
        seen[pair.id] = lineno
        pairs.append(pair)
    return Corpus(tuple(pairs), name)


def load_corpus(path, table: TaxonomyTable = DEFAULT_TABLE) -> Corpus:
    """Read a JSONL corpus file; labels may be fine codes or class names."""
    path = Path(path)
    with path.open(encoding="utf-8") as fh:
        return parse_corpus(fh, table, name=path.stem)


# -- statistics -----------------------------------------------------------

@dataclass(frozen=True)
class SideStats:
    num_texts: int
    words: int
    sentences: int
    sentence_length_iqr: Optional[tuple[float, float]]


@dataclass(frozen=True)
class CorpusStats:
    rows: dict = field(default_factory=dict)  # group name -> {"complex": SideStats, "simple": SideStats}

    def to_dict(self) -> dict:
        out = {}
        for group, sides in self.rows.items():
            out[group] = {}
            for side, s in sides.items():
                out[group][side] = {
                    "num_texts": s.num_texts,
                    "words": s.words,
                    "sentences": s.sentences,
                    "sentence_length_iqr": None if s.sentence_length_iqr is None
                    else list(s.sentence_length_iqr),
                }
        return out

    def to_csv(self) -> str:
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(["source", "side", "num_texts", "words", "sentences", "iqr_q1", "iqr_q3"])
        for group, sides in self.rows.items():
            for side, s in sides.items():
                q1, q3 = s.sentence_length_iqr or ("", "")
                w.writerow([group, side, s.num_texts, s.words, s.sentences, q1, q3])
        return buf.getvalue()


def quartiles(lengths) -> Optional[tuple[float, float]]:
    """(Q1, Q3) by linear interpolation at zero-indexed rank (n-1)p."""
    if len(lengths) == 0:
        return None
    q1, q3 = np.percentile(np.asarray(lengths, dtype=float), [25, 75], method="linear")
    return float(q1), float(q3)


def _side_stats(num_texts: int, sentences: list[str]) -> SideStats:
    lengths = [len(word_tokenize(s)) for s in sentences]
    return SideStats(num_texts, int(sum(lengths)), len(sentences), quartiles(lengths))


def corpus_stats(corpus: Corpus) -> CorpusStats:
    """Per-source word/sentence counts and sentence-length IQR, plus a Total row.

    ``num_texts`` counts records (pairs) that contribute sentences to a side.
    """
    groups = {s.value: [] for s in Source}
    for p in corpus.pairs:
        groups[p.source.value].append(p)
    groups["Total"] = list(corpus.pairs)
    rows = {}
    for name, pairs in groups.items():
        if name != "Total" and not pairs:
            continue
        simple_sents = [s for p in pairs for s in p.simple_texts]
        rows[name] = {
            "complex": _side_stats(len(pairs), [p.complex_text for p in pairs]),
            "simple": _side_stats(sum(1 for p in pairs if p.simple_texts), simple_sents),
        }
    return CorpusStats(rows)

"""Word-level vocabulary and fixed-length encoding."""

from __future__ import annotations

import json
from collections import Counter
from dataclasses import dataclass
from pathlib import Path
from typing import Iterable, Union

import numpy as np

from .corpus import Corpus, word_tokenize
from .errors import EmptyCorpus, InputError

PAD, UNK, CLS = 0, 1, 2
SPECIALS = ("[PAD]", "[UNK]", "[CLS]")

DEFAULT_MAX_LEN = 64
LONG_MAX_LEN = 512


class Vocabulary:
    """Dense token -> id map with PAD=0, UNK=1, CLS=2 reserved."""

    def __init__(self, token_to_id: dict):
        ids = sorted(token_to_id.values())
        if ids != list(range(len(ids))):
            raise InputError("vocabulary ids must be dense from 0")
        for i, name in enumerate(SPECIALS):
            if token_to_id.get(name) != i:
                raise InputError(f"special token {name} must have id {i}")
        self.token_to_id = dict(token_to_id)
        self.id_to_token = [None] * len(ids)
        for tok, i in self.token_to_id.items():
            self.id_to_token[i] = tok

    @property
    def size(self) -> int:
        return len(self.id_to_token)

    def __len__(self):
        return self.size

    def __contains__(self, token):
        return token in self.token_to_id

    def __eq__(self, other):
        return isinstance(other, Vocabulary) and self.token_to_id == other.token_to_id

    def __getitem__(self, token) -> int:
        return self.token_to_id.get(token, UNK)

    def to_dict(self) -> dict:
        return {tok: i for i, tok in enumerate(self.id_to_token)}

    def save(self, path) -> None:
        Path(path).write_text(json.dumps(self.to_dict(), ensure_ascii=False, indent=1) + "\n",
                              encoding="utf-8")

    @classmethod
    def load(cls, path) -> "Vocabulary":
        return cls(json.loads(Path(path).read_text(encoding="utf-8")))


def build_vocab(source: Union[Corpus, Iterable[str]], min_freq: int = 1) -> Vocabulary:
    """Lowercased words with count >= min_freq, ordered by (count desc, token asc)."""
    if min_freq < 1:
        raise InputError("min_freq must be >= 1")
    texts = source.texts() if isinstance(source, Corpus) else source
    counts = Counter(t.lower() for text in texts for t in word_tokenize(text))
    kept = sorted((tok for tok, n in counts.items() if n >= min_freq and tok not in SPECIALS),
                  key=lambda tok: (-counts[tok], tok))
    if not kept:
        raise EmptyCorpus("no tokens reach the frequency cutoff")
    mapping = {name: i for i, name in enumerate(SPECIALS)}
    for tok in kept:
        mapping[tok] = len(mapping)
    return Vocabulary(mapping)


@dataclass(frozen=True)
class Encoded:
    """``ids`` has length max_len; ``tokens`` holds the surface words behind ids[1:true_length]."""

    ids: tuple[int, ...]
    true_length: int
    tokens: tuple[str, ...] = ()

    @property
    def max_len(self) -> int:
        return len(self.ids)

    @property
    def mask(self):
        m = np.zeros(len(self.ids))
        m[: self.true_length] = 1.0
        return m


def encode(text: str, vocab: Vocabulary, max_len: int = DEFAULT_MAX_LEN) -> Encoded:
    if max_len < 2:
        raise InputError("max_len must be >= 2")
    words = word_tokenize(text)[: max_len - 1]
    ids = [CLS] + [vocab[w.lower()] for w in words]
    true_length = len(ids)
    ids += [PAD] * (max_len - true_length)
    return Encoded(tuple(ids), true_length, tuple(words))


def decode(encoded: Encoded, vocab: Vocabulary) -> list[str]:
    return [vocab.id_to_token[i] for i in encoded.ids[1:encoded.true_length]]

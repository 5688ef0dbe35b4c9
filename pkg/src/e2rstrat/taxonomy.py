"""Simplification-strategy taxonomy: macro-strategies, annotation codes and
the mapping from fine-grained codes onto the seven classifier labels."""

from __future__ import annotations

import enum
import json
from dataclasses import dataclass, field
from pathlib import Path
from types import MappingProxyType
from typing import Mapping

from .errors import InputError, UnknownCode


class MacroStrategy(enum.Enum):
    Transcription = "Transcription"
    Synonymy = "Synonymy"
    Explanation = "Explanation"
    SyntacticChange = "SyntacticChange"
    Transposition = "Transposition"
    Modulation = "Modulation"
    Anaphora = "Anaphora"
    Omission = "Omission"
    IllocutionaryChange = "IllocutionaryChange"
    Compression = "Compression"


class ClassLabel(enum.Enum):
    Explanation = "Explanation"
    GrammaticalAdjustments = "GrammaticalAdjustments"
    Modulation = "Modulation"
    Omission = "Omission"
    Substitution = "Substitution"
    Transposition = "Transposition"
    SyntacticChanges = "SyntacticChanges"

    @property
    def index(self) -> int:
        return _CLASS_INDEX[self]

    @classmethod
    def from_index(cls, i: int) -> "ClassLabel":
        return CLASS_LABELS[i]


CLASS_LABELS: tuple[ClassLabel, ...] = tuple(ClassLabel)
_CLASS_INDEX = {c: i for i, c in enumerate(CLASS_LABELS)}

# Only the two poles and the midpoint are fixed; the rest are metadata.
DEFAULT_POSITIONS: Mapping[MacroStrategy, int] = MappingProxyType({
    MacroStrategy.Omission: -4,
    MacroStrategy.Compression: -3,
    MacroStrategy.IllocutionaryChange: -2,
    MacroStrategy.Anaphora: -1,
    MacroStrategy.Transcription: 0,
    MacroStrategy.SyntacticChange: 1,
    MacroStrategy.Transposition: 2,
    MacroStrategy.Synonymy: 2,
    MacroStrategy.Modulation: 3,
    MacroStrategy.Explanation: 4,
})


@dataclass(frozen=True)
class StrategyCode:
    code: str
    macro: MacroStrategy
    description: str = ""


# (code, macro, description, default class)
_DEFAULT_ROWS = [
    ("OmiSen", MacroStrategy.Omission, "sentence omitted", ClassLabel.Omission),
    ("OmiWor", MacroStrategy.Omission, "word omitted", ClassLabel.Omission),
    ("OmiClau", MacroStrategy.Omission, "clause omitted", ClassLabel.Omission),
    ("OmiRhet", MacroStrategy.Omission, "rhetorical construct omitted", ClassLabel.Omission),
    ("SinGram", MacroStrategy.Compression, "grammatical construct compressed", ClassLabel.Omission),
    ("SimGram", MacroStrategy.Compression, "grammar simplified", ClassLabel.Omission),
    ("SinSem", MacroStrategy.Compression, "semantic construct compressed", ClassLabel.Omission),
    ("SinPrag", MacroStrategy.Compression, "pragmatic construct compressed", ClassLabel.Omission),
    ("ExplWor", MacroStrategy.Explanation, "word explained", ClassLabel.Explanation),
    ("ExplCont", MacroStrategy.Explanation, "content explained", ClassLabel.Explanation),
    ("ExplExpr", MacroStrategy.Explanation, "expression explained", ClassLabel.Explanation),
    ("HidCont", MacroStrategy.Explanation, "hidden content made explicit", ClassLabel.Explanation),
    ("HidGram", MacroStrategy.Explanation, "hidden grammar made explicit", ClassLabel.Explanation),
    ("WordExpl", MacroStrategy.Explanation, "word given an explanation", ClassLabel.Explanation),
    ("SynChange", MacroStrategy.SyntacticChange, "syntactic level changed", ClassLabel.SyntacticChanges),
    ("Clause2Word", MacroStrategy.SyntacticChange, "clause turned into a word", ClassLabel.SyntacticChanges),
    ("WordsOrder", MacroStrategy.SyntacticChange, "word order changed", ClassLabel.SyntacticChanges),
    ("GroupOrder", MacroStrategy.SyntacticChange, "group order changed", ClassLabel.SyntacticChanges),
    ("LinearOrderSen", MacroStrategy.SyntacticChange, "linear sentence order", ClassLabel.SyntacticChanges),
    ("LinearOrderCla", MacroStrategy.SyntacticChange, "linear clause order", ClassLabel.SyntacticChanges),
    ("Anaph", MacroStrategy.Anaphora, "repetition replaces synonyms", ClassLabel.Substitution),
    ("SynSem", MacroStrategy.Synonymy, "semantic synonym", ClassLabel.Substitution),
    ("SemStereo", MacroStrategy.Synonymy, "stereotype substitution", ClassLabel.Substitution),
    ("TranspNoun", MacroStrategy.Transposition, "word class changed to noun", ClassLabel.Transposition),
    ("ModInfo", MacroStrategy.Modulation, "information redistributed", ClassLabel.Modulation),
]


@dataclass(frozen=True)
class TaxonomyTable:
    """Immutable code table plus code -> class mapping.

    ``positions`` overrides the continuum position of macro-strategies.
    """

    codes: tuple[StrategyCode, ...]
    code_to_class: Mapping[str, ClassLabel]
    positions: Mapping[MacroStrategy, int] = field(default=DEFAULT_POSITIONS)

    def __post_init__(self):
        seen = set()
        for c in self.codes:
            if c.code in seen:
                raise InputError(f"duplicate strategy code {c.code!r}")
            seen.add(c.code)
        missing = seen - set(self.code_to_class)
        if missing:
            raise InputError(f"codes without a class mapping: {sorted(missing)}")
        extra = set(self.code_to_class) - seen
        if extra:
            raise UnknownCode(f"mapping references unknown codes: {sorted(extra)}")
        for macro, pos in self.positions.items():
            if not -4 <= pos <= 4:
                raise InputError(f"continuum position of {macro.value} out of [-4, 4]: {pos}")
        object.__setattr__(self, "code_to_class", MappingProxyType(dict(self.code_to_class)))
        object.__setattr__(self, "positions",
                           MappingProxyType({**DEFAULT_POSITIONS, **self.positions}))
        object.__setattr__(self, "_by_code", {c.code: c for c in self.codes})

    def __contains__(self, code) -> bool:
        return code in self._by_code

    def get(self, code: str) -> StrategyCode:
        try:
            return self._by_code[code]
        except KeyError:
            raise UnknownCode(f"unknown strategy code {code!r}") from None

    # serialization -----------------------------------------------------

    def to_dict(self) -> dict:
        return {
            "codes": [{"code": c.code, "macro": c.macro.value, "description": c.description}
                      for c in self.codes],
            "code_to_class": [[c.code, self.code_to_class[c.code].value] for c in self.codes],
            "positions": {m.value: self.positions[m] for m in MacroStrategy},
        }

    @classmethod
    def from_dict(cls, data: dict) -> "TaxonomyTable":
        try:
            codes = tuple(
                StrategyCode(d["code"], MacroStrategy(d["macro"]), d.get("description", ""))
                for d in data["codes"]
            )
            mapping = {code: ClassLabel(label) for code, label in data["code_to_class"]}
            positions = {MacroStrategy(k): int(v) for k, v in data.get("positions", {}).items()}
        except (KeyError, TypeError, ValueError) as exc:
            raise InputError(f"malformed taxonomy document: {exc}") from exc
        return cls(codes, mapping, positions)

    def dumps(self) -> str:
        return json.dumps(self.to_dict(), indent=2, ensure_ascii=False) + "\n"

    def save(self, path) -> None:
        Path(path).write_text(self.dumps(), encoding="utf-8")

    @classmethod
    def load(cls, path) -> "TaxonomyTable":
        try:
            data = json.loads(Path(path).read_text(encoding="utf-8"))
        except json.JSONDecodeError as exc:
            raise InputError(f"{path}: invalid JSON ({exc})") from exc
        return cls.from_dict(data)


def default_table() -> TaxonomyTable:
    codes = tuple(StrategyCode(code, macro, desc) for code, macro, desc, _ in _DEFAULT_ROWS)
    mapping = {code: label for code, _, _, label in _DEFAULT_ROWS}
    return TaxonomyTable(codes, mapping)


DEFAULT_TABLE = default_table()


def parse_strategy_code(code: str, table: TaxonomyTable = DEFAULT_TABLE) -> StrategyCode:
    """Look up an annotation code (case-sensitive)."""
    return table.get(code)


def class_label_of(code: StrategyCode | str, table: TaxonomyTable = DEFAULT_TABLE) -> ClassLabel:
    key = code.code if isinstance(code, StrategyCode) else code
    try:
        return table.code_to_class[key]
    except KeyError:
        raise UnknownCode(f"no class mapping for code {key!r}") from None


def continuum_position(macro: MacroStrategy, table: TaxonomyTable | None = None) -> int:
    """Position on the deduction (-4) .. addition (+4) continuum."""
    positions = DEFAULT_POSITIONS if table is None else table.positions
    return positions[macro]


def resolve_label(label: str, table: TaxonomyTable = DEFAULT_TABLE) -> ClassLabel:
    """Accept either a fine annotation code or a ClassLabel name."""
    if label in table:
        return class_label_of(label, table)
    try:
        return ClassLabel(label)
    except ValueError:
        raise UnknownCode(f"label {label!r} is neither a strategy code nor a class name") from None

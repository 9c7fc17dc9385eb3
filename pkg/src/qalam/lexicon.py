"""Dictionary, stoplist and column-file corpus ingestion."""
from __future__ import annotations

import logging
from dataclasses import dataclass
from pathlib import Path
from typing import Iterable, Sequence

from .textnorm import Token, TokenKind, classify

log = logging.getLogger(__name__)

GENDERS = ("masc", "fem", "none")
NUMBERS = ("sg", "du", "pl", "none")


class LexiconError(Exception):
    pass


class CorpusFormatError(ValueError):
    pass


@dataclass(frozen=True)
class WordFeatures:
    pos: str
    lemma: str
    gender: str = "none"
    number: str = "none"
    pregloss: str = ""

    def __post_init__(self):
        if not self.pos:
            raise ValueError("empty POS")
        if self.gender not in GENDERS:
            raise ValueError(f"bad gender {self.gender!r}")
        if self.number not in NUMBERS:
            raise ValueError(f"bad number {self.number!r}")

    def to_fields(self) -> list[str]:
        return [self.pos, self.lemma, self.gender, self.number, self.pregloss]


@dataclass(frozen=True)
class WordRecord:
    token: Token
    features: WordFeatures | None = None

    @property
    def has_analysis(self) -> bool:
        return self.features is not None

    @property
    def surface(self) -> str:
        return self.token.surface

    @property
    def kind(self) -> TokenKind:
        return self.token.kind

    @property
    def pos(self) -> str | None:
        return self.features.pos if self.features else None

    @property
    def lemma(self) -> str:
        """Lemma if analysed, otherwise the surface itself."""
        if self.features and self.features.lemma:
            return self.features.lemma
        return self.token.surface


class Lexicon:
    """Immutable surface -> features map plus a stoplist."""

    def __init__(self, entries: dict[str, WordFeatures], stoplist: Iterable[str] = (), skipped: int = 0):
        self.entries = dict(entries)
        self.stoplist = frozenset(s for s in stoplist if s and classify(s) is TokenKind.WORD)
        self.skipped = skipped

    def __len__(self):
        return len(self.entries)

    def __contains__(self, surface):
        return surface in self.entries

    def __iter__(self):
        return iter(self.entries)

    def lookup(self, surface: str) -> WordFeatures | None:
        return self.entries.get(surface)

    def is_stopword(self, surface: str) -> bool:
        return surface in self.stoplist

    def record(self, surface: str) -> WordRecord:
        """Build a WordRecord for raw text, taking features from the dictionary."""
        token = Token.of(surface)
        feats = self.entries.get(surface) if token.kind is TokenKind.WORD else None
        return WordRecord(token, feats)


def lookup(lexicon: Lexicon, surface: str) -> WordFeatures | None:
    return lexicon.lookup(surface)


def is_stopword(lexicon: Lexicon, surface: str) -> bool:
    return lexicon.is_stopword(surface)


def _parse_features(fields: Sequence[str]) -> WordFeatures:
    pos, lemma, gender, number, pregloss = fields
    return WordFeatures(pos=pos, lemma=lemma, gender=gender, number=number, pregloss=pregloss)


def _read_lines(path) -> list[str]:
    try:
        return Path(path).read_text(encoding="utf-8").splitlines()
    except OSError as exc:
        raise LexiconError(f"cannot read {path}: {exc}") from exc


def load_lexicon(dictionary_path, stoplist_path=None) -> Lexicon:
    """Load a ``surface pos lemma gender number pregloss`` TSV and a stoplist.

    Malformed rows are skipped and counted in ``Lexicon.skipped``.  Duplicate
    surfaces keep the first row.
    """
    entries: dict[str, WordFeatures] = {}
    skipped = 0
    for line in _read_lines(dictionary_path):
        if not line.strip():
            continue
        fields = line.split("\t")
        if len(fields) != 6 or not fields[0]:
            skipped += 1
            continue
        try:
            feats = _parse_features(fields[1:])
        except ValueError:
            skipped += 1
            continue
        entries.setdefault(fields[0], feats)
    if not entries:
        raise LexiconError(f"{dictionary_path}: no valid dictionary rows")
    if skipped:
        log.warning("%s: skipped %d malformed rows", dictionary_path, skipped)
    stoplist: list[str] = []
    if stoplist_path is not None:
        stoplist = [s.strip() for s in _read_lines(stoplist_path) if s.strip()]
    return Lexicon(entries, stoplist, skipped)


def write_lexicon(lexicon: Lexicon, dictionary_path, stoplist_path=None) -> None:
    with open(dictionary_path, "w", encoding="utf-8", newline="\n") as fh:
        for surface, feats in lexicon.entries.items():
            fh.write("\t".join([surface, *feats.to_fields()]) + "\n")
    if stoplist_path is not None:
        with open(stoplist_path, "w", encoding="utf-8", newline="\n") as fh:
            for s in sorted(lexicon.stoplist):
                fh.write(s + "\n")


def read_column_corpus(path) -> list[list[WordRecord]]:
    """Read a one-token-per-line column file; blank lines end sentences."""
    sentences: list[list[WordRecord]] = []
    current: list[WordRecord] = []
    with open(path, encoding="utf-8") as fh:
        for lineno, line in enumerate(fh, 1):
            line = line.rstrip("\n")
            if not line:
                if current:
                    sentences.append(current)
                    current = []
                continue
            fields = line.split("\t")
            if len(fields) != 7:
                raise CorpusFormatError(f"{path}:{lineno}: expected 7 columns, got {len(fields)}")
            flag = fields[6]
            if flag not in ("0", "1"):
                raise CorpusFormatError(f"{path}:{lineno}: analysis flag must be 0 or 1")
            try:
                token = Token.of(fields[0])
                feats = _parse_features(fields[1:6]) if flag == "1" else None
            except ValueError as exc:
                raise CorpusFormatError(f"{path}:{lineno}: {exc}") from exc
            current.append(WordRecord(token, feats))
    if current:
        sentences.append(current)
    return sentences


def write_column_corpus(sentences: Iterable[Sequence[WordRecord]], path) -> None:
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        for sent in sentences:
            for rec in sent:
                if rec.features is None:
                    fh.write(f"{rec.surface}\t\t\t\t\t\t0\n")
                else:
                    fh.write("\t".join([rec.surface, *rec.features.to_fields(), "1"]) + "\n")
            fh.write("\n")

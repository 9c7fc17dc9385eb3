"""Tokenization, Buckwalter transliteration and surface normalization.

Everything inside the engine works on Buckwalter ASCII.  Arabic script only
shows up at the I/O edges, through :func:`transliterate`.
"""
from __future__ import annotations

import enum
import logging
import re
from collections import Counter
from dataclasses import dataclass
from pathlib import Path

log = logging.getLogger(__name__)

# Buckwalter letter inventory followed by the eight diacritics.
_BUCKWALTER = [
    ("ء", "'"), ("آ", "|"), ("أ", ">"), ("ؤ", "&"),
    ("إ", "<"), ("ئ", "}"), ("ا", "A"), ("ب", "b"),
    ("ة", "p"), ("ت", "t"), ("ث", "v"), ("ج", "j"),
    ("ح", "H"), ("خ", "x"), ("د", "d"), ("ذ", "*"),
    ("ر", "r"), ("ز", "z"), ("س", "s"), ("ش", "$"),
    ("ص", "S"), ("ض", "D"), ("ط", "T"), ("ظ", "Z"),
    ("ع", "E"), ("غ", "g"), ("ف", "f"), ("ق", "q"),
    ("ك", "k"), ("ل", "l"), ("م", "m"), ("ن", "n"),
    ("ه", "h"), ("و", "w"), ("ى", "Y"), ("ي", "y"),
    ("ً", "F"), ("ٌ", "N"), ("ٍ", "K"), ("َ", "a"),
    ("ُ", "u"), ("ِ", "i"), ("ّ", "~"), ("ْ", "o"),
]

DIACRITICS = frozenset("auioFNK~")
LETTERS = "".join(a for _, a in _BUCKWALTER if a not in DIACRITICS)

# Roman marks plus their Arabic counterparts and guillemets.
PUNCTUATION = frozenset(".,?!;:\"()[]/-«»،؛؟")
ARABIC_PUNCT = {"?": "؟", ",": "،", ";": "؛"}
_DIGITS = frozenset("0123456789٠١٢٣٤٥٦٧٨٩")

_PUNCT_CLASS = "".join(re.escape(c) for c in sorted(PUNCTUATION))
_SPLIT_RE = re.compile(f"[{_PUNCT_CLASS}]+|[^{_PUNCT_CLASS}]+")
_RUN_RE = re.compile(r"(.)\1{2,}")


class TokenKind(str, enum.Enum):
    WORD = "word"
    PUNCT = "punctuation"
    DIGIT = "digit"


@dataclass(frozen=True)
class Token:
    surface: str
    kind: TokenKind = TokenKind.WORD

    def __post_init__(self):
        if not self.surface or any(c.isspace() for c in self.surface):
            raise ValueError(f"bad token surface {self.surface!r}")

    @classmethod
    def of(cls, surface: str) -> "Token":
        return cls(surface, classify(surface))

    def __str__(self):
        return self.surface


def classify(surface: str) -> TokenKind:
    if all(c in PUNCTUATION for c in surface):
        return TokenKind.PUNCT
    if all(c in _DIGITS for c in surface):
        return TokenKind.DIGIT
    return TokenKind.WORD


def is_punct(surface: str) -> bool:
    return bool(surface) and all(c in PUNCTUATION for c in surface)


def tokenize(text: str) -> list[Token]:
    """Split a line of Buckwalter text on whitespace, then peel off punctuation.

    Consecutive punctuation marks stay together as one token.

    >>> [t.surface for t in tokenize("mrHbA, kyf ?")]
    ['mrHbA', ',', 'kyf', '?']
    """
    tokens = []
    for chunk in text.split():
        for piece in _SPLIT_RE.findall(chunk):
            tokens.append(Token(piece, classify(piece)))
    return tokens


class TransliterationTable:
    """Bidirectional Arabic <-> Buckwalter character map.

    Characters outside the table pass through unchanged.  Letters that are
    not covered are tallied in ``unmapped`` so callers can report them.
    """

    def __init__(self, pairs):
        self.to_ascii_map: dict[str, str] = {}
        self.to_arabic_map: dict[str, str] = {}
        for arabic, ascii_ in pairs:
            if arabic in self.to_ascii_map or ascii_ in self.to_arabic_map:
                raise ValueError(f"duplicate mapping for {arabic!r}/{ascii_!r}")
            self.to_ascii_map[arabic] = ascii_
            self.to_arabic_map[ascii_] = arabic
        self.unmapped: Counter[str] = Counter()

    @classmethod
    def default(cls) -> "TransliterationTable":
        return cls(_BUCKWALTER)

    @classmethod
    def from_tsv(cls, path) -> "TransliterationTable":
        """Read ``codepoint<TAB>ascii`` rows; codepoints as ``U+0627`` or literal."""
        pairs = []
        for lineno, line in enumerate(Path(path).read_text(encoding="utf-8").splitlines(), 1):
            if not line.strip() or line.startswith("#"):
                continue
            parts = line.split("\t")
            if len(parts) != 2 or len(parts[1]) != 1:
                raise ValueError(f"{path}:{lineno}: expected 'codepoint<TAB>char'")
            cp = parts[0]
            if cp.upper().startswith("U+"):
                cp = chr(int(cp[2:], 16))
            pairs.append((cp, parts[1]))
        return cls(pairs)

    def to_tsv(self, path) -> None:
        rows = [f"U+{ord(a):04X}\t{b}" for a, b in self.to_ascii_map.items()]
        Path(path).write_text("\n".join(rows) + "\n", encoding="utf-8")

    def convert(self, text: str, direction: str) -> str:
        if direction == "to_ascii":
            table = self.to_ascii_map
        elif direction == "to_arabic":
            table = self.to_arabic_map
        else:
            raise ValueError(f"unknown direction {direction!r}")
        out = []
        missed = 0
        for ch in text:
            mapped = table.get(ch)
            if mapped is None:
                if not (ch.isspace() or ch in PUNCTUATION or ch in _DIGITS):
                    self.unmapped[ch] += 1
                    missed += 1
                mapped = ch
            out.append(mapped)
        if missed:
            log.warning("transliterate %s: %d uncovered characters passed through", direction, missed)
        return "".join(out)


_DEFAULT_TABLE = TransliterationTable.default()


def transliterate(text: str, direction: str, table: TransliterationTable | None = None) -> str:
    return (table or _DEFAULT_TABLE).convert(text, direction)


def strip_diacritics(surface: str) -> str:
    return "".join(c for c in surface if c not in DIACRITICS)


def normalize_surface(surface: str) -> str:
    kind = classify(surface)
    if kind is TokenKind.PUNCT:
        return "".join(ARABIC_PUNCT.get(c, c) for c in surface)
    if kind is TokenKind.DIGIT:
        return surface
    bare = strip_diacritics(surface)
    bare = _RUN_RE.sub(r"\1", bare)
    # A token made only of diacritics stays as is; tokens are never empty.
    if not bare:
        return surface
    # stripping can leave bare punctuation behind (";F" -> ";")
    if classify(bare) is TokenKind.PUNCT:
        return normalize_surface(bare)
    return bare


def normalize(token: Token) -> Token:
    """Remove diacritics, collapse runs of 3+ identical letters, arabize punctuation."""
    surface = normalize_surface(token.surface)
    if surface == token.surface:
        return token
    return Token(surface, classify(surface))

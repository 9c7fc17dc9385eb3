"""Corrections, gold annotation files and P/R/F1 scoring."""
from __future__ import annotations

from dataclasses import dataclass, field
from typing import Iterable, Mapping, Sequence

KINDS = ("edit", "add_before", "merge", "split", "normalize")


class GoldFormatError(ValueError):
    pass


@dataclass(frozen=True)
class Correction:
    """Replace ``original`` = tokens[start:end] of the source by ``replacement``.

    ``start == end`` is an insertion before token ``start``.
    """

    kind: str
    start: int
    end: int
    original: tuple[str, ...]
    replacement: tuple[str, ...]

    def __post_init__(self):
        if self.kind not in KINDS:
            raise ValueError(f"unknown correction kind {self.kind!r}")
        if not 0 <= self.start <= self.end:
            raise ValueError(f"bad span {self.start}..{self.end}")

    @property
    def span(self) -> tuple[int, int]:
        return (self.start, self.end)

    def key(self) -> tuple:
        return (self.start, self.end, self.replacement)


@dataclass
class GoldAnnotation:
    sid: str
    tokens: list[str]
    corrections: list[Correction] = field(default_factory=list)

    def validate(self) -> None:
        last_end, last_start = -1, -1
        for c in sorted(self.corrections, key=lambda c: (c.start, c.end)):
            if c.end > len(self.tokens):
                raise GoldFormatError(f"sentence {self.sid}: span {c.span} beyond {len(self.tokens)} tokens")
            overlap = c.start < last_end or (c.start == last_start and c.start == c.end)
            if overlap:
                raise GoldFormatError(f"sentence {self.sid}: overlapping spans at {c.span}")
            last_end, last_start = c.end, c.start


def apply_corrections(tokens: Sequence[str], corrections: Iterable[Correction]) -> list[str]:
    """Rebuild the corrected sentence from source tokens and corrections."""
    out: list[str] = []
    pos = 0
    for c in sorted(corrections, key=lambda c: (c.start, c.end)):
        if c.start < pos:
            raise ValueError(f"overlapping correction at {c.span}")
        out.extend(tokens[pos:c.start])
        out.extend(c.replacement)
        pos = c.end
    out.extend(tokens[pos:])
    return out


def write_gold(annotations: Iterable[GoldAnnotation], path) -> None:
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        for ann in annotations:
            fh.write(f"S {ann.sid} " + "\t".join(ann.tokens) + "\n")
            for c in sorted(ann.corrections, key=lambda c: (c.start, c.end)):
                fh.write(f"A {c.start} {c.end}|||{c.kind}|||{' '.join(c.replacement)}\n")
            fh.write("\n")


def read_gold(path) -> list[GoldAnnotation]:
    out: list[GoldAnnotation] = []
    current: GoldAnnotation | None = None
    with open(path, encoding="utf-8") as fh:
        for lineno, line in enumerate(fh, 1):
            line = line.rstrip("\n")
            if not line:
                current = None
                continue
            if line.startswith("S "):
                sid, _, rest = line[2:].partition(" ")
                if not sid:
                    raise GoldFormatError(f"{path}:{lineno}: missing sentence id")
                current = GoldAnnotation(sid, rest.split("\t") if rest else [])
                out.append(current)
            elif line.startswith("A "):
                if current is None:
                    raise GoldFormatError(f"{path}:{lineno}: annotation outside a sentence")
                parts = line[2:].split("|||")
                if len(parts) != 3:
                    raise GoldFormatError(f"{path}:{lineno}: expected 'A start end|||kind|||tokens'")
                try:
                    start, end = (int(v) for v in parts[0].split())
                    repl = tuple(parts[2].split(" ")) if parts[2] else ()
                    if end > len(current.tokens):
                        raise ValueError(f"span {start}..{end} beyond sentence length")
                    current.corrections.append(Correction(parts[1], start, end,
                                                          tuple(current.tokens[start:end]), repl))
                except ValueError as exc:
                    raise GoldFormatError(f"{path}:{lineno}: {exc}") from None
            else:
                raise GoldFormatError(f"{path}:{lineno}: unrecognised line")
    for ann in out:
        ann.validate()
    return out


@dataclass(frozen=True)
class ScoreReport:
    matched: int
    proposed: int
    gold: int

    @property
    def precision(self) -> float:
        return self.matched / self.proposed if self.proposed else 1.0

    @property
    def recall(self) -> float:
        return self.matched / self.gold if self.gold else 1.0

    @property
    def f1(self) -> float:
        p, r = self.precision, self.recall
        return 2 * p * r / (p + r) if p + r else 0.0

    def __str__(self):
        return (f"matched={self.matched} proposed={self.proposed} gold={self.gold} "
                f"P={self.precision:.4f} R={self.recall:.4f} F1={self.f1:.4f}")


def score(proposed: Mapping[str, Sequence[Correction]], gold: Sequence[GoldAnnotation],
          kinds: Iterable[str] | None = None) -> ScoreReport:
    """Exact span-and-replacement matching, summed over the corpus.

    ``kinds`` restricts both sides to the given correction kinds.
    """
    keep = set(kinds) if kinds is not None else None
    by_id = {g.sid: g for g in gold}
    unknown = set(proposed) - set(by_id)
    if unknown:
        raise KeyError(f"proposals for unknown sentence ids: {sorted(unknown)[:5]}")
    matched = n_prop = n_gold = 0
    for sid, ann in by_id.items():
        gold_keys = {c.key() for c in ann.corrections if keep is None or c.kind in keep}
        prop_keys = {c.key() for c in proposed.get(sid, ()) if keep is None or c.kind in keep}
        n_gold += len(gold_keys)
        n_prop += len(prop_keys)
        matched += len(gold_keys & prop_keys)
    return ScoreReport(matched, n_prop, n_gold)

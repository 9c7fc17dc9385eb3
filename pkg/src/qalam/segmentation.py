"""Merge (spurious space) and split (missing space) correction."""
from __future__ import annotations

from dataclasses import dataclass
from typing import Sequence

from .lexicon import Lexicon
from .lm import LanguageModel

MIN_PART = 2


@dataclass(frozen=True)
class SegmentationProposal:
    kind: str  # "merge" | "split"
    start: int
    end: int
    replacement: tuple[str, ...]
    lm_score: float


def split_points(word: str, min_part: int = MIN_PART) -> list[int]:
    return list(range(min_part, len(word) - min_part + 1))


def correct_merge(tokens: Sequence[str], position: int, lexicon: Lexicon, lm: LanguageModel,
                  pieces: tuple[str, str] | None = None, threshold: float = 0.0) -> SegmentationProposal | None:
    """Join ``tokens[position]`` with its successor if that yields a better sentence.

    ``pieces`` overrides the two strings being joined (the pipeline passes the
    normalized source words here).
    """
    if position + 1 >= len(tokens):
        return None
    a, b = pieces or (tokens[position], tokens[position + 1])
    joined = a + b
    if joined not in lexicon:
        return None
    proposed = [*tokens[:position], joined, *tokens[position + 2:]]
    new = lm.sequence_score(proposed)
    if new - lm.sequence_score(tokens) <= threshold:
        return None
    return SegmentationProposal("merge", position, position + 2, (joined,), new)


def split_candidates(word: str, lexicon: Lexicon, min_part: int = MIN_PART) -> list[tuple[str, str]]:
    return [(word[:k], word[k:]) for k in split_points(word, min_part)
            if word[:k] in lexicon and word[k:] in lexicon]


def correct_split(word: str, tokens: Sequence[str], position: int, lexicon: Lexicon, lm: LanguageModel,
                  threshold: float = 0.0, min_part: int = MIN_PART) -> SegmentationProposal | None:
    """Best two-way split of ``word`` (sitting at ``tokens[position]``) by sentence LM score."""
    best = None
    for a, b in split_candidates(word, lexicon, min_part):
        proposed = [*tokens[:position], a, b, *tokens[position + 1:]]
        s = lm.sequence_score(proposed)
        if best is None or s > best.lm_score:
            best = SegmentationProposal("split", position, position + 1, (a, b), s)
    if best is None or best.lm_score - lm.sequence_score(tokens) <= threshold:
        return None
    return best

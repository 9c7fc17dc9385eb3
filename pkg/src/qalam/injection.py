"""Synthetic error injection with exact inverse gold annotations."""
from __future__ import annotations

import random
from typing import Mapping, Sequence

from .channel import KEYBOARD_NEIGHBOURS, LETTER_GROUPS
from .evaluation import Correction, GoldAnnotation
from .lexicon import Lexicon
from .textnorm import LETTERS, TokenKind, classify, normalize_surface

RATE_KINDS = ("edit", "add_before", "merge", "split")
OP_WEIGHTS = {"substitute": 4, "delete": 2, "insert": 2, "transpose": 1}
MAX_TRIES = 30


def parse_rates(text: str) -> dict[str, float]:
    """'edit=0.05,merge=0.02' -> rates dict (missing kinds are 0)."""
    rates = dict.fromkeys(RATE_KINDS, 0.0)
    for item in filter(None, (s.strip() for s in text.split(","))):
        key, _, val = item.partition("=")
        key = key.strip().replace("-", "_")
        if key not in rates:
            raise ValueError(f"unknown error kind {key!r}")
        rates[key] = float(val)
    _check_rates(rates)
    return rates


def _check_rates(rates: Mapping[str, float]):
    for k, v in rates.items():
        if not 0.0 <= v <= 1.0:
            raise ValueError(f"rate {k}={v} outside [0, 1]")
    if rates.get("edit", 0) + rates.get("merge", 0) + rates.get("split", 0) > 1.0:
        raise ValueError("word-level rates must sum to at most 1")


def _confusable(ch: str, rng: random.Random) -> str:
    group = next((g for g in LETTER_GROUPS if ch in g), "")
    pool = sorted(set(group.replace(ch, "")) | KEYBOARD_NEIGHBOURS.get(ch, set()))
    if pool and rng.random() < 0.7:
        return rng.choice(pool)
    return rng.choice(LETTERS)


def random_edit(word: str, rng: random.Random) -> str:
    """One random insert/delete/substitute/transpose applied to ``word``."""
    op = rng.choices(list(OP_WEIGHTS), weights=list(OP_WEIGHTS.values()))[0]
    n = len(word)
    if op == "substitute":
        i = rng.randrange(n)
        return word[:i] + _confusable(word[i], rng) + word[i + 1:]
    if op == "delete" and n > 2:
        i = rng.randrange(n)
        return word[:i] + word[i + 1:]
    if op == "transpose" and n > 1:
        i = rng.randrange(n - 1)
        return word[:i] + word[i + 1] + word[i] + word[i + 2:]
    i = rng.randrange(n + 1)
    neighbour = word[min(i, n - 1)]
    return word[:i] + _confusable(neighbour, rng) + word[i:]


def _stable(s: str) -> bool:
    return classify(s) is TokenKind.WORD and normalize_surface(s) == s


def inject_errors(clean: Sequence[Sequence[str]], lexicon: Lexicon, rates: Mapping[str, float],
                  seed: int = 0) -> tuple[list[list[str]], list[GoldAnnotation]]:
    """Corrupt a clean corpus; the gold corrections undo every corruption.

    Each word draws once: a non-word single edit, a spurious space (needs a
    merge), or a dropped space with the following word (needs a split).
    Each punctuation token is dropped with probability ``add_before``.
    All injected strings are absent from the lexicon and unchanged by
    normalization, so detection sees them and nothing else rewrites them.
    """
    rates = {k: float(rates.get(k, 0.0)) for k in RATE_KINDS}
    _check_rates(rates)
    rng = random.Random(seed)
    noisy_corpus, gold = [], []
    e_hi = rates["edit"]
    m_hi = e_hi + rates["merge"]
    s_hi = m_hi + rates["split"]
    for sid, sent in enumerate(clean):
        noisy: list[str] = []
        corr: list[Correction] = []
        last_drop = -1
        i = 0
        while i < len(sent):
            tok = sent[i]
            j = len(noisy)
            if classify(tok) is TokenKind.PUNCT:
                if rng.random() < rates["add_before"] and last_drop != j:
                    corr.append(Correction("add_before", j, j, (), (tok,)))
                    last_drop = j
                else:
                    noisy.append(tok)
                i += 1
                continue
            r = rng.random()
            done = False
            if classify(tok) is TokenKind.WORD and r < s_hi:
                if r < e_hi:
                    for _ in range(MAX_TRIES):
                        bad = random_edit(tok, rng)
                        if bad != tok and bad not in lexicon and _stable(bad):
                            noisy.append(bad)
                            corr.append(Correction("edit", j, j + 1, (bad,), (tok,)))
                            done = True
                            break
                elif r < m_hi and len(tok) >= 2:
                    cuts = [k for k in range(1, len(tok))
                            if (tok[:k] not in lexicon or tok[k:] not in lexicon)
                            and _stable(tok[:k]) and _stable(tok[k:])]
                    if cuts:
                        k = rng.choice(cuts)
                        noisy += [tok[:k], tok[k:]]
                        corr.append(Correction("merge", j, j + 2, (tok[:k], tok[k:]), (tok,)))
                        done = True
                elif r >= m_hi and i + 1 < len(sent):
                    nxt = sent[i + 1]
                    joined = tok + nxt
                    if classify(nxt) is TokenKind.WORD and len(tok) >= 2 and len(nxt) >= 2 \
                            and joined not in lexicon and _stable(joined):
                        noisy.append(joined)
                        corr.append(Correction("split", j, j + 1, (joined,), (tok, nxt)))
                        i += 2
                        continue
            if not done:
                noisy.append(tok)
            i += 1
        noisy_corpus.append(noisy)
        gold.append(GoldAnnotation(str(sid), list(noisy), corr))
    return noisy_corpus, gold

"""Trigram language model with interpolated modified Kneser-Ney smoothing.

The estimated model is kept in backoff form (probabilities for seen n-grams
plus one backoff weight per history), which is exactly what an ARPA file
holds, so reading and writing are lossless up to the printed precision.
"""
from __future__ import annotations

import logging
import math
from collections import Counter, defaultdict
from dataclasses import dataclass, field
from typing import Iterable, Sequence

log = logging.getLogger(__name__)

BOS = "<s>"
EOS = "</s>"
UNK = "<unk>"
ORDER = 3
FALLBACK_DISCOUNT = 0.5
# log10 written for impossible events (BOS as a target).
LOG_ZERO = -99.0


class ArpaFormatError(ValueError):
    pass


@dataclass
class NgramCounts:
    """Raw n-gram counts; ``counts[k]`` holds the order-(k+1) table."""

    counts: list[Counter] = field(default_factory=lambda: [Counter() for _ in range(ORDER)])
    vocabulary: set = field(default_factory=set)
    sentences: int = 0

    def order(self, n: int) -> Counter:
        return self.counts[n - 1]


def pad(tokens: Sequence[str]) -> list[str]:
    return [BOS] * (ORDER - 1) + list(tokens) + [EOS]


def count_ngrams(corpus: Iterable[Sequence[str]], vocabulary: Iterable[str]) -> NgramCounts:
    """Count 1..3-grams over BOS/BOS-padded sentences.

    Targets are the sentence tokens and the closing EOS; histories reach back
    into the padding.  Tokens outside ``vocabulary`` are counted as UNK.
    """
    vocab = set(vocabulary) | {BOS, EOS, UNK}
    nc = NgramCounts(vocabulary=vocab)
    for sent in corpus:
        seq = pad([t if t in vocab else UNK for t in sent])
        nc.sentences += 1
        for i in range(ORDER - 1, len(seq)):
            for n in range(1, ORDER + 1):
                nc.counts[n - 1][tuple(seq[i - n + 1:i + 1])] += 1
    if nc.sentences == 0:
        raise ValueError("cannot count n-grams of an empty corpus")
    return nc


def _discounts(adjusted: dict) -> tuple[tuple[float, float, float], bool]:
    """Chen-Goodman discounts (D1, D2, D3+) from count-of-counts.

    Returns the discounts and whether the fixed fallback had to be used.
    """
    coc = Counter(c for c in adjusted.values() if c <= 4)
    n1, n2, n3, n4 = (coc[k] for k in (1, 2, 3, 4))
    if n1 == 0 or n2 == 0 or n3 == 0:
        return (FALLBACK_DISCOUNT,) * 3, True
    y = n1 / (n1 + 2 * n2)
    d = (1 - 2 * y * n2 / n1, 2 - 3 * y * n3 / n2, 3 - 4 * y * n4 / n3)
    if not all(0 < dk <= k for k, dk in enumerate(d, 1)):
        return (FALLBACK_DISCOUNT,) * 3, True
    return d, False


def _adjusted_counts(nc: NgramCounts) -> list[dict]:
    """Raw counts at the top order, continuation counts below it."""
    adjusted: list[dict] = [dict() for _ in range(ORDER)]
    adjusted[ORDER - 1] = dict(nc.order(ORDER))
    for n in range(ORDER - 1, 0, -1):
        cont: Counter = Counter()
        for gram in nc.order(n + 1):
            cont[gram[1:]] += 1
        adjusted[n - 1] = dict(cont)
    return adjusted


class LanguageModel:
    """Backoff-form n-gram model: ``probs[ngram]`` and ``bows[history]``.

    Probabilities are linear (not log) internally.
    """

    def __init__(self, probs: dict, bows: dict, order: int = ORDER, discounts=None, degenerate=None):
        self.probs = probs
        self.bows = bows
        self.order = order
        self.discounts = discounts or {}
        self.degenerate = degenerate or {}
        self.vocabulary = frozenset(g[0] for g in probs if len(g) == 1 and g[0] != BOS)

    @property
    def unk_prob(self) -> float:
        return self.probs.get((UNK,), 0.0)

    def _map(self, w: str) -> str:
        return w if w in self.vocabulary or w == BOS else UNK

    def prob(self, word: str, context: Sequence[str] = ()) -> float:
        """p(word | context) with the usual backoff walk."""
        w = self._map(word)
        ctx = tuple(self._map(c) for c in context)[max(0, len(context) - self.order + 1):]
        weight = 1.0
        while True:
            p = self.probs.get(ctx + (w,))
            if p is not None and (ctx or w != BOS):
                return weight * p
            if not ctx:
                # only reachable for BOS as a target
                return weight * self.unk_prob
            weight *= self.bows.get(ctx, 1.0)
            ctx = ctx[1:]

    def mixture_prob(self, word: str, context: Sequence[str] = ()) -> float:
        """Equal-weight mix of the unigram, bigram and trigram estimates."""
        context = list(context)[-(self.order - 1):] if self.order > 1 else []
        ps = [self.prob(word, context[len(context) - k:] if k else ()) for k in range(self.order)]
        return sum(ps) / len(ps)

    def sequence_score(self, tokens: Sequence[str], eos: bool = True) -> float:
        """Natural-log probability of a sentence (BOS padded, EOS closed)."""
        hist = [BOS] * (self.order - 1)
        total = 0.0
        seq = list(tokens) + ([EOS] if eos else [])
        for w in seq:
            total += math.log(self.prob(w, hist[len(hist) - self.order + 1:] if self.order > 1 else ()))
            hist.append(w)
        return total


def estimate_mkn(nc: NgramCounts) -> LanguageModel:
    """Interpolated modified Kneser-Ney estimate, converted to backoff form."""
    adjusted = _adjusted_counts(nc)
    targets = sorted(nc.vocabulary - {BOS})
    uniform = 1.0 / len(targets)
    probs: dict = {}
    bows: dict = {}
    discounts = {}
    degenerate = {}
    for n in range(1, ORDER + 1):
        table = adjusted[n - 1]
        if not table:
            raise ValueError(f"no {n}-grams to estimate from")
        d, fell_back = _discounts(table)
        discounts[n] = d
        degenerate[n] = fell_back
        if fell_back:
            log.info("order %d: degenerate count-of-counts, using fixed discount %.1f", n, FALLBACK_DISCOUNT)
        totals: Counter = Counter()
        buckets: dict = defaultdict(lambda: [0, 0, 0])
        for gram, c in table.items():
            h = gram[:-1]
            totals[h] += c
            buckets[h][min(c, 3) - 1] += 1
        gammas = {h: (d[0] * b[0] + d[1] * b[1] + d[2] * b[2]) / totals[h] for h, b in buckets.items()}
        lower = LanguageModel(dict(probs), dict(bows), order=n - 1) if n > 1 else None
        for gram, c in table.items():
            h = gram[:-1]
            disc = max(c - d[min(c, 3) - 1], 0.0) / totals[h]
            backoff = lower.prob(gram[-1], h[1:]) if lower else uniform
            probs[gram] = disc + gammas[h] * backoff
        if n == 1:
            for w in targets:
                probs.setdefault((w,), gammas[()] * uniform)
        else:
            for h, g in gammas.items():
                bows[h] = g
    # Histories need a table entry to carry their weight in ARPA form.
    probs.setdefault((BOS,), 0.0)
    for h in bows:
        if h and h not in probs:
            probs[h] = 0.0
    return LanguageModel(probs, bows, ORDER, discounts, degenerate)


def build_lm(corpus: Iterable[Sequence[str]], vocabulary: Iterable[str]) -> LanguageModel:
    return estimate_mkn(count_ngrams(corpus, vocabulary))


def ngram_prob(lm: LanguageModel, word: str, context: Sequence[str] = ()) -> float:
    return lm.prob(word, context)


def sequence_score(lm: LanguageModel, tokens: Sequence[str], eos: bool = True) -> float:
    return lm.sequence_score(tokens, eos)


def _fmt_log(p: float) -> str:
    return f"{math.log10(p):.10f}" if p > 0 else f"{LOG_ZERO:.1f}"


def _unlog(text: str) -> float:
    logp = float(text)
    return 0.0 if logp <= LOG_ZERO else 10.0 ** logp


def arpa_rounded(lm: LanguageModel) -> LanguageModel:
    """The model exactly as :func:`read_arpa` will return it after :func:`write_arpa`.

    Training code uses this so that a freshly trained system and one loaded
    from disk score every sentence identically.
    """
    probs = {g: _unlog(_fmt_log(p)) for g, p in lm.probs.items()}
    bows = {g: _unlog(f"{math.log10(b):.10f}") for g, b in lm.bows.items()}
    discounts = {n: tuple(float(f"{v:.10f}") for v in d) for n, d in lm.discounts.items()}
    return LanguageModel(probs, bows, lm.order, discounts, dict(lm.degenerate))


def write_arpa(lm: LanguageModel, path) -> None:
    by_order: dict[int, list] = defaultdict(list)
    for gram in lm.probs:
        by_order[len(gram)].append(gram)
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        for n, d in sorted(lm.discounts.items()):
            flag = " fallback" if lm.degenerate.get(n) else ""
            fh.write(f"# mkn order {n} discounts {d[0]:.10f} {d[1]:.10f} {d[2]:.10f}{flag}\n")
        fh.write("\n\\data\\\n")
        for n in range(1, lm.order + 1):
            fh.write(f"ngram {n}={len(by_order[n])}\n")
        for n in range(1, lm.order + 1):
            fh.write(f"\n\\{n}-grams:\n")
            for gram in sorted(by_order[n]):
                line = f"{_fmt_log(lm.probs[gram])}\t{' '.join(gram)}"
                if gram in lm.bows:
                    line += f"\t{math.log10(lm.bows[gram]):.10f}"
                fh.write(line + "\n")
        fh.write("\n\\end\\\n")


def read_arpa(path) -> LanguageModel:
    """Parse an ARPA file; raises ArpaFormatError with line numbers."""
    declared: dict[int, int] = {}
    probs: dict = {}
    bows: dict = {}
    seen: Counter = Counter()
    discounts: dict = {}
    degenerate: dict = {}
    section = None  # None (preamble), "data", or an order
    ended = False
    with open(path, encoding="utf-8") as fh:
        lines = fh.read().splitlines()
    for lineno, raw in enumerate(lines, 1):
        line = raw.strip()
        if not line:
            continue
        if line == "\\data\\":
            section = "data"
            continue
        if line == "\\end\\":
            ended = True
            break
        if line.startswith("\\"):
            if not (line.endswith("-grams:") and line[1:-7].isdigit()):
                raise ArpaFormatError(f"{path}:{lineno}: bad section header {line!r}")
            section = int(line[1:-7])
            if section not in declared:
                raise ArpaFormatError(f"{path}:{lineno}: section {section}-grams not declared in \\data\\")
            continue
        if section is None:
            fields = line.split()
            if fields[:2] == ["#", "mkn"] and len(fields) >= 8:
                try:
                    n = int(fields[3])
                    discounts[n] = tuple(float(v) for v in fields[5:8])
                except ValueError:
                    raise ArpaFormatError(f"{path}:{lineno}: bad discount comment") from None
                degenerate[n] = fields[8:] == ["fallback"]
            continue
        if section == "data":
            if not line.startswith("ngram ") or "=" not in line:
                raise ArpaFormatError(f"{path}:{lineno}: bad count line {line!r}")
            n, c = line[6:].split("=", 1)
            try:
                declared[int(n)] = int(c)
            except ValueError:
                raise ArpaFormatError(f"{path}:{lineno}: bad count line {line!r}") from None
            continue
        parts = raw.split("\t") if "\t" in raw else line.split()
        if "\t" in raw:
            words = parts[1].split()
            rest = parts[2:]
        else:
            words = parts[1:1 + section]
            rest = parts[1 + section:]
        if len(words) != section or len(rest) > 1:
            raise ArpaFormatError(f"{path}:{lineno}: malformed {section}-gram entry")
        gram = tuple(words)
        try:
            probs[gram] = _unlog(parts[0])
            if rest:
                bows[gram] = _unlog(rest[0])
        except ValueError:
            raise ArpaFormatError(f"{path}:{lineno}: non-numeric value") from None
        seen[section] += 1
    if not ended:
        raise ArpaFormatError(f"{path}: missing \\end\\ marker")
    for n, c in declared.items():
        if seen[n] != c:
            raise ArpaFormatError(f"{path}: \\{n}-grams: section has {seen[n]} entries, header declares {c}")
    order = max(declared) if declared else 0
    if order == 0:
        raise ArpaFormatError(f"{path}: no n-gram sections")
    return LanguageModel(probs, bows, order, discounts, degenerate)

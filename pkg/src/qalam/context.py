"""Collocation and co-occurrence models over the most frequent lemmas."""
from __future__ import annotations

from collections import Counter, defaultdict
from dataclasses import dataclass, field
from typing import Iterable, Sequence

from .lexicon import Lexicon, WordRecord
from .textnorm import TokenKind

TOP_LEMMAS = 5000
RADIUS = 10
BOUNDARY = "#"
SLOTS = ("left", "mid", "right")


def content_lemmas(sentence: Sequence[WordRecord], lexicon: Lexicon) -> list[str]:
    """Lemmas of the sentence with stop words and punctuation dropped."""
    return [r.lemma for r in sentence
            if r.kind is TokenKind.WORD and not lexicon.is_stopword(r.surface)]


def content_positions(sentence: Sequence[WordRecord], lexicon: Lexicon) -> list[int]:
    return [i for i, r in enumerate(sentence)
            if r.kind is TokenKind.WORD and not lexicon.is_stopword(r.surface)]


def top_lemmas(corpus: Iterable[Sequence[WordRecord]], size: int = TOP_LEMMAS) -> list[tuple[str, int]]:
    freq: Counter = Counter()
    for sent in corpus:
        freq.update(r.lemma for r in sent if r.kind is TokenKind.WORD)
    ranked = sorted(freq.items(), key=lambda kv: (-kv[1], kv[0]))
    return ranked[:size]


def pos_of(record: WordRecord) -> str:
    if record.kind is TokenKind.PUNCT:
        return record.pos or "PUNC"
    return record.pos or "UNK"


@dataclass
class CollocationModel:
    """Per lemma and slot, counts of the POS trigram around it.

    Slot ``left`` means the lemma opens the window, ``mid`` that it sits in
    the middle, ``right`` that it closes it.
    """

    lemmas: list[tuple[str, int]] = field(default_factory=list)
    tables: dict = field(default_factory=dict)  # (lemma, slot) -> Counter

    def __post_init__(self):
        self.members = {lem for lem, _ in self.lemmas}

    def table(self, lemma: str, slot: str) -> Counter:
        return self.tables.get((lemma, slot), Counter())


def _windows(pos: Sequence[str], i: int) -> dict[str, tuple[str, str, str]]:
    padded = [BOUNDARY, BOUNDARY, *pos, BOUNDARY, BOUNDARY]
    c = i + 2
    return {
        "left": tuple(padded[c:c + 3]),
        "mid": tuple(padded[c - 1:c + 2]),
        "right": tuple(padded[c - 2:c + 1]),
    }


def train_collocation(corpus: Sequence[Sequence[WordRecord]], size: int = TOP_LEMMAS,
                      lemmas: list[tuple[str, int]] | None = None) -> CollocationModel:
    ranked = lemmas if lemmas is not None else top_lemmas(corpus, size)
    model = CollocationModel(ranked)
    tables: dict = defaultdict(Counter)
    for sent in corpus:
        pos = [pos_of(r) for r in sent]
        for i, rec in enumerate(sent):
            if rec.kind is not TokenKind.WORD or rec.lemma not in model.members:
                continue
            for slot, window in _windows(pos, i).items():
                tables[(rec.lemma, slot)][window] += 1
    model.tables = dict(tables)
    return model


def collocation_features(model: CollocationModel, lemma: str,
                         pos_window: Sequence[str]) -> tuple[float, float, float, float]:
    """(left, mid, right, product) for a lemma placed in the middle of 5 POS tags."""
    if lemma not in model.members:
        return (0.0, 0.0, 0.0, 0.0)
    if len(pos_window) != 5:
        raise ValueError("pos_window must hold 5 tags")
    windows = _windows(list(pos_window), 2)
    vals = []
    for slot in SLOTS:
        table = model.table(lemma, slot)
        total = sum(table.values())
        vals.append(table[windows[slot]] / total if total else 0.0)
    left, mid, right = vals
    return (left, mid, right, left * mid * right)


def pos_window(sentence: Sequence[WordRecord], i: int, center_pos: str) -> list[str]:
    out = []
    for j in range(i - 2, i + 3):
        if j == i:
            out.append(center_pos)
        elif 0 <= j < len(sentence):
            out.append(pos_of(sentence[j]))
        else:
            out.append(BOUNDARY)
    return out


@dataclass
class CooccurrenceModel:
    lemmas: list[tuple[str, int]] = field(default_factory=list)
    tables: dict = field(default_factory=dict)  # lemma -> Counter of context lemmas
    radius: int = RADIUS

    def __post_init__(self):
        self.members = {lem for lem, _ in self.lemmas}
        self._max = {b: max(t.values()) for b, t in self.tables.items() if t}

    def max_count(self, b: str) -> int:
        return self._max.get(b, 0)


def train_cooccurrence(corpus: Sequence[Sequence[WordRecord]], lexicon: Lexicon, size: int = TOP_LEMMAS,
                       lemmas: list[tuple[str, int]] | None = None, radius: int = RADIUS) -> CooccurrenceModel:
    ranked = lemmas if lemmas is not None else top_lemmas(corpus, size)
    members = {lem for lem, _ in ranked}
    tables: dict = defaultdict(Counter)
    for sent in corpus:
        seq = content_lemmas(sent, lexicon)
        for j, b in enumerate(seq):
            if b not in members:
                continue
            lo, hi = max(0, j - radius), min(len(seq), j + radius + 1)
            for k in range(lo, hi):
                if k != j:
                    tables[b][seq[k]] += 1
    return CooccurrenceModel(ranked, dict(tables), radius)


@dataclass(frozen=True)
class CooccurrenceDistances:
    d1: float
    d2: float
    d3: float


def cooccurrence_distances(model: CooccurrenceModel, b: str, context: Sequence[str]) -> CooccurrenceDistances:
    """Contextual fit of lemma ``b`` given the surrounding content lemmas.

    d1 is the share of context lemmas ever seen near ``b``, d2 sums their
    counts scaled by the largest count in ``b``'s table, d3 is the number of
    distinct lemmas ``b`` was seen with.
    """
    table = model.tables.get(b)
    if b not in model.members or not table:
        return CooccurrenceDistances(0.0, 0.0, 0.0)
    found = [table[c] for c in context if table.get(c, 0) > 0]
    d1 = len(found) / len(context) if context else 0.0
    d2 = sum(found) / model.max_count(b)
    return CooccurrenceDistances(d1, d2, float(len(table)))


def context_window(sentence: Sequence[WordRecord], i: int, lexicon: Lexicon, radius: int = RADIUS) -> list[str]:
    """Content lemmas within ``radius`` content positions of token ``i``, excluding it."""
    positions = content_positions(sentence, lexicon)
    before = [p for p in positions if p < i][-radius:]
    after = [p for p in positions if p > i][:radius]
    return [sentence[p].lemma for p in before + after]


def write_context_models(coll: CollocationModel, cooc: CooccurrenceModel, path) -> None:
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        fh.write(f"#RADIUS\t{cooc.radius}\n#L\n")
        for lem, c in coll.lemmas:
            fh.write(f"{lem}\t{c}\n")
        for (lem, slot) in sorted(coll.tables):
            fh.write(f"#COLL {lem} {slot}\n")
            for key, c in sorted(coll.tables[(lem, slot)].items()):
                fh.write(f"{' '.join(key)}\t{c}\n")
        for lem in sorted(cooc.tables):
            fh.write(f"#COOC {lem}\n")
            for key, c in sorted(cooc.tables[lem].items()):
                fh.write(f"{key}\t{c}\n")


def read_context_models(path) -> tuple[CollocationModel, CooccurrenceModel]:
    lemmas: list[tuple[str, int]] = []
    coll: dict = defaultdict(Counter)
    cooc: dict = defaultdict(Counter)
    radius = RADIUS
    target = None
    kind = None
    with open(path, encoding="utf-8") as fh:
        for lineno, line in enumerate(fh, 1):
            line = line.rstrip("\n")
            if not line:
                continue
            if line.startswith("#RADIUS\t"):
                radius = int(line.split("\t")[1])
            elif line == "#L":
                kind, target = "L", None
            elif line.startswith("#COLL "):
                _, lem, slot = line.split(" ")
                kind, target = "COLL", coll[(lem, slot)]
            elif line.startswith("#COOC "):
                kind, target = "COOC", cooc[line[6:]]
            else:
                key, sep, count = line.rpartition("\t")
                if not sep or kind is None:
                    raise ValueError(f"{path}:{lineno}: malformed context-model row")
                if kind == "L":
                    lemmas.append((key, int(count)))
                elif kind == "COLL":
                    target[tuple(key.split(" "))] = int(count)
                else:
                    target[key] = int(count)
    return CollocationModel(lemmas, dict(coll)), CooccurrenceModel(lemmas, dict(cooc), radius)

"""Noisy-channel error model: edit alignment, confusion counts, candidates.

Edit operations always describe how the *correct* word was turned into the
observed *wrong* word.  Insertions and deletions are conditioned on the
preceding character of the correct word, ``#`` standing in at word start.
"""
from __future__ import annotations

import enum
from collections import Counter, defaultdict
from dataclasses import dataclass, field
from pathlib import Path
from typing import Iterable, Sequence

from .lexicon import Lexicon, WordFeatures
from .textnorm import LETTERS

WORD_START = "#"
DEFAULT_BOOST = 1.5
DEFAULT_CAP = 5000

# Same-group substitution pairs.
LETTER_GROUPS = (
    "|<>A", "ynvtb", "xHj", "*d", "zr", "$s", "DS", "ZT", "gE", "qf", "ph", "&w", "Yy",
)

# Standard Arabic PC keyboard, letter keys only; None marks a non-letter key.
KEYBOARD_ROWS = (
    ("D", "S", "v", "q", "f", "g", "E", "h", "x", "H", "j", "d"),
    ("$", "s", "y", "b", "l", "A", "t", "n", "m", "k", "T"),
    ("}", "'", "&", "r", None, "Y", "p", "w", "z", "Z"),
)


class DistanceError(ValueError):
    """Raised when a word pair is farther apart than the model handles."""


class OpKind(str, enum.Enum):
    INSERT = "insert"
    DELETE = "delete"
    SUBSTITUTE = "substitute"
    TRANSPOSE = "transpose"


@dataclass(frozen=True)
class EditOp:
    """One edit applied to the correct word on its way to the wrong word.

    ``position`` indexes the working string at the moment the op is applied.
    Ops come out left to right, so it matches the index in the wrong word.
    ``chars``: insert/delete ``(char, preceding)``, substitute
    ``(intended, typed)``, transpose ``(first, second)`` as in the correct word.
    """

    kind: OpKind
    position: int
    chars: tuple[str, str]


def _dl_matrix(a: str, b: str):
    la, lb = len(a), len(b)
    inf = la + lb
    d = [[0] * (lb + 2) for _ in range(la + 2)]
    d[0][0] = inf
    for i in range(la + 1):
        d[i + 1][0] = inf
        d[i + 1][1] = i
    for j in range(lb + 1):
        d[0][j + 1] = inf
        d[1][j + 1] = j
    last_row: dict[str, int] = {}
    for i in range(1, la + 1):
        ai = a[i - 1]
        last_col = 0
        row, prev = d[i + 1], d[i]
        for j in range(1, lb + 1):
            bj = b[j - 1]
            k = last_row.get(bj, 0)
            l = last_col
            if ai == bj:
                cost = 0
                last_col = j
            else:
                cost = 1
            row[j + 1] = min(
                prev[j] + cost,
                row[j] + 1,
                prev[j + 1] + 1,
                d[k][l] + (i - k - 1) + 1 + (j - l - 1),
            )
        last_row[ai] = i
    return d


def edit_distance(a: str, b: str) -> int:
    """Unrestricted Damerau-Levenshtein distance (unit costs)."""
    if a == b:
        return 0
    if not a or not b:
        return len(a) + len(b)
    return _dl_matrix(a, b)[len(a) + 1][len(b) + 1]


def _backtrace(a: str, b: str):
    """Optimal alignment steps of source ``a`` onto target ``b``, left to right."""
    d = _dl_matrix(a, b)
    steps = []
    i, j = len(a), len(b)
    while i > 0 or j > 0:
        here = d[i + 1][j + 1]
        if i > 0 and j > 0:
            if a[i - 1] == b[j - 1] and d[i][j] == here:
                steps.append(("match", i - 1))
                i, j = i - 1, j - 1
                continue
            if d[i][j] + 1 == here:
                steps.append(("sub", i - 1, b[j - 1]))
                i, j = i - 1, j - 1
                continue
            k = max((r for r in range(1, i) if a[r - 1] == b[j - 1]), default=0)
            l = max((c for c in range(1, j) if b[c - 1] == a[i - 1]), default=0)
            if k and l and d[k][l] + (i - k - 1) + 1 + (j - l - 1) == here:
                steps.append(("trans", k - 1, i - 1, b[l:j - 1]))
                i, j = k - 1, l - 1
                continue
        if i > 0 and d[i][j + 1] + 1 == here:
            steps.append(("del", i - 1))
            i -= 1
            continue
        steps.append(("ins", i, b[j - 1]))
        j -= 1
    steps.reverse()
    return steps


def align_edits(wrong: str, correct: str, max_distance: int | None = 2) -> list[EditOp]:
    """Minimal edit script turning ``correct`` into ``wrong``.

    Raises DistanceError when the pair is farther apart than ``max_distance``.
    """
    if wrong == correct:
        return []
    dist = edit_distance(correct, wrong)
    if max_distance is not None and dist > max_distance:
        raise DistanceError(f"distance {dist} between {wrong!r} and {correct!r} exceeds {max_distance}")

    def before(i):
        return correct[i - 1] if i > 0 else WORD_START

    ops: list[EditOp] = []
    pos = 0
    for step in _backtrace(correct, wrong):
        kind = step[0]
        if kind == "match":
            pos += 1
        elif kind == "sub":
            ops.append(EditOp(OpKind.SUBSTITUTE, pos, (correct[step[1]], step[2])))
            pos += 1
        elif kind == "del":
            ops.append(EditOp(OpKind.DELETE, pos, (correct[step[1]], before(step[1]))))
        elif kind == "ins":
            ops.append(EditOp(OpKind.INSERT, pos, (step[2], before(step[1]))))
            pos += 1
        else:
            _, k, i, inserted = step
            # the chars strictly between the swapped pair vanish first
            for m in range(k + 1, i):
                ops.append(EditOp(OpKind.DELETE, pos + 1, (correct[m], correct[m - 1])))
            ops.append(EditOp(OpKind.TRANSPOSE, pos, (correct[k], correct[i])))
            pos += 1
            for ch in inserted:
                ops.append(EditOp(OpKind.INSERT, pos, (ch, correct[k])))
                pos += 1
            pos += 1
    assert len(ops) == dist
    return ops


def apply_edits(correct: str, ops: Iterable[EditOp]) -> str:
    """Replay an edit script on the correct word."""
    s = list(correct)
    for op in ops:
        p = op.position
        if op.kind is OpKind.INSERT:
            s.insert(p, op.chars[0])
        elif op.kind is OpKind.DELETE:
            if s[p] != op.chars[0]:
                raise ValueError(f"delete of {op.chars[0]!r} at {p} does not match {s[p]!r}")
            del s[p]
        elif op.kind is OpKind.SUBSTITUTE:
            if s[p] != op.chars[0]:
                raise ValueError(f"substitute of {op.chars[0]!r} at {p} does not match {s[p]!r}")
            s[p] = op.chars[1]
        else:
            if (s[p], s[p + 1]) != op.chars:
                raise ValueError(f"transpose {op.chars} at {p} does not match")
            s[p], s[p + 1] = s[p + 1], s[p]
    return "".join(s)


_SECTIONS = (("#SUB", "sub"), ("#INS", "ins"), ("#DEL", "dele"), ("#TRANS", "trans"))


@dataclass
class ConfusionMatrix:
    """Edit counts keyed by character pairs, plus background counts.

    Keys: sub ``(intended, typed)``, ins ``(preceding, inserted)``,
    dele ``(preceding, deleted)``, trans ``(first, second)``.  Background
    unigrams and bigrams come from the correct side of the training pairs,
    with the word-start marker included.
    """

    alphabet_size: int = len(LETTERS)
    sub: Counter = field(default_factory=Counter)
    ins: Counter = field(default_factory=Counter)
    dele: Counter = field(default_factory=Counter)
    trans: Counter = field(default_factory=Counter)
    bg1: Counter = field(default_factory=Counter)
    bg2: Counter = field(default_factory=Counter)
    skipped: int = 0

    def add_background(self, word: str) -> None:
        marked = WORD_START + word
        self.bg1.update(marked)
        self.bg2.update(zip(marked, marked[1:]))

    def add_op(self, op: EditOp) -> None:
        a, b = op.chars
        if op.kind is OpKind.SUBSTITUTE:
            self.sub[(a, b)] += 1
        elif op.kind is OpKind.INSERT:
            self.ins[(b, a)] += 1
        elif op.kind is OpKind.DELETE:
            self.dele[(b, a)] += 1
        else:
            self.trans[(a, b)] += 1

    def op_prob(self, op: EditOp) -> float:
        a, b = op.chars
        n = self.alphabet_size
        if op.kind is OpKind.SUBSTITUTE:
            return (self.sub[(a, b)] + 1) / (self.bg1[a] + n)
        if op.kind is OpKind.INSERT:
            return (self.ins[(b, a)] + 1) / (self.bg1[b] + n)
        if op.kind is OpKind.DELETE:
            return (self.dele[(b, a)] + 1) / (self.bg2[(b, a)] + n)
        return (self.trans[(a, b)] + 1) / (self.bg2[(a, b)] + n)

    def write(self, path) -> None:
        with open(path, "w", encoding="utf-8", newline="\n") as fh:
            fh.write(f"#ALPHABET\t{self.alphabet_size}\n")
            for header, attr in _SECTIONS:
                fh.write(header + "\n")
                for key, c in sorted(getattr(self, attr).items()):
                    fh.write(f"{''.join(key)}\t{c}\n")
            fh.write("#BG\n")
            for key, c in sorted(self.bg1.items()):
                fh.write(f"{key}\t{c}\n")
            for key, c in sorted(self.bg2.items()):
                fh.write(f"{''.join(key)}\t{c}\n")

    @classmethod
    def read(cls, path) -> "ConfusionMatrix":
        cm = cls()
        attrs = dict(_SECTIONS)
        current = None
        for lineno, line in enumerate(Path(path).read_text(encoding="utf-8").splitlines(), 1):
            if not line:
                continue
            if line.startswith("#ALPHABET\t"):
                cm.alphabet_size = int(line.split("\t")[1])
                continue
            if line in attrs or line == "#BG":
                current = line
                continue
            chars, sep, count = line.rpartition("\t")
            if not sep or current is None:
                raise ValueError(f"{path}:{lineno}: malformed confusion row")
            if current == "#BG":
                if len(chars) == 1:
                    cm.bg1[chars] = int(count)
                else:
                    cm.bg2[tuple(chars)] = int(count)
            else:
                getattr(cm, attrs[current])[tuple(chars)] = int(count)
        return cm


def train_confusion(pairs: Iterable[tuple[str, str]], alphabet_size: int = len(LETTERS),
                    max_distance: int = 2) -> ConfusionMatrix:
    """Count aligned edits over ``(wrong, correct)`` pairs."""
    cm = ConfusionMatrix(alphabet_size=alphabet_size)
    for wrong, correct in pairs:
        try:
            ops = align_edits(wrong, correct, max_distance)
        except DistanceError:
            cm.skipped += 1
            continue
        cm.add_background(correct)
        for op in ops:
            cm.add_op(op)
    return cm


def channel_prob(cm: ConfusionMatrix, x: str, w: str, max_distance: int = 2) -> float:
    """p(x | w): product of add-one smoothed per-operation probabilities."""
    p = 1.0
    for op in align_edits(x, w, max_distance):
        p *= cm.op_prob(op)
    return p


def _keyboard_neighbours() -> dict[str, set]:
    pos = {}
    for r, row in enumerate(KEYBOARD_ROWS):
        for c, key in enumerate(row):
            if key is not None:
                pos[key] = (r, c)
    near = defaultdict(set)
    for key, (r, c) in pos.items():
        for other, (r2, c2) in pos.items():
            if other == key:
                continue
            if (r2 == r and abs(c2 - c) == 1) or (r2 == r + 1 and c2 in (c - 1, c)) \
                    or (r2 == r - 1 and c2 in (c, c + 1)):
                near[key].add(other)
    return near


_GROUP_OF = {ch: i for i, group in enumerate(LETTER_GROUPS) for ch in group}
KEYBOARD_NEIGHBOURS = _keyboard_neighbours()


def same_group(a: str, b: str) -> bool:
    return a != b and a in _GROUP_OF and _GROUP_OF.get(a) == _GROUP_OF.get(b)


def substitution_boost(intended: str, typed: str, k: float = DEFAULT_BOOST, keyboard: bool = True) -> float:
    if same_group(intended, typed):
        return k
    if keyboard and typed in KEYBOARD_NEIGHBOURS.get(intended, ()):
        return k
    return 1.0


def boost_factor(ops: Sequence[EditOp], k: float = DEFAULT_BOOST, keyboard: bool = True) -> float:
    f = 1.0
    for op in ops:
        if op.kind is OpKind.SUBSTITUTE:
            f *= substitution_boost(*op.chars, k=k, keyboard=keyboard)
    return f


def likelihood(cm: ConfusionMatrix, x: str, w: str, k: float = DEFAULT_BOOST, keyboard: bool = True) -> float:
    """Channel probability times the substitution boost of the alignment."""
    ops = align_edits(x, w)
    p = 1.0
    for op in ops:
        p *= cm.op_prob(op)
    return p * boost_factor(ops, k, keyboard)


def noisy_channel_score(cm: ConfusionMatrix, lm, x: str, w: str, context: Sequence[str] = (),
                        k: float = DEFAULT_BOOST, keyboard: bool = True) -> float:
    """p(x|w) * p(w) with p(w) the equal-weight n-gram mixture, boosted."""
    return likelihood(cm, x, w, k, keyboard) * lm.mixture_prob(w, context)


@dataclass
class Candidate:
    surface: str
    distance: int
    features: WordFeatures | None = None
    channel_score: float | None = None


def deletes(word: str, depth: int) -> set[str]:
    """All strings reachable from ``word`` by up to ``depth`` deletions."""
    out = {word}
    frontier = {word}
    for _ in range(depth):
        nxt = set()
        for w in frontier:
            for i in range(len(w)):
                nxt.add(w[:i] + w[i + 1:])
        out |= nxt
        frontier = nxt
    return out


class CandidateIndex:
    """Symmetric-delete index over a lexicon.

    Two strings within Damerau-Levenshtein distance ``n`` share a string
    reachable from each by at most ``n`` deletions, so probing the index with
    the query's deletions gives a superset that is then verified exactly.
    """

    def __init__(self, words: Iterable[str], max_distance: int = 2):
        self.max_distance = max_distance
        self.words = sorted(set(words))
        index: dict[str, list[int]] = defaultdict(list)
        for wid, w in enumerate(self.words):
            for d in deletes(w, max_distance):
                index[d].append(wid)
        self.index = dict(index)

    def lookup(self, x: str, max_distance: int | None = None) -> list[tuple[str, int]]:
        n = self.max_distance if max_distance is None else max_distance
        if n > self.max_distance:
            raise ValueError(f"index built for distance {self.max_distance}, asked for {n}")
        seen = set()
        for d in deletes(x, n):
            seen.update(self.index.get(d, ()))
        found = []
        for wid in seen:
            w = self.words[wid]
            if w == x or abs(len(w) - len(x)) > n:
                continue
            dist = edit_distance(x, w)
            if dist <= n:
                found.append((w, dist))
        found.sort(key=lambda t: (t[1], t[0]))
        return found


def candidate_index(lexicon: Lexicon, max_distance: int = 2) -> CandidateIndex:
    idx = getattr(lexicon, "_candidate_index", None)
    if idx is None or idx.max_distance < max_distance:
        idx = CandidateIndex(lexicon.entries, max_distance)
        lexicon._candidate_index = idx
    return idx


def generate_candidates(x: str, lexicon: Lexicon, max_distance: int = 2,
                        cap: int | None = DEFAULT_CAP) -> list[Candidate]:
    """Lexicon words within ``max_distance`` of ``x`` (x itself excluded).

    Sorted by (distance, surface); ``cap`` truncates that order, None disables it.
    """
    if len(lexicon) == 0:
        return []
    found = candidate_index(lexicon, max_distance).lookup(x, max_distance)
    if cap is not None:
        found = found[:cap]
    return [Candidate(w, d, lexicon.lookup(w)) for w, d in found]

"""Naive Bayes core plus the edit-candidate and add-before classifiers."""
from __future__ import annotations

import math
import random
from bisect import bisect_right
from collections import Counter, defaultdict
from dataclasses import dataclass, field
from pathlib import Path
from typing import Mapping, Sequence

from . import channel
from .context import (
    CollocationModel, CooccurrenceModel, collocation_features, context_window,
    cooccurrence_distances, pos_window,
)
from .lexicon import Lexicon, WordRecord
from .lm import BOS, EOS, LanguageModel
from .textnorm import TokenKind

N_BINS = 10
BOUNDARY = "#"
CORRECT = "correct"
INCORRECT = "incorrect"

EDIT_FEATURES = (
    "likelihood model probability",
    "unigram probability",
    "previous bigram probability",
    "next bigram probability",
    "trigram probability",
    "language model product",
    "collocation left",
    "collocation right",
    "collocation mid",
    "collocation product",
    "cooccurrence distance 1",
    "cooccurrence distance 2",
    "cooccurrence distance 3",
    "previous gender",
    "previous number",
    "next gender",
    "next number",
)

ADDBEFORE_FEATURES = (
    "before previous word",
    "before previous word POS tag",
    "previous word",
    "previous word POS tag",
    "next word",
    "next word POS tag",
    "next word pregloss",
    "after next word",
    "after next POS tag",
)


def _is_numeric(v) -> bool:
    return isinstance(v, (int, float)) and not isinstance(v, bool)


def quantile_bins(values: Sequence[float], n_bins: int = N_BINS) -> list[float]:
    """Sorted, de-duplicated inner quantile boundaries of ``values``."""
    vals = sorted(values)
    n = len(vals)
    return sorted({vals[min(q * n // n_bins, n - 1)] for q in range(1, n_bins)})


@dataclass
class NBModel:
    """Multinomial Naive Bayes over discrete feature values.

    Numeric features are discretized with quantile bins fixed at training
    time.  Likelihoods get add-``alpha`` smoothing at query time with one
    extra slot reserved for values never seen in training.
    """

    schema: tuple[str, ...]
    priors: Counter = field(default_factory=Counter)
    counts: dict = field(default_factory=dict)  # (label, feature) -> Counter(value)
    bins: dict = field(default_factory=dict)  # numeric feature -> boundaries
    alpha: float = 1.0

    def __post_init__(self):
        self._refresh()

    def _refresh(self):
        seen = defaultdict(set)
        for (_, feat), ctr in self.counts.items():
            seen[feat].update(ctr)
        self._vsize = {}
        for feat in self.schema:
            if feat in self.bins:
                self._vsize[feat] = len(self.bins[feat]) + 1
            else:
                self._vsize[feat] = len(seen[feat]) + 1
        self.labels = tuple(sorted(self.priors))
        self.total = sum(self.priors.values())

    def discretize(self, feat: str, value) -> str:
        bounds = self.bins.get(feat)
        if bounds is None:
            return str(value)
        return f"bin{bisect_right(bounds, float(value))}"

    def log_joint(self, fv: Mapping) -> dict[str, float]:
        missing = [f for f in self.schema if f not in fv]
        if missing:
            raise KeyError(f"feature vector lacks {missing}")
        values = {f: self.discretize(f, fv[f]) for f in self.schema}
        out = {}
        for label in self.labels:
            n = self.priors[label]
            s = math.log(n / self.total)
            for f, v in values.items():
                c = self.counts.get((label, f))
                hit = c[v] if c else 0
                s += math.log((hit + self.alpha) / (n + self.alpha * self._vsize[f]))
            out[label] = s
        return out

    def posteriors(self, fv: Mapping) -> dict[str, float]:
        joint = self.log_joint(fv)
        top = max(joint.values())
        z = sum(math.exp(v - top) for v in joint.values())
        return {lab: math.exp(v - top) / z for lab, v in joint.items()}

    def classify(self, fv: Mapping) -> tuple[str, float]:
        post = self.posteriors(fv)
        label = min(post, key=lambda lab: (-post[lab], lab))
        return label, post[label]

    def write(self, path) -> None:
        with open(path, "w", encoding="utf-8", newline="\n") as fh:
            fh.write(f"#ALPHA\t{self.alpha!r}\n#SCHEMA\n")
            for f in self.schema:
                fh.write(f + "\n")
            fh.write("#PRIORS\n")
            for lab in self.labels:
                fh.write(f"{lab}\t{self.priors[lab]}\n")
            fh.write("#BINS\n")
            for f in self.schema:
                if f in self.bins:
                    fh.write("\t".join([f, *(repr(b) for b in self.bins[f])]) + "\n")
            fh.write("#COUNTS\n")
            for (lab, f) in sorted(self.counts):
                for v, c in sorted(self.counts[(lab, f)].items()):
                    fh.write(f"{lab}\t{f}\t{v}\t{c}\n")

    @classmethod
    def read(cls, path) -> "NBModel":
        section = None
        alpha = 1.0
        schema, priors, bins, counts = [], Counter(), {}, defaultdict(Counter)
        for lineno, line in enumerate(Path(path).read_text(encoding="utf-8").split("\n"), 1):
            if line.startswith("#ALPHA\t"):
                alpha = float(line.split("\t")[1])
            elif line in ("#SCHEMA", "#PRIORS", "#BINS", "#COUNTS"):
                section = line
            elif not line:
                continue
            elif section == "#SCHEMA":
                schema.append(line)
            elif section == "#PRIORS":
                lab, c = line.rsplit("\t", 1)
                priors[lab] = int(c)
            elif section == "#BINS":
                f, *bounds = line.split("\t")
                bins[f] = [float(b) for b in bounds]
            elif section == "#COUNTS":
                parts = line.split("\t")
                if len(parts) != 4:
                    raise ValueError(f"{path}:{lineno}: malformed count row")
                counts[(parts[0], parts[1])][parts[2]] = int(parts[3])
            else:
                raise ValueError(f"{path}:{lineno}: row outside any section")
        return cls(tuple(schema), priors, dict(counts), bins, alpha)


def nb_train(examples: Sequence[tuple[Mapping, str]], schema: Sequence[str] | None = None,
             n_bins: int = N_BINS, alpha: float = 1.0) -> NBModel:
    if not examples:
        raise ValueError("no training examples")
    schema = tuple(schema) if schema is not None else tuple(examples[0][0])
    bins = {}
    for f in schema:
        vals = [fv[f] for fv, _ in examples]
        if all(_is_numeric(v) for v in vals):
            bins[f] = quantile_bins([float(v) for v in vals], n_bins)
    model = NBModel(schema, bins=bins, alpha=alpha)
    counts: dict = defaultdict(Counter)
    for fv, label in examples:
        model.priors[label] += 1
        for f in schema:
            counts[(label, f)][model.discretize(f, fv[f])] += 1
    model.counts = dict(counts)
    model._refresh()
    return model


def nb_classify(model: NBModel, fv: Mapping) -> tuple[str, float]:
    return model.classify(fv)


# -- edit candidates -------------------------------------------------------

@dataclass
class EditModels:
    lexicon: Lexicon
    lm: LanguageModel
    cm: channel.ConfusionMatrix
    collocation: CollocationModel
    cooccurrence: CooccurrenceModel
    boost: float = channel.DEFAULT_BOOST
    keyboard: bool = True
    max_distance: int = 2
    cap: int | None = channel.DEFAULT_CAP


@dataclass(frozen=True)
class EditDecision:
    chosen: str | None
    posterior: float


@dataclass
class _Slot:
    """Per-position context shared by every candidate at that position."""

    x: str
    prev2: str
    prev: str
    nxt: str
    context: list
    neighbours: tuple


def _neighbour_feats(sentence, j):
    if 0 <= j < len(sentence) and sentence[j].features is not None:
        f = sentence[j].features
        return f.gender, f.number
    return "none", "none"


def _slot(sentence: Sequence[WordRecord], i: int, models: EditModels) -> _Slot:
    surf = [r.surface for r in sentence]
    return _Slot(
        x=surf[i],
        prev2=surf[i - 2] if i >= 2 else BOS,
        prev=surf[i - 1] if i >= 1 else BOS,
        nxt=surf[i + 1] if i + 1 < len(surf) else EOS,
        context=context_window(sentence, i, models.lexicon, models.cooccurrence.radius),
        neighbours=_neighbour_feats(sentence, i - 1) + _neighbour_feats(sentence, i + 1),
    )


def extract_edit_features(candidate: channel.Candidate, position: int, sentence: Sequence[WordRecord],
                          models: EditModels, slot: _Slot | None = None) -> dict:
    s = slot or _slot(sentence, position, models)
    w = candidate.surface
    lm = models.lm
    like = channel.likelihood(models.cm, s.x, w, models.boost, models.keyboard)
    uni = lm.prob(w)
    prev_bi = lm.prob(w, (s.prev,))
    next_bi = lm.prob(s.nxt, (w,))
    tri = lm.prob(w, (s.prev2, s.prev))
    feats = candidate.features or models.lexicon.lookup(w)
    lemma = feats.lemma if feats else w
    pos = feats.pos if feats else "UNK"
    left, mid, right, prod = collocation_features(models.collocation, lemma, pos_window(sentence, position, pos))
    dist = cooccurrence_distances(models.cooccurrence, lemma, s.context)
    pg, pn, ng, nn = s.neighbours
    values = (like, uni, prev_bi, next_bi, tri, uni * prev_bi * next_bi * tri,
              left, right, mid, prod, dist.d1, dist.d2, dist.d3, pg, pn, ng, nn)
    return dict(zip(EDIT_FEATURES, values))


def correct_edit(record: WordRecord, position: int, sentence: Sequence[WordRecord], models: EditModels,
                 nb: NBModel | None) -> EditDecision:
    """Pick the most likely correction of an incorrect word, or none."""
    cands = channel.generate_candidates(record.surface, models.lexicon, models.max_distance, models.cap)
    if not cands:
        return EditDecision(None, 0.0)
    slot = _slot(sentence, position, models)
    scored = []
    for c in cands:
        if nb is None:
            ctx = (slot.prev2, slot.prev)
            score = channel.noisy_channel_score(models.cm, models.lm, slot.x, c.surface, ctx,
                                                models.boost, models.keyboard)
        else:
            score = nb.posteriors(extract_edit_features(c, position, sentence, models, slot)).get(CORRECT, 0.0)
        scored.append((score, c))
    if nb is None:
        total = sum(s for s, _ in scored)
        scored = [(s / total if total else 0.0, c) for s, c in scored]
    best_score, best = min(scored, key=lambda sc: (-sc[0], sc[1].distance, sc[1].surface))
    return EditDecision(best.surface, min(1.0, best_score))


def edit_training_examples(instances, models: EditModels, max_negatives: int = 20, seed: int = 0):
    """Feature vectors for every (sentence, position, gold) edit instance.

    The gold candidate is labelled correct; at most ``max_negatives`` other
    candidates, sampled with a seeded RNG, are labelled incorrect.
    """
    rng = random.Random(seed)
    examples = []
    for sentence, position, gold in instances:
        x = sentence[position].surface
        cands = channel.generate_candidates(x, models.lexicon, models.max_distance, models.cap)
        if not cands:
            continue
        slot = _slot(sentence, position, models)
        pos = [c for c in cands if c.surface == gold]
        neg = [c for c in cands if c.surface != gold]
        if max_negatives is not None and len(neg) > max_negatives:
            neg = rng.sample(neg, max_negatives)
        for c in pos:
            examples.append((extract_edit_features(c, position, sentence, models, slot), CORRECT))
        for c in neg:
            examples.append((extract_edit_features(c, position, sentence, models, slot), INCORRECT))
    return examples


def train_edit_classifier(instances, models: EditModels, max_negatives: int = 20, seed: int = 0,
                          n_bins: int = N_BINS) -> NBModel | None:
    examples = edit_training_examples(instances, models, max_negatives, seed)
    if not examples:
        return None
    return nb_train(examples, EDIT_FEATURES, n_bins)


# -- add-before ------------------------------------------------------------

@dataclass(frozen=True)
class InsertionDecision:
    token: str = ""


def strip_punct(sentence: Sequence[WordRecord]) -> tuple[list[WordRecord], list[int]]:
    """Non-punctuation records and their indices in the original sentence."""
    kept, where = [], []
    for i, r in enumerate(sentence):
        if r.kind is not TokenKind.PUNCT:
            kept.append(r)
            where.append(i)
    return kept, where


def extract_addbefore_features(position: int, sentence: Sequence[WordRecord]) -> dict:
    """Context of the gap just before ``sentence[position]``.

    ``position == len(sentence)`` is the gap at the end of the sentence.
    """
    def word(j):
        return sentence[j].surface if 0 <= j < len(sentence) else BOUNDARY

    def pos(j):
        if 0 <= j < len(sentence):
            return sentence[j].pos or "UNK"
        return BOUNDARY

    if 0 <= position < len(sentence):
        f = sentence[position].features
        pregloss = f.pregloss if f else ""
    else:
        pregloss = BOUNDARY
    values = (word(position - 2), pos(position - 2), word(position - 1), pos(position - 1),
              word(position), pos(position), pregloss, word(position + 1), pos(position + 1))
    return dict(zip(ADDBEFORE_FEATURES, values))


def _open_slots(sentence: Sequence[WordRecord]):
    """(stripped position, original index) of gaps not already punctuated."""
    kept, where = strip_punct(sentence)
    where = where + [len(sentence)]
    for p, src in enumerate(where):
        if src > 0 and sentence[src - 1].kind is TokenKind.PUNCT:
            continue
        yield kept, p, src


def insertion_labels(gold_tokens: Sequence[str], max_len: int = 3, min_count: int = 5) -> set[str]:
    freq = Counter(gold_tokens)
    return {t for t, c in freq.items() if len(t) <= max_len and c >= min_count}


def train_addbefore(examples, max_len: int = 3, min_count: int = 5) -> NBModel:
    """``examples``: (sentence records, {index: inserted token}) pairs.

    Gaps that already hold punctuation are left out; they are never queried
    at prediction time either.
    """
    examples = list(examples)
    allowed = insertion_labels([t for _, ins in examples for t in ins.values()], max_len, min_count)
    rows = []
    for sentence, inserted in examples:
        for kept, p, src in _open_slots(sentence):
            label = inserted.get(src, "")
            rows.append((extract_addbefore_features(p, kept), label if label in allowed else ""))
    if not rows:
        rows.append((extract_addbefore_features(0, []), ""))
    return nb_train(rows, ADDBEFORE_FEATURES)


def predict_insertions(sentence: Sequence[WordRecord], model: NBModel) -> list[tuple[int, InsertionDecision]]:
    """Classify every open gap; indices refer to ``sentence``."""
    out = []
    for kept, p, src in _open_slots(sentence):
        label, _ = model.classify(extract_addbefore_features(p, kept))
        out.append((src, InsertionDecision(label)))
    return out

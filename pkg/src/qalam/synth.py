"""Deterministic synthetic Arabic-like lexicon and corpus (Buckwalter).

Words are built from random triliteral roots, a handful of derivational
patterns and the usual clitics, so the lexicon is dense in the way a real
inflected word list is.  Sentences follow a small agreement grammar with
topical root choice; clause-initial ``w+`` verbs are preceded by a comma and
every sentence ends with a full stop.
"""
from __future__ import annotations

import random
from dataclasses import dataclass, field

from .lexicon import Lexicon, WordFeatures
from .textnorm import normalize_surface

ROOT_LETTERS = "btvjHxd*rzs$SDTZEgfqklmnhwy"
COMMA = "،"
STOP = "."

# (template, pos, gender, number); digits stand for root radicals
VERB_FORMS = {
    ("past", "masc", "sg"): "123",
    ("past", "fem", "sg"): "123t",
    ("past", "masc", "pl"): "123wA",
    ("pres", "masc", "sg"): "y123",
    ("pres", "fem", "sg"): "t123",
    ("pres", "masc", "pl"): "y123wn",
}
NOUN_STEMS = ("12A3", "1A23", "m123", "t12y3")
ADJ_STEMS = ("12y3",)
NOMINAL_SUFFIX = {
    ("masc", "sg"): "",
    ("fem", "sg"): "p",
    ("masc", "pl"): "wn",
    ("fem", "pl"): "At",
    ("masc", "du"): "An",
}
NOMINAL_PREFIX = {
    "": "", "Al": "the", "w": "and", "wAl": "and", "b": "with", "bAl": "with",
    "l": "for", "ll": "for", "k": "like",
}
VERB_PREFIX = {"": "", "w": "and", "f": "so"}

# (surface, pos) stop words
FUNCTION_WORDS = (
    ("fy", "prep"), ("mn", "prep"), ("ElY", "prep"), ("<lY", "prep"), ("En", "prep"),
    ("mE", "prep"), ("byn", "prep"), ("Hyv", "conj"), ("bmA", "conj"), (">n", "conj"),
    (">nhA", "conj"), ("lkn", "conj"), ("vm", "conj"), (">w", "conj"), ("hw", "pron"),
    ("hy", "pron"), ("hm", "pron"), ("h*A", "dem"), ("h*h", "dem"), ("*lk", "dem"),
    ("Al*y", "rel"), ("Alty", "rel"), ("qd", "part"), ("lA", "part"), ("lm", "part"),
    ("ln", "part"), ("kl", "noun"), ("bEd", "prep"), ("qbl", "prep"), ("Ind", "prep"),
)
PREPOSITIONS = [w for w, p in FUNCTION_WORDS if p == "prep"]


def _fill(template: str, root: str) -> str:
    return "".join(root[int(c) - 1] if c.isdigit() else c for c in template)


@dataclass
class SynthLexicon:
    lexicon: Lexicon
    roots: list[str]
    verbs: dict = field(default_factory=dict)   # (root, prefix, tense, g, n) -> surface
    nouns: dict = field(default_factory=dict)   # (root, stem, prefix, g, n) -> surface
    adjs: dict = field(default_factory=dict)    # (root, prefix, g, n) -> surface


def build_lexicon(n_roots: int = 200, seed: int = 13) -> SynthLexicon:
    """About 240 inflected forms per root; the default 200 roots give ~50k entries."""
    rng = random.Random(seed)
    roots: list[str] = []
    seen = set()
    while len(roots) < n_roots:
        r = "".join(rng.choice(ROOT_LETTERS) for _ in range(3))
        if r[0] == r[1] or r[1] == r[2] or r in seen:
            continue
        seen.add(r)
        roots.append(r)

    entries: dict[str, WordFeatures] = {}
    for w, pos in FUNCTION_WORDS:
        entries[w] = WordFeatures(pos, w, "none", "none", "")
    out = SynthLexicon(Lexicon({}), roots)

    def add(surface, feats):
        # keep the clean corpus stable under normalization ("ll" + "lqb" would collapse)
        if normalize_surface(surface) != surface:
            return False
        if surface not in entries:
            entries[surface] = feats
            return True
        return entries[surface] == feats

    for root in roots:
        verb_lemma = _fill("123", root)
        for (tense, g, n), tpl in VERB_FORMS.items():
            stem = _fill(tpl, root)
            for prc, gloss in VERB_PREFIX.items():
                surface = prc + stem
                if add(surface, WordFeatures("verb", verb_lemma, g, n, gloss)):
                    out.verbs[(root, prc, tense, g, n)] = surface
        for kind, stems, table in (("noun", NOUN_STEMS, out.nouns), ("adj", ADJ_STEMS, out.adjs)):
            for stem_tpl in stems:
                base = _fill(stem_tpl, root)
                for (g, n), suf in NOMINAL_SUFFIX.items():
                    for prc, gloss in NOMINAL_PREFIX.items():
                        surface = prc + base + suf
                        if add(surface, WordFeatures(kind, base, g, n, gloss)):
                            key = (root, stem_tpl, prc, g, n) if kind == "noun" else (root, prc, g, n)
                            table[key] = surface
    stop = [w for w, _ in FUNCTION_WORDS]
    out.lexicon = Lexicon(entries, stop)
    return out


class CorpusGenerator:
    """Sentences over a SynthLexicon with topical, Zipf-weighted root choice."""

    def __init__(self, synth: SynthLexicon, n_topics: int = 30, seed: int = 7, vocab_roots: int | None = None):
        self.s = synth
        self.rng = random.Random(seed)
        roots = list(synth.roots[:vocab_roots] if vocab_roots else synth.roots)
        self.rng.shuffle(roots)
        per = max(1, len(roots) // n_topics)
        self.topics = [roots[i * per:(i + 1) * per] for i in range(n_topics)]
        self.all_roots = roots
        self.zipf = [1.0 / (k + 1) for k in range(per)]

    def _root(self, topic):
        if self.rng.random() < 0.15:
            return self.rng.choice(self.all_roots)
        return self.rng.choices(topic, weights=self.zipf[:len(topic)])[0]

    def _agreement(self):
        return self.rng.choices([("masc", "sg"), ("fem", "sg"), ("masc", "pl"), ("fem", "pl")],
                                weights=[5, 3, 2, 1])[0]

    def _noun(self, topic, prefix, g, n):
        for _ in range(20):
            root = self._root(topic)
            stem = self.rng.choices(NOUN_STEMS, weights=[4, 3, 2, 1])[0]
            w = self.s.nouns.get((root, stem, prefix, g, n))
            if w:
                return w, root
        return None, None

    def _adj(self, topic, prefix, g, n):
        for _ in range(20):
            w = self.s.adjs.get((self._root(topic), prefix, g, n))
            if w:
                return w
        return None

    def _verb(self, topic, prefix, g, n):
        tense = self.rng.choice(("past", "pres"))
        vn = "pl" if n == "pl" else "sg"
        vg = "masc" if vn == "pl" else g
        for _ in range(20):
            w = self.s.verbs.get((self._root(topic), prefix, tense, vg, vn))
            if w:
                return w
        return None

    def _np(self, topic, prefix="Al", g=None, n=None):
        if g is None:
            g, n = self._agreement()
        words = []
        noun, _ = self._noun(topic, prefix, g, n)
        if noun:
            words.append(noun)
        if self.rng.random() < 0.6:
            adj = self._adj(topic, "Al", g, n)
            if adj:
                words.append(adj)
        if self.rng.random() < 0.2:
            g2, n2 = self._agreement()
            other, _ = self._noun(topic, "wAl", g2, n2)
            if other:
                words.append(other)
        return words

    def _clause(self, topic, verb_prefix=""):
        g, n = self._agreement()
        words = []
        if not verb_prefix and self.rng.random() < 0.2:
            words.append(self.rng.choice(("qd", "lm", "lA")))
        verb = self._verb(topic, verb_prefix, g, n)
        if verb:
            words.append(verb)
        words += self._np(topic, "Al", g, n)
        r = self.rng.random()
        if r < 0.5:
            words.append(self.rng.choice(PREPOSITIONS))
            words += self._np(topic)
        elif r < 0.75:
            words += self._np(topic, self.rng.choice(("bAl", "ll")))
        else:
            words += self._np(topic)
        if self.rng.random() < 0.15:
            words += [self.rng.choice(("Al*y", "Alty", "Hyv"))] + self._np(topic)
        return words

    def sentence(self) -> list[str]:
        topic = self.rng.choice(self.topics)
        words = self._clause(topic)
        for _ in range(self.rng.choice((0, 0, 1, 1, 2))):
            words += [COMMA] + self._clause(topic, "w")
        return words + [STOP]

    def corpus(self, n: int) -> list[list[str]]:
        return [self.sentence() for _ in range(n)]


def make_fixture(n_sentences: int = 10000, n_roots: int = 200, seed: int = 13):
    """(SynthLexicon, clean sentences) with fixed seeds."""
    synth = build_lexicon(n_roots, seed)
    gen = CorpusGenerator(synth, seed=seed + 1)
    return synth, gen.corpus(n_sentences)

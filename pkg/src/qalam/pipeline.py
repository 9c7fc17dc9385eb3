"""Error detection and the staged correction pipeline, plus training."""
from __future__ import annotations

import json
import logging
from dataclasses import asdict, dataclass, field
from pathlib import Path
from typing import Sequence

from . import channel, classifiers, context, lm as lmmod
from .classifiers import EditModels, NBModel
from .evaluation import Correction, GoldAnnotation, apply_corrections
from .lexicon import Lexicon, WordRecord, load_lexicon, write_lexicon
from .segmentation import correct_merge, correct_split
from .textnorm import Token, TokenKind, normalize

log = logging.getLogger(__name__)

STAGES = ("E", "A", "M", "S")
STAGE_NAMES = {"E": "edit", "A": "add_before", "M": "merge", "S": "split"}


class TrainingError(ValueError):
    pass


@dataclass
class PipelineConfig:
    stages: tuple[str, ...] = STAGES
    boost: float = channel.DEFAULT_BOOST
    keyboard: bool = True
    max_distance: int = 2
    candidate_cap: int | None = channel.DEFAULT_CAP
    edit_min_posterior: float = 0.0
    segmentation_threshold: float = 0.0
    max_negatives: int = 20
    n_bins: int = classifiers.N_BINS
    insertion_max_len: int = 3
    insertion_min_count: int = 5
    top_lemmas: int = context.TOP_LEMMAS
    seed: int = 0

    def __post_init__(self):
        bad = set(self.stages) - set(STAGES)
        if bad:
            raise ValueError(f"unknown stages {sorted(bad)}")
        self.stages = tuple(s for s in STAGES if s in set(self.stages))

    def with_stages(self, stages) -> "PipelineConfig":
        d = asdict(self)
        d["stages"] = tuple(stages)
        return PipelineConfig(**d)


def parse_stages(text: str) -> tuple[str, ...]:
    """'E,A,M,S' -> ('E', 'A', 'M', 'S'); raises ValueError on unknown letters."""
    items = [s.strip().upper() for s in text.split(",") if s.strip()]
    bad = [s for s in items if s not in STAGES]
    if bad:
        raise ValueError(f"unknown stage(s) {', '.join(bad)}; choose from {','.join(STAGES)}")
    return tuple(s for s in STAGES if s in items)


@dataclass
class TrainedSystem:
    lexicon: Lexicon
    lm: lmmod.LanguageModel
    cm: channel.ConfusionMatrix
    collocation: context.CollocationModel
    cooccurrence: context.CooccurrenceModel
    edit_nb: NBModel | None
    addbefore_nb: NBModel | None
    config: PipelineConfig = field(default_factory=PipelineConfig)

    def edit_models(self, config: PipelineConfig | None = None) -> EditModels:
        cfg = config or self.config
        return EditModels(self.lexicon, self.lm, self.cm, self.collocation, self.cooccurrence,
                          cfg.boost, cfg.keyboard, cfg.max_distance, cfg.candidate_cap)

    FILES = ("lexicon.tsv", "stoplist.txt", "lm.arpa", "confusion.tsv", "context.tsv",
             "edit_nb.tsv", "addbefore_nb.tsv", "config.json")

    def save(self, directory) -> list[Path]:
        d = Path(directory)
        d.mkdir(parents=True, exist_ok=True)
        write_lexicon(self.lexicon, d / "lexicon.tsv", d / "stoplist.txt")
        lmmod.write_arpa(self.lm, d / "lm.arpa")
        self.cm.write(d / "confusion.tsv")
        context.write_context_models(self.collocation, self.cooccurrence, d / "context.tsv")
        for name, model in (("edit_nb.tsv", self.edit_nb), ("addbefore_nb.tsv", self.addbefore_nb)):
            if model is None:
                (d / name).write_text("", encoding="utf-8")
            else:
                model.write(d / name)
        cfg = asdict(self.config)
        (d / "config.json").write_text(json.dumps(cfg, indent=2, sort_keys=True) + "\n", encoding="utf-8")
        return [d / f for f in self.FILES]

    @classmethod
    def load(cls, directory) -> "TrainedSystem":
        d = Path(directory)
        lexicon = load_lexicon(d / "lexicon.tsv", d / "stoplist.txt")
        coll, cooc = context.read_context_models(d / "context.tsv")
        nbs = []
        for name in ("edit_nb.tsv", "addbefore_nb.tsv"):
            p = d / name
            nbs.append(NBModel.read(p) if p.stat().st_size else None)
        cfg = json.loads((d / "config.json").read_text(encoding="utf-8"))
        return cls(lexicon, lmmod.read_arpa(d / "lm.arpa"), channel.ConfusionMatrix.read(d / "confusion.tsv"),
                   coll, cooc, nbs[0], nbs[1], PipelineConfig(**cfg))


def detect(record: WordRecord, lexicon: Lexicon) -> bool:
    """True when a word token has no analysis and is not in the dictionary."""
    if record.kind is not TokenKind.WORD:
        return False
    if record.has_analysis:
        return False
    return lexicon.lookup(record.surface) is None


def normalize_record(record: WordRecord, lexicon: Lexicon) -> WordRecord:
    token = normalize(record.token)
    if token is record.token:
        if record.features is None and token.kind is TokenKind.WORD:
            return WordRecord(token, lexicon.lookup(token.surface))
        return record
    feats = record.features
    if token.kind is TokenKind.WORD:
        feats = lexicon.lookup(token.surface) or feats
    return WordRecord(token, feats)


@dataclass
class _Seg:
    start: int
    end: int
    records: list
    kind: str | None = None

    @property
    def tokens(self):
        return [r.surface for r in self.records]


def _flatten(segs):
    records, owner = [], []
    for k, s in enumerate(segs):
        records.extend(s.records)
        owner.extend([k] * len(s.records))
    return records, owner


def correct_sentence(sentence: Sequence[WordRecord], system: TrainedSystem,
                     config: PipelineConfig | None = None) -> tuple[list[str], list[Correction]]:
    """Run normalization, detection and the enabled stages in E, A, M, S order.

    Corrections are expressed against the source token positions, so
    ``apply_corrections(source, corrections)`` rebuilds the output.
    """
    cfg = config or system.config
    lex = system.lexicon
    source = [r.surface for r in sentence]
    normed = [normalize_record(r, lex) for r in sentence]
    flagged = [detect(r, lex) for r in normed]
    segs = [_Seg(i, i + 1, [r], "normalize" if r.surface != source[i] else None)
            for i, r in enumerate(normed)]

    if "E" in cfg.stages:
        models = system.edit_models(cfg)
        for i in range(len(segs)):
            if not flagged[i]:
                continue
            current, _ = _flatten(segs)
            dec = classifiers.correct_edit(current[i], i, current, models, system.edit_nb)
            if dec.chosen is not None and dec.posterior >= cfg.edit_min_posterior:
                segs[i].records = [lex.record(dec.chosen)]
                segs[i].kind = "edit"

    if "A" in cfg.stages and system.addbefore_nb is not None:
        current, owner = _flatten(segs)
        inserts = []
        for idx, dec in classifiers.predict_insertions(current, system.addbefore_nb):
            if not dec.token:
                continue
            at = segs[owner[idx]].start if idx < len(current) else len(source)
            inserts.append((at, _Seg(at, at, [WordRecord(Token.of(dec.token))], "add_before")))
        for at, seg in sorted(inserts, key=lambda t: -t[0]):
            k = next((k for k, s in enumerate(segs) if s.start >= at), len(segs))
            segs.insert(k, seg)

    def plain_word(k):
        s = segs[k]
        return s.end - s.start == 1 and len(s.records) == 1 and normed[s.start].kind is TokenKind.WORD \
            and s.kind in (None, "normalize", "edit")

    if "M" in cfg.stages:
        k = 0
        while k + 1 < len(segs):
            a, b = segs[k], segs[k + 1]
            if plain_word(k) and plain_word(k + 1) and a.end == b.start and (flagged[a.start] or flagged[b.start]):
                current, owner = _flatten(segs)
                pos = owner.index(k)
                prop = correct_merge([r.surface for r in current], pos, lex, system.lm,
                                     (normed[a.start].surface, normed[b.start].surface),
                                     cfg.segmentation_threshold)
                if prop is not None:
                    segs[k:k + 2] = [_Seg(a.start, b.end, [lex.record(prop.replacement[0])], "merge")]
            k += 1

    if "S" in cfg.stages:
        for k in range(len(segs)):
            s = segs[k]
            if not plain_word(k) or not flagged[s.start]:
                continue
            word = normed[s.start].surface
            if len(word) < 4:
                continue
            current, owner = _flatten(segs)
            pos = owner.index(k)
            prop = correct_split(word, [r.surface for r in current], pos, lex, system.lm,
                                 cfg.segmentation_threshold)
            if prop is not None:
                s.records = [lex.record(t) for t in prop.replacement]
                s.kind = "split"

    corrections = []
    for s in segs:
        original = tuple(source[s.start:s.end])
        replacement = tuple(s.tokens)
        if replacement != original:
            corrections.append(Correction(s.kind or "normalize", s.start, s.end, original, replacement))
    output, _ = _flatten(segs)
    return [r.surface for r in output], corrections


def _check_alignment(sentences, gold):
    for sent, ann in zip(sentences, gold):
        if [r.surface for r in sent] != list(ann.tokens):
            raise TrainingError(f"sentence {ann.sid}: gold tokens do not match the corpus")
    if len(gold) > len(sentences):
        raise TrainingError(f"sentence {gold[len(sentences)].sid}: gold has no corpus sentence "
                            f"({len(sentences)} sentences, {len(gold)} annotations)")
    if len(sentences) > len(gold):
        raise TrainingError(f"corpus sentence {len(gold)} has no gold annotation "
                            f"({len(sentences)} sentences, {len(gold)} annotations)")


def lm_vocabulary(lexicon: Lexicon, corpus) -> set[str]:
    """Dictionary words plus every punctuation and digit token in ``corpus``."""
    extra = {t for s in corpus for t in s if Token.of(t).kind is not TokenKind.WORD}
    return set(lexicon.entries) | extra


def train_system(sentences: Sequence[Sequence[WordRecord]], gold: Sequence[GoldAnnotation], lexicon: Lexicon,
                 lm_corpus: Sequence[Sequence[str]] | None = None,
                 config: PipelineConfig | None = None) -> TrainedSystem:
    """Fit every sub-model from a corpus aligned with its gold corrections."""
    cfg = config or PipelineConfig()
    _check_alignment(sentences, gold)
    normed = [[normalize_record(r, lexicon) for r in sent] for sent in sentences]
    corrected = [apply_corrections([r.surface for r in sent], ann.corrections)
                 for sent, ann in zip(normed, gold)]

    lm_sents = [list(s) for s in (lm_corpus if lm_corpus is not None else corrected)]
    lm = lmmod.arpa_rounded(lmmod.build_lm(lm_sents, lm_vocabulary(lexicon, lm_sents)))
    log.info("language model: %d n-grams", len(lm.probs))

    pairs, edit_instances, insert_examples = [], [], []
    for sent, ann in zip(normed, gold):
        inserted = {}
        for c in ann.corrections:
            if c.kind == "edit" and len(c.original) == 1 and len(c.replacement) == 1:
                wrong = sent[c.start].surface
                pairs.append((wrong, c.replacement[0]))
                edit_instances.append((sent, c.start, c.replacement[0]))
            elif c.kind == "add_before" and len(c.replacement) == 1:
                inserted[c.start] = c.replacement[0]
        insert_examples.append((sent, inserted))
    cm = channel.train_confusion(pairs, max_distance=cfg.max_distance)
    log.info("confusion matrix: %d pairs, %d beyond radius", len(pairs), cm.skipped)

    annotated = [[lexicon.record(t) for t in s] for s in corrected]
    ranked = context.top_lemmas(annotated, cfg.top_lemmas)
    coll = context.train_collocation(annotated, lemmas=ranked)
    cooc = context.train_cooccurrence(annotated, lexicon, lemmas=ranked)

    system = TrainedSystem(lexicon, lm, cm, coll, cooc, None, None, cfg)
    system.edit_nb = classifiers.train_edit_classifier(edit_instances, system.edit_models(),
                                                       cfg.max_negatives, cfg.seed, cfg.n_bins)
    system.addbefore_nb = classifiers.train_addbefore(insert_examples, cfg.insertion_max_len,
                                                      cfg.insertion_min_count)
    return system

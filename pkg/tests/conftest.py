import sys
from pathlib import Path

import pytest

sys.path.insert(0, str(Path(__file__).parent))

from qalam.lexicon import Lexicon, WordFeatures  # noqa: E402
from qalam.synth import build_lexicon  # noqa: E402


@pytest.fixture(scope="session")
def synth_lexicon():
    """The ~50k-entry root-and-pattern lexicon (fixed seed)."""
    return build_lexicon()


def feats(pos, lemma, gender="none", number="none", pregloss=""):
    return WordFeatures(pos, lemma, gender, number, pregloss)


@pytest.fixture
def tiny_lexicon():
    entries = {
        "ktb": feats("verb", "ktb", "masc", "sg"),
        "ktAb": feats("noun", "ktAb", "masc", "sg"),
        "kAtb": feats("noun", "kAtb", "masc", "sg"),
        "AlrjAl": feats("noun", "rjl", "masc", "pl", "the"),
        "fy": feats("prep", "fy"),
        "byn": feats("prep", "byn"),
    }
    return Lexicon(entries, ["fy", "byn"])


RATES = {"edit": 0.05, "add_before": 0.03, "merge": 0.02, "split": 0.02}


@pytest.fixture(scope="session")
def small_run(synth_lexicon):
    """A system trained on 1200 noisy sentences plus 300 held-out ones."""
    from qalam.injection import inject_errors
    from qalam.pipeline import PipelineConfig, train_system
    from qalam.synth import CorpusGenerator

    clean = CorpusGenerator(synth_lexicon, seed=21).corpus(1500)
    lex = synth_lexicon.lexicon
    noisy, gold = inject_errors(clean, lex, RATES, seed=3)
    records = [[lex.record(t) for t in s] for s in noisy]
    system = train_system(records[:1200], gold[:1200], lex, config=PipelineConfig(seed=0))
    return system, clean[1200:], records[1200:], gold[1200:]

import random

import pytest

from qalam.lexicon import (
    CorpusFormatError, Lexicon, LexiconError, WordFeatures, WordRecord, is_stopword, load_lexicon,
    lookup, read_column_corpus, write_column_corpus, write_lexicon,
)
from qalam.textnorm import Token

ROWS = [
    "ktAb\tnoun\tktAb\tmasc\tsg\t",
    "ktb\tverb\tktb\tmasc\tsg\t",
    "wAlktAb\tnoun\tktAb\tmasc\tsg\tand",
    "byn\tprep\tbyn\tnone\tnone\t",
    "AstEmAr\tnoun\tAstEmAr\tmasc\tsg\t",
]


@pytest.fixture
def dict_file(tmp_path):
    path = tmp_path / "dict.tsv"
    path.write_text("\n".join(ROWS) + "\n", encoding="utf-8")
    stop = tmp_path / "stop.txt"
    stop.write_text("byn\nfy\n", encoding="utf-8")
    return path, stop


def test_load_and_lookup(dict_file):
    lex = load_lexicon(*dict_file)
    assert len(lex) == 5
    assert lookup(lex, "ktAb") == WordFeatures("noun", "ktAb", "masc", "sg", "")
    assert lookup(lex, "xqzv") is None
    assert lex.lookup("wAlktAb").pregloss == "and"


def test_malformed_row_skipped(tmp_path):
    path = tmp_path / "d.tsv"
    rows = ROWS[:4] + ["broken\tnoun\tx"]
    path.write_text("\n".join(rows) + "\n", encoding="utf-8")
    lex = load_lexicon(path)
    assert len(lex) == 4 and lex.skipped == 1


def test_bad_enum_value_is_malformed(tmp_path):
    path = tmp_path / "d.tsv"
    path.write_text(ROWS[0] + "\nzz\tnoun\tzz\tneuter\tsg\t\n", encoding="utf-8")
    lex = load_lexicon(path)
    assert len(lex) == 1 and lex.skipped == 1


def test_first_row_wins(tmp_path):
    path = tmp_path / "d.tsv"
    path.write_text("ktb\tverb\tktb\tmasc\tsg\t\nktb\tnoun\tktb\tmasc\tpl\t\n", encoding="utf-8")
    assert load_lexicon(path).lookup("ktb").pos == "verb"


def test_load_errors(tmp_path):
    with pytest.raises(LexiconError, match="missing.tsv"):
        load_lexicon(tmp_path / "missing.tsv")
    empty = tmp_path / "empty.tsv"
    empty.write_text("only\tthree\tcols\n", encoding="utf-8")
    with pytest.raises(LexiconError):
        load_lexicon(empty)


def test_stopwords(dict_file):
    lex = load_lexicon(*dict_file)
    assert is_stopword(lex, "byn")
    assert not is_stopword(lex, "AstEmAr")
    assert not is_stopword(lex, "")
    # stoplist membership does not hide dictionary features
    assert lex.lookup("byn").pos == "prep"


def test_lookup_agrees_with_linear_scan(tmp_path, synth_lexicon):
    path = tmp_path / "big.tsv"
    write_lexicon(synth_lexicon.lexicon, path)
    lex = load_lexicon(path)
    rows = [line.split("\t") for line in path.read_text(encoding="utf-8").splitlines()]
    rng = random.Random(3)
    probes = [rng.choice(rows)[0] for _ in range(500)] + [rng.choice(rows)[0][::-1] for _ in range(500)]

    def scan(s):
        for r in rows:
            if r[0] == s:
                return WordFeatures(*r[1:])
        return None

    for s in probes:
        assert lex.lookup(s) == scan(s)
    assert all(lex.lookup(r[0]) is not None for r in rows)


def test_record_uses_dictionary():
    lex = Lexicon({"ktb": WordFeatures("verb", "ktb", "masc", "sg", "")})
    assert lex.record("ktb").has_analysis
    assert not lex.record("xqzv").has_analysis
    assert lex.record("xqzv").lemma == "xqzv"
    assert not lex.record(".").has_analysis


def test_column_corpus_round_trip(tmp_path):
    sents = [
        [WordRecord(Token.of("ktb"), WordFeatures("verb", "ktb", "masc", "sg", "")),
         WordRecord(Token.of("xqzv"), None), WordRecord(Token.of("."), None)],
        [WordRecord(Token.of("wAlktAb"), WordFeatures("noun", "ktAb", "masc", "sg", "and"))],
    ]
    path = tmp_path / "c.col"
    write_column_corpus(sents, path)
    back = read_column_corpus(path)
    assert back == sents
    assert [len(s) for s in back] == [3, 1]
    assert not back[0][1].has_analysis and back[0][1].features is None
    path2 = tmp_path / "c2.col"
    write_column_corpus(back, path2)
    assert path2.read_bytes() == path.read_bytes()


def test_column_corpus_errors(tmp_path):
    path = tmp_path / "bad.col"
    path.write_text("ktb\tverb\tktb\tmasc\tsg\t\t1\nxx\tonly\n", encoding="utf-8")
    with pytest.raises(CorpusFormatError, match=":2:"):
        read_column_corpus(path)
    empty = tmp_path / "empty.col"
    empty.write_text("", encoding="utf-8")
    assert read_column_corpus(empty) == []

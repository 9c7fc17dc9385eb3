import random

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from oracles import brute_candidates, dl
from qalam import channel
from qalam.channel import (
    ConfusionMatrix, DistanceError, EditOp, OpKind, align_edits, apply_edits, channel_prob, edit_distance,
    generate_candidates, noisy_channel_score, substitution_boost, train_confusion,
)
from qalam.lexicon import Lexicon, WordFeatures
from qalam.lm import build_lm
from qalam.textnorm import LETTERS

short = st.text(alphabet="abcAt", max_size=7)


def perturb(word, rng, n):
    for _ in range(n):
        op = rng.randrange(4)
        i = rng.randrange(len(word) + 1)
        if op == 0 or not word:
            word = word[:i] + rng.choice(LETTERS) + word[i:]
        elif op == 1 and i < len(word):
            word = word[:i] + word[i + 1:]
        elif op == 2 and i < len(word):
            word = word[:i] + rng.choice(LETTERS) + word[i + 1:]
        elif i + 1 < len(word):
            word = word[:i] + word[i + 1] + word[i] + word[i + 2:]
    return word


def test_distance_examples():
    # one substitution (b -> A); the DP oracle agrees
    assert edit_distance("ktbb", "ktAb") == dl("ktbb", "ktAb") == 1
    assert edit_distance("ktbb", "kAtb") == 2
    assert edit_distance("AB", "BA") == 1
    assert edit_distance("", "abc") == 3
    assert edit_distance("ktb", "ktb") == 0


@given(short, short)
@settings(max_examples=300)
def test_distance_matches_rapidfuzz(a, b):
    assert edit_distance(a, b) == dl(a, b)


@given(short, short, short)
@settings(max_examples=200)
def test_distance_metric_laws(a, b, c):
    assert edit_distance(a, b) == edit_distance(b, a)
    assert edit_distance(a, c) <= edit_distance(a, b) + edit_distance(b, c)


def test_align_examples():
    assert align_edits("AlrjAl", "AlrjAl") == []
    assert align_edits("ktb", "ktAb") == [EditOp(OpKind.DELETE, 2, ("A", "t"))]
    assert align_edits("BA", "AB") == [EditOp(OpKind.TRANSPOSE, 0, ("A", "B"))]


def test_align_insert_at_word_start_uses_marker():
    (op,) = align_edits("wktb", "ktb")
    assert op == EditOp(OpKind.INSERT, 0, ("w", "#"))


def test_align_beyond_radius():
    with pytest.raises(DistanceError):
        align_edits("abcdef", "uvwxyz")


def test_alignment_replay_random_pairs():
    rng = random.Random(11)
    for _ in range(1000):
        correct = "".join(rng.choice(LETTERS) for _ in range(rng.randint(1, 9)))
        wrong = perturb(correct, rng, rng.randint(1, 3))
        ops = align_edits(wrong, correct, max_distance=None)
        assert len(ops) == dl(wrong, correct)
        assert apply_edits(correct, ops) == wrong


@given(short, short)
@settings(max_examples=300)
def test_alignment_replay_property(a, b):
    ops = align_edits(a, b, max_distance=None)
    assert apply_edits(b, ops) == a
    assert len(ops) == edit_distance(a, b)


def test_gapped_transposition_replay():
    # unrestricted DL: "ca" -> "abc" costs 2 via a transposition plus an insertion
    ops = align_edits("abc", "ca", max_distance=None)
    assert len(ops) == 2
    assert apply_edits("ca", ops) == "abc"


def test_add_one_exact_values():
    empty = ConfusionMatrix(alphabet_size=40)
    assert channel_prob(empty, "kxb", "ktb") == 1 / 40
    cm = train_confusion([("b", "a")], alphabet_size=40)
    assert cm.bg1["a"] == 1
    assert channel_prob(cm, "b", "a") == 2 / 41


def test_channel_no_edit_is_one():
    assert channel_prob(ConfusionMatrix(), "ktAb", "ktAb") == 1.0


def test_training_counts():
    cm = train_confusion([("ktAb", "ktAb")])
    assert not (cm.sub or cm.ins or cm.dele or cm.trans)
    cm = train_confusion([("ktb", "ktAb")])
    assert cm.dele[("t", "A")] == 1
    cm2 = train_confusion([("ktb", "ktAb")] * 2)
    assert cm2.dele[("t", "A")] == 2 and cm2.bg2[("t", "A")] == 2 * cm.bg2[("t", "A")]


def test_training_skips_far_pairs():
    cm = train_confusion([("abcdef", "uvwxyz"), ("ktb", "ktAb")])
    assert cm.skipped == 1
    assert sum(cm.dele.values()) == 1


def test_op_probabilities_conditioning():
    cm = train_confusion([("ktb", "ktAb"), ("wktb", "ktb"), ("ktAb", "ktbA")], alphabet_size=36)
    n = 36
    assert cm.op_prob(EditOp(OpKind.DELETE, 2, ("A", "t"))) == (1 + 1) / (cm.bg2[("t", "A")] + n)
    assert cm.op_prob(EditOp(OpKind.INSERT, 0, ("w", "#"))) == (1 + 1) / (cm.bg1["#"] + n)
    assert cm.op_prob(EditOp(OpKind.TRANSPOSE, 2, ("b", "A"))) == (1 + 1) / (cm.bg2[("b", "A")] + n)


def test_channel_prob_monotone_in_count():
    base = train_confusion([("ktb", "ktAb")])
    more = train_confusion([("ktb", "ktAb"), ("ktb", "ktAb"), ("ktb", "ktAb")])
    assert 0 < channel_prob(base, "ktb", "ktAb") < channel_prob(more, "ktb", "ktAb") <= 1


def test_confusion_round_trip(tmp_path):
    cm = train_confusion([("ktb", "ktAb"), ("wktb", "ktb"), ("kxb", "ktb"), ("ktAb", "ktbA")])
    cm.write(tmp_path / "cm.tsv")
    back = ConfusionMatrix.read(tmp_path / "cm.tsv")
    for attr in ("sub", "ins", "dele", "trans", "bg1", "bg2", "alphabet_size"):
        assert getattr(back, attr) == getattr(cm, attr)


def test_substitution_boost_groups():
    assert substitution_boost("p", "h") == 1.5
    assert substitution_boost("Y", "y") == 1.5
    assert substitution_boost("h", "p", k=2.0) == 2.0
    assert substitution_boost("k", "m", keyboard=False) == 1.0
    assert substitution_boost("b", "E") == 1.0


def test_keyboard_neighbours_symmetric():
    for a, near in channel.KEYBOARD_NEIGHBOURS.items():
        for b in near:
            assert a in channel.KEYBOARD_NEIGHBOURS[b]


def test_boost_scales_score_exactly():
    lm = build_lm([["ktb", "fy"], ["ktb"]], {"ktb", "fy", "ktA", "kth"})
    cm = ConfusionMatrix()
    grouped = noisy_channel_score(cm, lm, "ktp", "kth", k=1.5)
    # same channel and equal LM mass for the two unseen candidates; only the boost differs
    assert lm.mixture_prob("kth") == lm.mixture_prob("ktA")
    assert grouped / noisy_channel_score(cm, lm, "ktp", "ktA", k=1.5) == pytest.approx(1.5, rel=1e-12)
    assert noisy_channel_score(cm, lm, "ktp", "ktA", k=1.5) > 0


def test_noisy_channel_score_arithmetic():
    lm = build_lm([["a", "ktb"], ["ktb", "fy"], ["a", "fy"]], {"a", "ktb", "fy"})
    cm = train_confusion([("kxb", "ktb")], alphabet_size=40)
    p_channel = (1 + 1) / (cm.bg1["t"] + 40)
    p_lm = (lm.prob("ktb") + lm.prob("ktb", ["a"]) + lm.prob("ktb", ["<s>", "a"])) / 3
    got = noisy_channel_score(cm, lm, "kxb", "ktb", ["<s>", "a"], keyboard=False)
    assert got == pytest.approx(p_channel * p_lm, rel=1e-12)


def test_argmax_unchanged_when_boost_is_one():
    lm = build_lm([["ktb", "ktAb", "kAtb"]], {"ktb", "ktAb", "kAtb"})
    cm = train_confusion([("ktb", "ktAb")])
    cands = ["ktb", "ktAb", "kAtb"]
    boosted = max(cands, key=lambda w: noisy_channel_score(cm, lm, "ktbb", w, k=1.0))
    base = max(cands, key=lambda w: channel_prob(cm, "ktbb", w) * lm.mixture_prob(w))
    assert boosted == base


def test_candidates_small_lexicon():
    feats = WordFeatures("noun", "x", "none", "none", "")
    lex = Lexicon({w: feats for w in ("ktb", "ktAb", "kAtb")})
    got = [(c.surface, c.distance) for c in generate_candidates("ktbb", lex)]
    assert got == [("ktAb", 1), ("ktb", 1), ("kAtb", 2)]
    assert "ktb" not in {c.surface for c in generate_candidates("ktb", lex)}
    assert generate_candidates("ktbb", Lexicon({})) == []


def test_candidate_cap_truncates_in_order():
    feats = WordFeatures("noun", "x", "none", "none", "")
    lex = Lexicon({w: feats for w in ("ab", "ac", "ad", "abcd")})
    full = generate_candidates("a", lex, cap=None)
    assert [c.surface for c in generate_candidates("a", lex, cap=2)] == [c.surface for c in full[:2]]


@pytest.mark.parametrize("max_distance", [1, 2])
def test_candidates_equal_brute_force(synth_lexicon, max_distance):
    lex = synth_lexicon.lexicon
    words = sorted(lex.entries)
    rng = random.Random(2024 + max_distance)
    for _ in range(100):
        x = perturb(rng.choice(words), rng, rng.randint(1, 3)) or "A"
        got = {(c.surface, c.distance) for c in generate_candidates(x, lex, max_distance, cap=None)}
        assert got == brute_candidates(x, words, max_distance), x

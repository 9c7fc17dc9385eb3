"""Acceptance criteria, one PASS/FAIL line each.

Run with ``pytest tests/test_acceptance.py -v``; the verdict lines are
printed outside pytest's capture so they show up in the normal output.
"""
import random
import shutil
import time
from pathlib import Path

import pytest

from oracles import KneserNeyOracle, brute_candidates
from qalam import channel
from qalam.classifiers import nb_train
from qalam.cli import main
from qalam.evaluation import ScoreReport, score
from qalam.injection import inject_errors, random_edit
from qalam.lm import BOS, build_lm
from qalam.pipeline import PipelineConfig, correct_sentence, train_system
from qalam.synth import make_fixture

RATES = {"edit": 0.05, "add_before": 0.03, "merge": 0.02, "split": 0.02}
SEED = 20240101


def verdict(capsys, name, ok, detail, elapsed, limit):
    ok = ok and elapsed < limit
    with capsys.disabled():
        print(f"\n{'PASS' if ok else 'FAIL'} {name}: {detail} [{elapsed:.2f}s < {limit}s]")
    assert ok, f"{name}: {detail} in {elapsed:.2f}s"


def test_scorer_arithmetic(capsys):
    t0 = time.perf_counter()
    rep = ScoreReport(9860, 17057, 16659)
    got = (round(rep.precision, 4), round(rep.recall, 4), round(rep.f1, 4))
    ok = all(abs(a - b) <= 1e-4 for a, b in zip((rep.precision, rep.recall, rep.f1), (0.5781, 0.5919, 0.5849)))
    verdict(capsys, "scorer arithmetic", ok, f"P/R/F1 = {got}", time.perf_counter() - t0, 1)


def toy_corpora():
    rng = random.Random(11)
    out = []
    for k in range(5):
        vocab = [f"w{i}" for i in range(4 + 3 * k)]
        sents = [[rng.choice(vocab) for _ in range(rng.randint(1, 8))] for _ in range(10 * (k + 1))]
        out.append((sents, set(vocab) | {"zz"}))
    return out


def test_mkn_oracle(capsys):
    t0 = time.perf_counter()
    worst_diff, worst_norm = 0.0, 0.0
    rng = random.Random(12)
    for sents, vocab in toy_corpora():
        lm = build_lm(sents, vocab)
        oracle = KneserNeyOracle(sents, vocab)
        words = sorted(lm.vocabulary)
        ctx_words = words + [BOS]
        for _ in range(20):
            ctx = [rng.choice(ctx_words), rng.choice(ctx_words)]
            total = 0.0
            for w in words:
                p = lm.prob(w, ctx)
                worst_diff = max(worst_diff, abs(p - oracle.prob(w, ctx)))
                total += p
            worst_norm = max(worst_norm, abs(total - 1.0))
    ok = worst_diff <= 1e-9 and worst_norm <= 1e-6
    verdict(capsys, "MKN oracle equivalence", ok,
            f"max |p - oracle| = {worst_diff:.2e}, max |sum - 1| = {worst_norm:.2e} over 100 contexts",
            time.perf_counter() - t0, 10)


def test_candidate_oracle(capsys, synth_lexicon):
    t0 = time.perf_counter()
    lex = synth_lexicon.lexicon
    words = sorted(lex.entries)
    rng = random.Random(13)
    mismatches = 0
    for d in (1, 2):
        for _ in range(100):
            w = rng.choice(words)
            q = random_edit(random_edit(w, rng), rng) if d == 2 else random_edit(w, rng)
            got = {(c.surface, c.distance) for c in channel.generate_candidates(q, lex, d, cap=None)}
            want = set(brute_candidates(q, words, d))
            mismatches += got != want
    verdict(capsys, "candidate generation oracle", mismatches == 0,
            f"{mismatches} mismatching queries of 200 on {len(words)} entries",
            time.perf_counter() - t0, 60)


def test_channel_arithmetic(capsys):
    t0 = time.perf_counter()
    a = channel.channel_prob(channel.ConfusionMatrix(alphabet_size=40), "kxb", "ktb")
    b = channel.channel_prob(channel.train_confusion([("b", "a")], alphabet_size=40), "b", "a")
    rng = random.Random(14)
    bad = 0
    for _ in range(1000):
        x = "".join(rng.choice("ktbAlmwy") for _ in range(rng.randint(0, 7)))
        y = "".join(rng.choice("ktbAlmwy") for _ in range(rng.randint(0, 7)))
        ops = channel.align_edits(x, y, max_distance=None)
        bad += channel.apply_edits(y, ops) != x or len(ops) != channel.edit_distance(x, y)
    ok = a == 1 / 40 and b == 2 / 41 and bad == 0
    verdict(capsys, "channel arithmetic and replay", ok,
            f"p(kxb|ktb)={a!r} p(b|a)={b!r}, {bad} replay failures in 1000 pairs", time.perf_counter() - t0, 10)


def test_nb_correctness(capsys):
    t0 = time.perf_counter()
    four = [({"f": "a", "g": "x"}, "pos"), ({"f": "a", "g": "y"}, "pos"),
            ({"f": "b", "g": "x"}, "neg"), ({"f": "a", "g": "x"}, "neg")]
    model = nb_train(four)
    p1 = model.posteriors({"f": "a", "g": "y"})["pos"]
    p2 = model.posteriors({"f": "c", "g": "x"})["pos"]
    rng = random.Random(15)
    examples = [({"f": rng.choice("abc"), "h": rng.random()}, rng.choice("PQR")) for _ in range(50)]
    big = nb_train(examples)
    worst = max(abs(sum(big.posteriors({"f": rng.choice("abcd"), "h": rng.uniform(-1, 2)}).values()) - 1)
                for _ in range(1000))
    ok = abs(p1 - 0.75) <= 1e-12 and abs(p2 - 0.4) <= 1e-12 and worst <= 1e-12
    verdict(capsys, "naive Bayes correctness", ok,
            f"P(pos|a,y)={p1:.15f} P(pos|c,x)={p2:.15f}, max |sum - 1| = {worst:.1e}", time.perf_counter() - t0, 5)


@pytest.fixture(scope="module")
def synthetic_run():
    t0 = time.perf_counter()
    synth, clean = make_fixture(10000)
    lex = synth.lexicon
    noisy, gold = inject_errors(clean, lex, RATES, seed=SEED)
    records = [[lex.record(t) for t in s] for s in noisy]
    cut = int(0.8 * len(records))
    system = train_system(records[:cut], gold[:cut], lex, config=PipelineConfig(seed=SEED))
    return system, records[cut:], gold[cut:], time.perf_counter() - t0


def run_stages(system, records, gold, stages):
    cfg = system.config.with_stages(stages)
    proposals = {g.sid: correct_sentence(s, system, cfg)[1] for s, g in zip(records, gold)}
    return proposals


def test_end_to_end_synthetic(capsys, synthetic_run):
    system, records, gold, train_time = synthetic_run
    t0 = time.perf_counter()
    proposals = run_stages(system, records, gold, ("E", "A", "M", "S"))
    edits = score(proposals, gold, kinds=["edit"])
    overall = score(proposals, gold)
    ok = edits.precision >= 0.60 and edits.recall >= 0.60 and overall.f1 >= 0.50
    detail = (f"edit P={edits.precision:.4f} R={edits.recall:.4f} ({edits.matched}/{edits.proposed}/{edits.gold}), "
              f"overall P={overall.precision:.4f} R={overall.recall:.4f} F1={overall.f1:.4f}")
    verdict(capsys, "end-to-end synthetic round trip", ok, detail, train_time + time.perf_counter() - t0, 600)


def test_ablation_structure(capsys, synthetic_run):
    system, records, gold, _ = synthetic_run
    t0 = time.perf_counter()
    chain = [(), ("E",), ("E", "A"), ("E", "A", "M"), ("E", "A", "M", "S")]
    matched = [score(run_stages(system, records, gold, st), gold).matched for st in chain]
    single = {s: score(run_stages(system, records, gold, (s,)), gold).matched for s in "EAMS"}
    monotone = all(a <= b for a, b in zip(matched, matched[1:]))
    bounded = all(m <= matched[-1] for m in single.values())
    names = ["none", "E", "E+A", "E+A+M", "E+A+M+S"]
    detail = ", ".join(f"{n}={m}" for n, m in zip(names, matched)) + "; singles " + \
        ", ".join(f"{s}={m}" for s, m in single.items())
    verdict(capsys, "ablation structure", monotone and bounded, detail, time.perf_counter() - t0, 900)


def _cli_run(root: Path, data: Path):
    shutil.copytree(data, root / "data")
    steps = [
        ["inject", "--in", "data/clean.txt", "--lexicon", "data/lexicon.tsv", "--out", "noisy.txt",
         "--gold", "gold.m2", "--seed", "5"],
        ["train", "--corpus", "noisy.txt", "--gold", "gold.m2", "--lexicon", "data/lexicon.tsv",
         "--stoplist", "data/stoplist.txt", "--out", "model", "--seed", "5"],
        ["correct", "--model", "model", "--in", "noisy.txt", "--out", "fixed.txt", "--corrections", "fixed.m2"],
    ]
    return [main(s) for s in steps]


def test_determinism(capsys, tmp_path, monkeypatch):
    t0 = time.perf_counter()
    data = tmp_path / "seed_data"
    assert main(["synth", "--out", str(data), "--sentences", "2000"]) == 0
    codes = []
    for name in ("run1", "run2"):
        root = tmp_path / name
        root.mkdir()
        monkeypatch.chdir(root)
        codes += _cli_run(root, data)
    files = sorted(p.relative_to(tmp_path / "run1") for p in (tmp_path / "run1").rglob("*") if p.is_file())
    differ = [str(p) for p in files if (tmp_path / "run1" / p).read_bytes() != (tmp_path / "run2" / p).read_bytes()]
    manifests = [p for p in files if p.name.endswith("manifest.json")]
    ok = not any(codes) and not differ and len(manifests) == 4
    verdict(capsys, "determinism", ok,
            f"{len(files)} files compared ({len(manifests)} manifests), {len(differ)} differ {differ[:3]}",
            time.perf_counter() - t0, 600)

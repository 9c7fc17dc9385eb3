"""Command-line entry point: qalam {train,lm-build,correct,evaluate,inject,synth}.

Text corpora are one sentence per line with space-separated Buckwalter
tokens; files ending in ``.col`` are read as seven-column corpora.  Every
command that writes files also writes a JSON manifest next to its output.
"""
from __future__ import annotations

import argparse
import hashlib
import json
import logging
import os
import sys
from dataclasses import asdict
from pathlib import Path

from . import __version__, evaluation, injection, lexicon as lexmod, lm as lmmod, pipeline, synth

log = logging.getLogger("qalam")

SEED_ENV = "QALAM_SEED"


class CommandError(Exception):
    """A failure reported as ``qalam: <module>: <message>`` with exit status 1."""

    def __init__(self, module: str, message: str):
        super().__init__(f"{module}: {message}")


def sha256(path) -> str:
    h = hashlib.sha256()
    with open(path, "rb") as fh:
        for chunk in iter(lambda: fh.read(1 << 16), b""):
            h.update(chunk)
    return h.hexdigest()


def write_manifest(path, command: str, config: dict, inputs: dict, outputs: dict, seed) -> Path:
    """Write a timestamp-free manifest; identical runs give identical bytes."""
    path = Path(path)
    manifest = {
        "command": command,
        "version": __version__,
        "seed": seed,
        "config": config,
        "inputs": {k: str(v) for k, v in inputs.items() if v is not None},
        "outputs": {k: str(v) for k, v in outputs.items()},
        "fingerprints": {str(p): sha256(p) for p in
                         sorted({*(Path(v) for v in inputs.values() if v is not None),
                                 *(Path(v) for v in outputs.values())}, key=str)
                         if p.is_file()},
    }
    path.write_text(json.dumps(manifest, indent=2, sort_keys=True) + "\n", encoding="utf-8")
    return path


def read_text_corpus(path) -> list[list[str]]:
    with open(path, encoding="utf-8") as fh:
        return [line.split() for line in fh if line.strip()]


def write_text_corpus(sentences, path) -> None:
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        for sent in sentences:
            fh.write(" ".join(sent) + "\n")


def read_records(path, lexicon: lexmod.Lexicon):
    """Column corpora keep their analyses; plain text is annotated from the lexicon."""
    if str(path).endswith(".col"):
        return lexmod.read_column_corpus(path)
    return [[lexicon.record(t) for t in sent] for sent in read_text_corpus(path)]


def resolve_seed(arg_seed: int) -> int:
    env = os.environ.get(SEED_ENV)
    if env is None or env == "":
        return arg_seed
    try:
        return int(env)
    except ValueError:
        raise CommandError("cli", f"{SEED_ENV}={env!r} is not an integer") from None


def _load_lexicon(args):
    try:
        return lexmod.load_lexicon(args.lexicon, getattr(args, "stoplist", None))
    except (OSError, lexmod.LexiconError) as exc:
        raise CommandError("lexicon", str(exc)) from None


def _manifest_path(out) -> Path:
    out = Path(out)
    return out / "manifest.json" if out.is_dir() else out.with_name(out.name + ".manifest.json")


def cmd_train(args) -> int:
    seed = resolve_seed(args.seed)
    lexicon = _load_lexicon(args)
    try:
        sentences = read_records(args.corpus, lexicon)
    except lexmod.CorpusFormatError as exc:
        raise CommandError("lexicon", str(exc)) from None
    try:
        gold = evaluation.read_gold(args.gold)
    except evaluation.GoldFormatError as exc:
        raise CommandError("evaluation", str(exc)) from None
    lm_corpus = read_text_corpus(args.lm_corpus) if args.lm_corpus else None
    config = pipeline.PipelineConfig(seed=seed, boost=args.boost, keyboard=not args.no_keyboard,
                                     max_distance=args.max_distance)
    try:
        system = pipeline.train_system(sentences, gold, lexicon, lm_corpus, config)
    except pipeline.TrainingError as exc:
        raise CommandError("pipeline", str(exc)) from None
    files = system.save(args.out)
    write_manifest(Path(args.out) / "manifest.json", "train", asdict(config),
                   {"corpus": args.corpus, "gold": args.gold, "lexicon": args.lexicon,
                    "stoplist": args.stoplist, "lm_corpus": args.lm_corpus},
                   {p.name: p for p in files}, seed)
    print(f"trained model written to {args.out}")
    return 0


def cmd_lm_build(args) -> int:
    lexicon = _load_lexicon(args)
    corpus = read_text_corpus(args.corpus)
    model = lmmod.build_lm(corpus, pipeline.lm_vocabulary(lexicon, corpus))
    lmmod.write_arpa(model, args.out)
    write_manifest(_manifest_path(args.out), "lm-build", {"order": model.order},
                   {"corpus": args.corpus, "lexicon": args.lexicon}, {"arpa": args.out}, None)
    print(f"{len(model.probs)} n-grams written to {args.out}")
    return 0


def cmd_correct(args) -> int:
    try:
        system = pipeline.TrainedSystem.load(args.model)
    except (OSError, ValueError) as exc:
        raise CommandError("pipeline", f"cannot load model from {args.model}: {exc}") from None
    config = system.config.with_stages(args.stages)
    sentences = read_records(args.input, system.lexicon)
    outputs, annotations = [], []
    for sid, sent in enumerate(sentences):
        tokens, corrections = pipeline.correct_sentence(sent, system, config)
        outputs.append(tokens)
        annotations.append(evaluation.GoldAnnotation(str(sid), [r.surface for r in sent], corrections))
    write_text_corpus(outputs, args.out)
    outs = {"text": args.out}
    if args.corrections:
        evaluation.write_gold(annotations, args.corrections)
        outs["corrections"] = args.corrections
    write_manifest(_manifest_path(args.out), "correct", asdict(config),
                   {"model_" + name: Path(args.model) / name for name in system.FILES} | {"input": args.input},
                   outs, config.seed)
    n = sum(len(a.corrections) for a in annotations)
    print(f"{len(outputs)} sentences, {n} corrections")
    return 0


def cmd_evaluate(args) -> int:
    try:
        proposed = evaluation.read_gold(args.proposals)
        gold = evaluation.read_gold(args.gold)
        kinds = args.kinds.split(",") if args.kinds else None
        report = evaluation.score({a.sid: a.corrections for a in proposed}, gold, kinds)
    except (evaluation.GoldFormatError, KeyError, OSError) as exc:
        raise CommandError("evaluation", str(exc)) from None
    print(f"p={report.precision:.4f} r={report.recall:.4f} f1={report.f1:.4f} "
          f"matched={report.matched} proposed={report.proposed} gold={report.gold}")
    if args.out:
        data = asdict(report) | {"precision": report.precision, "recall": report.recall, "f1": report.f1}
        Path(args.out).write_text(json.dumps(data, indent=2, sort_keys=True) + "\n", encoding="utf-8")
        write_manifest(_manifest_path(args.out), "evaluate", {"kinds": kinds},
                       {"proposals": args.proposals, "gold": args.gold}, {"report": args.out}, None)
    return 0


def cmd_inject(args) -> int:
    seed = resolve_seed(args.seed)
    lexicon = _load_lexicon(args)
    try:
        rates = injection.parse_rates(args.rates)
    except ValueError as exc:
        raise CommandError("injection", str(exc)) from None
    clean = read_text_corpus(args.input)
    noisy, gold = injection.inject_errors(clean, lexicon, rates, seed)
    write_text_corpus(noisy, args.out)
    evaluation.write_gold(gold, args.gold)
    write_manifest(_manifest_path(args.out), "inject", {"rates": rates},
                   {"input": args.input, "lexicon": args.lexicon}, {"noisy": args.out, "gold": args.gold}, seed)
    print(f"{sum(len(g.corrections) for g in gold)} errors injected into {len(noisy)} sentences")
    return 0


def cmd_synth(args) -> int:
    seed = resolve_seed(args.seed)
    fixture, clean = synth.make_fixture(args.sentences, args.roots, seed)
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    lexmod.write_lexicon(fixture.lexicon, out / "lexicon.tsv", out / "stoplist.txt")
    write_text_corpus(clean, out / "clean.txt")
    write_manifest(out / "manifest.json", "synth", {"sentences": args.sentences, "roots": args.roots}, {},
                   {name: out / name for name in ("lexicon.tsv", "stoplist.txt", "clean.txt")}, seed)
    print(f"{len(fixture.lexicon)} lexicon entries, {len(clean)} sentences in {out}")
    return 0


def _stages(value: str):
    try:
        return pipeline.parse_stages(value)
    except ValueError as exc:
        raise argparse.ArgumentTypeError(str(exc)) from None


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="qalam", description=__doc__.splitlines()[0])
    parser.add_argument("--version", action="version", version=f"qalam {__version__}")
    parser.add_argument("-v", "--verbose", action="store_true", help="log progress to stderr")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("train", help="train all models from a corpus and its gold corrections")
    p.add_argument("--corpus", required=True, help="training sentences (.col or text)")
    p.add_argument("--gold", required=True, help="gold corrections aligned with --corpus")
    p.add_argument("--lexicon", required=True, help="dictionary TSV")
    p.add_argument("--stoplist", help="stop words, one per line")
    p.add_argument("--lm-corpus", help="separate text corpus for the language model")
    p.add_argument("--out", required=True, help="model directory")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--boost", type=float, default=1.5, help="substitution boost for confusable letters")
    p.add_argument("--no-keyboard", action="store_true", help="boost letter groups only, not keyboard neighbours")
    p.add_argument("--max-distance", type=int, default=2, choices=(1, 2))
    p.set_defaults(func=cmd_train)

    p = sub.add_parser("lm-build", help="estimate a trigram Kneser-Ney model and write ARPA")
    p.add_argument("--corpus", required=True)
    p.add_argument("--lexicon", required=True)
    p.add_argument("--out", required=True)
    p.set_defaults(func=cmd_lm_build)

    p = sub.add_parser("correct", help="correct sentences with a trained model")
    p.add_argument("--model", required=True)
    p.add_argument("--in", dest="input", required=True)
    p.add_argument("--out", required=True)
    p.add_argument("--corrections", help="also write the proposed corrections in gold format")
    p.add_argument("--stages", type=_stages, default=pipeline.STAGES, help="subset of E,A,M,S (default all)")
    p.set_defaults(func=cmd_correct)

    p = sub.add_parser("evaluate", help="score proposed corrections against gold")
    p.add_argument("--proposals", required=True)
    p.add_argument("--gold", required=True)
    p.add_argument("--kinds", help="comma-separated correction kinds to score")
    p.add_argument("--out", help="write the report as JSON")
    p.set_defaults(func=cmd_evaluate)

    p = sub.add_parser("inject", help="add synthetic errors to a clean corpus")
    p.add_argument("--in", dest="input", required=True)
    p.add_argument("--lexicon", required=True)
    p.add_argument("--rates", default="edit=0.05,add_before=0.03,merge=0.02,split=0.02")
    p.add_argument("--out", required=True)
    p.add_argument("--gold", required=True)
    p.add_argument("--seed", type=int, default=0)
    p.set_defaults(func=cmd_inject)

    p = sub.add_parser("synth", help="generate the synthetic lexicon and clean corpus")
    p.add_argument("--out", required=True)
    p.add_argument("--sentences", type=int, default=10000)
    p.add_argument("--roots", type=int, default=200)
    p.add_argument("--seed", type=int, default=13)
    p.set_defaults(func=cmd_synth)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(name)s: %(message)s")
    try:
        return args.func(args)
    except CommandError as exc:
        print(f"qalam: {exc}", file=sys.stderr)
        return 1
    except OSError as exc:
        print(f"qalam: io: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())

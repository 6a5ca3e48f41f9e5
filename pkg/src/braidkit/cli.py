"""Command-line entry point: ``braidkit <subcommand> ...``.

Machine-readable output goes to stdout or files (JSON/CSV); the resolved
configuration and human summaries go to stderr.  Exit codes: 0 success,
1 runtime error, 2 usage error.
"""

from __future__ import annotations

import argparse
import json
import os
import sys
from dataclasses import asdict

from . import aut, datagen, invariants, mlp, moves, pipeline
from .core import EncodingError, encode, format_matrix, parse_flat, parse_word


class UsageError(Exception):
    pass


def _log(msg: str) -> None:
    print(msg, file=sys.stderr)


def _resolved(args: argparse.Namespace) -> None:
    cfg = {k: v for k, v in vars(args).items() if k != "func"}
    _log("config: " + json.dumps(cfg, sort_keys=True, default=str))


def _word(text: str, strands: int):
    try:
        return parse_word(text, strands)
    except ValueError as exc:
        raise UsageError(str(exc)) from None


def _flat(text: str, strands: int):
    try:
        return parse_flat(text, strands)
    except ValueError as exc:
        raise UsageError(str(exc)) from None


def _int_list(text: str) -> list[int]:
    try:
        return [int(t) for t in text.split(",") if t.strip()]
    except ValueError:
        raise UsageError(f"expected comma-separated integers, got {text!r}") from None


def _words_from(args) -> list[str]:
    out = list(args.words)
    if getattr(args, "word_file", None):
        with open(args.word_file) as fh:
            out += [ln.strip() for ln in fh if ln.strip()]
    return out


def cmd_encode(args) -> int:
    out = []
    for text in _words_from(args):
        word = _flat(text, args.strands) if args.flat else _word(text, args.strands)
        enc = encode(word, args.encoding)
        out.append(format_matrix(enc.matrix))
    text = "\n\n".join(s for s in out)
    if text:
        print(text)
    return 0


def cmd_check(args) -> int:
    try:
        strategy = pipeline.Strategy.parse(args.strategy)
    except ValueError as exc:
        raise UsageError(str(exc)) from None
    for text in _words_from(args):
        word = _word(text, args.strands)
        v = pipeline.check(word, strategy)
        rec = {"word": text, "trivial": v.trivial, "rejected_by": v.rejected_by, "strategy": strategy.name}
        if word.strands == 3:
            rec["conditions"] = invariants.condition_report(word).to_json()
        print(json.dumps(rec))
    return 0


def cmd_untangle(args) -> int:
    if args.certify:
        with open(args.certify) as fh:
            seq = moves.MoveSequence.from_jsonl(fh.read())
        ok = moves.certify(seq)
        print(json.dumps({"certified": ok, "moves": len(seq.moves)}))
        return 0 if ok else 1
    if len(args.words) != 1:
        raise UsageError("untangle-flat takes exactly one flat word")
    word = _flat(args.words[0], args.strands)
    result = moves.untangle_flat(word)
    if isinstance(result, moves.NontrivialReport):
        print(json.dumps({
            "trivial": False,
            "word": str(result.word),
            "invariant": list(result.invariant),
            "canonical": str(result.canonical),
            "permutation": list(result.permutation),
        }))
        return 0
    text = result.to_jsonl()
    if args.output:
        with open(args.output, "w") as fh:
            fh.write(text)
        _log(f"{len(result.moves)} moves written to {args.output}")
    else:
        sys.stdout.write(text)
    return 0


def cmd_gen(args) -> int:
    mix = "balanced" if args.balanced else "trivial-only" if args.trivial_only else "any"
    try:
        spec = datagen.DatasetSpec(
            strands=args.strands, length=args.length, flat=args.flat, encoding=args.encoding.upper(),
            class_mix=mix, count=args.count, seed=args.seed, condition=args.condition,
        )
    except ValueError as exc:
        raise UsageError(str(exc)) from None
    records = list(datagen.build_dataset(spec))
    comment = "generated by braidkit gen\n" + json.dumps(asdict(spec), sort_keys=True)
    datagen.export(records, args.format, args.output, comment=comment)
    counts = {label: sum(r.label == label for r in records) for label in datagen.LABELS}
    _log(f"wrote {len(records)} records to {args.output}: {counts}")
    return 0


def cmd_enumerate(args) -> int:
    for k in range(args.min_length, args.max_length + 1):
        print(f"{k},{aut.count_trivial_words(k)}")
    return 0


def cmd_bench(args) -> int:
    lengths = _int_list(args.lengths)
    strategies = [s for s in args.strategies.split(",") if s]
    for s in strategies:
        try:
            pipeline.Strategy.parse(s)
        except ValueError as exc:
            raise UsageError(str(exc)) from None
    report = pipeline.benchmark(lengths, args.count, strategies, seed=args.seed)
    with open(args.output, "w", newline="") as fh:
        fh.write(report.to_csv())
    _log(f"benchmark written to {args.output}")
    if args.histogram:
        names = {pipeline.Strategy.parse(s).name for s in strategies}
        if not {"aut", "cep-ces2-aut"} <= names:
            raise UsageError("--histogram needs strategies aut and cep-ces2-aut")
        length = args.histogram_length or lengths[0]
        with open(args.histogram, "w", newline="") as fh:
            fh.write(report.histogram_csv(length))
        _log(f"histogram for length {length} written to {args.histogram}")
    return 0


def cmd_train(args) -> int:
    if not os.path.exists(args.data):
        raise UsageError(f"no such dataset {args.data}")
    records = datagen.read_csv(args.data, strands=args.strands, flat=args.flat)
    base = mlp.MLPConfig(
        hidden=args.hidden, learning_rate=args.learning_rate, momentum=args.momentum,
        epochs=args.epochs, validation_pct=args.validation_pct, seed=args.seed,
        error_patience=args.error_patience,
    )
    if args.sweep:
        hidden = [None if h == "a" else int(h) for h in args.sweep.split(",")]
        rows = mlp.sweep(records, hidden, base)
        lines = [",".join(mlp.SWEEP_HEADER)] + [",".join(r) for r in rows]
        print("\n".join(lines))
        return 0
    if args.folds:
        report = mlp.cross_validate(records, args.folds, base)
        model = mlp.train(records, base)
    else:
        model, report = mlp.split_evaluate(records, args.split, base)
    out = report.to_json()
    rows, k = records[0].matrix.shape
    out["weight_pattern"] = {
        key: val for key, val in mlp.extract_pattern(model, rows, k).to_json().items() if key != "signs"
    }
    if args.condition:
        out["agreement"] = {args.condition: mlp.agreement_with_condition(model, records, args.condition)}
    if args.model:
        with open(args.model, "w") as fh:
            json.dump(model.to_json(), fh)
    if args.report:
        with open(args.report, "w") as fh:
            json.dump(out, fh, indent=2)
    print(json.dumps(out))
    return 0


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="braidkit", description="Braid encodings, invariants and triviality checks.")
    p.add_argument("-v", "--verbose", action="store_true")
    sub = p.add_subparsers(dest="command", required=True)

    def strands(sp, choices=None):
        sp.add_argument("--strands", type=int, default=3, choices=choices)

    sp = sub.add_parser("encode", help="print the matrix of a word")
    sp.add_argument("words", nargs="*")
    sp.add_argument("--word-file")
    sp.add_argument("--encoding", type=str.upper, choices=["EP1", "EP2", "ES2", "ES1"], default="EP1")
    sp.add_argument("--flat", action="store_true", help="words are flat (unsigned positions)")
    strands(sp)
    sp.set_defaults(func=cmd_encode)

    sp = sub.add_parser("check", help="decide triviality, one JSON verdict per word")
    sp.add_argument("words", nargs="*")
    sp.add_argument("--word-file")
    sp.add_argument("--strategy", default="cep-ces2-aut")
    strands(sp, [2, 3])
    sp.set_defaults(func=cmd_check)

    sp = sub.add_parser("untangle-flat", help="R2/R3 certificate for a trivial flat braid")
    sp.add_argument("words", nargs="*")
    sp.add_argument("-o", "--output")
    sp.add_argument("--certify", metavar="FILE", help="replay and validate a certificate file")
    strands(sp, [3])
    sp.set_defaults(func=cmd_untangle)

    sp = sub.add_parser("gen", help="generate a labelled dataset")
    strands(sp, [2, 3])
    sp.add_argument("--length", type=int, required=True)
    sp.add_argument("--flat", action="store_true")
    sp.add_argument("--encoding", type=str.upper, choices=["EP1", "EP2", "ES2", "ES1"], default="ES2")
    mix = sp.add_mutually_exclusive_group()
    mix.add_argument("--balanced", action="store_true")
    mix.add_argument("--trivial-only", action="store_true")
    sp.add_argument("--condition", type=str.upper, choices=["CEP", "CES2", "CES1"])
    sp.add_argument("--count", type=int, required=True)
    sp.add_argument("--seed", type=int, default=0)
    sp.add_argument("--format", choices=["csv", "arff"], default="csv")
    sp.add_argument("--threads", type=int, default=1)
    sp.add_argument("-o", "--output", required=True)
    sp.set_defaults(func=cmd_gen)

    sp = sub.add_parser("enumerate", help="count trivial 3-strand words by length")
    sp.add_argument("--max-length", type=int, required=True)
    sp.add_argument("--min-length", type=int, default=0)
    sp.set_defaults(func=cmd_enumerate)

    sp = sub.add_parser("bench", help="time triviality strategies")
    sp.add_argument("--lengths", default="10,20,30,40,50")
    sp.add_argument("--count", type=int, default=10000)
    sp.add_argument("--strategies", default="aut,cep-aut,ces1-aut,ces2-cep-aut,cep-ces2-aut")
    sp.add_argument("--seed", type=int, default=0)
    sp.add_argument("--threads", type=int, default=1)
    sp.add_argument("-o", "--output", required=True)
    sp.add_argument("--histogram", metavar="FILE", help="per-braid time histogram CSV")
    sp.add_argument("--histogram-length", type=int)
    sp.set_defaults(func=cmd_bench)

    sp = sub.add_parser("train", help="train and evaluate the perceptron on a CSV dataset")
    sp.add_argument("--data", required=True)
    strands(sp, [2, 3])
    sp.add_argument("--flat", action="store_true")
    sp.add_argument("--hidden", type=int)
    sp.add_argument("--learning-rate", type=float, default=0.3)
    sp.add_argument("--momentum", type=float, default=0.2)
    sp.add_argument("--epochs", type=int, default=500)
    sp.add_argument("--validation-pct", type=float, default=0.0)
    sp.add_argument("--error-patience", type=int, default=20)
    sp.add_argument("--seed", type=int, default=0)
    ev = sp.add_mutually_exclusive_group()
    ev.add_argument("--split", type=float, default=0.67)
    ev.add_argument("--folds", type=int, choices=[2, 3, 4])
    sp.add_argument("--sweep", help="comma-separated H values (use 'a' for the default)")
    sp.add_argument("--condition", type=str.upper, choices=["CEP", "CES2", "CES1"])
    sp.add_argument("--model", help="write the model JSON here")
    sp.add_argument("--report", help="write the evaluation JSON here")
    sp.set_defaults(func=cmd_train)
    return p


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    _resolved(args)
    try:
        return args.func(args)
    except UsageError as exc:
        _log(f"usage error: {exc}")
        return 2
    except (EncodingError, moves.MoveError, ValueError, OSError, aut.ImageTooLongError) as exc:
        _log(f"error: {exc}")
        return 1


if __name__ == "__main__":
    sys.exit(main())

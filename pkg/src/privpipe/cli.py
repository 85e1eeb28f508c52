"""Command-line entry point.

Exit codes: 0 success, 1 validation/usage error, 2 I/O error. Diagnostics
go to stderr; results go to files or stdout. Verbs that produce artifacts
write a manifest next to them, and no verb ever mutates its inputs.
"""

from __future__ import annotations

import argparse
import json
import sys
from pathlib import Path

from . import corpus as corpus_mod
from . import evaluation
from .audit import read_audit, write_audit
from .errors import PrivpipeError, ValidationError
from .ner import default_gazetteer, load_gazetteer
from .pipeline import config_from_obj, replay, run
from .rng import fnv1a64


class _UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):  # exit 1, not argparse's default 2
        self.print_usage(sys.stderr)
        raise _UsageError(message)


def _warn(message: str) -> None:
    print(f"privpipe: {message}", file=sys.stderr)


def _seed_or_default(seed: int | None) -> int:
    if seed is None:
        _warn("no --seed given; defaulting to 0")
        return 0
    return seed


def _parse_ratios(text: str) -> tuple[float, float, float]:
    parts = text.split(",")
    if len(parts) != 3:
        raise ValidationError(f"--ratios needs three comma-separated fractions, got {text!r}")
    try:
        return tuple(float(p) for p in parts)  # type: ignore[return-value]
    except ValueError as exc:
        raise ValidationError(f"bad --ratios value {text!r}") from exc


def _parse_rates(text: str) -> list[float]:
    try:
        rates = [float(p) for p in text.split(",") if p != ""]
    except ValueError as exc:
        raise ValidationError(f"bad --rates value {text!r}") from exc
    if not rates:
        raise ValidationError("--rates must name at least one rate")
    return rates


def _write_json(path: Path, obj: dict) -> None:
    path.write_text(
        json.dumps(obj, sort_keys=True, indent=2, ensure_ascii=False) + "\n",
        encoding="utf-8",
    )


def _file_digest(path: Path) -> str:
    return f"{fnv1a64(path.read_bytes()):016x}"


def _cmd_ingest(args) -> int:
    seed = _seed_or_default(args.seed)
    ratios = _parse_ratios(args.ratios)
    examples = corpus_mod.load_jsonl(args.input)
    split_corpus = corpus_mod.split(examples, ratios, seed)
    corpus_mod.save_split_dir(
        args.out,
        split_corpus,
        manifest_extra={"verb": "ingest", "input": str(args.input)},
    )
    return 0


def _cmd_synth(args) -> int:
    seed = _seed_or_default(args.seed)
    examples = corpus_mod.generate_synthetic(args.n, seed)
    split_corpus = corpus_mod.split(examples, corpus_mod.DEFAULT_RATIOS, seed)
    corpus_mod.save_split_dir(
        args.out,
        split_corpus,
        manifest_extra={"verb": "synth", "n": args.n},
    )
    return 0


def _cmd_transform(args) -> int:
    raw = json.loads(Path(args.config).read_text(encoding="utf-8"))
    if isinstance(raw, dict) and "seed" not in raw:
        _warn("config has no seed; defaulting to 0")
    cfg = config_from_obj(raw)
    split_corpus = corpus_mod.load_split_dir(args.corpus)
    transformed, records, manifest = run(split_corpus, cfg)
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    write_audit(out / "audit.jsonl", records)
    extra = {
        "verb": "transform",
        "input_dir": str(args.corpus),
        "audit_digest": _file_digest(out / "audit.jsonl"),
        "config": manifest["config"],
        "config_hash": manifest["config_hash"],
        "seed": manifest["seed"],
        "input_digest": manifest["input_digest"],
        "output_digest": manifest["output_digest"],
        "tier_counts": manifest["counts"],
    }
    corpus_mod.save_split_dir(out, transformed, manifest_extra=extra)
    return 0


def _cmd_train(args) -> int:
    seed = _seed_or_default(args.seed)
    split_corpus = corpus_mod.load_split_dir(args.corpus)
    model = evaluation.train(split_corpus.train, seed)
    model_path = Path(args.model)
    evaluation.save_model(model_path, model)
    _write_json(
        model_path.with_name(model_path.name + ".manifest.json"),
        {
            "verb": "train",
            "corpus": str(args.corpus),
            "corpus_digest": corpus_mod.corpus_digest(split_corpus),
            "seed": seed,
            "model_digest": _file_digest(model_path),
        },
    )
    return 0


def _cmd_eval(args) -> int:
    model = evaluation.load_model(args.model)
    split_corpus = corpus_mod.load_split_dir(args.corpus)
    part = {"dev": split_corpus.dev, "test": split_corpus.test}[args.split]
    metrics = evaluation.evaluate(model, part)
    gazetteer = (
        load_gazetteer(args.gazetteer) if args.gazetteer else default_gazetteer()
    )
    manifest = corpus_mod.read_manifest(args.corpus)
    if "input_dir" in manifest:
        original = corpus_mod.load_split_dir(manifest["input_dir"]).all_examples()
    else:
        original = split_corpus.all_examples()
    exposure = evaluation.entity_exposure(
        split_corpus.all_examples(), original, gazetteer
    )
    result = {"split": args.split, **metrics.to_obj(), "entity_exposure": exposure}
    print(json.dumps(result, sort_keys=True))
    return 0


_FAMILIES = {"dp": frozenset({"DP"}), "combined": frozenset({"BT", "NER", "DP"})}


def _cmd_sweep(args) -> int:
    seed = _seed_or_default(args.seed)
    rates = _parse_rates(args.rates)
    tier_sets = [frozenset(), frozenset({"BT"}), frozenset({"NER"})]
    for family in args.tiers.split(","):
        family = family.strip().lower()
        if family not in _FAMILIES:
            raise ValidationError(f"--tiers entries must be in {sorted(_FAMILIES)}, got {family!r}")
        tier_sets.append(_FAMILIES[family])
    split_corpus = corpus_mod.load_split_dir(args.corpus)
    rows = evaluation.sweep(split_corpus, rates, tier_sets, seed)
    out = Path(args.out)
    out.write_text(evaluation.rows_to_csv(rows), encoding="utf-8")
    _write_json(
        out.with_name(out.name + ".manifest.json"),
        {
            "verb": "sweep",
            "corpus": str(args.corpus),
            "corpus_digest": corpus_mod.corpus_digest(split_corpus),
            "rates": rates,
            "tiers": args.tiers,
            "seed": seed,
            "report_digest": _file_digest(out),
        },
    )
    print(evaluation.render_table(rows), end="")
    return 0


def _cmd_replay(args) -> int:
    split_corpus = corpus_mod.load_split_dir(args.corpus)
    records = read_audit(args.audit)
    replayed = replay(split_corpus, records)
    corpus_mod.save_split_dir(
        args.out,
        replayed,
        manifest_extra={
            "verb": "replay",
            "input_dir": str(args.corpus),
            "audit": str(args.audit),
            "input_digest": corpus_mod.corpus_digest(split_corpus),
        },
    )
    return 0


def _cmd_report(args) -> int:
    rows = evaluation.rows_from_csv(Path(args.csv).read_text(encoding="utf-8"))
    table = evaluation.render_table(rows)
    if args.out:
        Path(args.out).write_text(table, encoding="utf-8")
    else:
        print(table, end="")
    return 0


def _build_parser() -> _Parser:
    parser = _Parser(prog="privpipe", description=__doc__)
    sub = parser.add_subparsers(dest="verb", required=True)

    p = sub.add_parser("ingest", help="split a JSONL corpus into train/dev/test")
    p.add_argument("--input", required=True)
    p.add_argument("--ratios", default="0.6,0.2,0.2")
    p.add_argument("--seed", type=int, default=None)
    p.add_argument("--out", required=True)
    p.set_defaults(func=_cmd_ingest)

    p = sub.add_parser("synth", help="generate a synthetic corpus directory")
    p.add_argument("--n", type=int, required=True)
    p.add_argument("--seed", type=int, default=None)
    p.add_argument("--out", required=True)
    p.set_defaults(func=_cmd_synth)

    p = sub.add_parser("transform", help="apply configured tiers to a corpus")
    p.add_argument("--corpus", required=True)
    p.add_argument("--config", required=True)
    p.add_argument("--out", required=True)
    p.set_defaults(func=_cmd_transform)

    p = sub.add_parser("train", help="train the n-gram classifier")
    p.add_argument("--corpus", required=True)
    p.add_argument("--seed", type=int, default=None)
    p.add_argument("--model", required=True)
    p.set_defaults(func=_cmd_train)

    p = sub.add_parser("eval", help="evaluate a model on dev or test")
    p.add_argument("--model", required=True)
    p.add_argument("--corpus", required=True)
    p.add_argument("--split", choices=("dev", "test"), required=True)
    p.add_argument("--gazetteer", default=None)
    p.set_defaults(func=_cmd_eval)

    p = sub.add_parser("sweep", help="run the full privacy/utility grid")
    p.add_argument("--corpus", required=True)
    p.add_argument("--rates", default="0.05,0.10,0.15,0.20")
    p.add_argument("--tiers", default="dp,combined")
    p.add_argument("--seed", type=int, default=None)
    p.add_argument("--out", required=True)
    p.set_defaults(func=_cmd_sweep)

    p = sub.add_parser("replay", help="reapply an audit log without the RNG")
    p.add_argument("--corpus", required=True)
    p.add_argument("--audit", required=True)
    p.add_argument("--out", required=True)
    p.set_defaults(func=_cmd_replay)

    p = sub.add_parser("report", help="render a sweep CSV as a text table")
    p.add_argument("--csv", required=True)
    p.add_argument("--out", default=None)
    p.set_defaults(func=_cmd_report)

    return parser


def main(argv: list[str] | None = None) -> int:
    parser = _build_parser()
    try:
        args = parser.parse_args(argv)
    except _UsageError as exc:
        print(f"privpipe: error: {exc}", file=sys.stderr)
        return 1
    except SystemExit as exc:  # --help exits 0 through here
        return int(exc.code or 0)
    try:
        return args.func(args)
    except (PrivpipeError, ValueError) as exc:
        print(f"privpipe: error: {exc}", file=sys.stderr)
        return 1
    except OSError as exc:
        print(f"privpipe: i/o error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())

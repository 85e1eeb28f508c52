"""Labeled text corpora: JSONL IO, deterministic splitting, synthetic data.

Corpus format is JSON Lines, one object per line with keys "id" (string),
"text" (string) and "label" (0 or 1, 1 = propaganda). Unknown keys are kept
on the example and survive a save/load round trip.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field
from pathlib import Path
from typing import Iterable, Iterator, Sequence

from . import _vocab
from .errors import ValidationError
from .rng import RngStream, derive_stream, fnv1a64

DEFAULT_RATIOS = (0.6, 0.2, 0.2)
SPLIT_NAMES = ("train", "dev", "test")


@dataclass
class LabeledExample:
    """One text record: stable id, UTF-8 text, binary label."""

    id: str
    text: str
    label: int
    extra: dict = field(default_factory=dict)

    def with_text(self, text: str) -> "LabeledExample":
        return LabeledExample(self.id, text, self.label, dict(self.extra))

    def with_label(self, label: int) -> "LabeledExample":
        return LabeledExample(self.id, self.text, label, dict(self.extra))


@dataclass
class SplitCorpus:
    """Disjoint train/dev/test partition plus the protocol that produced it."""

    train: list[LabeledExample]
    dev: list[LabeledExample]
    test: list[LabeledExample]
    ratios: tuple[float, float, float] = DEFAULT_RATIOS
    split_seed: int = 0

    def splits(self) -> Iterator[tuple[str, list[LabeledExample]]]:
        yield "train", self.train
        yield "dev", self.dev
        yield "test", self.test

    def all_examples(self) -> list[LabeledExample]:
        return self.train + self.dev + self.test

    def counts(self) -> dict[str, int]:
        return {name: len(part) for name, part in self.splits()}


def _example_from_obj(obj: dict, line_no: int, synthetic_id: str) -> LabeledExample:
    if not isinstance(obj, dict):
        raise ValidationError(f"line {line_no}: expected a JSON object, got {type(obj).__name__}")
    ex_id = obj.get("id", synthetic_id)
    if not isinstance(ex_id, str):
        raise ValidationError(f'line {line_no}: "id" must be a string')
    text = obj.get("text")
    if not isinstance(text, str):
        raise ValidationError(f'line {line_no}: missing or non-string "text"')
    if not text.strip():
        raise ValidationError(f"line {line_no}: text is empty after trimming whitespace")
    label = obj.get("label")
    if not isinstance(label, int) or isinstance(label, bool) or label not in (0, 1):
        raise ValidationError(f'line {line_no}: "label" must be 0 or 1, got {label!r}')
    extra = {k: v for k, v in obj.items() if k not in ("id", "text", "label")}
    return LabeledExample(ex_id, text, label, extra)


def load_jsonl(path: str | Path) -> list[LabeledExample]:
    """Load a corpus file; a missing "id" becomes the 0-based line number."""
    examples: list[LabeledExample] = []
    seen: set[str] = set()
    with open(path, encoding="utf-8") as fh:
        lines = fh.read().splitlines()
    for i, line in enumerate(lines):
        if not line.strip():
            if i == len(lines) - 1:
                continue  # tolerate a trailing blank line
            raise ValidationError(f"line {i + 1}: blank line inside corpus file")
        try:
            obj = json.loads(line)
        except json.JSONDecodeError as exc:
            raise ValidationError(f"line {i + 1}: invalid JSON: {exc.msg}") from exc
        ex = _example_from_obj(obj, i + 1, str(i))
        if ex.id in seen:
            raise ValidationError(f"line {i + 1}: duplicate id {ex.id!r}")
        seen.add(ex.id)
        examples.append(ex)
    return examples


def example_to_json_line(ex: LabeledExample) -> str:
    obj = {"id": ex.id, "text": ex.text, "label": ex.label, **ex.extra}
    return json.dumps(obj, sort_keys=True, ensure_ascii=False, separators=(",", ":"))


def examples_to_bytes(examples: Iterable[LabeledExample]) -> bytes:
    return "".join(example_to_json_line(ex) + "\n" for ex in examples).encode("utf-8")


def save_jsonl(path: str | Path, examples: Iterable[LabeledExample]) -> None:
    Path(path).write_bytes(examples_to_bytes(examples))


def corpus_digest(corpus: SplitCorpus) -> str:
    """Order-sensitive content digest of all three splits, as 16 hex digits."""
    h = b"".join(
        name.encode("ascii") + b"\n" + examples_to_bytes(part)
        for name, part in corpus.splits()
    )
    return f"{fnv1a64(h):016x}"


def save_split_dir(out_dir: str | Path, corpus: SplitCorpus, manifest_extra: dict | None = None) -> dict:
    """Write train/dev/test.jsonl plus manifest.json; returns the manifest."""
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    for name, part in corpus.splits():
        save_jsonl(out / f"{name}.jsonl", part)
    manifest = {
        "ratios": list(corpus.ratios),
        "split_seed": corpus.split_seed,
        "counts": corpus.counts(),
        "digest": corpus_digest(corpus),
    }
    if manifest_extra:
        manifest.update(manifest_extra)
    (out / "manifest.json").write_text(
        json.dumps(manifest, sort_keys=True, indent=2, ensure_ascii=False) + "\n",
        encoding="utf-8",
    )
    return manifest


def load_split_dir(in_dir: str | Path) -> SplitCorpus:
    src = Path(in_dir)
    parts = {name: load_jsonl(src / f"{name}.jsonl") for name in SPLIT_NAMES}
    ratios = DEFAULT_RATIOS
    split_seed = 0
    manifest_path = src / "manifest.json"
    if manifest_path.exists():
        manifest = json.loads(manifest_path.read_text(encoding="utf-8"))
        if "ratios" in manifest:
            ratios = tuple(manifest["ratios"])
        split_seed = manifest.get("split_seed", 0)
    return SplitCorpus(parts["train"], parts["dev"], parts["test"], ratios, split_seed)


def read_manifest(in_dir: str | Path) -> dict:
    path = Path(in_dir) / "manifest.json"
    if not path.exists():
        raise ValidationError(f"no manifest.json in {in_dir}")
    return json.loads(path.read_text(encoding="utf-8"))


def split(
    examples: Sequence[LabeledExample],
    ratios: tuple[float, float, float] = DEFAULT_RATIOS,
    seed: int = 0,
) -> SplitCorpus:
    """Shuffle-then-cut partition: floor(r1*N) train, floor(r2*N) dev, rest test."""
    if abs(sum(ratios) - 1.0) > 1e-9:
        raise ValueError(f"split ratios must sum to 1, got {ratios!r}")
    ids = [ex.id for ex in examples]
    if len(set(ids)) != len(ids):
        raise ValidationError("corpus ids are not unique")
    order = list(examples)
    derive_stream(seed, "", "split").shuffle(order)
    n = len(order)
    # the epsilon undoes float error in r*N so the cut matches exact arithmetic
    n_train = math.floor(ratios[0] * n + 1e-9)
    n_dev = math.floor(ratios[1] * n + 1e-9)
    return SplitCorpus(
        order[:n_train],
        order[n_train : n_train + n_dev],
        order[n_train + n_dev :],
        tuple(ratios),
        seed,
    )


def _gazetteer_surfaces() -> list[str]:
    # imported lazily to keep corpus <-> ner dependencies one-way
    from .resources import default_gazetteer_path

    surfaces = []
    with open(default_gazetteer_path(), encoding="utf-8") as fh:
        for line in fh:
            if line.strip():
                surfaces.append(json.loads(line)["surface"])
    return surfaces


def generate_synthetic(n: int, seed: int = 0) -> list[LabeledExample]:
    """Generate n separable examples: ~50% label 1, marker words only in
    label-1 texts, and (with probability 0.3) one gazetteer entity in either
    class so the masking stage has work to do."""
    if n < 10:
        raise ValueError(f"need n >= 10, got {n}")
    neutral = _vocab.NEUTRAL_SURFACES
    markers = _vocab.MARKER_SURFACES
    entities = _gazetteer_surfaces()
    out: list[LabeledExample] = []
    for i in range(n):
        ex_id = f"syn-{i:05d}"
        stream = RngStream(fnv1a64(f"{ex_id}:synth") ^ seed)
        label = 1 if stream.bernoulli(0.5) else 0
        length = 10 + stream.uniform_below(8)
        tokens = [neutral[stream.uniform_below(len(neutral))] for _ in range(length)]
        if label == 1:
            for _ in range(2 + stream.uniform_below(3)):
                marker = markers[stream.uniform_below(len(markers))]
                tokens.insert(stream.uniform_below(len(tokens) + 1), marker)
        if stream.bernoulli(0.3):
            entity = entities[stream.uniform_below(len(entities))]
            tokens.insert(stream.uniform_below(len(tokens) + 1), entity)
        sentence = " ".join(tokens) + "."
        out.append(LabeledExample(ex_id, sentence[0].upper() + sentence[1:], label))
    return out

"""Label flips and character-level perturbations at a configured rate.

Despite the "differential privacy" branding this mechanism carries in
reports, it performs no (epsilon, delta) accounting and makes no formal
privacy guarantee; it injects the configured noise, nothing more.
"""

from __future__ import annotations

import string
from dataclasses import dataclass
from typing import Sequence

from .audit import AuditRecord
from .corpus import LabeledExample, SplitCorpus
from .errors import ConfigError
from .rng import RngStream, derive_stream

DEFAULT_ALPHABET = string.ascii_letters  # 52 symbols; letters only, so
# tokenization damage stays comparable across rates

NOISE_UNITS = ("chars", "examples")

_OPS = ("insert", "delete", "substitute")


@dataclass(frozen=True)
class NoiseConfig:
    rate: float = 0.0
    alphabet: str = DEFAULT_ALPHABET
    flip_labels: bool = True
    apply_to: frozenset[str] = frozenset({"train"})
    unit: str = "chars"

    def __post_init__(self) -> None:
        if not 0.0 <= self.rate <= 1.0:
            raise ValueError(f"noise rate must be in [0, 1], got {self.rate!r}")
        if not self.alphabet:
            raise ValueError("noise alphabet must be non-empty")
        if self.unit not in NOISE_UNITS:
            raise ConfigError(f"noise unit must be one of {NOISE_UNITS}, got {self.unit!r}")
        unknown = set(self.apply_to) - {"train", "dev", "test"}
        if unknown:
            raise ConfigError(f"noise apply_to names unknown splits: {sorted(unknown)}")


def flip_labels(
    examples: Sequence[LabeledExample], rate: float, seed: int
) -> tuple[list[LabeledExample], list[AuditRecord]]:
    """Flip each label with probability rate, via per-example streams."""
    out: list[LabeledExample] = []
    records: list[AuditRecord] = []
    for ex in examples:
        if derive_stream(seed, ex.id, "dp-label").bernoulli(rate):
            flipped = 1 - ex.label
            out.append(ex.with_label(flipped))
            records.append(
                AuditRecord(ex.id, "dp-label", "flip", 0, str(ex.label), str(flipped))
            )
        else:
            out.append(ex)
    return out, records


def perturb_chars(
    text: str,
    rate: float,
    alphabet: str,
    stream: RngStream,
    example_id: str = "",
) -> tuple[str, list[AuditRecord]]:
    """Walk the text once; each character is perturbed with probability rate.

    A perturbed character gets one of insert / delete / substitute with equal
    probability: insert emits the character followed by a random alphabet
    symbol, delete emits nothing, substitute emits a random symbol instead.
    """
    out: list[str] = []
    records: list[AuditRecord] = []
    for i, ch in enumerate(text):
        if not stream.bernoulli(rate):
            out.append(ch)
            continue
        op = _OPS[stream.uniform_below(3)]
        if op == "insert":
            emitted = ch + alphabet[stream.uniform_below(len(alphabet))]
            out.append(emitted)
        elif op == "delete":
            emitted = ""
        else:
            emitted = alphabet[stream.uniform_below(len(alphabet))]
            out.append(emitted)
        records.append(AuditRecord(example_id, "dp-char", op, i, ch, emitted))
    return "".join(out), records


def _perturb_split(
    examples: Sequence[LabeledExample], cfg: NoiseConfig, seed: int
) -> tuple[list[LabeledExample], list[AuditRecord]]:
    out: list[LabeledExample] = []
    records: list[AuditRecord] = []
    for ex in examples:
        stream = derive_stream(seed, ex.id, "dp-char")
        if cfg.unit == "examples" and not stream.bernoulli(cfg.rate):
            out.append(ex)
            continue
        new_text, ex_records = perturb_chars(ex.text, cfg.rate, cfg.alphabet, stream, ex.id)
        out.append(ex.with_text(new_text) if ex_records else ex)
        records.extend(ex_records)
    return out, records


def apply_dp(
    corpus: SplitCorpus, cfg: NoiseConfig, seed: int
) -> tuple[SplitCorpus, list[AuditRecord]]:
    """Perturb text on the configured splits; flip labels on train only.

    Dev and test labels are never flipped: they are the measurement, and a
    corrupted measurement would say nothing about the corruption under test.
    """
    records: list[AuditRecord] = []
    parts: dict[str, list[LabeledExample]] = {}
    for name, examples in corpus.splits():
        if name in cfg.apply_to:
            perturbed, split_records = _perturb_split(examples, cfg, seed)
            records.extend(split_records)
            parts[name] = perturbed
        else:
            parts[name] = list(examples)
    if cfg.flip_labels and "train" in cfg.apply_to:
        parts["train"], flip_records = flip_labels(parts["train"], cfg.rate, seed)
        records.extend(flip_records)
    return (
        SplitCorpus(parts["train"], parts["dev"], parts["test"], corpus.ratios, corpus.split_seed),
        records,
    )

"""Tier composition: back-translation, then entity masking, then noise.

The order is fixed no matter how the tiers are listed in a config: masking
must see un-corrupted surface forms, and translating a masked tag would
destroy it, so BT -> NER -> DP is the only coherent arrangement.
"""

from __future__ import annotations

import json
from dataclasses import dataclass
from pathlib import Path

from .audit import AuditRecord
from .backtranslate import (
    BT_MODES,
    PivotLexicon,
    back_translate_example,
    bundled_lexicon,
    load_lexicon,
)
from .corpus import LabeledExample, SplitCorpus, corpus_digest
from .errors import ConfigError, IntegrityError
from .ner import Gazetteer, default_gazetteer, load_gazetteer, mask_example
from .noise import NoiseConfig, apply_dp
from .resources import PIVOT_NAMES
from .rng import fnv1a64

TIER_ORDER = ("BT", "NER", "DP")


@dataclass(frozen=True)
class TransformConfig:
    tiers: frozenset[str] = frozenset()
    noise: NoiseConfig = NoiseConfig()
    bt_mode: str = "replace"
    bt_apply_to: frozenset[str] = frozenset({"train"})
    pivots: tuple[str, ...] = PIVOT_NAMES  # bundled names or lexicon file paths
    gazetteer: str | None = None  # file path; None selects the bundled table
    ner_case_sensitive: bool = True
    seed: int = 0

    def __post_init__(self) -> None:
        unknown = set(self.tiers) - set(TIER_ORDER)
        if unknown:
            raise ConfigError(f"unknown tiers {sorted(unknown)}; valid: {TIER_ORDER}")
        if self.bt_mode not in BT_MODES:
            raise ConfigError(f"bt mode must be one of {BT_MODES}, got {self.bt_mode!r}")
        bad = set(self.bt_apply_to) - {"train", "dev", "test"}
        if bad:
            raise ConfigError(f"bt apply_to names unknown splits: {sorted(bad)}")

    def ordered_tiers(self) -> tuple[str, ...]:
        return tuple(t for t in TIER_ORDER if t in self.tiers)

    def to_obj(self) -> dict:
        return {
            "tiers": list(self.ordered_tiers()),
            "noise": {
                "rate": self.noise.rate,
                "unit": self.noise.unit,
                "apply_to": sorted(self.noise.apply_to),
                "flip_labels": self.noise.flip_labels,
                "alphabet": self.noise.alphabet,
            },
            "bt": {
                "mode": self.bt_mode,
                "pivots": list(self.pivots),
                "apply_to": sorted(self.bt_apply_to),
            },
            "ner": {
                "gazetteer": self.gazetteer,
                "case_sensitive": self.ner_case_sensitive,
            },
            "seed": self.seed,
        }

    def canonical_text(self) -> str:
        return json.dumps(self.to_obj(), sort_keys=True, separators=(",", ":"), ensure_ascii=False)

    def config_hash(self) -> str:
        return f"{fnv1a64(self.canonical_text()):016x}"


def config_from_obj(obj: dict) -> TransformConfig:
    """Build a TransformConfig from the JSON config document."""
    if not isinstance(obj, dict):
        raise ConfigError("config must be a JSON object")
    tiers = frozenset(str(t).upper() for t in obj.get("tiers", []))
    noise_obj = obj.get("noise", {})
    noise = NoiseConfig(
        rate=float(noise_obj.get("rate", 0.0)),
        alphabet=str(noise_obj.get("alphabet", NoiseConfig.alphabet)),
        flip_labels=bool(noise_obj.get("flip_labels", True)),
        apply_to=frozenset(noise_obj.get("apply_to", ["train"])),
        unit=str(noise_obj.get("unit", "chars")),
    )
    bt_obj = obj.get("bt", {})
    ner_obj = obj.get("ner", {})
    return TransformConfig(
        tiers=tiers,
        noise=noise,
        bt_mode=str(bt_obj.get("mode", "replace")),
        bt_apply_to=frozenset(bt_obj.get("apply_to", ["train"])),
        pivots=tuple(bt_obj.get("pivots", PIVOT_NAMES)),
        gazetteer=ner_obj.get("gazetteer"),
        ner_case_sensitive=bool(ner_obj.get("case_sensitive", True)),
        seed=int(obj.get("seed", 0)),
    )


def load_config(path: str | Path) -> TransformConfig:
    try:
        obj = json.loads(Path(path).read_text(encoding="utf-8"))
    except json.JSONDecodeError as exc:
        raise ConfigError(f"config file {path}: invalid JSON: {exc.msg}") from exc
    return config_from_obj(obj)


def load_resources(cfg: TransformConfig) -> tuple[list[PivotLexicon], Gazetteer | None]:
    """Resolve every resource the enabled tiers need, before any work starts."""
    pivots: list[PivotLexicon] = []
    if "BT" in cfg.tiers:
        for name in cfg.pivots:
            if name in PIVOT_NAMES:
                pivots.append(bundled_lexicon(name))
            elif Path(name).exists():
                pivots.append(load_lexicon(name))
            else:
                raise ConfigError(f"pivot lexicon {name!r} is neither bundled nor a file")
        if not pivots:
            raise ConfigError("BT tier enabled but no pivot lexicons configured")
    gazetteer: Gazetteer | None = None
    if "NER" in cfg.tiers:
        if cfg.gazetteer is None:
            gazetteer = default_gazetteer(case_sensitive=cfg.ner_case_sensitive)
        elif Path(cfg.gazetteer).exists():
            gazetteer = load_gazetteer(cfg.gazetteer, case_sensitive=cfg.ner_case_sensitive)
        else:
            raise ConfigError(f"gazetteer file {cfg.gazetteer!r} not found")
    return pivots, gazetteer


def run(
    corpus: SplitCorpus, cfg: TransformConfig
) -> tuple[SplitCorpus, list[AuditRecord], dict]:
    """Apply the enabled tiers in canonical order; return corpus, audit, manifest."""
    pivots, gazetteer = load_resources(cfg)  # fail fast: no partial output
    input_digest = corpus_digest(corpus)
    records: list[AuditRecord] = []
    counts: dict[str, dict[str, int]] = {"input": corpus.counts()}
    current = corpus

    if "BT" in cfg.tiers:
        parts = {}
        for name, examples in current.splits():
            if name in cfg.bt_apply_to:
                out: list[LabeledExample] = []
                for ex in examples:
                    for new_ex, record in back_translate_example(
                        ex, pivots, cfg.bt_mode, cfg.seed
                    ):
                        out.append(new_ex)
                        if record is not None:
                            records.append(record)
                parts[name] = out
            else:
                parts[name] = list(examples)
        current = SplitCorpus(
            parts["train"], parts["dev"], parts["test"], current.ratios, current.split_seed
        )
        counts["bt"] = current.counts()

    if "NER" in cfg.tiers:
        assert gazetteer is not None
        parts = {}
        for name, examples in current.splits():
            out = []
            for ex in examples:
                new_ex, ex_records = mask_example(ex, gazetteer)
                out.append(new_ex)
                records.extend(ex_records)
            parts[name] = out
        current = SplitCorpus(
            parts["train"], parts["dev"], parts["test"], current.ratios, current.split_seed
        )
        counts["ner"] = current.counts()

    if "DP" in cfg.tiers:
        current, dp_records = apply_dp(current, cfg.noise, cfg.seed)
        records.extend(dp_records)
        counts["dp"] = current.counts()

    counts["output"] = current.counts()
    manifest = {
        "config": cfg.to_obj(),
        "config_hash": cfg.config_hash(),
        "seed": cfg.seed,
        "input_digest": input_digest,
        "output_digest": corpus_digest(current),
        "counts": counts,
    }
    return current, records, manifest


def _replay_ner(text: str, ner_records: list[AuditRecord]) -> str:
    for record in sorted(ner_records, key=lambda r: r.position, reverse=True):
        start = record.position
        end = start + len(record.original)
        if end > len(text) or text[start:end] != record.original:
            raise IntegrityError(f"audit mismatch replaying {record.describe()}")
        text = text[:start] + record.emitted + text[end:]
    return text


def _replay_chars(text: str, char_records: list[AuditRecord]) -> str:
    by_index: dict[int, AuditRecord] = {}
    for record in char_records:
        if record.position in by_index:
            raise IntegrityError(f"duplicate audit index in {record.describe()}")
        by_index[record.position] = record
    if by_index and max(by_index) >= len(text):
        record = by_index[max(by_index)]
        raise IntegrityError(f"audit index out of range in {record.describe()}")
    out = []
    for i, ch in enumerate(text):
        record = by_index.get(i)
        if record is None:
            out.append(ch)
            continue
        if record.original != ch:
            raise IntegrityError(f"audit mismatch replaying {record.describe()}")
        out.append(record.emitted)
    return "".join(out)


def _replay_example(
    ex: LabeledExample, recs: list[AuditRecord], allow_bt_replace: bool
) -> LabeledExample:
    text = ex.text
    label = ex.label
    bt = [r for r in recs if r.tier == "bt" and r.op.startswith("replace:")]
    if bt:
        if not allow_bt_replace or len(bt) > 1:
            raise IntegrityError(f"unexpected bt record {bt[0].describe()}")
        if bt[0].original != text:
            raise IntegrityError(f"audit mismatch replaying {bt[0].describe()}")
        text = bt[0].emitted
    text = _replay_ner(text, [r for r in recs if r.tier == "ner"])
    text = _replay_chars(text, [r for r in recs if r.tier == "dp-char"])
    for record in recs:
        if record.tier != "dp-label":
            continue
        if record.original != str(label):
            raise IntegrityError(f"audit mismatch replaying {record.describe()}")
        label = int(record.emitted)
    return LabeledExample(ex.id, text, label, dict(ex.extra))


def replay(corpus: SplitCorpus, records: list[AuditRecord]) -> SplitCorpus:
    """Reapply an audit log to the corpus that produced it, with no RNG.

    Output is byte-identical to the run that wrote the log; any mismatch
    between log and corpus raises IntegrityError naming the record.
    """
    by_id: dict[str, list[AuditRecord]] = {}
    children: dict[str, list[AuditRecord]] = {}
    known_ids = {ex.id for part in (corpus.train, corpus.dev, corpus.test) for ex in part}
    for record in records:
        by_id.setdefault(record.example_id, []).append(record)
        if record.tier == "bt" and record.op.startswith("augment:"):
            parent_id = record.example_id.rsplit("#bt-", 1)[0]
            children.setdefault(parent_id, []).append(record)
    for example_id in by_id:
        root_id = example_id.rsplit("#bt-", 1)[0] if "#bt-" in example_id else example_id
        if root_id not in known_ids:
            record = by_id[example_id][0]
            raise IntegrityError(f"audit names unknown example in {record.describe()}")

    parts: dict[str, list[LabeledExample]] = {}
    for name, examples in corpus.splits():
        out: list[LabeledExample] = []
        for ex in examples:
            out.append(_replay_example(ex, by_id.get(ex.id, []), allow_bt_replace=True))
            for birth in children.get(ex.id, []):
                if birth.original != ex.text:
                    raise IntegrityError(f"audit mismatch replaying {birth.describe()}")
                child = LabeledExample(birth.example_id, birth.emitted, ex.label, dict(ex.extra))
                child_records = [
                    r for r in by_id.get(child.id, []) if not r.op.startswith("augment:")
                ]
                out.append(_replay_example(child, child_records, allow_bt_replace=False))
        parts[name] = out
    return SplitCorpus(
        parts["train"], parts["dev"], parts["test"], corpus.ratios, corpus.split_seed
    )

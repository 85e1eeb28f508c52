"""Desk-scale classifier harness, metrics, and privacy probes.

The classifier is a logistic regression over hashed character n-grams
(orders 3-5, FNV-1a-64 mod 2^18 buckets), trained by plain SGD. It stands
in for large fine-tuned language models, which are far outside desk scale:
its absolute scores mean nothing, but character features make it sensitive
to the same corruption the pipeline injects, so orderings and degradation
trends are comparable.
"""

from __future__ import annotations

import csv
import io
import json
import math
from dataclasses import dataclass
from pathlib import Path
from typing import Sequence

import numpy as np

from .corpus import LabeledExample, SplitCorpus
from .errors import IntegrityError, ValidationError
from .ner import Gazetteer, tokenize
from .noise import NoiseConfig
from .pipeline import TransformConfig, run
from .rng import FNV_OFFSET_BASIS, FNV_PRIME, derive_stream, fnv1a64

N_BUCKETS = 1 << 18
NGRAM_ORDERS = (3, 4, 5)

EPOCHS = 3
LEARNING_RATE = 0.1

_U64_PRIME = np.uint64(FNV_PRIME)
_BUCKET_MASK = np.uint64(N_BUCKETS - 1)


def _ngram_buckets_ascii(data: np.ndarray) -> list[np.ndarray]:
    buckets = []
    for order in NGRAM_ORDERS:
        width = len(data) - order + 1
        if width <= 0:
            continue
        h = np.full(width, FNV_OFFSET_BASIS, dtype=np.uint64)
        for k in range(order):
            h = (h ^ data[k : k + width]) * _U64_PRIME
        buckets.append(h & _BUCKET_MASK)
    return buckets


def _ngram_buckets_unicode(text: str) -> list[np.ndarray]:
    buckets = []
    for order in NGRAM_ORDERS:
        width = len(text) - order + 1
        if width <= 0:
            continue
        hashes = [fnv1a64(text[i : i + order]) & (N_BUCKETS - 1) for i in range(width)]
        buckets.append(np.asarray(hashes, dtype=np.uint64))
    return buckets


def featurize(text: str) -> tuple[np.ndarray, np.ndarray]:
    """Sparse count vector: (unique bucket indices, counts as float32)."""
    lowered = text.lower()
    if lowered.isascii():
        data = np.frombuffer(lowered.encode("ascii"), dtype=np.uint8).astype(np.uint64)
        buckets = _ngram_buckets_ascii(data)
    else:
        buckets = _ngram_buckets_unicode(lowered)
    if not buckets:
        return np.empty(0, dtype=np.int64), np.empty(0, dtype=np.float32)
    indices, counts = np.unique(np.concatenate(buckets), return_counts=True)
    return indices.astype(np.int64), counts.astype(np.float32)


@dataclass
class Model:
    weights: np.ndarray  # float32, length N_BUCKETS
    bias: float

    def __post_init__(self) -> None:
        if self.weights.shape != (N_BUCKETS,):
            raise ValidationError(f"weight vector must have length {N_BUCKETS}")


def _sigmoid(z: float) -> float:
    if z >= 0:
        return 1.0 / (1.0 + math.exp(-z))
    e = math.exp(z)
    return e / (1.0 + e)


def score(model: Model, text: str) -> float:
    """Probability of the positive class."""
    indices, counts = featurize(text)
    z = model.bias + float(
        np.dot(model.weights[indices].astype(np.float64), counts.astype(np.float64))
    )
    return _sigmoid(z)


def train(examples: Sequence[LabeledExample], seed: int = 0, epochs: int = EPOCHS) -> Model:
    """SGD logistic regression: 3 epochs, lr 0.1, zero init, no regularization.

    The per-epoch visit order comes from a derived stream, so training is
    bit-reproducible for a fixed (data, seed).
    """
    if not examples:
        raise ValidationError("training set is empty")
    labels = [ex.label for ex in examples]
    if len(set(labels)) < 2:
        raise ValidationError("training set contains a single class")
    features = [featurize(ex.text) for ex in examples]
    weights = np.zeros(N_BUCKETS, dtype=np.float32)
    bias = 0.0
    order = list(range(len(examples)))
    for epoch in range(epochs):
        derive_stream(seed, str(epoch), "train").shuffle(order)
        for i in order:
            indices, counts = features[i]
            z = bias + float(
                np.dot(weights[indices].astype(np.float64), counts.astype(np.float64))
            )
            gradient = _sigmoid(z) - labels[i]
            step = np.float32(LEARNING_RATE * gradient)
            weights[indices] -= step * counts
            bias -= LEARNING_RATE * gradient
    return Model(weights, bias)


@dataclass(frozen=True)
class Metrics:
    tp: int
    fp: int
    fn: int
    tn: int

    @property
    def precision(self) -> float:
        return self.tp / (self.tp + self.fp) if self.tp + self.fp > 0 else 0.0

    @property
    def recall(self) -> float:
        return self.tp / (self.tp + self.fn) if self.tp + self.fn > 0 else 0.0

    @property
    def f1(self) -> float:
        denominator = 2 * self.tp + self.fp + self.fn
        return 2 * self.tp / denominator if denominator > 0 else 0.0

    def to_obj(self) -> dict:
        return {
            "tp": self.tp,
            "fp": self.fp,
            "fn": self.fn,
            "tn": self.tn,
            "precision": self.precision,
            "recall": self.recall,
            "f1": self.f1,
        }


def evaluate(model: Model, examples: Sequence[LabeledExample]) -> Metrics:
    """Confusion counts for the positive class at the fixed 0.5 threshold."""
    tp = fp = fn = tn = 0
    for ex in examples:
        predicted = 1 if score(model, ex.text) >= 0.5 else 0
        if predicted == 1 and ex.label == 1:
            tp += 1
        elif predicted == 1:
            fp += 1
        elif ex.label == 1:
            fn += 1
        else:
            tn += 1
    return Metrics(tp, fp, fn, tn)


def loss(model: Model, examples: Sequence[LabeledExample]) -> float:
    """Total logistic loss, computed in float64 (used by the gradient check)."""
    total = 0.0
    for ex in examples:
        indices, counts = featurize(ex.text)
        z = model.bias + float(
            np.dot(model.weights[indices].astype(np.float64), counts.astype(np.float64))
        )
        # log(1 + exp(-z)) for y=1, log(1 + exp(z)) for y=0, evaluated stably
        total += float(np.logaddexp(0.0, -z if ex.label == 1 else z))
    return total


def gradient(model: Model, examples: Sequence[LabeledExample]) -> tuple[dict[int, float], float]:
    """Analytic loss gradient: sparse weight part plus the bias component."""
    grads: dict[int, float] = {}
    bias_grad = 0.0
    for ex in examples:
        indices, counts = featurize(ex.text)
        z = model.bias + float(
            np.dot(model.weights[indices].astype(np.float64), counts.astype(np.float64))
        )
        g = _sigmoid(z) - ex.label
        for bucket, count in zip(indices.tolist(), counts.tolist()):
            grads[bucket] = grads.get(bucket, 0.0) + g * count
        bias_grad += g
    return grads, bias_grad


def save_model(path: str | Path, model: Model) -> None:
    """One JSON header line, then the raw little-endian float32 weights."""
    header = {
        "format": "privpipe-model",
        "version": 1,
        "n_buckets": N_BUCKETS,
        "ngram_orders": list(NGRAM_ORDERS),
        "bias": model.bias,
    }
    with open(path, "wb") as fh:
        fh.write(json.dumps(header, sort_keys=True).encode("ascii") + b"\n")
        fh.write(model.weights.astype("<f4").tobytes())


def load_model(path: str | Path) -> Model:
    with open(path, "rb") as fh:
        header = json.loads(fh.readline().decode("ascii"))
        if header.get("format") != "privpipe-model":
            raise ValidationError(f"{path} is not a model file")
        raw = fh.read()
    weights = np.frombuffer(raw, dtype="<f4").copy()
    if weights.shape != (header["n_buckets"],):
        raise ValidationError(f"model file {path} is truncated")
    return Model(weights, float(header["bias"]))


def _token_keys(text: str, case_sensitive: bool) -> list[str]:
    tokens = [tok for tok, _, _ in tokenize(text)]
    return tokens if case_sensitive else [tok.casefold() for tok in tokens]


def _has_subsequence(tokens: list[str], want: tuple[str, ...]) -> bool:
    width = len(want)
    return any(
        tuple(tokens[i : i + width]) == want for i in range(len(tokens) - width + 1)
    )


def entity_exposure(
    transformed: Sequence[LabeledExample],
    original: Sequence[LabeledExample],
    gazetteer: Gazetteer,
) -> float:
    """Fraction of originally present (example, surface) pairs still readable.

    Pairing is by example id; 1.0 means nothing was masked, 0.0 means every
    covered surface is gone.
    """
    case_sensitive = gazetteer.case_sensitive
    surface_keys = [
        (tuple(_token_keys(surface, case_sensitive)), surface)
        for surface in gazetteer.entries
    ]
    transformed_by_id = {ex.id: ex for ex in transformed}
    token_cache: dict[str, list[str]] = {}
    denominator = 0
    numerator = 0
    for ex in original:
        tokens = _token_keys(ex.text, case_sensitive)
        token_set = set(tokens)
        for key, _surface in surface_keys:
            if key[0] not in token_set or not _has_subsequence(tokens, key):
                continue
            denominator += 1
            still = transformed_by_id.get(ex.id)
            if still is None:
                continue
            if still.id not in token_cache:
                token_cache[still.id] = _token_keys(still.text, case_sensitive)
            if _has_subsequence(token_cache[still.id], key):
                numerator += 1
    return numerator / denominator if denominator else 0.0


def flip_audit(original: SplitCorpus, transformed: SplitCorpus) -> float:
    """Measured fraction of train labels that differ between the corpora."""
    before = {ex.id: ex.label for ex in original.train}
    after = {ex.id: ex.label for ex in transformed.train}
    if set(before) != set(after):
        raise IntegrityError("train splits are not id-aligned")
    if not before:
        return 0.0
    flipped = sum(1 for ex_id, label in before.items() if after[ex_id] != label)
    return flipped / len(before)


# --- sweep -----------------------------------------------------------------

BASELINE_LABEL = "Direct Fine-tune"
BT_LABEL = "Adversarial Defense (Back Translation)"
NER_LABEL = "NER Masking"

DEFAULT_RATES = (0.05, 0.10, 0.15, 0.20)
DEFAULT_TIER_SETS: tuple[frozenset[str], ...] = (
    frozenset(),
    frozenset({"BT"}),
    frozenset({"NER"}),
    frozenset({"DP"}),
    frozenset({"BT", "NER", "DP"}),
)


@dataclass(frozen=True)
class SweepRow:
    procedure: str
    tier_set: str  # canonical lowercase, e.g. "bt,ner,dp"
    noise_rate: float
    dev_f1: float
    test_f1: float
    entity_exposure: float
    label_flip_fraction: float


def procedure_label(tiers: frozenset[str], rate: float) -> str:
    if not tiers:
        return BASELINE_LABEL
    if tiers == {"BT"}:
        return BT_LABEL
    if tiers == {"NER"}:
        return NER_LABEL
    names = ", ".join(t for t in ("BT", "NER", "DP") if t in tiers)
    if "DP" in tiers:
        return f"{names} (noise = {rate:.2f})"
    return names


def sweep(
    corpus: SplitCorpus,
    rates: Sequence[float] = DEFAULT_RATES,
    tier_sets: Sequence[frozenset[str]] = DEFAULT_TIER_SETS,
    seed: int = 0,
    gazetteer: Gazetteer | None = None,
) -> list[SweepRow]:
    """Transform + train + evaluate for every (tier set, rate) combination.

    Tier sets without DP are rate-independent and produce a single row; sets
    with DP produce one row per rate. Rows keep the given ordering.
    """
    if not rates:
        raise ValueError("sweep needs at least one noise rate")
    from .ner import default_gazetteer

    probe_gazetteer = gazetteer if gazetteer is not None else default_gazetteer()
    original_examples = corpus.all_examples()
    rows: list[SweepRow] = []
    for tiers in tier_sets:
        row_rates = list(rates) if "DP" in tiers else [0.0]
        for rate in row_rates:
            cfg = TransformConfig(
                tiers=frozenset(tiers),
                noise=NoiseConfig(rate=rate),
                seed=seed,
            )
            transformed, _, _ = run(corpus, cfg)
            model = train(transformed.train, seed)
            dev = evaluate(model, transformed.dev)
            test = evaluate(model, transformed.test)
            exposure = entity_exposure(
                transformed.all_examples(), original_examples, probe_gazetteer
            )
            rows.append(
                SweepRow(
                    procedure=procedure_label(tiers, rate),
                    tier_set=",".join(t.lower() for t in ("BT", "NER", "DP") if t in tiers),
                    noise_rate=rate,
                    dev_f1=dev.f1,
                    test_f1=test.f1,
                    entity_exposure=exposure,
                    label_flip_fraction=flip_audit(corpus, transformed),
                )
            )
    return rows


CSV_COLUMNS = (
    "procedure",
    "tier_set",
    "noise_rate",
    "dev_f1",
    "test_f1",
    "entity_exposure",
    "label_flip_fraction",
)


def rows_to_csv(rows: Sequence[SweepRow]) -> str:
    buffer = io.StringIO()
    writer = csv.writer(buffer, lineterminator="\n")
    writer.writerow(CSV_COLUMNS)
    for row in rows:
        writer.writerow(
            [
                row.procedure,
                row.tier_set,
                f"{row.noise_rate:.2f}",
                f"{row.dev_f1:.4f}",
                f"{row.test_f1:.4f}",
                f"{row.entity_exposure:.4f}",
                f"{row.label_flip_fraction:.4f}",
            ]
        )
    return buffer.getvalue()


def rows_from_csv(text: str) -> list[SweepRow]:
    reader = csv.DictReader(io.StringIO(text))
    rows = []
    for record in reader:
        rows.append(
            SweepRow(
                procedure=record["procedure"],
                tier_set=record["tier_set"],
                noise_rate=float(record["noise_rate"]),
                dev_f1=float(record["dev_f1"]),
                test_f1=float(record["test_f1"]),
                entity_exposure=float(record["entity_exposure"]),
                label_flip_fraction=float(record["label_flip_fraction"]),
            )
        )
    return rows


def render_table(rows: Sequence[SweepRow]) -> str:
    """Plain-text report: procedure with dev and test F1 columns."""
    width = max(len(row.procedure) for row in rows) if rows else len("Procedure")
    width = max(width, len("Procedure"))
    lines = [f"{'Procedure':<{width}}  {'Dev F1':>7}  {'Test F1':>8}"]
    lines.append("-" * len(lines[0]))
    for row in rows:
        lines.append(f"{row.procedure:<{width}}  {row.dev_f1:>7.2f}  {row.test_f1:>8.2f}")
    return "\n".join(lines) + "\n"

"""Acceptance suite: one test per release criterion, in order.

Each test prints a single PASS line (visible under pytest -s); a failed
assertion is the FAIL line. The protocol corpus for end-to-end criteria is
the synthetic corpus, n=5000, seed 42, default 60/20/20 split.
"""

import json
import string
import time

import pytest

from privpipe.cli import main as cli_main
from privpipe.corpus import corpus_digest, generate_synthetic, split
from privpipe.evaluation import (
    evaluate,
    featurize,
    flip_audit,
    gradient,
    sweep,
    train,
)
from privpipe.corpus import LabeledExample
from privpipe.ner import default_gazetteer, mask_example
from privpipe.noise import NoiseConfig, perturb_chars
from privpipe.pipeline import TransformConfig, replay, run
from privpipe.rng import RngStream, fnv1a64

import numpy as np

PROTOCOL_SEED = 42
PROTOCOL_N = 5000

SPLITMIX64_SEED0 = [
    0xE220A8397B1DCDAF,
    0x6E789E6AA1B965F4,
    0x06C45D188009454F,
    0xF88BB8A8724C81EC,
    0x1B39896A51A8749B,
    0x53CB9F0C747EA2EA,
    0x2C829ABE1F4532E1,
    0xC584133AC916AB3C,
]


def _report(number: int, message: str) -> None:
    print(f"criterion {number:02d} PASS: {message}")


@pytest.fixture(scope="module")
def protocol_corpus():
    return split(generate_synthetic(PROTOCOL_N, PROTOCOL_SEED), seed=PROTOCOL_SEED)


def test_criterion_01_prng_conformance():
    stream = RngStream(0)
    produced = [stream.next_u64() for _ in range(8)]
    assert produced == SPLITMIX64_SEED0
    assert fnv1a64("") == 0xCBF29CE484222325
    _report(1, "SplitMix64 seed-0 vectors and FNV-1a-64 offset basis match the references")


def test_criterion_02_end_to_end_determinism(tmp_path):
    corpus_dir = tmp_path / "corpus"
    assert cli_main(["synth", "--n", str(PROTOCOL_N), "--seed", str(PROTOCOL_SEED), "--out", str(corpus_dir)]) == 0
    config = tmp_path / "cfg.json"
    config.write_text(
        json.dumps({"tiers": ["BT", "NER", "DP"], "noise": {"rate": 0.05}, "seed": PROTOCOL_SEED})
    )
    digests = []
    for name in ("one", "two"):
        out = tmp_path / name
        started = time.perf_counter()
        assert cli_main(["transform", "--corpus", str(corpus_dir), "--config", str(config), "--out", str(out)]) == 0
        elapsed = time.perf_counter() - started
        assert elapsed < 10.0, f"transform took {elapsed:.1f}s"
        digests.append(
            {
                p.name: f"{fnv1a64(p.read_bytes()):016x}"
                for p in sorted(out.iterdir())
            }
        )
    assert digests[0] == digests[1]
    assert set(digests[0]) == {"train.jsonl", "dev.jsonl", "test.jsonl", "audit.jsonl", "manifest.json"}
    _report(2, f"two identical transforms produced identical file digests ({elapsed:.1f}s per run)")


def test_criterion_03_identity_at_zero_noise(protocol_corpus):
    cfg = TransformConfig(tiers=frozenset({"DP"}), noise=NoiseConfig(rate=0.0), seed=PROTOCOL_SEED)
    out, records, manifest = run(protocol_corpus, cfg)
    assert manifest["output_digest"] == manifest["input_digest"]
    assert corpus_digest(out) == corpus_digest(protocol_corpus)
    assert records == []
    _report(3, "DP tier at rate 0 is byte-exact identity")


def test_criterion_04_label_flip_calibration():
    corpus = split(generate_synthetic(16667, seed=7), seed=7)
    assert len(corpus.train) == 10_000
    cfg = TransformConfig(
        tiers=frozenset({"DP"}),
        noise=NoiseConfig(rate=0.05, apply_to=frozenset({"train", "dev", "test"})),
        seed=7,
    )
    out, _, _ = run(corpus, cfg)
    fraction = flip_audit(corpus, out)
    assert 0.0456 <= fraction <= 0.0544, fraction
    assert [e.label for e in out.dev] == [e.label for e in corpus.dev]
    assert [e.label for e in out.test] == [e.label for e in corpus.test]
    _report(4, f"measured train flip fraction {fraction:.4f} in [0.0456, 0.0544]; dev/test labels untouched")


def test_criterion_05_perturbation_op_calibration():
    stream = RngStream(501)
    letters = string.ascii_letters
    n_chars = 1_000_000
    counts = {"insert": 0, "delete": 0, "substitute": 0}
    total_out = 0
    chunk = "".join(letters[stream.uniform_below(52)] for _ in range(1000))
    op_stream = RngStream(502)
    for _ in range(n_chars // len(chunk)):
        out, records = perturb_chars(chunk, 0.20, letters, op_stream)
        total_out += len(out)
        for record in records:
            counts[record.op] += 1
    for op, count in counts.items():
        frequency = count / n_chars
        assert abs(frequency - 0.0667) <= 0.001, (op, frequency)
    length_drift = abs(total_out - n_chars) / n_chars
    assert length_drift <= 0.005, length_drift
    _report(
        5,
        "op frequencies "
        + ", ".join(f"{op}={c / n_chars:.4f}" for op, c in sorted(counts.items()))
        + f"; length drift {length_drift:.4%}",
    )


def test_criterion_06_masking_soundness():
    from privpipe.evaluation import entity_exposure

    examples = generate_synthetic(1000, seed=60)
    g = default_gazetteer()
    masked = []
    for ex in examples:
        once, _ = mask_example(ex, g)
        twice, more = mask_example(once, g)
        assert twice.text == once.text and more == []
        masked.append(once)
    exposure = entity_exposure(masked, examples, g)
    assert exposure == 0.0
    _report(6, "entity exposure 0.0 after masking; masking idempotent on 1000 synthetic texts")


def test_criterion_07_trend_reproduction(protocol_corpus):
    started = time.perf_counter()
    rows = sweep(protocol_corpus, seed=PROTOCOL_SEED)
    elapsed = time.perf_counter() - started
    assert elapsed < 120.0, f"sweep took {elapsed:.0f}s"
    by_procedure = {row.procedure: row for row in rows}
    baseline = by_procedure["Direct Fine-tune"].test_f1
    # (a) clean separability
    assert baseline >= 0.95, baseline
    # (b) DP-only non-increasing, at most one adjacent inversion of <= 0.01
    dp_curve = [baseline] + [
        by_procedure[f"DP (noise = {rate:.2f})"].test_f1 for rate in (0.05, 0.10, 0.15, 0.20)
    ]
    inversions = [b - a for a, b in zip(dp_curve, dp_curve[1:]) if b > a]
    assert len(inversions) <= 1, dp_curve
    assert all(gap <= 0.01 for gap in inversions), dp_curve
    # (c) combined tiers at the top rate cost at least 0.05 F1
    combined_020 = by_procedure["BT, NER, DP (noise = 0.20)"].test_f1
    assert baseline - combined_020 >= 0.05, (baseline, combined_020)
    # (d) masking alone is nearly free
    ner_f1 = by_procedure["NER Masking"].test_f1
    assert abs(baseline - ner_f1) <= 0.02, (baseline, ner_f1)
    # combined never beats DP-only by more than the stated slack
    for rate in (0.05, 0.10, 0.15, 0.20):
        dp_f1 = by_procedure[f"DP (noise = {rate:.2f})"].test_f1
        comb_f1 = by_procedure[f"BT, NER, DP (noise = {rate:.2f})"].test_f1
        assert comb_f1 <= dp_f1 + 0.02, (rate, dp_f1, comb_f1)
    _report(
        7,
        f"baseline {baseline:.3f}; DP curve "
        + " -> ".join(f"{v:.3f}" for v in dp_curve)
        + f"; combined@0.20 {combined_020:.3f}; NER {ner_f1:.3f}; sweep {elapsed:.0f}s",
    )


def test_criterion_08_gradient_correctness():
    stream = RngStream(88)
    words = ["alpha", "bravo", "charlie", "delta", "echo", "foxtrot", "golf", "hotel"]
    examples = [
        LabeledExample(
            str(i),
            " ".join(words[stream.uniform_below(len(words))] for _ in range(6)),
            i % 2,
        )
        for i in range(10)
    ]
    model = train(examples, seed=88, epochs=1)
    grads, _ = gradient(model, examples)
    probes = sorted(grads)[:: max(1, len(grads) // 25)][:25]
    assert len(probes) >= 20
    features = [featurize(ex.text) for ex in examples]
    labels = [ex.label for ex in examples]

    def replica_loss(weights64):
        total = 0.0
        for (indices, counts), y in zip(features, labels):
            z = model.bias + float(weights64[indices] @ counts.astype(np.float64))
            total += float(np.logaddexp(0.0, -z if y == 1 else z))
        return total

    base = model.weights.astype(np.float64)
    h = 1e-5
    worst = 0.0
    for bucket in probes:
        up, down = base.copy(), base.copy()
        up[bucket] += h
        down[bucket] -= h
        estimate = (replica_loss(up) - replica_loss(down)) / (2 * h)
        relative = abs(grads[bucket] - estimate) / max(abs(estimate), 1e-12)
        worst = max(worst, relative)
        assert relative <= 1e-4, (bucket, grads[bucket], estimate)
    _report(8, f"analytic gradient matches central differences on {len(probes)} weights (worst rel err {worst:.2e})")


def test_criterion_09_audit_replay():
    corpus = split(generate_synthetic(200, seed=2718), seed=2718)
    stream = RngStream(31415)
    rate_choices = (0.0, 0.05, 0.1, 0.2, 0.4)
    apply_choices = [
        frozenset({"train"}),
        frozenset({"train", "dev"}),
        frozenset({"train", "dev", "test"}),
    ]
    for trial in range(50):
        cfg = TransformConfig(
            tiers=frozenset(t for t in ("BT", "NER", "DP") if stream.bernoulli(0.6)),
            noise=NoiseConfig(
                rate=rate_choices[stream.uniform_below(len(rate_choices))],
                flip_labels=bool(stream.bernoulli(0.7)),
                apply_to=apply_choices[stream.uniform_below(3)],
                unit="chars" if stream.bernoulli(0.7) else "examples",
            ),
            bt_mode="replace" if stream.bernoulli(0.7) else "augment",
            bt_apply_to=apply_choices[stream.uniform_below(3)],
            seed=stream.uniform_below(1 << 32),
        )
        transformed, records, _ = run(corpus, cfg)
        replayed = replay(corpus, records)
        assert corpus_digest(replayed) == corpus_digest(transformed), (trial, cfg)
    _report(9, "replay reproduced the transform byte-exactly for 50 random configs")


def test_criterion_10_sweep_report_structure(tmp_path):
    corpus_dir = tmp_path / "corpus"
    assert cli_main(["synth", "--n", "200", "--seed", "9", "--out", str(corpus_dir)]) == 0
    report = tmp_path / "report.csv"
    assert (
        cli_main(
            ["sweep", "--corpus", str(corpus_dir), "--seed", "9", "--out", str(report)]
        )
        == 0
    )
    import csv

    with open(report, newline="") as fh:
        procedures = [record["procedure"] for record in csv.DictReader(fh)]
    expected = [
        "Direct Fine-tune",
        "Adversarial Defense (Back Translation)",
        "NER Masking",
        "DP (noise = 0.05)",
        "DP (noise = 0.10)",
        "DP (noise = 0.15)",
        "DP (noise = 0.20)",
        "BT, NER, DP (noise = 0.05)",
        "BT, NER, DP (noise = 0.10)",
        "BT, NER, DP (noise = 0.15)",
        "BT, NER, DP (noise = 0.20)",
    ]
    assert procedures == expected
    assert len(procedures) == 11
    _report(10, "default sweep grid emits exactly the 11 expected procedure rows")

import string

import numpy as np
import pytest

from privpipe.corpus import LabeledExample, examples_to_bytes, generate_synthetic, split
from privpipe.errors import ConfigError
from privpipe.noise import NoiseConfig, apply_dp, flip_labels, perturb_chars
from privpipe.rng import RngStream, derive_stream

# frozen from a by-hand oracle of the stated rules, before the main build
PERTURB_GOLDEN_TEXT = "Marilyn calDlaed the show"
PERTURB_GOLDEN_OPS = [("insert", 10, "l", "lD"), ("insert", 11, "l", "la")]


def test_flip_rate_zero_and_one():
    examples = [LabeledExample(str(i), "t", i % 2) for i in range(200)]
    same, records = flip_labels(examples, 0.0, seed=1)
    assert [e.label for e in same] == [e.label for e in examples]
    assert records == []
    flipped, records = flip_labels(examples, 1.0, seed=1)
    assert [e.label for e in flipped] == [1 - e.label for e in examples]
    assert len(records) == 200
    assert all(r.tier == "dp-label" and r.op == "flip" for r in records)


def test_flip_calibration():
    # binomial mean 500, sigma ~= 21.8 at n=10000, p=0.05; +-2 sigma window
    examples = [LabeledExample(f"id-{i}", "t", 0) for i in range(10_000)]
    flipped, records = flip_labels(examples, 0.05, seed=7)
    assert 456 <= len(records) <= 544
    assert sum(e.label for e in flipped) == len(records)


def test_perturb_rate_zero_is_identity():
    stream = derive_stream(0, "x", "dp-char")
    out, records = perturb_chars("any text at all", 0.0, string.ascii_letters, stream)
    assert out == "any text at all"
    assert records == []


def test_perturb_empty_text():
    stream = derive_stream(0, "x", "dp-char")
    assert perturb_chars("", 0.9, string.ascii_letters, stream) == ("", [])


def test_perturb_golden_value():
    stream = derive_stream(42, "t1", "dp-char")
    out, records = perturb_chars("Marilyn called the show", 0.2, string.ascii_letters, stream)
    assert out == PERTURB_GOLDEN_TEXT
    assert [(r.op, r.position, r.original, r.emitted) for r in records] == PERTURB_GOLDEN_OPS


def test_perturb_deterministic():
    a = perturb_chars("text to corrupt", 0.5, "ab", derive_stream(1, "e", "dp-char"))
    b = perturb_chars("text to corrupt", 0.5, "ab", derive_stream(1, "e", "dp-char"))
    assert a == b


def test_perturb_op_calibration():
    # each op occurs at rate/3 per character; 4-sigma binomial bounds
    stream = RngStream(91)
    n_chars = 200_000
    counts = {"insert": 0, "delete": 0, "substitute": 0}
    _, records = perturb_chars("x" * n_chars, 0.2, string.ascii_letters, stream)
    for record in records:
        counts[record.op] += 1
    p = 0.2 / 3
    sigma = (n_chars * p * (1 - p)) ** 0.5
    for op, count in counts.items():
        assert abs(count - n_chars * p) <= 4 * sigma, (op, count)


def test_perturb_preserves_length_in_expectation():
    # inserts and deletes are equiprobable; mean output length stays put
    stream = RngStream(17)
    total = 0
    n_texts, length = 10_000, 100
    for _ in range(n_texts):
        out, _ = perturb_chars("a" * length, 0.2, string.ascii_letters, stream)
        total += len(out)
    assert abs(total / n_texts - length) < 0.5


@pytest.fixture(scope="module")
def small_corpus():
    return split(generate_synthetic(300, seed=33), seed=33)


def test_apply_dp_rate_zero_byte_exact(small_corpus):
    out, records = apply_dp(small_corpus, NoiseConfig(rate=0.0), seed=5)
    assert records == []
    for (_, before), (_, after) in zip(small_corpus.splits(), out.splits()):
        assert examples_to_bytes(before) == examples_to_bytes(after)


def test_apply_dp_touches_only_configured_splits(small_corpus):
    out, _ = apply_dp(small_corpus, NoiseConfig(rate=0.2), seed=5)
    assert examples_to_bytes(out.dev) == examples_to_bytes(small_corpus.dev)
    assert examples_to_bytes(out.test) == examples_to_bytes(small_corpus.test)
    assert examples_to_bytes(out.train) != examples_to_bytes(small_corpus.train)


def test_apply_dp_dev_test_labels_never_flip(small_corpus):
    cfg = NoiseConfig(rate=1.0, apply_to=frozenset({"train", "dev", "test"}))
    out, _ = apply_dp(small_corpus, cfg, seed=5)
    assert [e.label for e in out.dev] == [e.label for e in small_corpus.dev]
    assert [e.label for e in out.test] == [e.label for e in small_corpus.test]
    assert [e.label for e in out.train] == [1 - e.label for e in small_corpus.train]
    # dev/test texts were perturbed, though
    assert examples_to_bytes(out.dev) != examples_to_bytes(small_corpus.dev)


def test_apply_dp_flip_only_with_train_selected(small_corpus):
    cfg = NoiseConfig(rate=1.0, apply_to=frozenset({"dev"}))
    out, records = apply_dp(small_corpus, cfg, seed=5)
    assert [e.label for e in out.train] == [e.label for e in small_corpus.train]
    assert all(r.tier == "dp-char" for r in records)


def test_apply_dp_flip_labels_switch(small_corpus):
    cfg = NoiseConfig(rate=1.0, flip_labels=False)
    out, records = apply_dp(small_corpus, cfg, seed=5)
    assert [e.label for e in out.train] == [e.label for e in small_corpus.train]
    assert all(r.tier == "dp-char" for r in records)


def test_apply_dp_example_unit_gates_whole_examples(small_corpus):
    cfg = NoiseConfig(rate=0.3, unit="examples")
    out, _ = apply_dp(small_corpus, cfg, seed=5)
    changed = sum(
        1 for a, b in zip(small_corpus.train, out.train) if a.text != b.text
    )
    n = len(out.train)
    sigma = (n * 0.3 * 0.7) ** 0.5
    assert abs(changed - 0.3 * n) <= 4 * sigma
    # rate 0 and rate 1 edge cases
    none, _ = apply_dp(small_corpus, NoiseConfig(rate=0.0, unit="examples"), seed=5)
    assert examples_to_bytes(none.train) == examples_to_bytes(small_corpus.train)


def test_noise_config_validation():
    with pytest.raises(ValueError):
        NoiseConfig(rate=1.5)
    with pytest.raises(ValueError):
        NoiseConfig(rate=0.1, alphabet="")
    with pytest.raises(ConfigError):
        NoiseConfig(rate=0.1, unit="words")
    with pytest.raises(ConfigError):
        NoiseConfig(rate=0.1, apply_to=frozenset({"validation"}))


def _levenshtein(a: str, b: str) -> int:
    # vectorized row DP: substitution/deletion elementwise, then the insert
    # scan min_k(m[k] + j - k) via an accumulate over (m - index)
    if not a or not b:
        return max(len(a), len(b))
    bs = np.frombuffer(b.encode("utf-8"), dtype=np.uint8)
    index = np.arange(len(bs) + 1)
    previous = index.copy()
    for i, ch in enumerate(a.encode("utf-8")):
        current = np.empty_like(previous)
        current[0] = i + 1
        np.minimum(previous[:-1] + (bs != ch), previous[1:] + 1, out=current[1:])
        shifted = current - index
        np.minimum.accumulate(shifted, out=shifted)
        previous = shifted + index
    return int(previous[-1])


def test_monotone_corruption_in_rate():
    examples = generate_synthetic(120, seed=44)
    means = []
    for rate in (0.05, 0.10, 0.15, 0.20):
        distances = []
        for ex in examples:
            stream = derive_stream(11, ex.id, "dp-char")
            out, _ = perturb_chars(ex.text, rate, string.ascii_letters, stream)
            distances.append(_levenshtein(ex.text, out) / max(len(ex.text), 1))
        means.append(sum(distances) / len(distances))
    assert all(b >= a for a, b in zip(means, means[1:])), means

"""Deterministic randomness with independent per-example, per-stage streams.

Every stochastic decision in the pipeline draws from a stream derived from
(global seed, example id, stage tag), so results are bit-identical across
runs, platforms, and degrees of parallelism: no stage can perturb the draws
another stage makes for a given example.

The generator is SplitMix64 (public-domain, ~5 lines, published test
vectors); stream derivation hashes the key with FNV-1a 64. Neither is
cryptographic: this module provides reproducibility, not secrecy.
"""

from __future__ import annotations

from .errors import ConfigError

MASK64 = (1 << 64) - 1

FNV_OFFSET_BASIS = 0xCBF29CE484222325
FNV_PRIME = 0x100000001B3

# Stage tags with a reserved stream; unknown tags are a configuration error.
STREAM_TAGS = ("bt", "ner", "dp-label", "dp-char", "split", "train")


def fnv1a64(data: bytes | str) -> int:
    """FNV-1a 64-bit hash; strings are hashed over their UTF-8 bytes."""
    if isinstance(data, str):
        data = data.encode("utf-8")
    h = FNV_OFFSET_BASIS
    for byte in data:
        h = ((h ^ byte) * FNV_PRIME) & MASK64
    return h


class RngStream:
    """A SplitMix64 generator: one 64-bit word of state, value-semantic.

    Streams are cheap to copy and never shared between examples, which is
    what makes parallel transformation order-independent.
    """

    __slots__ = ("state",)

    def __init__(self, state: int):
        self.state = state & MASK64

    def clone(self) -> "RngStream":
        return RngStream(self.state)

    def next_u64(self) -> int:
        """Advance one SplitMix64 step and return a 64-bit value."""
        self.state = (self.state + 0x9E3779B97F4A7C15) & MASK64
        z = self.state
        z = ((z ^ (z >> 30)) * 0xBF58476D1CE4E5B9) & MASK64
        z = ((z ^ (z >> 27)) * 0x94D049BB133111EB) & MASK64
        return (z ^ (z >> 31)) & MASK64

    def bernoulli(self, p: float) -> bool:
        """True with probability p, using a 53-bit uniform fraction.

        Always consumes exactly one draw. p=0 is never true, p=1 always.
        """
        if not 0.0 <= p <= 1.0:
            raise ValueError(f"probability must be in [0, 1], got {p!r}")
        x = self.next_u64()
        return (x >> 11) / 9007199254740992.0 < p  # 2**53

    def uniform_below(self, n: int) -> int:
        """Unbiased uniform integer in [0, n) via rejection sampling."""
        if n < 1:
            raise ValueError(f"n must be >= 1, got {n!r}")
        threshold = (1 << 64) - ((1 << 64) % n)
        while True:
            x = self.next_u64()
            if x < threshold:
                return x % n

    def shuffle(self, items: list) -> None:
        """In-place Fisher-Yates shuffle."""
        for i in range(len(items) - 1, 0, -1):
            j = self.uniform_below(i + 1)
            items[i], items[j] = items[j], items[i]


def derive_stream(global_seed: int, example_id: str, tag: str) -> RngStream:
    """Derive the independent stream for (example, stage).

    Initial state is FNV-1a-64(example_id + ":" + tag) XOR global_seed, so
    distinct (example_id, tag) pairs get distinct streams barring a hash
    collision.
    """
    if tag not in STREAM_TAGS:
        raise ConfigError(f"unknown stream tag {tag!r}, expected one of {STREAM_TAGS}")
    return RngStream(fnv1a64(f"{example_id}:{tag}") ^ (global_seed & MASK64))

"""Word lists behind the synthetic corpus generator.

Two disjoint pools: persuasion markers (label-1 texts embed a few of them)
and neutral everyday words (the filler both classes share). Both pools are
organized as synonym groups so the shipped pivot lexicons can collapse
variants onto a canonical form; standalone words are never collapsed.

Order matters: the generator indexes these tuples with uniform draws, so
reordering entries changes every synthetic corpus.
"""

from __future__ import annotations

# canonical -> variants; the canonical form is what a round trip produces
MARKER_GROUPS: dict[str, tuple[str, ...]] = {
    "traitors": ("betrayers", "turncoats"),
    "glorious": ("majestic", "exalted"),
    "enemy": ("foe", "adversary"),
    "awaken": ("arise", "rouse"),
    "puppets": ("stooges", "lackeys"),
    "destiny": ("fate", "providence"),
    "heroes": ("champions", "defenders"),
    "corrupt": ("crooked", "rotten"),
    "lies": ("falsehoods", "deceit"),
    "invaders": ("intruders", "marauders"),
    "uprising": ("revolt", "rebellion"),
    "loyal": ("faithful", "devoted"),
    "shame": ("disgrace", "dishonor"),
    "purge": ("cleanse", "expel"),
    "tyrant": ("despot", "oppressor"),
    "crusade": ("quest", "cause"),
    "vermin": ("pests", "parasites"),
    "empire": ("dominion", "realm"),
    "banners": ("flags", "standards"),
    "martyrs": ("fallen", "sacrificed"),
    "doom": ("ruin", "downfall"),
    "scheme": ("plot", "conspiracy"),
    "masses": ("crowds", "throngs"),
    "villains": ("scoundrels", "crooks"),
    "honor": ("pride", "valor"),
    "fear": ("dread", "terror"),
    "weak": ("feeble", "spineless"),
    "mighty": ("unyielding", "fearless"),
    "gospel": ("doctrine", "creed"),
    "unite": ("rally", "mobilize"),
}

NEUTRAL_GROUPS: dict[str, tuple[str, ...]] = {
    "quickly": ("swiftly", "rapidly"),
    "morning": ("daybreak", "forenoon"),
    "market": ("bazaar", "marketplace"),
    "weather": ("climate", "drizzle"),
    "garden": ("courtyard", "yard"),
    "coffee": ("espresso", "brew"),
    "children": ("kids", "youngsters"),
    "street": ("avenue", "boulevard"),
    "dinner": ("supper", "meal"),
    "house": ("dwelling", "residence"),
    "music": ("melody", "tune"),
    "walking": ("strolling", "wandering"),
    "talked": ("chatted", "spoke"),
    "bought": ("purchased", "acquired"),
    "looked": ("glanced", "gazed"),
    "call": ("calling", "phoning", "ringing"),
    "river": ("creek", "brook"),
    "evening": ("dusk", "nightfall"),
}

NEUTRAL_WORDS: tuple[str, ...] = (
    "the", "a", "an", "and", "of", "to", "in", "on", "at", "with",
    "for", "from", "is", "was", "near", "after", "before", "over",
    "under", "about", "we", "they", "you", "today", "yesterday",
    "again", "often", "quietly", "warm", "cold", "small", "large",
    "old", "fresh", "gentle", "bright", "slow", "early", "late",
    "open", "window", "door", "table", "chair", "road", "town",
    "field", "tree", "rain", "sun", "cloud", "book", "letter",
    "friend", "neighbor", "family", "visit", "walk", "ride", "shop",
    "bread", "tea", "soup", "apple", "cheese",
)


def _flatten(groups: dict[str, tuple[str, ...]]) -> tuple[str, ...]:
    out: list[str] = []
    for canonical, variants in groups.items():
        out.append(canonical)
        out.extend(variants)
    return tuple(out)


MARKER_SURFACES: tuple[str, ...] = _flatten(MARKER_GROUPS)

NEUTRAL_SURFACES: tuple[str, ...] = NEUTRAL_WORDS + _flatten(NEUTRAL_GROUPS)

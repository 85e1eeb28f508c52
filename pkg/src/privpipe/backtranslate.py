"""Round-trip translation through pivot-language lexicons.

The shipped pivots are deterministic synonym-collapse tables: the forward
map sends several source words to one pivot token, the backward map sends
that token to a single canonical word, so a round trip canonicalizes
wording without a machine-translation dependency. A client for a real
translation service is provided for users who want live MT; its responses
are cached locally so re-runs stay reproducible and offline.
"""

from __future__ import annotations

import json
import time
import urllib.error
import urllib.request
from dataclasses import dataclass
from pathlib import Path
from typing import Protocol, Sequence

from .audit import AuditRecord
from .corpus import LabeledExample
from .errors import ConfigError, ValidationError
from .resources import PIVOT_NAMES, bundled_lexicon_path
from .rng import derive_stream

BT_MODES = ("replace", "augment")


@dataclass
class PivotLexicon:
    """name plus forward (word -> pivot token) and backward (token -> word) maps."""

    name: str
    forward: dict[str, str]
    backward: dict[str, str]

    def __post_init__(self) -> None:
        missing = set(self.forward.values()) - set(self.backward)
        if missing:
            raise ValidationError(
                f"lexicon {self.name!r}: pivot tokens {sorted(missing)[:5]} lack backward entries"
            )


def load_lexicon(path: str | Path) -> PivotLexicon:
    obj = json.loads(Path(path).read_text(encoding="utf-8"))
    try:
        return PivotLexicon(obj["name"], dict(obj["forward"]), dict(obj["backward"]))
    except KeyError as exc:
        raise ValidationError(f"lexicon file {path}: missing key {exc.args[0]!r}") from exc


def bundled_lexicon(name: str) -> PivotLexicon:
    return load_lexicon(bundled_lexicon_path(name))


def bundled_pivots() -> list[PivotLexicon]:
    return [bundled_lexicon(name) for name in PIVOT_NAMES]


def _split_suffix(token: str) -> tuple[str, str]:
    # punctuation travels with the word as a suffix: "calling." -> ("calling", ".")
    cut = len(token)
    while cut > 0 and not token[cut - 1].isalnum():
        cut -= 1
    return token[:cut], token[cut:]


def _recase(word: str, like: str) -> str:
    if like and like[0].isupper() and word:
        return word[0].upper() + word[1:]
    return word


def _map_tokens(text: str, mapping: dict[str, str]) -> str:
    out = []
    for token in text.split():
        core, suffix = _split_suffix(token)
        if core and core.isalpha():
            target = mapping.get(core.lower())
            if target is not None:
                out.append(_recase(target, core) + suffix)
                continue
        out.append(token)
    return " ".join(out)


def round_trip(text: str, lexicon: PivotLexicon) -> str:
    """Map each known word through the pivot and back to its canonical form.

    Unknown tokens pass through; spacing is normalized to single spaces;
    canonical words are fixed points, so the function is idempotent.
    """
    out = []
    for token in text.split():
        core, suffix = _split_suffix(token)
        if core and core.isalpha():
            pivot_token = lexicon.forward.get(core.lower())
            if pivot_token is not None:
                out.append(_recase(lexicon.backward[pivot_token], core) + suffix)
                continue
        out.append(token)
    return " ".join(out)


def back_translate_example(
    ex: LabeledExample,
    pivots: Sequence[PivotLexicon],
    mode: str,
    seed: int,
) -> list[tuple[LabeledExample, AuditRecord | None]]:
    """Apply the round trip to one example.

    replace: one output, the round trip through a seed-chosen pivot.
    augment: the original plus one round trip per pivot, ids suffixed
    "#bt-<pivot>". Labels are never modified.
    """
    if not pivots:
        raise ValueError("back translation needs at least one pivot lexicon")
    if mode == "replace":
        choice = derive_stream(seed, ex.id, "bt").uniform_below(len(pivots))
        pivot = pivots[choice]
        new_text = round_trip(ex.text, pivot)
        if new_text == ex.text:
            return [(ex, None)]
        record = AuditRecord(ex.id, "bt", f"replace:{pivot.name}", 0, ex.text, new_text)
        return [(ex.with_text(new_text), record)]
    if mode == "augment":
        outputs: list[tuple[LabeledExample, AuditRecord | None]] = [(ex, None)]
        for pivot in pivots:
            new_id = f"{ex.id}#bt-{pivot.name}"
            new_text = round_trip(ex.text, pivot)
            record = AuditRecord(new_id, "bt", f"augment:{pivot.name}", 0, ex.text, new_text)
            outputs.append((LabeledExample(new_id, new_text, ex.label, dict(ex.extra)), record))
        return outputs
    raise ValueError(f"unknown back-translation mode {mode!r}, expected one of {BT_MODES}")


class Translator(Protocol):
    def translate(self, text: str, source_lang: str, target_lang: str) -> str: ...


class LexiconTranslator:
    """Offline, deterministic Translator over a set of pivot lexicons."""

    def __init__(self, lexicons: Sequence[PivotLexicon]):
        self._by_name = {lex.name: lex for lex in lexicons}

    def translate(self, text: str, source_lang: str, target_lang: str) -> str:
        if source_lang == "en" and target_lang in self._by_name:
            return _map_tokens(text, self._by_name[target_lang].forward)
        if target_lang == "en" and source_lang in self._by_name:
            return _map_tokens(text, self._by_name[source_lang].backward)
        raise ConfigError(
            f"no lexicon for {source_lang!r} -> {target_lang!r}; loaded: {sorted(self._by_name)}"
        )


class RemoteTranslator:
    """Client for an external translation service.

    Wire contract: POST <base_url>/translate with {"text", "source",
    "target"}, response {"text"}. Every response is cached in a local JSON
    store keyed by (text, source, target) so repeated runs never re-contact
    the service.
    """

    def __init__(
        self,
        base_url: str,
        cache_path: str | Path | None = None,
        timeout: float = 10.0,
        retries: int = 2,
        retry_wait: float = 0.1,
    ):
        self.base_url = base_url.rstrip("/")
        self.timeout = timeout
        self.retries = retries
        self.retry_wait = retry_wait
        self.cache_path = Path(cache_path) if cache_path is not None else None
        self._cache: dict[str, str] = {}
        if self.cache_path is not None and self.cache_path.exists():
            self._cache = json.loads(self.cache_path.read_text(encoding="utf-8"))

    @staticmethod
    def _key(text: str, source_lang: str, target_lang: str) -> str:
        return json.dumps([text, source_lang, target_lang], ensure_ascii=False)

    def translate(self, text: str, source_lang: str, target_lang: str) -> str:
        key = self._key(text, source_lang, target_lang)
        if key in self._cache:
            return self._cache[key]
        body = json.dumps(
            {"text": text, "source": source_lang, "target": target_lang},
            ensure_ascii=False,
        ).encode("utf-8")
        request = urllib.request.Request(
            self.base_url + "/translate",
            data=body,
            headers={"Content-Type": "application/json"},
            method="POST",
        )
        for attempt in range(self.retries + 1):
            try:
                with urllib.request.urlopen(request, timeout=self.timeout) as response:
                    payload = json.loads(response.read().decode("utf-8"))
                break
            except (urllib.error.URLError, OSError, json.JSONDecodeError) as exc:
                if attempt == self.retries:
                    raise ConfigError(f"translation service unreachable: {exc}") from exc
                time.sleep(self.retry_wait)
        result = payload.get("text")
        if not isinstance(result, str):
            raise ValidationError(f"translation service returned no text field: {payload!r}")
        self._cache[key] = result
        if self.cache_path is not None:
            self.cache_path.write_text(
                json.dumps(self._cache, sort_keys=True, ensure_ascii=False, indent=2) + "\n",
                encoding="utf-8",
            )
        return result

    def round_trip(self, text: str, pivot_lang: str) -> str:
        return self.translate(self.translate(text, "en", pivot_lang), pivot_lang, "en")

"""Access to bundled data files (default gazetteer and pivot lexicons)."""

from __future__ import annotations

import json
from importlib import resources
from pathlib import Path

from .errors import ConfigError

PIVOT_NAMES = ("xhosa", "twi", "lao", "pashto", "yoruba")


def _data_root():
    return resources.files("privpipe") / "data"


def default_gazetteer_path() -> Path:
    return Path(str(_data_root() / "gazetteer.jsonl"))


def bundled_lexicon_path(name: str) -> Path:
    if name not in PIVOT_NAMES:
        raise ConfigError(f"no bundled pivot lexicon named {name!r}; have {PIVOT_NAMES}")
    return Path(str(_data_root() / "lexicons" / f"{name}.json"))


def lexicon_manifest() -> dict:
    path = _data_root() / "lexicons" / "manifest.json"
    return json.loads(path.read_text(encoding="utf-8"))

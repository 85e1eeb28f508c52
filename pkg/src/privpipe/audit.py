"""Audit records: one entry per text or label mutation, enough to replay
the whole transformation without touching the random number generator."""

from __future__ import annotations

import json
from dataclasses import dataclass
from pathlib import Path
from typing import Iterable

from .errors import ValidationError

TIERS = ("bt", "ner", "dp-label", "dp-char")


@dataclass(frozen=True)
class AuditRecord:
    example_id: str
    tier: str  # one of TIERS
    op: str  # e.g. "replace:xhosa", "mask:PER", "flip", "insert"
    position: int  # offset into the tier's input text (0 for whole-text ops)
    original: str
    emitted: str

    def describe(self) -> str:
        return f"id={self.example_id} tier={self.tier} op={self.op} at {self.position}"


def to_obj(record: AuditRecord) -> dict:
    return {
        "id": record.example_id,
        "tier": record.tier,
        "op": record.op,
        "index": record.position,
        "original": record.original,
        "emitted": record.emitted,
    }


def from_obj(obj: dict) -> AuditRecord:
    try:
        record = AuditRecord(
            example_id=obj["id"],
            tier=obj["tier"],
            op=obj["op"],
            position=obj["index"],
            original=obj["original"],
            emitted=obj["emitted"],
        )
    except KeyError as exc:
        raise ValidationError(f"audit record missing key {exc.args[0]!r}") from exc
    if record.tier not in TIERS:
        raise ValidationError(f"audit record has unknown tier {record.tier!r}")
    return record


def audit_to_bytes(records: Iterable[AuditRecord]) -> bytes:
    lines = (
        json.dumps(to_obj(r), sort_keys=True, ensure_ascii=False, separators=(",", ":"))
        for r in records
    )
    return "".join(line + "\n" for line in lines).encode("utf-8")


def write_audit(path: str | Path, records: Iterable[AuditRecord]) -> None:
    Path(path).write_bytes(audit_to_bytes(records))


def read_audit(path: str | Path) -> list[AuditRecord]:
    records = []
    with open(path, encoding="utf-8") as fh:
        for i, line in enumerate(fh, start=1):
            if not line.strip():
                continue
            try:
                obj = json.loads(line)
            except json.JSONDecodeError as exc:
                raise ValidationError(f"audit line {i}: invalid JSON: {exc.msg}") from exc
            records.append(from_obj(obj))
    return records

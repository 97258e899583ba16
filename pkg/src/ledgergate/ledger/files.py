"""Append-only ndjson persistence with hash chaining and a head pointer.

Every line is the canonical JSON of one object. The record log wraps each
payload in a chain entry carrying the previous entry's hash; the head sidecar
pins the expected length and tip so silent truncation is detectable. A final
line without a trailing newline is a torn write from a crash and is dropped;
any other inconsistency is corruption.
"""

from __future__ import annotations

import json
import os
from pathlib import Path
from typing import Any

from ..crypto import canonicalize, sha3_256_hex
from .errors import CorruptLedgerError

ZERO_HASH = "0" * 64


def chain_entry(payload: dict, prev_hash: str) -> dict:
    entry_hash = sha3_256_hex(canonicalize({"payload": payload, "prev_hash": prev_hash}))
    return {"payload": payload, "prev_hash": prev_hash, "entry_hash": entry_hash}


def read_ndjson(path: Path) -> list[Any]:
    """Parse all complete lines; drop a torn trailing line, fail otherwise."""
    if not path.exists():
        return []
    raw = path.read_bytes()
    if not raw:
        return []
    ends_with_newline = raw.endswith(b"\n")
    lines = raw.split(b"\n")
    if lines and lines[-1] == b"":
        lines.pop()
    objects = []
    for i, line in enumerate(lines):
        try:
            objects.append(json.loads(line))
        except (ValueError, UnicodeDecodeError):
            if i == len(lines) - 1 and not ends_with_newline:
                break  # torn tail from a crash mid-write
            raise CorruptLedgerError(f"{path.name}: line {i + 1} is not valid JSON") from None
    return objects


def append_ndjson(handle, obj: dict) -> None:
    handle.write(canonicalize(obj) + b"\n")
    handle.flush()
    os.fsync(handle.fileno())


def read_head(path: Path) -> dict | None:
    if not path.exists():
        return None
    try:
        head = json.loads(path.read_text("utf-8"))
    except (ValueError, UnicodeDecodeError):
        raise CorruptLedgerError("head pointer is not valid JSON") from None
    if not isinstance(head, dict):
        raise CorruptLedgerError("head pointer is not an object")
    return head


def write_head(path: Path, head: dict) -> None:
    tmp = path.with_suffix(".tmp")
    tmp.write_bytes(canonicalize(head))
    with open(tmp, "rb") as handle:
        os.fsync(handle.fileno())
    os.replace(tmp, path)


def verify_record_log(entries: list[Any], label: str) -> list[dict]:
    """Check the hash chain of a record log; return the payloads."""
    payloads = []
    prev = ZERO_HASH
    for i, entry in enumerate(entries):
        if not isinstance(entry, dict) or set(entry.keys()) != {"payload", "prev_hash", "entry_hash"}:
            raise CorruptLedgerError(f"{label}: entry {i} is not a chain entry")
        if entry["prev_hash"] != prev:
            raise CorruptLedgerError(f"{label}: entry {i} does not link to the previous entry")
        expected = sha3_256_hex(canonicalize({"payload": entry["payload"], "prev_hash": prev}))
        if entry["entry_hash"] != expected:
            raise CorruptLedgerError(f"{label}: entry {i} fails hash verification")
        prev = entry["entry_hash"]
        payloads.append(entry["payload"])
    return payloads


def reconcile_head(head: dict | None, section: str, hashes: list[str]) -> tuple[bool, dict]:
    """Compare a verified log's chain hashes against the head pointer.

    Returns (needs_repair, new_head_section). A log exactly one entry ahead of
    the head is a crash artifact (append landed, head update did not) and is
    repaired; anything else inconsistent is corruption.
    """
    count = len(hashes)
    tip = hashes[-1] if hashes else ZERO_HASH
    if head is None:
        if count == 0:
            return False, {"count": 0, "tip": ZERO_HASH}
        raise CorruptLedgerError(f"{section}: head pointer missing for a non-empty log")
    section_head = head.get(section)
    if not isinstance(section_head, dict):
        raise CorruptLedgerError(f"{section}: head pointer lacks this section")
    recorded = section_head.get("count")
    if not isinstance(recorded, int) or recorded < 0:
        raise CorruptLedgerError(f"{section}: head count is not a non-negative integer")
    if count < recorded:
        raise CorruptLedgerError(f"{section}: log truncated ({count} entries, head says {recorded})")
    if count > recorded + 1:
        raise CorruptLedgerError(f"{section}: log has {count - recorded} entries beyond the head")
    recorded_tip = hashes[recorded - 1] if recorded else ZERO_HASH
    if section_head.get("tip") != recorded_tip:
        raise CorruptLedgerError(f"{section}: head tip does not match the log")
    return count != recorded, {"count": count, "tip": tip}

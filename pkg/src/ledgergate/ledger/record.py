"""The unit a backend stores: a committed transaction plus commit metadata."""

from __future__ import annotations

from dataclasses import dataclass
from typing import Any, Mapping


@dataclass(frozen=True)
class CommittedRecord:
    """A transaction as committed: full wire form with id, the commit
    timestamp (ms epoch, non-decreasing with sequence), its position in the
    total commit order, the searchability indexes built during validation,
    and, for block-batched backends, the enclosing block reference."""

    transaction: dict
    timestamp: int
    sequence: int
    parents: tuple[str, ...] = ()
    search_terms: tuple[str, ...] = ()
    context_version: str | None = None
    block_ref: dict | None = None

    @property
    def id(self) -> str:
        return self.transaction["id"]

    def to_wire(self) -> dict:
        wire: dict[str, Any] = {
            "transaction": self.transaction,
            "timestamp": self.timestamp,
            "sequence": self.sequence,
            "parents": list(self.parents),
            "search_terms": list(self.search_terms),
        }
        if self.context_version is not None:
            wire["context_version"] = self.context_version
        if self.block_ref is not None:
            wire["block_ref"] = self.block_ref
        return wire

    @classmethod
    def from_wire(cls, wire: Mapping[str, Any]) -> "CommittedRecord":
        return cls(
            transaction=dict(wire["transaction"]),
            timestamp=wire["timestamp"],
            sequence=wire["sequence"],
            parents=tuple(wire.get("parents") or ()),
            search_terms=tuple(wire.get("search_terms") or ()),
            context_version=wire.get("context_version"),
            block_ref=dict(wire["block_ref"]) if wire.get("block_ref") else None,
        )

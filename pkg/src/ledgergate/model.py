"""Transaction model: the four wire kinds, asset-state derivation, and the
field-spec schema language carried by context transactions.

Wire objects are plain dicts with the exact field names used on the HTTP
surface (``id``, ``data``, ``metadata``, ``signature``, ``asset_id``,
``input_id``, ``context_id``, ``user_id``, ``public_key``, ``timestamp``).
All types here are immutable values; operations are pure functions.
"""

from __future__ import annotations

import re
from dataclasses import dataclass, field
from enum import Enum
from typing import Any, Mapping, Sequence

__all__ = [
    "AssetState",
    "BrokenChainError",
    "ContextSchema",
    "ContextValueSpec",
    "EmptyChainError",
    "Kind",
    "UnclassifiableTransactionError",
    "VALUE_TYPES",
    "classify",
    "derive_state",
    "is_transaction_id",
]

VALUE_TYPES = frozenset({"array", "boolean", "image", "number", "object", "relation", "string", "time"})
CONTENT_TYPES = VALUE_TYPES - {"array"}

_TXID_RE = re.compile(r"^[0-9a-f]{64}$")


class UnclassifiableTransactionError(ValueError):
    """No discriminating field identifies the transaction kind."""


class EmptyChainError(ValueError):
    """derive_state called with no transactions."""


class BrokenChainError(ValueError):
    """input_id/asset_id linkage of an asset chain does not hold."""


class Kind(str, Enum):
    USER = "user"
    CONTEXT = "context"
    DATA = "data"
    UPDATE = "update"


def is_transaction_id(value: Any) -> bool:
    return isinstance(value, str) and bool(_TXID_RE.match(value))


def classify(raw: Mapping[str, Any]) -> Kind:
    """Kind of a wire object, decided by its discriminating fields.

    Update: asset_id and input_id present. Data: context_id present.
    Context: data carries context_data or context_metadata. User: data
    carries public_key.
    """
    if "asset_id" in raw and "input_id" in raw:
        return Kind.UPDATE
    if "context_id" in raw:
        return Kind.DATA
    data = raw.get("data")
    if isinstance(data, Mapping):
        if "context_data" in data or "context_metadata" in data:
            return Kind.CONTEXT
        if "public_key" in data:
            return Kind.USER
    raise UnclassifiableTransactionError("no discriminating field (asset_id+input_id, context_id, context_data, or data.public_key)")


@dataclass(frozen=True)
class AssetState:
    """Merged latest view of an asset: immutable create data plus the most
    recent metadata in its chain."""

    asset_id: str
    data: dict
    metadata: dict
    last_transaction_id: str
    chain_length: int

    def to_wire(self) -> dict:
        return {
            "asset_id": self.asset_id,
            "data": self.data,
            "metadata": self.metadata,
            "last_transaction_id": self.last_transaction_id,
            "chain_length": self.chain_length,
        }


def derive_state(chain: Sequence[Mapping[str, Any]]) -> AssetState:
    """Fold a create-plus-updates chain into the asset's current state.

    An element's metadata map wholesale-replaces the previous metadata; an
    element carrying data (only versioned context re-creates do) replaces the
    data map the same way.
    """
    if not chain:
        raise EmptyChainError("chain is empty")
    create = chain[0]
    if "input_id" in create or "asset_id" in create:
        raise BrokenChainError("chain does not start with a create transaction")
    asset_id = create.get("id")
    data = dict(create.get("data") or {})
    metadata = dict(create.get("metadata") or {})
    prev_id = asset_id
    for tx in chain[1:]:
        if tx.get("input_id") != prev_id:
            raise BrokenChainError(f"input_id {tx.get('input_id')!r} does not match previous id {prev_id!r}")
        if tx.get("asset_id") != asset_id:
            raise BrokenChainError(f"asset_id {tx.get('asset_id')!r} does not match chain root {asset_id!r}")
        if "data" in tx:
            data = dict(tx["data"] or {})
        if "metadata" in tx:
            metadata = dict(tx["metadata"] or {})
        prev_id = tx.get("id")
    return AssetState(
        asset_id=asset_id,
        data=data,
        metadata=metadata,
        last_transaction_id=prev_id,
        chain_length=len(chain),
    )


@dataclass(frozen=True)
class ContextValueSpec:
    """One field specification inside a context's data/metadata schema."""

    type: str
    name: str | None = None
    description: str | None = None
    content: str | None = None
    parent: str | None = None
    searchable: bool = False
    required: bool = True

    @classmethod
    def from_wire(cls, wire: Mapping[str, Any]) -> "ContextValueSpec":
        """Parse and check one spec object; unknown keys pass through as
        opaque annotations."""
        if not isinstance(wire, Mapping):
            raise ValueError("spec must be an object")
        value_type = wire.get("type")
        if value_type not in VALUE_TYPES:
            raise ValueError(f"type must be one of {sorted(VALUE_TYPES)}, got {value_type!r}")
        content = wire.get("content")
        if value_type == "array":
            if content not in CONTENT_TYPES:
                raise ValueError(f"array spec requires content, one of {sorted(CONTENT_TYPES)}")
        elif content is not None:
            raise ValueError("content is only valid for array specs")
        parent = wire.get("parent")
        relation_like = value_type == "relation" or content == "relation"
        if relation_like:
            if not is_transaction_id(parent):
                raise ValueError("relation spec requires parent, a 64-char hex transaction id")
        elif parent is not None:
            raise ValueError("parent is only valid for relation specs")
        for key in ("name", "description"):
            if wire.get(key) is not None and not isinstance(wire[key], str):
                raise ValueError(f"{key} must be a string")
        for key in ("searchable", "required"):
            if key in wire and not isinstance(wire[key], bool):
                raise ValueError(f"{key} must be a boolean")
        return cls(
            type=value_type,
            name=wire.get("name"),
            description=wire.get("description"),
            content=content,
            parent=parent,
            searchable=wire.get("searchable", False),
            required=wire.get("required", True),
        )

    @property
    def element_type(self) -> str:
        """Type each checked value must satisfy (array content for arrays)."""
        return self.content if self.type == "array" else self.type


@dataclass(frozen=True)
class ContextSchema:
    """Parsed view of a context asset's current state, as validation uses it."""

    context_id: str
    name: str
    version: tuple[int, int]
    data_specs: dict[str, ContextValueSpec] = field(default_factory=dict)
    metadata_specs: dict[str, ContextValueSpec] = field(default_factory=dict)
    permissions: tuple[str, ...] = ()

    @classmethod
    def from_state(cls, state: AssetState) -> "ContextSchema":
        data = state.data or {}
        metadata = state.metadata or {}
        return cls(
            context_id=state.asset_id,
            name=metadata.get("name", ""),
            version=parse_version(data.get("version")),
            data_specs={k: ContextValueSpec.from_wire(v) for k, v in (data.get("context_data") or {}).items()},
            metadata_specs={k: ContextValueSpec.from_wire(v) for k, v in (data.get("context_metadata") or {}).items()},
            permissions=tuple(metadata.get("permissions") or ()),
        )

    @property
    def version_text(self) -> str:
        return f"{self.version[0]}.{self.version[1]}"


def parse_version(wire: Any) -> tuple[int, int]:
    """Version object of a context's data field; defaults to 1.0 when absent."""
    if wire is None:
        return (1, 0)
    if not isinstance(wire, Mapping):
        raise ValueError("version must be an object")
    major = wire.get("major")
    minor = wire.get("minor", 0)
    if not isinstance(major, int) or isinstance(major, bool) or major < 1:
        raise ValueError("version.major must be an integer >= 1")
    if not isinstance(minor, int) or isinstance(minor, bool) or minor < 0:
        raise ValueError("version.minor must be an integer >= 0")
    return (major, minor)

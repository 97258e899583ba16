"""Gateway validation workflows.

Admin-signed user/context processing (signature, structure, forward) and the
six-step data-transaction pipeline (signature, identity, context lookup,
permissions, strict schema conformance, index construction), plus the
metadata-only update rules with chain-head fork prevention.

Validation is pure given a ledger view; callers serialize validate-then-commit
per asset so the chain-head check stays atomic.
"""

from __future__ import annotations

import base64
import datetime
import re
from dataclasses import dataclass
from enum import Enum
from typing import Any, Iterable, Mapping, Protocol

from . import crypto
from .model import (
    AssetState,
    ContextSchema,
    ContextValueSpec,
    Kind,
    classify,
    is_transaction_id,
    parse_version,
)

__all__ = [
    "IndexEntries",
    "LedgerView",
    "Stage",
    "ValidationOutcome",
    "Validator",
    "Verdict",
    "build_index_entries",
    "is_image_size_rejection",
]

DEFAULT_MAX_IMAGE_BYTES = 1 << 20

IMAGE_SIZE_DETAIL = "image exceeds size limit"

_RFC3339_RE = re.compile(
    r"^(\d{4})-(\d{2})-(\d{2})[Tt](\d{2}):(\d{2}):(\d{2})(\.\d+)?([Zz]|[+-]\d{2}:\d{2})$"
)


class Verdict(str, Enum):
    ACCEPTED = "Accepted"
    REJECTED = "Rejected"


class Stage(str, Enum):
    """Workflow steps in reporting order; a rejection names the earliest
    failing stage."""

    SIGNATURE = "Signature"
    IDENTITY = "Identity"
    CONTEXT_LOOKUP = "ContextLookup"
    PERMISSION = "Permission"
    SCHEMA = "Schema"
    RELATION = "Relation"
    CHAIN_HEAD = "ChainHead"


@dataclass(frozen=True)
class ValidationOutcome:
    verdict: Verdict
    stage: Stage | None = None
    detail: str = ""

    @property
    def accepted(self) -> bool:
        return self.verdict is Verdict.ACCEPTED


@dataclass(frozen=True)
class IndexEntries:
    """Searchability arrays built in step 5: relation targets and the values
    of searchable string fields."""

    parents: tuple[str, ...] = ()
    search_terms: tuple[str, ...] = ()

    def to_wire(self) -> dict:
        return {"parents": list(self.parents), "search_terms": list(self.search_terms)}


class LedgerView(Protocol):
    """Read access validation needs against committed state."""

    def asset_state(self, asset_id: str) -> AssetState | None: ...

    def asset_kind(self, asset_id: str) -> Kind | None: ...

    def asset_context(self, asset_id: str) -> str | None: ...

    def head_id(self, asset_id: str) -> str | None: ...


_ACCEPT = ValidationOutcome(Verdict.ACCEPTED)


def _reject(stage: Stage, detail: str) -> ValidationOutcome:
    return ValidationOutcome(Verdict.REJECTED, stage, detail)


def is_image_size_rejection(outcome: ValidationOutcome) -> bool:
    return outcome.stage is Stage.SCHEMA and outcome.detail.startswith(IMAGE_SIZE_DETAIL)


def _is_rfc3339(value: str) -> bool:
    match = _RFC3339_RE.match(value)
    if not match:
        return False
    year, month, day, hour, minute, second = (int(match.group(i)) for i in range(1, 7))
    try:
        datetime.datetime(year, month, day)
    except ValueError:
        return False
    if hour > 23 or minute > 59 or second > 59:
        return False
    offset = match.group(8)
    if offset[0] in "+-":
        if int(offset[1:3]) > 23 or int(offset[4:6]) > 59:
            return False
    return True


class Validator:
    """Validation engine bound to the configured admin keys and image cap.

    Pure given a ledger view; holds no mutable state.
    """

    def __init__(self, admin_keys: Iterable[str], max_image_bytes: int = DEFAULT_MAX_IMAGE_BYTES):
        self.admin_keys = frozenset(admin_keys)
        self.max_image_bytes = max_image_bytes

    # -- shared first steps ------------------------------------------------------

    def _check_signature(self, tx: Mapping[str, Any]) -> ValidationOutcome | None:
        public_key = tx.get("public_key")
        signature = tx.get("signature")
        if not isinstance(public_key, str):
            return _reject(Stage.SIGNATURE, "public_key is missing or not a string")
        if not isinstance(signature, str):
            return _reject(Stage.SIGNATURE, "signature is missing or not a string")
        body = crypto.canonicalize(crypto.signed_body(tx))
        try:
            if not crypto.verify(body, signature, public_key):
                return _reject(Stage.SIGNATURE, "signature does not verify under public_key")
        except (crypto.MalformedKeyError, crypto.MalformedSignatureError) as exc:
            return _reject(Stage.SIGNATURE, str(exc))
        return None

    def _check_admin(self, tx: Mapping[str, Any]) -> ValidationOutcome | None:
        if tx.get("public_key") not in self.admin_keys:
            return _reject(Stage.PERMISSION, "signer is not a configured administrator")
        return None

    # -- user / context creation --------------------------------------------------

    def validate_admin_put(self, tx: Mapping[str, Any], view: LedgerView | None = None) -> ValidationOutcome:
        """Admin workflow for user and context create transactions: verify the
        admin signature, then the data/metadata structure."""
        failure = self._check_signature(tx) or self._check_admin(tx)
        if failure:
            return failure
        kind = classify(tx)
        if kind is Kind.USER:
            return self._user_structure(tx)
        if kind is Kind.CONTEXT:
            failure, specs = self._context_data_structure(tx.get("data"))
            failure = failure or self._context_metadata_structure(tx.get("metadata"))
            failure = failure or self._resolve_spec_parents(specs, view)
            return failure or _ACCEPT
        return _reject(Stage.SCHEMA, f"expected a user or context transaction, got {kind.value}")

    def _user_structure(self, tx: Mapping[str, Any]) -> ValidationOutcome:
        data = tx.get("data")
        if not isinstance(data, Mapping):
            return _reject(Stage.SCHEMA, "user data must be an object")
        username = data.get("username")
        if not isinstance(username, str) or not username:
            return _reject(Stage.SCHEMA, "data.username must be a non-empty string")
        try:
            crypto.decode_public_key(data.get("public_key") or "")
        except crypto.MalformedKeyError as exc:
            return _reject(Stage.SCHEMA, f"data.public_key: {exc}")
        metadata = tx.get("metadata")
        if metadata is not None and not isinstance(metadata, Mapping):
            return _reject(Stage.SCHEMA, "user metadata must be an object")
        return _ACCEPT

    def _context_data_structure(
        self, data: Any
    ) -> tuple[ValidationOutcome | None, list[tuple[str, ContextValueSpec]]]:
        if not isinstance(data, Mapping):
            return _reject(Stage.SCHEMA, "context data must be an object"), []
        specs: list[tuple[str, ContextValueSpec]] = []
        for section in ("context_data", "context_metadata"):
            section_map = data.get(section)
            if section_map is None:
                continue
            if not isinstance(section_map, Mapping):
                return _reject(Stage.SCHEMA, f"{section} must be an object"), []
            for key, wire in section_map.items():
                try:
                    specs.append((f"{section}.{key}", ContextValueSpec.from_wire(wire)))
                except ValueError as exc:
                    return _reject(Stage.SCHEMA, f"{section}.{key}: {exc}"), []
        if "version" in data:
            try:
                parse_version(data["version"])
            except ValueError as exc:
                return _reject(Stage.SCHEMA, str(exc)), []
        return None, specs

    def _context_metadata_structure(self, metadata: Any) -> ValidationOutcome | None:
        if not isinstance(metadata, Mapping):
            return _reject(Stage.SCHEMA, "context metadata must be an object")
        name = metadata.get("name")
        if not isinstance(name, str) or not name:
            return _reject(Stage.SCHEMA, "metadata.name must be a non-empty string")
        description = metadata.get("description")
        if description is not None and not isinstance(description, str):
            return _reject(Stage.SCHEMA, "metadata.description must be a string")
        permissions = metadata.get("permissions")
        if not isinstance(permissions, list):
            return _reject(Stage.SCHEMA, "metadata.permissions must be a list of public keys")
        for entry in permissions:
            try:
                crypto.decode_public_key(entry if isinstance(entry, str) else "")
            except crypto.MalformedKeyError as exc:
                return _reject(Stage.SCHEMA, f"metadata.permissions entry: {exc}")
        return None

    def _resolve_spec_parents(
        self, specs: list[tuple[str, ContextValueSpec]], view: LedgerView | None
    ) -> ValidationOutcome | None:
        if view is None:
            return None
        for label, spec in specs:
            if spec.parent is None:
                continue
            if view.asset_kind(spec.parent) is not Kind.CONTEXT:
                return _reject(Stage.RELATION, f"{label}: parent does not resolve to a context")
        return None

    # -- data creation -------------------------------------------------------------

    def validate_data_put(
        self, tx: Mapping[str, Any], view: LedgerView
    ) -> tuple[ValidationOutcome, IndexEntries]:
        """Six-step data workflow; rejects at the first failing stage."""
        empty = IndexEntries()
        failure = self._check_signature(tx)
        if failure:
            return failure, empty

        user_id = tx.get("user_id")
        if not is_transaction_id(user_id):
            return _reject(Stage.IDENTITY, "user_id is missing or not a transaction id"), empty
        user_state = view.asset_state(user_id)
        if user_state is None or view.asset_kind(user_id) is not Kind.USER:
            return _reject(Stage.IDENTITY, "user_id does not resolve to a registered user"), empty
        if user_state.data.get("public_key") != tx.get("public_key"):
            return _reject(Stage.IDENTITY, "public_key does not match the registered user key"), empty

        schema, lookup_failure = self._resolve_context(tx.get("context_id"), view)
        if lookup_failure:
            return lookup_failure, empty

        permission = self._check_permission(tx, schema)
        if permission:
            return permission, empty

        for section in ("data", "metadata"):
            value_map = tx.get(section)
            if value_map is not None and not isinstance(value_map, Mapping):
                return _reject(Stage.SCHEMA, f"{section} must be an object"), empty
        conformance = self._check_conformance(
            [
                (tx.get("data") or {}, schema.data_specs, "data"),
                (tx.get("metadata") or {}, schema.metadata_specs, "metadata"),
            ],
            view,
        )
        if conformance:
            return conformance, empty

        indexes = build_index_entries(
            [(tx.get("data") or {}, schema.data_specs), (tx.get("metadata") or {}, schema.metadata_specs)]
        )
        return _ACCEPT, indexes

    def _resolve_context(
        self, context_id: Any, view: LedgerView
    ) -> tuple[ContextSchema | None, ValidationOutcome | None]:
        if not is_transaction_id(context_id):
            return None, _reject(Stage.CONTEXT_LOOKUP, "context_id is missing or not a transaction id")
        state = view.asset_state(context_id)
        if state is None or view.asset_kind(context_id) is not Kind.CONTEXT:
            return None, _reject(Stage.CONTEXT_LOOKUP, "context_id does not resolve to a context")
        try:
            return ContextSchema.from_state(state), None
        except ValueError as exc:
            return None, _reject(Stage.CONTEXT_LOOKUP, f"stored context is unreadable: {exc}")

    def _check_permission(self, tx: Mapping[str, Any], schema: ContextSchema) -> ValidationOutcome | None:
        if tx.get("public_key") not in schema.permissions:
            return _reject(Stage.PERMISSION, f"signer not permitted in context {schema.name!r}")
        return None

    # -- updates -------------------------------------------------------------------

    def validate_update_put(self, tx: Mapping[str, Any], view: LedgerView) -> ValidationOutcome:
        """Metadata-only amendment: resolve the asset, authorize the signer,
        check metadata conformance, and finally require input_id to be the
        current chain head (no forks)."""
        failure = self._check_signature(tx)
        if failure:
            return failure

        asset_id = tx.get("asset_id")
        if not is_transaction_id(asset_id):
            return _reject(Stage.CONTEXT_LOOKUP, "asset_id is missing or not a transaction id")
        kind = view.asset_kind(asset_id)
        if kind is None:
            return _reject(Stage.CONTEXT_LOOKUP, "asset_id does not resolve to a committed asset")

        schema = None
        if kind is Kind.DATA:
            schema, lookup_failure = self._resolve_context(view.asset_context(asset_id), view)
            if lookup_failure:
                return lookup_failure
            permission = self._check_permission(tx, schema)
            if permission:
                return permission
        else:
            admin = self._check_admin(tx)
            if admin:
                return admin

        if "data" in tx:
            return _reject(Stage.SCHEMA, "update transactions are metadata-only")
        metadata = tx.get("metadata")
        if metadata is not None and not isinstance(metadata, Mapping):
            return _reject(Stage.SCHEMA, "metadata must be an object")
        if metadata is not None:
            if kind is Kind.DATA:
                conformance = self._check_conformance([(metadata, schema.metadata_specs, "metadata")], view)
                if conformance:
                    return conformance
            elif kind is Kind.CONTEXT:
                metadata_failure = self._context_metadata_structure(metadata)
                if metadata_failure:
                    return metadata_failure

        if tx.get("input_id") != view.head_id(asset_id):
            return _reject(Stage.CHAIN_HEAD, "input_id is not the current head of the asset chain")
        return _ACCEPT

    def validate_context_version_put(self, tx: Mapping[str, Any], view: LedgerView) -> ValidationOutcome:
        """Versioned re-create of a context: an update-shaped transaction that
        carries a new data.context_data/context_metadata and must increment
        version.major over the context's current state. Absent metadata
        carries over from the current state."""
        failure = self._check_signature(tx) or self._check_admin(tx)
        if failure:
            return failure

        asset_id = tx.get("asset_id")
        if not is_transaction_id(asset_id):
            return _reject(Stage.CONTEXT_LOOKUP, "asset_id is missing or not a transaction id")
        state = view.asset_state(asset_id)
        if state is None or view.asset_kind(asset_id) is not Kind.CONTEXT:
            return _reject(Stage.CONTEXT_LOOKUP, "asset_id does not resolve to a context")

        data = tx.get("data")
        structure, specs = self._context_data_structure(data)
        if structure:
            return structure
        if tx.get("metadata") is not None:
            metadata_failure = self._context_metadata_structure(tx["metadata"])
            if metadata_failure:
                return metadata_failure

        current = parse_version(state.data.get("version"))
        try:
            proposed = parse_version(data.get("version"))
        except ValueError as exc:
            return _reject(Stage.SCHEMA, str(exc))
        if proposed[0] != current[0] + 1:
            return _reject(
                Stage.SCHEMA, f"version.major must increment to {current[0] + 1}, got {proposed[0]}"
            )

        relation = self._resolve_spec_parents(specs, view)
        if relation:
            return relation

        if tx.get("input_id") != view.head_id(asset_id):
            return _reject(Stage.CHAIN_HEAD, "input_id is not the current head of the asset chain")
        return _ACCEPT

    # -- type checking ---------------------------------------------------------

    def check_type(self, value: Any, spec: ContextValueSpec, view: LedgerView | None = None) -> bool:
        """True iff the value satisfies the spec; false is the only failure
        signal (unresolvable relations included)."""
        return self._value_failure(value, spec, view) is None

    def _value_failure(
        self, value: Any, spec: ContextValueSpec, view: LedgerView | None
    ) -> tuple[str, str] | None:
        # -> (failure kind: schema|image|relation, message) or None
        if spec.type == "array":
            if not isinstance(value, list):
                return ("schema", "expected an array")
            element_spec = ContextValueSpec(type=spec.content, parent=spec.parent)
            for i, element in enumerate(value):
                failure = self._value_failure(element, element_spec, view)
                if failure:
                    return (failure[0], f"element {i}: {failure[1]}")
            return None
        if spec.type == "boolean":
            return None if isinstance(value, bool) else ("schema", "expected a boolean")
        if spec.type == "number":
            if isinstance(value, bool) or not isinstance(value, (int, float)):
                return ("schema", "expected a number")
            if isinstance(value, float) and (value != value or value in (float("inf"), float("-inf"))):
                return ("schema", "expected a finite number")
            return None
        if spec.type == "string":
            return None if isinstance(value, str) else ("schema", "expected a string")
        if spec.type == "time":
            if not isinstance(value, str) or not _is_rfc3339(value):
                return ("schema", "expected an RFC 3339 timestamp with offset")
            return None
        if spec.type == "object":
            return None if isinstance(value, Mapping) else ("schema", "expected an object")
        if spec.type == "image":
            return self._image_failure(value)
        if spec.type == "relation":
            if not is_transaction_id(value):
                return ("schema", "expected a transaction id")
            if view is None or view.asset_state(value) is None:
                return ("relation", f"parent transaction {value!r} does not exist")
            if view.asset_context(value) != spec.parent:
                return ("relation", f"parent {value!r} belongs to a different context")
            return None
        return ("schema", f"unknown type {spec.type!r}")

    def _image_failure(self, value: Any) -> tuple[str, str] | None:
        if not isinstance(value, Mapping) or set(value.keys()) != {"mime", "bytes"}:
            return ("schema", "expected an image object {mime, bytes}")
        if not isinstance(value["mime"], str) or not isinstance(value["bytes"], str):
            return ("schema", "image mime and bytes must be strings")
        try:
            decoded = base64.b64decode(value["bytes"], validate=True)
        except (ValueError, TypeError):
            return ("schema", "image bytes must be valid base64")
        if len(decoded) > self.max_image_bytes:
            return ("image", f"{len(decoded)} bytes > cap {self.max_image_bytes}")
        return None

    def _check_conformance(
        self,
        sections: list[tuple[Mapping[str, Any], dict[str, ContextValueSpec], str]],
        view: LedgerView | None,
    ) -> ValidationOutcome | None:
        """Strict conformance: required keys present, no undeclared keys,
        every value passing its spec. Schema violations outrank image-size
        violations outrank relation failures, matching the workflow order."""
        schema_failures: list[str] = []
        image_failures: list[str] = []
        relation_failures: list[str] = []
        for value_map, specs, label in sections:
            for key in value_map:
                if key not in specs:
                    schema_failures.append(f"{label}.{key}: undeclared key")
            for key, spec in specs.items():
                if key not in value_map:
                    if spec.required:
                        schema_failures.append(f"{label}.{key}: required key missing")
                    continue
                failure = self._value_failure(value_map[key], spec, view)
                if failure is None:
                    continue
                failure_kind, message = failure
                if failure_kind == "schema":
                    schema_failures.append(f"{label}.{key}: {message}")
                elif failure_kind == "image":
                    image_failures.append(f"{label}.{key}: {message}")
                else:
                    relation_failures.append(f"{label}.{key}: {message}")
        if schema_failures:
            return _reject(Stage.SCHEMA, "; ".join(schema_failures))
        if image_failures:
            return _reject(Stage.SCHEMA, f"{IMAGE_SIZE_DETAIL}: " + "; ".join(image_failures))
        if relation_failures:
            return _reject(Stage.RELATION, "; ".join(relation_failures))
        return None


def build_index_entries(
    sections: list[tuple[Mapping[str, Any], dict[str, ContextValueSpec]]],
) -> IndexEntries:
    """Collect relation targets and searchable strings from validated maps."""
    parents: list[str] = []
    terms: list[str] = []
    for value_map, specs in sections:
        for key, spec in specs.items():
            if key not in value_map:
                continue
            value = value_map[key]
            values = value if spec.type == "array" else [value]
            if spec.element_type == "relation":
                parents.extend(v for v in values if is_transaction_id(v))
            if spec.searchable and spec.element_type == "string":
                terms.extend(v for v in values if isinstance(v, str))
    return IndexEntries(parents=tuple(parents), search_terms=tuple(terms))

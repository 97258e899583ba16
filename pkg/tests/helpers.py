"""Shared test fixtures: deterministic keys, wire-object builders, a small
commit pipeline mirroring the gateway's validate-then-commit flow, and the
independent brute-force schema walker used as the conformance oracle."""

from __future__ import annotations

import base64
import datetime
import re

from ledgergate.crypto import KeyPair, sign_transaction
from ledgergate.validation import Validator, build_index_entries
from ledgergate.model import ContextSchema

ADMIN = KeyPair.from_seed(bytes([1]) * 32)
ALICE = KeyPair.from_seed(bytes([2]) * 32)
BOB = KeyPair.from_seed(bytes([3]) * 32)
CAROL = KeyPair.from_seed(bytes([4]) * 32)
SERVICE = KeyPair.from_seed(bytes([5]) * 32)


def user_tx(username: str, subject: KeyPair, signer: KeyPair = ADMIN, metadata: dict | None = None) -> dict:
    tx: dict = {"data": {"username": username, "public_key": subject.public_b58}}
    if metadata is not None:
        tx["metadata"] = metadata
    tx["public_key"] = signer.public_b58
    return sign_transaction(tx, signer)


def context_tx(
    name: str,
    context_data: dict | None = None,
    context_metadata: dict | None = None,
    permissions: list[str] | None = None,
    version: dict | None = None,
    signer: KeyPair = ADMIN,
    description: str | None = None,
) -> dict:
    data: dict = {}
    if context_data is not None:
        data["context_data"] = context_data
    if context_metadata is not None:
        data["context_metadata"] = context_metadata
    if version is not None:
        data["version"] = version
    metadata: dict = {"name": name, "permissions": permissions if permissions is not None else [ALICE.public_b58]}
    if description is not None:
        metadata["description"] = description
    return sign_transaction({"data": data, "metadata": metadata, "public_key": signer.public_b58}, signer)


def data_tx(context_id: str, user_id: str, signer: KeyPair, data: dict | None = None, metadata: dict | None = None) -> dict:
    tx: dict = {"context_id": context_id, "user_id": user_id}
    if data is not None:
        tx["data"] = data
    if metadata is not None:
        tx["metadata"] = metadata
    tx["public_key"] = signer.public_b58
    return sign_transaction(tx, signer)


_ABSENT = object()


def update_tx(asset_id: str, input_id: str, signer: KeyPair, metadata=_ABSENT, data=_ABSENT) -> dict:
    tx: dict = {"asset_id": asset_id, "input_id": input_id}
    if metadata is not _ABSENT:
        tx["metadata"] = metadata
    if data is not _ABSENT:
        tx["data"] = data
    tx["public_key"] = signer.public_b58
    return sign_transaction(tx, signer)


class Pipeline:
    """Validator plus adapter wired the way the gateway commits them."""

    def __init__(self, adapter, admin: KeyPair = ADMIN, max_image_bytes: int = 1 << 20):
        self.adapter = adapter
        self.validator = Validator([admin.public_b58], max_image_bytes)
        self.admin = admin

    def commit_admin(self, tx: dict) -> str:
        outcome = self.validator.validate_admin_put(tx, self.adapter)
        assert outcome.accepted, f"{outcome.stage}: {outcome.detail}"
        return self.adapter.commit(tx).id

    def add_user(self, username: str, subject: KeyPair, **kwargs) -> str:
        return self.commit_admin(user_tx(username, subject, signer=self.admin, **kwargs))

    def add_context(self, name: str, **kwargs) -> str:
        return self.commit_admin(context_tx(name, signer=self.admin, **kwargs))

    def try_data(self, tx: dict):
        outcome, indexes = self.validator.validate_data_put(tx, self.adapter)
        if not outcome.accepted:
            return outcome, None
        return outcome, self.adapter.commit(tx, indexes, self._version_of(tx["context_id"]))

    def add_data(self, context_id: str, user_id: str, signer: KeyPair, **kwargs) -> str:
        outcome, record = self.try_data(data_tx(context_id, user_id, signer, **kwargs))
        assert outcome.accepted, f"{outcome.stage}: {outcome.detail}"
        return record.id

    def try_update(self, tx: dict):
        outcome = self.validator.validate_update_put(tx, self.adapter)
        if not outcome.accepted:
            return outcome, None
        indexes = build_index_entries([(tx.get("metadata") or {}, self._schema_of_asset(tx["asset_id"]))])
        return outcome, self.adapter.commit(tx, indexes)

    def _schema_of_asset(self, asset_id: str) -> dict:
        context_id = self.adapter.asset_context(asset_id)
        if context_id is None:
            return {}
        return ContextSchema.from_state(self.adapter.asset_state(context_id)).metadata_specs

    def _version_of(self, context_id: str) -> str:
        return ContextSchema.from_state(self.adapter.asset_state(context_id)).version_text


# -- independent schema-walk oracle -------------------------------------------------
#
# Deliberately written from the conformance rules directly, sharing no code
# with the validation engine: plain dict specs, explicit recursion.

_TIME_GRAMMAR = re.compile(
    r"\A\d{4}-\d{2}-\d{2}[Tt]\d{2}:\d{2}:\d{2}(\.\d+)?([Zz]|[+-]\d{2}:\d{2})\Z"
)
_HEX_ID = re.compile(r"\A[0-9a-f]{64}\Z")


def _oracle_time_ok(value) -> bool:
    if not isinstance(value, str) or not _TIME_GRAMMAR.match(value):
        return False
    try:
        datetime.date(int(value[0:4]), int(value[5:7]), int(value[8:10]))
    except ValueError:
        return False
    hh, mm, ss = int(value[11:13]), int(value[14:16]), int(value[17:19])
    if hh > 23 or mm > 59 or ss > 59:
        return False
    tail = value[19:]
    offset = tail[1:] if tail.startswith(".") else tail
    while offset and (offset[0].isdigit() or offset[0] == "."):
        offset = offset[1:]
    if offset[0] in "+-":
        if int(offset[1:3]) > 23 or int(offset[4:6]) > 59:
            return False
    return True


def oracle_value_ok(value, spec: dict, view, max_image_bytes: int = 1 << 20) -> bool:
    kind = spec["type"]
    if kind == "array":
        if not isinstance(value, list):
            return False
        element = dict(spec, type=spec["content"], content=None)
        return all(oracle_value_ok(v, element, view, max_image_bytes) for v in value)
    if kind == "boolean":
        return isinstance(value, bool)
    if kind == "number":
        if isinstance(value, bool) or not isinstance(value, (int, float)):
            return False
        return not (isinstance(value, float) and (value != value or abs(value) == float("inf")))
    if kind == "string":
        return isinstance(value, str)
    if kind == "time":
        return _oracle_time_ok(value)
    if kind == "object":
        return isinstance(value, dict)
    if kind == "image":
        if not isinstance(value, dict) or sorted(value) != ["bytes", "mime"]:
            return False
        if not isinstance(value.get("mime"), str) or not isinstance(value.get("bytes"), str):
            return False
        try:
            raw = base64.b64decode(value["bytes"], validate=True)
        except Exception:
            return False
        return len(raw) <= max_image_bytes
    if kind == "relation":
        if not isinstance(value, str) or not _HEX_ID.match(value):
            return False
        if view is None or view.asset_state(value) is None:
            return False
        return view.asset_context(value) == spec.get("parent")
    return False


def _oracle_section_ok(values: dict, specs: dict, view, max_image_bytes: int) -> bool:
    for key in values:
        if key not in specs:
            return False
    for key, spec in specs.items():
        if key not in values:
            if spec.get("required", True):
                return False
            continue
        if not oracle_value_ok(values[key], spec, view, max_image_bytes):
            return False
    return True


def oracle_conforms(tx: dict, context_data_field: dict, view, max_image_bytes: int = 1 << 20) -> bool:
    """Brute-force conformance verdict for a data transaction against the raw
    wire form of its context's data field."""
    data = tx.get("data")
    metadata = tx.get("metadata")
    if data is not None and not isinstance(data, dict):
        return False
    if metadata is not None and not isinstance(metadata, dict):
        return False
    return _oracle_section_ok(
        data or {}, context_data_field.get("context_data") or {}, view, max_image_bytes
    ) and _oracle_section_ok(
        metadata or {}, context_data_field.get("context_metadata") or {}, view, max_image_bytes
    )

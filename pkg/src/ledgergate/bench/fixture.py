"""Deterministic fixture for the inbound-release workflow.

Seeds, through the public HTTP API only: the admin and quality users, the six
workflow contexts (orders, order lines, material details, quality procedures,
quality checks, conformance certificates) and a small transaction population
that makes every read endpoint return non-empty results. Order line A gets a
fully passing check sequence, so a gateway with the inbound_release hook
enabled auto-issues one certificate during seeding.
"""

from __future__ import annotations

import hashlib
import random
from typing import Any

import httpx

from ..crypto import KeyPair, sign_transaction

ADMIN_SEED = hashlib.sha3_256(b"ledgergate/fixture/admin").digest()
QP1_SEED = hashlib.sha3_256(b"ledgergate/fixture/qp1").digest()
QP2_SEED = hashlib.sha3_256(b"ledgergate/fixture/qp2").digest()

SEARCH_TEXT = "MAT-0"


class SeedingFailureError(Exception):
    """Fixture seeding refused or failed."""


class TargetUnreachableError(Exception):
    """Benchmark target did not answer as expected."""


def admin_keypair() -> KeyPair:
    return KeyPair.from_seed(ADMIN_SEED)


def qp_keypairs() -> tuple[KeyPair, KeyPair]:
    return KeyPair.from_seed(QP1_SEED), KeyPair.from_seed(QP2_SEED)


def _put(client: httpx.Client, path: str, tx: dict) -> dict:
    try:
        response = client.put(path, json=tx)
    except httpx.HTTPError as exc:
        raise TargetUnreachableError(f"PUT {path}: {exc}") from None
    if response.status_code != 200:
        raise SeedingFailureError(f"PUT {path} -> {response.status_code}: {response.text}")
    return response.json()


def _get(client: httpx.Client, path: str, **params) -> Any:
    try:
        response = client.get(path, params=params or None)
    except httpx.HTTPError as exc:
        raise TargetUnreachableError(f"GET {path}: {exc}") from None
    if response.status_code != 200:
        raise SeedingFailureError(f"GET {path} -> {response.status_code}: {response.text}")
    return response.json()


def seed_fixture(client: httpx.Client, service_public_key: str) -> dict:
    """Populate a clean gateway; returns a manifest of created ids."""
    try:
        existing = client.get("/contexts")
    except httpx.HTTPError as exc:
        raise TargetUnreachableError(f"GET /contexts: {exc}") from None
    if existing.status_code != 200:
        raise SeedingFailureError(f"GET /contexts -> {existing.status_code}: {existing.text}")
    if existing.json():
        raise SeedingFailureError("ledger already holds contexts; seeding requires a clean ledger")

    admin = admin_keypair()
    qp1, qp2 = qp_keypairs()

    def admin_put(path: str, tx: dict) -> str:
        return _put(client, path, sign_transaction(tx, admin))["id"]

    users = {
        "admin": admin_put("/user", {"data": {"username": "admin", "public_key": admin.public_b58},
                                     "metadata": {"roles": ["administrator"]},
                                     "public_key": admin.public_b58}),
        "qp1": admin_put("/user", {"data": {"username": "qp-alice", "public_key": qp1.public_b58},
                                   "metadata": {"roles": ["qualified-person"]},
                                   "public_key": admin.public_b58}),
        "qp2": admin_put("/user", {"data": {"username": "qp-bob", "public_key": qp2.public_b58},
                                   "metadata": {"roles": ["qualified-person"]},
                                   "public_key": admin.public_b58}),
        "service": admin_put("/user", {"data": {"username": "release-service", "public_key": service_public_key},
                                       "metadata": {"roles": ["service"]},
                                       "public_key": admin.public_b58}),
    }

    qp_keys = [qp1.public_b58, qp2.public_b58]
    contexts: dict[str, str] = {}

    contexts["orders"] = admin_put("/context", {
        "data": {
            "context_data": {
                "order_no": {"type": "string", "searchable": True},
                "placed_at": {"type": "time"},
            },
            "context_metadata": {"status": {"type": "string", "required": False}},
            "version": {"major": 1, "minor": 0},
        },
        "metadata": {"name": "orders", "description": "purchase orders", "permissions": qp_keys},
        "public_key": admin.public_b58,
    })

    contexts["order_lines"] = admin_put("/context", {
        "data": {
            "context_data": {
                "line_no": {"type": "number"},
                "order": {"type": "relation", "parent": contexts["orders"]},
                "material_code": {"type": "string", "searchable": True},
                "required_checks": {"type": "number"},
            },
            "context_metadata": {"status": {"type": "string", "required": False}},
        },
        "metadata": {"name": "order_lines", "permissions": qp_keys},
        "public_key": admin.public_b58,
    })

    contexts["material_details"] = admin_put("/context", {
        "data": {
            "context_data": {
                "material_code": {"type": "string", "searchable": True},
                "description": {"type": "string", "required": False},
                "spec_sheet": {"type": "object", "required": False},
            },
            "context_metadata": {"batch": {"type": "string", "required": False}},
        },
        "metadata": {"name": "material_details", "permissions": qp_keys},
        "public_key": admin.public_b58,
    })

    contexts["quality_procedures"] = admin_put("/context", {
        "data": {
            "context_data": {
                "procedure_no": {"type": "string", "searchable": True},
                "steps": {"type": "array", "content": "string"},
            },
            "context_metadata": {"active": {"type": "boolean", "required": False}},
        },
        "metadata": {"name": "quality_procedures", "permissions": qp_keys},
        "public_key": admin.public_b58,
    })

    contexts["quality_checks"] = admin_put("/context", {
        "data": {
            "context_data": {
                "check_no": {"type": "string"},
                "order_line": {"type": "relation", "parent": contexts["order_lines"]},
                "procedure": {"type": "relation", "parent": contexts["quality_procedures"], "required": False},
            },
            "context_metadata": {
                "status": {"type": "string"},
                "checks": {"type": "array", "content": "object", "required": False},
                "signed_off_at": {"type": "time", "required": False},
            },
        },
        "metadata": {"name": "quality_checks", "permissions": qp_keys},
        "public_key": admin.public_b58,
    })

    contexts["conformance_certificates"] = admin_put("/context", {
        "data": {
            "context_data": {
                "order_line": {"type": "relation", "parent": contexts["order_lines"]},
                "certificate_no": {"type": "string", "searchable": True},
            },
            "context_metadata": {
                "released": {"type": "boolean"},
                "checks_total": {"type": "number"},
                "checks_passed": {"type": "number"},
            },
        },
        "metadata": {"name": "conformance_certificates", "permissions": [service_public_key]},
        "public_key": admin.public_b58,
    })

    def data_put(context: str, signer: KeyPair, user: str, data: dict, metadata: dict | None = None) -> str:
        tx: dict = {"context_id": contexts[context], "user_id": users[user], "data": data,
                    "public_key": signer.public_b58}
        if metadata is not None:
            tx["metadata"] = metadata
        return _put(client, "/transaction", sign_transaction(tx, signer))["id"]

    data: dict[str, Any] = {}
    data["order"] = data_put(
        "orders", qp1, "qp1",
        {"order_no": "ORD-1001", "placed_at": "2024-03-01T10:00:00Z"},
        {"status": "open"},
    )
    data["order_line_a"] = data_put(
        "order_lines", qp1, "qp1",
        {"line_no": 1, "order": data["order"], "material_code": "MAT-001", "required_checks": 2},
        {"status": "pending"},
    )
    data["order_line_b"] = data_put(
        "order_lines", qp1, "qp1",
        {"line_no": 2, "order": data["order"], "material_code": "MAT-002", "required_checks": 3},
        {"status": "pending"},
    )
    data["material"] = data_put(
        "material_details", qp1, "qp1",
        {"material_code": "MAT-001", "description": "stainless rod, 8mm"},
        {"batch": "B-42"},
    )
    data["procedure"] = data_put(
        "quality_procedures", qp2, "qp2",
        {"procedure_no": "QP-7", "steps": ["visual inspection", "dimensional check"]},
        {"active": True},
    )
    data["check_a1"] = data_put(
        "quality_checks", qp1, "qp1",
        {"check_no": "CHK-A1", "order_line": data["order_line_a"], "procedure": data["procedure"]},
        {"status": "pass", "signed_off_at": "2024-03-02T09:15:00Z"},
    )
    data["check_a2"] = data_put(
        "quality_checks", qp2, "qp2",
        {"check_no": "CHK-A2", "order_line": data["order_line_a"], "procedure": data["procedure"]},
        {"status": "pass", "signed_off_at": "2024-03-02T11:40:00Z"},
    )
    data["check_b1"] = data_put(
        "quality_checks", qp1, "qp1",
        {"check_no": "CHK-B1", "order_line": data["order_line_b"]},
        {"status": "pass"},
    )
    # amend the order so asset_id reads return a chain, not a single record
    head = _get(client, f"/state/transactions", asset_id=data["order"])["last_transaction_id"]
    data["order_update"] = _put(client, "/transaction", sign_transaction(
        {"asset_id": data["order"], "input_id": head, "metadata": {"status": "approved"},
         "public_key": qp1.public_b58},
        qp1,
    ))["id"]

    certificate = None
    for state in _get(client, "/state/transactions", context_id=contexts["conformance_certificates"]):
        if state["data"].get("order_line") == data["order_line_a"]:
            certificate = state["asset_id"]
    data["certificate"] = certificate

    return {"users": users, "contexts": contexts, "data": data, "search_text": SEARCH_TEXT}


def recover_manifest(client: httpx.Client) -> dict | None:
    """Rebuild the fixture manifest from an already-seeded gateway; None when
    the ledger does not hold the fixture population."""
    contexts = {}
    for state in _get(client, "/state/contexts"):
        contexts[state["metadata"].get("name")] = state["asset_id"]
    required = {"orders", "order_lines", "material_details", "quality_procedures",
                "quality_checks", "conformance_certificates"}
    if not required <= set(contexts):
        return None
    users = {}
    for state in _get(client, "/state/users"):
        users[state["data"].get("username")] = state["asset_id"]
    name_map = {"admin": "admin", "qp-alice": "qp1", "qp-bob": "qp2", "release-service": "service"}
    if not set(name_map) <= set(users):
        return None
    data: dict[str, Any] = {}
    orders = _get(client, "/state/transactions", context_id=contexts["orders"])
    lines = _get(client, "/state/transactions", context_id=contexts["order_lines"])
    if not orders or len(lines) < 2:
        return None
    data["order"] = orders[0]["asset_id"]
    by_line_no = {state["data"].get("line_no"): state["asset_id"] for state in lines}
    data["order_line_a"], data["order_line_b"] = by_line_no.get(1), by_line_no.get(2)
    if not data["order_line_a"] or not data["order_line_b"]:
        return None
    return {
        "users": {name_map[k]: v for k, v in users.items() if k in name_map},
        "contexts": {k: v for k, v in contexts.items() if k in required},
        "data": data,
        "search_text": SEARCH_TEXT,
    }


def bench_write_tx(manifest: dict, rng: random.Random, signer: KeyPair | None = None) -> dict:
    """A fresh, valid material-details transaction; unique content per call."""
    qp1, _ = qp_keypairs()
    signer = signer or qp1
    code = f"MAT-{rng.getrandbits(48):012x}"
    return sign_transaction(
        {
            "context_id": manifest["contexts"]["material_details"],
            "user_id": manifest["users"]["qp1"],
            "data": {"material_code": code, "description": "bench payload"},
            "public_key": signer.public_b58,
        },
        signer,
    )

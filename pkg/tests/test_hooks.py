"""Contract hooks: registration, triggering, the inbound-release workflow,
derived-transaction validity, and replay determinism."""

from __future__ import annotations

import pytest

from helpers import ADMIN, ALICE, SERVICE, data_tx, update_tx, user_tx, context_tx
from ledgergate import hooks
from ledgergate.config import GatewayConfig
from ledgergate.crypto import KeyPair, derive_id, sign_transaction
from ledgergate.gateway import GatewayService
from ledgergate.hooks import (
    ContractHook,
    DuplicateHookError,
    HookRegistry,
    HookResult,
    ReleaseDecision,
    registry_from_names,
    replay_emissions,
)
from ledgergate.model import Kind


@pytest.fixture
def service(tmp_path):
    config = GatewayConfig(
        admin_public_keys=[ADMIN.public_b58],
        ledger_dir=tmp_path / "ledger",
        enabled_hooks=["inbound_release"],
        service_key_seed=SERVICE.seed,
    )
    svc = GatewayService(config)
    yield svc
    svc.close()


def build_inbound_scene(svc: GatewayService, required=(2, 3)) -> dict:
    ids = {}
    ids["qp"] = svc.put(user_tx("qp-alice", ALICE), Kind.USER)["id"]
    ids["service_user"] = svc.put(user_tx("release-service", SERVICE), Kind.USER)["id"]
    ids["order_lines"] = svc.put(
        context_tx(
            "order_lines",
            context_data={"line_no": {"type": "number"}, "required_checks": {"type": "number"}},
            context_metadata={"status": {"type": "string", "required": False}},
            permissions=[ALICE.public_b58],
        ),
        Kind.CONTEXT,
    )["id"]
    ids["quality_checks"] = svc.put(
        context_tx(
            "quality_checks",
            context_data={
                "check_no": {"type": "string"},
                "order_line": {"type": "relation", "parent": ids["order_lines"]},
            },
            context_metadata={"status": {"type": "string"}},
            permissions=[ALICE.public_b58],
        ),
        Kind.CONTEXT,
    )["id"]
    ids["certificates"] = svc.put(
        context_tx(
            "conformance_certificates",
            context_data={
                "order_line": {"type": "relation", "parent": ids["order_lines"]},
                "certificate_no": {"type": "string", "searchable": True},
            },
            context_metadata={
                "released": {"type": "boolean"},
                "checks_total": {"type": "number"},
                "checks_passed": {"type": "number"},
            },
            permissions=[SERVICE.public_b58],
        ),
        Kind.CONTEXT,
    )["id"]
    for label, checks in zip(("line_a", "line_b"), required):
        ids[label] = svc.put(
            data_tx(
                ids["order_lines"], ids["qp"], ALICE,
                data={"line_no": 1 if label == "line_a" else 2, "required_checks": checks},
            ),
            Kind.DATA,
        )["id"]
    return ids


def add_check(svc: GatewayService, ids: dict, number: str, line: str, status: str) -> str:
    return svc.put(
        data_tx(
            ids["quality_checks"], ids["qp"], ALICE,
            data={"check_no": number, "order_line": ids[line]},
            metadata={"status": status},
        ),
        Kind.DATA,
    )["id"]


def certificates_for(svc: GatewayService, ids: dict, line: str) -> list[str]:
    return [
        asset
        for asset in svc.adapter.assets_by_parent(ids[line])
        if svc.adapter.asset_context(asset) == ids["certificates"]
    ]


class TestRegistry:
    def test_register_and_duplicate(self):
        registry = HookRegistry()
        hook = ContractHook(name="h", trigger="ctx", body=lambda record, view: HookResult())
        registry.register_hook(hook)
        assert len(registry) == 1
        with pytest.raises(DuplicateHookError):
            registry.register_hook(ContractHook(name="h", trigger="other", body=hook.body))

    def test_unknown_configured_hook(self):
        with pytest.raises(KeyError):
            registry_from_names(["nope"])


class TestReleaseDecision:
    def test_released_iff_all_pass_and_nonempty(self):
        assert ReleaseDecision("a" * 64, 3, 3).released
        assert not ReleaseDecision("a" * 64, 3, 2).released
        assert not ReleaseDecision("a" * 64, 0, 0).released


class TestInboundRelease:
    def test_certificate_after_required_passes(self, service):
        ids = build_inbound_scene(service)
        add_check(service, ids, "CHK-1", "line_a", "pass")
        assert certificates_for(service, ids, "line_a") == []
        add_check(service, ids, "CHK-2", "line_a", "pass")
        certs = certificates_for(service, ids, "line_a")
        assert len(certs) == 1
        state = service.adapter.state_of(certs[0])
        assert state.metadata == {"released": True, "checks_total": 2, "checks_passed": 2}
        assert state.data["order_line"] == ids["line_a"]

    def test_failing_check_blocks_release(self, service):
        ids = build_inbound_scene(service)
        add_check(service, ids, "CHK-1", "line_b", "pass")
        add_check(service, ids, "CHK-2", "line_b", "fail")
        add_check(service, ids, "CHK-3", "line_b", "pass")
        assert certificates_for(service, ids, "line_b") == []

    def test_never_emits_twice(self, service):
        ids = build_inbound_scene(service)
        add_check(service, ids, "CHK-1", "line_a", "pass")
        add_check(service, ids, "CHK-2", "line_a", "pass")
        add_check(service, ids, "CHK-3", "line_a", "pass")  # extra pass after release
        assert len(certificates_for(service, ids, "line_a")) == 1

    def test_below_required_count_never_releases(self, service):
        ids = build_inbound_scene(service, required=(2, 3))
        add_check(service, ids, "CHK-1", "line_b", "pass")
        add_check(service, ids, "CHK-2", "line_b", "pass")
        assert certificates_for(service, ids, "line_b") == []  # 2 of 3 required

    def test_update_to_pass_triggers_release(self, service):
        ids = build_inbound_scene(service)
        add_check(service, ids, "CHK-1", "line_a", "pass")
        check = add_check(service, ids, "CHK-2", "line_a", "pending")
        assert certificates_for(service, ids, "line_a") == []
        service.put(
            update_tx(check, service.adapter.head_id(check), ALICE, metadata={"status": "pass"}),
            Kind.DATA,
        )
        assert len(certificates_for(service, ids, "line_a")) == 1

    def test_missing_required_checks_field_means_no_decision(self, service):
        ids = build_inbound_scene(service)
        # an order line context without required_checks declared elsewhere is
        # covered by unit tests; here: order line exists but hook input is a
        # check whose line has required_checks = 0 is impossible by schema, so
        # exercise the "no order line relation" path instead
        result = hooks.inbound_release_hook(
            service.adapter.get_by_id(ids["line_a"]), service.adapter
        )
        assert result.drafts == []

    def test_certificate_is_itself_valid(self, service):
        ids = build_inbound_scene(service)
        add_check(service, ids, "CHK-1", "line_a", "pass")
        add_check(service, ids, "CHK-2", "line_a", "pass")
        cert_asset = certificates_for(service, ids, "line_a")[0]
        cert_tx = service.adapter.get_by_id(cert_asset).transaction
        unsigned = {k: v for k, v in cert_tx.items() if k not in ("id", "timestamp")}
        outcome, _ = service.validator.validate_data_put(unsigned, service.adapter)
        assert outcome.accepted, outcome.detail


class TestReplay:
    def test_replay_reproduces_emissions_exactly(self, service):
        ids = build_inbound_scene(service)
        add_check(service, ids, "CHK-1", "line_a", "pass")
        add_check(service, ids, "CHK-2", "line_a", "pass")
        add_check(service, ids, "CHK-3", "line_b", "pass")
        add_check(service, ids, "CHK-4", "line_b", "fail")

        committed_certs = {
            service.adapter.get_by_id(a).id for a in certificates_for(service, ids, "line_a")
        }
        registry = registry_from_names(["inbound_release"])
        replayed = replay_emissions(service.adapter.records, registry, KeyPair.from_seed(SERVICE.seed))
        assert {derive_id(tx) for tx in replayed} == committed_certs

        again = replay_emissions(service.adapter.records, registry, KeyPair.from_seed(SERVICE.seed))
        assert [derive_id(tx) for tx in again] == [derive_id(tx) for tx in replayed]

    def test_no_matching_commits_no_emissions(self, service):
        ids = build_inbound_scene(service)
        registry = registry_from_names(["inbound_release"])
        assert replay_emissions(service.adapter.records, registry, KeyPair.from_seed(SERVICE.seed)) == []

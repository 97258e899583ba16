"""Post-commit contract hooks.

A hook is a named, deterministic function fired after every commit whose
asset's governing context matches the hook's trigger. Hook bodies inspect the
committed transaction plus a ledger snapshot and return transaction drafts;
the dispatcher signs drafts with the service identity and sends them through
the ordinary validate-then-commit path, so derived transactions are auditable
like any user transaction.

The inbound-release hook is the reference implementation: once every quality
check recorded against an order line passes and their count reaches the order
line's declared ``required_checks``, it emits one conformance certificate for
that order line, exactly once.
"""

from __future__ import annotations

import logging
from dataclasses import dataclass, field
from typing import Callable, Iterable

from .crypto import KeyPair, sign_transaction
from .ledger.base import LedgerAdapterBase
from .ledger.record import CommittedRecord
from .model import AssetState, ContextSchema, Kind

logger = logging.getLogger(__name__)

__all__ = [
    "BUILTIN_HOOKS",
    "ContractHook",
    "DuplicateHookError",
    "HookRegistry",
    "HookResult",
    "ReleaseDecision",
    "inbound_release_hook",
    "prepare_draft",
    "replay_emissions",
]

# Context vocabulary of the inbound-release workflow.
ORDER_LINES_CONTEXT = "order_lines"
QUALITY_CHECKS_CONTEXT = "quality_checks"
CERTIFICATES_CONTEXT = "conformance_certificates"
STATUS_KEY = "status"
STATUS_PASS = "pass"
REQUIRED_CHECKS_KEY = "required_checks"


class DuplicateHookError(ValueError):
    """A hook with this name is already registered."""


@dataclass
class HookResult:
    drafts: list[dict] = field(default_factory=list)
    events: list[str] = field(default_factory=list)


@dataclass(frozen=True)
class ContractHook:
    """Named trigger plus deterministic body.

    The trigger matches a commit when it equals the governing context's asset
    id or its current name (names let hooks be configured before the context
    exists on the ledger)."""

    name: str
    trigger: str
    body: Callable[[CommittedRecord, LedgerAdapterBase], HookResult]


@dataclass(frozen=True)
class ReleaseDecision:
    order_line_id: str
    checks_total: int
    checks_passed: int

    @property
    def released(self) -> bool:
        return self.checks_total >= 1 and self.checks_passed == self.checks_total


class HookRegistry:
    def __init__(self) -> None:
        self._hooks: dict[str, ContractHook] = {}

    def register_hook(self, hook: ContractHook) -> None:
        if hook.name in self._hooks:
            raise DuplicateHookError(f"hook {hook.name!r} already registered")
        self._hooks[hook.name] = hook

    def hooks(self) -> list[ContractHook]:
        return list(self._hooks.values())

    def __len__(self) -> int:
        return len(self._hooks)


def _context_name(view, context_id: str | None) -> str | None:
    if not context_id:
        return None
    state = view.asset_state(context_id)
    return state.metadata.get("name") if state else None


def _schema(view, context_id: str | None) -> ContextSchema | None:
    if not context_id:
        return None
    state = view.asset_state(context_id)
    if state is None:
        return None
    try:
        return ContextSchema.from_state(state)
    except ValueError:
        return None


def _context_id_by_name(view, name: str) -> str | None:
    for state in view.states_by_kind(Kind.CONTEXT):
        if state.metadata.get("name") == name:
            return state.asset_id
    return None


def hook_matches(hook: ContractHook, record: CommittedRecord, view) -> bool:
    tx = record.transaction
    asset_id = tx.get("asset_id") or tx["id"]
    if view.asset_kind(asset_id) is not Kind.DATA:
        return False
    context_id = view.asset_context(asset_id)
    return hook.trigger == context_id or hook.trigger == _context_name(view, context_id)


def _relation_values(state: AssetState, schema: ContextSchema) -> Iterable[str]:
    for section, specs in ((state.data, schema.data_specs), (state.metadata, schema.metadata_specs)):
        for key, spec in specs.items():
            if spec.element_type != "relation" or key not in section:
                continue
            value = section[key]
            yield from (value if spec.type == "array" else [value])


def inbound_release_hook(record: CommittedRecord, view) -> HookResult:
    """Release decision for the order line a quality check points at."""
    result = HookResult()
    tx = record.transaction
    asset_id = tx.get("asset_id") or tx["id"]
    check_state = view.asset_state(asset_id)
    schema = _schema(view, view.asset_context(asset_id))
    if check_state is None or schema is None:
        result.events.append(f"quality check {asset_id}: context unreadable, no decision")
        return result

    order_line_id = None
    for value in _relation_values(check_state, schema):
        if _context_name(view, view.asset_context(value)) == ORDER_LINES_CONTEXT:
            order_line_id = value
            break
    if order_line_id is None:
        result.events.append(f"quality check {asset_id}: no order line relation, no decision")
        return result

    order_line = view.asset_state(order_line_id)
    required = order_line.data.get(REQUIRED_CHECKS_KEY) if order_line else None
    if not isinstance(required, int) or isinstance(required, bool) or required < 1:
        result.events.append(f"order line {order_line_id}: missing or invalid {REQUIRED_CHECKS_KEY}")
        return result

    checks = []
    for related in view.assets_by_parent(order_line_id):
        name = _context_name(view, view.asset_context(related))
        if name == CERTIFICATES_CONTEXT:
            result.events.append(f"order line {order_line_id}: certificate already issued")
            return result
        if name == QUALITY_CHECKS_CONTEXT:
            checks.append(view.asset_state(related))

    decision = ReleaseDecision(
        order_line_id=order_line_id,
        checks_total=len(checks),
        checks_passed=sum(1 for c in checks if c.metadata.get(STATUS_KEY) == STATUS_PASS),
    )
    if not decision.released or decision.checks_total < required:
        result.events.append(
            f"order line {order_line_id}: {decision.checks_passed}/{decision.checks_total} passed,"
            f" {required} required, not released"
        )
        return result

    certificate_context = _context_id_by_name(view, CERTIFICATES_CONTEXT)
    if certificate_context is None:
        result.events.append(f"no {CERTIFICATES_CONTEXT} context on the ledger, cannot certify")
        return result

    result.drafts.append(
        {
            "context_id": certificate_context,
            "data": {
                "order_line": order_line_id,
                "certificate_no": f"CERT-{order_line_id[:16]}",
            },
            "metadata": {
                "released": True,
                "checks_total": decision.checks_total,
                "checks_passed": decision.checks_passed,
            },
        }
    )
    result.events.append(f"order line {order_line_id}: released, certificate drafted")
    return result


BUILTIN_HOOKS: dict[str, ContractHook] = {
    "inbound_release": ContractHook(
        name="inbound_release", trigger=QUALITY_CHECKS_CONTEXT, body=inbound_release_hook
    ),
}


def registry_from_names(names: Iterable[str]) -> HookRegistry:
    registry = HookRegistry()
    for name in names:
        if name not in BUILTIN_HOOKS:
            raise KeyError(f"unknown hook {name!r}; known: {sorted(BUILTIN_HOOKS)}")
        registry.register_hook(BUILTIN_HOOKS[name])
    return registry


def prepare_draft(draft: dict, view, service_key: KeyPair) -> dict | None:
    """Fill in the service identity and sign a hook draft; None when the
    service user is not registered on the ledger."""
    service_b58 = service_key.public_b58
    user_id = None
    for state in view.states_by_kind(Kind.USER):
        if state.data.get("public_key") == service_b58:
            user_id = state.asset_id
            break
    if user_id is None:
        return None
    tx = {k: v for k, v in draft.items() if v is not None}
    tx["user_id"] = user_id
    tx["public_key"] = service_b58
    return sign_transaction(tx, service_key)


def replay_emissions(
    records: Iterable[CommittedRecord], registry: HookRegistry, service_key: KeyPair
) -> list[dict]:
    """Re-run hook dispatch over a committed log, in commit order, against the
    ledger prefix each commit saw. Returns the signed transactions the hooks
    would emit; deterministic, so a replay over the same log is identical."""
    view = LedgerAdapterBase(directory=None)
    emitted: list[dict] = []
    for record in records:
        view.ingest(record)
        for hook in registry.hooks():
            if not hook_matches(hook, record, view):
                continue
            result = hook.body(record, view)
            for draft in result.drafts:
                signed = prepare_draft(draft, view, service_key)
                if signed is not None:
                    emitted.append(signed)
    return emitted

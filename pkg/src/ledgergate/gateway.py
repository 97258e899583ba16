"""HTTP face of the gateway: classify -> validate -> commit -> hooks, plus the
full read surface (histories, states, context/parent queries, text search).

Writes are serialized per asset so the chain-head check and the commit are
atomic for that asset; cross-asset requests proceed concurrently. Post-commit
hooks run on a single dispatcher and their drafts re-enter the normal
validate-commit path.
"""

from __future__ import annotations

import json
import logging
import socket
import threading
import time
from contextlib import asynccontextmanager
from dataclasses import dataclass
from typing import Any

import uvicorn
from fastapi import Body, FastAPI, Request
from fastapi.exceptions import RequestValidationError
from fastapi.responses import JSONResponse

from .config import GatewayConfig
from .crypto import KeyPair
from .hooks import hook_matches, prepare_draft, registry_from_names
from .ledger import (
    BatchedLedger,
    DuplicateIdError,
    EmptyQueryError,
    EndorsementFailureError,
    InstantLedger,
    LedgerError,
    NotFoundError,
)
from .model import ContextSchema, Kind, UnclassifiableTransactionError, classify
from .validation import (
    IndexEntries,
    Stage,
    ValidationOutcome,
    Validator,
    build_index_entries,
    is_image_size_rejection,
)

logger = logging.getLogger(__name__)
access_logger = logging.getLogger("ledgergate.access")

_STAGE_STATUS = {
    Stage.SIGNATURE: 401,
    Stage.IDENTITY: 403,
    Stage.CONTEXT_LOOKUP: 404,
    Stage.PERMISSION: 403,
    Stage.SCHEMA: 422,
    Stage.RELATION: 422,
    Stage.CHAIN_HEAD: 409,
}

_WIRE_FIELDS = {
    "data",
    "metadata",
    "signature",
    "public_key",
    "asset_id",
    "input_id",
    "context_id",
    "user_id",
}

_MAX_HOOK_DEPTH = 8


class BindFailureError(OSError):
    """The configured listen address cannot be bound."""


@dataclass
class ApiError(Exception):
    """Error surface of the HTTP API: status code, failing stage, detail."""

    status: int
    stage: str
    detail: str

    def to_wire(self) -> dict:
        return {"status": self.status, "stage": self.stage, "detail": self.detail}


def _raise_for(outcome: ValidationOutcome) -> None:
    if outcome.accepted:
        return
    status = 413 if is_image_size_rejection(outcome) else _STAGE_STATUS[outcome.stage]
    raise ApiError(status, outcome.stage.value, outcome.detail)


class GatewayService:
    """The gateway pipeline, independent of HTTP wiring."""

    def __init__(self, config: GatewayConfig, adapter=None):
        self.config = config
        if adapter is not None:
            self.adapter = adapter
        elif config.ledger_backend == "batched":
            self.adapter = BatchedLedger(
                config.ledger_dir,
                block_size=config.block_size,
                block_timeout_ms=config.block_timeout_ms,
                endorser_seeds=config.endorser_seeds,
            )
        else:
            self.adapter = InstantLedger(config.ledger_dir)
        self.validator = Validator(config.admin_public_keys, config.max_image_bytes)
        self.registry = registry_from_names(config.enabled_hooks)
        self.service_key = KeyPair.from_seed(config.service_key_seed)
        self._asset_locks: dict[str, threading.Lock] = {}
        self._locks_guard = threading.Lock()
        self._dispatch_lock = threading.RLock()

    def close(self) -> None:
        self.adapter.close()

    def _asset_lock(self, asset_id: Any) -> threading.Lock:
        key = str(asset_id)
        with self._locks_guard:
            return self._asset_locks.setdefault(key, threading.Lock())

    # -- writes --------------------------------------------------------------------

    def put(self, tx: Any, endpoint_kind: Kind) -> dict:
        if not isinstance(tx, dict):
            raise ApiError(400, "Malformed", "request body must be a JSON object")
        unknown = set(tx) - _WIRE_FIELDS
        if unknown:
            raise ApiError(400, "Malformed", f"unexpected field(s): {', '.join(sorted(unknown))}")
        try:
            kind = classify(tx)
        except UnclassifiableTransactionError as exc:
            raise ApiError(400, "Malformed", str(exc)) from None
        if kind is Kind.UPDATE:
            record = self._apply_update(tx, endpoint_kind)
        elif kind is not endpoint_kind:
            raise ApiError(400, "Malformed", f"endpoint expects a {endpoint_kind.value} transaction, got {kind.value}")
        elif kind is Kind.DATA:
            record = self._apply_data_create(tx)
        else:
            record = self._apply_admin_create(tx)
        self._dispatch(record)
        return {"id": record.id, "timestamp": record.timestamp}

    def _apply_admin_create(self, tx: dict):
        outcome = self.validator.validate_admin_put(tx, self.adapter)
        _raise_for(outcome)
        return self._commit(tx, IndexEntries(), None)

    def _apply_data_create(self, tx: dict):
        outcome, indexes = self.validator.validate_data_put(tx, self.adapter)
        _raise_for(outcome)
        return self._commit(tx, indexes, self._context_version(tx.get("context_id")))

    def _apply_update(self, tx: dict, endpoint_kind: Kind):
        asset_id = tx.get("asset_id")
        actual = self.adapter.asset_kind(asset_id) if isinstance(asset_id, str) else None
        if actual is not None and actual is not endpoint_kind:
            raise ApiError(
                400, "Malformed", f"asset is a {actual.value} asset; use the {actual.value} endpoint"
            )
        versioned = endpoint_kind is Kind.CONTEXT and "data" in tx
        with self._asset_lock(asset_id):
            if versioned:
                outcome = self.validator.validate_context_version_put(tx, self.adapter)
            else:
                outcome = self.validator.validate_update_put(tx, self.adapter)
            _raise_for(outcome)
            indexes = IndexEntries()
            context_version = None
            if actual is Kind.DATA:
                schema = self._schema_of(self.adapter.asset_context(asset_id))
                if schema is not None:
                    indexes = build_index_entries([(tx.get("metadata") or {}, schema.metadata_specs)])
                    context_version = schema.version_text
            return self._commit(tx, indexes, context_version)

    def _commit(self, tx: dict, indexes: IndexEntries, context_version: str | None):
        try:
            return self.adapter.commit(tx, indexes, context_version)
        except DuplicateIdError as exc:
            raise ApiError(409, "DuplicateId", str(exc)) from None
        except EndorsementFailureError as exc:
            raise ApiError(503, "EndorsementFailure", str(exc)) from None
        except LedgerError as exc:
            raise ApiError(500, "Storage", str(exc)) from None

    def _schema_of(self, context_id: str | None) -> ContextSchema | None:
        state = self.adapter.asset_state(context_id) if context_id else None
        if state is None:
            return None
        try:
            return ContextSchema.from_state(state)
        except ValueError:
            return None

    def _context_version(self, context_id: Any) -> str | None:
        schema = self._schema_of(context_id if isinstance(context_id, str) else None)
        return schema.version_text if schema else None

    # -- hooks -----------------------------------------------------------------------

    def _dispatch(self, record) -> None:
        if not len(self.registry):
            return
        with self._dispatch_lock:
            self._run_hooks(record, depth=0)

    def _run_hooks(self, record, depth: int) -> None:
        if depth >= _MAX_HOOK_DEPTH:
            logger.warning("hook recursion depth %d reached, stopping dispatch", depth)
            return
        for hook in self.registry.hooks():
            try:
                if not hook_matches(hook, record, self.adapter):
                    continue
                result = hook.body(record, self.adapter)
            except Exception:
                logger.exception("hook %s failed on %s", hook.name, record.id)
                continue
            for event in result.events:
                logger.info("hook %s: %s", hook.name, event)
            for draft in result.drafts:
                signed = prepare_draft(draft, self.adapter, self.service_key)
                if signed is None:
                    logger.warning("hook %s: service identity not registered, draft dropped", hook.name)
                    continue
                outcome, indexes = self.validator.validate_data_put(signed, self.adapter)
                if not outcome.accepted:
                    logger.warning(
                        "hook %s: draft rejected at %s: %s", hook.name, outcome.stage, outcome.detail
                    )
                    continue
                try:
                    derived = self.adapter.commit(
                        signed, indexes, self._context_version(signed.get("context_id"))
                    )
                except LedgerError as exc:
                    logger.warning("hook %s: draft commit failed: %s", hook.name, exc)
                    continue
                logger.info("hook %s: committed derived transaction %s", hook.name, derived.id)
                self._run_hooks(derived, depth + 1)

    # -- reads -----------------------------------------------------------------------

    def _require_asset(self, asset_id: str, kind: Kind) -> None:
        if self.adapter.asset_kind(asset_id) is not kind:
            raise ApiError(404, "NotFound", f"no {kind.value} asset {asset_id!r}")

    def history(self, asset_id: str, kind: Kind) -> list[dict]:
        self._require_asset(asset_id, kind)
        return [r.to_wire() for r in self.adapter.history_by_asset(asset_id)]

    def state(self, asset_id: str, kind: Kind) -> dict:
        self._require_asset(asset_id, kind)
        return self.adapter.state_of(asset_id).to_wire()

    def all_records(self, kind: Kind) -> list[dict]:
        return [r.to_wire() for r in self.adapter.list_all(kind)]

    def all_states(self, kind: Kind) -> list[dict]:
        return [s.to_wire() for s in self.adapter.states_by_kind(kind)]

    def data_record(self, transaction_id: str) -> dict:
        try:
            record = self.adapter.get_by_id(transaction_id)
        except NotFoundError as exc:
            raise ApiError(404, "NotFound", str(exc)) from None
        asset_id = record.transaction.get("asset_id") or record.id
        if self.adapter.asset_kind(asset_id) is not Kind.DATA:
            raise ApiError(404, "NotFound", f"{transaction_id!r} is not a data transaction")
        return record.to_wire()

    def data_query(self, asset_id: str | None, context_id: str | None, parent_id: str | None) -> list[dict]:
        self._require_single_filter(asset_id, context_id, parent_id)
        if asset_id is not None:
            return self.history(asset_id, Kind.DATA)
        if context_id is not None:
            return [r.to_wire() for r in self.adapter.list_by_context(context_id)]
        return [r.to_wire() for r in self.adapter.list_by_parent(parent_id)]

    def data_state_query(self, asset_id: str | None, context_id: str | None, parent_id: str | None):
        self._require_single_filter(asset_id, context_id, parent_id)
        if asset_id is not None:
            return self.state(asset_id, Kind.DATA)
        if context_id is not None:
            return [s.to_wire() for s in self.adapter.states_by_context(context_id)]
        return [s.to_wire() for s in self.adapter.states_by_parent(parent_id)]

    @staticmethod
    def _require_single_filter(asset_id, context_id, parent_id) -> None:
        given = sum(v is not None for v in (asset_id, context_id, parent_id))
        if given != 1:
            raise ApiError(400, "Malformed", "exactly one of asset_id, context_id, parent_id is required")

    def search(self, text: str | None) -> list[dict]:
        try:
            return [s.to_wire() for s in self.adapter.search_text(text or "")]
        except EmptyQueryError as exc:
            raise ApiError(400, "EmptyQuery", str(exc)) from None


def create_app(config: GatewayConfig, adapter=None) -> FastAPI:
    """Build the HTTP application; opening the ledger verifies its integrity
    and raises CorruptLedgerError on tampered files."""
    service = GatewayService(config, adapter)

    @asynccontextmanager
    async def lifespan(app: FastAPI):
        yield
        service.close()  # seals any open block before exit

    app = FastAPI(title="ledgergate", lifespan=lifespan)
    app.state.service = service

    @app.exception_handler(ApiError)
    async def api_error_handler(request: Request, exc: ApiError):
        return JSONResponse(status_code=exc.status, content=exc.to_wire())

    @app.exception_handler(RequestValidationError)
    async def malformed_handler(request: Request, exc: RequestValidationError):
        return JSONResponse(
            status_code=400,
            content={"status": 400, "stage": "Malformed", "detail": "request body is not a JSON object"},
        )

    @app.middleware("http")
    async def access_log(request: Request, call_next):
        started = time.perf_counter()
        response = await call_next(request)
        access_logger.info(
            json.dumps(
                {
                    "method": request.method,
                    "path": request.url.path,
                    "query": request.url.query,
                    "status": response.status_code,
                    "duration_ms": round((time.perf_counter() - started) * 1000, 3),
                }
            )
        )
        return response

    # -- users --------------------------------------------------------------------

    @app.put("/user")
    def put_user(payload: dict = Body()):
        return service.put(payload, Kind.USER)

    @app.get("/users/{user_id}")
    def get_user_history(user_id: str):
        return service.history(user_id, Kind.USER)

    @app.get("/users")
    def get_users():
        return service.all_records(Kind.USER)

    @app.get("/state/users/{user_id}")
    def get_user_state(user_id: str):
        return service.state(user_id, Kind.USER)

    @app.get("/state/users")
    def get_user_states():
        return service.all_states(Kind.USER)

    # -- contexts -----------------------------------------------------------------

    @app.put("/context")
    def put_context(payload: dict = Body()):
        return service.put(payload, Kind.CONTEXT)

    @app.get("/contexts/{context_id}")
    def get_context_history(context_id: str):
        return service.history(context_id, Kind.CONTEXT)

    @app.get("/contexts")
    def get_contexts():
        return service.all_records(Kind.CONTEXT)

    @app.get("/state/contexts/{context_id}")
    def get_context_state(context_id: str):
        return service.state(context_id, Kind.CONTEXT)

    @app.get("/state/contexts")
    def get_context_states():
        return service.all_states(Kind.CONTEXT)

    # -- data transactions ----------------------------------------------------------

    @app.put("/transaction")
    def put_transaction(payload: dict = Body()):
        return service.put(payload, Kind.DATA)

    @app.get("/transactions/{transaction_id}")
    def get_transaction(transaction_id: str):
        return service.data_record(transaction_id)

    @app.get("/transactions")
    def get_transactions(
        asset_id: str | None = None, context_id: str | None = None, parent_id: str | None = None
    ):
        return service.data_query(asset_id, context_id, parent_id)

    @app.get("/state/transactions/search")
    def search_transactions(text: str | None = None):
        return service.search(text)

    @app.get("/state/transactions")
    def get_transaction_states(
        asset_id: str | None = None, context_id: str | None = None, parent_id: str | None = None
    ):
        return service.data_state_query(asset_id, context_id, parent_id)

    return app


def serve(config: GatewayConfig) -> None:
    """Run the gateway until interrupted."""
    host, port = config.host_port()
    probe = socket.socket(socket.AF_INET, socket.SOCK_STREAM)
    try:
        probe.setsockopt(socket.SOL_SOCKET, socket.SO_REUSEADDR, 1)
        probe.bind((host, port))
    except OSError as exc:
        raise BindFailureError(f"cannot bind {config.listen_address}: {exc}") from None
    finally:
        probe.close()
    app = create_app(config)
    uvicorn.run(app, host=host, port=port, log_config=None)


class EmbeddedGateway:
    """Gateway on an ephemeral port in a background thread (benchmarks, tests)."""

    def __init__(self, config: GatewayConfig, adapter=None):
        self.config = config
        self.app = create_app(config, adapter)
        host, _ = config.host_port()
        self._host = host
        self._server = uvicorn.Server(
            uvicorn.Config(self.app, host=host, port=0, log_config=None, log_level="warning")
        )
        self._thread: threading.Thread | None = None

    @property
    def service(self) -> GatewayService:
        return self.app.state.service

    def start(self, timeout: float = 10.0) -> str:
        self._thread = threading.Thread(target=self._server.run, name="gateway", daemon=True)
        self._thread.start()
        deadline = time.monotonic() + timeout
        while not self._server.started:
            if time.monotonic() > deadline:
                raise BindFailureError("embedded gateway did not start in time")
            time.sleep(0.01)
        port = self._server.servers[0].sockets[0].getsockname()[1]
        return f"http://{self._host}:{port}"

    def stop(self) -> None:
        self._server.should_exit = True
        if self._thread is not None:
            self._thread.join(timeout=10.0)

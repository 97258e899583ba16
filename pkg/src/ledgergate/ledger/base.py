"""Shared adapter machinery: in-memory indexes, read operations, ledger view.

Writes go through a single-writer lock in each backend; reads serve from
append-only in-memory structures rebuilt at startup. A small artificial delay
can be injected into every operation for benchmark calibration.
"""

from __future__ import annotations

import time
from pathlib import Path
from typing import Iterable

from ..model import AssetState, ContextSchema, Kind, classify, derive_state
from ..validation import build_index_entries
from .errors import EmptyQueryError, NotFoundError
from .record import CommittedRecord


class LedgerAdapterBase:
    """Index and query layer common to both backends."""

    def __init__(self, directory: str | Path | None, artificial_delay_ms: float = 0.0):
        # directory is None for pure in-memory views (hook replay)
        self.directory = Path(directory) if directory is not None else None
        if self.directory is not None:
            self.directory.mkdir(parents=True, exist_ok=True)
        self.artificial_delay_ms = artificial_delay_ms
        self._records: list[CommittedRecord] = []
        self._by_id: dict[str, CommittedRecord] = {}
        self._chains: dict[str, list[CommittedRecord]] = {}
        self._assets_in_order: list[str] = []
        self._asset_kind: dict[str, Kind] = {}
        self._asset_context: dict[str, str] = {}
        self._context_assets: dict[str, list[str]] = {}
        self._parent_assets: dict[str, list[str]] = {}
        self._last_timestamp = 0

    # -- index maintenance --------------------------------------------------------

    def _absorb(self, record: CommittedRecord) -> None:
        tx = record.transaction
        self._records.append(record)
        self._by_id[record.id] = record
        asset_id = tx.get("asset_id") or record.id
        chain = self._chains.setdefault(asset_id, [])
        if not chain:
            self._assets_in_order.append(asset_id)
            self._asset_kind[asset_id] = classify(tx)
            context_id = tx.get("context_id")
            if context_id:
                self._asset_context[asset_id] = context_id
                self._context_assets.setdefault(context_id, []).append(asset_id)
        chain.append(record)
        for parent in record.parents:
            assets = self._parent_assets.setdefault(parent, [])
            if asset_id not in assets:
                assets.append(asset_id)
        self._last_timestamp = max(self._last_timestamp, record.timestamp)

    def _next_timestamp(self) -> int:
        now = int(time.time() * 1000)
        self._last_timestamp = max(self._last_timestamp, now)
        return self._last_timestamp

    def _delay(self) -> None:
        if self.artificial_delay_ms:
            time.sleep(self.artificial_delay_ms / 1000.0)

    # -- ledger view used by validation and hooks ----------------------------------

    def asset_state(self, asset_id: str) -> AssetState | None:
        chain = self._chains.get(asset_id)
        if not chain:
            return None
        return derive_state([r.transaction for r in chain])

    def asset_kind(self, asset_id: str) -> Kind | None:
        return self._asset_kind.get(asset_id)

    def asset_context(self, asset_id: str) -> str | None:
        return self._asset_context.get(asset_id)

    def head_id(self, asset_id: str) -> str | None:
        chain = self._chains.get(asset_id)
        return chain[-1].id if chain else None

    def exists(self, transaction_id: str) -> bool:
        return transaction_id in self._by_id

    def assets_by_parent(self, parent_id: str) -> list[str]:
        """Asset ids whose index references the parent, first-commit order."""
        return list(self._parent_assets.get(parent_id, ()))

    def ingest(self, record: CommittedRecord) -> None:
        """Absorb an already-committed record into the in-memory view only.

        For replay/simulation; persistent backends index through commit."""
        self._absorb(record)

    # -- reads ----------------------------------------------------------------------

    def get_by_id(self, transaction_id: str) -> CommittedRecord:
        self._delay()
        record = self._by_id.get(transaction_id)
        if record is None:
            raise NotFoundError(f"no transaction {transaction_id!r}")
        return record

    def history_by_asset(self, asset_id: str) -> list[CommittedRecord]:
        self._delay()
        chain = self._chains.get(asset_id)
        if not chain:
            raise NotFoundError(f"no asset {asset_id!r}")
        return list(chain)

    def state_of(self, asset_id: str) -> AssetState:
        self._delay()
        state = self.asset_state(asset_id)
        if state is None:
            raise NotFoundError(f"no asset {asset_id!r}")
        return state

    def list_all(self, kind: Kind) -> list[CommittedRecord]:
        """Every record belonging to an asset of the kind, in commit order."""
        self._delay()
        return [
            r
            for r in self._records
            if self._asset_kind.get(r.transaction.get("asset_id") or r.id) is kind
        ]

    def list_by_context(self, context_id: str) -> list[CommittedRecord]:
        """Records of data assets created under the context, commit order,
        updates included."""
        self._delay()
        return self._records_of_assets(self._context_assets.get(context_id, ()))

    def list_by_parent(self, parent_id: str) -> list[CommittedRecord]:
        """Records of data assets whose index references the parent; an asset
        referencing it from several fields appears once."""
        self._delay()
        return self._records_of_assets(self._parent_assets.get(parent_id, ()))

    def _records_of_assets(self, asset_ids: Iterable[str]) -> list[CommittedRecord]:
        wanted = set(asset_ids)
        return [
            r
            for r in self._records
            if (r.transaction.get("asset_id") or r.id) in wanted
        ]

    def states_by_kind(self, kind: Kind) -> list[AssetState]:
        self._delay()
        return [
            self.asset_state(asset_id)
            for asset_id in self._assets_in_order
            if self._asset_kind[asset_id] is kind
        ]

    def states_by_context(self, context_id: str) -> list[AssetState]:
        self._delay()
        return [self.asset_state(a) for a in self._context_assets.get(context_id, ())]

    def states_by_parent(self, parent_id: str) -> list[AssetState]:
        self._delay()
        return [self.asset_state(a) for a in self._parent_assets.get(parent_id, ())]

    def search_text(self, text: str) -> list[AssetState]:
        """States of data assets whose searchable string fields contain the
        text as a case-insensitive substring."""
        self._delay()
        if not text or not text.strip():
            raise EmptyQueryError("search text must be non-empty")
        needle = text.lower()
        matches = []
        for asset_id in self._assets_in_order:
            if self._asset_kind[asset_id] is not Kind.DATA:
                continue
            context_id = self._asset_context.get(asset_id)
            context_state = self.asset_state(context_id) if context_id else None
            if context_state is None:
                continue
            try:
                schema = ContextSchema.from_state(context_state)
            except ValueError:
                continue
            state = self.asset_state(asset_id)
            entries = build_index_entries(
                [(state.data, schema.data_specs), (state.metadata, schema.metadata_specs)]
            )
            if any(needle in term.lower() for term in entries.search_terms):
                matches.append(state)
        return matches

    # -- misc ------------------------------------------------------------------------

    @property
    def records(self) -> list[CommittedRecord]:
        """Committed records in commit order (snapshot copy)."""
        return list(self._records)

    def __len__(self) -> int:
        return len(self._records)

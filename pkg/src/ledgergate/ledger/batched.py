"""Block-batched backend with simulated endorsement.

Commits queue until a block seals: when it holds ``block_size`` transactions
or ``block_timeout_ms`` after its first transaction, whichever comes first.
Every configured endorser must sign the block hash (AND policy) before the
block is persisted; ``commit`` returns only once its enclosing block sealed.

Files: ``blocks.ndjson`` (one self-chained block per line, authoritative) plus
a flattened ``ledger.ndjson`` record mirror and the ``head`` pointer. A crash
loses at most the unsealed in-memory block.
"""

from __future__ import annotations

import hashlib
import logging
import threading
import time
from dataclasses import dataclass, field

from .. import crypto
from ..crypto import KeyPair, canonicalize, derive_id, sha3_256_hex
from ..model import Kind, classify
from ..validation import IndexEntries
from .base import LedgerAdapterBase
from .errors import (
    CorruptLedgerError,
    DuplicateIdError,
    EndorsementFailureError,
    LedgerClosedError,
    LedgerError,
)
from .files import (
    ZERO_HASH,
    append_ndjson,
    chain_entry,
    read_head,
    read_ndjson,
    reconcile_head,
    verify_record_log,
    write_head,
)
from .record import CommittedRecord

logger = logging.getLogger(__name__)

DEFAULT_BLOCK_SIZE = 10
DEFAULT_BLOCK_TIMEOUT_MS = 250

_BLOCK_KEYS = {"height", "prev_hash", "transactions", "endorsers", "block_hash", "endorsements"}


def default_endorser_seeds(count: int = 2) -> list[bytes]:
    """Deterministic in-process endorser identities."""
    return [hashlib.sha3_256(b"ledgergate/endorser/%d" % i).digest() for i in range(count)]


@dataclass
class _Pending:
    tx: dict
    indexes: IndexEntries
    context_version: str | None
    transaction_id: str
    enqueued: float
    event: threading.Event = field(default_factory=threading.Event)
    record: CommittedRecord | None = None
    error: Exception | None = None


class BatchedLedger(LedgerAdapterBase):
    def __init__(
        self,
        directory,
        block_size: int = DEFAULT_BLOCK_SIZE,
        block_timeout_ms: int = DEFAULT_BLOCK_TIMEOUT_MS,
        endorser_seeds: list[bytes] | None = None,
        artificial_delay_ms: float = 0.0,
    ):
        super().__init__(directory, artificial_delay_ms)
        if block_size < 1:
            raise ValueError("block_size must be >= 1")
        if block_timeout_ms < 1:
            raise ValueError("block_timeout_ms must be >= 1")
        self.block_size = block_size
        self.block_timeout_ms = block_timeout_ms
        self._endorsers = [KeyPair.from_seed(s) for s in (endorser_seeds or default_endorser_seeds())]
        self._endorser_keys = [kp.public_b58 for kp in self._endorsers]
        self._blocks_path = self.directory / "blocks.ndjson"
        self._log_path = self.directory / "ledger.ndjson"
        self._head_path = self.directory / "head"

        self._cond = threading.Condition()
        self._pending: list[_Pending] = []
        self._pending_ids: set[str] = set()
        self._closed = False
        self._fail_next_seal = False
        self._height = 0
        self._block_tip = ZERO_HASH
        self._record_tip = ZERO_HASH

        self._load()
        self._blocks_handle = open(self._blocks_path, "ab")
        self._log_handle = open(self._log_path, "ab")
        self._sealer = threading.Thread(target=self._sealer_loop, name="block-sealer", daemon=True)
        self._sealer.start()

    # -- persistence -----------------------------------------------------------------

    def _check_files(self) -> tuple[list[dict], list[str], list[dict], list[str]]:
        """Verify both files and the head pointer; return (record wires,
        block hashes, mirror-repair payloads, mirror hashes)."""
        blocks = read_ndjson(self._blocks_path)
        expected_records: list[dict] = []
        prev = ZERO_HASH
        block_hashes: list[str] = []
        for i, block in enumerate(blocks):
            if not isinstance(block, dict) or set(block.keys()) != _BLOCK_KEYS:
                raise CorruptLedgerError(f"blocks.ndjson: line {i + 1} is not a block")
            if block["height"] != i:
                raise CorruptLedgerError(f"blocks.ndjson: block {i} carries height {block['height']}")
            if block["prev_hash"] != prev:
                raise CorruptLedgerError(f"blocks.ndjson: block {i} does not link to its predecessor")
            body = {
                "height": block["height"],
                "prev_hash": block["prev_hash"],
                "transactions": block["transactions"],
                "endorsers": block["endorsers"],
            }
            if sha3_256_hex(canonicalize(body)) != block["block_hash"]:
                raise CorruptLedgerError(f"blocks.ndjson: block {i} fails hash verification")
            if list(block["endorsers"]) != self._endorser_keys:
                raise CorruptLedgerError(f"blocks.ndjson: block {i} endorsers differ from configuration")
            signatures = block["endorsements"]
            if not isinstance(signatures, list) or len(signatures) != len(self._endorser_keys):
                raise CorruptLedgerError(f"blocks.ndjson: block {i} does not satisfy the AND policy")
            for key, signature in zip(self._endorser_keys, signatures):
                try:
                    valid = crypto.verify(block["block_hash"].encode(), signature, key)
                except (crypto.MalformedKeyError, crypto.MalformedSignatureError):
                    valid = False
                if not valid:
                    raise CorruptLedgerError(f"blocks.ndjson: block {i} endorsement invalid")
            transactions = block["transactions"]
            if not isinstance(transactions, list) or not 1 <= len(transactions) <= self.block_size:
                raise CorruptLedgerError(f"blocks.ndjson: block {i} transaction count out of range")
            expected_records.extend(transactions)
            prev = block["block_hash"]
            block_hashes.append(prev)

        head = read_head(self._head_path)
        self._blocks_repair, blocks_section = reconcile_head(head, "blocks", block_hashes)

        mirror_entries = read_ndjson(self._log_path)
        mirror_payloads = verify_record_log(mirror_entries, "ledger.ndjson")
        mirror_hashes = [e["entry_hash"] for e in mirror_entries]
        if len(mirror_payloads) > len(expected_records):
            raise CorruptLedgerError("ledger.ndjson: more records than the block log")
        for i, payload in enumerate(mirror_payloads):
            if canonicalize(payload) != canonicalize(expected_records[i]):
                raise CorruptLedgerError(f"ledger.ndjson: record {i} diverges from its block")
        if head is not None:
            records_head = head.get("records")
            if not isinstance(records_head, dict):
                raise CorruptLedgerError("records: head pointer lacks this section")
            recorded = records_head.get("count", 0)
            if not isinstance(recorded, int) or recorded < 0 or recorded > len(mirror_payloads):
                raise CorruptLedgerError("ledger.ndjson: truncated below the head pointer")
            recorded_tip = mirror_hashes[recorded - 1] if recorded else ZERO_HASH
            if records_head.get("tip") != recorded_tip:
                raise CorruptLedgerError("records: head tip does not match the log")
        elif mirror_payloads:
            raise CorruptLedgerError("records: head pointer missing for a non-empty log")

        return expected_records, block_hashes, expected_records[len(mirror_payloads):], mirror_hashes

    def _load(self) -> None:
        records, block_hashes, mirror_missing, mirror_hashes = self._check_files()
        for wire in records:
            self._absorb(CommittedRecord.from_wire(wire))
        self._height = len(block_hashes)
        self._block_tip = block_hashes[-1] if block_hashes else ZERO_HASH
        self._record_tip = mirror_hashes[-1] if mirror_hashes else ZERO_HASH
        if mirror_missing or self._blocks_repair:
            logger.warning("repairing record mirror/head after interrupted seal")
            with open(self._log_path, "ab") as handle:
                for wire in mirror_missing:
                    entry = chain_entry(wire, self._record_tip)
                    append_ndjson(handle, entry)
                    self._record_tip = entry["entry_hash"]
            self._write_head()

    def _write_head(self) -> None:
        write_head(
            self._head_path,
            {
                "blocks": {"count": self._height, "tip": self._block_tip},
                "records": {"count": len(self._records), "tip": self._record_tip},
            },
        )

    def verify_chain(self) -> bool:
        """Recompute hashes, links and endorsements of the persisted chain."""
        try:
            self._check_files()
        except CorruptLedgerError:
            return False
        return True

    verify_integrity = verify_chain

    # -- commit ------------------------------------------------------------------------

    def commit(
        self,
        tx: dict,
        indexes: IndexEntries | None = None,
        context_version: str | None = None,
    ) -> CommittedRecord:
        self._delay()
        with self._cond:
            if self._closed:
                raise LedgerClosedError("ledger is closed")
            transaction_id = derive_id(tx)
            if transaction_id in self._by_id or transaction_id in self._pending_ids:
                raise DuplicateIdError(f"transaction {transaction_id} already committed")
            entry = _Pending(
                tx=tx,
                indexes=indexes or IndexEntries(),
                context_version=context_version,
                transaction_id=transaction_id,
                enqueued=time.monotonic(),
            )
            self._pending.append(entry)
            self._pending_ids.add(transaction_id)
            self._cond.notify_all()
        if not entry.event.wait(timeout=self.block_timeout_ms / 1000.0 + 30.0):
            raise LedgerError("timed out waiting for block seal")
        if entry.error is not None:
            raise entry.error
        return entry.record

    def inject_endorsement_failure(self) -> None:
        """Make the next seal fail its endorsement (test hook)."""
        with self._cond:
            self._fail_next_seal = True

    # -- sealer ------------------------------------------------------------------------

    def _sealer_loop(self) -> None:
        timeout_s = self.block_timeout_ms / 1000.0
        while True:
            with self._cond:
                while True:
                    if self._pending:
                        deadline = self._pending[0].enqueued + timeout_s
                        now = time.monotonic()
                        if self._closed or len(self._pending) >= self.block_size or now >= deadline:
                            break
                        self._cond.wait(timeout=deadline - now)
                    else:
                        if self._closed:
                            return
                        self._cond.wait()
                batch = self._pending[: self.block_size]
                del self._pending[: len(batch)]
                self._seal_locked(batch)

    def _seal_locked(self, batch: list[_Pending]) -> None:
        for entry in batch:
            self._pending_ids.discard(entry.transaction_id)
        if self._fail_next_seal:
            self._fail_next_seal = False
            error = EndorsementFailureError("endorser refused to sign the block")
            for entry in batch:
                entry.error = error
                entry.event.set()
            return

        height = self._height
        timestamp = self._next_timestamp()
        records = []
        for position, entry in enumerate(batch):
            committed_tx = {"id": entry.transaction_id, **entry.tx}
            if classify(entry.tx) is Kind.DATA:
                committed_tx["timestamp"] = timestamp
            records.append(
                CommittedRecord(
                    transaction=committed_tx,
                    timestamp=timestamp,
                    sequence=len(self._records) + position,
                    parents=entry.indexes.parents,
                    search_terms=entry.indexes.search_terms,
                    context_version=entry.context_version,
                    block_ref={"block_height": height, "position": position},
                )
            )

        body = {
            "height": height,
            "prev_hash": self._block_tip,
            "transactions": [r.to_wire() for r in records],
            "endorsers": self._endorser_keys,
        }
        block_hash = sha3_256_hex(canonicalize(body))
        endorsements = [crypto.sign(block_hash.encode(), kp) for kp in self._endorsers]
        append_ndjson(self._blocks_handle, {**body, "block_hash": block_hash, "endorsements": endorsements})
        for record in records:
            chained = chain_entry(record.to_wire(), self._record_tip)
            append_ndjson(self._log_handle, chained)
            self._record_tip = chained["entry_hash"]
        self._block_tip = block_hash
        self._height += 1
        for record in records:
            self._absorb(record)
        self._write_head()
        for entry, record in zip(batch, records):
            entry.record = record
            entry.event.set()

    # -- shutdown ------------------------------------------------------------------------

    def close(self, flush: bool = True) -> None:
        """Stop the sealer. With flush, pending transactions seal immediately;
        without (simulated crash), they are abandoned."""
        with self._cond:
            if self._closed:
                return
            if not flush:
                error = LedgerClosedError("ledger closed before the block sealed")
                for entry in self._pending:
                    self._pending_ids.discard(entry.transaction_id)
                    entry.error = error
                    entry.event.set()
                self._pending.clear()
            self._closed = True
            self._cond.notify_all()
        self._sealer.join(timeout=30.0)
        self._blocks_handle.close()
        self._log_handle.close()

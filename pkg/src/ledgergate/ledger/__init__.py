"""Interchangeable ledger layer: one adapter contract, two simulated backends.

``InstantLedger`` makes every commit durable and readable on return;
``BatchedLedger`` seals commits into endorsed blocks of up to ``block_size``
transactions or after ``block_timeout_ms``, whichever comes first. Both keep
hash-linked newline-delimited JSON files and rebuild their in-memory indexes
at startup, refusing to open a tampered directory.
"""

from .errors import (
    CorruptLedgerError,
    DuplicateIdError,
    EmptyQueryError,
    EndorsementFailureError,
    LedgerClosedError,
    LedgerError,
    NotFoundError,
)
from .record import CommittedRecord
from .instant import InstantLedger
from .batched import BatchedLedger

__all__ = [
    "BatchedLedger",
    "CommittedRecord",
    "CorruptLedgerError",
    "DuplicateIdError",
    "EmptyQueryError",
    "EndorsementFailureError",
    "InstantLedger",
    "LedgerClosedError",
    "LedgerError",
    "NotFoundError",
    "open_ledger",
]


def open_ledger(backend: str, directory, **kwargs):
    """Factory for the configured backend name ("instant" or "batched")."""
    if backend == "instant":
        return InstantLedger(directory, **kwargs)
    if backend == "batched":
        return BatchedLedger(directory, **kwargs)
    raise ValueError(f"unknown ledger backend {backend!r}")

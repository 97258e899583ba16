"""Ledger layer error types."""


class LedgerError(Exception):
    """Base class for ledger adapter failures."""


class DuplicateIdError(LedgerError):
    """Transaction with this content-addressed id is already on the ledger."""


class NotFoundError(LedgerError):
    """No committed transaction or asset matches the given id."""


class EmptyQueryError(LedgerError):
    """Text search called with an empty query."""


class EndorsementFailureError(LedgerError):
    """A configured endorser refused to sign the block."""


class CorruptLedgerError(LedgerError):
    """Persisted ledger files fail hash-chain or endorsement verification."""


class LedgerClosedError(LedgerError):
    """Operation attempted on a closed adapter."""

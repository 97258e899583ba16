"""ledgergate: a schema-enforcing transaction gateway over pluggable
append-only ledger backends, with Ed25519-signed, content-addressed
transactions and post-commit contract hooks."""

from ._kernels import KERNEL_BACKEND

__version__ = "0.1.0"

__all__ = ["KERNEL_BACKEND", "__version__"]

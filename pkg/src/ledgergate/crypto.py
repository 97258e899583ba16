"""Deterministic byte-level foundation: canonical serialization, SHA3-256,
Ed25519 signing/verification, base58 keys, and content-addressed transaction ids.

Convention used throughout the gateway: the signed payload is the transaction
wire object minus ``id``, ``signature`` and ``timestamp`` (all derived or
assigned at commit); the Ed25519 signature is made over the 32-byte SHA3-256
digest of the canonical payload bytes, and the transaction id is the SHA3-256
of canonical payload bytes concatenated with the raw signature bytes.
"""

from __future__ import annotations

import hashlib
import re
from dataclasses import dataclass
from typing import Any, Mapping

from cryptography.exceptions import InvalidSignature
from cryptography.hazmat.primitives.asymmetric.ed25519 import (
    Ed25519PrivateKey,
    Ed25519PublicKey,
)

from ._kernels import (
    KERNEL_BACKEND,
    InvalidCharacterError,
    NonCanonicalizableError,
    base58_decode,
    base58_encode,
    canonical_json,
)

__all__ = [
    "KERNEL_BACKEND",
    "COMMIT_ASSIGNED_FIELDS",
    "InvalidCharacterError",
    "KeyPair",
    "MalformedKeyError",
    "MalformedSignatureError",
    "NonCanonicalizableError",
    "base58_decode",
    "base58_encode",
    "canonicalize",
    "derive_id",
    "sha3_256_hex",
    "sign",
    "signed_body",
    "verify",
]

# Fields stripped from a wire object before canonicalization: they are either
# derived from the signature itself or assigned by the commit process.
COMMIT_ASSIGNED_FIELDS = ("id", "signature", "timestamp")

# wire form is strict lowercase hex; uppercase spellings are rejected rather
# than silently normalized
_SIGNATURE_RE = re.compile(r"\A[0-9a-f]{128}\Z")


class MalformedKeyError(ValueError):
    """Public key is not a base58 string decoding to exactly 32 bytes."""


class MalformedSignatureError(ValueError):
    """Signature is not a 128-character hex string."""


def canonicalize(body: Any) -> bytes:
    """Canonical UTF-8 bytes of a JSON value; key-order insensitive."""
    return canonical_json(body)


def signed_body(tx: Mapping[str, Any]) -> dict:
    """The portion of a wire transaction covered by its signature."""
    return {k: v for k, v in tx.items() if k not in COMMIT_ASSIGNED_FIELDS}


def sha3_256_hex(data: bytes) -> str:
    return hashlib.sha3_256(data).hexdigest()


@dataclass(frozen=True)
class KeyPair:
    """Ed25519 seed plus its derived public key. The seed never hits the ledger."""

    seed: bytes
    public_key: bytes

    @classmethod
    def from_seed(cls, seed: bytes) -> "KeyPair":
        if len(seed) != 32:
            raise MalformedKeyError(f"seed must be 32 bytes, got {len(seed)}")
        private = Ed25519PrivateKey.from_private_bytes(seed)
        public = private.public_key().public_bytes_raw()
        return cls(seed=seed, public_key=public)

    @classmethod
    def generate(cls) -> "KeyPair":
        private = Ed25519PrivateKey.generate()
        return cls.from_seed(private.private_bytes_raw())

    @property
    def public_b58(self) -> str:
        return base58_encode(self.public_key)

    def _private(self) -> Ed25519PrivateKey:
        return Ed25519PrivateKey.from_private_bytes(self.seed)


def decode_public_key(public_key_b58: str) -> bytes:
    """Base58 public key string -> 32 raw bytes, or MalformedKeyError."""
    try:
        raw = base58_decode(public_key_b58)
    except InvalidCharacterError as exc:
        raise MalformedKeyError(str(exc)) from None
    if len(raw) != 32:
        raise MalformedKeyError(f"public key decodes to {len(raw)} bytes, expected 32")
    return raw


def sign(body: bytes, key: KeyPair) -> str:
    """Hex Ed25519 signature over the SHA3-256 digest of the canonical body."""
    digest = hashlib.sha3_256(body).digest()
    return key._private().sign(digest).hex()


def verify(body: bytes, signature_hex: str, public_key_b58: str) -> bool:
    """True iff the signature is valid for the body's digest under the key.

    Malformed inputs raise (distinct from a clean cryptographic mismatch).
    """
    if not _SIGNATURE_RE.match(signature_hex):
        raise MalformedSignatureError("signature must be 128 lowercase hex chars")
    sig = bytes.fromhex(signature_hex)
    raw_key = decode_public_key(public_key_b58)
    digest = hashlib.sha3_256(body).digest()
    try:
        Ed25519PublicKey.from_public_bytes(raw_key).verify(sig, digest)
    except InvalidSignature:
        return False
    return True


def sign_transaction(tx: Mapping[str, Any], key: KeyPair) -> dict:
    """Return a copy of the wire object with its ``signature`` field attached."""
    body = dict(signed_body(tx))
    signature = sign(canonicalize(body), key)
    signed = dict(tx)
    signed["signature"] = signature
    return signed


def derive_id(signed_tx: Mapping[str, Any]) -> str:
    """Content-addressed transaction id, identical across ledger backends."""
    signature_hex = signed_tx.get("signature")
    if not isinstance(signature_hex, str) or not _SIGNATURE_RE.match(signature_hex):
        raise MalformedSignatureError("transaction carries no 128-lowercase-hex signature")
    return sha3_256_hex(canonicalize(signed_body(signed_tx)) + bytes.fromhex(signature_hex))

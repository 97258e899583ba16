"""Gateway configuration: a flat key=value file with environment overrides.

Recognized keys (see README for the full reference):

    listen_address    host:port                       default 127.0.0.1:8080
    admin_public_keys comma-separated base58 keys     required, >= 1
    ledger_backend    instant | batched               default instant
    ledger_dir        path                            default ./ledger-data
    block_size        int >= 1                        default 10
    block_timeout_ms  int >= 1                        default 250
    endorser_count    int >= 1                        default 2
    service_key_seed  64 hex chars (32 bytes)         default derived constant
    enabled_hooks     comma-separated hook names      default empty
    max_image_bytes   int                             default 1048576

``LEDGERGATE_LISTEN_ADDRESS`` and ``LEDGERGATE_LEDGER_DIR`` override the file.
"""

from __future__ import annotations

import hashlib
import os
from dataclasses import dataclass, field
from pathlib import Path

from .crypto import MalformedKeyError, decode_public_key

ENV_LISTEN_ADDRESS = "LEDGERGATE_LISTEN_ADDRESS"
ENV_LEDGER_DIR = "LEDGERGATE_LEDGER_DIR"

DEFAULT_SERVICE_SEED = hashlib.sha3_256(b"ledgergate/service-key").digest()


class ConfigError(ValueError):
    """Configuration file or values are invalid."""


@dataclass
class GatewayConfig:
    admin_public_keys: list[str]
    ledger_dir: Path = Path("./ledger-data")
    listen_address: str = "127.0.0.1:8080"
    ledger_backend: str = "instant"
    block_size: int = 10
    block_timeout_ms: int = 250
    endorser_count: int = 2
    service_key_seed: bytes = DEFAULT_SERVICE_SEED
    enabled_hooks: list[str] = field(default_factory=list)
    max_image_bytes: int = 1 << 20

    def __post_init__(self) -> None:
        if not self.admin_public_keys:
            raise ConfigError("admin_public_keys must list at least one key")
        for key in self.admin_public_keys:
            try:
                decode_public_key(key)
            except MalformedKeyError as exc:
                raise ConfigError(f"admin_public_keys: {exc}") from None
        if self.ledger_backend not in ("instant", "batched"):
            raise ConfigError(f"unknown ledger_backend {self.ledger_backend!r}")
        if self.block_size < 1:
            raise ConfigError("block_size must be >= 1")
        if self.block_timeout_ms < 1:
            raise ConfigError("block_timeout_ms must be >= 1")
        if self.endorser_count < 1:
            raise ConfigError("endorser_count must be >= 1")
        if len(self.service_key_seed) != 32:
            raise ConfigError("service_key_seed must be 32 bytes (64 hex chars)")
        self.ledger_dir = Path(self.ledger_dir)

    @property
    def endorser_seeds(self) -> list[bytes]:
        """Endorser identities derived deterministically from the service seed."""
        return [
            hashlib.sha3_256(self.service_key_seed + b"/endorser/%d" % i).digest()
            for i in range(self.endorser_count)
        ]

    def host_port(self) -> tuple[str, int]:
        host, _, port = self.listen_address.rpartition(":")
        if not host or not port.isdigit():
            raise ConfigError(f"listen_address must be host:port, got {self.listen_address!r}")
        return host, int(port)


def _parse_kv(text: str, source: str) -> dict[str, str]:
    values: dict[str, str] = {}
    for lineno, raw_line in enumerate(text.splitlines(), 1):
        line = raw_line.strip()
        if not line or line.startswith("#"):
            continue
        if "=" not in line:
            raise ConfigError(f"{source}:{lineno}: expected key = value")
        key, _, value = line.partition("=")
        values[key.strip()] = value.strip()
    return values


def load_config(path: str | Path | None = None, overrides: dict | None = None) -> GatewayConfig:
    """Read the key=value file, apply env and explicit overrides, validate."""
    values: dict[str, str] = {}
    if path is not None:
        source = Path(path)
        if not source.exists():
            raise ConfigError(f"config file not found: {source}")
        values = _parse_kv(source.read_text("utf-8"), str(source))
    if os.environ.get(ENV_LISTEN_ADDRESS):
        values["listen_address"] = os.environ[ENV_LISTEN_ADDRESS]
    if os.environ.get(ENV_LEDGER_DIR):
        values["ledger_dir"] = os.environ[ENV_LEDGER_DIR]
    if overrides:
        values.update({k: v for k, v in overrides.items() if v is not None})

    kwargs: dict = {}
    if "listen_address" in values:
        kwargs["listen_address"] = values["listen_address"]
    if "admin_public_keys" in values:
        keys = values["admin_public_keys"]
        kwargs["admin_public_keys"] = (
            keys if isinstance(keys, list) else [k.strip() for k in keys.split(",") if k.strip()]
        )
    else:
        raise ConfigError("admin_public_keys is required")
    if "ledger_backend" in values:
        kwargs["ledger_backend"] = values["ledger_backend"]
    if "ledger_dir" in values:
        kwargs["ledger_dir"] = Path(values["ledger_dir"])
    for int_key in ("block_size", "block_timeout_ms", "endorser_count", "max_image_bytes"):
        if int_key in values:
            try:
                kwargs[int_key] = int(values[int_key])
            except (TypeError, ValueError):
                raise ConfigError(f"{int_key} must be an integer") from None
    if "service_key_seed" in values:
        seed = values["service_key_seed"]
        if isinstance(seed, bytes):
            kwargs["service_key_seed"] = seed
        else:
            try:
                kwargs["service_key_seed"] = bytes.fromhex(seed)
            except ValueError:
                raise ConfigError("service_key_seed must be hex") from None
    if "enabled_hooks" in values:
        hooks = values["enabled_hooks"]
        kwargs["enabled_hooks"] = (
            hooks if isinstance(hooks, list) else [h.strip() for h in hooks.split(",") if h.strip()]
        )
    return GatewayConfig(**kwargs)

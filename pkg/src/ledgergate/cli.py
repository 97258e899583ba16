"""Top-level CLI: `ledgergate serve`, `ledgergate keygen`, plus the bench
subcommands."""

from __future__ import annotations

import json
import logging
import sys

import click

from . import gateway
from .bench.cli import bench
from .config import ConfigError, load_config
from .crypto import KeyPair
from .ledger import CorruptLedgerError


@click.group()
def main() -> None:
    """Schema-enforcing transaction gateway over pluggable ledger backends."""


@main.command()
@click.option("--config", "config_path", type=click.Path(dir_okay=False), default=None,
              help="key = value configuration file.")
@click.option("--listen", default=None, help="host:port (overrides the config file).")
@click.option("--ledger-dir", default=None, help="Ledger directory (overrides the config file).")
@click.option("--backend", type=click.Choice(["instant", "batched"]), default=None)
@click.option("--admin-key", "admin_keys", multiple=True,
              help="Base58 admin public key; repeatable (overrides the config file).")
@click.option("--hook", "hooks", multiple=True, help="Enable a named contract hook; repeatable.")
def serve(config_path, listen, ledger_dir, backend, admin_keys, hooks):
    """Run the gateway HTTP service."""
    logging.basicConfig(level=logging.INFO, format="%(message)s", stream=sys.stdout)
    overrides = {
        "listen_address": listen,
        "ledger_dir": ledger_dir,
        "ledger_backend": backend,
        "admin_public_keys": list(admin_keys) or None,
        "enabled_hooks": list(hooks) or None,
    }
    try:
        config = load_config(config_path, overrides)
    except ConfigError as exc:
        raise click.ClickException(str(exc)) from None
    try:
        gateway.serve(config)
    except (gateway.BindFailureError, CorruptLedgerError) as exc:
        raise click.ClickException(str(exc)) from None


@main.command()
@click.option("--seed", "seed_hex", default=None,
              help="64 hex chars; derive the keypair from this seed instead of generating one.")
def keygen(seed_hex):
    """Generate (or derive) an Ed25519 keypair for admins, users, or services.

    Keep the seed private; only the base58 public key goes into configuration
    files, user records, and context permissions."""
    if seed_hex is not None:
        try:
            seed = bytes.fromhex(seed_hex)
        except ValueError:
            raise click.ClickException("--seed must be hex") from None
        if len(seed) != 32:
            raise click.ClickException("--seed must be 64 hex chars (32 bytes)")
        key = KeyPair.from_seed(seed)
    else:
        key = KeyPair.generate()
    click.echo(json.dumps({"seed_hex": key.seed.hex(), "public_key_b58": key.public_b58}, indent=2))


main.add_command(bench)


if __name__ == "__main__":
    main()

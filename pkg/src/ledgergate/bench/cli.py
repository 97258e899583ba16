"""Benchmark CLI: `bench run`, `bench seed`, `bench kernels`."""

from __future__ import annotations

import json

import click
import httpx

from ..config import DEFAULT_SERVICE_SEED
from ..crypto import KeyPair
from . import runner
from .fixture import SeedingFailureError, TargetUnreachableError, seed_fixture
from .kernels import bench_kernels, format_rows


@click.group()
def bench() -> None:
    """Latency benchmark harness for the gateway and ledger backends."""


@bench.command("run")
@click.option("--rounds", default=10, show_default=True, help="Rounds per operation.")
@click.option("--config", "configs", default=",".join(runner.ALL_CONFIGURATIONS), show_default=True,
              help="Comma-separated configurations to run.")
@click.option("--targets", default="all", show_default=True,
              help="Comma-separated operation keys A..Q, or 'all'.")
@click.option("--out", "out_path", type=click.Path(dir_okay=False), default=None,
              help="Write the report as CSV.")
@click.option("--seed", default=7, show_default=True, help="Deterministic payload seed.")
@click.option("--concurrency", default=1, show_default=True)
@click.option("--gateway", "gateway_url", default=None,
              help="Benchmark an external gateway instead of self-hosted ones (needs a clean ledger).")
@click.option("--inject-delay-ms", default=0.0, show_default=True,
              help="Artificial per-operation adapter delay, for calibration.")
def run_command(rounds, configs, targets, out_path, seed, concurrency, gateway_url, inject_delay_ms):
    """Measure per-endpoint latency and gateway overhead."""
    target_keys = runner.OPERATION_KEYS if targets == "all" else tuple(
        t.strip().upper() for t in targets.split(",") if t.strip()
    )
    try:
        plan = runner.BenchPlan(
            rounds=rounds,
            concurrency=concurrency,
            targets=target_keys,
            configurations=tuple(c.strip() for c in configs.split(",") if c.strip()),
            seed=seed,
        )
    except ValueError as exc:
        raise click.ClickException(str(exc)) from None
    try:
        report = runner.run(plan, inject_delay_ms=inject_delay_ms, gateway_url=gateway_url)
    except (SeedingFailureError, TargetUnreachableError) as exc:
        raise click.ClickException(str(exc)) from None
    click.echo(report.table())
    if out_path:
        report.write_csv(out_path)
        click.echo(f"report written to {out_path}")


@bench.command("seed")
@click.option("--gateway", "gateway_url", required=True, help="Gateway base URL.")
@click.option("--service-key", default=None,
              help="Base58 service public key to register; defaults to the built-in service identity.")
def seed_command(gateway_url, service_key):
    """Seed the inbound-release fixture through the HTTP API."""
    service_b58 = service_key or KeyPair.from_seed(DEFAULT_SERVICE_SEED).public_b58
    client = httpx.Client(base_url=gateway_url, timeout=60.0)
    try:
        manifest = seed_fixture(client, service_b58)
    except (SeedingFailureError, TargetUnreachableError) as exc:
        raise click.ClickException(str(exc)) from None
    finally:
        client.close()
    click.echo(json.dumps(manifest, indent=2))


@bench.command("kernels")
@click.option("--iterations", default=20000, show_default=True)
def kernels_command(iterations):
    """Compare the compiled serialization kernels against the pure fallback."""
    click.echo(format_rows(bench_kernels(iterations)))


if __name__ == "__main__":
    bench()

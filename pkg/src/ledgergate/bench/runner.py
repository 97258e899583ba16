"""Benchmark runner.

Measures per-operation round-trip latency over a configurable number of
sequential rounds against four setups: the gateway in front of either backend,
and each backend driven directly through the adapter API (only ledger read and
write there; every gateway operation reduces to those two). Reports min/avg/max
per operation, estimated write throughput (1000/avg), and the gateway overhead
percentage where the matching direct configuration also ran.
"""

from __future__ import annotations

import csv
import random
import shutil
import tempfile
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from pathlib import Path
from time import perf_counter
from typing import Callable

import httpx

from ..config import GatewayConfig
from ..crypto import KeyPair, sign_transaction
from ..gateway import EmbeddedGateway
from ..ledger import BatchedLedger, InstantLedger
from ..validation import IndexEntries
from . import fixture
from .fixture import TargetUnreachableError, bench_write_tx, seed_fixture

GATEWAY_CONFIGURATIONS = ("gw-instant", "gw-batched")
DIRECT_CONFIGURATIONS = ("direct-instant", "direct-batched")
ALL_CONFIGURATIONS = GATEWAY_CONFIGURATIONS + DIRECT_CONFIGURATIONS

DIRECT_WRITE_KEY = "W"
DIRECT_READ_KEY = "R"


@dataclass(frozen=True)
class OpSpec:
    key: str
    method: str
    endpoint: str
    resolve: Callable[[dict], tuple[str, dict | None]] | None = None

    @property
    def is_write(self) -> bool:
        return self.method == "PUT"


OPERATIONS: dict[str, OpSpec] = {
    spec.key: spec
    for spec in [
        OpSpec("A", "PUT", "/transaction"),
        OpSpec("B", "GET", "/users/{user_id}", lambda m: (f"/users/{m['users']['qp1']}", None)),
        OpSpec("C", "GET", "/state/users/{user_id}", lambda m: (f"/state/users/{m['users']['qp1']}", None)),
        OpSpec("D", "GET", "/users", lambda m: ("/users", None)),
        OpSpec("E", "GET", "/state/users", lambda m: ("/state/users", None)),
        OpSpec("F", "GET", "/contexts/{context_id}", lambda m: (f"/contexts/{m['contexts']['orders']}", None)),
        OpSpec("G", "GET", "/state/contexts/{context_id}",
               lambda m: (f"/state/contexts/{m['contexts']['orders']}", None)),
        OpSpec("H", "GET", "/contexts", lambda m: ("/contexts", None)),
        OpSpec("I", "GET", "/state/contexts", lambda m: ("/state/contexts", None)),
        OpSpec("J", "GET", "/transactions/{transaction_id}",
               lambda m: (f"/transactions/{m['data']['order']}", None)),
        OpSpec("K", "GET", "/transactions?asset_id={asset_id}",
               lambda m: ("/transactions", {"asset_id": m["data"]["order"]})),
        OpSpec("L", "GET", "/state/transactions?asset_id={asset_id}",
               lambda m: ("/state/transactions", {"asset_id": m["data"]["order"]})),
        OpSpec("M", "GET", "/transactions?context_id={context_id}",
               lambda m: ("/transactions", {"context_id": m["contexts"]["quality_checks"]})),
        OpSpec("N", "GET", "/state/transactions?context_id={context_id}",
               lambda m: ("/state/transactions", {"context_id": m["contexts"]["quality_checks"]})),
        OpSpec("O", "GET", "/transactions?parent_id={parent_id}",
               lambda m: ("/transactions", {"parent_id": m["data"]["order_line_a"]})),
        OpSpec("P", "GET", "/state/transactions?parent_id={parent_id}",
               lambda m: ("/state/transactions", {"parent_id": m["data"]["order_line_a"]})),
        OpSpec("Q", "GET", "/state/transactions/search?text={text}",
               lambda m: ("/state/transactions/search", {"text": m["search_text"]})),
    ]
}

OPERATION_KEYS = tuple(OPERATIONS)


@dataclass
class BenchPlan:
    rounds: int = 10
    concurrency: int = 1
    targets: tuple[str, ...] = OPERATION_KEYS
    configurations: tuple[str, ...] = ALL_CONFIGURATIONS
    seed: int = 7

    def __post_init__(self) -> None:
        if self.rounds < 1:
            raise ValueError("rounds must be >= 1")
        if self.concurrency < 1:
            raise ValueError("concurrency must be >= 1")
        self.targets = tuple(self.targets)
        self.configurations = tuple(self.configurations)
        unknown = [t for t in self.targets if t not in OPERATIONS]
        if unknown:
            raise ValueError(f"unknown operation keys: {unknown}")
        bad = [c for c in self.configurations if c not in ALL_CONFIGURATIONS]
        if bad:
            raise ValueError(f"unknown configurations: {bad}")


@dataclass
class OpStats:
    operation_key: str
    endpoint: str
    configuration: str
    min_ms: float
    avg_ms: float
    max_ms: float
    overhead_pct: float | None = None

    @property
    def tps(self) -> float | None:
        """Estimated throughput for write operations, derived from latency."""
        if self.operation_key in (  # writes only
            "A",
            DIRECT_WRITE_KEY,
        ) and self.avg_ms > 0:
            return 1000.0 / self.avg_ms
        return None


@dataclass
class BenchReport:
    rows: list[OpStats] = field(default_factory=list)

    def write_csv(self, path: str | Path) -> None:
        with open(path, "w", newline="") as handle:
            writer = csv.writer(handle)
            writer.writerow(
                ["operation_key", "endpoint", "configuration", "min_ms", "avg_ms", "max_ms", "overhead_pct"]
            )
            for row in self.rows:
                writer.writerow(
                    [
                        row.operation_key,
                        row.endpoint,
                        row.configuration,
                        f"{row.min_ms:.3f}",
                        f"{row.avg_ms:.3f}",
                        f"{row.max_ms:.3f}",
                        "" if row.overhead_pct is None else f"{row.overhead_pct:.1f}",
                    ]
                )

    def table(self) -> str:
        header = f"{'op':<3} {'endpoint':<44} {'configuration':<16} {'min ms':>9} {'avg ms':>9} {'max ms':>9} {'tps':>8} {'overhead':>9}"
        lines = [header, "-" * len(header)]
        for row in self.rows:
            tps = f"{row.tps:.1f}" if row.tps is not None else "-"
            overhead = f"{row.overhead_pct:.1f}%" if row.overhead_pct is not None else "-"
            lines.append(
                f"{row.operation_key:<3} {row.endpoint:<44.44} {row.configuration:<16}"
                f" {row.min_ms:>9.3f} {row.avg_ms:>9.3f} {row.max_ms:>9.3f} {tps:>8} {overhead:>9}"
            )
        return "\n".join(lines)


def overhead_pct(gateway_avg_ms: float, direct_avg_ms: float) -> float:
    """Gateway overhead relative to the direct ledger path, in percent."""
    return (gateway_avg_ms - direct_avg_ms) / direct_avg_ms * 100.0


def _stats(key: str, endpoint: str, configuration: str, samples: list[float]) -> OpStats:
    return OpStats(
        operation_key=key,
        endpoint=endpoint,
        configuration=configuration,
        min_ms=min(samples),
        avg_ms=sum(samples) / len(samples),
        max_ms=max(samples),
    )


def _collect(plan: BenchPlan, attempt: Callable[[int], None], warmup: Callable[[], None] | None = None) -> list[float]:
    if warmup is not None:
        warmup()  # untimed: first-touch costs stay out of the statistics

    def timed(i: int) -> float:
        started = perf_counter()
        attempt(i)
        return (perf_counter() - started) * 1000.0

    if plan.concurrency == 1:
        return [timed(i) for i in range(plan.rounds)]
    with ThreadPoolExecutor(max_workers=plan.concurrency) as pool:
        return list(pool.map(timed, range(plan.rounds)))


def _measure_gateway(
    spec: OpSpec, client: httpx.Client, manifest: dict, rng: random.Random, plan: BenchPlan
) -> list[float]:
    if spec.is_write:
        payloads = [bench_write_tx(manifest, rng) for _ in range(plan.rounds + 1)]

        def attempt(i: int) -> None:
            response = client.put("/transaction", json=payloads[i])
            if response.status_code != 200:
                raise TargetUnreachableError(f"op {spec.key}: PUT -> {response.status_code}: {response.text}")

        return _collect(plan, lambda i: attempt(i + 1), warmup=lambda: attempt(0))

    path, params = spec.resolve(manifest)

    def attempt(i: int) -> None:
        response = client.get(path, params=params)
        if response.status_code != 200:
            raise TargetUnreachableError(f"op {spec.key}: GET {path} -> {response.status_code}")

    return _collect(plan, attempt, warmup=lambda: attempt(0))


def _direct_write_tx(rng: random.Random, key: KeyPair) -> dict:
    return sign_transaction(
        {
            "context_id": f"{rng.getrandbits(256):064x}",
            "user_id": f"{rng.getrandbits(256):064x}",
            "data": {"payload": f"{rng.getrandbits(128):032x}"},
            "public_key": key.public_b58,
        },
        key,
    )


def _build_adapter(backend: str, directory: Path, delay_ms: float, block_timeout_ms: int | None):
    if backend == "batched":
        kwargs = {"block_timeout_ms": block_timeout_ms} if block_timeout_ms else {}
        return BatchedLedger(directory, artificial_delay_ms=delay_ms, **kwargs)
    return InstantLedger(directory, artificial_delay_ms=delay_ms)


def _gateway_rows(
    configuration: str,
    plan: BenchPlan,
    inject_delay_ms: float,
    gateway_url: str | None,
    base_dir: Path,
    block_timeout_ms: int | None,
) -> list[OpStats]:
    backend = configuration.removeprefix("gw-")
    rng = random.Random(plan.seed)
    embedded = None
    if gateway_url is None:
        config = GatewayConfig(
            admin_public_keys=[fixture.admin_keypair().public_b58],
            ledger_dir=base_dir / configuration,
            ledger_backend=backend,
            enabled_hooks=["inbound_release"],
            **({"block_timeout_ms": block_timeout_ms} if block_timeout_ms else {}),
        )
        adapter = None
        if inject_delay_ms:
            if backend == "batched":
                adapter = BatchedLedger(
                    config.ledger_dir,
                    block_size=config.block_size,
                    block_timeout_ms=config.block_timeout_ms,
                    endorser_seeds=config.endorser_seeds,
                    artificial_delay_ms=inject_delay_ms,
                )
            else:
                adapter = InstantLedger(config.ledger_dir, artificial_delay_ms=inject_delay_ms)
        embedded = EmbeddedGateway(config, adapter=adapter)
        base_url = embedded.start()
        service_key = KeyPair.from_seed(config.service_key_seed).public_b58
    else:
        base_url = gateway_url
        service_key = KeyPair.from_seed(GatewayConfig(
            admin_public_keys=[fixture.admin_keypair().public_b58]
        ).service_key_seed).public_b58

    client = httpx.Client(base_url=base_url, timeout=60.0)
    try:
        manifest = fixture.recover_manifest(client) if gateway_url else None
        if manifest is None:
            manifest = seed_fixture(client, service_key)
        return [
            _stats(key, OPERATIONS[key].endpoint, configuration,
                   _measure_gateway(OPERATIONS[key], client, manifest, rng, plan))
            for key in plan.targets
        ]
    finally:
        client.close()
        if embedded is not None:
            embedded.stop()


def _direct_rows(
    configuration: str, plan: BenchPlan, inject_delay_ms: float, base_dir: Path,
    block_timeout_ms: int | None,
) -> list[OpStats]:
    backend = configuration.removeprefix("direct-")
    rng = random.Random(plan.seed)
    signer = KeyPair.from_seed(fixture.QP1_SEED)
    adapter = _build_adapter(backend, base_dir / configuration, inject_delay_ms, block_timeout_ms)
    try:
        seeded = adapter.commit(_direct_write_tx(rng, signer), IndexEntries())
        payloads = [_direct_write_tx(rng, signer) for _ in range(plan.rounds + 1)]

        write_samples = _collect(
            plan,
            lambda i: adapter.commit(payloads[i + 1], IndexEntries()),
            warmup=lambda: adapter.commit(payloads[0], IndexEntries()),
        )
        read_samples = _collect(
            plan, lambda i: adapter.get_by_id(seeded.id), warmup=lambda: adapter.get_by_id(seeded.id)
        )
        return [
            _stats(DIRECT_WRITE_KEY, "ledger write", configuration, write_samples),
            _stats(DIRECT_READ_KEY, "ledger read", configuration, read_samples),
        ]
    finally:
        adapter.close()


def run(
    plan: BenchPlan,
    inject_delay_ms: float = 0.0,
    gateway_url: str | None = None,
    work_dir: str | Path | None = None,
    block_timeout_ms: int | None = None,
) -> BenchReport:
    """Execute the plan and compute overheads for configuration pairs."""
    base_dir = Path(work_dir) if work_dir else Path(tempfile.mkdtemp(prefix="ledgergate-bench-"))
    cleanup = work_dir is None
    rows: list[OpStats] = []
    try:
        for configuration in plan.configurations:
            if configuration in GATEWAY_CONFIGURATIONS:
                rows.extend(
                    _gateway_rows(configuration, plan, inject_delay_ms, gateway_url, base_dir, block_timeout_ms)
                )
            else:
                rows.extend(_direct_rows(configuration, plan, inject_delay_ms, base_dir, block_timeout_ms))
    finally:
        if cleanup:
            shutil.rmtree(base_dir, ignore_errors=True)

    direct_avg: dict[tuple[str, str], float] = {}
    for row in rows:
        if row.configuration in DIRECT_CONFIGURATIONS:
            family = row.configuration.removeprefix("direct-")
            kind = "write" if row.operation_key == DIRECT_WRITE_KEY else "read"
            direct_avg[(family, kind)] = row.avg_ms
    for row in rows:
        if row.configuration in GATEWAY_CONFIGURATIONS:
            family = row.configuration.removeprefix("gw-")
            kind = "write" if OPERATIONS[row.operation_key].is_write else "read"
            base = direct_avg.get((family, kind))
            if base is not None and base > 0:
                row.overhead_pct = overhead_pct(row.avg_ms, base)
    return BenchReport(rows=rows)

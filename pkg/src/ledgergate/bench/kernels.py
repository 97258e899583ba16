"""Micro-benchmark of the serialization kernels: compiled extension vs the
pure-Python fallback, over a representative transaction payload."""

from __future__ import annotations

import importlib
from time import perf_counter

_PAYLOAD = {
    "context_id": "ab" * 32,
    "user_id": "cd" * 32,
    "data": {
        "material_code": "MAT-00ffa3b2c1d0",
        "readings": [21.5, 22.0, 21.75, 1e-7, 333333333.33333329],
        "nested": {"unicode_key_€": "värde", "ok": True, "count": 12},
    },
    "metadata": {"status": "pass", "checked_at": "2024-03-02T09:15:00Z"},
    "public_key": "6Pg5RCDyyrNdQpnVtFQDSoXAtUcVhw9DJvDBKdJmbzRh",
}

_B58_INPUT = bytes(range(1, 33))


def available_backends() -> dict[str, object]:
    backends = {"pure": importlib.import_module("ledgergate._kernels._pure")}
    try:
        backends["compiled"] = importlib.import_module("ledgergate._kernels._speedups")
    except ImportError:
        pass
    return backends


def bench_kernels(iterations: int = 20000) -> list[dict]:
    """Time canonical serialization and the base58 codec on each backend."""
    rows = []
    for name, module in available_backends().items():
        started = perf_counter()
        for _ in range(iterations):
            module.canonical_json(_PAYLOAD)
        canon_us = (perf_counter() - started) * 1e6 / iterations

        started = perf_counter()
        for _ in range(iterations):
            module.base58_decode(module.base58_encode(_B58_INPUT))
        b58_us = (perf_counter() - started) * 1e6 / iterations

        rows.append({"backend": name, "canonical_json_us": canon_us, "base58_roundtrip_us": b58_us})
    return rows


def format_rows(rows: list[dict]) -> str:
    lines = [f"{'backend':<10} {'canonical_json':>16} {'base58 round-trip':>19}"]
    for row in rows:
        lines.append(
            f"{row['backend']:<10} {row['canonical_json_us']:>13.2f} us {row['base58_roundtrip_us']:>16.2f} us"
        )
    by_name = {r["backend"]: r for r in rows}
    if "compiled" in by_name and "pure" in by_name:
        speedup = by_name["pure"]["canonical_json_us"] / by_name["compiled"]["canonical_json_us"]
        lines.append(f"compiled canonical_json speedup: {speedup:.2f}x")
    return "\n".join(lines)

"""Generate the signing-parity vectors shared with the browser console.

Writes fixtures/canonical_parity.jsonl, one JSON object per line:
    body                 signed payload (object)
    canonical_bytes_hex  canonical serialization of the body
    sha3_hex             SHA3-256 of the canonical bytes
    seed_hex             Ed25519 seed used to sign
    public_key_b58       the matching public key
    signature_hex        detached signature over the digest
    id_hex               content-addressed id of body+signature

Run from the frontend directory: python3 scripts/gen_parity_fixtures.py
"""

from __future__ import annotations

import hashlib
import json
import random
from pathlib import Path

from ledgergate.crypto import KeyPair, canonicalize, derive_id, sha3_256_hex, sign

VECTOR_COUNT = 50

_UNICODE_POOL = "abcXYZ0189_äöü€漢字🙂ÿ￿\U00010000"


def _random_string(rng: random.Random) -> str:
    return "".join(rng.choice(_UNICODE_POOL) for _ in range(rng.randrange(0, 10)))


def _random_number(rng: random.Random):
    return rng.choice(
        [
            rng.randrange(-(2**31), 2**31),
            rng.random(),
            rng.random() * 10 ** rng.randrange(-20, 22),
            rng.choice([0, -1, 1e21, 1e-7, 0.1, 56.77, 9007199254740992]),
        ]
    )


def _random_value(rng: random.Random, depth: int):
    choices = ["string", "number", "bool", "null"]
    if depth < 3:
        choices += ["array", "object"]
    kind = rng.choice(choices)
    if kind == "string":
        return _random_string(rng)
    if kind == "number":
        return _random_number(rng)
    if kind == "bool":
        return rng.random() < 0.5
    if kind == "null":
        return None
    if kind == "array":
        return [_random_value(rng, depth + 1) for _ in range(rng.randrange(0, 4))]
    return {_random_string(rng) + str(i): _random_value(rng, depth + 1) for i in range(rng.randrange(0, 4))}


def _random_body(rng: random.Random) -> dict:
    body = {_random_string(rng) + str(i): _random_value(rng, 1) for i in range(rng.randrange(1, 5))}
    # keep the commit-assigned field names out of signed payloads
    for reserved in ("id", "signature", "timestamp"):
        body.pop(reserved, None)
    return body


def main() -> None:
    rng = random.Random(2024)
    out_path = Path(__file__).resolve().parent.parent / "fixtures" / "canonical_parity.jsonl"
    out_path.parent.mkdir(parents=True, exist_ok=True)
    lines = []
    for i in range(VECTOR_COUNT):
        body = _random_body(rng)
        seed = hashlib.sha3_256(b"ledgergate/parity/%d" % i).digest()
        key = KeyPair.from_seed(seed)
        canonical = canonicalize(body)
        signature = sign(canonical, key)
        lines.append(
            json.dumps(
                {
                    "body": body,
                    "canonical_bytes_hex": canonical.hex(),
                    "sha3_hex": sha3_256_hex(canonical),
                    "seed_hex": seed.hex(),
                    "public_key_b58": key.public_b58,
                    "signature_hex": signature,
                    "id_hex": derive_id({**body, "signature": signature}),
                },
                ensure_ascii=True,
            )
        )
    out_path.write_text("\n".join(lines) + "\n", encoding="utf-8")
    print(f"wrote {len(lines)} vectors to {out_path}")


if __name__ == "__main__":
    main()

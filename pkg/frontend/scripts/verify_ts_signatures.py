"""Verify console-produced signatures under the gateway's crypto module.

Reads a JSON-lines file of {body, public_key_b58, signature_hex} and exits
non-zero on the first signature that does not verify. The console test suite
invokes this to close the signing-parity loop in the other direction.
"""

from __future__ import annotations

import json
import sys

from ledgergate.crypto import canonicalize, verify


def main(path: str) -> int:
    checked = 0
    with open(path, encoding="utf-8") as handle:
        for lineno, line in enumerate(handle, 1):
            if not line.strip():
                continue
            row = json.loads(line)
            body = canonicalize(row["body"])
            if not verify(body, row["signature_hex"], row["public_key_b58"]):
                print(f"line {lineno}: signature does not verify", file=sys.stderr)
                return 1
            checked += 1
    print(f"verified {checked} console signatures")
    return 0


if __name__ == "__main__":
    sys.exit(main(sys.argv[1]))

"""Pure-Python serialization kernels.

Hot byte-level primitives used on every signing, id-derivation and
chain-verification path: canonical JSON rendering (JCS semantics: keys sorted
by UTF-16 code units, minimal escaping, shortest round-trip numbers in
ECMAScript notation) and the Bitcoin-alphabet base58 codec.

A Cython twin of this module exists; see ``ledgergate._kernels.__init__`` for
how one of the two is selected at import time.
"""

from __future__ import annotations

import math
from typing import Any

from .errors import InvalidCharacterError, NonCanonicalizableError

_B58_ALPHABET = "123456789ABCDEFGHJKLMNPQRSTUVWXYZabcdefghijkmnopqrstuvwxyz"
_B58_INDEX = {ch: i for i, ch in enumerate(_B58_ALPHABET)}

# Two-character escapes mandated for canonical strings; all other control
# characters use lowercase \u00xx.
_SHORT_ESCAPES = {
    0x08: "\\b",
    0x09: "\\t",
    0x0A: "\\n",
    0x0C: "\\f",
    0x0D: "\\r",
    0x22: '\\"',
    0x5C: "\\\\",
}

_MAX_SAFE_INT = 2**53


def format_number(value: float) -> str:
    """Render a float exactly as ECMAScript ``Number::toString`` would."""
    if math.isnan(value) or math.isinf(value):
        raise NonCanonicalizableError(f"non-finite number: {value!r}")
    if value == 0.0:
        return "0"  # covers -0.0
    sign = "-" if value < 0 else ""
    digits, point = _decompose(repr(abs(value)))
    return sign + _assemble(digits, point)


def format_int(value: int) -> str:
    """Render an int; values beyond 2**53 degrade to double precision."""
    if -_MAX_SAFE_INT <= value <= _MAX_SAFE_INT:
        return str(value)
    return format_number(float(value))


def _decompose(text: str) -> tuple[str, int]:
    # repr() of a positive float -> (digits, point) with value = 0.digits * 10**point
    mantissa, _, exponent = text.partition("e")
    exp = int(exponent) if exponent else 0
    int_part, _, frac_part = mantissa.partition(".")
    digits = int_part + frac_part
    point = len(int_part) + exp
    stripped = digits.lstrip("0")
    point -= len(digits) - len(stripped)
    return stripped.rstrip("0"), point


def _assemble(digits: str, point: int) -> str:
    k = len(digits)
    if k <= point <= 21:
        return digits + "0" * (point - k)
    if 0 < point <= 21:
        return digits[:point] + "." + digits[point:]
    if -6 < point <= 0:
        return "0." + "0" * (-point) + digits
    exp = point - 1
    mantissa = digits if k == 1 else digits[0] + "." + digits[1:]
    return f"{mantissa}e{'+' if exp >= 0 else '-'}{abs(exp)}"


def _escape_string(text: str, out: list) -> None:
    out.append('"')
    for ch in text:
        code = ord(ch)
        esc = _SHORT_ESCAPES.get(code)
        if esc is not None:
            out.append(esc)
        elif code < 0x20:
            out.append(f"\\u{code:04x}")
        else:
            out.append(ch)
    out.append('"')


def _sort_key(key: str) -> bytes:
    # Lexicographic order of UTF-16BE bytes == numeric order of UTF-16 code units.
    return key.encode("utf-16-be")


def _write(value: Any, out: list) -> None:
    if value is None:
        out.append("null")
    elif value is True:
        out.append("true")
    elif value is False:
        out.append("false")
    elif isinstance(value, str):
        _escape_string(value, out)
    elif isinstance(value, int):
        out.append(format_int(value))
    elif isinstance(value, float):
        out.append(format_number(value))
    elif isinstance(value, dict):
        for key in value:
            if not isinstance(key, str):
                raise NonCanonicalizableError(f"object key is not a string: {key!r}")
        out.append("{")
        first = True
        for key in sorted(value.keys(), key=_sort_key):
            if not first:
                out.append(",")
            first = False
            _escape_string(key, out)
            out.append(":")
            _write(value[key], out)
        out.append("}")
    elif isinstance(value, (list, tuple)):
        out.append("[")
        for i, item in enumerate(value):
            if i:
                out.append(",")
            _write(item, out)
        out.append("]")
    else:
        raise NonCanonicalizableError(f"unsupported type: {type(value).__name__}")


def canonical_json(value: Any) -> bytes:
    """Serialize a JSON value tree to its unique canonical UTF-8 byte form."""
    out: list = []
    _write(value, out)
    try:
        return "".join(out).encode("utf-8")
    except UnicodeEncodeError as exc:
        raise NonCanonicalizableError(f"unencodable text: {exc}") from None


def base58_encode(raw: bytes) -> str:
    if not raw:
        return ""
    zeros = 0
    for byte in raw:
        if byte:
            break
        zeros += 1
    num = int.from_bytes(raw, "big")
    chars = []
    while num:
        num, rem = divmod(num, 58)
        chars.append(_B58_ALPHABET[rem])
    chars.reverse()
    return "1" * zeros + "".join(chars)


def base58_decode(text: str) -> bytes:
    num = 0
    for ch in text:
        idx = _B58_INDEX.get(ch)
        if idx is None:
            raise InvalidCharacterError(f"not a base58 character: {ch!r}")
        num = num * 58 + idx
    zeros = 0
    for ch in text:
        if ch != "1":
            break
        zeros += 1
    body = num.to_bytes((num.bit_length() + 7) // 8, "big") if num else b""
    return b"\x00" * zeros + body

"""Minimal reference Ed25519 (sign/derive only), independent of the
`cryptography` package. Textbook affine-coordinate implementation; slow but
adequate as a test oracle."""

from __future__ import annotations

import hashlib

P = 2**255 - 19
Q = 2**252 + 27742317777372353535851937790883648493


def _inv(x: int) -> int:
    return pow(x, P - 2, P)


D = -121665 * _inv(121666) % P
I = pow(2, (P - 1) // 4, P)


def _xrecover(y: int) -> int:
    xx = (y * y - 1) * _inv(D * y * y + 1)
    x = pow(xx, (P + 3) // 8, P)
    if (x * x - xx) % P != 0:
        x = (x * I) % P
    if x % 2 != 0:
        x = P - x
    return x


_BY = 4 * _inv(5) % P
_BX = _xrecover(_BY)
_B = (_BX, _BY)


def _add(p1, p2):
    x1, y1 = p1
    x2, y2 = p2
    x3 = (x1 * y2 + x2 * y1) * _inv(1 + D * x1 * x2 * y1 * y2)
    y3 = (y1 * y2 + x1 * x2) * _inv(1 - D * x1 * x2 * y1 * y2)
    return (x3 % P, y3 % P)


def _scalarmult(point, e: int):
    result = (0, 1)
    addend = point
    while e:
        if e & 1:
            result = _add(result, addend)
        addend = _add(addend, addend)
        e >>= 1
    return result


def _encode_point(point) -> bytes:
    x, y = point
    return (y | ((x & 1) << 255)).to_bytes(32, "little")


def _clamp(h: bytes) -> int:
    a = int.from_bytes(h[:32], "little")
    a &= (1 << 254) - 8
    a |= 1 << 254
    return a


def public_key(seed: bytes) -> bytes:
    h = hashlib.sha512(seed).digest()
    return _encode_point(_scalarmult(_B, _clamp(h)))


def sign(message: bytes, seed: bytes) -> bytes:
    h = hashlib.sha512(seed).digest()
    a = _clamp(h)
    prefix = h[32:]
    r = int.from_bytes(hashlib.sha512(prefix + message).digest(), "little")
    big_r = _encode_point(_scalarmult(_B, r))
    pk = _encode_point(_scalarmult(_B, a))
    k = int.from_bytes(hashlib.sha512(big_r + pk + message).digest(), "little")
    s = (r + k * a) % Q
    return big_r + s.to_bytes(32, "little")

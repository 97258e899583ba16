# cython: language_level=3, boundscheck=False, wraparound=False
"""Compiled serialization kernels.

Behavioural twin of ``_pure``; both must produce byte-identical output.
Canonical JSON dominates signing, id derivation and whole-ledger
verification, which is why this path is compiled.
"""

import math

from .errors import InvalidCharacterError, NonCanonicalizableError

cdef str _B58_ALPHABET = "123456789ABCDEFGHJKLMNPQRSTUVWXYZabcdefghijkmnopqrstuvwxyz"
cdef dict _B58_INDEX = {ch: i for i, ch in enumerate(_B58_ALPHABET)}

cdef dict _SHORT_ESCAPES = {
    0x08: "\\b",
    0x09: "\\t",
    0x0A: "\\n",
    0x0C: "\\f",
    0x0D: "\\r",
    0x22: '\\"',
    0x5C: "\\\\",
}

cdef long long _MAX_SAFE_INT = 2 ** 53


cpdef str format_number(double value):
    """Render a float exactly as ECMAScript ``Number::toString`` would."""
    if math.isnan(value) or math.isinf(value):
        raise NonCanonicalizableError(f"non-finite number: {value!r}")
    if value == 0.0:
        return "0"
    cdef str sign = "-" if value < 0 else ""
    digits, point = _decompose(repr(abs(value)))
    return sign + _assemble(digits, point)


cpdef str format_int(object value):
    """Render an int; values beyond 2**53 degrade to double precision."""
    if -_MAX_SAFE_INT <= value <= _MAX_SAFE_INT:
        return str(value)
    return format_number(float(value))


cdef tuple _decompose(str text):
    # repr() of a positive float -> (digits, point) with value = 0.digits * 10**point
    mantissa, _, exponent = text.partition("e")
    cdef int exp = int(exponent) if exponent else 0
    int_part, _, frac_part = mantissa.partition(".")
    cdef str digits = int_part + frac_part
    cdef int point = len(int_part) + exp
    cdef str stripped = digits.lstrip("0")
    point -= len(digits) - len(stripped)
    return stripped.rstrip("0"), point


cdef str _assemble(str digits, int point):
    cdef int k = len(digits)
    cdef int exp
    if k <= point <= 21:
        return digits + "0" * (point - k)
    if 0 < point <= 21:
        return digits[:point] + "." + digits[point:]
    if -6 < point <= 0:
        return "0." + "0" * (-point) + digits
    exp = point - 1
    mantissa = digits if k == 1 else digits[0] + "." + digits[1:]
    return f"{mantissa}e{'+' if exp >= 0 else '-'}{abs(exp)}"


cdef void _escape_string(str text, list out):
    cdef Py_ssize_t i, n = len(text)
    cdef int code
    out.append('"')
    for i in range(n):
        code = ord(text[i])
        esc = _SHORT_ESCAPES.get(code)
        if esc is not None:
            out.append(esc)
        elif code < 0x20:
            out.append(f"\\u{code:04x}")
        else:
            out.append(text[i])
    out.append('"')


def _sort_key(str key):
    return key.encode("utf-16-be")


cdef void _write(object value, list out) except *:
    cdef Py_ssize_t i
    if value is None:
        out.append("null")
    elif value is True:
        out.append("true")
    elif value is False:
        out.append("false")
    elif isinstance(value, str):
        _escape_string(<str>value, out)
    elif isinstance(value, int):
        out.append(format_int(value))
    elif isinstance(value, float):
        out.append(format_number(<double>value))
    elif isinstance(value, dict):
        for key in (<dict>value):
            if not isinstance(key, str):
                raise NonCanonicalizableError(f"object key is not a string: {key!r}")
        out.append("{")
        first = True
        for key in sorted((<dict>value).keys(), key=_sort_key):
            if not first:
                out.append(",")
            first = False
            _escape_string(<str>key, out)
            out.append(":")
            _write((<dict>value)[key], out)
        out.append("}")
    elif isinstance(value, (list, tuple)):
        out.append("[")
        i = 0
        for item in value:
            if i:
                out.append(",")
            i += 1
            _write(item, out)
        out.append("]")
    else:
        raise NonCanonicalizableError(f"unsupported type: {type(value).__name__}")


cpdef bytes canonical_json(object value):
    """Serialize a JSON value tree to its unique canonical UTF-8 byte form."""
    cdef list out = []
    _write(value, out)
    try:
        return "".join(out).encode("utf-8")
    except UnicodeEncodeError as exc:
        raise NonCanonicalizableError(f"unencodable text: {exc}") from None


cpdef str base58_encode(bytes raw):
    if not raw:
        return ""
    cdef Py_ssize_t zeros = 0
    for byte in raw:
        if byte:
            break
        zeros += 1
    num = int.from_bytes(raw, "big")
    cdef list chars = []
    while num:
        num, rem = divmod(num, 58)
        chars.append(_B58_ALPHABET[rem])
    chars.reverse()
    return "1" * zeros + "".join(chars)


cpdef bytes base58_decode(str text):
    num = 0
    cdef Py_ssize_t i, n = len(text)
    for i in range(n):
        idx = _B58_INDEX.get(text[i])
        if idx is None:
            raise InvalidCharacterError(f"not a base58 character: {text[i]!r}")
        num = num * 58 + idx
    cdef Py_ssize_t zeros = 0
    for i in range(n):
        if text[i] != "1":
            break
        zeros += 1
    body = num.to_bytes((num.bit_length() + 7) // 8, "big") if num else b""
    return b"\x00" * zeros + body

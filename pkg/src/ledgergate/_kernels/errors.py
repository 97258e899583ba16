"""Exceptions shared by the compiled and pure serialization kernels."""


class NonCanonicalizableError(ValueError):
    """Value cannot be rendered in canonical JSON (non-finite number, bad type)."""


class InvalidCharacterError(ValueError):
    """Input contains a character outside the base58 alphabet."""

"""Canonical serialization, hashing, signatures, base58, id derivation."""

from __future__ import annotations

import json
import random
import struct
from pathlib import Path

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

import ed25519_ref
from ledgergate import crypto
from ledgergate._kernels import _pure

VECTORS = json.loads((Path(__file__).parent / "vectors" / "canonical_vectors.json").read_text())

# SHA3-256 of b"" and b"abc" per FIPS 202.
SHA3_EMPTY = "a7ffc6f8bf1ed76651c14756a061d662f580ff4de43b49fa82d80a4b80f8434a"
SHA3_ABC = "3a985da74fe225b2045c172d6bd390bd855f086e3e9d525b46bfe24511431532"


def _json_values(max_leaves=24):
    scalars = st.one_of(
        st.none(),
        st.booleans(),
        st.integers(min_value=-(2**53), max_value=2**53),
        st.floats(allow_nan=False, allow_infinity=False),
        st.text(max_size=12),
    )
    return st.recursive(
        scalars,
        lambda children: st.one_of(
            st.lists(children, max_size=4),
            st.dictionaries(st.text(max_size=8), children, max_size=4),
        ),
        max_leaves=max_leaves,
    )


class TestCanonicalize:
    def test_key_order_is_irrelevant(self):
        assert crypto.canonicalize({"b": 1, "a": 2}) == crypto.canonicalize({"a": 2, "b": 1})

    def test_empty_object(self):
        assert crypto.canonicalize({}) == b"{}"

    def test_number_vectors_from_engine_oracle(self):
        for vector in VECTORS["numbers"]:
            value = float(vector["src"])
            assert crypto.canonicalize(value).decode() == vector["text"], vector["src"]

    def test_random_double_bit_patterns(self):
        for vector in VECTORS["number_bits"]:
            (value,) = struct.unpack(">d", bytes.fromhex(vector["bits"]))
            assert crypto.canonicalize(value).decode() == vector["text"], vector["bits"]

    def test_document_vectors_from_independent_canonicalizer(self):
        for vector in VECTORS["documents"]:
            expected = bytes.fromhex(vector["canonical_hex"])
            assert crypto.canonicalize(vector["value"]) == expected

    def test_int_and_equal_float_serialize_identically(self):
        assert crypto.canonicalize(10) == crypto.canonicalize(10.0) == b"10"

    @pytest.mark.parametrize("bad", [float("nan"), float("inf"), float("-inf")])
    def test_non_finite_numbers_rejected(self, bad):
        with pytest.raises(crypto.NonCanonicalizableError):
            crypto.canonicalize({"x": bad})

    def test_non_string_keys_rejected(self):
        with pytest.raises(crypto.NonCanonicalizableError):
            crypto.canonicalize({1: "x"})

    def test_unsupported_types_rejected(self):
        with pytest.raises(crypto.NonCanonicalizableError):
            crypto.canonicalize({"x": {1, 2}})

    def test_lone_surrogate_rejected(self):
        with pytest.raises(crypto.NonCanonicalizableError):
            crypto.canonicalize("\ud800")

    @settings(max_examples=80)
    @given(_json_values())
    def test_permutation_invariance(self, value):
        def flipped(v):
            if isinstance(v, dict):
                return {k: flipped(v[k]) for k in reversed(list(v))}
            if isinstance(v, list):
                return [flipped(x) for x in v]
            return v

        assert crypto.canonicalize(value) == crypto.canonicalize(flipped(value))

    @settings(max_examples=80)
    @given(_json_values())
    def test_round_trip_stability(self, value):
        # parsing canonical output and re-canonicalizing is a fixed point
        first = crypto.canonicalize(value)
        assert crypto.canonicalize(json.loads(first)) == first


class TestKernelParity:
    speedups = pytest.importorskip("ledgergate._kernels._speedups")

    def test_document_vectors_match(self):
        for vector in VECTORS["documents"]:
            assert self.speedups.canonical_json(vector["value"]) == _pure.canonical_json(vector["value"])

    @settings(max_examples=120)
    @given(_json_values())
    def test_random_values_match(self, value):
        assert self.speedups.canonical_json(value) == _pure.canonical_json(value)

    @given(st.binary(max_size=64))
    def test_base58_matches(self, raw):
        assert self.speedups.base58_encode(raw) == _pure.base58_encode(raw)
        assert self.speedups.base58_decode(_pure.base58_encode(raw)) == raw


class TestSha3:
    def test_fips_vectors(self):
        assert crypto.sha3_256_hex(b"") == SHA3_EMPTY
        assert crypto.sha3_256_hex(b"abc") == SHA3_ABC

    def test_deterministic(self):
        rng = random.Random(11)
        for _ in range(50):
            data = rng.randbytes(rng.randrange(0, 200))
            assert crypto.sha3_256_hex(data) == crypto.sha3_256_hex(data)


class TestBase58:
    def test_empty(self):
        assert crypto.base58_encode(b"") == ""
        assert crypto.base58_decode("") == b""

    def test_leading_zeroes_vector(self):
        assert crypto.base58_encode(bytes([0, 0, 1])) == "112"
        assert crypto.base58_decode("112") == bytes([0, 0, 1])

    @given(st.binary(max_size=80))
    def test_round_trip(self, raw):
        assert crypto.base58_decode(crypto.base58_encode(raw)) == raw

    def test_leading_zero_bytes_map_to_ones(self):
        for zeros in range(5):
            encoded = crypto.base58_encode(b"\x00" * zeros + b"\x07")
            assert encoded.startswith("1" * zeros)
            assert not encoded.startswith("1" * (zeros + 1))

    @pytest.mark.parametrize("bad", ["0", "O", "I", "l", "+", "abc!", "ab cd"])
    def test_invalid_characters(self, bad):
        with pytest.raises(crypto.InvalidCharacterError):
            crypto.base58_decode(bad)


class TestSignatures:
    def test_sign_verify_round_trip(self):
        rng = random.Random(21)
        for _ in range(100):
            key = crypto.KeyPair.from_seed(rng.randbytes(32))
            body = crypto.canonicalize({"n": rng.random(), "s": rng.randbytes(8).hex()})
            signature = crypto.sign(body, key)
            assert crypto.verify(body, signature, key.public_b58)

    def test_wrong_key_fails_cleanly(self):
        key, other = crypto.KeyPair.from_seed(b"a" * 32), crypto.KeyPair.from_seed(b"b" * 32)
        body = crypto.canonicalize({"x": 1})
        assert crypto.verify(body, crypto.sign(body, key), other.public_b58) is False

    def test_body_bit_flip_detected(self):
        key = crypto.KeyPair.from_seed(b"c" * 32)
        body = crypto.canonicalize({"x": "payload"})
        signature = crypto.sign(body, key)
        for i in range(len(body)):
            flipped = bytearray(body)
            flipped[i] ^= 1
            assert crypto.verify(bytes(flipped), signature, key.public_b58) is False

    def test_signature_bit_flip_detected(self):
        key = crypto.KeyPair.from_seed(b"d" * 32)
        body = crypto.canonicalize({"x": 2})
        signature = bytes.fromhex(crypto.sign(body, key))
        for i in range(0, len(signature), 7):
            flipped = bytearray(signature)
            flipped[i] ^= 0x10
            assert crypto.verify(body, bytes(flipped).hex(), key.public_b58) is False

    def test_malformed_inputs_are_distinct_errors(self):
        key = crypto.KeyPair.from_seed(b"e" * 32)
        body = crypto.canonicalize({})
        good = crypto.sign(body, key)
        with pytest.raises(crypto.MalformedSignatureError):
            crypto.verify(body, good[:-2], key.public_b58)
        with pytest.raises(crypto.MalformedSignatureError):
            crypto.verify(body, "zz" * 64, key.public_b58)
        with pytest.raises(crypto.MalformedKeyError):
            crypto.verify(body, good, "0Ol")
        with pytest.raises(crypto.MalformedKeyError):
            crypto.verify(body, good, crypto.base58_encode(b"\x01" * 16))

    def test_against_reference_implementation(self):
        # RFC 8032 test vectors, reproduced by the reference implementation
        sk1 = bytes.fromhex("9d61b19deffd5a60ba844af492ec2cc44449c5697b326919703bac031cae7f60")
        assert ed25519_ref.public_key(sk1).hex() == (
            "d75a980182b10ab7d54bfed3c964073a0ee172f3daa62325af021a68f707511a"
        )
        assert ed25519_ref.sign(b"", sk1).hex() == (
            "e5564300c360ac729086e2cc806e828a84877f1eb8e5d974d873e06522490155"
            "5fb8821590a33bacc61e39701cf9b46bd25bf5f0595bbe24655141438e7a100b"
        )
        # our signing convention: Ed25519 over the SHA3-256 digest of the body
        rng = random.Random(31)
        for _ in range(5):
            seed = rng.randbytes(32)
            key = crypto.KeyPair.from_seed(seed)
            assert key.public_key == ed25519_ref.public_key(seed)
            body = crypto.canonicalize({"v": rng.random()})
            import hashlib

            digest = hashlib.sha3_256(body).digest()
            assert crypto.sign(body, key) == ed25519_ref.sign(digest, seed).hex()


class TestDeriveId:
    def _signed(self, metadata):
        key = crypto.KeyPair.from_seed(b"f" * 32)
        return crypto.sign_transaction(
            {"data": {"sn": "X"}, "metadata": metadata, "public_key": key.public_b58}, key
        )

    def test_deterministic(self):
        assert crypto.derive_id(self._signed({"count": 1})) == crypto.derive_id(self._signed({"count": 1}))

    def test_sensitive_to_metadata(self):
        assert crypto.derive_id(self._signed({"count": 1})) != crypto.derive_id(self._signed({"count": 2}))

    def test_id_shape(self):
        txid = crypto.derive_id(self._signed({}))
        assert len(txid) == 64 and all(c in "0123456789abcdef" for c in txid)

    def test_requires_signature(self):
        with pytest.raises(crypto.MalformedSignatureError):
            crypto.derive_id({"data": {}})

    def test_second_preimage_sanity(self):
        # distinct bodies must map to distinct ids (10^5 samples)
        key = crypto.KeyPair.from_seed(b"g" * 32)
        signature = "ab" * 64
        seen = set()
        for i in range(100_000):
            tx = {"data": {"n": i}, "public_key": key.public_b58, "signature": signature}
            seen.add(crypto.derive_id(tx))
        assert len(seen) == 100_000

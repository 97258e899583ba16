"""Validation workflows: admin puts, the six-step data pipeline, updates,
type checking, stage ordering, index construction."""

from __future__ import annotations

import base64
import random

import pytest

from helpers import ADMIN, ALICE, BOB, CAROL, Pipeline, context_tx, data_tx, update_tx, user_tx
from ledgergate.crypto import KeyPair, sign_transaction
from ledgergate.ledger import InstantLedger
from ledgergate.model import ContextValueSpec
from ledgergate.validation import (
    IndexEntries,
    Stage,
    Validator,
    build_index_entries,
    is_image_size_rejection,
)


@pytest.fixture
def pipe(tmp_path):
    pipeline = Pipeline(InstantLedger(tmp_path / "ledger"))
    yield pipeline
    pipeline.adapter.close()


@pytest.fixture
def scene(pipe):
    """Users alice/bob, a parent context, and a typed context for data puts."""
    ids = {
        "alice": pipe.add_user("alice", ALICE),
        "bob": pipe.add_user("bob", BOB),
    }
    ids["widgets"] = pipe.add_context(
        "widgets",
        context_data={"code": {"type": "string", "searchable": True}, "qty": {"type": "number"}},
        permissions=[ALICE.public_b58],
    )
    ids["widget1"] = pipe.add_data(
        ids["widgets"], ids["alice"], ALICE, data={"code": "W-100", "qty": 5}
    )
    ids["readings"] = pipe.add_context(
        "readings",
        context_data={
            "reading": {"type": "number"},
            "widget": {"type": "relation", "parent": ids["widgets"]},
            "tags": {"type": "array", "content": "string", "searchable": True, "required": False},
            "when": {"type": "time", "required": False},
            "photo": {"type": "image", "required": False},
            "extra": {"type": "object", "required": False},
            "ok": {"type": "boolean", "required": False},
        },
        context_metadata={"note": {"type": "string", "required": False}},
        permissions=[ALICE.public_b58],
    )
    return ids


def _reading(pipe, scene, signer=ALICE, user="alice", **fields):
    data = {"reading": 21.5, "widget": scene["widget1"], **fields}
    data = {k: v for k, v in data.items() if v is not None}
    return data_tx(scene["readings"], scene[user], signer, data=data)


class TestAdminPut:
    def test_well_formed_context_accepted(self, pipe):
        tx = context_tx("good", context_data={"f": {"type": "string"}})
        assert pipe.validator.validate_admin_put(tx, pipe.adapter).accepted

    def test_array_without_content_rejected_at_schema(self, pipe):
        tx = context_tx("bad", context_data={"f": {"type": "array"}})
        outcome = pipe.validator.validate_admin_put(tx, pipe.adapter)
        assert outcome.stage is Stage.SCHEMA

    def test_non_admin_signer_rejected(self, pipe):
        tx = user_tx("eve", CAROL, signer=CAROL)  # valid signature, unauthorized key
        outcome = pipe.validator.validate_admin_put(tx, pipe.adapter)
        assert not outcome.accepted
        assert outcome.stage is Stage.PERMISSION

    def test_invalid_signature_rejected(self, pipe):
        tx = user_tx("mallory", CAROL)
        tx["data"]["username"] = "tampered"
        outcome = pipe.validator.validate_admin_put(tx, pipe.adapter)
        assert outcome.stage is Stage.SIGNATURE

    def test_user_structure_checks(self, pipe):
        missing_name = sign_transaction(
            {"data": {"username": "", "public_key": ALICE.public_b58}, "public_key": ADMIN.public_b58},
            ADMIN,
        )
        assert pipe.validator.validate_admin_put(missing_name, pipe.adapter).stage is Stage.SCHEMA
        short_key = sign_transaction(
            {"data": {"username": "x", "public_key": "abc"}, "public_key": ADMIN.public_b58}, ADMIN
        )
        assert pipe.validator.validate_admin_put(short_key, pipe.adapter).stage is Stage.SCHEMA

    def test_context_permissions_must_decode(self, pipe):
        tx = context_tx("bad-perms", context_data={"f": {"type": "string"}}, permissions=["not-base58!"])
        assert pipe.validator.validate_admin_put(tx, pipe.adapter).stage is Stage.SCHEMA

    def test_context_requires_name(self, pipe):
        tx = sign_transaction(
            {
                "data": {"context_data": {"f": {"type": "string"}}},
                "metadata": {"permissions": []},
                "public_key": ADMIN.public_b58,
            },
            ADMIN,
        )
        assert pipe.validator.validate_admin_put(tx, pipe.adapter).stage is Stage.SCHEMA

    def test_spec_parent_must_resolve_to_context(self, pipe, scene):
        dangling = context_tx("rel", context_data={"w": {"type": "relation", "parent": "f" * 64}})
        outcome = pipe.validator.validate_admin_put(dangling, pipe.adapter)
        assert outcome.stage is Stage.RELATION
        # a data asset id is not a context either
        wrong_kind = context_tx("rel2", context_data={"w": {"type": "relation", "parent": scene["widget1"]}})
        assert pipe.validator.validate_admin_put(wrong_kind, pipe.adapter).stage is Stage.RELATION


class TestDataPut:
    def test_accepted_number(self, pipe, scene):
        outcome, indexes = pipe.validator.validate_data_put(_reading(pipe, scene), pipe.adapter)
        assert outcome.accepted
        assert indexes.parents == (scene["widget1"],)

    def test_wrong_type_rejected_at_schema(self, pipe, scene):
        tx = _reading(pipe, scene, reading="hot")
        outcome, _ = pipe.validator.validate_data_put(tx, pipe.adapter)
        assert outcome.stage is Stage.SCHEMA

    def test_missing_parent_rejected_at_relation(self, pipe, scene):
        tx = _reading(pipe, scene, widget="e" * 64)
        outcome, _ = pipe.validator.validate_data_put(tx, pipe.adapter)
        assert outcome.stage is Stage.RELATION

    def test_parent_of_wrong_context_rejected_at_relation(self, pipe, scene):
        reading_id = pipe.add_data(
            scene["readings"], scene["alice"], ALICE,
            data={"reading": 1.0, "widget": scene["widget1"]},
        )
        tx = _reading(pipe, scene, widget=reading_id)
        outcome, _ = pipe.validator.validate_data_put(tx, pipe.adapter)
        assert outcome.stage is Stage.RELATION

    def test_unpermitted_signer_rejected(self, pipe, scene):
        tx = _reading(pipe, scene, signer=BOB, user="bob")
        outcome, _ = pipe.validator.validate_data_put(tx, pipe.adapter)
        assert outcome.stage is Stage.PERMISSION

    def test_identity_mismatch_rejected(self, pipe, scene):
        # alice's user_id but bob's key and signature
        tx = _reading(pipe, scene, signer=BOB, user="alice")
        outcome, _ = pipe.validator.validate_data_put(tx, pipe.adapter)
        assert outcome.stage is Stage.IDENTITY

    def test_unknown_user_rejected(self, pipe, scene):
        tx = data_tx(scene["readings"], "d" * 64, ALICE, data={"reading": 1, "widget": scene["widget1"]})
        outcome, _ = pipe.validator.validate_data_put(tx, pipe.adapter)
        assert outcome.stage is Stage.IDENTITY

    def test_unknown_context_rejected_at_lookup(self, pipe, scene):
        tx = data_tx("c" * 64, scene["alice"], ALICE, data={"reading": 1})
        outcome, _ = pipe.validator.validate_data_put(tx, pipe.adapter)
        assert outcome.stage is Stage.CONTEXT_LOOKUP

    def test_undeclared_key_rejected(self, pipe, scene):
        tx = _reading(pipe, scene, bogus=1)
        outcome, _ = pipe.validator.validate_data_put(tx, pipe.adapter)
        assert outcome.stage is Stage.SCHEMA
        assert "undeclared" in outcome.detail

    def test_missing_required_key_rejected(self, pipe, scene):
        tx = data_tx(scene["readings"], scene["alice"], ALICE, data={"reading": 3.5})
        outcome, _ = pipe.validator.validate_data_put(tx, pipe.adapter)
        assert outcome.stage is Stage.SCHEMA
        assert "required" in outcome.detail

    def test_optional_fields_may_be_absent(self, pipe, scene):
        outcome, _ = pipe.validator.validate_data_put(_reading(pipe, scene), pipe.adapter)
        assert outcome.accepted

    def test_array_elements_checked(self, pipe, scene):
        good = _reading(pipe, scene, tags=["hot", "urgent"])
        assert pipe.validator.validate_data_put(good, pipe.adapter)[0].accepted
        bad = _reading(pipe, scene, tags=["hot", 3])
        assert pipe.validator.validate_data_put(bad, pipe.adapter)[0].stage is Stage.SCHEMA

    def test_time_field(self, pipe, scene):
        good = _reading(pipe, scene, when="2024-03-01T10:00:00Z")
        assert pipe.validator.validate_data_put(good, pipe.adapter)[0].accepted
        bad = _reading(pipe, scene, when="yesterday")
        assert pipe.validator.validate_data_put(bad, pipe.adapter)[0].stage is Stage.SCHEMA

    def test_oversized_image_flagged_separately(self, pipe, scene):
        small = {"mime": "image/png", "bytes": base64.b64encode(b"x" * 64).decode()}
        assert pipe.validator.validate_data_put(_reading(pipe, scene, photo=small), pipe.adapter)[0].accepted
        validator = Validator([ADMIN.public_b58], max_image_bytes=32)
        outcome, _ = validator.validate_data_put(_reading(pipe, scene, photo=small), pipe.adapter)
        assert outcome.stage is Stage.SCHEMA
        assert is_image_size_rejection(outcome)

    def test_invalid_base64_image_is_plain_schema_failure(self, pipe, scene):
        bad = {"mime": "image/png", "bytes": "!!!not-base64!!!"}
        outcome, _ = pipe.validator.validate_data_put(_reading(pipe, scene, photo=bad), pipe.adapter)
        assert outcome.stage is Stage.SCHEMA
        assert not is_image_size_rejection(outcome)


class TestStageOrdering:
    """For transactions violating several rules at once, the reported stage is
    the earliest in workflow order."""

    def test_signature_beats_everything(self, pipe, scene):
        tx = _reading(pipe, scene, reading="hot", widget="e" * 64)
        tx["data"]["reading"] = "tampered-after-signing"
        outcome, _ = pipe.validator.validate_data_put(tx, pipe.adapter)
        assert outcome.stage is Stage.SIGNATURE

    def test_identity_beats_permission_and_schema(self, pipe, scene):
        tx = data_tx(scene["readings"], "d" * 64, CAROL, data={"reading": "hot"})
        outcome, _ = pipe.validator.validate_data_put(tx, pipe.adapter)
        assert outcome.stage is Stage.IDENTITY

    def test_permission_beats_schema(self, pipe, scene):
        tx = data_tx(scene["readings"], scene["bob"], BOB, data={"reading": "hot"})
        outcome, _ = pipe.validator.validate_data_put(tx, pipe.adapter)
        assert outcome.stage is Stage.PERMISSION

    def test_schema_beats_relation(self, pipe, scene):
        tx = _reading(pipe, scene, reading="hot", widget="e" * 64)
        outcome, _ = pipe.validator.validate_data_put(tx, pipe.adapter)
        assert outcome.stage is Stage.SCHEMA

    def test_adversarial_pairs_sampled(self, pipe, scene):
        rng = random.Random(17)
        violations = {
            Stage.IDENTITY: {"user": "unknown"},
            Stage.PERMISSION: {"signer": BOB, "user": "bob"},
            Stage.SCHEMA: {"reading": "hot"},
            Stage.RELATION: {"widget": "e" * 64},
        }
        order = [Stage.IDENTITY, Stage.PERMISSION, Stage.SCHEMA, Stage.RELATION]
        for _ in range(30):
            picked = rng.sample(order, 2)
            expected = min(picked, key=order.index)
            fields: dict = {}
            signer, user = ALICE, "alice"
            for stage in picked:
                tweak = violations[stage]
                if stage is Stage.IDENTITY:
                    user = "unknown"
                elif stage is Stage.PERMISSION:
                    signer, user = BOB, "bob" if user != "unknown" else user
                else:
                    fields.update(tweak)
            user_id = "d" * 64 if user == "unknown" else scene[user]
            data = {"reading": 21.5, "widget": scene["widget1"], **fields}
            tx = data_tx(scene["readings"], user_id, signer, data=data)
            outcome, _ = pipe.validator.validate_data_put(tx, pipe.adapter)
            assert outcome.stage is expected, (picked, outcome)


class TestUpdatePut:
    def test_update_extends_chain(self, pipe, scene):
        tx = update_tx(scene["widget1"], scene["widget1"], ALICE, metadata={})
        outcome, record = pipe.try_update(tx)
        assert outcome.accepted
        assert pipe.adapter.state_of(scene["widget1"]).chain_length == 2
        assert record.transaction["input_id"] == scene["widget1"]

    def test_stale_head_rejected(self, pipe, scene):
        first = update_tx(scene["widget1"], scene["widget1"], ALICE, metadata={})
        assert pipe.try_update(first)[0].accepted
        # second update also cites the original create: fork attempt
        second = update_tx(scene["widget1"], scene["widget1"], ALICE)
        outcome, _ = pipe.try_update(second)
        assert outcome.stage is Stage.CHAIN_HEAD

    def test_update_metadata_must_conform(self, pipe, scene):
        reading = pipe.add_data(
            scene["readings"], scene["alice"], ALICE, data={"reading": 1.0, "widget": scene["widget1"]}
        )
        bad = update_tx(reading, reading, ALICE, metadata={"undeclared": 1})
        assert pipe.try_update(bad)[0].stage is Stage.SCHEMA
        good = update_tx(reading, reading, ALICE, metadata={"note": "checked"})
        assert pipe.try_update(good)[0].accepted
        assert pipe.adapter.state_of(reading).metadata == {"note": "checked"}

    def test_update_with_data_rejected(self, pipe, scene):
        tx = update_tx(scene["widget1"], scene["widget1"], ALICE, metadata={}, data={"code": "W-2"})
        assert pipe.try_update(tx)[0].stage is Stage.SCHEMA

    def test_update_of_user_asset_requires_admin(self, pipe, scene):
        by_user = update_tx(scene["alice"], scene["alice"], ALICE, metadata={"roles": ["qa"]})
        assert pipe.try_update(by_user)[0].stage is Stage.PERMISSION
        by_admin = update_tx(scene["alice"], scene["alice"], ADMIN, metadata={"roles": ["qa"]})
        assert pipe.try_update(by_admin)[0].accepted

    def test_update_of_data_asset_requires_context_permission(self, pipe, scene):
        by_bob = update_tx(scene["widget1"], scene["widget1"], BOB, metadata={})
        assert pipe.try_update(by_bob)[0].stage is Stage.PERMISSION

    def test_unknown_asset(self, pipe, scene):
        tx = update_tx("e" * 64, "e" * 64, ADMIN, metadata={})
        assert pipe.try_update(tx)[0].stage is Stage.CONTEXT_LOOKUP

    def test_context_metadata_update_replaces_whole_object(self, pipe, scene):
        new_metadata = {"name": "widgets", "permissions": [ALICE.public_b58, BOB.public_b58]}
        tx = update_tx(scene["widgets"], scene["widgets"], ADMIN, metadata=new_metadata)
        assert pipe.try_update(tx)[0].accepted
        assert pipe.adapter.asset_state(scene["widgets"]).metadata == new_metadata
        # and a malformed replacement is rejected
        stale_head = pipe.adapter.head_id(scene["widgets"])
        bad = update_tx(scene["widgets"], stale_head, ADMIN, metadata={"permissions": "oops"})
        assert pipe.try_update(bad)[0].stage is Stage.SCHEMA


class TestContextVersionPut:
    def _versioned(self, pipe, scene, major, input_id=None, signer=ADMIN):
        return sign_transaction(
            {
                "asset_id": scene["widgets"],
                "input_id": input_id or pipe.adapter.head_id(scene["widgets"]),
                "data": {
                    "context_data": {
                        "code": {"type": "string", "searchable": True},
                        "qty": {"type": "number"},
                        "origin": {"type": "string", "required": False},
                    },
                    "version": {"major": major},
                },
                "public_key": signer.public_b58,
            },
            signer,
        )

    def test_versioned_recreate_accepted(self, pipe, scene):
        tx = self._versioned(pipe, scene, major=2)
        outcome = pipe.validator.validate_context_version_put(tx, pipe.adapter)
        assert outcome.accepted, outcome.detail

    def test_version_must_increment(self, pipe, scene):
        for major in (1, 3):
            tx = self._versioned(pipe, scene, major=major)
            outcome = pipe.validator.validate_context_version_put(tx, pipe.adapter)
            assert outcome.stage is Stage.SCHEMA

    def test_requires_admin(self, pipe, scene):
        tx = self._versioned(pipe, scene, major=2, signer=ALICE)
        outcome = pipe.validator.validate_context_version_put(tx, pipe.adapter)
        assert outcome.stage is Stage.PERMISSION

    def test_chain_head_enforced(self, pipe, scene):
        tx = self._versioned(pipe, scene, major=2, input_id="e" * 64)
        outcome = pipe.validator.validate_context_version_put(tx, pipe.adapter)
        assert outcome.stage is Stage.CHAIN_HEAD


class TestCheckType:
    @pytest.fixture
    def validator(self):
        return Validator([ADMIN.public_b58])

    def test_time_examples(self, validator):
        spec = ContextValueSpec(type="time")
        assert validator.check_type("2024-03-01T10:00:00Z", spec)
        assert validator.check_type("2024-03-01T10:00:00.25+05:30", spec)
        assert not validator.check_type("yesterday", spec)
        assert not validator.check_type("2024-03-01 10:00:00Z", spec)
        assert not validator.check_type("2024-03-01T10:00:00", spec)  # offset mandatory
        assert not validator.check_type("2024-13-01T10:00:00Z", spec)

    def test_array_examples(self, validator):
        spec = ContextValueSpec(type="array", content="number")
        assert validator.check_type([1, 2, 3], spec)
        assert not validator.check_type([1, "x"], spec)
        assert not validator.check_type("not-an-array", spec)

    def test_number_rejects_bool_and_non_finite(self, validator):
        spec = ContextValueSpec(type="number")
        assert validator.check_type(21.5, spec) and validator.check_type(3, spec)
        assert not validator.check_type(True, spec)
        assert not validator.check_type(float("nan"), spec)

    def test_relation_against_ledger(self, pipe, scene):
        spec = ContextValueSpec(type="relation", parent=scene["widgets"])
        assert pipe.validator.check_type(scene["widget1"], spec, pipe.adapter)
        assert not pipe.validator.check_type("e" * 64, spec, pipe.adapter)
        wrong_parent = ContextValueSpec(type="relation", parent=scene["readings"])
        assert not pipe.validator.check_type(scene["widget1"], wrong_parent, pipe.adapter)
        assert not pipe.validator.check_type(scene["widget1"], spec, None)


class TestIndexEntries:
    def test_parents_and_terms(self, pipe, scene):
        tx = _reading(pipe, scene, tags=["alpha", "beta"])
        outcome, indexes = pipe.validator.validate_data_put(tx, pipe.adapter)
        assert outcome.accepted
        assert indexes.parents == (scene["widget1"],)
        assert indexes.search_terms == ("alpha", "beta")

    def test_non_searchable_strings_not_indexed(self):
        specs = {
            "code": ContextValueSpec(type="string", searchable=True),
            "plain": ContextValueSpec(type="string"),
        }
        entries = build_index_entries([({"code": "W", "plain": "hidden"}, specs)])
        assert entries.search_terms == ("W",)

    def test_duplicate_relation_values_preserved(self):
        specs = {
            "a": ContextValueSpec(type="relation", parent="c" * 64),
            "b": ContextValueSpec(type="relation", parent="c" * 64),
        }
        target = "d" * 64
        entries = build_index_entries([({"a": target, "b": target}, specs)])
        assert entries.parents == (target, target)

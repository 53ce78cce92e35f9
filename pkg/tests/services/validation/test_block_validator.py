"""
Tests for block import validation: every error variant and the order the
checks short-circuit in.
"""

import pytest

from src.core.encoding import block_hash
from src.core.merkle import EMPTY_ROOT
from src.models.exceptions import ValidationError, ValidationErrorKind
from src.services.state import WorldState
from src.services.validation import HeaderFault, UncleFault, validate_block, validate_header, validate_uncles


def _error(store, block) -> ValidationError:
    with pytest.raises(ValidationError) as exc_info:
        validate_block(block, store)
    return exc_info.value


class TestValidationVariants:
    """One purpose-built block per ValidationError variant"""

    @pytest.fixture
    def tip(self, store, grow, sensor_tx):
        grow(store, 2, {0: [sensor_tx(seq=0)]})
        return store.head_header, store.canonical_state()

    def test_valid_block_passes(self, store, tip, block_factory, sensor_tx):
        block, expected = block_factory(*tip, [sensor_tx(seq=1)])
        result = validate_block(block, store)
        assert result.state.root == expected.state.root

    def test_known_block(self, store, tip, block_factory):
        block, _ = block_factory(*tip)
        assert store.import_block(block).accepted
        assert _error(store, block).kind == ValidationErrorKind.KNOWN_BLOCK

    def test_unknown_parent(self, store, tip, block_factory):
        orphan_parent, result = block_factory(*tip)
        child, _ = block_factory(orphan_parent.header, result.state)
        assert _error(store, child).kind == ValidationErrorKind.UNKNOWN_PARENT

    def test_missing_parent_state(self, store, tip, block_factory):
        del store.post_states[store.head]
        child, _ = block_factory(tip[0], tip[1])
        assert _error(store, child).kind == ValidationErrorKind.MISSING_PARENT_STATE

    @pytest.mark.parametrize(
        "overrides, fault",
        [
            ({"height": 7}, HeaderFault.BAD_HEIGHT),
            ({"difficulty": 17}, HeaderFault.BAD_DIFFICULTY),
            ({"gas_limit": 999}, HeaderFault.BAD_GAS),
        ],
    )
    def test_invalid_header(self, store, tip, block_factory, overrides, fault):
        block, _ = block_factory(*tip, overrides=overrides)
        error = _error(store, block)
        assert error.kind == ValidationErrorKind.INVALID_HEADER
        assert error.reason == fault.value

    def test_timestamp_not_after_parent(self, store, tip, block_factory):
        parent, state = tip
        block, _ = block_factory(parent, state, timestamp=parent.timestamp + 1)
        stale = block.model_copy(update={"header": block.header.model_copy(update={"timestamp": parent.timestamp})})
        assert _error(store, stale).reason == HeaderFault.BAD_TIMESTAMP.value

    def test_bad_seal(self, store, tip, block_factory):
        block, _ = block_factory(*tip, seal=False)
        error = _error(store, block)
        assert error.label == "InvalidHeader:BadSeal"

    def test_fake_nonce_on_sealed_block(self, store, tip, block_factory):
        block, _ = block_factory(*tip)
        forged = block.model_copy(update={"header": block.header.model_copy(update={"nonce": block.header.nonce ^ 1})})
        assert _error(store, forged).label == "InvalidHeader:BadSeal"

    def test_invalid_uncles(self, store, tip, block_factory):
        block, _ = block_factory(*tip, overrides={"uncle_root": b"\x05" * 32})
        error = _error(store, block)
        assert error.kind == ValidationErrorKind.INVALID_UNCLES
        assert error.reason == UncleFault.UNCLE_ROOT_MISMATCH.value

    def test_gas_used_mismatch(self, store, tip, block_factory, sensor_tx):
        block, _ = block_factory(*tip, [sensor_tx(seq=1)], overrides={"gas_used": 0})
        assert _error(store, block).kind == ValidationErrorKind.GAS_USED_MISMATCH

    def test_bloom_mismatch(self, store, tip, block_factory, sensor_tx):
        block, _ = block_factory(*tip, [sensor_tx(seq=1)], overrides={"bloom": 0})
        assert _error(store, block).kind == ValidationErrorKind.BLOOM_MISMATCH

    def test_tx_root_mismatch(self, store, tip, block_factory, sensor_tx):
        block, _ = block_factory(*tip, [sensor_tx(seq=1)], overrides={"tx_root": EMPTY_ROOT})
        assert _error(store, block).kind == ValidationErrorKind.TX_ROOT_MISMATCH

    def test_receipt_root_mismatch(self, store, tip, block_factory, sensor_tx):
        block, _ = block_factory(*tip, [sensor_tx(seq=1)], overrides={"receipt_root": EMPTY_ROOT})
        assert _error(store, block).kind == ValidationErrorKind.RECEIPT_ROOT_MISMATCH

    def test_state_root_mismatch(self, store, tip, block_factory, sensor_tx):
        block, _ = block_factory(*tip, [sensor_tx(seq=1)], overrides={"state_root": WorldState().root})
        assert _error(store, block).kind == ValidationErrorKind.STATE_ROOT_MISMATCH

    def test_edited_body_with_original_header(self, store, tip, block_factory, sensor_tx):
        block, _ = block_factory(*tip, [sensor_tx(seq=1, temperature=3400)])
        edited = block.model_copy(update={"transactions": (sensor_tx(seq=1, temperature=-400),)})
        assert _error(store, edited).kind == ValidationErrorKind.TX_ROOT_MISMATCH


class TestShortCircuitOrder:
    """A block with several faults reports the earliest check"""

    @pytest.fixture
    def tip(self, store, grow):
        grow(store, 1)
        return store.head_header, store.canonical_state()

    def test_unknown_parent_before_header(self, store, tip, block_factory):
        missing, result = block_factory(*tip)
        child, _ = block_factory(missing.header, result.state, seal=False)
        assert _error(store, child).kind == ValidationErrorKind.UNKNOWN_PARENT

    def test_header_before_uncles_and_state(self, store, tip, block_factory):
        block, _ = block_factory(
            *tip, overrides={"uncle_root": b"\x05" * 32, "state_root": b"\x06" * 32}, seal=False
        )
        assert _error(store, block).kind == ValidationErrorKind.INVALID_HEADER

    def test_uncles_before_body(self, store, tip, block_factory):
        block, _ = block_factory(*tip, overrides={"uncle_root": b"\x05" * 32, "state_root": b"\x06" * 32})
        assert _error(store, block).kind == ValidationErrorKind.INVALID_UNCLES

    def test_tx_root_before_state_root(self, store, tip, block_factory):
        block, _ = block_factory(*tip, overrides={"tx_root": b"\x05" * 32, "state_root": b"\x06" * 32})
        assert _error(store, block).kind == ValidationErrorKind.TX_ROOT_MISMATCH


class TestUncles:
    """Uncle inclusion rules"""

    @pytest.fixture
    def forked(self, store, grow, genesis, block_factory):
        """Canonical A1, A2 plus a stored sibling B1 of A1"""
        canonical = grow(store, 2)
        sibling, _ = block_factory(genesis.header, WorldState(), timestamp=14, rng_seed=77)
        assert store.import_block(sibling).accepted
        return canonical, sibling

    def test_sibling_is_a_valid_uncle(self, store, forked, block_factory):
        _, sibling = forked
        block, _ = block_factory(store.head_header, store.canonical_state(), uncles=[sibling.header])
        validate_block(block, store)

    def test_validate_uncles_directly(self, store, forked, block_factory):
        _, sibling = forked
        block, _ = block_factory(store.head_header, store.canonical_state(), uncles=[sibling.header], seal=False)
        assert validate_uncles(block, store) is None
        mislabeled = block.model_copy(update={"uncles": ()})
        assert validate_uncles(mislabeled, store) == UncleFault.UNCLE_ROOT_MISMATCH

    def test_ancestor_is_not_an_uncle(self, store, forked, block_factory):
        canonical, _ = forked
        block, _ = block_factory(store.head_header, store.canonical_state(), uncles=[canonical[0].header])
        assert _error(store, block).reason == UncleFault.DUPLICATE_UNCLE.value

    def test_same_uncle_twice(self, store, forked, block_factory):
        _, sibling = forked
        block, _ = block_factory(store.head_header, store.canonical_state(), uncles=[sibling.header, sibling.header])
        assert _error(store, block).reason == UncleFault.DUPLICATE_UNCLE.value

    def test_too_many_uncles(self, store, forked, block_factory):
        _, sibling = forked
        block, _ = block_factory(store.head_header, store.canonical_state(), uncles=[sibling.header] * 3)
        assert _error(store, block).reason == UncleFault.TOO_MANY_UNCLES.value

    def test_badly_sealed_uncle(self, store, forked, block_factory):
        _, sibling = forked
        forged = sibling.header.model_copy(update={"nonce": sibling.header.nonce ^ 1})
        block, _ = block_factory(store.head_header, store.canonical_state(), uncles=[forged])
        assert _error(store, block).label == "InvalidUncles:InvalidUncleHeader"

    def test_uncle_of_unknown_parent(self, store, forked, block_factory):
        _, sibling = forked
        stranger = sibling.header.model_copy(update={"parent_hash": b"\x09" * 32})
        block, _ = block_factory(store.head_header, store.canonical_state(), uncles=[stranger])
        assert _error(store, block).reason == UncleFault.UNKNOWN_UNCLE_PARENT.value

    def test_sibling_of_the_block_is_stale(self, store, forked, block_factory):
        head = store.head_header
        twin, _ = block_factory(head, store.canonical_state(), timestamp=head.timestamp + 14, rng_seed=88)
        block, _ = block_factory(head, store.canonical_state(), uncles=[twin.header])
        assert _error(store, block).reason == UncleFault.STALE_UNCLE.value


class TestValidateHeader:
    def test_valid_child(self, store, grow, params):
        grow(store, 2)
        head = store.head_header
        parent = store.get_header(head.parent_hash)
        assert validate_header(head, parent, params) is None

    def test_genesis_child_height(self, genesis, params, block_factory):
        block, _ = block_factory(genesis.header, WorldState())
        assert block_hash(block.header) != block_hash(genesis.header)
        assert validate_header(block.header, genesis.header, params) is None

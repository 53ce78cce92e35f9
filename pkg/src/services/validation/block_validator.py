"""
Block Import Validation

validate_block runs the import checks in a fixed order and stops at the
first failure:

1. KnownBlock          block and its post-state already stored
2. UnknownParent       parent block absent
3. MissingParentState  parent post-state absent
4. InvalidHeader       height, timestamp, difficulty, gas or seal
5. InvalidUncles       uncle list shape, ancestry and seals
6. GasUsedMismatch / BloomMismatch
7. TxRootMismatch / ReceiptRootMismatch
8. StateRootMismatch

Checks 6 to 8 compare the header against a single re-execution of the body.
"""

from enum import Enum
from typing import Dict, Optional, Protocol, Set

from src.core.config import ConsensusParams
from src.core.encoding import block_hash, uncle_list_hash
from src.core.merkle import receipts_root, transactions_root
from src.models.data_models import Block, Header
from src.models.exceptions import GasLimitExceededError, ValidationError, ValidationErrorKind
from src.services.pow import EpochSeed, calc_difficulty, seed_for_height, verify_pow
from src.services.state import TransitionResult, WorldState, apply_transactions


class HeaderFault(str, Enum):
    BAD_HEIGHT = "BadHeight"
    BAD_TIMESTAMP = "BadTimestamp"
    BAD_DIFFICULTY = "BadDifficulty"
    BAD_GAS = "BadGas"
    BAD_SEAL = "BadSeal"


class UncleFault(str, Enum):
    TOO_MANY_UNCLES = "TooManyUncles"
    UNCLE_ROOT_MISMATCH = "UncleRootMismatch"
    UNKNOWN_UNCLE_PARENT = "UnknownUncleParent"
    STALE_UNCLE = "StaleUncle"
    DUPLICATE_UNCLE = "DuplicateUncle"
    INVALID_UNCLE_HEADER = "InvalidUncleHeader"


class BlockStoreView(Protocol):
    """Read access validation needs from a chain store"""

    params: ConsensusParams

    def has_block(self, h: bytes) -> bool: ...

    def get_header(self, h: bytes) -> Optional[Header]: ...

    def get_block(self, h: bytes) -> Optional[Block]: ...

    def post_state(self, h: bytes) -> Optional[WorldState]: ...


def validate_header(
    h: Header,
    parent: Header,
    params: ConsensusParams,
    seed: Optional[EpochSeed] = None,
) -> Optional[HeaderFault]:
    """
    Check a header against its parent.

    Args:
        h: Header under test
        parent: Its parent header
        params: Consensus constants
        seed: Epoch seed for h.height; derived from params when omitted

    Returns:
        None if valid, else the first failing HeaderFault
    """
    if h.height != parent.height + 1:
        return HeaderFault.BAD_HEIGHT
    if h.timestamp <= parent.timestamp:
        return HeaderFault.BAD_TIMESTAMP
    if h.difficulty != calc_difficulty(parent, h.timestamp, params):
        return HeaderFault.BAD_DIFFICULTY
    if h.gas_used > h.gas_limit or h.gas_limit != parent.gas_limit:
        return HeaderFault.BAD_GAS
    if not verify_pow(h, seed if seed is not None else seed_for_height(h.height, params)):
        return HeaderFault.BAD_SEAL
    return None


def validate_uncles(b: Block, store: BlockStoreView) -> Optional[UncleFault]:
    """
    Check a block's uncle list.

    An uncle's parent must be one of the block's ancestors within
    ``uncle_depth`` generations but not the block's own parent; the uncle
    must not itself be an ancestor or already included by one.

    Returns:
        None if valid, else the first failing UncleFault
    """
    params = store.params
    if len(b.uncles) > params.max_uncles:
        return UncleFault.TOO_MANY_UNCLES
    if uncle_list_hash(b.uncles) != b.header.uncle_root:
        return UncleFault.UNCLE_ROOT_MISMATCH
    if not b.uncles:
        return None

    ancestors: Dict[bytes, Header] = {}
    included: Set[bytes] = set()
    cursor = b.header.parent_hash
    for _ in range(params.uncle_depth + 1):
        ancestor = store.get_block(cursor)
        if ancestor is None:
            break
        ancestors[cursor] = ancestor.header
        included.update(block_hash(u) for u in ancestor.uncles)
        if ancestor.header.height == 0:
            break
        cursor = ancestor.header.parent_hash

    seen: Set[bytes] = set()
    for uncle in b.uncles:
        uncle_hash = block_hash(uncle)
        if uncle_hash in seen or uncle_hash in included or uncle_hash in ancestors:
            return UncleFault.DUPLICATE_UNCLE
        seen.add(uncle_hash)

        if uncle.parent_hash == b.header.parent_hash:
            return UncleFault.STALE_UNCLE
        if uncle.parent_hash not in ancestors:
            if store.has_block(uncle.parent_hash):
                return UncleFault.STALE_UNCLE
            return UncleFault.UNKNOWN_UNCLE_PARENT

        if validate_header(uncle, ancestors[uncle.parent_hash], params) is not None:
            return UncleFault.INVALID_UNCLE_HEADER
    return None


def validate_block(b: Block, store: BlockStoreView) -> TransitionResult:
    """
    Run the full import pipeline for a block.

    Args:
        b: Candidate block
        store: Chain store holding at least the genesis

    Returns:
        The re-execution result (post-state, receipts, gas, bloom), so the
        caller can store it without executing twice

    Raises:
        ValidationError: Carrying the first failing condition
    """
    h = b.header
    own_hash = block_hash(h)
    params = store.params

    def fail(kind: ValidationErrorKind, reason: Optional[str] = None) -> ValidationError:
        return ValidationError(kind, reason=reason, block_hash=own_hash)

    if store.has_block(own_hash) and store.post_state(own_hash) is not None:
        raise fail(ValidationErrorKind.KNOWN_BLOCK)

    parent = store.get_header(h.parent_hash)
    if parent is None or not store.has_block(h.parent_hash):
        raise fail(ValidationErrorKind.UNKNOWN_PARENT)

    parent_state = store.post_state(h.parent_hash)
    if parent_state is None:
        raise fail(ValidationErrorKind.MISSING_PARENT_STATE)

    header_fault = validate_header(h, parent, params)
    if header_fault is not None:
        raise fail(ValidationErrorKind.INVALID_HEADER, header_fault.value)

    uncle_fault = validate_uncles(b, store)
    if uncle_fault is not None:
        raise fail(ValidationErrorKind.INVALID_UNCLES, uncle_fault.value)

    try:
        result = apply_transactions(parent_state, b.transactions, h.gas_limit, params.fixed_tx_gas)
    except GasLimitExceededError as e:
        raise fail(ValidationErrorKind.GAS_USED_MISMATCH, "GasLimitExceeded") from e

    if result.gas_used != h.gas_used:
        raise fail(ValidationErrorKind.GAS_USED_MISMATCH)
    if result.bloom != h.bloom:
        raise fail(ValidationErrorKind.BLOOM_MISMATCH)
    if transactions_root(b.transactions) != h.tx_root:
        raise fail(ValidationErrorKind.TX_ROOT_MISMATCH)
    if receipts_root(result.receipts) != h.receipt_root:
        raise fail(ValidationErrorKind.RECEIPT_ROOT_MISMATCH)
    if result.state.root != h.state_root:
        raise fail(ValidationErrorKind.STATE_ROOT_MISMATCH)
    return result

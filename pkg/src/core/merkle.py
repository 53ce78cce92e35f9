"""
Binary Merkle commitment over ordered byte strings.

Leaves hash as hash(0x00 || item) and parents as hash(0x01 || left || right),
so a leaf can never be read as an interior node. An odd layer duplicates its
last node. A single item commits to its leaf hash and the empty list commits
to EMPTY_ROOT.
"""

from typing import List, Sequence

from src.models.data_models import Receipt, Transaction

from .encoding import EMPTY_HASH, encode_receipt, encode_transaction, sha256

EMPTY_ROOT: bytes = EMPTY_HASH

LEAF_PREFIX = b"\x00"
NODE_PREFIX = b"\x01"


def merkle_root(items: Sequence[bytes]) -> bytes:
    """
    Compute the Merkle root of an ordered list of byte strings.

    Args:
        items: Encoded leaves, in commitment order

    Returns:
        32-byte root
    """
    if not items:
        return EMPTY_ROOT

    layer: List[bytes] = [sha256(LEAF_PREFIX + item) for item in items]
    while len(layer) > 1:
        if len(layer) % 2 == 1:
            layer.append(layer[-1])
        layer = [sha256(NODE_PREFIX + layer[i] + layer[i + 1]) for i in range(0, len(layer), 2)]
    return layer[0]


def transactions_root(txs: Sequence[Transaction]) -> bytes:
    return merkle_root([encode_transaction(tx) for tx in txs])


def receipts_root(receipts: Sequence[Receipt]) -> bytes:
    return merkle_root([encode_receipt(r) for r in receipts])

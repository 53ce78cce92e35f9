"""
Tests for the binary Merkle commitment.
"""

import json
from pathlib import Path

from src.core.encoding import sha256
from src.core.merkle import EMPTY_ROOT, LEAF_PREFIX, merkle_root, transactions_root

GOLDEN = json.loads((Path(__file__).parent.parent / "fixtures" / "golden_hashes.json").read_text())


class TestMerkleRoot:
    def test_empty_list_commits_to_empty_root(self):
        assert merkle_root([]) == EMPTY_ROOT
        assert EMPTY_ROOT.hex() == GOLDEN["empty_hash"]

    def test_single_item_is_its_leaf_hash(self):
        assert merkle_root([b"a"]).hex() == GOLDEN["merkle_a"]
        assert merkle_root([b"a"]) == sha256(LEAF_PREFIX + b"a")

    def test_two_items(self):
        assert merkle_root([b"a", b"b"]).hex() == GOLDEN["merkle_ab"]

    def test_odd_layer_duplicates_last_node(self):
        assert merkle_root([b"a", b"b", b"c"]).hex() == GOLDEN["merkle_abc"]

    def test_order_matters(self):
        assert merkle_root([b"a", b"b"]) != merkle_root([b"b", b"a"])

    def test_leaf_cannot_pose_as_interior_node(self):
        pair = sha256(LEAF_PREFIX + b"a") + sha256(LEAF_PREFIX + b"b")
        assert merkle_root([pair]) != merkle_root([b"a", b"b"])

    def test_transactions_root_of_nothing(self):
        assert transactions_root([]) == EMPTY_ROOT

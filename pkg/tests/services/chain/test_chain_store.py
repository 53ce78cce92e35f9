"""
Tests for the chain database: fork choice, reorgs, bad-block cache, uncle
candidates and persistence.
"""

import pytest

from src.core.encoding import block_hash
from src.models.exceptions import UnknownBlockError, ValidationErrorKind
from src.services.chain import ChainStore, ImportKind, select_transactions
from src.services.state import WorldState, read_record


class TestForkChoice:
    """Heaviest total difficulty wins"""

    def test_extend_canonical(self, store, block_factory, genesis):
        block, _ = block_factory(genesis.header, WorldState())
        outcome = store.import_block(block)
        assert outcome.kind == ImportKind.EXTENDED_CANONICAL
        assert store.head == block_hash(block.header)
        assert store.total_difficulty(store.head) == 32

    def test_equal_td_fork_stays_side_chain(self, store, grow, sensor_tx):
        grow(store, 1)
        head = store.head
        fork = grow(store, 1, {0: [sensor_tx()]}, rng_seed=50, parent_hash=store.genesis_hash)
        assert store.head == head
        assert not store.is_canonical(block_hash(fork[0].header))
        assert block_hash(fork[0].header) in store.orphans

    def test_heavier_fork_reorganizes(self, store, grow, sensor_tx):
        main = grow(store, 2, {0: [sensor_tx(temperature=3400)]})
        fork = grow(store, 3, {0: [sensor_tx(temperature=-400)]}, rng_seed=90, parent_hash=store.genesis_hash)
        assert store.head == block_hash(fork[-1].header)
        assert read_record(store.canonical_state(), "dev-1", 0).temperature == -400
        assert all(block_hash(b.header) in store.orphans for b in main)

    def test_reorg_outcome_lists_both_branches(self, store, grow, block_factory, sensor_tx):
        main = grow(store, 1)
        fork = grow(store, 1, {0: [sensor_tx()]}, rng_seed=50, parent_hash=store.genesis_hash)
        fork_hash = block_hash(fork[0].header)
        tip, _ = block_factory(fork[0].header, store.post_state(fork_hash), rng_seed=51)

        outcome = store.import_block(tip)
        assert outcome.kind == ImportKind.REORGANIZED
        assert outcome.reverted == (block_hash(main[0].header),)
        assert outcome.applied == (fork_hash, block_hash(tip.header))
        assert outcome.head_changed

    def test_reorg_rewrites_index(self, store, grow, sensor_tx):
        main = grow(store, 3)
        fork = grow(store, 2, {0: [sensor_tx(temperature=-400)]}, rng_seed=50, parent_hash=store.genesis_hash)
        fork_hashes = [block_hash(b.header) for b in fork]

        reverted, applied = store.reorg(fork_hashes[-1])
        assert reverted == [block_hash(b.header) for b in main]
        assert applied == fork_hashes
        assert store.head == fork_hashes[-1]
        assert [store.canonical_hash(h) for h in (1, 2, 3)] == [*fork_hashes, None]
        assert all(h in store.orphans for h in reverted)

    def test_canonical_index_is_contiguous(self, store, grow):
        blocks = grow(store, 4)
        assert [block_hash(b.header) for b in store.canonical_blocks()][1:] == [block_hash(b.header) for b in blocks]

    def test_unknown_td(self, store):
        with pytest.raises(UnknownBlockError):
            store.total_difficulty(b"\x00" * 32)

    def test_reconsider_switches_to_heavier_stored_branch(self, store, grow, sensor_tx):
        grow(store, 1)
        fork = grow(store, 2, {0: [sensor_tx(temperature=3400)]}, rng_seed=50, parent_hash=store.genesis_hash)
        forged_tip = grow(store, 1, {0: [sensor_tx(temperature=-400)]}, rng_seed=70, parent_hash=store.genesis_hash)[0]
        store.force_head(block_hash(forged_tip.header))

        outcome = store.reconsider(block_hash(fork[-1].header))
        assert outcome is not None and outcome.kind == ImportKind.REORGANIZED
        assert store.head == block_hash(fork[-1].header)
        assert store.reconsider(block_hash(fork[-1].header)) is None


class TestBadBlocks:
    def test_falsified_block_is_cached(self, store, grow, block_factory):
        grow(store, 1)
        bad, _ = block_factory(store.head_header, store.canonical_state(), seal=False)
        first = store.import_block(bad)
        second = store.import_block(bad)
        assert first.error.label == "InvalidHeader:BadSeal"
        assert second.error is first.error
        assert block_hash(bad.header) in store.bad_blocks

    def test_unknown_parent_is_not_cached(self, store, grow, block_factory):
        grow(store, 1)
        missing, result = block_factory(store.head_header, store.canonical_state())
        child, _ = block_factory(missing.header, result.state)
        assert store.import_block(child).error.kind == ValidationErrorKind.UNKNOWN_PARENT
        assert block_hash(child.header) not in store.bad_blocks
        assert store.import_block(missing).accepted
        assert store.import_block(child).accepted


class TestUncleCandidates:
    def test_orphan_offered_as_uncle(self, store, grow, sensor_tx):
        grow(store, 2)
        fork = grow(store, 1, {0: [sensor_tx(temperature=-400)]}, rng_seed=50, parent_hash=store.genesis_hash)
        assert store.uncle_candidates(store.head) == [fork[0].header]

    def test_badly_sealed_orphan_skipped_unless_compromised(self, store, grow, sensor_tx):
        grow(store, 2)
        fork = grow(store, 1, {0: [sensor_tx(temperature=-400)]}, rng_seed=50, parent_hash=store.genesis_hash)
        h = block_hash(fork[0].header)
        forged = fork[0].header.model_copy(update={"nonce": fork[0].header.nonce ^ 1})
        del store.orphans[h]
        store.orphans[block_hash(forged)] = forged
        store.headers[block_hash(forged)] = forged

        assert store.uncle_candidates(store.head) == []
        store.compromised = True
        assert store.uncle_candidates(store.head) == [forged]

    def test_parent_of_tip_excluded(self, store, grow, sensor_tx):
        grow(store, 1)
        grow(store, 1, {0: [sensor_tx(temperature=-400)]}, rng_seed=50, parent_hash=store.genesis_hash)
        assert store.uncle_candidates(store.genesis_hash) == []


class TestSelectTransactions:
    def test_orders_by_sender_sequence(self, store, sensor_tx, params):
        pool = [sensor_tx(seq=1), sensor_tx(seq=0), sensor_tx(seq=3)]
        chosen = select_transactions(pool, store.canonical_state(), params)
        assert [tx.seq for tx in chosen] == [0, 1]

    def test_capacity(self, store, sensor_tx, params):
        small = params.model_copy(update={"block_gas_limit": 42000})
        pool = [sensor_tx(seq=i) for i in range(4)]
        assert len(select_transactions(pool, store.canonical_state(), small)) == 2


class TestPersistence:
    def test_dump_and_load(self, store, grow, sensor_tx, tmp_path):
        grow(store, 3, {1: [sensor_tx(seq=0)]})
        grow(store, 1, {0: [sensor_tx(temperature=-400)]}, rng_seed=50, parent_hash=store.genesis_hash)
        store.compromised = True
        path = tmp_path / "chain.json"
        store.dump(path)

        loaded = ChainStore.load(path)
        assert loaded.head == store.head
        assert loaded.canonical == store.canonical
        assert loaded.td == store.td
        assert loaded.canonical_state() == store.canonical_state()
        assert list(loaded.orphans) == list(store.orphans)
        assert loaded.compromised is True
        assert loaded.params == store.params

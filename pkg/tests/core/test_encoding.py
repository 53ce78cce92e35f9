"""
Tests for canonical encodings and the frozen hash fixtures.
"""

import json
from pathlib import Path

import pytest

from src.core.config import ConsensusParams
from src.core.encoding import (
    HEADER_SIZE,
    block_hash,
    decode_block,
    decode_header,
    decode_payload,
    decode_sensor_record,
    decode_tamper_log,
    encode_block,
    encode_header,
    encode_sensor_record,
    encode_tamper_log,
    parse_record_key,
    record_key,
    seal_hash,
    sha256,
    uncle_list_hash,
)
from src.models.data_models import SensorRecord, TamperLog
from src.models.exceptions import EncodingError
from src.services.chain import make_genesis
from src.services.state import WorldState

GOLDEN = json.loads((Path(__file__).parent.parent / "fixtures" / "golden_hashes.json").read_text())


class TestHeaderEncoding:
    """Header layout and hashing"""

    @pytest.fixture
    def genesis_header(self):
        return make_genesis(ConsensusParams()).header

    def test_header_is_fixed_size(self, genesis_header):
        assert len(encode_header(genesis_header)) == HEADER_SIZE

    def test_parent_hash_leads_the_encoding(self, genesis_header):
        child = genesis_header.model_copy(update={"parent_hash": b"\x11" * 32})
        assert encode_header(child)[:32] == b"\x11" * 32

    def test_genesis_hash_matches_golden(self, genesis_header):
        assert block_hash(genesis_header).hex() == GOLDEN["genesis_default_params"]

    def test_empty_uncle_list_hash_matches_golden(self):
        assert uncle_list_hash([]).hex() == GOLDEN["empty_uncle_list"]

    def test_decode_inverts_encode(self, genesis_header):
        assert decode_header(encode_header(genesis_header)) == genesis_header

    def test_seal_hash_ignores_nonce_and_mix(self, genesis_header):
        sealed = genesis_header.model_copy(update={"nonce": 99, "mix_digest": b"\x01" * 32})
        assert seal_hash(sealed) == seal_hash(genesis_header)
        assert block_hash(sealed) != block_hash(genesis_header)

    def test_truncated_header_is_rejected(self, genesis_header):
        with pytest.raises(EncodingError):
            decode_header(encode_header(genesis_header)[:-1])

    def test_trailing_bytes_are_rejected(self, genesis_header):
        with pytest.raises(EncodingError):
            decode_header(encode_header(genesis_header) + b"\x00")


class TestPayloadEncoding:
    """Sensor records and tamper logs"""

    @pytest.fixture
    def record(self):
        return SensorRecord(device_id="dev-1", reading_time=5, temperature=3400, seq=0)

    def test_sensor_record_bytes_match_golden(self, record):
        encoded = encode_sensor_record(record)
        assert encoded.hex() == GOLDEN["sensor_record_dev1_3400"]
        assert sha256(encoded).hex() == GOLDEN["sensor_record_dev1_3400_hash"]

    def test_negative_temperature_survives(self):
        cold = SensorRecord(device_id="dev-1", reading_time=5, temperature=-400, seq=3)
        assert decode_sensor_record(encode_sensor_record(cold)).temperature == -400

    def test_tamper_log_decodes_by_tag(self):
        log = TamperLog(
            detecting_node="endpoint-1",
            block_hash=b"\x22" * 32,
            field="state:dev-1:0:temperature",
            old_value=b"3400",
            new_value=b"-400",
            detected_at=300000,
        )
        decoded = decode_payload(encode_tamper_log(log))
        assert isinstance(decoded, TamperLog)
        assert decoded == log

    def test_unknown_tag_is_rejected(self):
        with pytest.raises(EncodingError, match="unknown tag"):
            decode_payload(b"\x07abc")

    def test_wrong_payload_kind_is_rejected(self, record):
        with pytest.raises(EncodingError):
            decode_tamper_log(encode_sensor_record(record))

    def test_record_key_round_trip(self):
        assert parse_record_key(record_key("dev-7", 12)) == ("dev-7", 12)


class TestBlockEncoding:
    def test_block_with_body_round_trips(self, genesis, block_factory, sensor_tx):
        block, _ = block_factory(genesis.header, WorldState(), [sensor_tx()])
        assert decode_block(encode_block(block)) == block

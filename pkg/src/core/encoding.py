"""
Canonical byte encodings and hashing.

Every encoding here is fixed-order: integers are fixed-width big-endian,
strings carry a 2-byte length prefix and byte strings a 4-byte one. The
layouts are documented in docs/encoding.md; hashes over them are
reproducible bit for bit.
"""

import hashlib
import struct
from typing import Iterable, List, Sequence, Tuple, Union

from src.models.data_models import (
    MAX_UINT256,
    ZERO_HASH,
    Block,
    Header,
    Receipt,
    SensorRecord,
    TamperLog,
    Transaction,
)
from src.models.exceptions import EncodingError

HEADER_SIZE = 296

SENSOR_RECORD_TAG = 0x01
TAMPER_LOG_TAG = 0x02

RECORD_KEY_PREFIX = b"rec:"
SEQ_KEY_PREFIX = b"seq:"
LOG_KEY_PREFIX = b"log:"


def sha256(data: bytes) -> bytes:
    """The single 256-bit hash used for headers, Merkle leaves and PoW mixing."""
    return hashlib.sha256(data).digest()


EMPTY_HASH = sha256(b"")


def _u8(value: int) -> bytes:
    return struct.pack(">B", value)


def _u32(value: int) -> bytes:
    return struct.pack(">I", value)


def _u64(value: int) -> bytes:
    return struct.pack(">Q", value)


def _i64(value: int) -> bytes:
    return struct.pack(">q", value)


def _u256(value: int) -> bytes:
    return value.to_bytes(32, "big")


def _str(value: str) -> bytes:
    raw = value.encode("utf-8")
    return struct.pack(">H", len(raw)) + raw


def _var(value: bytes) -> bytes:
    return _u32(len(value)) + value


class _Reader:
    """Cursor over an encoded byte string"""

    def __init__(self, data: bytes, type_name: str):
        self.data = data
        self.offset = 0
        self.type_name = type_name

    def take(self, size: int) -> bytes:
        end = self.offset + size
        if end > len(self.data):
            raise EncodingError(self.type_name, f"truncated at offset {self.offset}")
        chunk = self.data[self.offset:end]
        self.offset = end
        return chunk

    def u8(self) -> int:
        return self.take(1)[0]

    def u32(self) -> int:
        return struct.unpack(">I", self.take(4))[0]

    def u64(self) -> int:
        return struct.unpack(">Q", self.take(8))[0]

    def i64(self) -> int:
        return struct.unpack(">q", self.take(8))[0]

    def u256(self) -> int:
        return int.from_bytes(self.take(32), "big")

    def text(self) -> str:
        (size,) = struct.unpack(">H", self.take(2))
        try:
            return self.take(size).decode("utf-8")
        except UnicodeDecodeError as e:
            raise EncodingError(self.type_name, f"invalid utf-8: {e}") from e

    def var(self) -> bytes:
        return self.take(self.u32())

    def finish(self) -> None:
        if self.offset != len(self.data):
            raise EncodingError(self.type_name, f"{len(self.data) - self.offset} trailing bytes")


# Headers


def encode_header(h: Header) -> bytes:
    """
    Encode a header in declared field order.

    Args:
        h: Header to encode

    Returns:
        HEADER_SIZE bytes; the first 32 are the parent hash
    """
    return b"".join(
        (
            h.parent_hash,
            h.uncle_root,
            h.state_root,
            h.tx_root,
            h.receipt_root,
            _u256(h.bloom),
            _u256(h.difficulty),
            _u64(h.height),
            _u64(h.gas_limit),
            _u64(h.gas_used),
            _u64(h.timestamp),
            _u64(h.nonce),
            h.mix_digest,
        )
    )


def _read_header(reader: _Reader) -> Header:
    try:
        return Header(
            parent_hash=reader.take(32),
            uncle_root=reader.take(32),
            state_root=reader.take(32),
            tx_root=reader.take(32),
            receipt_root=reader.take(32),
            bloom=reader.u256(),
            difficulty=reader.u256(),
            height=reader.u64(),
            gas_limit=reader.u64(),
            gas_used=reader.u64(),
            timestamp=reader.u64(),
            nonce=reader.u64(),
            mix_digest=reader.take(32),
        )
    except ValueError as e:
        raise EncodingError("Header", str(e)) from e


def decode_header(data: bytes) -> Header:
    reader = _Reader(data, "Header")
    header = _read_header(reader)
    reader.finish()
    return header


def block_hash(h: Header) -> bytes:
    """Hash of the full header, seal included."""
    return sha256(encode_header(h))


def seal_hash(h: Header) -> bytes:
    """Hash the miner commits to: the header with nonce and mix digest zeroed."""
    return block_hash(h.model_copy(update={"nonce": 0, "mix_digest": ZERO_HASH}))


def encode_uncles(uncles: Sequence[Header]) -> bytes:
    return _u32(len(uncles)) + b"".join(encode_header(u) for u in uncles)


def uncle_list_hash(uncles: Sequence[Header]) -> bytes:
    return sha256(encode_uncles(uncles))


# Transactions and receipts


def encode_transaction(tx: Transaction) -> bytes:
    return b"".join((_str(tx.sender), _str(tx.contract), _var(tx.payload), _u64(tx.seq), _u64(tx.gas)))


def _read_transaction(reader: _Reader) -> Transaction:
    try:
        return Transaction(
            sender=reader.text(),
            contract=reader.text(),
            payload=reader.var(),
            seq=reader.u64(),
            gas=reader.u64(),
        )
    except ValueError as e:
        raise EncodingError("Transaction", str(e)) from e


def decode_transaction(data: bytes) -> Transaction:
    reader = _Reader(data, "Transaction")
    tx = _read_transaction(reader)
    reader.finish()
    return tx


def tx_hash(tx: Transaction) -> bytes:
    return sha256(encode_transaction(tx))


def encode_receipt(receipt: Receipt) -> bytes:
    return b"".join(
        (receipt.tx_hash, _u8(1 if receipt.status else 0), _u64(receipt.gas_used), _u256(receipt.bloom_bits))
    )


# Blocks


def encode_block(block: Block) -> bytes:
    parts: List[bytes] = [encode_header(block.header), _u32(len(block.transactions))]
    parts.extend(_var(encode_transaction(tx)) for tx in block.transactions)
    parts.append(encode_uncles(block.uncles))
    return b"".join(parts)


def decode_block(data: bytes) -> Block:
    reader = _Reader(data, "Block")
    header = _read_header(reader)
    transactions = tuple(decode_transaction(reader.var()) for _ in range(reader.u32()))
    uncles = tuple(_read_header(reader) for _ in range(reader.u32()))
    reader.finish()
    return Block(header=header, transactions=transactions, uncles=uncles)


# Payloads


def encode_sensor_record(record: SensorRecord) -> bytes:
    return b"".join(
        (
            _u8(SENSOR_RECORD_TAG),
            _str(record.device_id),
            _u64(record.reading_time),
            _i64(record.temperature),
            _u64(record.seq),
        )
    )


def encode_tamper_log(log: TamperLog) -> bytes:
    return b"".join(
        (
            _u8(TAMPER_LOG_TAG),
            _str(log.detecting_node),
            log.block_hash,
            _str(log.field),
            _var(log.old_value),
            _var(log.new_value),
            _u64(log.detected_at),
        )
    )


def decode_payload(payload: bytes) -> Union[SensorRecord, TamperLog]:
    """
    Decode a transaction payload.

    Raises:
        EncodingError: If the tag is unknown or the body malformed
    """
    reader = _Reader(payload, "Payload")
    tag = reader.u8()
    try:
        if tag == SENSOR_RECORD_TAG:
            result: Union[SensorRecord, TamperLog] = SensorRecord(
                device_id=reader.text(),
                reading_time=reader.u64(),
                temperature=reader.i64(),
                seq=reader.u64(),
            )
        elif tag == TAMPER_LOG_TAG:
            result = TamperLog(
                detecting_node=reader.text(),
                block_hash=reader.take(32),
                field=reader.text(),
                old_value=reader.var(),
                new_value=reader.var(),
                detected_at=reader.u64(),
            )
        else:
            raise EncodingError("Payload", f"unknown tag {tag:#04x}")
    except ValueError as e:
        raise EncodingError("Payload", str(e)) from e
    reader.finish()
    return result


def decode_sensor_record(payload: bytes) -> SensorRecord:
    decoded = decode_payload(payload)
    if not isinstance(decoded, SensorRecord):
        raise EncodingError("SensorRecord", "payload is not a sensor record")
    return decoded


def decode_tamper_log(payload: bytes) -> TamperLog:
    decoded = decode_payload(payload)
    if not isinstance(decoded, TamperLog):
        raise EncodingError("TamperLog", "payload is not a tamper log")
    return decoded


# World-state keys


def record_key(device_id: str, seq: int) -> bytes:
    return RECORD_KEY_PREFIX + _str(device_id) + _u64(seq)


def parse_record_key(key: bytes) -> Tuple[str, int]:
    reader = _Reader(key[len(RECORD_KEY_PREFIX):], "RecordKey")
    device_id = reader.text()
    seq = reader.u64()
    reader.finish()
    return device_id, seq


def seq_key(sender: str) -> bytes:
    return SEQ_KEY_PREFIX + _str(sender)


def log_key(payload: bytes) -> bytes:
    return LOG_KEY_PREFIX + sha256(payload)


def encode_u64(value: int) -> bytes:
    return _u64(value)


def decode_u64(data: bytes) -> int:
    reader = _Reader(data, "u64")
    value = reader.u64()
    reader.finish()
    return value


def encode_state_leaf(key: bytes, value: bytes) -> bytes:
    return _var(key) + _var(value)


def bloom_bits_for(contract: str, key: bytes) -> int:
    """Three filter bits indexed by the first bytes of hash(contract || key)."""
    digest = sha256(_str(contract) + key)
    bits = 0
    for index in digest[:3]:
        bits |= 1 << index
    return bits


def bloom_or(blooms: Iterable[int]) -> int:
    combined = 0
    for bits in blooms:
        combined |= bits
    return combined & MAX_UINT256

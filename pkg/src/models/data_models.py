"""
Pydantic Models for Chain Data

Every model here is an immutable value: transitions build new instances
with ``model_copy(update=...)`` instead of mutating fields.
"""

from typing import Annotated, Tuple

from pydantic import BaseModel, ConfigDict, Field, model_validator

Hash256 = Annotated[bytes, Field(min_length=32, max_length=32)]

ZERO_HASH: bytes = bytes(32)
MAX_UINT64 = 2**64 - 1
MAX_UINT256 = 2**256 - 1

MIN_TEMPERATURE_CENTI = -27315
MAX_TEMPERATURE_CENTI = 100000


class Header(BaseModel):
    """Sealed block header; the unit every hash and seal commits to"""

    model_config = ConfigDict(frozen=True)

    parent_hash: Hash256 = Field(..., description="Hash of the parent header")
    uncle_root: Hash256 = Field(..., description="Commitment to the uncle header list")
    state_root: Hash256 = Field(..., description="World-state root after this block")
    tx_root: Hash256 = Field(..., description="Merkle root of encoded transactions")
    receipt_root: Hash256 = Field(..., description="Merkle root of encoded receipts")
    bloom: int = Field(0, ge=0, le=MAX_UINT256, description="256-bit log filter")
    difficulty: int = Field(..., ge=1, le=MAX_UINT256, description="PoW difficulty")
    height: int = Field(..., ge=0, le=MAX_UINT64, description="Block number")
    gas_limit: int = Field(..., ge=0, le=MAX_UINT64, description="Block gas limit")
    gas_used: int = Field(0, ge=0, le=MAX_UINT64, description="Gas consumed by the body")
    timestamp: int = Field(..., ge=0, le=MAX_UINT64, description="Simulation time in seconds")
    nonce: int = Field(0, ge=0, le=MAX_UINT64, description="PoW nonce")
    mix_digest: Hash256 = Field(ZERO_HASH, description="PoW mix digest")


class Transaction(BaseModel):
    """A contract call carrying an encoded SensorRecord or TamperLog"""

    model_config = ConfigDict(frozen=True)

    sender: str = Field(..., min_length=1, description="Sending node identifier")
    contract: str = Field(..., min_length=1, description="Target contract identifier")
    payload: bytes = Field(..., description="Encoded SensorRecord or TamperLog")
    seq: int = Field(..., ge=0, le=MAX_UINT64, description="Per-sender sequence number")
    gas: int = Field(..., ge=0, le=MAX_UINT64, description="Gas allowance")


class Receipt(BaseModel):
    """Outcome of executing one transaction"""

    model_config = ConfigDict(frozen=True)

    tx_hash: Hash256
    status: bool = Field(..., description="True on success")
    gas_used: int = Field(..., ge=0, le=MAX_UINT64)
    bloom_bits: int = Field(0, ge=0, le=MAX_UINT256)


class Block(BaseModel):
    """Header plus body (transactions and uncle headers)"""

    model_config = ConfigDict(frozen=True)

    header: Header
    transactions: Tuple[Transaction, ...] = ()
    uncles: Tuple[Header, ...] = ()


class SensorRecord(BaseModel):
    """One temperature reading, stored in centi-degrees Celsius"""

    model_config = ConfigDict(frozen=True)

    device_id: str = Field(..., min_length=1)
    reading_time: int = Field(..., ge=0, le=MAX_UINT64, description="Seconds of simulation time")
    temperature: int = Field(
        ..., ge=MIN_TEMPERATURE_CENTI, le=MAX_TEMPERATURE_CENTI, description="Centi-degrees Celsius"
    )
    seq: int = Field(..., ge=0, le=MAX_UINT64, description="Per-device reading index")

    @property
    def celsius(self) -> float:
        return self.temperature / 100


class TamperLog(BaseModel):
    """Record of content that changed unexpectedly in a node's local chain"""

    model_config = ConfigDict(frozen=True)

    detecting_node: str = Field(..., min_length=1)
    block_hash: Hash256
    field: str = Field(..., min_length=1, description="Path of the first divergent field")
    old_value: bytes
    new_value: bytes
    detected_at: int = Field(..., ge=0, le=MAX_UINT64, description="Simulation time in ms")

    @model_validator(mode="after")
    def _values_differ(self) -> "TamperLog":
        if self.old_value == self.new_value:
            raise ValueError("old_value and new_value must differ")
        return self


class BroadcastReport(BaseModel):
    """Peers a transaction was handed to; empty means it was stranded"""

    model_config = ConfigDict(frozen=True)

    tx_hash: Hash256
    recipients: Tuple[str, ...] = ()

    @property
    def stranded(self) -> bool:
        return not self.recipients

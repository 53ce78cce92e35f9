"""
Pydantic Models for Scenario Inputs

These schemas validate scenario files: the simulated topology, sensor
devices, scheduled tamper actions and the assertions that make up the
verdict.
"""

import re
from enum import Enum
from pathlib import Path
from typing import Any, Dict, List, Literal, Optional, Tuple, Union

from pydantic import BaseModel, ConfigDict, Field, field_validator, model_validator

from src.core.config import ConsensusParams, NetworkParams

from .data_models import MAX_UINT64

RECORD_PATH_PATTERN = re.compile(r"^record:(?P<device>[^:]+):(?P<seq>\d+):temperature$")


class NodeRole(str, Enum):
    MINER = "miner"
    ENDPOINT = "endpoint"
    LIGHT = "light"


class NodeSpec(BaseModel):
    """One simulated node of the topology"""

    model_config = ConfigDict(extra="forbid")

    id: str = Field(..., min_length=1)
    role: NodeRole
    mining_power: float = Field(0.0, ge=0.0, le=1.0, description="Share of network hash rate")

    @model_validator(mode="after")
    def _only_miners_mine(self) -> "NodeSpec":
        if self.role != NodeRole.MINER and self.mining_power > 0:
            raise ValueError(f"node '{self.id}' is a {self.role.value} and cannot have mining power")
        return self


class ComputeBudget(BaseModel):
    """Number of nonce trials a sealing attempt may spend"""

    model_config = ConfigDict(frozen=True)

    max_attempts: int = Field(..., gt=0, le=MAX_UINT64)


class GeneratorSpec(BaseModel):
    """Seeded normal generator for readings, in centi-degrees"""

    model_config = ConfigDict(extra="forbid")

    seed: int = Field(0, ge=0)
    mean: int = Field(2200)
    std: float = Field(150.0, ge=0.0)
    count: int = Field(8, ge=1)


class DeviceConfig(BaseModel):
    """A temperature sensor attached to a node"""

    model_config = ConfigDict(extra="forbid")

    device_id: str = Field(..., min_length=1)
    node_id: str = Field(..., min_length=1, description="Node the device uploads through")
    contract: str = Field("temperature-log", min_length=1)
    interval_s: int = Field(1800, gt=0, description="Seconds between readings")
    start_s: int = Field(0, ge=0, description="Simulation time of the first reading")
    readings: Optional[List[int]] = Field(None, description="Scripted centi-degree readings")
    generator: Optional[GeneratorSpec] = None
    fixture: Optional[Path] = Field(None, description="CSV of device,time,temperature rows")

    @model_validator(mode="after")
    def _one_source(self) -> "DeviceConfig":
        sources = [s for s in (self.readings, self.generator, self.fixture) if s is not None]
        if len(sources) != 1:
            raise ValueError(f"device '{self.device_id}' needs exactly one of readings, generator, fixture")
        return self


class ResealMode(str, Enum):
    NONE = "none"
    FAKE_NONCE = "fake_nonce"
    HONEST_REPOW = "honest_repow"
    REBUILD_DESCENDANTS = "rebuild_descendants"


class ResealSpec(BaseModel):
    """How far a tamperer goes to make the edited block look sealed"""

    model_config = ConfigDict(extra="forbid", frozen=True)

    mode: ResealMode
    nonce: int = Field(0, ge=0, le=MAX_UINT64, description="Nonce written by fake_nonce")
    budget: Optional[ComputeBudget] = None
    rng_seed: int = Field(0, ge=0, description="Nonce search seed for re-mining")

    @model_validator(mode="after")
    def _budget_when_mining(self) -> "ResealSpec":
        needs_budget = self.mode in (ResealMode.HONEST_REPOW, ResealMode.REBUILD_DESCENDANTS)
        if needs_budget and self.budget is None:
            raise ValueError(f"reseal mode '{self.mode.value}' requires a budget")
        return self


class FieldEdit(BaseModel):
    """Path of the edited field plus its forged value"""

    model_config = ConfigDict(extra="forbid", frozen=True)

    path: str = Field(..., description="record:<device>:<seq>:temperature")
    value: int

    @field_validator("path")
    @classmethod
    def validate_path(cls, v: str) -> str:
        if not RECORD_PATH_PATTERN.match(v):
            raise ValueError(f"Unsupported edit path '{v}'; expected record:<device>:<seq>:temperature")
        return v

    @property
    def record(self) -> Tuple[str, int]:
        match = RECORD_PATH_PATTERN.match(self.path)
        assert match is not None
        return match.group("device"), int(match.group("seq"))


class TamperSpec(BaseModel):
    """A storage-level edit of one node's chain database"""

    model_config = ConfigDict(extra="forbid", frozen=True)

    target_node: str = Field(..., min_length=1)
    target_block: Optional[Union[int, str]] = Field(
        None, description="Height, hex hash, 'head', or omitted to locate by the edited record"
    )
    edit: FieldEdit
    reseal: ResealSpec
    claimed_td_delta: int = Field(0, description="Change applied to the stored total difficulty")

    @field_validator("target_block")
    @classmethod
    def validate_target_block(cls, v: Optional[Union[int, str]]) -> Optional[Union[int, str]]:
        if isinstance(v, str) and v != "head":
            try:
                raw = bytes.fromhex(v)
            except ValueError as e:
                raise ValueError(f"target_block '{v}' is neither 'head' nor a hex hash") from e
            if len(raw) != 32:
                raise ValueError("target_block hash must be 32 bytes")
        if isinstance(v, int) and v < 0:
            raise ValueError("target_block height must be non-negative")
        return v


class TamperAction(BaseModel):
    """A tamper spec scheduled on the simulation timeline"""

    model_config = ConfigDict(extra="forbid")

    at_ms: int = Field(..., ge=0)
    spec: TamperSpec


class LightTamperAction(BaseModel):
    """Forge a sealed header run on a light node"""

    model_config = ConfigDict(extra="forbid")

    at_ms: int = Field(..., ge=0)
    target_node: str
    height_lead: int = Field(3, ge=1, description="Forged blocks above the highest known height")
    budget: ComputeBudget
    rng_seed: int = Field(0, ge=0)


class LightFetch(BaseModel):
    """A light node asking a peer for one record"""

    model_config = ConfigDict(extra="forbid")

    at_ms: int = Field(..., ge=0)
    node: str
    device_id: str
    seq: int = Field(..., ge=0)


class MajorityAttackSpec(BaseModel):
    """Parameters of a private-fork race sweep"""

    model_config = ConfigDict(extra="forbid")

    powers: List[float] = Field(default_factory=lambda: [0.1, 0.3, 0.5, 0.7, 0.9])
    fork_depth: int = Field(2, ge=1)
    horizon_blocks: int = Field(200, ge=1)
    seeds: int = Field(50, ge=1, description="Runs per attacker power")

    @field_validator("powers")
    @classmethod
    def validate_powers(cls, v: List[float]) -> List[float]:
        if not v:
            raise ValueError("powers must not be empty")
        for p in v:
            if not 0.0 <= p < 1.0:
                raise ValueError(f"attacker power {p} outside [0, 1)")
        return v


class AssertionSpec(BaseModel):
    """A named verdict check plus its parameters"""

    model_config = ConfigDict(extra="allow")

    type: str = Field(..., min_length=1)

    @property
    def params(self) -> Dict[str, Any]:
        return dict(self.model_extra or {})


class ScenarioConfig(BaseModel):
    """A complete, self-contained simulation scenario"""

    model_config = ConfigDict(extra="forbid")

    name: str = Field(..., min_length=1)
    description: str = ""
    kind: Literal["network", "majority_attack"] = "network"
    seed: int = Field(1, ge=0)
    horizon_ms: int = Field(3_600_000, gt=0)
    consensus: ConsensusParams = Field(default_factory=ConsensusParams)
    network: NetworkParams = Field(default_factory=NetworkParams)
    nodes: List[NodeSpec] = Field(default_factory=list)
    devices: List[DeviceConfig] = Field(default_factory=list)
    tampers: List[TamperAction] = Field(default_factory=list)
    light_tampers: List[LightTamperAction] = Field(default_factory=list)
    light_fetches: List[LightFetch] = Field(default_factory=list)
    majority_attack: Optional[MajorityAttackSpec] = None
    assertions: List[AssertionSpec] = Field(default_factory=list)

    @model_validator(mode="after")
    def _references_exist(self) -> "ScenarioConfig":
        ids = [n.id for n in self.nodes]
        if len(set(ids)) != len(ids):
            raise ValueError("node ids must be unique")
        roles = {n.id: n.role for n in self.nodes}

        if self.kind == "majority_attack":
            if self.majority_attack is None:
                raise ValueError("majority_attack scenarios need a majority_attack section")
            return self

        powers = [n.mining_power for n in self.nodes if n.role == NodeRole.MINER and n.mining_power > 0]
        if powers and abs(sum(powers) - 1.0) > 1e-6:
            raise ValueError(f"miner mining_power must sum to 1, got {sum(powers)}")

        device_ids = [d.device_id for d in self.devices]
        if len(set(device_ids)) != len(device_ids):
            raise ValueError("device ids must be unique")
        for device in self.devices:
            if device.node_id not in roles:
                raise ValueError(f"device '{device.device_id}' uploads through unknown node '{device.node_id}'")

        for action in self.tampers:
            if action.spec.target_node not in roles:
                raise ValueError(f"tamper targets unknown node '{action.spec.target_node}'")
            if roles[action.spec.target_node] == NodeRole.LIGHT:
                raise ValueError("light nodes hold no bodies; use light_tampers")
        for light_action in self.light_tampers:
            if roles.get(light_action.target_node) != NodeRole.LIGHT:
                raise ValueError(f"light tamper target '{light_action.target_node}' is not a light node")
        for fetch in self.light_fetches:
            if roles.get(fetch.node) != NodeRole.LIGHT:
                raise ValueError(f"light fetch from '{fetch.node}' which is not a light node")

        scheduled = (
            [a.at_ms for a in self.tampers]
            + [a.at_ms for a in self.light_tampers]
            + [f.at_ms for f in self.light_fetches]
        )
        if any(t >= self.horizon_ms for t in scheduled):
            raise ValueError("every scheduled action must happen before horizon_ms")
        return self

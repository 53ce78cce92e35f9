"""
Simulation events and the run's event log.

Events are ordered by (time, insertion order). The EventLog is the domain
record of a run: one JSON object per line with sorted keys and no
wall-clock data, so a fixed (config, seed) always yields the same bytes.
Schema in docs/event_log.md.
"""

import heapq
import json
from enum import Enum
from pathlib import Path
from typing import Any, Dict, Iterator, List, Optional, Tuple, Union

from pydantic import BaseModel, ConfigDict, Field

EVENT_LOG_VERSION = 1


class EventKind(str, Enum):
    BLOCK_FOUND = "BlockFound"
    NEW_BLOCK = "NewBlock"
    NEW_TX = "NewTx"
    GET_HEADERS = "GetHeaders"
    HEADERS = "Headers"
    GET_BODIES = "GetBodies"
    BODIES = "Bodies"
    STATUS = "Status"
    SENSOR_TICK = "SensorTick"
    TAMPER_ACTION = "TamperAction"
    LIGHT_TAMPER = "LightTamper"
    LIGHT_FETCH = "LightFetch"


MESSAGE_KINDS = frozenset(
    {
        EventKind.NEW_BLOCK,
        EventKind.NEW_TX,
        EventKind.GET_HEADERS,
        EventKind.HEADERS,
        EventKind.GET_BODIES,
        EventKind.BODIES,
        EventKind.STATUS,
    }
)


class HeadAdvert(BaseModel):
    """A node's head as carried on every message it sends"""

    model_config = ConfigDict(frozen=True)

    head: bytes
    td: int
    height: int


class SimEvent(BaseModel):
    """One entry of the event queue"""

    model_config = ConfigDict(frozen=True, arbitrary_types_allowed=True)

    time: int = Field(..., ge=0, description="Milliseconds of simulation time")
    kind: EventKind
    node: str = Field(..., description="Node that handles the event")
    sender: Optional[str] = None
    status: Optional[HeadAdvert] = None
    data: Any = None
    generation: int = 0

    @property
    def is_message(self) -> bool:
        return self.kind in MESSAGE_KINDS


class EventQueue:
    """Min-heap of events keyed by (time, insertion order)"""

    def __init__(self) -> None:
        self._heap: List[Tuple[int, int, SimEvent]] = []
        self._counter = 0

    def push(self, event: SimEvent) -> None:
        heapq.heappush(self._heap, (event.time, self._counter, event))
        self._counter += 1

    def pop(self) -> SimEvent:
        return heapq.heappop(self._heap)[2]

    def peek_time(self) -> Optional[int]:
        return self._heap[0][0] if self._heap else None

    def __len__(self) -> int:
        return len(self._heap)


def _jsonable(value: Any) -> Any:
    if isinstance(value, bytes):
        return value.hex()
    if isinstance(value, Enum):
        return value.value
    if isinstance(value, dict):
        return {str(k): _jsonable(v) for k, v in value.items()}
    if isinstance(value, (list, tuple)):
        return [_jsonable(v) for v in value]
    return value


class EventLog:
    """Ordered record of everything nodes did during a run"""

    def __init__(self) -> None:
        self.entries: List[Dict[str, Any]] = []

    def append(
        self, time: int, node: str, kind: str, detail: Optional[Dict[str, Any]] = None, error: Optional[str] = None
    ) -> Dict[str, Any]:
        entry: Dict[str, Any] = {"time": time, "node": node, "kind": kind, "detail": _jsonable(detail or {})}
        if error is not None:
            entry["error"] = error
        self.entries.append(entry)
        return entry

    def find(
        self, kind: Optional[str] = None, node: Optional[str] = None, error: Optional[str] = None
    ) -> List[Dict[str, Any]]:
        """Entries matching every given filter; ``error`` matches by prefix."""
        return [
            e
            for e in self.entries
            if (kind is None or e["kind"] == kind)
            and (node is None or e["node"] == node)
            and (error is None or str(e.get("error", "")).startswith(error))
        ]

    def to_jsonl(self) -> str:
        return "".join(json.dumps(e, sort_keys=True, separators=(",", ":")) + "\n" for e in self.entries)

    def write(self, path: Union[str, Path]) -> None:
        Path(path).write_text(self.to_jsonl(), encoding="utf-8")

    @classmethod
    def read(cls, path: Union[str, Path]) -> "EventLog":
        log = cls()
        for line in Path(path).read_text(encoding="utf-8").splitlines():
            if line.strip():
                log.entries.append(json.loads(line))
        return log

    def __iter__(self) -> Iterator[Dict[str, Any]]:
        return iter(self.entries)

    def __len__(self) -> int:
        return len(self.entries)

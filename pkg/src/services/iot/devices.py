"""
Sensor devices: reading sources and sensor transactions.
"""

from pathlib import Path
from typing import Dict, List, Optional, Tuple

import numpy as np
import pandas as pd
import structlog

from src.core.encoding import encode_sensor_record
from src.models.data_models import MAX_TEMPERATURE_CENTI, MIN_TEMPERATURE_CENTI, SensorRecord, Transaction
from src.models.exceptions import ConfigError
from src.models.input_models import DeviceConfig
from src.services.state.transition import DEFAULT_TX_GAS

logger = structlog.get_logger(__name__)

FIXTURE_COLUMNS = ("device_id", "time_s", "temperature_c")


def make_sensor_tx(dev: DeviceConfig, reading: SensorRecord, gas: int = DEFAULT_TX_GAS) -> Transaction:
    """
    Wrap a reading in a transaction to the device's contract.

    The device is the sender, so the transaction seq is the reading seq.

    Raises:
        ValueError: If the reading belongs to another device
    """
    if reading.device_id != dev.device_id:
        raise ValueError(f"reading from '{reading.device_id}' cannot be sent by device '{dev.device_id}'")
    return Transaction(
        sender=dev.device_id,
        contract=dev.contract,
        payload=encode_sensor_record(reading),
        seq=reading.seq,
        gas=gas,
    )


def load_reading_fixture(path: Path) -> Dict[str, List[Tuple[int, int]]]:
    """
    Read a CSV fixture of (device_id, time_s, temperature_c) rows.

    Returns:
        Per device, (reading time, centi-degrees) pairs ordered by time

    Raises:
        ConfigError: If the file is missing columns or values
    """
    try:
        frame = pd.read_csv(path, dtype={"device_id": str})
    except (OSError, pd.errors.ParserError, pd.errors.EmptyDataError) as e:
        raise ConfigError(str(path), f"cannot read reading fixture: {e}") from e

    missing = [c for c in FIXTURE_COLUMNS if c not in frame.columns]
    if missing:
        raise ConfigError(str(path), f"reading fixture lacks columns {missing}")
    if frame[list(FIXTURE_COLUMNS)].isna().any().any():
        raise ConfigError(str(path), "reading fixture has empty cells")

    frame = frame.assign(centi=(frame["temperature_c"] * 100).round().astype(int))
    frame = frame.sort_values(["device_id", "time_s"], kind="stable")

    readings: Dict[str, List[Tuple[int, int]]] = {}
    for device_id, rows in frame.groupby("device_id", sort=True):
        readings[str(device_id)] = list(zip(rows["time_s"].astype(int).tolist(), rows["centi"].tolist()))
    logger.debug("Loaded reading fixture", path=str(path), devices=len(readings), rows=len(frame))
    return readings


def scheduled_readings(dev: DeviceConfig, base_dir: Optional[Path] = None) -> List[SensorRecord]:
    """
    Every reading a device will take, in order.

    Scripted and generated readings are spaced ``interval_s`` apart from
    ``start_s``; fixture readings keep their own times.
    """
    if dev.readings is not None:
        pairs = [(dev.start_s + k * dev.interval_s, t) for k, t in enumerate(dev.readings)]
    elif dev.generator is not None:
        spec = dev.generator
        values = np.rint(np.random.default_rng(spec.seed).normal(spec.mean, spec.std, spec.count))
        values = np.clip(values, MIN_TEMPERATURE_CENTI, MAX_TEMPERATURE_CENTI).astype(int)
        pairs = [(dev.start_s + k * dev.interval_s, int(t)) for k, t in enumerate(values)]
    else:
        assert dev.fixture is not None
        path = dev.fixture if base_dir is None or dev.fixture.is_absolute() else base_dir / dev.fixture
        pairs = load_reading_fixture(path).get(dev.device_id, [])

    return [
        SensorRecord(device_id=dev.device_id, reading_time=when, temperature=temperature, seq=seq)
        for seq, (when, temperature) in enumerate(pairs)
    ]

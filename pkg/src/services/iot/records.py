"""
Record queries across nodes.
"""

from typing import Dict, Mapping, Optional

from src.models.data_models import SensorRecord
from src.services.chain import ChainStore
from src.services.state import read_record


def query_record(stores: Mapping[str, ChainStore], device_id: str, seq: int) -> Dict[str, Optional[SensorRecord]]:
    """
    Read one record from each full node's canonical state.

    Args:
        stores: Chain stores of the full nodes, keyed by node id
        device_id: Sensor device
        seq: Reading index

    Returns:
        Per node, the stored reading or None
    """
    return {node_id: read_record(store.canonical_state(), device_id, seq) for node_id, store in stores.items()}

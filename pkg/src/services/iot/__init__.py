"""Sensor ingestion, local chain audit and on-chain tamper logging."""

from .audit import audit_local_chain
from .devices import load_reading_fixture, make_sensor_tx, scheduled_readings
from .records import query_record
from .tamper_logs import TamperLogUploader, make_tamper_log_tx, upload_tamper_log

__all__ = [
    "audit_local_chain",
    "load_reading_fixture",
    "make_sensor_tx",
    "scheduled_readings",
    "query_record",
    "TamperLogUploader",
    "make_tamper_log_tx",
    "upload_tamper_log",
]

"""Storage-level attacks: record edits, forged light headers and private-fork races."""

from .injector import TamperReceipt, fake_seal, find_record_tx, inject
from .light_head import LightTamperReceipt, tamper_light_head
from .majority import MajorityAttackResult, majority_attack, majority_attack_sweep

__all__ = [
    "TamperReceipt",
    "fake_seal",
    "find_record_tx",
    "inject",
    "LightTamperReceipt",
    "tamper_light_head",
    "MajorityAttackResult",
    "majority_attack",
    "majority_attack_sweep",
]

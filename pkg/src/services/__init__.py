"""
Chain services for the tamper-resistance simulator.

Subpackages:
- state: world state and block transition
- pow: difficulty and sealing
- validation: header, uncle and body checks
- chain: full and header-only chain stores
- tamper: record tampering and attack models
- iot: devices, record lookups, audits and tamper logs
"""

__all__ = []

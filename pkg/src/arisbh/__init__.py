"""Aerial active-RIS backhaul planner.

Plans an amplifying reflective surface carried by a hovering aerial platform
that backhauls a set of UAV base stations from a single ground source:
platform placement, array partitioning and phase alignment, amplification
gain, and per-UAV transmit powers minimizing total consumed power at fixed
rates, plus passive-surface and AF-relay benchmarks.
"""

from .units import db_to_lin, lin_to_db, dbm_to_watt, watt_to_dbm

__all__ = ["db_to_lin", "lin_to_db", "dbm_to_watt", "watt_to_dbm"]

__version__ = "0.1.0"

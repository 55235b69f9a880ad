"""BB84 key-rate bounds with real-time receiver calibration.

Closed-form secure-rate bounds, detector-efficiency estimation from test
pulses, and a gate-level Monte-Carlo simulator with pluggable attacks.
"""

from ._qkdcal import *  # noqa: F401,F403

__all__ = [name for name in dir() if not name.startswith("_")]

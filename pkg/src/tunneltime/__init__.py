"""tunneltime: a numerical laboratory for barrier tunneling delays.

Computes, from first principles, the group delay, dwell time and stored
energy of waves tunneling through quantum and photonic barriers, and shows
that the measured delays behave as lifetimes of stored energy: the delay
saturates with barrier length, equals the stored energy per unit input
power for lossless photonic barriers, and the resulting length/delay ratio
exceeds the wave speed without any energy outrunning the front.
"""

__version__ = "0.1.0"

from . import analysis, cli, photonic, quantum, spectral, timedomain
from .errors import TunnelTimeError

__all__ = [
    "TunnelTimeError",
    "__version__",
    "analysis",
    "cli",
    "photonic",
    "quantum",
    "spectral",
    "timedomain",
]

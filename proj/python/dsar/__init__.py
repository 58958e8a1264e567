"""Wideband and Doppler-SAR interferometry: simulation, imaging and height recovery."""

from ._core import *  # noqa: F401,F403
from ._core import __version__  # noqa: F401

"""Bi-modal bi-copter simulation and control (C++ core)."""

from ._bimodal import *  # noqa: F401,F403
from ._bimodal import __doc__  # noqa: F401

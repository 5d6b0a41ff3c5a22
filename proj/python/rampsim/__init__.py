"""Ramp-limited wind power, semi-Markov charge model and battery penalty simulation."""

from ._rampsim import *  # noqa: F401,F403
from ._rampsim import __doc__  # noqa: F401

"""Relative-rate preferences, canonical sampling pairs, investment-consumption
plans and path-law simulations on finite trees."""

from relrate._relrate import *  # noqa: F401,F403
from relrate._relrate import __version__  # noqa: F401

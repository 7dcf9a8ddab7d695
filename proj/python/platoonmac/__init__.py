"""Platoon stability and 802.11p EDCA access-delay pipeline."""

from ._core import *  # noqa: F401,F403
from ._core import __doc__  # noqa: F401

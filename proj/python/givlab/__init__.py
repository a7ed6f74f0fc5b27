"""Python interface to the multi-space probabilistic state laboratory."""

from ._core import *  # noqa: F401,F403
from ._core import __version__  # noqa: F401

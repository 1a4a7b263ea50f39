"""Python access to the superlens imaging library."""

from ._superlens import *  # noqa: F401,F403
from ._superlens import __doc__  # noqa: F401

__version__ = "0.1.0"

"""Structured translation from syntactic text graphs to expression trees."""

from graph2tree._core import *  # noqa: F401,F403
from graph2tree._core import __version__  # noqa: F401

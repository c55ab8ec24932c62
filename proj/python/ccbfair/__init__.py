"""Fair classification with cooperative contextual bandits."""

from ._core import *  # noqa: F401,F403
from ._core import ConfigError, NumericError, __doc__  # noqa: F401

__version__ = "0.1.0"

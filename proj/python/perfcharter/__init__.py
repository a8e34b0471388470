from ._core import *  # noqa: F401,F403
from ._core import PerfCharterError, __doc__  # noqa: F401

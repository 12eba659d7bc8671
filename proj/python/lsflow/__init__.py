from lsflow._core import *  # noqa: F401,F403
from lsflow._core import __doc__  # noqa: F401

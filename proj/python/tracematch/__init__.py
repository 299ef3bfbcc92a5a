from _tracematch import *  # noqa: F401,F403
from _tracematch import __doc__  # noqa: F401

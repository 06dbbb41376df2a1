from contextlib import contextmanager
from cProfile import Profile
from typing import Optional

import phmm.log


@contextmanager
def output(filename: Optional[str]):
    """Write cProfile statistics of the enclosed block to filename if it is not None"""

    if filename:
        profile = Profile()
        profile.enable()
        try:
            yield
        finally:
            profile.disable()
            profile.dump_stats(filename)
            phmm.log.info("profile written to %s", filename)
    else:
        yield

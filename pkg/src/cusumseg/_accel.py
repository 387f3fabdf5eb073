"""Optional numba acceleration.

Hot kernels are written as plain Python functions restricted to the
numba-compatible subset (scalars, numpy arrays, explicit loops). When
numba is available and not disabled, they are compiled with ``njit``;
otherwise the same source runs interpreted, so both paths execute the
identical sequence of floating-point operations and produce
bit-identical results.

Set the environment variable ``CUSUMSEG_DISABLE_NUMBA=1`` before import
to force the interpreted path.
"""

import os

DISABLE_ENV = "CUSUMSEG_DISABLE_NUMBA"


def _probe() -> bool:
    if os.environ.get(DISABLE_ENV, "").strip() not in ("", "0"):
        return False
    try:
        import numba  # noqa: F401
    except ImportError:
        return False
    return True


NUMBA_ENABLED = _probe()

if NUMBA_ENABLED:
    from numba import njit
else:
    def njit(*args, **kwargs):
        """Identity stand-in for numba.njit."""
        if args and callable(args[0]) and len(args) == 1 and not kwargs:
            return args[0]

        def wrap(fn):
            return fn

        return wrap

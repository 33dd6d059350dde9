"""Optional numba acceleration.

Set ``FORSTER_DISABLE_JIT=1`` in the environment (before import) to force the
pure-numpy code paths. If numba is not importable the numpy paths are used
automatically.
"""
import os

_FLAG = os.environ.get("FORSTER_DISABLE_JIT", "").strip().lower()
JIT_REQUESTED = _FLAG not in ("1", "true", "yes", "on")

try:
    import numba as _nb

    HAVE_NUMBA = True
except ImportError:  # pragma: no cover - numba is a declared dependency
    _nb = None
    HAVE_NUMBA = False

USE_JIT = JIT_REQUESTED and HAVE_NUMBA


def njit(*args, **kwargs):
    """``numba.njit`` when available, otherwise an identity decorator.

    The kernel module compiles its numba variants through this even when
    ``USE_JIT`` is off, so benchmarks can still reach both paths.
    """
    if HAVE_NUMBA:
        return _nb.njit(*args, **kwargs)
    if len(args) == 1 and callable(args[0]) and not kwargs:
        return args[0]
    return lambda func: func

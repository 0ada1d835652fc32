"""Backend selection for the compiled kernels.

Set ``CLIMARISK_JIT=0`` before import to force the pure-numpy path. When
numba is missing the numpy path is used automatically.
"""
import logging
import os

logger = logging.getLogger(__name__)

_FLAG = os.environ.get("CLIMARISK_JIT", "1").strip().lower()

try:
    import numba

    HAVE_NUMBA = True
except ImportError:  # pragma: no cover - numba is a hard dependency in CI
    numba = None
    HAVE_NUMBA = False

USE_NUMBA = HAVE_NUMBA and _FLAG not in ("0", "false", "no", "off")

JIT_OPTIONS = dict(cache=True, nogil=True, fastmath=False, error_model="numpy")


def njit(func):
    """Compile ``func`` with numba when available, else return it untouched.

    The uncompiled function is kept as ``.py_func`` in both cases so tests
    can exercise the interpreted loop directly.
    """
    if not HAVE_NUMBA:
        func.py_func = func
        return func
    return numba.njit(**JIT_OPTIONS)(func)


def backend_name():
    return "numba" if USE_NUMBA else "numpy"

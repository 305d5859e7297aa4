"""Backend selection for the compiled hot kernels.

The SMO solver ships in two implementations: a numba @njit kernel and a
vectorized pure-numpy fallback. The numba path is used when numba imports
cleanly and the PEATCUBE_DISABLE_NUMBA environment variable is not set to a
truthy value (1/true/yes/on). Both paths run the same arithmetic in the same
order, so they produce identical models.
"""

from __future__ import annotations

import os

_TRUTHY = {"1", "true", "yes", "on"}


def numba_disabled_by_env() -> bool:
    return os.environ.get("PEATCUBE_DISABLE_NUMBA", "").strip().lower() in _TRUTHY


def numba_available() -> bool:
    try:
        import numba  # noqa: F401
    except ImportError:
        return False
    return True


def active_backend() -> str:
    """Name of the solver backend the current process will use."""
    if numba_disabled_by_env() or not numba_available():
        return "numpy"
    return "numba"

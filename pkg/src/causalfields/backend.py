"""Select the march-kernel backend at import time.

The compiled extension is preferred when it imported cleanly; setting
CAUSALFIELDS_FORCE_PY=1 forces the pure-numpy fallback. Both backends share
the same call signatures and arithmetic ordering.
"""

import os

from . import _kernels_py

if os.environ.get("CAUSALFIELDS_FORCE_PY", "") == "1":
    _impl = _kernels_py
    _BACKEND = "python"
else:
    try:
        from . import _kernels as _impl  # type: ignore[attr-defined]

        _BACKEND = "cython"
    except ImportError:
        _impl = _kernels_py
        _BACKEND = "python"

wave_march = _impl.wave_march
dirac_march = _impl.dirac_march


def active_backend():
    """Return the name of the backend in use: 'cython' or 'python'."""
    return _BACKEND

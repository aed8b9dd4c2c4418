"""Import-time selection of the integration kernel.

The compiled ``_dopri`` extension is used when importable; setting
``CRNHOPF_PURE=1`` forces the numpy fallback.
"""

import os

from . import _dopri_py

if os.environ.get("CRNHOPF_PURE", "") not in ("", "0"):
    _compiled = None
else:
    try:
        from . import _dopri as _compiled
    except ImportError:
        _compiled = None

backend = _compiled if _compiled is not None else _dopri_py
integrate = backend.integrate
KERNEL = backend.KERNEL
pure = _dopri_py


def available():
    """Names of kernels that can be imported in this environment."""
    names = ["python"]
    if _compiled is not None:
        names.insert(0, "cython")
    else:
        try:
            from . import _dopri  # noqa: F401

            names.insert(0, "cython")
        except ImportError:
            pass
    return names


def get(name=None):
    if name is None:
        return backend
    if name == "python":
        return _dopri_py
    if name == "cython":
        from . import _dopri

        return _dopri
    raise ValueError(f"unknown kernel {name!r}")

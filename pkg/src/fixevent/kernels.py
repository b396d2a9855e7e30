"""Backend selection for the numerical kernels.

The compiled extension ``fixevent._core`` is used when importable; otherwise
(or when the environment variable ``FIXEVENT_PURE_PYTHON`` is set to a
non-empty value other than ``0``) the numpy versions in
``fixevent._fallback`` are used.  ``BACKEND`` names the active one.
"""

import os

from . import _fallback

if os.environ.get("FIXEVENT_PURE_PYTHON", "") not in ("", "0"):
    _impl = _fallback
else:
    try:
        from . import _core as _impl
    except ImportError:  # extension not built
        _impl = _fallback

BACKEND = "python" if _impl is _fallback else "compiled"

crps_normal_mean = _impl.crps_normal_mean
ar1_sigma_table = _impl.ar1_sigma_table
ar1_crps_mean = _impl.ar1_crps_mean
gauss_crps_mean = _impl.gauss_crps_mean
gauss_crps_terms = _impl.gauss_crps_terms
gauss_crps_newton = _impl.gauss_crps_newton
tick_mean = _impl.tick_mean
quantile_line = _impl.quantile_line
nelder_mead = _impl.nelder_mead


def available_backends():
    """Mapping of backend name to kernel module, for tests and benchmarks."""
    found = {"python": _fallback}
    try:
        from . import _core
    except ImportError:
        pass
    else:
        found["compiled"] = _core
    return found

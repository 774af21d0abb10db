"""Kernel backend selection.

The compiled extension is used when it imports; set
``HERMITE_BMO_BACKEND=python`` to force the numpy fallback.
"""

import os

from . import _pykernels

NAME = "python"
kernels = _pykernels

if os.environ.get("HERMITE_BMO_BACKEND", "").lower() != "python":
    try:
        from . import _ckernels
    except ImportError:
        pass
    else:
        kernels = _ckernels
        NAME = "cython"

hermite_table = kernels.hermite_table
hermite_last_two = kernels.hermite_last_two
mean_oscillation_scan = kernels.mean_oscillation_scan
window_means = _pykernels.window_means

"""Backend selection for the Monte Carlo kernels.

The compiled extension is used when it imports; setting ``QMFOPT_PURE=1``
forces the numpy fallback. ``BACKEND`` names the active implementation.

``hd_global_search`` stays on numpy even when the extension is present:
its inner loop is dominated by ``expm1``/``log1p`` calls, which numpy
evaluates with SIMD and libm does not (see ``benchmarks/bench_kernels.py``).
"""

from __future__ import annotations

import os

from . import _kernels_py

_impl = _kernels_py
BACKEND = "python"

if os.environ.get("QMFOPT_PURE", "") not in ("1", "true", "yes"):
    try:
        from . import _kernels as _compiled  # type: ignore[attr-defined]
    except ImportError:  # extension not built
        _compiled = None
    if _compiled is not None:
        _impl = _compiled
        BACKEND = "cython"

fd_csir_delta_asym = _impl.fd_csir_delta_asym
hd_global_search = _kernels_py.hd_global_search
hd_csir_success = _impl.hd_csir_success
diamond_cut_min = _impl.diamond_cut_min

__all__ = ["BACKEND", "fd_csir_delta_asym", "hd_global_search", "hd_csir_success",
           "diamond_cut_min"]

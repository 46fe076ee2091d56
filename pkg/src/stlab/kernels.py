"""Kernel backend selection.

The compiled extension is used when it was built; otherwise the numpy
implementation is imported.  Setting ``STLAB_KERNELS=python`` forces the
fallback (used by the benchmark and the backend-parity tests).
"""
import logging
import os

from . import _kernels_py

logger = logging.getLogger(__name__)

BACKEND = "python"
_impl = _kernels_py

if os.environ.get("STLAB_KERNELS", "").lower() != "python":
    try:
        from . import _kernels as _impl  # type: ignore[no-redef]

        BACKEND = "cython"
    except ImportError:
        logger.debug("compiled kernels unavailable, using numpy fallback")

find_spans = _impl.find_spans
basis_ders = _impl.basis_ders
band_gram = _impl.band_gram

__all__ = ["BACKEND", "find_spans", "basis_ders", "band_gram"]

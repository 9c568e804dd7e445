"""Spectral kernel backend: the compiled extension when available, numpy otherwise.

Set ``NCQ_PURE_PYTHON=1`` to force the numpy implementation.
"""
from __future__ import annotations

import os

import numpy as np

from . import _spectral_py

ENTROPY, PPOWER, MAXEIG = 0, 1, 2

_compiled = None
if os.environ.get("NCQ_PURE_PYTHON", "") not in ("1", "true", "yes"):
    try:
        from . import _spectral as _compiled  # type: ignore[attr-defined]
    except ImportError:  # extension not built
        _compiled = None

BACKEND = "cython" if _compiled is not None else "python"


def block_spectral(y, offsets, sizes, weights, mode: int, p: float = 1.0):
    if _compiled is not None:
        return _compiled.block_spectral(
            np.ascontiguousarray(y, dtype=np.complex128), offsets, sizes, weights, int(mode), float(p)
        )
    return _spectral_py.block_spectral(y, offsets, sizes, weights, mode, p)


def layout(sizes, weights):
    """Contiguous arrays describing a block layout, as the kernels expect."""
    sizes = np.asarray(sizes, dtype=np.int_)
    offsets = np.concatenate([[0], np.cumsum(sizes * sizes)[:-1]]).astype(np.int_)
    return offsets, sizes, np.asarray(weights, dtype=np.float64)

"""Compiled filter kernels with a pure-numpy fallback.

The Cython extension is built by setup.py when a compiler is available;
otherwise the vectorised numpy implementation is used.  Both accept a
band-sequential (B, I, J) float64 volume and return the same.
"""

from __future__ import annotations

import numpy as np

from . import _jbf_py

try:
    from . import _jbf_cy

    DEFAULT_BACKEND = "cython"
except ImportError:  # extension not built
    _jbf_cy = None
    DEFAULT_BACKEND = "python"

BACKENDS = ("cython", "python") if _jbf_cy is not None else ("python",)


def joint_bilateral(values_bsq: np.ndarray, guide: np.ndarray,
                    sigma_d: float, sigma_r: float,
                    half_rows: int, half_cols: int,
                    backend: str | None = None) -> np.ndarray:
    """Joint bilateral filter of every band plane with shared guide weights.

    NaN guide pixels get zero weight (NaN at the window centre yields a
    NaN output pixel); NaN band values are excluded per band with the
    remaining weights renormalised.
    """
    values_bsq = np.ascontiguousarray(values_bsq, dtype=np.float64)
    guide = np.ascontiguousarray(guide, dtype=np.float64)
    if guide.shape != values_bsq.shape[1:]:
        raise ValueError(
            f"guide shape {guide.shape} does not match planes {values_bsq.shape[1:]}"
        )
    if sigma_d <= 0 or sigma_r <= 0:
        raise ValueError("sigma_d and sigma_r must be positive")
    if half_rows < 0 or half_cols < 0:
        raise ValueError("window half-widths must be non-negative")
    name = backend or DEFAULT_BACKEND
    if name == "cython":
        if _jbf_cy is None:
            raise RuntimeError("compiled kernel not available")
        return _jbf_cy.jbf(values_bsq, guide, sigma_d, sigma_r,
                           half_rows, half_cols)
    if name == "python":
        return _jbf_py.jbf(values_bsq, guide, sigma_d, sigma_r,
                           half_rows, half_cols)
    raise ValueError(f"unknown backend {name!r}; available: {BACKENDS}")

"""Vectorised numpy fallback for the joint bilateral filter kernel.

Accumulates one shifted-window term per (dy, dx) offset, so the cost is
window_area dense passes instead of a per-pixel inner loop.
"""

from __future__ import annotations

import numpy as np


def jbf(values_bsq: np.ndarray, guide: np.ndarray,
        sigma_d: float, sigma_r: float,
        half_rows: int, half_cols: int) -> np.ndarray:
    nbands, nrows, ncols = values_bsq.shape
    num = np.zeros_like(values_bsq)
    den = np.zeros_like(values_bsq)
    inv2sd = 1.0 / (2.0 * sigma_d * sigma_d)
    inv2sr = 1.0 / (2.0 * sigma_r * sigma_r)

    for dy in range(-half_rows, half_rows + 1):
        for dx in range(-half_cols, half_cols + 1):
            # destination (centre) region and source (neighbour) region
            r0, r1 = max(0, -dy), min(nrows, nrows - dy)
            c0, c1 = max(0, -dx), min(ncols, ncols - dx)
            if r0 >= r1 or c0 >= c1:
                continue
            dst = (slice(r0, r1), slice(c0, c1))
            src = (slice(r0 + dy, r1 + dy), slice(c0 + dx, c1 + dx))
            w_spatial = np.exp(-(dy * dy + dx * dx) * inv2sd)
            gdiff = guide[dst] - guide[src]
            w = w_spatial * np.exp(-(gdiff * gdiff) * inv2sr)
            w = np.where(np.isfinite(w), w, 0.0)
            vals = values_bsq[(slice(None),) + src]
            finite = np.isfinite(vals)
            wb = np.where(finite, w[None, :, :], 0.0)
            num[(slice(None),) + dst] += wb * np.where(finite, vals, 0.0)
            den[(slice(None),) + dst] += wb

    out = np.full_like(values_bsq, np.nan)
    np.divide(num, den, out=out, where=den > 0)
    # a NaN centre guide pixel has no defined range weight: output NaN
    centre_nan = ~np.isfinite(guide)
    out[:, centre_nan] = np.nan
    return out

"""Dual-scan stitching and tilted-acquisition restoration.

Stitching joins two equal-width scans with a known overlap; tilt
correction resamples the along-scan axis by 1/cos(theta).  An acquired
line under a placing angle theta covers a surface spacing of
step/cos(theta), so restoration stretches the line axis back.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .cube import Hypercube
from .errors import ShapeMismatchError

BLEND_AVERAGE = "average"
BLEND_TAKE_FIRST = "take-first"


@dataclass(frozen=True)
class StitchSpec:
    """Overlap width in pixels and the blend rule for the overlap zone."""

    overlap: int
    blend: str = BLEND_AVERAGE

    def __post_init__(self):
        if self.overlap < 0:
            raise ValueError("overlap must be non-negative")
        if self.blend not in (BLEND_AVERAGE, BLEND_TAKE_FIRST):
            raise ValueError(f"unknown blend rule {self.blend!r}")


@dataclass(frozen=True)
class TiltSpec:
    """Placing angle of the sample relative to the scan stage, degrees."""

    theta_deg: float

    def __post_init__(self):
        if not (0.0 <= self.theta_deg < 90.0):
            raise ValueError("theta must be in [0, 90) degrees")


def stitch(a: Hypercube, b: Hypercube, spec: StitchSpec) -> Hypercube:
    """Join two scans side by side; output width is 2x - overlap."""
    if a.lines != b.lines or a.bands != b.bands or a.samples != b.samples:
        raise ShapeMismatchError(
            f"scan shapes {a.shape} and {b.shape} do not match"
        )
    wa, wb = a.wavelengths, b.wavelengths
    if (wa is None) != (wb is None) or (
            wa is not None and not np.array_equal(wa, wb)):
        raise ShapeMismatchError("wavelength axes differ between scans")
    x = a.samples
    dx = spec.overlap
    if dx > x:
        raise ValueError(f"overlap {dx} exceeds scan width {x}")

    out = np.empty((a.lines, 2 * x - dx, a.bands))
    out[:, :x - dx, :] = a.values[:, :x - dx, :]
    out[:, x:, :] = b.values[:, dx:, :]
    if dx:
        left = a.values[:, x - dx:, :]
        right = b.values[:, :dx, :]
        if spec.blend == BLEND_AVERAGE:
            out[:, x - dx:x, :] = (left + right) / 2.0
        else:
            out[:, x - dx:x, :] = left
    return a.derive(out, step=f"stitch(overlap={dx},blend={spec.blend})")


def tilt_correct(cube: Hypercube, spec: TiltSpec) -> Hypercube:
    """Resample the along-scan axis by 1/cos(theta), linear interpolation.

    theta = 0 is a bit-exact identity.  Output line count is
    round(lines / cos(theta)); endpoints are preserved so smooth content
    round-trips through tilt and inverse resampling.
    """
    if spec.theta_deg == 0.0:
        return cube.derive(cube.values, step="tilt(theta=0)")
    factor = 1.0 / math.cos(math.radians(spec.theta_deg))
    out_lines = max(1, round(cube.lines * factor))
    resampled = resample_lines(cube.values, out_lines)
    return cube.derive(resampled, step=f"tilt(theta={spec.theta_deg})")


def resample_lines(values: np.ndarray, out_lines: int) -> np.ndarray:
    """Endpoint-preserving linear resampling along the line axis."""
    in_lines = values.shape[0]
    if out_lines == in_lines:
        return values.copy()
    if in_lines == 1:
        return np.repeat(values, out_lines, axis=0)
    coords = np.linspace(0.0, in_lines - 1.0, out_lines)
    lo = np.clip(np.floor(coords).astype(int), 0, in_lines - 2)
    frac = (coords - lo).reshape(-1, 1, 1)
    return values[lo] * (1.0 - frac) + values[lo + 1] * frac

"""ROI spectral profiling: mean +/- std spectra, profile crossings and a
per-band separation score for material discrimination."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .cube import Hypercube
from .errors import ShapeMismatchError


@dataclass(frozen=True)
class Roi:
    """Rectangular or explicit-pixel region of interest."""

    name: str = ""
    rect: tuple[int, int, int, int] | None = None  # row0, col0, rows, cols
    pixels: np.ndarray | None = None

    def __post_init__(self):
        if (self.rect is None) == (self.pixels is None):
            raise ValueError("give exactly one of rect or pixels")
        if self.rect is not None:
            r0, c0, nr, nc = self.rect
            if nr < 1 or nc < 1 or r0 < 0 or c0 < 0:
                raise ValueError(f"invalid ROI rectangle {self.rect}")
        else:
            px = np.asarray(self.pixels, dtype=np.int64)
            if px.ndim != 2 or px.shape[1] != 2 or len(px) == 0:
                raise ValueError("pixels must be a non-empty (n, 2) array")
            object.__setattr__(self, "pixels", px)

    def pixel_indices(self, cube: Hypercube) -> np.ndarray:
        if self.rect is not None:
            r0, c0, nr, nc = self.rect
            if r0 + nr > cube.lines or c0 + nc > cube.samples:
                raise ValueError(
                    f"ROI {self.rect} outside cube {cube.lines}x{cube.samples}"
                )
            rr, cc = np.mgrid[r0:r0 + nr, c0:c0 + nc]
            return np.column_stack([rr.ravel(), cc.ravel()])
        px = self.pixels
        if (px[:, 0].max() >= cube.lines or px[:, 1].max() >= cube.samples
                or px.min() < 0):
            raise ValueError("ROI pixels outside cube bounds")
        return px


@dataclass(frozen=True)
class SpectralProfile:
    """Per-band mean and population std over an ROI."""

    mean: np.ndarray
    std: np.ndarray
    n: int
    wavelengths: np.ndarray | None = None
    name: str = ""


def roi_profile(cube: Hypercube, roi: Roi) -> SpectralProfile:
    """Mean and population std spectrum over the ROI pixels."""
    px = roi.pixel_indices(cube)
    spectra = cube.values[px[:, 0], px[:, 1], :]
    return SpectralProfile(
        mean=spectra.mean(axis=0),
        std=spectra.std(axis=0),
        n=len(px),
        wavelengths=cube.wavelengths,
        name=roi.name,
    )


def _check_axes(p1: SpectralProfile, p2: SpectralProfile) -> np.ndarray:
    if p1.mean.shape != p2.mean.shape:
        raise ShapeMismatchError("profiles have different band counts")
    w1, w2 = p1.wavelengths, p2.wavelengths
    if (w1 is None) != (w2 is None) or (
            w1 is not None and not np.array_equal(w1, w2)):
        raise ShapeMismatchError("profiles have different wavelength axes")
    if w1 is None:
        return np.arange(p1.mean.size, dtype=np.float64)
    return w1


def profile_crossings(p1: SpectralProfile, p2: SpectralProfile) -> list[float]:
    """Wavelengths where the mean difference changes sign.

    Strict sign changes only, linearly interpolated between the adjacent
    bands; bands where the difference is exactly zero are tangencies and
    are not reported.
    """
    wl = _check_axes(p1, p2)
    diff = p1.mean - p2.mean
    crossings = []
    for k in range(diff.size - 1):
        a, b = diff[k], diff[k + 1]
        if a * b < 0:
            frac = a / (a - b)
            crossings.append(float(wl[k] + frac * (wl[k + 1] - wl[k])))
    return crossings


def profile_separation(p1: SpectralProfile, p2: SpectralProfile,
                       eps: float = 1e-12) -> tuple[np.ndarray, int]:
    """Per-band separation |mu1 - mu2| / sqrt((s1^2 + s2^2)/2 + eps).

    Returns the score vector and the argmax band index.
    """
    _check_axes(p1, p2)
    score = np.abs(p1.mean - p2.mean) / np.sqrt(
        (p1.std ** 2 + p2.std ** 2) / 2.0 + eps)
    return score, int(np.argmax(score))

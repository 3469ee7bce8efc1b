"""Spectral pre-processing: reflectance calibration, binning, SNV
correction, PCA feature extraction and PC1-guided joint bilateral
filtering.

All statistics use population normalisation (1/n) and skip NaN (dead)
positions.  Every operation is a pure function of immutable inputs and
appends a step to the cube's provenance.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from ._kernels import joint_bilateral
from .cube import KIND_FEATURE, KIND_REFLECTANCE, KIND_SNV, Hypercube
from .errors import DegenerateInputError, ShapeMismatchError

SNV_PER_BAND = "per-band"
SNV_PER_SPECTRUM = "per-spectrum"


@dataclass(frozen=True)
class CalibrationRefs:
    """Dark and white reference frames, one row per sensor column.

    Both frames are J x B (samples x bands), averaged over the scan
    direction when built from multi-line recordings.  Positions where
    white <= dark are dead sensor positions.
    """

    dark: np.ndarray
    white: np.ndarray

    def __post_init__(self):
        d = np.asarray(self.dark, dtype=np.float64)
        w = np.asarray(self.white, dtype=np.float64)
        if d.ndim != 2 or d.shape != w.shape:
            raise ShapeMismatchError(
                f"dark {d.shape} and white {w.shape} must be equal 2-D frames"
            )
        object.__setattr__(self, "dark", d)
        object.__setattr__(self, "white", w)

    @classmethod
    def from_recordings(cls, dark_lines: np.ndarray, white_lines: np.ndarray):
        """Average multi-line (n, J, B) reference recordings over lines."""
        return cls(
            dark=np.asarray(dark_lines, np.float64).mean(axis=0),
            white=np.asarray(white_lines, np.float64).mean(axis=0),
        )

    @property
    def dead_mask(self) -> np.ndarray:
        """(J, B) boolean mask of dead sensor positions."""
        return (self.white - self.dark) <= 0


def calibrate(raw: Hypercube, refs: CalibrationRefs) -> Hypercube:
    """Convert raw radiance counts to reflectance.

    r(i,j,b) = (s(i,j,b) - d(j,b)) / (w(j,b) - d(j,b)).  Dead positions
    become NaN; values above 1 (specular highlights) are kept.
    """
    if refs.dark.shape != (raw.samples, raw.bands):
        raise ShapeMismatchError(
            f"references {refs.dark.shape} do not match cube "
            f"({raw.samples}, {raw.bands})"
        )
    dead = refs.dead_mask
    if dead.all():
        raise DegenerateInputError("every sensor position is dead")
    denom = refs.white - refs.dark
    denom = np.where(dead, np.nan, denom)
    refl = (raw.values - refs.dark[None, :, :]) / denom[None, :, :]
    return raw.derive(refl, kind=KIND_REFLECTANCE,
                      step=f"calibrate(dead={int(dead.sum())})")


def bin_cube(cube: Hypercube, spatial_factor: int = 1,
             spectral_factor: int = 1) -> Hypercube:
    """Average non-overlapping blocks of samples and bands.

    Trailing remainder samples/bands are dropped; wavelengths are
    averaged per block.
    """
    n, m = int(spatial_factor), int(spectral_factor)
    if n < 1 or m < 1:
        raise ValueError("binning factors must be >= 1")
    if n > cube.samples or m > cube.bands:
        raise ValueError(
            f"factors ({n}, {m}) exceed cube dimensions "
            f"({cube.samples} samples, {cube.bands} bands)"
        )
    if n == 1 and m == 1:
        return cube.derive(cube.values, step="bin(1,1)")
    jj = (cube.samples // n) * n
    bb = (cube.bands // m) * m
    v = cube.values[:, :jj, :bb]
    v = v.reshape(cube.lines, jj // n, n, bb // m, m).mean(axis=(2, 4))
    wl = cube.wavelengths
    if wl is not None:
        wl = wl[:bb].reshape(bb // m, m).mean(axis=1)
    return cube.derive(v, wavelengths=wl, step=f"bin({n},{m})")


@dataclass(frozen=True)
class SnvStats:
    """Mean/std used by SNV correction (per-band vectors or per-pixel planes)."""

    mode: str
    mu: np.ndarray
    sigma: np.ndarray

    @property
    def degenerate(self) -> np.ndarray:
        return self.sigma <= 0


def snv_correct(cube: Hypercube, mode: str = SNV_PER_BAND
                ) -> tuple[Hypercube, SnvStats]:
    """Standard Normal Variate correction.

    per-band (default): each band standardised over all pixels to mean 0,
    std 1.  per-spectrum: each pixel spectrum standardised by its own
    scalar mean/std.  Population (1/n) std in both modes; NaN positions
    are excluded from the statistics and stay NaN.
    """
    v = cube.values
    if mode == SNV_PER_BAND:
        mu = np.nanmean(v, axis=(0, 1))
        sigma = np.nanstd(v, axis=(0, 1))
        # peak-to-peak is an exact constancy test; std alone can land on a
        # tiny nonzero value through mean roundoff
        spread = np.nanmax(v, axis=(0, 1)) - np.nanmin(v, axis=(0, 1))
        bad = np.flatnonzero((sigma <= 0) | (spread <= 0))
        if bad.size:
            raise DegenerateInputError(
                f"zero variance in band(s) {bad.tolist()[:8]}"
            )
        out = (v - mu[None, None, :]) / sigma[None, None, :]
    elif mode == SNV_PER_SPECTRUM:
        mu = np.nanmean(v, axis=2)
        sigma = np.nanstd(v, axis=2)
        spread = np.nanmax(v, axis=2) - np.nanmin(v, axis=2)
        bad = np.argwhere((sigma <= 0) | (spread <= 0))
        if bad.size:
            i, j = bad[0]
            raise DegenerateInputError(
                f"zero variance spectrum at pixel ({i}, {j}) "
                f"(+{len(bad) - 1} more)"
            )
        out = (v - mu[:, :, None]) / sigma[:, :, None]
    else:
        raise ValueError(f"unknown SNV mode {mode!r}")
    stats = SnvStats(mode=mode, mu=mu, sigma=sigma)
    return cube.derive(out, kind=KIND_SNV, step=f"snv(mode={mode})"), stats


@dataclass(frozen=True)
class PcaModel:
    """Principal components of the pixel-spectrum covariance.

    Components are orthonormal rows sorted by non-increasing explained
    variance; each component's largest-magnitude coefficient is positive
    so outputs are deterministic across platforms.
    """

    mean_spectrum: np.ndarray
    components: np.ndarray
    explained_variance: np.ndarray

    def transform(self, cube: Hypercube) -> np.ndarray:
        """(I, J, k) score planes for an arbitrary cube on this model."""
        centered = cube.values - self.mean_spectrum[None, None, :]
        return centered @ self.components.T


def pca(cube: Hypercube, k: int) -> tuple[PcaModel, Hypercube]:
    """PCA of the pixel spectra: model plus a cube of k score planes.

    Covariance uses population normalisation 1/n over the pixels with a
    fully finite spectrum; pixels containing NaN get NaN scores.
    """
    nb = cube.bands
    npix = cube.lines * cube.samples
    if not (1 <= k <= min(nb, npix)):
        raise ValueError(f"k={k} out of range [1, {min(nb, npix)}]")
    x = cube.values.reshape(npix, nb)
    valid = np.isfinite(x).all(axis=1)
    if not valid.any():
        raise ValueError("no fully finite pixel spectra")
    xv = x[valid]
    if not np.isfinite(xv).all():
        raise ValueError("non-finite values in cube")
    mean = xv.mean(axis=0)
    xc = xv - mean
    cov = (xc.T @ xc) / xv.shape[0]
    evals, evecs = np.linalg.eigh(cov)
    order = np.argsort(evals)[::-1][:k]
    evals = np.maximum(evals[order], 0.0)
    comps = evecs[:, order].T  # (k, B)
    # sign convention: largest-magnitude coefficient positive
    for row in comps:
        if row[np.argmax(np.abs(row))] < 0:
            row *= -1.0
    scores = np.full((npix, k), np.nan)
    scores[valid] = xc @ comps.T
    model = PcaModel(mean_spectrum=mean, components=comps,
                     explained_variance=evals)
    planes = scores.reshape(cube.lines, cube.samples, k)
    feat = cube.derive(planes, kind=KIND_FEATURE, wavelengths=None,
                       step=f"pca(k={k})")
    return model, feat


@dataclass(frozen=True)
class JbfParams:
    """Joint bilateral filter scales and window.

    The window half-width defaults to ceil(2 * sigma_d) in both
    directions (>95% of the spatial Gaussian mass).  ``legacy_window``
    instead uses half-widths (sigma_d, sigma_r) for integer parameters,
    reproducing the historical window-size rule verbatim.
    """

    sigma_d: float = 2.0
    sigma_r: float = 0.1
    legacy_window: bool = False

    def __post_init__(self):
        if self.sigma_d <= 0 or self.sigma_r <= 0:
            raise ValueError("sigma_d and sigma_r must be positive")

    @property
    def half_widths(self) -> tuple[int, int]:
        if self.legacy_window:
            return int(self.sigma_d), int(self.sigma_r)
        h = math.ceil(2.0 * self.sigma_d)
        return h, h

    @property
    def window(self) -> tuple[int, int]:
        hr, hc = self.half_widths
        return 2 * hr + 1, 2 * hc + 1


def joint_bilateral_filter(cube: Hypercube, guide: np.ndarray,
                           params: JbfParams | None = None,
                           backend: str | None = None) -> Hypercube:
    """Filter every band with shared weights from a 2-D guide image.

    Weights are the product of a spatial Gaussian (sigma_d) and a range
    Gaussian on guide-value differences (sigma_r), renormalised over the
    in-image neighbours at borders.
    """
    params = params or JbfParams()
    guide = np.asarray(guide, dtype=np.float64)
    if guide.shape != (cube.lines, cube.samples):
        raise ShapeMismatchError(
            f"guide shape {guide.shape} does not match cube "
            f"({cube.lines}, {cube.samples})"
        )
    hr, hc = params.half_widths
    filtered = joint_bilateral(cube.bsq_view(), guide, params.sigma_d,
                               params.sigma_r, hr, hc, backend=backend)
    step = (f"jbf(sigma_d={params.sigma_d},sigma_r={params.sigma_r},"
            f"window={params.window[0]}x{params.window[1]})")
    return cube.derive(np.moveaxis(filtered, 0, 2), step=step)


def default_sigma_r(guide: np.ndarray, fraction: float = 0.1) -> float:
    """Range scale as a fraction of the guide's dynamic range."""
    lo = np.nanmin(guide)
    hi = np.nanmax(guide)
    span = float(hi - lo)
    return fraction * span if span > 0 else fraction

"""Damage detection: saliency map, thresholding, connected regions and
moment-ellipse shape features (roundness and major/minor axis ratio).

The saliency stage is a deliberately simple, fully documented anomaly
score: Gaussian-smooth the guide, take absolute deviation from the image
median, rescale by the 99.5th percentile of the deviations and clip to
[0, 1].  It favours determinism and zero tuning over sophistication.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np
from scipy import ndimage

from .cube import Hypercube
from .errors import ShapeMismatchError
from .preprocess import JbfParams, default_sigma_r, joint_bilateral_filter, pca

EIGHT_CONNECTED = np.ones((3, 3), dtype=bool)


@dataclass(frozen=True)
class SaliencyMap:
    """Per-pixel damage likelihood in [0, 1]."""

    values: np.ndarray
    source: str = ""

    def __post_init__(self):
        v = np.asarray(self.values, dtype=np.float64)
        if not np.isfinite(v).all():
            raise ValueError("saliency map must be finite")
        if v.min() < 0 or v.max() > 1:
            raise ValueError("saliency values must lie in [0, 1]")
        v.flags.writeable = False
        object.__setattr__(self, "values", v)


@dataclass(frozen=True)
class BinaryMask:
    """Thresholded segmentation of a saliency map."""

    values: np.ndarray
    threshold_used: float = float("nan")

    def __post_init__(self):
        v = np.asarray(self.values, dtype=bool)
        v.flags.writeable = False
        object.__setattr__(self, "values", v)

    @property
    def shape(self):
        return self.values.shape


def saliency_map(guide: np.ndarray, smooth_sigma: float = 2.0,
                 rescale_percentile: float = 99.5,
                 source: str = "") -> SaliencyMap:
    """Median-deviation saliency of a 2-D guide image.

    Constant images map to all zeros.  Smoothing uses a reflected border.
    """
    g = np.asarray(guide, dtype=np.float64)
    if g.ndim != 2:
        raise ValueError(f"guide must be 2-D, got shape {g.shape}")
    if not np.isfinite(g).all():
        raise ValueError("guide contains non-finite values")
    smoothed = ndimage.gaussian_filter(g, sigma=smooth_sigma, mode="reflect")
    deviation = np.abs(smoothed - np.median(smoothed))
    scale = np.percentile(deviation, rescale_percentile)
    if scale <= 0:
        values = np.zeros_like(g)
    else:
        values = np.clip(deviation / scale, 0.0, 1.0)
    return SaliencyMap(values=values, source=source)


def otsu_threshold(values: np.ndarray, nbins: int = 256) -> float:
    """Threshold maximising between-class variance over an nbins histogram."""
    hist, edges = np.histogram(values, bins=nbins, range=(0.0, 1.0))
    hist = hist.astype(np.float64)
    total = hist.sum()
    if total == 0:
        return 0.0
    prob = hist / total
    omega = np.cumsum(prob)
    centers = (edges[:-1] + edges[1:]) / 2.0
    mu = np.cumsum(prob * centers)
    mu_total = mu[-1]
    with np.errstate(invalid="ignore", divide="ignore"):
        between = (mu_total * omega - mu) ** 2 / (omega * (1.0 - omega))
    between[~np.isfinite(between)] = -1.0
    best = int(np.argmax(between))  # first maximum: lowest threshold on ties
    return float(edges[best + 1])


def threshold_mask(smap: SaliencyMap, policy: str = "fixed",
                   t: float | None = None) -> BinaryMask:
    """Hard-threshold a saliency map (mask = map >= t).

    policy "fixed" uses t (default 0.5); "otsu" picks t by maximising
    between-class variance over a 256-bin histogram.
    """
    if policy == "fixed":
        t = 0.5 if t is None else float(t)
        if not (0.0 <= t <= 1.0):
            raise ValueError(f"fixed threshold {t} outside [0, 1]")
    elif policy == "otsu":
        t = otsu_threshold(smap.values)
    else:
        raise ValueError(f"unknown threshold policy {policy!r}")
    return BinaryMask(values=smap.values >= t, threshold_used=t)


def extract_regions(mask: BinaryMask, min_area: int = 0) -> list[np.ndarray]:
    """8-connected components as (n, 2) pixel-index arrays.

    Components smaller than ``min_area`` are dropped; the returned order
    is deterministic (row-major position of each region's first pixel).
    """
    labels, count = ndimage.label(mask.values, structure=EIGHT_CONNECTED)
    regions = []
    for lab in range(1, count + 1):
        pixels = np.argwhere(labels == lab)
        if len(pixels) >= max(min_area, 1):
            regions.append(pixels)
    regions.sort(key=lambda px: (int(px[0, 0]), int(px[0, 1])))
    return regions


@dataclass(frozen=True)
class RegionFeatures:
    """Shape descriptors of one connected region."""

    label: int
    area: int
    perimeter: float
    centroid: tuple[float, float]
    major_axis: float
    minor_axis: float
    orientation: float
    roundness: float
    rmm: float


_TRACE_DIRS = ((0, -1), (-1, -1), (-1, 0), (-1, 1),
               (0, 1), (1, 1), (1, 0), (1, -1))


def _boundary_chain(mask: np.ndarray, start: tuple[int, int]) -> list[int]:
    """Freeman chain code of the outer boundary (Moore tracing).

    ``start`` must be the region's row-major first pixel, so its west
    neighbour is background.  Stops when the initial move repeats from
    the start pixel.
    """
    nrows, ncols = mask.shape

    def _next(cur, entry):
        for k in range(8):
            idx = (entry + 1 + k) % 8
            dr, dc = _TRACE_DIRS[idx]
            p = (cur[0] + dr, cur[1] + dc)
            if 0 <= p[0] < nrows and 0 <= p[1] < ncols and mask[p]:
                return idx, p
        return None, None

    first_idx, first_pix = _next(start, 0)
    if first_idx is None:
        return []  # isolated pixel
    codes = [first_idx]
    cur, entry = first_pix, _TRACE_DIRS.index(
        (-_TRACE_DIRS[first_idx][0], -_TRACE_DIRS[first_idx][1]))
    limit = 8 * mask.size + 8
    while len(codes) < limit:
        idx, nxt = _next(cur, entry)
        if cur == start and idx == first_idx:
            break
        codes.append(idx)
        entry = _TRACE_DIRS.index((-_TRACE_DIRS[idx][0], -_TRACE_DIRS[idx][1]))
        cur = nxt
    return codes


def _chain_perimeter(codes: list[int]) -> float:
    """Corner-corrected chain-code length (Vossepoel-Smeulders weights)."""
    if not codes:
        return 4.0  # unit pixel square
    odd = sum(1 for c in codes if c % 2)
    even = len(codes) - odd
    corners = sum(1 for a, b in zip(codes, codes[1:] + codes[:1]) if a != b)
    return 0.980 * even + 1.406 * odd - 0.091 * corners


def region_perimeter(pixels: np.ndarray) -> float:
    """Outer-boundary perimeter of an 8-connected pixel set.

    Clamped from below at the isoperimetric minimum 2*sqrt(pi*area) so
    discretisation alone can never report a region rounder than a disk.
    """
    pixels = np.asarray(pixels)
    r0, c0 = pixels.min(axis=0)
    local = pixels - [r0, c0]
    h, w = local.max(axis=0) + 1
    mask = np.zeros((h, w), dtype=bool)
    mask[local[:, 0], local[:, 1]] = True
    order = np.lexsort((local[:, 1], local[:, 0]))
    start = tuple(local[order[0]])
    chain = _chain_perimeter(_boundary_chain(mask, start))
    return max(chain, 2.0 * math.sqrt(math.pi * len(pixels)))


def region_features(pixels: np.ndarray, label: int = 0) -> RegionFeatures:
    """Area, perimeter, moment-ellipse axes, roundness and axis ratio.

    Second central moments carry the +1/12 per-pixel (unit square)
    correction, which keeps single-pixel and thin regions well-defined;
    axis lengths are 4*sqrt(eigenvalue), matching an ellipse with the
    same normalised second central moments.
    """
    pixels = np.asarray(pixels, dtype=np.int64)
    if pixels.ndim != 2 or pixels.shape[1] != 2 or len(pixels) == 0:
        raise ValueError("region must be a non-empty (n, 2) pixel array")
    area = len(pixels)
    centroid = pixels.mean(axis=0)
    d = pixels - centroid
    m20 = float(np.mean(d[:, 0] ** 2)) + 1.0 / 12.0
    m02 = float(np.mean(d[:, 1] ** 2)) + 1.0 / 12.0
    m11 = float(np.mean(d[:, 0] * d[:, 1]))
    t = 0.5 * (m20 + m02)
    det = math.hypot(0.5 * (m20 - m02), m11)
    lam1, lam2 = t + det, t - det
    major = 4.0 * math.sqrt(lam1)
    minor = 4.0 * math.sqrt(lam2)
    perimeter = region_perimeter(pixels)
    # the perimeter floor bounds this at 1; clamp float overshoot
    roundness = min(4.0 * math.pi * area / perimeter ** 2, 1.0)
    orientation = 0.5 * math.atan2(2.0 * m11, m20 - m02)
    return RegionFeatures(
        label=label, area=area, perimeter=perimeter,
        centroid=(float(centroid[0]), float(centroid[1])),
        major_axis=major, minor_axis=minor, orientation=orientation,
        roundness=roundness, rmm=major / minor,
    )


def suppress_background(plane: np.ndarray, percentile: float = 75.0
                        ) -> np.ndarray:
    """Clamp values below the given percentile, then rescale to [0, 1]."""
    p = np.asarray(plane, dtype=np.float64)
    if not np.isfinite(p).all():
        raise ValueError("feature plane contains non-finite values")
    if not (0.0 <= percentile < 100.0):
        raise ValueError("percentile must be in [0, 100)")
    floor = np.percentile(p, percentile)
    clamped = np.maximum(p, floor)
    span = clamped.max() - clamped.min()
    if span <= 0:
        return np.zeros_like(p)
    return (clamped - clamped.min()) / span


@dataclass(frozen=True)
class DetectConfig:
    """Knobs of the multi-stage detection pipeline."""

    jbf: JbfParams | None = None
    sigma_r_fraction: float = 0.1
    pca_components: int = 1
    threshold_policy: str = "fixed"
    threshold: float | None = None
    min_area: int = 8
    smooth_sigma: float = 2.0
    rescale_percentile: float = 99.5
    backend: str | None = None


@dataclass(frozen=True)
class DetectionResult:
    """Mask + features with every intermediate retrievable."""

    mask: BinaryMask
    features: list[RegionFeatures]
    guide: np.ndarray = field(repr=False)
    filtered: Hypercube = field(repr=False)
    pc1: np.ndarray = field(repr=False)
    saliency: SaliencyMap = field(repr=False)
    regions: list[np.ndarray] = field(repr=False)


def detect_damage(cube: Hypercube, config: DetectConfig | None = None
                  ) -> DetectionResult:
    """Run the full detection chain on a calibrated cube.

    Stages: PC1 guide -> joint bilateral filter -> PCA of the filtered
    cube -> saliency of PC1 -> hard threshold -> 8-connected regions ->
    per-region shape features.
    """
    config = config or DetectConfig()
    _, guide_feat = pca(cube, 1)
    guide = guide_feat.values[:, :, 0].copy()
    dead = ~np.isfinite(guide)
    if dead.any():
        guide[dead] = np.nanmedian(guide)

    params = config.jbf
    if params is None:
        params = JbfParams(
            sigma_d=2.0,
            sigma_r=default_sigma_r(guide, config.sigma_r_fraction),
        )
    filtered = joint_bilateral_filter(cube, guide, params,
                                      backend=config.backend)

    _, feat = pca(filtered, config.pca_components)
    pc1 = feat.values[:, :, 0].copy()
    bad = ~np.isfinite(pc1)
    if bad.any():
        pc1[bad] = np.nanmedian(pc1)

    smap = saliency_map(pc1, smooth_sigma=config.smooth_sigma,
                        rescale_percentile=config.rescale_percentile,
                        source="pc1:" + ";".join(feat.provenance))
    mask = threshold_mask(smap, policy=config.threshold_policy,
                          t=config.threshold)
    regions = extract_regions(mask, min_area=config.min_area)
    features = [region_features(px, label=k) for k, px in enumerate(regions, 1)]
    return DetectionResult(mask=mask, features=features, guide=guide,
                           filtered=filtered, pc1=pc1, saliency=smap,
                           regions=regions)

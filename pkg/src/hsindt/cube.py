"""Hypercube data model.

A :class:`Hypercube` is an immutable I x J x B volume (scan lines x
samples per line x spectral bands) with an optional wavelength axis and
an append-only provenance trail.  Values are always float64; dead sensor
positions are carried as NaN so downstream statistics can skip them.

The backing buffer is band-sequential (one contiguous I x J plane per
band); ``values`` exposes it as an (I, J, B) view so code indexes
``values[i, j, b]`` while band slicing stays contiguous.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

KIND_RAW = "raw-radiance"
KIND_REFLECTANCE = "reflectance"
KIND_SNV = "snv-corrected"
KIND_FEATURE = "feature"

_KIND_ORDER = {KIND_RAW: 0, KIND_REFLECTANCE: 1, KIND_SNV: 2}
VALID_KINDS = (KIND_RAW, KIND_REFLECTANCE, KIND_SNV, KIND_FEATURE)


def _canonical(values) -> np.ndarray:
    """Return an (I, J, B) float64 view over a band-sequential buffer."""
    v = np.asarray(values, dtype=np.float64)
    if v.ndim != 3:
        raise ValueError(f"cube values must be 3-D, got shape {v.shape}")
    bsq = np.ascontiguousarray(np.moveaxis(v, 2, 0))  # (B, I, J)
    view = bsq.transpose(1, 2, 0)
    view.flags.writeable = False
    return view


@dataclass(frozen=True)
class Hypercube:
    """Immutable hyperspectral volume with provenance."""

    values: np.ndarray
    wavelengths: np.ndarray | None = None
    kind: str = KIND_RAW
    provenance: tuple[str, ...] = field(default_factory=tuple)

    def __post_init__(self):
        object.__setattr__(self, "values", _canonical(self.values))
        i, j, b = self.values.shape
        if min(i, j, b) < 1:
            raise ValueError("all cube dimensions must be >= 1")
        if self.kind not in VALID_KINDS:
            raise ValueError(f"unknown cube kind {self.kind!r}")
        if self.wavelengths is not None:
            wl = np.array(self.wavelengths, dtype=np.float64)
            wl.flags.writeable = False
            if wl.ndim != 1 or wl.size != b:
                raise ValueError(
                    f"wavelength axis has {wl.size} entries for {b} bands"
                )
            if wl.size > 1 and not np.all(np.diff(wl) > 0):
                raise ValueError("wavelengths must be strictly increasing")
            object.__setattr__(self, "wavelengths", wl)
        object.__setattr__(self, "provenance", tuple(self.provenance))

    @property
    def lines(self) -> int:
        return self.values.shape[0]

    @property
    def samples(self) -> int:
        return self.values.shape[1]

    @property
    def bands(self) -> int:
        return self.values.shape[2]

    @property
    def shape(self) -> tuple[int, int, int]:
        return self.values.shape

    def bsq_view(self) -> np.ndarray:
        """(B, I, J) view over the contiguous band-sequential buffer."""
        return self.values.transpose(2, 0, 1)

    def derive(self, values, *, kind: str | None = None,
               wavelengths="inherit", step: str = "") -> "Hypercube":
        """New cube derived from this one, appending a provenance step.

        ``kind`` transitions must be monotone along the pipeline
        (raw-radiance -> reflectance -> snv-corrected); feature cubes may
        derive from any kind.
        """
        new_kind = self.kind if kind is None else kind
        if new_kind != KIND_FEATURE and self.kind != KIND_FEATURE:
            if _KIND_ORDER[new_kind] < _KIND_ORDER[self.kind]:
                raise ValueError(
                    f"kind transition {self.kind} -> {new_kind} goes backwards"
                )
        if isinstance(wavelengths, str) and wavelengths == "inherit":
            wl = self.wavelengths
        else:
            wl = wavelengths
        prov = self.provenance + ((step,) if step else ())
        return Hypercube(values, wavelengths=wl, kind=new_kind, provenance=prov)

    def band_index(self, wavelength_nm: float) -> int:
        """Nearest band to a wavelength; exact midpoint ties go lower."""
        if self.wavelengths is None:
            raise ValueError("cube has no wavelength axis")
        wl = self.wavelengths
        if not (wl[0] <= wavelength_nm <= wl[-1]):
            raise ValueError(
                f"{wavelength_nm} nm outside axis [{wl[0]}, {wl[-1]}]"
            )
        dist = np.abs(wl - wavelength_nm)
        return int(np.argmin(dist))  # argmin takes the first (lower) minimum

    def slice_band(self, b: int | None = None, *,
                   wavelength_nm: float | None = None) -> np.ndarray:
        """I x J plane at band index ``b`` or nearest to ``wavelength_nm``."""
        if (b is None) == (wavelength_nm is None):
            raise ValueError("give exactly one of band index or wavelength")
        if wavelength_nm is not None:
            b = self.band_index(wavelength_nm)
        if not (0 <= b < self.bands):
            raise IndexError(f"band {b} out of range [0, {self.bands})")
        return self.values[:, :, b]

    def spectrum_at(self, i: int, j: int) -> np.ndarray:
        """Length-B spectral vector of pixel (i, j)."""
        if not (0 <= i < self.lines and 0 <= j < self.samples):
            raise IndexError(f"pixel ({i}, {j}) outside {self.lines}x{self.samples}")
        return np.ascontiguousarray(self.values[i, j, :])

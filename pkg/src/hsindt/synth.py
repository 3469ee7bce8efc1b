"""Synthetic push-broom scanner and scene generator.

Fabricates raw radiance cubes, matching dark/white reference frames and
exact ground-truth masks so every pipeline stage can be verified end to
end.  The forward model is

    raw(i,j,b) = illum(j) * gain(j,b) * refl(i,j,b) + dark(j,b) + noise

with the white frame recording a unit reflector under the same
illumination/gain and the dark frame the same dark counts, so
calibration inverts the model exactly for noiseless scenes.

Material spectra are parametric (baseline plus a few Gaussian bumps),
not measured data; the bundled presets only honour qualitative orderings
of typical composite/metal surfaces.
"""

from __future__ import annotations

import math
import shlex
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from .cube import KIND_RAW, Hypercube
from .preprocess import CalibrationRefs


@dataclass(frozen=True)
class MaterialSignature:
    """Reflectance spectrum built from a baseline plus Gaussian bumps."""

    name: str
    baseline: float
    bumps: tuple[tuple[float, float, float], ...] = ()  # (centre, width, amp)

    def reflectance(self, wavelengths_nm: np.ndarray) -> np.ndarray:
        wl = np.asarray(wavelengths_nm, dtype=np.float64)
        r = np.full_like(wl, self.baseline)
        for centre, width, amp in self.bumps:
            r = r + amp * np.exp(-0.5 * ((wl - centre) / width) ** 2)
        return r

    def validate(self, wavelengths_nm: np.ndarray):
        r = self.reflectance(wavelengths_nm)
        if r.min() <= 0.0 or r.max() >= 1.2:
            raise ValueError(
                f"signature {self.name!r} leaves (0, 1.2): "
                f"range [{r.min():.3f}, {r.max():.3f}]"
            )


# Qualitative presets: grinding brightest in 1333-1600 nm, the grinding
# defect in between, normal surfaces lowest there; the adhesive and
# aluminium-normal pair crosses at (1000 + 1294) / 2 = 1147 nm by
# symmetry of their equal-width, equal-amplitude bumps.
PRESETS = {
    "cfrp-normal": MaterialSignature("cfrp-normal", 0.22,
                                     ((1150.0, 200.0, 0.06),)),
    "cfrp-adhesive": MaterialSignature("cfrp-adhesive", 0.40,
                                       ((1050.0, 120.0, 0.14),)),
    "al-normal": MaterialSignature("al-normal", 0.45,
                                   ((1294.0, 90.0, 0.12),)),
    "al-adhesive": MaterialSignature("al-adhesive", 0.45,
                                     ((1000.0, 90.0, 0.12),)),
    "grinding": MaterialSignature("grinding", 0.55, ((1450.0, 150.0, 0.30),)),
    "grinding-defect": MaterialSignature("grinding-defect", 0.45,
                                         ((1450.0, 150.0, 0.15),)),
}


@dataclass(frozen=True)
class DamageSpec:
    """One damaged area: an ellipse or a bar, as a reflectance multiplier.

    ``a_px``/``b_px`` are ellipse semi-axes; bars use full length/width.
    ``orientation`` is radians counter-clockwise from the row axis.
    """

    shape: str  # "ellipse" | "bar"
    center: tuple[float, float]
    a_px: float = 0.0
    b_px: float = 0.0
    length_px: float = 0.0
    width_px: float = 0.0
    orientation: float = 0.0
    effect: float = 0.6

    def __post_init__(self):
        if self.shape not in ("ellipse", "bar"):
            raise ValueError(f"unknown damage shape {self.shape!r}")
        if self.effect <= 0:
            raise ValueError("damage effect multiplier must be > 0")

    def rasterize(self, lines: int, samples: int) -> np.ndarray:
        rr, cc = np.mgrid[0:lines, 0:samples]
        dr = rr - self.center[0]
        dc = cc - self.center[1]
        cos_t, sin_t = math.cos(self.orientation), math.sin(self.orientation)
        u = dr * cos_t + dc * sin_t
        v = -dr * sin_t + dc * cos_t
        if self.shape == "ellipse":
            mask = (u / self.a_px) ** 2 + (v / self.b_px) ** 2 <= 1.0
        else:
            mask = (np.abs(u) <= self.length_px / 2.0) & \
                   (np.abs(v) <= self.width_px / 2.0)
        if not mask.any():
            raise ValueError("damage rasterizes to zero pixels")
        if mask[0, :].any() or mask[-1, :].any() or \
                mask[:, 0].any() or mask[:, -1].any():
            raise ValueError("damage touches the scene border")
        return mask


@dataclass(frozen=True)
class SceneSpec:
    """Full description of a synthetic scene and its acquisition model."""

    lines: int = 128
    samples: int = 128
    wavelength_start: float = 950.0
    wavelength_step: float = 10.0
    bands: int = 76
    material: str = "cfrp-normal"
    material_map: np.ndarray | None = None  # int ids into `materials`
    materials: tuple[str, ...] = ()
    damages: tuple[DamageSpec, ...] = ()
    illumination: tuple[float, float] = (1.0, 1.0)  # ramp across samples
    gain_variation: float = 0.05
    dark_level: float = 120.0
    white_level: float = 3600.0
    noise_sigma: float = 0.0
    shot_noise: bool = False
    seed: int = 0

    def __post_init__(self):
        if self.lines < 1 or self.samples < 1 or self.bands < 1:
            raise ValueError("scene dimensions must be >= 1")
        if self.material_map is not None:
            m = np.asarray(self.material_map, dtype=np.int64)
            if m.shape != (self.lines, self.samples):
                raise ValueError("material_map shape does not match scene")
            if not self.materials:
                raise ValueError("material_map requires a materials list")
            if m.min() < 0 or m.max() >= len(self.materials):
                raise ValueError("material_map ids out of range")
            object.__setattr__(self, "material_map", m)

    @property
    def wavelengths(self) -> np.ndarray:
        return self.wavelength_start + \
            self.wavelength_step * np.arange(self.bands)


@dataclass(frozen=True)
class SceneResult:
    """Raw cube, calibration references and exact ground truth."""

    raw: Hypercube
    refs: CalibrationRefs
    truth_masks: tuple[np.ndarray, ...]
    truth: np.ndarray
    reflectance: np.ndarray = field(repr=False)


def _material_names(spec: SceneSpec) -> list[str]:
    return list(spec.materials) if spec.material_map is not None \
        else [spec.material]


def _signature(name: str) -> MaterialSignature:
    try:
        return PRESETS[name]
    except KeyError:
        raise ValueError(
            f"unknown material {name!r}; presets: {sorted(PRESETS)}"
        ) from None


def reflectance_field(spec: SceneSpec) -> np.ndarray:
    """(I, J, B) reflectance of materials with damage modulation applied."""
    wl = spec.wavelengths
    if spec.material_map is None:
        sig = _signature(spec.material)
        sig.validate(wl)
        refl = np.broadcast_to(sig.reflectance(wl),
                               (spec.lines, spec.samples, spec.bands)).copy()
    else:
        refl = np.empty((spec.lines, spec.samples, spec.bands))
        for idx, name in enumerate(spec.materials):
            sig = _signature(name)
            sig.validate(wl)
            refl[spec.material_map == idx] = sig.reflectance(wl)

    masks = [d.rasterize(spec.lines, spec.samples) for d in spec.damages]
    for i, (da, ma) in enumerate(zip(spec.damages, masks)):
        for db, mb in zip(spec.damages[i + 1:], masks[i + 1:]):
            if (ma & mb).any() and da.effect != db.effect:
                raise ValueError(
                    "overlapping damages with conflicting effects"
                )
    for d, m in zip(spec.damages, masks):
        refl[m] = refl[m] * d.effect
    return refl


def _gain_dark(spec: SceneSpec) -> tuple[np.ndarray, np.ndarray]:
    """Fixed-pattern sensor response, deterministic in the scene seed."""
    rng = np.random.default_rng([spec.seed, 17])
    shape = (spec.samples, spec.bands)
    gain = spec.white_level * (
        1.0 + spec.gain_variation * rng.uniform(-1.0, 1.0, size=shape))
    dark = spec.dark_level * (
        1.0 + 0.02 * rng.uniform(-1.0, 1.0, size=shape))
    return gain, dark


def _illumination(spec: SceneSpec) -> np.ndarray:
    lo, hi = spec.illumination
    return np.linspace(lo, hi, spec.samples)


def calibration_refs(spec: SceneSpec) -> CalibrationRefs:
    """Dark and white frames from the scene's sensor/illumination model."""
    gain, dark = _gain_dark(spec)
    illum = _illumination(spec)
    white = illum[:, None] * gain + dark
    return CalibrationRefs(dark=dark, white=white)


def _line_noise(spec: SceneSpec, line: int, signal: np.ndarray,
                scale: np.ndarray) -> np.ndarray:
    """Per-line noise from an independent, deterministically derived stream."""
    if spec.noise_sigma <= 0:
        return np.zeros_like(signal)
    rng = np.random.default_rng([spec.seed, 1000003, line])
    n = rng.normal(0.0, spec.noise_sigma, size=signal.shape) * scale
    if spec.shot_noise:
        n = n * np.sqrt(np.maximum(signal, 0.0))
    return n


def _acquire(spec: SceneSpec, refl_lines: np.ndarray) -> Hypercube:
    """Apply the sensor model to per-line reflectance samples."""
    gain, dark = _gain_dark(spec)
    illum = _illumination(spec)
    resp = illum[:, None] * gain  # (J, B): white - dark
    raw = refl_lines * resp[None, :, :] + dark[None, :, :]
    for i in range(raw.shape[0]):
        raw[i] += _line_noise(spec, i, refl_lines[i], resp)
    return Hypercube(raw, wavelengths=spec.wavelengths, kind=KIND_RAW,
                     provenance=(f"synth(seed={spec.seed})",))


def generate_scene(spec: SceneSpec) -> SceneResult:
    """Raw cube + references + exact truth for a static scene."""
    refl = reflectance_field(spec)
    raw = _acquire(spec, refl)
    masks = tuple(d.rasterize(spec.lines, spec.samples) for d in spec.damages)
    combined = np.zeros((spec.lines, spec.samples), dtype=bool)
    for m in masks:
        combined |= m
    return SceneResult(raw=raw, refs=calibration_refs(spec),
                       truth_masks=masks, truth=combined, reflectance=refl)


def pushbroom_scan(spec: SceneSpec, speed_mm_s: float = 16.0,
                   line_rate_hz: float = 49.6, path_length_mm: float = 200.0,
                   tilt_deg: float = 0.0) -> Hypercube:
    """Simulate a push-broom scan over the continuous scene model.

    Line count is floor(path * rate / speed).  A placing angle compresses
    the along-scan sampling: line k lands on scene row
    k * step / cos(tilt), where `step` maps the path length onto the
    scene's row extent.  Rows are sampled by linear interpolation
    (clamped at the scene edge).
    """
    if speed_mm_s <= 0 or line_rate_hz <= 0 or path_length_mm <= 0:
        raise ValueError("speed, line rate and path length must be positive")
    if not (0.0 <= tilt_deg < 90.0):
        raise ValueError("tilt must be in [0, 90) degrees")
    n_lines = int(path_length_mm * line_rate_hz / speed_mm_s)
    if n_lines < 1:
        raise ValueError("kinematics yield zero scan lines")

    refl = reflectance_field(spec)
    mm_per_line = speed_mm_s / line_rate_hz
    rows_per_mm = spec.lines / path_length_mm
    step = mm_per_line * rows_per_mm / math.cos(math.radians(tilt_deg))
    coords = np.arange(n_lines) * step
    coords = np.clip(coords, 0.0, spec.lines - 1.0)
    lo = np.clip(np.floor(coords).astype(int), 0, spec.lines - 2) \
        if spec.lines > 1 else np.zeros(n_lines, dtype=int)
    frac = (coords - lo).reshape(-1, 1, 1) if spec.lines > 1 \
        else np.zeros((n_lines, 1, 1))
    hi = np.minimum(lo + 1, spec.lines - 1)
    sampled = refl[lo] * (1.0 - frac) + refl[hi] * frac
    return _acquire(spec, sampled)


# ---------------------------------------------------------------------------
# text configuration schema (see README for the format)

def parse_scene_config(path) -> SceneSpec:
    """Parse the key/value scene description format.

    Plain ``key = value`` lines set scalar fields; each ``damage = ...``
    line appends one damage, e.g.::

        damage = ellipse center=40,60 a=12 b=10 orientation=0.3 effect=0.6
        damage = bar center=90,60 length=70 width=9 effect=0.6
    """
    scalars: dict[str, str] = {}
    damages: list[DamageSpec] = []
    for lineno, line in enumerate(Path(path).read_text().splitlines(), 1):
        line = line.strip()
        if not line or line.startswith("#"):
            continue
        key, _, value = line.partition("=")
        key = key.strip().lower()
        value = value.strip()
        if not value:
            raise ValueError(f"{path}:{lineno}: expected key = value")
        if key == "damage":
            damages.append(_parse_damage(value, f"{path}:{lineno}"))
        else:
            scalars[key] = value
    kwargs = {}
    int_keys = ("lines", "samples", "bands", "seed")
    float_keys = ("wavelength_start", "wavelength_step", "gain_variation",
                  "dark_level", "white_level", "noise_sigma")
    for key, value in scalars.items():
        if key in int_keys:
            kwargs[key] = int(value)
        elif key in float_keys:
            kwargs[key] = float(value)
        elif key == "material":
            kwargs[key] = value
        elif key == "shot_noise":
            kwargs[key] = value.lower() in ("1", "true", "yes")
        elif key == "illumination":
            lo, hi = value.split(",")
            kwargs[key] = (float(lo), float(hi))
        else:
            raise ValueError(f"{path}: unknown scene key {key!r}")
    return SceneSpec(damages=tuple(damages), **kwargs)


def _parse_damage(text: str, where: str) -> DamageSpec:
    tokens = shlex.split(text)
    if not tokens or tokens[0] not in ("ellipse", "bar"):
        raise ValueError(f"{where}: damage must start with ellipse|bar")
    shape = tokens[0]
    opts: dict[str, str] = {}
    for tok in tokens[1:]:
        k, _, v = tok.partition("=")
        opts[k] = v
    try:
        cr, cc = opts.pop("center").split(",")
        kwargs = dict(center=(float(cr), float(cc)),
                      effect=float(opts.pop("effect", "0.6")),
                      orientation=float(opts.pop("orientation", "0")))
        if shape == "ellipse":
            kwargs.update(a_px=float(opts.pop("a")), b_px=float(opts.pop("b")))
        else:
            kwargs.update(length_px=float(opts.pop("length")),
                          width_px=float(opts.pop("width")))
    except KeyError as exc:
        raise ValueError(f"{where}: missing damage option {exc}") from None
    if opts:
        raise ValueError(f"{where}: unknown damage options {sorted(opts)}")
    return DamageSpec(shape=shape, **kwargs)

"""Ordered multi-stage pipeline driven by a text configuration.

A pipeline file holds one stage per line: the stage name followed by
``key=value`` parameters, e.g.::

    calibrate refs=refs.npz
    snv mode=per-band
    jbf sigma_d=2 sigma_r=0.1
    pca k=3
    saliency
    threshold policy=otsu
    regions min_area=8
    evaluate truth=truth.pgm

Unknown stage names and stage orders violating the cube kind
transitions (e.g. ``snv`` before ``calibrate``) are rejected at parse
time.  Running a config writes every declared artifact under the output
directory and prints a one-line summary per stage.
"""

from __future__ import annotations

import shlex
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from . import detect as detect_mod
from . import geometry, preprocess, reports
from .cube import KIND_RAW, Hypercube
from .envi import read_envi, write_envi
from .errors import HsindtError, PipelineConfigError
from .evaluate import precision_recall
from .preprocess import CalibrationRefs, JbfParams
from .profiles import Roi, roi_profile

STAGES = ("calibrate", "bin", "snv", "jbf", "pca", "saliency", "threshold",
          "regions", "evaluate", "stitch", "tilt", "profile")

# minimum cube kind each stage requires and the kind it produces
_REQUIRES = {"calibrate": "raw-radiance", "snv": "reflectance"}
_PRODUCES = {"calibrate": "reflectance", "snv": "snv-corrected"}
_KIND_RANK = {"raw-radiance": 0, "reflectance": 1, "snv-corrected": 2}
# stages that only make sense once an earlier stage ran
_NEEDS_PRIOR = {"threshold": "saliency", "regions": "threshold",
                "evaluate": "threshold"}


@dataclass
class PipelineConfig:
    """Validated ordered stage list with parameters."""

    stages: list[tuple[str, dict[str, str]]]
    input_kind: str = KIND_RAW

    @classmethod
    def parse(cls, path, input_kind: str = KIND_RAW) -> "PipelineConfig":
        stages = []
        for lineno, line in enumerate(Path(path).read_text().splitlines(), 1):
            line = line.strip()
            if not line or line.startswith("#"):
                continue
            tokens = shlex.split(line)
            name = tokens[0]
            params = {}
            for tok in tokens[1:]:
                key, sep, value = tok.partition("=")
                if not sep:
                    raise PipelineConfigError(
                        f"{path}:{lineno}: expected key=value, got {tok!r}"
                    )
                params[key] = value
            stages.append((name, params))
        cfg = cls(stages=stages, input_kind=input_kind)
        cfg.validate()
        return cfg

    def validate(self):
        if not self.stages:
            raise PipelineConfigError("empty stage list")
        kind = self.input_kind
        seen = set()
        for name, _ in self.stages:
            if name not in STAGES:
                raise PipelineConfigError(f"unknown stage {name!r}")
            needed = _REQUIRES.get(name)
            if needed is not None and _KIND_RANK[kind] != _KIND_RANK[needed]:
                raise PipelineConfigError(
                    f"stage {name!r} requires a {needed} cube but the "
                    f"pipeline carries {kind} here"
                )
            prior = _NEEDS_PRIOR.get(name)
            if prior is not None and prior not in seen:
                raise PipelineConfigError(
                    f"stage {name!r} requires an earlier {prior!r} stage"
                )
            kind = _PRODUCES.get(name, kind)
            seen.add(name)


@dataclass
class PipelineContext:
    """Mutable state threaded through the stages."""

    cube: Hypercube | None = None
    out_dir: Path = Path(".")
    saliency: detect_mod.SaliencyMap | None = None
    mask: detect_mod.BinaryMask | None = None
    regions: list[np.ndarray] = field(default_factory=list)
    features: list[detect_mod.RegionFeatures] = field(default_factory=list)
    guide: np.ndarray | None = None
    eval_result = None


def load_refs(path) -> CalibrationRefs:
    data = np.load(path)
    return CalibrationRefs(dark=data["dark"], white=data["white"])


def save_refs(refs: CalibrationRefs, path) -> Path:
    path = Path(path)
    if path.suffix != ".npz":
        path = path.with_suffix(".npz")
    np.savez(path, dark=refs.dark, white=refs.white)
    return path


def _parse_roi(text: str) -> Roi:
    name, _, rect = text.partition(":")
    r0, c0, nr, nc = (int(v) for v in rect.split(","))
    return Roi(name=name, rect=(r0, c0, nr, nc))


def _maybe_save(ctx: PipelineContext, params: dict):
    if "save" in params:
        write_envi(ctx.cube, ctx.out_dir / params["save"])


def run(config: PipelineConfig, cube: Hypercube, out_dir,
        log=print) -> PipelineContext:
    """Execute the stages in order; raises HsindtError on stage failure."""
    ctx = PipelineContext(cube=cube, out_dir=Path(out_dir))
    ctx.out_dir.mkdir(parents=True, exist_ok=True)
    for name, params in config.stages:
        handler = _HANDLERS[name]
        try:
            summary = handler(ctx, params)
            _maybe_save(ctx, params)
        except Exception as exc:
            raise HsindtError(f"stage {name!r} failed: {exc}") from exc
        log(f"[{name}] {summary}")
    return ctx


def _stage_calibrate(ctx, params):
    refs = load_refs(params["refs"])
    ctx.cube = preprocess.calibrate(ctx.cube, refs)
    return f"{ctx.cube.shape} reflectance, {int(refs.dead_mask.sum())} dead"


def _stage_bin(ctx, params):
    n = int(params.get("spatial", 1))
    m = int(params.get("spectral", 1))
    ctx.cube = preprocess.bin_cube(ctx.cube, n, m)
    return f"binned ({n},{m}) -> {ctx.cube.shape}"


def _stage_snv(ctx, params):
    mode = params.get("mode", preprocess.SNV_PER_BAND)
    ctx.cube, _ = preprocess.snv_correct(ctx.cube, mode)
    return f"snv mode={mode}"


def _stage_jbf(ctx, params):
    if ctx.guide is None:
        _, feat = preprocess.pca(ctx.cube, 1)
        ctx.guide = feat.values[:, :, 0]
    sigma_d = float(params.get("sigma_d", 2.0))
    if "sigma_r" in params:
        sigma_r = float(params["sigma_r"])
    else:
        sigma_r = preprocess.default_sigma_r(ctx.guide)
    jbf = JbfParams(sigma_d=sigma_d, sigma_r=sigma_r,
                    legacy_window=params.get("legacy_window") == "1")
    ctx.cube = preprocess.joint_bilateral_filter(ctx.cube, ctx.guide, jbf)
    return f"jbf sigma_d={sigma_d} sigma_r={reports.fmt(sigma_r)}"


def _stage_pca(ctx, params):
    k = int(params.get("k", 1))
    model, feat = preprocess.pca(ctx.cube, k)
    ctx.guide = feat.values[:, :, 0]
    ctx.cube = feat
    ev = reports.fmt(model.explained_variance[0])
    return f"pca k={k} ev1={ev}"


def _stage_saliency(ctx, params):
    plane = ctx.guide if ctx.guide is not None else ctx.cube.values[:, :, 0]
    plane = np.where(np.isfinite(plane), plane,
                     np.nanmedian(plane))
    ctx.saliency = detect_mod.saliency_map(
        plane,
        smooth_sigma=float(params.get("smooth_sigma", 2.0)),
        rescale_percentile=float(params.get("percentile", 99.5)),
    )
    return f"saliency max={reports.fmt(ctx.saliency.values.max())}"


def _stage_threshold(ctx, params):
    policy = params.get("policy", "fixed")
    t = float(params["t"]) if "t" in params else None
    ctx.mask = detect_mod.threshold_mask(ctx.saliency, policy=policy, t=t)
    reports.write_pgm(ctx.mask, ctx.out_dir / "mask.pgm")
    reports.write_mask_envi(ctx.mask, ctx.out_dir / "mask")
    return (f"threshold={reports.fmt(ctx.mask.threshold_used)} "
            f"pixels={int(ctx.mask.values.sum())}")


def _stage_regions(ctx, params):
    min_area = int(params.get("min_area", 8))
    ctx.regions = detect_mod.extract_regions(ctx.mask, min_area=min_area)
    ctx.features = [detect_mod.region_features(px, label=k)
                    for k, px in enumerate(ctx.regions, 1)]
    reports.write_region_csv(ctx.features, ctx.out_dir / "regions.csv")
    return f"{len(ctx.regions)} region(s)"


def _stage_evaluate(ctx, params):
    truth = reports.read_pgm(params["truth"])
    res = precision_recall(ctx.mask, truth)
    ctx.eval_result = res
    reports.write_eval_csv([("sample", params.get("impactor", ""), res)],
                           None, ctx.out_dir / "evaluation.csv")
    return (f"precision={reports.fmt(res.precision)} "
            f"recall={reports.fmt(res.recall)}")


def _stage_stitch(ctx, params):
    other = read_envi(params["with"],
                      params.get("with_data"))
    spec = geometry.StitchSpec(overlap=int(params.get("overlap", 0)),
                               blend=params.get("blend", "average"))
    # a raw second scan joins a processed first: trust declared kind
    other = Hypercube(other.values, wavelengths=other.wavelengths,
                      kind=ctx.cube.kind, provenance=other.provenance)
    ctx.cube = geometry.stitch(ctx.cube, other, spec)
    return f"stitched -> {ctx.cube.shape}"


def _stage_tilt(ctx, params):
    spec = geometry.TiltSpec(theta_deg=float(params.get("theta", 0.0)))
    ctx.cube = geometry.tilt_correct(ctx.cube, spec)
    return f"tilt theta={spec.theta_deg} -> {ctx.cube.lines} lines"


def _stage_profile(ctx, params):
    rois = [_parse_roi(tok) for tok in params["roi"].split(";")]
    profs = [roi_profile(ctx.cube, roi) for roi in rois]
    reports.write_profile_csv(profs, ctx.out_dir / "profiles.csv")
    if params.get("png") == "1":
        reports.plot_profiles(profs, ctx.out_dir / "profiles.png")
    return f"{len(profs)} profile(s)"


_HANDLERS = {
    "calibrate": _stage_calibrate,
    "bin": _stage_bin,
    "snv": _stage_snv,
    "jbf": _stage_jbf,
    "pca": _stage_pca,
    "saliency": _stage_saliency,
    "threshold": _stage_threshold,
    "regions": _stage_regions,
    "evaluate": _stage_evaluate,
    "stitch": _stage_stitch,
    "tilt": _stage_tilt,
    "profile": _stage_profile,
}

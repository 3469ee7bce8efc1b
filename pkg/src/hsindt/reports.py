"""Report and artifact writers: region/evaluation CSV, PGM masks,
profile exports.  All floats are written with 6 significant digits so
re-runs produce byte-identical files."""

from __future__ import annotations

import csv
import json
from pathlib import Path

import numpy as np

from .cube import KIND_FEATURE, Hypercube
from .detect import BinaryMask, RegionFeatures
from .envi import write_envi
from .evaluate import EvalResult
from .profiles import SpectralProfile


def fmt(x: float) -> str:
    return f"{float(x):.6g}"


def write_region_csv(features: list[RegionFeatures], path) -> Path:
    path = Path(path)
    with path.open("w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(["label", "area", "perimeter", "centroid_row",
                         "centroid_col", "major", "minor", "orientation",
                         "roundness", "rmm"])
        for f in features:
            writer.writerow([f.label, f.area, fmt(f.perimeter),
                             fmt(f.centroid[0]), fmt(f.centroid[1]),
                             fmt(f.major_axis), fmt(f.minor_axis),
                             fmt(f.orientation), fmt(f.roundness),
                             fmt(f.rmm)])
    return path


def write_eval_csv(rows: list[tuple[str, str, EvalResult]],
                   overall: EvalResult | None, path) -> Path:
    """Per-sample precision/recall rows with an optional overall row last."""
    path = Path(path)
    with path.open("w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(["sample_id", "impactor_type", "precision", "recall"])
        for sample_id, impactor, res in rows:
            writer.writerow([sample_id, impactor,
                             fmt(res.precision), fmt(res.recall)])
        if overall is not None:
            writer.writerow(["overall", "",
                             fmt(overall.precision), fmt(overall.recall)])
    return path


def write_profile_csv(profiles: list[SpectralProfile], path) -> Path:
    """Long-format plot-ready CSV: one row per (roi, band)."""
    path = Path(path)
    with path.open("w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(["roi", "wavelength_nm", "mean", "std"])
        for p in profiles:
            wl = p.wavelengths if p.wavelengths is not None \
                else np.arange(p.mean.size)
            for w, m, s in zip(wl, p.mean, p.std):
                writer.writerow([p.name, fmt(w), fmt(m), fmt(s)])
    return path


def plot_profiles(profiles: list[SpectralProfile], path) -> Path:
    """Line chart with shaded +/- std bands (requires matplotlib)."""
    import matplotlib
    matplotlib.use("Agg")
    import matplotlib.pyplot as plt

    fig, ax = plt.subplots(figsize=(8, 5))
    for p in profiles:
        wl = p.wavelengths if p.wavelengths is not None \
            else np.arange(p.mean.size)
        line, = ax.plot(wl, p.mean, label=p.name or None)
        ax.fill_between(wl, p.mean - p.std, p.mean + p.std,
                        color=line.get_color(), alpha=0.2)
    ax.set_xlabel("wavelength (nm)")
    ax.set_ylabel("reflectance")
    if any(p.name for p in profiles):
        ax.legend()
    fig.tight_layout()
    fig.savefig(path, dpi=120)
    plt.close(fig)
    return Path(path)


def write_pgm(mask: BinaryMask | np.ndarray, path) -> Path:
    """Binary mask as binary PGM (P5), foreground = 255."""
    values = mask.values if isinstance(mask, BinaryMask) else \
        np.asarray(mask, dtype=bool)
    path = Path(path)
    header = f"P5\n{values.shape[1]} {values.shape[0]}\n255\n"
    with path.open("wb") as fh:
        fh.write(header.encode("ascii"))
        fh.write((values.astype(np.uint8) * 255).tobytes())
    return path


def read_pgm(path) -> np.ndarray:
    """Read a binary PGM written by :func:`write_pgm` back as a bool mask."""
    blob = Path(path).read_bytes()
    fields = []
    pos = 0
    while len(fields) < 4:
        while pos < len(blob) and blob[pos:pos + 1].isspace():
            pos += 1
        if blob[pos:pos + 1] == b"#":
            pos = blob.index(b"\n", pos) + 1
            continue
        end = pos
        while end < len(blob) and not blob[end:end + 1].isspace():
            end += 1
        fields.append(blob[pos:end])
        pos = end
    pos += 1  # single whitespace after maxval
    if fields[0] != b"P5":
        raise ValueError(f"{path}: not a binary PGM")
    width, height = int(fields[1]), int(fields[2])
    data = np.frombuffer(blob, dtype=np.uint8, count=width * height,
                         offset=pos)
    return data.reshape(height, width) > 0


def write_mask_envi(mask: BinaryMask, path) -> tuple[Path, Path]:
    """Mask as a 1-band ENVI cube (u8, foreground = 1)."""
    cube = Hypercube(mask.values.astype(np.float64)[:, :, None],
                     kind=KIND_FEATURE,
                     provenance=(f"mask(threshold={mask.threshold_used})",))
    return write_envi(cube, path, interleave="bsq", data_type=1)


def eval_to_dict(res: EvalResult) -> dict:
    return {"tp": res.tp, "fp": res.fp, "fn": res.fn,
            "precision": float(fmt(res.precision)),
            "recall": float(fmt(res.recall)),
            "no_detections": res.no_detections,
            "empty_truth": res.empty_truth}


def write_json(obj, path) -> Path:
    path = Path(path)
    path.write_text(json.dumps(obj, indent=2, sort_keys=True) + "\n")
    return path

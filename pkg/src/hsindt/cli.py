"""Batch command-line front end.

Verbs: convert, calibrate, preprocess, detect, evaluate, stitch, tilt,
profile, synth and run (full pipeline from a config file).  Exit codes:
0 success, 1 stage/processing error, 2 configuration or usage error.
"""

from __future__ import annotations

import argparse
import dataclasses
import os
import sys
from pathlib import Path

import numpy as np

from . import detect as detect_mod
from . import geometry, pipeline, preprocess, reports, synth
from .cube import Hypercube
from .envi import read_envi, write_envi
from .errors import HsindtError, PipelineConfigError
from .evaluate import precision_recall
from .profiles import roi_profile

EXIT_OK = 0
EXIT_STAGE = 1
EXIT_CONFIG = 2


def _add_io(p, output=True):
    p.add_argument("--input", required=True, help="ENVI header path")
    p.add_argument("--data", help="ENVI binary path (default: .raw sibling)")
    if output:
        p.add_argument("--output", required=True, help="output base path")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="hsindt",
        description="Hyperspectral non-destructive testing toolkit",
    )
    parser.add_argument("--threads", type=int,
                        default=int(os.environ.get("HSINDT_THREADS", "1")),
                        help="worker hint (results are identical for any value)")
    parser.add_argument("--format", choices=("csv", "json"), default="csv")
    parser.add_argument("--seed", type=int, help="override scene seed")
    sub = parser.add_subparsers(dest="verb", required=True)

    p = sub.add_parser("convert", help="rewrite an ENVI pair")
    _add_io(p)
    p.add_argument("--interleave", choices=("bsq", "bil", "bip"),
                   default="bsq")
    p.add_argument("--data-type", type=int, default=5)

    p = sub.add_parser("calibrate", help="raw counts to reflectance")
    _add_io(p)
    p.add_argument("--refs", required=True, help="refs .npz (dark/white)")

    p = sub.add_parser("preprocess", help="bin / snv / jbf / pca chain")
    _add_io(p)
    p.add_argument("--refs", help="calibrate first using these refs")
    p.add_argument("--bin", help="spatial,spectral factors, e.g. 4,4")
    p.add_argument("--snv", choices=("per-band", "per-spectrum"))
    p.add_argument("--jbf", help="sigma_d,sigma_r")
    p.add_argument("--pca", type=int, help="keep k score planes")

    p = sub.add_parser("detect", help="damage detection on a calibrated cube")
    _add_io(p, output=False)
    p.add_argument("--refs", help="calibrate first using these refs")
    p.add_argument("--output-dir", required=True)
    p.add_argument("--policy", choices=("fixed", "otsu"), default="fixed")
    p.add_argument("--threshold", type=float)
    p.add_argument("--min-area", type=int, default=8)
    p.add_argument("--sigma-d", type=float, default=2.0)
    p.add_argument("--sigma-r", type=float)

    p = sub.add_parser("evaluate", help="score a mask against ground truth")
    p.add_argument("--detected", required=True, help="mask PGM")
    p.add_argument("--truth", required=True, help="truth PGM")
    p.add_argument("--output", help="write a report file")

    p = sub.add_parser("stitch", help="join two scans with a known overlap")
    _add_io(p)
    p.add_argument("--input2", required=True)
    p.add_argument("--data2")
    p.add_argument("--overlap", type=int, required=True)
    p.add_argument("--blend", choices=("average", "take-first"),
                   default="average")

    p = sub.add_parser("tilt", help="cosine-law tilt restoration")
    _add_io(p)
    p.add_argument("--theta", type=float, required=True)

    p = sub.add_parser("profile", help="ROI mean/std spectra")
    _add_io(p, output=False)
    p.add_argument("--output-dir", required=True)
    p.add_argument("--roi", action="append", required=True,
                   help="name:row0,col0,rows,cols (repeatable)")
    p.add_argument("--png", action="store_true")

    p = sub.add_parser("synth", help="generate a synthetic scene")
    p.add_argument("--scene", required=True, help="scene config file")
    p.add_argument("--output-dir", required=True)
    p.add_argument("--tilt", type=float, default=0.0,
                   help="scan with a placing angle instead of a static scene")

    p = sub.add_parser("run", help="run a pipeline config")
    _add_io(p, output=False)
    p.add_argument("--config", required=True)
    p.add_argument("--output-dir", required=True)
    return parser


def _read(args) -> Hypercube:
    return read_envi(args.input, args.data)


def _cmd_convert(args):
    cube = _read(args)
    hdr, raw = write_envi(cube, args.output, interleave=args.interleave,
                          data_type=args.data_type)
    print(f"wrote {hdr} + {raw}")


def _cmd_calibrate(args):
    cube = _read(args)
    refs = pipeline.load_refs(args.refs)
    out = preprocess.calibrate(cube, refs)
    write_envi(out, args.output)
    print(f"calibrated {out.shape} -> {args.output}")


def _cmd_preprocess(args):
    cube = _read(args)
    if args.refs:
        cube = preprocess.calibrate(cube, pipeline.load_refs(args.refs))
        print(f"[calibrate] {cube.shape}")
    if args.bin:
        n, m = (int(v) for v in args.bin.split(","))
        cube = preprocess.bin_cube(cube, n, m)
        print(f"[bin] -> {cube.shape}")
    if args.snv:
        cube, _ = preprocess.snv_correct(cube, args.snv)
        print(f"[snv] mode={args.snv}")
    if args.jbf:
        sd, sr = (float(v) for v in args.jbf.split(","))
        _, feat = preprocess.pca(cube, 1)
        cube = preprocess.joint_bilateral_filter(
            cube, feat.values[:, :, 0],
            preprocess.JbfParams(sigma_d=sd, sigma_r=sr))
        print(f"[jbf] sigma_d={sd} sigma_r={sr}")
    if args.pca:
        _, cube = preprocess.pca(cube, args.pca)
        print(f"[pca] k={args.pca}")
    write_envi(cube, args.output)
    print(f"wrote {args.output}")


def _cmd_detect(args):
    cube = _read(args)
    if args.refs:
        cube = preprocess.calibrate(cube, pipeline.load_refs(args.refs))
    jbf = None
    if args.sigma_r is not None:
        jbf = preprocess.JbfParams(sigma_d=args.sigma_d, sigma_r=args.sigma_r)
    config = detect_mod.DetectConfig(jbf=jbf,
                                     threshold_policy=args.policy,
                                     threshold=args.threshold,
                                     min_area=args.min_area)
    result = detect_mod.detect_damage(cube, config)
    out = Path(args.output_dir)
    out.mkdir(parents=True, exist_ok=True)
    reports.write_pgm(result.mask, out / "mask.pgm")
    reports.write_mask_envi(result.mask, out / "mask")
    reports.write_region_csv(result.features, out / "regions.csv")
    for f in result.features:
        print(f"region {f.label}: area={f.area} "
              f"roundness={reports.fmt(f.roundness)} rmm={reports.fmt(f.rmm)}")
    print(f"{len(result.features)} region(s) -> {out}")


def _cmd_evaluate(args):
    detected = reports.read_pgm(args.detected)
    truth = reports.read_pgm(args.truth)
    res = precision_recall(detected, truth)
    if args.format == "json":
        payload = reports.eval_to_dict(res)
        if args.output:
            reports.write_json(payload, args.output)
        print(payload)
    else:
        if args.output:
            reports.write_eval_csv([("sample", "", res)], None, args.output)
        print(f"precision={reports.fmt(res.precision)} "
              f"recall={reports.fmt(res.recall)}")


def _cmd_stitch(args):
    a = _read(args)
    b = read_envi(args.input2, args.data2)
    spec = geometry.StitchSpec(overlap=args.overlap, blend=args.blend)
    out = geometry.stitch(a, b, spec)
    write_envi(out, args.output)
    print(f"stitched -> {out.shape} -> {args.output}")


def _cmd_tilt(args):
    cube = _read(args)
    out = geometry.tilt_correct(cube, geometry.TiltSpec(theta_deg=args.theta))
    write_envi(out, args.output)
    print(f"tilt-corrected {cube.lines} -> {out.lines} lines -> {args.output}")


def _cmd_profile(args):
    cube = _read(args)
    rois = [pipeline._parse_roi(text) for text in args.roi]
    profs = [roi_profile(cube, roi) for roi in rois]
    out = Path(args.output_dir)
    out.mkdir(parents=True, exist_ok=True)
    reports.write_profile_csv(profs, out / "profiles.csv")
    if args.png:
        reports.plot_profiles(profs, out / "profiles.png")
    print(f"{len(profs)} profile(s) -> {out}")


def _cmd_synth(args):
    spec = synth.parse_scene_config(args.scene)
    if args.seed is not None:
        spec = dataclasses.replace(spec, seed=args.seed)
    out = Path(args.output_dir)
    out.mkdir(parents=True, exist_ok=True)
    if args.tilt:
        raw = synth.pushbroom_scan(spec, tilt_deg=args.tilt)
        write_envi(raw, out / "raw")
        pipeline.save_refs(synth.calibration_refs(spec), out / "refs.npz")
        print(f"tilted scan {raw.shape} -> {out}")
        return
    scene = synth.generate_scene(spec)
    write_envi(scene.raw, out / "raw")
    pipeline.save_refs(scene.refs, out / "refs.npz")
    reports.write_pgm(scene.truth, out / "truth.pgm")
    for k, mask in enumerate(scene.truth_masks, 1):
        reports.write_pgm(mask, out / f"truth_{k}.pgm")
    print(f"scene {scene.raw.shape}, {len(scene.truth_masks)} damage(s) "
          f"-> {out}")


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return EXIT_CONFIG if exc.code not in (0, None) else EXIT_OK

    handlers = {
        "convert": _cmd_convert,
        "calibrate": _cmd_calibrate,
        "preprocess": _cmd_preprocess,
        "detect": _cmd_detect,
        "evaluate": _cmd_evaluate,
        "stitch": _cmd_stitch,
        "tilt": _cmd_tilt,
        "profile": _cmd_profile,
        "synth": _cmd_synth,
    }
    try:
        if args.verb == "run":
            config = pipeline.PipelineConfig.parse(args.config)
            cube = read_envi(args.input, args.data)
            pipeline.run(config, cube, args.output_dir)
        else:
            handlers[args.verb](args)
    except PipelineConfigError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except (HsindtError, OSError, ValueError, KeyError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_STAGE
    return EXIT_OK


if __name__ == "__main__":
    sys.exit(main())

"""Hyperspectral non-destructive testing toolkit.

ENVI hypercube I/O, reflectance calibration, SNV correction, PCA
feature maps, guided bilateral denoising, saliency-based damage
detection with moment-ellipse shape features, precision/recall scoring,
scan stitching, tilt restoration and a synthetic push-broom scanner.
"""

from ._kernels import BACKENDS, DEFAULT_BACKEND
from .cube import (KIND_FEATURE, KIND_RAW, KIND_REFLECTANCE, KIND_SNV,
                   Hypercube)
from .detect import (BinaryMask, DetectConfig, DetectionResult,
                     RegionFeatures, SaliencyMap, detect_damage,
                     extract_regions, otsu_threshold, region_features,
                     region_perimeter, saliency_map, suppress_background,
                     threshold_mask)
from .envi import EnviHeader, read_envi, write_envi
from .errors import (DegenerateInputError, EnviFormatError, HsindtError,
                     PipelineConfigError, ShapeMismatchError)
from .evaluate import EvalResult, precision_recall, weighted_overall
from .geometry import StitchSpec, TiltSpec, stitch, tilt_correct
from .preprocess import (CalibrationRefs, JbfParams, PcaModel, SnvStats,
                         bin_cube, calibrate, joint_bilateral_filter, pca,
                         snv_correct)
from .profiles import (Roi, SpectralProfile, profile_crossings,
                       profile_separation, roi_profile)
from .synth import (DamageSpec, MaterialSignature, SceneSpec, SceneResult,
                    calibration_refs, generate_scene, parse_scene_config,
                    pushbroom_scan)

__version__ = "0.1.0"

"""Pixel-level precision/recall scoring against ground-truth masks."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .detect import BinaryMask
from .errors import ShapeMismatchError


@dataclass(frozen=True)
class EvalResult:
    """Pixel counts and the derived precision/recall.

    Zero-denominator conventions are explicit: no detections at all give
    precision 0 with ``no_detections`` set; an empty ground truth gives
    recall 1 with ``empty_truth`` set.
    """

    tp: int
    fp: int
    fn: int
    no_detections: bool = False
    empty_truth: bool = False

    @property
    def precision(self) -> float:
        return self.tp / (self.tp + self.fp) if (self.tp + self.fp) > 0 else 0.0

    @property
    def recall(self) -> float:
        return self.tp / (self.tp + self.fn) if (self.tp + self.fn) > 0 else 1.0

    @classmethod
    def from_counts(cls, tp: int, fp: int, fn: int) -> "EvalResult":
        return cls(tp=int(tp), fp=int(fp), fn=int(fn),
                   no_detections=(tp + fp) == 0,
                   empty_truth=(tp + fn) == 0)


def _as_bool(mask) -> np.ndarray:
    if isinstance(mask, BinaryMask):
        return mask.values
    return np.asarray(mask, dtype=bool)


def precision_recall(detected, truth) -> EvalResult:
    """Score a detected mask against ground truth, elementwise."""
    det = _as_bool(detected)
    tru = _as_bool(truth)
    if det.shape != tru.shape:
        raise ShapeMismatchError(
            f"detected {det.shape} and truth {tru.shape} differ"
        )
    tp = int(np.count_nonzero(det & tru))
    fp = int(np.count_nonzero(det & ~tru))
    fn = int(np.count_nonzero(~det & tru))
    return EvalResult.from_counts(tp, fp, fn)


def weighted_overall(results: list[EvalResult],
                     weights: list[float] | None = None) -> EvalResult:
    """Pool raw counts across samples and recompute the metrics.

    With unit weights this equals scoring the concatenation of all the
    masks, which preserves the single-sample metric semantics.
    """
    if not results:
        raise ValueError("no results to pool")
    if weights is None:
        weights = [1.0] * len(results)
    if len(weights) != len(results):
        raise ValueError("one weight per result required")
    if any(w <= 0 for w in weights):
        raise ValueError("weights must be positive")
    tp = sum(w * r.tp for r, w in zip(results, weights))
    fp = sum(w * r.fp for r, w in zip(results, weights))
    fn = sum(w * r.fn for r, w in zip(results, weights))
    return EvalResult.from_counts(round(tp), round(fp), round(fn))

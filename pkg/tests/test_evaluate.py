import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from hsindt import (BinaryMask, EvalResult, ShapeMismatchError,
                    precision_recall, weighted_overall)


def brute_force_counts(det, tru):
    tp = fp = fn = 0
    for d, t in zip(det.ravel(), tru.ravel()):
        if d and t:
            tp += 1
        elif d and not t:
            fp += 1
        elif t and not d:
            fn += 1
    return tp, fp, fn


def test_matches_pixel_counter_oracle():
    rng = np.random.default_rng(0)
    for _ in range(50):
        det = rng.uniform(size=(9, 7)) < 0.4
        tru = rng.uniform(size=(9, 7)) < 0.4
        r = precision_recall(det, tru)
        tp, fp, fn = brute_force_counts(det, tru)
        assert (r.tp, r.fp, r.fn) == (tp, fp, fn)
        if tp + fp:
            assert r.precision == pytest.approx(tp / (tp + fp), abs=1e-12)
        if tp + fn:
            assert r.recall == pytest.approx(tp / (tp + fn), abs=1e-12)


def test_perfect_detection():
    m = np.random.default_rng(1).uniform(size=(8, 8)) < 0.5
    r = precision_recall(m, m)
    assert r.precision == 1.0 and r.recall == 1.0
    assert r.fp == 0 and r.fn == 0


def test_disjoint_masks():
    det = np.zeros((4, 4), dtype=bool)
    tru = np.zeros((4, 4), dtype=bool)
    det[0, 0] = True
    tru[3, 3] = True
    r = precision_recall(det, tru)
    assert r.precision == 0.0 and r.recall == 0.0


def test_no_detections_convention():
    tru = np.ones((3, 3), dtype=bool)
    r = precision_recall(np.zeros((3, 3), dtype=bool), tru)
    assert r.no_detections
    assert r.precision == 0.0
    assert r.recall == 0.0


def test_empty_truth_convention():
    det = np.zeros((3, 3), dtype=bool)
    r = precision_recall(det, np.zeros((3, 3), dtype=bool))
    assert r.empty_truth
    assert r.recall == 1.0


def test_swapping_masks_swaps_metrics():
    rng = np.random.default_rng(2)
    a = rng.uniform(size=(10, 10)) < 0.3
    b = rng.uniform(size=(10, 10)) < 0.3
    fwd = precision_recall(a, b)
    rev = precision_recall(b, a)
    assert fwd.precision == rev.recall
    assert fwd.recall == rev.precision
    assert fwd.tp == rev.tp and fwd.fp == rev.fn


def test_growing_detection_monotone_recall():
    tru = np.zeros((6, 6), dtype=bool)
    tru[2:5, 2:5] = True
    det = np.zeros((6, 6), dtype=bool)
    prev_recall = 0.0
    for (i, j) in np.argwhere(tru):
        det[i, j] = True
        r = precision_recall(det, tru)
        assert r.recall >= prev_recall
        assert r.precision == 1.0  # only true pixels added
        prev_recall = r.recall
    assert prev_recall == 1.0


def test_binary_mask_inputs_accepted():
    rng = np.random.default_rng(3)
    det = rng.uniform(size=(5, 5)) < 0.5
    tru = rng.uniform(size=(5, 5)) < 0.5
    a = precision_recall(BinaryMask(det), BinaryMask(tru))
    b = precision_recall(det, tru)
    assert (a.tp, a.fp, a.fn) == (b.tp, b.fp, b.fn)


def test_shape_mismatch():
    with pytest.raises(ShapeMismatchError):
        precision_recall(np.zeros((2, 2), bool), np.zeros((2, 3), bool))


def test_pooling_equals_concatenation():
    rng = np.random.default_rng(4)
    dets = [rng.uniform(size=(16, 16)) < 0.35 for _ in range(100)]
    trus = [rng.uniform(size=(16, 16)) < 0.35 for _ in range(100)]
    pooled = weighted_overall([precision_recall(d, t)
                               for d, t in zip(dets, trus)])
    concat = precision_recall(np.concatenate(dets), np.concatenate(trus))
    assert (pooled.tp, pooled.fp, pooled.fn) == \
        (concat.tp, concat.fp, concat.fn)
    assert pooled.precision == pytest.approx(concat.precision, abs=1e-12)
    assert pooled.recall == pytest.approx(concat.recall, abs=1e-12)


def test_weighted_pooling():
    r1 = EvalResult.from_counts(10, 0, 0)
    r2 = EvalResult.from_counts(0, 10, 0)
    even = weighted_overall([r1, r2])
    assert even.precision == pytest.approx(0.5)
    tilted = weighted_overall([r1, r2], weights=[3.0, 1.0])
    assert tilted.precision == pytest.approx(0.75)


def test_pooling_validation():
    with pytest.raises(ValueError):
        weighted_overall([])
    r = EvalResult.from_counts(1, 1, 1)
    with pytest.raises(ValueError):
        weighted_overall([r, r], weights=[1.0])
    with pytest.raises(ValueError):
        weighted_overall([r], weights=[0.0])


@settings(max_examples=50, deadline=None)
@given(st.integers(0, 50), st.integers(0, 50), st.integers(0, 50))
def test_counts_round_trip_property(tp, fp, fn):
    r = EvalResult.from_counts(tp, fp, fn)
    assert 0.0 <= r.precision <= 1.0
    assert 0.0 <= r.recall <= 1.0
    assert r.no_detections == (tp + fp == 0)
    assert r.empty_truth == (tp + fn == 0)

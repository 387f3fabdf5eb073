from fractions import Fraction

import numpy as np
import pytest

from cusumseg import (BinaryMask, DimensionMismatch, EmptyImage, GrayImage,
                      best_threshold_baseline, confusion, derive_metrics)


def bits(rows):
    return BinaryMask(np.asarray(rows, dtype=bool))


def test_confusion_counts():
    mask = bits([[1, 1, 0], [0, 1, 0], [0, 0, 0]])
    ref = bits([[1, 0, 0], [0, 1, 1], [0, 0, 0]])
    assert confusion(mask, ref) == (2, 1, 5, 1)


def test_confusion_swap_transposes_errors():
    rng = np.random.default_rng(4)
    m = bits(rng.random((9, 7)) > 0.5)
    r = bits(rng.random((9, 7)) > 0.5)
    tp, fp, tn, fn = confusion(m, r)
    assert confusion(r, m) == (tp, fn, tn, fp)


def test_confusion_shape_mismatch():
    with pytest.raises(DimensionMismatch):
        confusion(bits(np.zeros((2, 2))), bits(np.zeros((3, 2))))


@pytest.mark.parametrize("counts,dice,tpf,tnf,acc", [
    ((1, 1, 0, 1), 0.5, 0.5, 0.0, 1 / 3),
    ((9, 0, 90, 1), 18 / 19, 0.9, 1.0, 0.99),
    ((5, 0, 0, 0), 1.0, 1.0, 1.0, 1.0),
])
def test_derive_metrics_examples(counts, dice, tpf, tnf, acc):
    m = derive_metrics(counts)
    assert (m.dice, m.tpf, m.tnf, m.acc) == (dice, tpf, tnf, acc)


def test_zero_over_zero_scores_one_and_flags():
    m = derive_metrics((0, 0, 5, 0))
    assert m.dice == 1.0 and m.tpf == 1.0 and m.tnf == 1.0
    assert m.degenerate
    assert not derive_metrics((1, 1, 1, 1)).degenerate


def test_counts_validation():
    with pytest.raises(EmptyImage):
        derive_metrics((0, 0, 0, 0))
    with pytest.raises(ValueError):
        derive_metrics((-1, 0, 1, 0))


def test_derive_metrics_against_exact_rationals():
    rng = np.random.default_rng(17)
    for _ in range(50):
        tp, fp, tn, fn = (int(v) for v in rng.integers(0, 400, 4))
        if tp + fp + tn + fn == 0:
            fn = 1
        m = derive_metrics((tp, fp, tn, fn))
        want = {
            "dice": Fraction(2 * tp, 2 * tp + fp + fn) if 2 * tp + fp + fn else 1,
            "tpf": Fraction(tp, tp + fn) if tp + fn else 1,
            "tnf": Fraction(tn, tn + fp) if tn + fp else 1,
            "acc": Fraction(tp + tn, tp + fp + tn + fn),
        }
        for key, frac in want.items():
            assert abs(getattr(m, key) - float(frac)) <= 1e-12


def test_perfect_agreement(disk_truth):
    m = derive_metrics(confusion(disk_truth, disk_truth))
    assert (m.dice, m.tpf, m.tnf, m.acc) == (1.0, 1.0, 1.0, 1.0)
    assert not m.degenerate


def test_as_dict_round_trip():
    d = derive_metrics((3, 1, 4, 1)).as_dict()
    assert set(d) == {"tp", "fp", "tn", "fn", "dice", "tpf", "tnf", "acc",
                      "degenerate"}
    assert d["tp"] == 3 and d["dice"] == 6 / 8


# --- exhaustive single-threshold baseline ------------------------------------

def test_baseline_separable_two_level(disk_image, disk_truth):
    t, m = best_threshold_baseline(disk_image, disk_truth)
    assert m.dice == 1.0
    assert t == 300.0  # lowest threshold reaching the maximum


def test_baseline_finds_inverted_polarity(disk_truth):
    data = np.where(disk_truth.bits, 10.0, 200.0)
    t, m = best_threshold_baseline(GrayImage(data), disk_truth)
    assert m.dice == 1.0  # dark-object masks come from the < polarity


def test_baseline_dominates_spot_thresholds():
    rng = np.random.default_rng(29)
    data = rng.uniform(0, 500, (24, 24))
    ref = BinaryMask(rng.random((24, 24)) > 0.7)
    _, best = best_threshold_baseline(GrayImage(data), ref)

    def dice_of(mask_bits):
        return derive_metrics(confusion(BinaryMask(mask_bits), ref)).dice

    for t in rng.uniform(0, 500, 20):
        assert best.dice >= dice_of(data >= t)
        assert best.dice >= dice_of(data < t)


def test_baseline_empty_reference_degenerates():
    data = np.arange(16.0).reshape(4, 4)
    ref = BinaryMask(np.zeros((4, 4), dtype=bool))
    _, m = best_threshold_baseline(GrayImage(data), ref)
    assert m.dice == 1.0 and m.degenerate


def test_baseline_cannot_separate_overlapping_levels(disk_truth):
    # a pocket inside the object shares the background intensity, so no
    # single cut reproduces the reference
    data = np.where(disk_truth.bits, 300.0, 100.0)
    data[54:74, 54:74] = 100.0
    t, m = best_threshold_baseline(GrayImage(data), disk_truth)
    assert m.dice < 1.0
    pocket = 20 * 20
    inside = int(disk_truth.bits.sum())
    assert m.dice == pytest.approx(2 * (inside - pocket)
                                   / ((inside - pocket) + inside))


def test_baseline_shape_mismatch():
    with pytest.raises(DimensionMismatch):
        best_threshold_baseline(GrayImage(np.ones((3, 3)) * np.arange(3)),
                                BinaryMask(np.zeros((2, 3), dtype=bool)))

"""Confusion-matrix scoring and the exhaustive single-threshold baseline."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import DimensionMismatch, EmptyImage
from .mask import BinaryMask


@dataclass(frozen=True)
class SegMetrics:
    tp: int
    fp: int
    tn: int
    fn: int
    dice: float
    tpf: float
    tnf: float
    acc: float
    degenerate: bool  # some ratio hit 0/0 and was reported as 1

    def as_dict(self) -> dict:
        return {
            "tp": self.tp, "fp": self.fp, "tn": self.tn, "fn": self.fn,
            "dice": self.dice, "tpf": self.tpf, "tnf": self.tnf,
            "acc": self.acc, "degenerate": self.degenerate,
        }


def confusion(mask: BinaryMask, reference: BinaryMask):
    """(tp, fp, tn, fn) pixel counts; reference unity is the positive class."""
    if mask.bits.shape != reference.bits.shape:
        raise DimensionMismatch(
            f"mask {mask.bits.shape} vs reference {reference.bits.shape}")
    m = mask.bits
    r = reference.bits
    tp = int(np.count_nonzero(m & r))
    fp = int(np.count_nonzero(m & ~r))
    fn = int(np.count_nonzero(~m & r))
    tn = int(np.count_nonzero(~m & ~r))
    return tp, fp, tn, fn


def _ratio(num: int, den: int):
    """num/den with the 0/0 case reported as (1.0, degenerate)."""
    if den == 0:
        return 1.0, True
    return num / den, False


def derive_metrics(counts) -> SegMetrics:
    tp, fp, tn, fn = (int(c) for c in counts)
    if min(tp, fp, tn, fn) < 0:
        raise ValueError("confusion counts must be non-negative")
    total = tp + fp + tn + fn
    if total == 0:
        raise EmptyImage("confusion counts sum to zero")
    dice, d1 = _ratio(2 * tp, 2 * tp + fp + fn)
    tpf, d2 = _ratio(tp, tp + fn)
    tnf, d3 = _ratio(tn, tn + fp)
    acc = (tp + tn) / total
    return SegMetrics(tp=tp, fp=fp, tn=tn, fn=fn, dice=dice, tpf=tpf,
                      tnf=tnf, acc=acc, degenerate=d1 or d2 or d3)


def _dice_better(tp_a: int, m_a: int, tp_b: int, m_b: int, positives: int) -> bool:
    """Exact comparison of 2*tp/(m+positives) without float round-off.

    Empty-vs-empty (both numerator and denominator zero) counts as a
    perfect score of 1.
    """
    den_a = m_a + positives
    den_b = m_b + positives
    num_a, num_b = 2 * tp_a, 2 * tp_b
    if den_a == 0:
        num_a, den_a = 1, 1
    if den_b == 0:
        num_b, den_b = 1, 1
    return num_a * den_b > num_b * den_a


def best_threshold_baseline(img, reference: BinaryMask):
    """Most charitable single-threshold mask vs the reference.

    Scans every distinct intensity as a cut, in both polarities
    (>= t as unity, and its complement), and returns (t, SegMetrics)
    for the Dice maximum. Ties resolve to the lower threshold, and to
    the >= polarity at equal thresholds.
    """
    data = np.asarray(img.data, dtype=np.float64)
    if data.shape != reference.bits.shape:
        raise DimensionMismatch(
            f"image {data.shape} vs reference {reference.bits.shape}")
    vals = data.ravel()
    ref = reference.bits.ravel()
    n = vals.size
    order = np.argsort(vals, kind="stable")
    sv = vals[order]
    sr = ref[order]
    # suffix_pos[i] = positives among ranks i..n-1
    suffix_pos = np.concatenate([
        np.cumsum(sr[::-1])[::-1], [0]]).astype(np.int64)
    positives = int(suffix_pos[0])
    first_idx = np.nonzero(np.concatenate([[True], sv[1:] != sv[:-1]]))[0]

    best = None  # (tp, mask_size, t, polarity)
    for i in first_idx:
        t = float(sv[i])
        # polarity >= t
        tp_ge = int(suffix_pos[i])
        m_ge = n - int(i)
        # polarity < t
        tp_lt = positives - tp_ge
        m_lt = int(i)
        for tp_c, m_c, pol in ((tp_ge, m_ge, "ge"), (tp_lt, m_lt, "lt")):
            if best is None or _dice_better(tp_c, m_c, best[0], best[1], positives):
                best = (tp_c, m_c, t, pol)

    tp, m, t, pol = best
    fp = m - tp
    fn = positives - tp
    tn = n - m - fn
    return t, derive_metrics((tp, fp, tn, fn))

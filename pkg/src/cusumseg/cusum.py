"""Streaming change-point detection over the trajectory's intensities.

One-sided cumulative sum with a region-dependent score: while the
walker is labeled tissue the sum accumulates downward deviations from
the tissue mean, and vice versa outside. Region means come from sliding
windows of the last q accepted samples per region; before a window has
any content the means fall back to the global Otsu class means, and the
alarm threshold falls back to the global Otsu threshold value until
both windows are full.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from enum import Enum

import numpy as np

from .errors import DegenerateThreshold
from .planner import RegionLabel

DEFAULT_Q = 45


class ResetMode(Enum):
    """Restart value of the sum after an alarm (fast initial response).

    ZERO restarts from scratch. HALF_CURRENT seeds the next run with
    half of the sum that raised this alarm; HALF_PREVIOUS with half of
    the sum at the previous alarm. The halving variants shorten the
    reaction to an immediately following change but keep the sum near
    the threshold while the fallback threshold is still in effect,
    which can storm the detector with alarms on high-contrast
    boundaries; ZERO is the default for that reason.
    """

    ZERO = "zero"
    HALF_CURRENT = "half-current"
    HALF_PREVIOUS = "half-previous"


@dataclass(frozen=True)
class CusumConfig:
    q: int = DEFAULT_Q
    reset_mode: ResetMode = ResetMode.ZERO
    h_min: float = 0.0  # pipelines pass 1e-6 x image dynamic range

    def __post_init__(self):
        if self.q < 1:
            raise ValueError("window capacity q must be positive")
        if self.h_min < 0:
            raise ValueError("h_min must be non-negative")


def score(intensity: float, mu_j: float) -> float:
    """Deviation of a sample from a region mean."""
    return intensity - mu_j


def threshold_h(mu1: float, mu2: float) -> float:
    """Alarm threshold from the two current region means."""
    return abs(mu1 - mu2)


class _Window:
    """Fixed-capacity ring of accepted samples.

    The mean is summed in slot order (not insertion order) so the
    accelerated tracker kernel, which does the same, stays bit-identical.
    """

    __slots__ = ("buf", "head", "count")

    def __init__(self, q: int):
        self.buf = np.zeros(q, dtype=np.float64)
        self.head = 0
        self.count = 0

    def push(self, v: float) -> None:
        q = self.buf.shape[0]
        self.buf[self.head] = v
        self.head = (self.head + 1) % q
        if self.count < q:
            self.count += 1

    def full(self) -> bool:
        return self.count == self.buf.shape[0]

    def mean(self):
        if self.count == 0:
            return None
        s = 0.0
        for i in range(self.count):
            s += self.buf[i]
        return s / self.count


class CusumDetector:
    """Single-owner streaming detector; not thread-safe mid-stream."""

    def __init__(self, initial_label: RegionLabel, global_otsu: float,
                 otsu_means: tuple, config: CusumConfig = CusumConfig()):
        self.config = config
        self.label = RegionLabel(initial_label)
        self.global_otsu = float(global_otsu)
        self.otsu_means = (float(otsu_means[0]), float(otsu_means[1]))
        self.S = 0.0
        self.h = float(global_otsu)
        self.window1 = _Window(config.q)
        self.window2 = _Window(config.q)
        self.alarms: list = [0]  # sentinel alarm index 0
        self._step = 0
        self._prev_exceed = 0.0
        self._num_alarms = 0

    def region_mean(self, j: RegionLabel) -> float:
        """Window mean for region j; Otsu class mean while empty."""
        mu_below, mu_above = self.otsu_means
        if j == RegionLabel.OMEGA1:
            m = self.window1.mean()
            return m if m is not None else mu_above
        m = self.window2.mean()
        return m if m is not None else mu_below

    def fir_reset(self, exceeding_sum: float) -> float:
        """Post-alarm restart value; the first alarm always restarts at 0."""
        if self._num_alarms <= 1:
            return 0.0
        mode = self.config.reset_mode
        if mode is ResetMode.ZERO:
            return 0.0
        if mode is ResetMode.HALF_CURRENT:
            return 0.5 * exceeding_sum
        return 0.5 * self._prev_exceed

    def update(self, intensity: float):
        """Advance one sample; returns (S, alarm).

        On alarm the label flips and the sample joins neither window;
        otherwise it joins the current label's window.
        """
        z = float(intensity)
        mu1 = self.region_mean(RegionLabel.OMEGA1)
        mu2 = self.region_mean(RegionLabel.OMEGA2)
        if self.window1.full() and self.window2.full():
            h = threshold_h(mu1, mu2)
        else:
            h = self.global_otsu
        if h < self.config.h_min:
            raise DegenerateThreshold(
                f"alarm threshold {h} fell below the floor {self.config.h_min}")
        self.h = h
        if self.label == RegionLabel.OMEGA1:
            s = self.S - score(z, mu1)
        else:
            s = self.S + score(z, mu2)
        self.S = s if s > 0.0 else 0.0
        alarm = self.S > h
        if alarm:
            exceed = self.S
            self._num_alarms += 1
            self.S = self.fir_reset(exceed)
            self._prev_exceed = exceed
            # 1-based sample index keeps the list strictly increasing
            # past the tau_0 = 0 sentinel
            self.alarms.append(self._step + 1)
            self.label = (RegionLabel.OMEGA2 if self.label == RegionLabel.OMEGA1
                          else RegionLabel.OMEGA1)
        else:
            if self.label == RegionLabel.OMEGA1:
                self.window1.push(z)
            else:
                self.window2.push(z)
        self._step += 1
        return self.S, alarm

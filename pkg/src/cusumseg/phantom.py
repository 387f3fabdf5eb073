"""Deterministic head-like test images with analytic ground truth.

An elliptical bright ring (skull/scalp analogue) encloses a mid-bright
interior (tissue) on a dark background, optionally with circular
lesions and a contrast-bolus intensity dip on late timepoints. Noise
comes from a counter-based SplitMix64 generator pushed through the
Box-Muller transform, so a given spec reproduces the exact same stack
on every run and platform without any global RNG state.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import InvalidSpec
from .imaging import GrayImage, PerfusionStack
from .mask import BinaryMask

_GOLDEN = np.uint64(0x9E3779B97F4A7C15)
_MIX1 = np.uint64(0xBF58476D1CE4E5B9)
_MIX2 = np.uint64(0x94D049BB133111EB)


def splitmix64(counters: np.ndarray) -> np.ndarray:
    """SplitMix64 finalizer over uint64 counters (vectorized)."""
    z = (counters + _GOLDEN).astype(np.uint64)
    z = (z ^ (z >> np.uint64(30))) * _MIX1
    z = (z ^ (z >> np.uint64(27))) * _MIX2
    return z ^ (z >> np.uint64(31))


def _uniform01(z: np.ndarray) -> np.ndarray:
    # 53 high bits, offset to the open interval (0, 1)
    return ((z >> np.uint64(11)).astype(np.float64) + 0.5) * 2.0 ** -53


def gaussian_field(seed: int, stream: int, count: int) -> np.ndarray:
    """count standard normals from (seed, stream) via Box-Muller."""
    with np.errstate(over="ignore"):  # uint64 wraparound is the point
        base = (np.uint64(seed)
                + np.uint64(stream) * np.uint64(0x517CC1B727220A95))
        idx = np.arange(count, dtype=np.uint64)
        u1 = _uniform01(splitmix64(base + 2 * idx))
        u2 = _uniform01(splitmix64(base + 2 * idx + np.uint64(1)))
    return np.sqrt(-2.0 * np.log(u1)) * np.cos(2.0 * math.pi * u2)


BOLUS_START_TIMEPOINT = 5


@dataclass(frozen=True)
class PhantomSpec:
    width: int = 128
    height: int = 128
    background_mean: float = 100.0
    interior_mean: float = 450.0
    ring_mean: float = 700.0
    center: tuple = (64.0, 64.0)
    outer_axes: tuple = (52.0, 58.0)  # semi-axes (a, b) in pixels
    inner_axes: tuple = (44.0, 50.0)
    lesions: tuple = ()  # each (cx, cy, radius, intensity_delta)
    noise_sigma: float = 20.0
    num_timepoints: int = 8
    bolus_dip_fraction: float = 0.3  # applied at timepoints >= 5
    rng_seed: int = 1
    truth_ellipse: str = "outer"  # or "inner"

    def __post_init__(self):
        if self.width < 8 or self.height < 8:
            raise InvalidSpec("phantom must be at least 8x8")
        ao, bo = self.outer_axes
        ai, bi = self.inner_axes
        cx, cy = self.center
        if not (0 < ai < ao and 0 < bi < bo):
            raise InvalidSpec("inner ellipse must sit strictly inside the outer")
        inside = (cx - ao > 0 and cx + ao < self.width - 1
                  and cy - bo > 0 and cy + bo < self.height - 1)
        if not inside:
            raise InvalidSpec("outer ellipse must sit strictly inside the image")
        if self.noise_sigma < 0:
            raise InvalidSpec("noise_sigma must be non-negative")
        if min(self.background_mean, self.interior_mean, self.ring_mean) < 0:
            raise InvalidSpec("region means must be non-negative")
        if not (0 <= self.bolus_dip_fraction < 1):
            raise InvalidSpec("bolus_dip_fraction must lie in [0, 1)")
        if self.num_timepoints < 1:
            raise InvalidSpec("need at least one timepoint")
        if not (0 <= self.rng_seed < 2 ** 63):
            raise InvalidSpec("rng_seed must fit in 63 bits")
        for lesion in self.lesions:
            if len(lesion) != 4:
                raise InvalidSpec("lesion must be (cx, cy, radius, delta)")
            if lesion[2] <= 0:
                raise InvalidSpec("lesion radius must be positive")
            if self.interior_mean + lesion[3] < 0:
                raise InvalidSpec("lesion would drive intensity negative")
        if self.truth_ellipse not in ("outer", "inner"):
            raise InvalidSpec("truth_ellipse must be 'outer' or 'inner'")


def _region_grids(spec: PhantomSpec):
    yy, xx = np.mgrid[0:spec.height, 0:spec.width].astype(np.float64)
    cx, cy = spec.center
    ao, bo = spec.outer_axes
    ai, bi = spec.inner_axes
    outer = ((xx - cx) / ao) ** 2 + ((yy - cy) / bo) ** 2 <= 1.0
    inner = ((xx - cx) / ai) ** 2 + ((yy - cy) / bi) ** 2 <= 1.0
    return xx, yy, outer, inner


def clean_frame(spec: PhantomSpec, timepoint: int) -> np.ndarray:
    """Noise-free intensity field for one timepoint."""
    xx, yy, outer, inner = _region_grids(spec)
    frame = np.full((spec.height, spec.width), spec.background_mean)
    frame[outer] = spec.ring_mean
    frame[inner] = spec.interior_mean
    for (lx, ly, radius, delta) in spec.lesions:
        disk = (xx - lx) ** 2 + (yy - ly) ** 2 <= radius * radius
        frame[disk] += delta
    if timepoint >= BOLUS_START_TIMEPOINT:
        frame[inner] *= 1.0 - spec.bolus_dip_fraction
    return frame


def ground_truth(spec: PhantomSpec) -> BinaryMask:
    _, _, outer, inner = _region_grids(spec)
    return BinaryMask(outer if spec.truth_ellipse == "outer" else inner)


def generate(spec: PhantomSpec):
    """(PerfusionStack, ground truth BinaryMask) for the spec."""
    frames = []
    count = spec.width * spec.height
    for t in range(spec.num_timepoints):
        frame = clean_frame(spec, t)
        if spec.noise_sigma > 0:
            g = gaussian_field(spec.rng_seed, t, count)
            frame = frame + spec.noise_sigma * g.reshape(spec.height, spec.width)
        np.clip(frame, 0.0, None, out=frame)
        frames.append(GrayImage(frame))
    stack = PerfusionStack((tuple(frames),))
    return stack, ground_truth(spec)

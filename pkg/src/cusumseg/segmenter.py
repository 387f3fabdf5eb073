"""Full tracker: seed, trajectory, change detection, termination.

The per-step loop (sample, detector update, turn, advance) is fused
into one kernel so a 128x128 segmentation stays well under the 1 s
budget: compiled by numba when available, interpreted from the same
source otherwise (see _accel). The kernel mirrors CusumDetector.update
operation for operation; tests feed the recorded intensity stream back
through the detector class and require identical state.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Optional

import numpy as np

from ._accel import njit
from .cusum import CusumConfig, ResetMode
from .errors import DegenerateThreshold, TrackerDiverged
from .imaging import (
    GrayImage,
    Point2D,
    bilinear_at,
    otsu_class_means,
    otsu_threshold,
)
from .mask import BinaryMask, FillResult, mask_from_trace
from .planner import LoopMode, PlannerParams, RegionLabel, advance
from .seed import SeedConfig, find_initial_point
from .trace import BoundaryTrace, Termination, TraceDiagnostics

_TERM_CLOSED = 0
_TERM_BORDER = 1
_TERM_MAXSTEPS = 2
_TERM_DEGENERATE = 3

_RESET_CODE = {
    ResetMode.ZERO: 0,
    ResetMode.HALF_CURRENT: 1,
    ResetMode.HALF_PREVIOUS: 2,
}


@njit(cache=True)
def _track(data, seed_x, seed_y, theta0, V, lag, tol, budget, warmup, q,
           mu_fb_below, mu_fb_above, global_otsu, h_min, reset_code,
           label0, additive, xs, ys, zs, ss, hs, labels, alarms):
    height, width = data.shape
    quarter = math.pi / 4.0
    half = math.pi / 2.0
    third = math.pi / 3.0
    two_pi = 2.0 * math.pi

    win1 = np.empty(q, dtype=np.float64)
    win2 = np.empty(q, dtype=np.float64)
    head1 = 0
    cnt1 = 0
    head2 = 0
    cnt2 = 0
    S = 0.0
    prev_exceed = 0.0
    n_alarms = 0
    label = label0
    theta = theta0
    x = seed_x
    y = seed_y
    xs[0] = x
    ys[0] = y
    seed_px_x = int(math.floor(seed_x + 0.5))
    seed_px_y = int(math.floor(seed_y + 0.5))
    k = 0
    term = _TERM_MAXSTEPS
    while True:
        z = bilinear_at(data, x, y)
        if cnt1 == 0:
            mu1 = mu_fb_above
        else:
            acc = 0.0
            for i in range(cnt1):
                acc += win1[i]
            mu1 = acc / cnt1
        if cnt2 == 0:
            mu2 = mu_fb_below
        else:
            acc = 0.0
            for i in range(cnt2):
                acc += win2[i]
            mu2 = acc / cnt2
        if cnt1 == q and cnt2 == q:
            h = abs(mu1 - mu2)
        else:
            h = global_otsu
        if h < h_min:
            term = _TERM_DEGENERATE
            break
        if label == 1:
            s_new = S + (mu1 - z)
        else:
            s_new = S + (z - mu2)
        S = s_new if s_new > 0.0 else 0.0
        alarm = S > h
        label_before = label
        if alarm:
            exceed = S
            n_alarms += 1
            if n_alarms == 1 or reset_code == 0:
                S = 0.0
            elif reset_code == 1:
                S = 0.5 * exceed
            else:
                S = 0.5 * prev_exceed
            prev_exceed = exceed
            label = 2 if label == 1 else 1
        else:
            if label_before == 1:
                win1[head1] = z
                head1 = (head1 + 1) % q
                if cnt1 < q:
                    cnt1 += 1
            else:
                win2[head2] = z
                head2 = (head2 + 1) % q
                if cnt2 < q:
                    cnt2 += 1
        zs[k] = z
        ss[k] = S
        hs[k] = h
        labels[k] = label_before
        alarms[k] = 1 if alarm else 0
        if alarm:
            turn = -half if label_before == 1 else half
        else:
            turn = quarter if label == 1 else -quarter
        if k >= lag:
            dx = x - xs[k - lag]
            dy = y - ys[k - lag]
            if math.hypot(dx, dy) <= tol:
                kick = -third if label == 1 else third
                if additive == 1:
                    turn = turn + kick
                else:
                    turn = kick
        theta = (theta + turn) % two_pi
        x = x + V * math.cos(theta)
        y = y + V * math.sin(theta)
        k += 1
        xs[k] = x
        ys[k] = y
        px = int(math.floor(x + 0.5))
        py = int(math.floor(y + 0.5))
        if px <= 0 or px >= width - 1 or py <= 0 or py >= height - 1:
            term = _TERM_BORDER
            break
        if k >= warmup and px == seed_px_x and py == seed_px_y:
            term = _TERM_CLOSED
            break
        if k >= budget:
            term = _TERM_MAXSTEPS
            break
    return k, term, n_alarms


def run_tracker(img: GrayImage, seed: Point2D,
                params: PlannerParams = PlannerParams(),
                config: CusumConfig = CusumConfig(),
                record_visited: bool = False) -> BoundaryTrace:
    """Trace the region boundary from the seed.

    Raises TrackerDiverged (partial trace attached) when the step
    budget runs out and DegenerateThreshold when the two region means
    collapse onto each other.
    """
    data = img.data
    height, width = data.shape
    t = otsu_threshold(img)
    mu_below, mu_above = otsu_class_means(img, t)
    v = params.step_length
    theta0 = params.initial_heading
    first = advance(seed, theta0, v)
    label0 = 1 if bilinear_at(data, first[0], first[1]) > t else 2
    budget = params.steps_budget(width, height)
    dyn = float(data.max() - data.min())
    h_min = max(config.h_min, 1e-6 * dyn)
    xs = np.empty(budget + 2, dtype=np.float64)
    ys = np.empty(budget + 2, dtype=np.float64)
    zs = np.empty(budget + 1, dtype=np.float64)
    ss = np.empty(budget + 1, dtype=np.float64)
    hs = np.empty(budget + 1, dtype=np.float64)
    labels = np.empty(budget + 1, dtype=np.int64)
    alarms = np.empty(budget + 1, dtype=np.int64)
    steps, term, _ = _track(
        data, float(seed[0]), float(seed[1]), theta0, v,
        params.loop_lag, params.tolerance(), budget, params.warmup_steps,
        config.q, mu_below, mu_above, t, h_min, _RESET_CODE[config.reset_mode],
        label0, 1 if params.loop_mode is LoopMode.ADDITIVE else 0,
        xs, ys, zs, ss, hs, labels, alarms)

    if term == _TERM_DEGENERATE:
        raise DegenerateThreshold(
            f"region means collapsed below the noise floor at step {steps}")
    n_samples = steps  # one sample precedes every advance
    cp_idx = np.nonzero(alarms[:n_samples])[0]
    change_points = tuple(Point2D(float(xs[i]), float(ys[i])) for i in cp_idx)
    diag = TraceDiagnostics(
        x=xs[:n_samples].copy(), y=ys[:n_samples].copy(),
        intensity=zs[:n_samples].copy(), S=ss[:n_samples].copy(),
        h=hs[:n_samples].copy(), label=labels[:n_samples].copy(),
        alarm=alarms[:n_samples].copy())
    termination = {
        _TERM_CLOSED: Termination.CLOSED_AT_SEED,
        _TERM_BORDER: Termination.HIT_BORDER,
        _TERM_MAXSTEPS: Termination.MAX_STEPS,
    }[term]
    visited = None
    if record_visited:
        visited = np.column_stack([xs[:steps + 1], ys[:steps + 1]]).copy()
    trace = BoundaryTrace(
        change_points=change_points, termination=termination,
        seed=Point2D(float(seed[0]), float(seed[1])), steps=int(steps),
        visited=visited, diagnostics=diag)
    if termination is Termination.MAX_STEPS:
        raise TrackerDiverged(
            f"no closure within {budget} steps ({len(change_points)} "
            f"change points recorded)", trace=trace)
    return trace


@dataclass(frozen=True)
class SegmentationResult:
    mask: BinaryMask
    fill: FillResult
    trace: BoundaryTrace
    seed: Point2D
    threshold: float


def segment_image(img: GrayImage,
                  params: PlannerParams = PlannerParams(),
                  config: CusumConfig = CusumConfig(),
                  seed_override: Optional[Point2D] = None,
                  seed_config: SeedConfig = SeedConfig(),
                  record_visited: bool = False) -> SegmentationResult:
    """Threshold, seed, track, rasterize, fill."""
    t = otsu_threshold(img)
    if seed_override is not None:
        seed = Point2D(float(seed_override[0]), float(seed_override[1]))
    else:
        seed = find_initial_point(img, t, seed_config)
    trace = run_tracker(img, seed, params, config, record_visited)
    fill = mask_from_trace(trace, img.width, img.height)
    return SegmentationResult(mask=fill.mask, fill=fill, trace=trace,
                              seed=seed, threshold=t)

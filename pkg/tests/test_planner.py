import math

import numpy as np
import pytest

from cusumseg import LoopMode, PlannerParams, Point2D, RegionLabel
from cusumseg.planner import (MIN_STEP_LENGTH, advance, compose_turn,
                              heading_step, loop_correction,
                              normalize_heading)


@pytest.mark.parametrize("label,at_boundary,expect", [
    (RegionLabel.OMEGA1, False, math.pi / 4),
    (RegionLabel.OMEGA2, False, -math.pi / 4),
    (RegionLabel.OMEGA1, True, -math.pi / 2),
    (RegionLabel.OMEGA2, True, math.pi / 2),
])
def test_heading_step_sign_table(label, at_boundary, expect):
    assert heading_step(label, at_boundary) == expect


@pytest.mark.parametrize("theta,expect", [
    (0.0, (10.39, 10.0)),
    (math.pi / 2, (10.0, 10.39)),
    (math.pi / 4, (10.0 + 0.39 / math.sqrt(2), 10.0 + 0.39 / math.sqrt(2))),
])
def test_advance_examples(theta, expect):
    got = advance(Point2D(10.0, 10.0), theta, 0.39)
    assert got.x == pytest.approx(expect[0], abs=1e-12)
    assert got.y == pytest.approx(expect[1], abs=1e-12)


def test_advance_step_length_exact():
    rng = np.random.default_rng(2)
    for _ in range(100):
        p = Point2D(rng.uniform(-5, 5), rng.uniform(-5, 5))
        theta = rng.uniform(0, 2 * math.pi)
        q = advance(p, theta, 0.39)
        assert math.hypot(q.x - p.x, q.y - p.y) == pytest.approx(0.39, rel=1e-9)


def walk_octagon(start, theta0, v, sign):
    """Eight turn-then-step moves with a constant same-sign pi/4 turn."""
    p, theta = start, theta0
    pts = []
    for _ in range(8):
        theta += sign * math.pi / 4
        p = advance(p, theta, v)
        pts.append(p)
    return pts


@pytest.mark.parametrize("sign", [1.0, -1.0])
def test_octagon_closes(sign):
    rng = np.random.default_rng(17)
    v = 0.39
    for _ in range(100):
        start = Point2D(rng.uniform(0, 100), rng.uniform(0, 100))
        pts = walk_octagon(start, rng.uniform(0, 2 * math.pi), v, sign)
        gap = math.hypot(pts[-1].x - start.x, pts[-1].y - start.y)
        assert gap <= 1e-6 * v


def test_min_step_octagon_exits_pixel():
    # at the analytic minimum V every octagon must poke out of a unit
    # pixel no matter where inside it starts
    v = MIN_STEP_LENGTH
    theta0 = math.pi / 8
    for i in range(20):
        for j in range(20):
            start = Point2D(i / 20.0, j / 20.0)
            pts = walk_octagon(start, theta0, v, 1.0)
            outside = any(not (0.0 <= p.x < 1.0 and 0.0 <= p.y < 1.0)
                          for p in pts)
            assert outside, f"octagon stayed inside from offset {start}"


def test_step_length_validation():
    with pytest.raises(ValueError):
        PlannerParams(step_length=0.0)
    with pytest.raises(ValueError):
        PlannerParams(step_length=0.38)  # below the pixel-escape minimum
    with pytest.raises(ValueError):
        PlannerParams(loop_lag=1)
    with pytest.raises(ValueError):
        PlannerParams(max_steps=0)


def test_param_defaults():
    p = PlannerParams()
    assert p.tolerance() == 0.39 / 100
    assert p.steps_budget(128, 128) == 12800
    assert PlannerParams(max_steps=77).steps_budget(128, 128) == 77
    assert PlannerParams(loop_tolerance=0.25).tolerance() == 0.25


def hist(*xy):
    return [Point2D(float(x), float(y)) for x, y in xy]


def test_loop_correction_short_history():
    params = PlannerParams()
    h = hist((0, 0), (1, 0), (2, 0))
    assert loop_correction(h, h[-1], RegionLabel.OMEGA1, params) == 0.0


def test_loop_correction_fires_by_label():
    params = PlannerParams(loop_lag=4)
    # current point equals the one four steps back
    h = hist((5, 5), (6, 5), (6, 6), (5, 6), (5, 5))
    assert loop_correction(h, h[-1], RegionLabel.OMEGA1, params) == -math.pi / 3
    assert loop_correction(h, h[-1], RegionLabel.OMEGA2, params) == math.pi / 3


def test_loop_correction_quiet_without_revisit():
    params = PlannerParams(loop_lag=4)
    h = hist((5, 5), (6, 5), (6, 6), (5, 6), (9, 9))
    assert loop_correction(h, h[-1], RegionLabel.OMEGA1, params) == 0.0


def test_loop_correction_respects_tolerance():
    params = PlannerParams(loop_lag=2, loop_tolerance=0.05)
    near = hist((0, 0), (1, 1), (0.0, 0.04))
    far = hist((0, 0), (1, 1), (0.0, 0.06))
    assert loop_correction(near, near[-1], RegionLabel.OMEGA2, params) > 0
    assert loop_correction(far, far[-1], RegionLabel.OMEGA2, params) == 0.0


def test_compose_turn_modes():
    t, c = math.pi / 4, -math.pi / 3
    assert compose_turn(t, 0.0, LoopMode.OVERRIDE) == t
    assert compose_turn(t, 0.0, LoopMode.ADDITIVE) == t
    assert compose_turn(t, c, LoopMode.OVERRIDE) == c
    assert compose_turn(t, c, LoopMode.ADDITIVE) == t + c


@pytest.mark.parametrize("theta,expect", [
    (2 * math.pi, 0.0),
    (-math.pi / 4, 7 * math.pi / 4),
    (9 * math.pi / 4, math.pi / 4),
])
def test_normalize_heading(theta, expect):
    assert normalize_heading(theta) == pytest.approx(expect, abs=1e-12)

"""Trajectory geometry: constant-length subpixel steps, region-dependent
turning, boundary reversal, and loop-escape correction.

The walker advances by a fixed step V every iteration. Inside the
tissue region it keeps turning +pi/4, outside -pi/4, which closes an
octagon after eight steps; a detected boundary crossing reverses it
with a double turn (pi/2) toward the side it came from. Revisiting the
position held ``loop_lag`` steps earlier means the walker has closed a
full circle inside one region; the escape shift (pi/3) then replaces
the scheduled turn (see LoopMode).
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from enum import Enum, IntEnum
from typing import Sequence

from .imaging import Point2D

TWO_PI = 2.0 * math.pi

TURN_IN_REGION = math.pi / 4.0
TURN_AT_BOUNDARY = math.pi / 2.0
LOOP_SHIFT = math.pi / 3.0

# analytic step-length minimum: an octagon with V below this can sit
# entirely inside a single pixel and never sample across its border
MIN_STEP_LENGTH = 0.3827


class RegionLabel(IntEnum):
    OMEGA1 = 1  # brain-tissue side
    OMEGA2 = 2  # skull / extracranial / background side


class LoopMode(Enum):
    """How the loop-escape shift combines with the scheduled turn.

    OVERRIDE replaces the turn with the +-pi/3 shift. ADDITIVE adds the
    shift on top. Additive composition keeps the eight-step turn total
    at a full circle, so a trapped orbit only precesses in place and
    the walker can spin forever inside one region; override breaks the
    closure and lets it drift back out. Override is therefore the
    default.
    """

    OVERRIDE = "override"
    ADDITIVE = "additive"


@dataclass(frozen=True)
class PlannerParams:
    step_length: float = 0.39  # pixels; 0.39 x the minimal pixel side
    turn_in_region: float = TURN_IN_REGION
    turn_at_boundary: float = TURN_AT_BOUNDARY
    loop_shift: float = LOOP_SHIFT
    loop_lag: int = 8
    loop_tolerance: float | None = None  # defaults to V/100
    max_steps: int | None = None  # defaults to 50 * (width + height)
    initial_heading: float = 7.0 * math.pi / 4.0
    warmup_steps: int = 20
    loop_mode: LoopMode = LoopMode.OVERRIDE

    def __post_init__(self):
        if not (self.step_length > 0):
            raise ValueError("step_length must be positive")
        if self.step_length < MIN_STEP_LENGTH:
            raise ValueError(
                f"step_length {self.step_length} below the analytic minimum "
                f"{MIN_STEP_LENGTH}: the walker could orbit inside one pixel")
        if self.loop_lag < 2:
            raise ValueError("loop_lag must be at least 2")
        if self.max_steps is not None and self.max_steps <= 0:
            raise ValueError("max_steps must be positive")

    def tolerance(self) -> float:
        if self.loop_tolerance is not None:
            return self.loop_tolerance
        return self.step_length / 100.0

    def steps_budget(self, width: int, height: int) -> int:
        if self.max_steps is not None:
            return self.max_steps
        return 50 * (width + height)


def normalize_heading(theta: float) -> float:
    theta = math.fmod(theta, TWO_PI)
    if theta < 0.0:
        theta += TWO_PI
    return theta


def heading_step(label: RegionLabel, at_boundary: bool) -> float:
    """Scheduled turn for this step.

    label is the region of the previous point; for a boundary step it
    is the region the walker occupied before the detected crossing, so
    the double turn bends back toward that region.
    """
    if at_boundary:
        return -TURN_AT_BOUNDARY if label == RegionLabel.OMEGA1 else TURN_AT_BOUNDARY
    return TURN_IN_REGION if label == RegionLabel.OMEGA1 else -TURN_IN_REGION


def loop_correction(history: Sequence[Point2D], current: Point2D,
                    label: RegionLabel, params: PlannerParams) -> float:
    """Escape shift when the walker re-occupies the position it held
    loop_lag steps earlier; 0 otherwise or when history is too short.

    history carries the visited positions in order, current included as
    its last entry.
    """
    lag = params.loop_lag
    if len(history) < lag + 1:
        return 0.0
    past = history[-(lag + 1)]
    dx = current[0] - past[0]
    dy = current[1] - past[1]
    if math.hypot(dx, dy) <= params.tolerance():
        return -params.loop_shift if label == RegionLabel.OMEGA1 else params.loop_shift
    return 0.0


def compose_turn(step_turn: float, correction: float, mode: LoopMode) -> float:
    """Combine the scheduled turn with a loop correction (see LoopMode)."""
    if correction == 0.0:
        return step_turn
    if mode is LoopMode.OVERRIDE:
        return correction
    return step_turn + correction


def advance(position: Point2D, theta: float, step_length: float) -> Point2D:
    return Point2D(position[0] + step_length * math.cos(theta),
                   position[1] + step_length * math.sin(theta))

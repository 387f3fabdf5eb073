"""Boundary-trace containers and the diagnostic CSV dump."""

from __future__ import annotations

import csv
from dataclasses import dataclass
from enum import Enum
from typing import Optional

import numpy as np

from .imaging import Point2D


class Termination(Enum):
    CLOSED_AT_SEED = "ClosedAtSeed"
    HIT_BORDER = "HitBorder"
    MAX_STEPS = "MaxSteps"


@dataclass(frozen=True)
class TraceDiagnostics:
    """Per-sample detector state, one row per tracker step.

    label is the region under which the sample was scored (before any
    flip triggered by this sample); S is the post-update, post-reset sum.
    """

    x: np.ndarray
    y: np.ndarray
    intensity: np.ndarray
    S: np.ndarray
    h: np.ndarray
    label: np.ndarray
    alarm: np.ndarray


@dataclass(frozen=True)
class BoundaryTrace:
    change_points: tuple  # ordered Point2D
    termination: Termination
    seed: Point2D
    steps: int
    visited: Optional[np.ndarray] = None  # (steps+1, 2) positions incl. seed
    diagnostics: Optional[TraceDiagnostics] = None


def write_trace_csv(trace: BoundaryTrace, path) -> None:
    """Dump per-step diagnostics: step,x,y,intensity,S,h,label,alarm."""
    d = trace.diagnostics
    if d is None:
        raise ValueError("trace was recorded without diagnostics")
    with open(path, "w", newline="", encoding="ascii") as f:
        wr = csv.writer(f)
        wr.writerow(["step", "x", "y", "intensity", "S", "h", "label", "alarm"])
        for k in range(len(d.x)):
            wr.writerow([
                k,
                repr(float(d.x[k])),
                repr(float(d.y[k])),
                repr(float(d.intensity[k])),
                repr(float(d.S[k])),
                repr(float(d.h[k])),
                int(d.label[k]),
                int(d.alarm[k]),
            ])

"""Automatic starting-point detection.

Walks integer pixels from a chosen image corner along the diagonal
toward the centre and returns the first pixel whose full 3x3
neighborhood mean exceeds the threshold. On head images scanned from
the bottom-left this lands on the outer tissue rim.
"""

from __future__ import annotations

from dataclasses import dataclass
from enum import Enum

from .errors import SeedNotFound
from .imaging import GrayImage, Point2D


class Corner(Enum):
    BOTTOM_LEFT = "bottom-left"
    BOTTOM_RIGHT = "bottom-right"
    TOP_LEFT = "top-left"
    TOP_RIGHT = "top-right"


@dataclass(frozen=True)
class SeedConfig:
    corner: Corner = Corner.BOTTOM_LEFT


# start offset and per-step delta for each corner, in (x, y) pixel indices;
# the scan begins at the first pixel whose 3x3 neighborhood is in-bounds
_SCAN = {
    Corner.BOTTOM_LEFT: ((1, -2), (1, -1)),
    Corner.BOTTOM_RIGHT: ((-2, -2), (-1, -1)),
    Corner.TOP_LEFT: ((1, 1), (1, 1)),
    Corner.TOP_RIGHT: ((-2, 1), (-1, 1)),
}


def find_initial_point(img: GrayImage, threshold: float,
                       config: SeedConfig = SeedConfig()) -> Point2D:
    """First diagonal pixel (from the configured corner) whose 3x3 mean
    strictly exceeds the threshold, as a pixel-centre point."""
    data = img.data
    h, w = data.shape
    (sx, sy), (dx, dy) = _SCAN[config.corner]
    x = sx % w
    y = sy % h
    cx, cy = w // 2, h // 2
    while True:
        mean = data[y - 1:y + 2, x - 1:x + 2].mean()
        if mean > threshold:
            return Point2D(float(x), float(y))
        # stop once either index has reached the centre coordinate
        if (dx > 0 and x >= cx) or (dx < 0 and x <= cx):
            break
        if (dy > 0 and y >= cy) or (dy < 0 and y <= cy):
            break
        x += dx
        y += dy
    raise SeedNotFound(
        f"diagonal scan from {config.corner.value} found no neighborhood "
        f"mean above {threshold}")

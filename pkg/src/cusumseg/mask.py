"""Boundary trace to binary mask: contour rasterization and region fill.

The mask is unity on the traced tissue side (boundary pixels included)
and zero outside. Filling works from the outside in: every border pixel
not on the contour seeds a 4-connected exterior flood fill, and the
mask is the complement of that exterior, so no interior seed point ever
needs to be guessed.
"""

from __future__ import annotations

from collections import deque
from dataclasses import dataclass

import numpy as np

from .errors import DimensionMismatch, EmptyTrace, IoError, MalformedFile
from .imaging import _parse_pgm, _read_bytes
from .trace import BoundaryTrace, Termination


@dataclass(frozen=True)
class BinaryMask:
    bits: np.ndarray  # bool, shape (height, width)

    def __post_init__(self):
        arr = np.asarray(self.bits, dtype=bool)
        if arr.ndim != 2:
            raise MalformedFile("mask must be 2-dimensional")
        arr.flags.writeable = False
        object.__setattr__(self, "bits", arr)

    @property
    def width(self) -> int:
        return self.bits.shape[1]

    @property
    def height(self) -> int:
        return self.bits.shape[0]


@dataclass(frozen=True)
class FillResult:
    mask: BinaryMask
    degenerate: bool  # interior came out empty: mask equals the contour


def _round_px(v: float) -> int:
    # half-up, matching the tracker's pixel rounding
    return int(np.floor(v + 0.5))


def _bresenham(x0: int, y0: int, x1: int, y1: int):
    """Integer 8-connected line from (x0,y0) to (x1,y1), inclusive."""
    dx = abs(x1 - x0)
    dy = -abs(y1 - y0)
    sx = 1 if x0 < x1 else -1
    sy = 1 if y0 < y1 else -1
    err = dx + dy
    pts = []
    while True:
        pts.append((x0, y0))
        if x0 == x1 and y0 == y1:
            return pts
        e2 = 2 * err
        if e2 >= dy:
            err += dy
            x0 += sx
        if e2 <= dx:
            err += dx
            y0 += sy


def rasterize_contour(trace: BoundaryTrace, width: int, height: int) -> np.ndarray:
    """Mark each change point's pixel and connect consecutive points
    with discrete segments; the loop also closes last-to-first when the
    trace terminated back at its seed. Returns a bool (height, width) grid."""
    pts = trace.change_points
    if len(pts) == 0:
        raise EmptyTrace("trace carries no change points")
    grid = np.zeros((height, width), dtype=bool)

    def clampx(v: int) -> int:
        return min(max(v, 0), width - 1)

    def clampy(v: int) -> int:
        return min(max(v, 0), height - 1)

    pix = [(clampx(_round_px(p[0])), clampy(_round_px(p[1]))) for p in pts]
    for (x0, y0), (x1, y1) in zip(pix, pix[1:]):
        for x, y in _bresenham(x0, y0, x1, y1):
            grid[y, x] = True
    grid[pix[0][1], pix[0][0]] = True
    if trace.termination is Termination.CLOSED_AT_SEED and len(pix) > 1:
        for x, y in _bresenham(*pix[-1], *pix[0]):
            grid[y, x] = True
    return grid


def _border_cycle(width: int, height: int):
    """Border pixels in one clockwise cycle starting at (0, 0)."""
    cyc = [(x, 0) for x in range(width)]
    cyc += [(width - 1, y) for y in range(1, height)]
    cyc += [(x, height - 1) for x in range(width - 2, -1, -1)]
    cyc += [(0, y) for y in range(height - 2, 0, -1)]
    return cyc


def _nearest_border(x: int, y: int, width: int, height: int):
    """Project a pixel onto the closest image border (ties prefer the
    left, then right, then top border; deterministic)."""
    dists = (x, width - 1 - x, y, height - 1 - y)
    side = int(np.argmin(dists))
    if side == 0:
        return 0, y
    if side == 1:
        return width - 1, y
    if side == 2:
        return x, 0
    return x, height - 1


def _close_along_border(grid: np.ndarray, first, last) -> None:
    """Join the trace's two loose ends through the image border: each
    end projects straight to its nearest border pixel and the border is
    walked between the projections the short way around."""
    height, width = grid.shape
    pf = _nearest_border(first[0], first[1], width, height)
    pl = _nearest_border(last[0], last[1], width, height)
    for x, y in _bresenham(first[0], first[1], pf[0], pf[1]):
        grid[y, x] = True
    for x, y in _bresenham(last[0], last[1], pl[0], pl[1]):
        grid[y, x] = True
    cyc = _border_cycle(width, height)
    index = {p: i for i, p in enumerate(cyc)}
    n = len(cyc)
    i0, i1 = index[pf], index[pl]
    fwd = (i1 - i0) % n
    back = (i0 - i1) % n
    if fwd <= back:
        k, stop, step = i0, fwd, 1
    else:
        k, stop, step = i0, back, -1
    for _ in range(stop + 1):
        x, y = cyc[k % n]
        grid[y, x] = True
        k += step


def fill_mask(contour: np.ndarray, width: int, height: int,
              termination: Termination, endpoints=None) -> FillResult:
    """Fill the traced region: exterior flood fill from the border
    (4-connectivity), mask = complement. endpoints, when given for a
    border-terminated trace, are the first and last change-point pixels
    used to close the contour along the image border first."""
    if contour.shape != (height, width):
        raise DimensionMismatch(
            f"contour grid {contour.shape} vs {(height, width)}")
    grid = contour.copy()
    if termination is Termination.HIT_BORDER and endpoints is not None:
        _close_along_border(grid, endpoints[0], endpoints[1])
    exterior = np.zeros_like(grid)
    dq = deque()
    for x in range(width):
        for y in (0, height - 1):
            if not grid[y, x] and not exterior[y, x]:
                exterior[y, x] = True
                dq.append((x, y))
    for y in range(height):
        for x in (0, width - 1):
            if not grid[y, x] and not exterior[y, x]:
                exterior[y, x] = True
                dq.append((x, y))
    while dq:
        x, y = dq.popleft()
        if x > 0 and not grid[y, x - 1] and not exterior[y, x - 1]:
            exterior[y, x - 1] = True
            dq.append((x - 1, y))
        if x < width - 1 and not grid[y, x + 1] and not exterior[y, x + 1]:
            exterior[y, x + 1] = True
            dq.append((x + 1, y))
        if y > 0 and not grid[y - 1, x] and not exterior[y - 1, x]:
            exterior[y - 1, x] = True
            dq.append((x, y - 1))
        if y < height - 1 and not grid[y + 1, x] and not exterior[y + 1, x]:
            exterior[y + 1, x] = True
            dq.append((x, y + 1))
    bits = ~exterior
    degenerate = not bool((bits & ~grid).any())
    return FillResult(BinaryMask(bits), degenerate)


def mask_from_trace(trace: BoundaryTrace, width: int, height: int) -> FillResult:
    """rasterize_contour + fill_mask with the endpoints wired through."""
    grid = rasterize_contour(trace, width, height)
    endpoints = None
    if trace.termination is Termination.HIT_BORDER and len(trace.change_points) >= 1:
        first = trace.change_points[0]
        last = trace.change_points[-1]
        height_, width_ = grid.shape
        fx = min(max(_round_px(first[0]), 0), width_ - 1)
        fy = min(max(_round_px(first[1]), 0), height_ - 1)
        lx = min(max(_round_px(last[0]), 0), width_ - 1)
        ly = min(max(_round_px(last[1]), 0), height_ - 1)
        endpoints = ((fx, fy), (lx, ly))
    return fill_mask(grid, width, height, trace.termination, endpoints)


def save_mask(mask: BinaryMask, path) -> None:
    """Binary P5 with values {0, 255}."""
    header = f"P5\n{mask.width} {mask.height}\n255\n".encode("ascii")
    body = np.where(mask.bits, 255, 0).astype(np.uint8).tobytes()
    try:
        with open(path, "wb") as f:
            f.write(header)
            f.write(body)
    except OSError as e:
        raise IoError(str(e)) from e


def load_mask(path) -> BinaryMask:
    data, _ = _parse_pgm(_read_bytes(path))
    return BinaryMask(data > 0)

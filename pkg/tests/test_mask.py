import numpy as np
import pytest
from scipy.ndimage import binary_fill_holes

from cusumseg import (BinaryMask, BoundaryTrace, DimensionMismatch,
                      EmptyTrace, Point2D, Termination, load_mask,
                      mask_from_trace, save_mask)
from cusumseg.mask import fill_mask, rasterize_contour


def make_trace(points, termination=Termination.CLOSED_AT_SEED):
    pts = tuple(Point2D(float(x), float(y)) for x, y in points)
    return BoundaryTrace(change_points=pts, termination=termination,
                         seed=pts[0], steps=len(pts))


def test_square_ring_fills_to_full_square():
    trace = make_trace([(2, 2), (7, 2), (7, 7), (2, 7)])
    grid = rasterize_contour(trace, 10, 10)
    assert grid.sum() == 20  # 6x6 ring
    fill = fill_mask(grid, 10, 10, trace.termination)
    ys, xs = np.nonzero(fill.mask.bits)
    assert fill.mask.bits.sum() == 36
    assert xs.min() == 2 and xs.max() == 7 and ys.min() == 2 and ys.max() == 7
    assert not fill.degenerate


def test_single_point_is_degenerate():
    trace = make_trace([(4, 5)])
    fill = mask_from_trace(trace, 12, 12)
    assert fill.mask.bits.sum() == 1
    assert fill.mask.bits[5, 4]
    assert fill.degenerate


def test_coincident_points_collapse_to_one_pixel():
    trace = make_trace([(4.2, 5.1), (3.8, 4.9)])
    fill = mask_from_trace(trace, 12, 12)
    assert fill.mask.bits.sum() == 1 and fill.degenerate


def test_open_diagonal_has_no_interior():
    # a thin 8-connected stroke traps nothing: the 4-connected exterior
    # flows around its ends
    trace = make_trace([(3, 3), (10, 10)], Termination.MAX_STEPS)
    fill = mask_from_trace(trace, 16, 16)
    assert fill.degenerate
    assert fill.mask.bits.sum() == 8  # the stroke itself survives


def test_closure_only_for_closed_traces():
    corners = [(2, 2), (12, 2), (7, 10)]
    closed = mask_from_trace(make_trace(corners), 16, 16)
    open_ = mask_from_trace(make_trace(corners, Termination.MAX_STEPS), 16, 16)
    assert not closed.degenerate
    assert open_.degenerate
    assert closed.mask.bits.sum() > open_.mask.bits.sum()


def test_disk_boundary_layer_fills_back_to_disk(disk_truth):
    disk = disk_truth.bits
    inner = (np.roll(disk, 1, 0) & np.roll(disk, -1, 0)
             & np.roll(disk, 1, 1) & np.roll(disk, -1, 1))
    ring = disk & ~inner
    fill = fill_mask(ring, 128, 128, Termination.CLOSED_AT_SEED)
    assert np.array_equal(fill.mask.bits, disk)
    assert not fill.degenerate


def test_fill_matches_reference_hole_filler():
    rng = np.random.default_rng(3)
    coeff = rng.uniform(-0.15, 0.15, 5)
    theta = np.linspace(0.0, 2 * np.pi, 400, endpoint=False)
    r = 20.0 * (1.0 + sum(c * np.sin((i + 2) * theta + i)
                          for i, c in enumerate(coeff)))
    pts = np.column_stack([32 + r * np.cos(theta), 32 + r * np.sin(theta)])
    trace = make_trace(pts, Termination.CLOSED_AT_SEED)
    grid = rasterize_contour(trace, 64, 64)
    fill = fill_mask(grid, 64, 64, trace.termination)
    assert np.array_equal(fill.mask.bits, binary_fill_holes(grid))
    assert not fill.degenerate


def test_border_hit_closes_through_border():
    # vertical chord at x = 20; its ends project to the top and bottom
    # borders and the border walk rounds off the left slab
    trace = make_trace([(20, 5), (20, 60)], Termination.HIT_BORDER)
    fill = mask_from_trace(trace, 64, 64)
    want = np.zeros((64, 64), dtype=bool)
    want[:, :21] = True
    assert np.array_equal(fill.mask.bits, want)
    assert not fill.degenerate


def test_border_hit_without_endpoints_stays_open():
    trace = make_trace([(20, 5), (20, 60)], Termination.HIT_BORDER)
    grid = rasterize_contour(trace, 64, 64)
    fill = fill_mask(grid, 64, 64, trace.termination, endpoints=None)
    assert fill.degenerate


def test_full_border_contour_fills_everything():
    grid = np.zeros((9, 9), dtype=bool)
    grid[0, :] = grid[-1, :] = grid[:, 0] = grid[:, -1] = True
    fill = fill_mask(grid, 9, 9, Termination.CLOSED_AT_SEED)
    assert fill.mask.bits.all()
    assert not fill.degenerate


def test_rasterize_clamps_out_of_range_points():
    trace = make_trace([(-3.2, 5.0), (4.0, 200.0)], Termination.MAX_STEPS)
    grid = rasterize_contour(trace, 16, 16)
    assert grid[5, 0] and grid[15, 4]


def test_empty_trace_rejected():
    trace = BoundaryTrace(change_points=(), termination=Termination.MAX_STEPS,
                          seed=Point2D(0.0, 0.0), steps=0)
    with pytest.raises(EmptyTrace):
        mask_from_trace(trace, 8, 8)


def test_contour_shape_must_match():
    with pytest.raises(DimensionMismatch):
        fill_mask(np.zeros((4, 4), dtype=bool), 8, 8,
                  Termination.CLOSED_AT_SEED)


def test_mask_round_trip(tmp_path):
    rng = np.random.default_rng(11)
    mask = BinaryMask(rng.random((23, 17)) > 0.6)
    path = tmp_path / "m.pgm"
    save_mask(mask, path)
    back = load_mask(path)
    assert np.array_equal(back.bits, mask.bits)
    assert path.read_bytes().startswith(b"P5\n17 23\n255\n")


def test_mask_bits_immutable():
    mask = BinaryMask(np.zeros((4, 4), dtype=bool))
    with pytest.raises(ValueError):
        mask.bits[0, 0] = True

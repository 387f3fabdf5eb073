"""Automatic brain-tissue segmentation for T2-weighted perfusion MR.

A subpixel boundary tracker walks the image plane, classifying each
bilinear sample with a two-sided CUSUM change detector; region
crossings become change points, the closed walk becomes a binary ROI
mask. Includes a synthetic phantom generator, evaluation metrics, an
exhaustive-threshold baseline, and a CLI (``cusumseg``).

Set ``CUSUMSEG_DISABLE_NUMBA=1`` to force the pure-NumPy/Python
fallback path; results are bit-identical either way.
"""

from ._accel import NUMBA_ENABLED
from .cusum import DEFAULT_Q, CusumConfig, CusumDetector, ResetMode
from .errors import (CusumSegError, DegenerateThreshold, DimensionMismatch,
                     EmptyClass, EmptyImage, EmptyTrace, IndexOutOfRange,
                     InvalidSpec, IoError, MalformedFile, NoContrast,
                     SeedNotFound, TrackerDiverged)
from .imaging import (GrayImage, PerfusionStack, Point2D, load_image,
                      load_stack, otsu_class_means, otsu_threshold,
                      sample_bilinear, save_image, save_stack, working_image)
from .mask import BinaryMask, FillResult, load_mask, mask_from_trace, save_mask
from .metrics import (SegMetrics, best_threshold_baseline, confusion,
                      derive_metrics)
from .phantom import PhantomSpec, generate
from .planner import LoopMode, PlannerParams, RegionLabel
from .seed import Corner, SeedConfig, find_initial_point
from .segmenter import SegmentationResult, run_tracker, segment_image
from .trace import BoundaryTrace, Termination, TraceDiagnostics, write_trace_csv

__version__ = "0.1.0"

__all__ = [
    "BinaryMask", "BoundaryTrace", "Corner", "CusumConfig", "CusumDetector",
    "CusumSegError", "DEFAULT_Q", "DegenerateThreshold", "DimensionMismatch",
    "EmptyClass", "EmptyImage", "EmptyTrace", "FillResult", "GrayImage",
    "IndexOutOfRange", "InvalidSpec", "IoError", "LoopMode", "MalformedFile",
    "NoContrast", "NUMBA_ENABLED", "PerfusionStack", "PhantomSpec",
    "PlannerParams", "Point2D", "RegionLabel", "ResetMode", "SeedConfig",
    "SeedNotFound", "SegMetrics", "SegmentationResult", "Termination",
    "TraceDiagnostics", "TrackerDiverged", "best_threshold_baseline",
    "confusion", "derive_metrics", "find_initial_point", "generate",
    "load_image", "load_mask", "load_stack", "mask_from_trace",
    "otsu_class_means", "otsu_threshold", "run_tracker", "sample_bilinear",
    "save_image", "save_mask", "save_stack", "segment_image", "working_image",
    "write_trace_csv", "__version__",
]

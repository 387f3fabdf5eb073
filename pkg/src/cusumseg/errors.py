"""Exception taxonomy for the segmentation pipeline.

Errors are grouped by what the caller can do about them: input/file
problems, configuration problems, and runtime detection failures.
"""


class CusumSegError(Exception):
    """Base class for all package errors."""


# --- I/O and input format ---

class IoError(CusumSegError):
    """Filesystem-level failure (missing path, unreadable file)."""


class MalformedFile(CusumSegError):
    """File exists but violates the expected format."""


class IndexOutOfRange(CusumSegError):
    """Slice or timepoint index outside the stack's bounds."""


class DimensionMismatch(CusumSegError):
    """Two rasters that must share a shape do not."""


# --- image content / configuration ---

class NoContrast(CusumSegError):
    """Image has a single intensity value; no threshold exists."""


class EmptyClass(CusumSegError):
    """A threshold left one intensity class without any pixels."""


class SeedNotFound(CusumSegError):
    """Diagonal scan reached the image centre without a hit."""


class EmptyImage(CusumSegError):
    """Zero-pixel input where counts were expected."""


class InvalidSpec(CusumSegError):
    """Phantom specification violates its invariants."""


# --- runtime detection failures ---

class DegenerateThreshold(CusumSegError):
    """Alarm threshold collapsed below the noise floor; the two
    regions are statistically indistinguishable."""


class TrackerDiverged(CusumSegError):
    """Tracker hit its step budget without closing or reaching a
    border. Carries the partial trace for post-mortem inspection."""

    def __init__(self, message: str, trace=None):
        super().__init__(message)
        self.trace = trace


class EmptyTrace(CusumSegError):
    """No change points were recorded; nothing to rasterize."""

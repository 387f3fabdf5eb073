"""Image containers, PGM/stack I/O, bilinear sampling, Otsu thresholding.

Intensities are held as 64-bit floats internally regardless of the file
bit depth, so downstream running sums never hit quantization or
overflow issues. Files are PGM P2/P5 with maxval up to 65535 (two-byte
samples are big-endian, per the PGM convention). Pixel spacing comes
from an optional JSON sidecar and defaults to 1.0 x 1.0 mm.
"""

from __future__ import annotations

import json
import math
import os
from dataclasses import dataclass, field
from typing import NamedTuple

import numpy as np

from ._accel import njit
from .errors import (
    EmptyClass,
    IndexOutOfRange,
    IoError,
    MalformedFile,
    NoContrast,
)


class Point2D(NamedTuple):
    x: float
    y: float


@dataclass(frozen=True)
class GrayImage:
    """2D intensity grid with physical pixel spacing.

    data is row-major, shape (height, width), float64, finite and >= 0.
    """

    data: np.ndarray
    spacing_x: float = 1.0
    spacing_y: float = 1.0

    def __post_init__(self):
        arr = np.asarray(self.data, dtype=np.float64)
        if arr.ndim != 2:
            raise MalformedFile("image data must be 2-dimensional")
        h, w = arr.shape
        if w < 3 or h < 3:
            raise MalformedFile(f"image must be at least 3x3, got {w}x{h}")
        if not (self.spacing_x > 0 and self.spacing_y > 0):
            raise MalformedFile("pixel spacing must be positive")
        if not np.all(np.isfinite(arr)) or np.any(arr < 0):
            raise MalformedFile("intensities must be finite and non-negative")
        arr.flags.writeable = False
        object.__setattr__(self, "data", arr)

    @property
    def width(self) -> int:
        return self.data.shape[1]

    @property
    def height(self) -> int:
        return self.data.shape[0]


@dataclass(frozen=True)
class PerfusionStack:
    """Time series of images per slice position: images[slice][time]."""

    images: tuple  # tuple of tuples of GrayImage

    def __post_init__(self):
        slices = tuple(tuple(row) for row in self.images)
        if len(slices) < 1 or any(len(row) < 1 for row in slices):
            raise MalformedFile("stack needs at least one slice and one timepoint")
        nt = len(slices[0])
        for row in slices:
            if len(row) != nt:
                raise MalformedFile("all slices must share the timepoint count")
            first = row[0]
            for img in row:
                same = (
                    img.width == first.width
                    and img.height == first.height
                    and img.spacing_x == first.spacing_x
                    and img.spacing_y == first.spacing_y
                )
                if not same:
                    raise MalformedFile("images within a slice must share shape and spacing")
        object.__setattr__(self, "images", slices)

    @property
    def num_slices(self) -> int:
        return len(self.images)

    @property
    def num_timepoints(self) -> int:
        return len(self.images[0])


def working_image(stack: PerfusionStack, slice_index: int = 0, timepoint: int = 3) -> GrayImage:
    """Select the per-slice image the segmentation runs on (4th frame by default)."""
    if not (0 <= slice_index < stack.num_slices):
        raise IndexOutOfRange(
            f"slice {slice_index} outside [0, {stack.num_slices})")
    if not (0 <= timepoint < stack.num_timepoints):
        raise IndexOutOfRange(
            f"timepoint {timepoint} outside [0, {stack.num_timepoints})")
    return stack.images[slice_index][timepoint]


# ---------------------------------------------------------------------------
# PGM parsing


def _read_bytes(path) -> bytes:
    try:
        with open(path, "rb") as f:
            return f.read()
    except OSError as e:
        raise IoError(str(e)) from e


class _Scanner:
    """Token scanner over PGM header/ASCII body with # comment support."""

    def __init__(self, buf: bytes):
        self.buf = buf
        self.pos = 0

    def _skip_filler(self):
        buf, n = self.buf, len(self.buf)
        while self.pos < n:
            c = buf[self.pos]
            if c in b" \t\r\n\x0b\x0c":
                self.pos += 1
            elif c == 0x23:  # '#'
                while self.pos < n and buf[self.pos] not in b"\r\n":
                    self.pos += 1
            else:
                return

    def token(self) -> bytes:
        self._skip_filler()
        if self.pos >= len(self.buf):
            raise MalformedFile("unexpected end of file in PGM data")
        start = self.pos
        buf, n = self.buf, len(self.buf)
        while self.pos < n and buf[self.pos] not in b" \t\r\n\x0b\x0c#":
            self.pos += 1
        return buf[start:self.pos]

    def int_token(self, what: str) -> int:
        tok = self.token()
        try:
            return int(tok)
        except ValueError:
            raise MalformedFile(f"bad {what} token {tok!r}") from None

    def at_end(self) -> bool:
        self._skip_filler()
        return self.pos >= len(self.buf)


def _parse_pgm(buf: bytes):
    """Returns (data float64 (h, w), maxval)."""
    sc = _Scanner(buf)
    magic = sc.token()
    if magic not in (b"P2", b"P5"):
        raise MalformedFile(f"not a PGM file (magic {magic!r})")
    width = sc.int_token("width")
    height = sc.int_token("height")
    maxval = sc.int_token("maxval")
    if width < 1 or height < 1:
        raise MalformedFile(f"bad dimensions {width}x{height}")
    if not (0 < maxval <= 65535):
        raise MalformedFile(f"maxval {maxval} outside (0, 65535]")
    count = width * height
    if magic == b"P2":
        vals = np.empty(count, dtype=np.float64)
        for i in range(count):
            v = sc.int_token("sample")
            if v < 0 or v > maxval:
                raise MalformedFile(f"sample {v} outside [0, {maxval}]")
            vals[i] = v
        return vals.reshape(height, width), maxval
    # P5: exactly one whitespace byte after maxval, then raw samples
    if sc.pos >= len(buf) or buf[sc.pos] not in b" \t\r\n\x0b\x0c":
        raise MalformedFile("missing whitespace before P5 raster")
    start = sc.pos + 1
    two_byte = maxval > 255
    need = count * (2 if two_byte else 1)
    raster = buf[start:start + need]
    if len(raster) < need:
        raise MalformedFile(
            f"truncated P5 raster: need {need} bytes, have {len(raster)}")
    dtype = ">u2" if two_byte else np.uint8
    vals = np.frombuffer(raster, dtype=dtype, count=count).astype(np.float64)
    if vals.max(initial=0.0) > maxval:
        raise MalformedFile("P5 sample exceeds declared maxval")
    return vals.reshape(height, width), maxval


def _sidecar_path(path: str) -> str:
    stem, _ = os.path.splitext(path)
    return stem + ".json"


def _spacing_from_sidecar(path: str):
    side = _sidecar_path(path)
    if not os.path.exists(side):
        return 1.0, 1.0
    try:
        with open(side, "r", encoding="utf-8") as f:
            meta = json.load(f)
    except (OSError, json.JSONDecodeError) as e:
        raise MalformedFile(f"bad sidecar {side}: {e}") from e
    return float(meta.get("spacing_x", 1.0)), float(meta.get("spacing_y", 1.0))


def load_image(path) -> GrayImage:
    """Read a PGM (P2 or P5, maxval <= 65535) plus optional JSON sidecar."""
    path = os.fspath(path)
    if not os.path.exists(path):
        raise IoError(f"no such file: {path}")
    data, _ = _parse_pgm(_read_bytes(path))
    sx, sy = _spacing_from_sidecar(path)
    return GrayImage(data, sx, sy)


def save_image(img: GrayImage, path, maxval: int = 65535) -> None:
    """Write intensities as binary P5, rounding to the nearest integer."""
    path = os.fspath(path)
    data = np.clip(np.rint(img.data), 0, maxval)
    header = f"P5\n{img.width} {img.height}\n{maxval}\n".encode("ascii")
    body = data.astype(">u2" if maxval > 255 else np.uint8).tobytes()
    try:
        with open(path, "wb") as f:
            f.write(header)
            f.write(body)
    except OSError as e:
        raise IoError(str(e)) from e


METADATA_NAME = "metadata.json"


def _frame_name(slice_index: int, timepoint: int) -> str:
    return f"s{slice_index}_t{timepoint}.pgm"


def load_stack(directory) -> PerfusionStack:
    """Read a stack directory: metadata.json + s{slice}_t{time}.pgm frames."""
    directory = os.fspath(directory)
    meta_path = os.path.join(directory, METADATA_NAME)
    if not os.path.isdir(directory):
        raise IoError(f"no such directory: {directory}")
    if not os.path.exists(meta_path):
        raise MalformedFile(f"stack directory lacks {METADATA_NAME}")
    try:
        with open(meta_path, "r", encoding="utf-8") as f:
            meta = json.load(f)
    except (OSError, json.JSONDecodeError) as e:
        raise MalformedFile(f"bad {METADATA_NAME}: {e}") from e
    try:
        ns = int(meta["num_slices"])
        nt = int(meta["num_timepoints"])
    except (KeyError, TypeError, ValueError) as e:
        raise MalformedFile("metadata must carry num_slices and num_timepoints") from e
    sx = float(meta.get("spacing_x", 1.0))
    sy = float(meta.get("spacing_y", 1.0))
    slices = []
    for s in range(ns):
        frames = []
        for t in range(nt):
            fp = os.path.join(directory, _frame_name(s, t))
            if not os.path.exists(fp):
                raise MalformedFile(f"stack frame missing: {fp}")
            data, _ = _parse_pgm(_read_bytes(fp))
            frames.append(GrayImage(data, sx, sy))
        slices.append(tuple(frames))
    return PerfusionStack(tuple(slices))


def save_stack(stack: PerfusionStack, directory, maxval: int = 65535) -> None:
    directory = os.fspath(directory)
    os.makedirs(directory, exist_ok=True)
    first = stack.images[0][0]
    meta = {
        "spacing_x": first.spacing_x,
        "spacing_y": first.spacing_y,
        "num_timepoints": stack.num_timepoints,
        "num_slices": stack.num_slices,
    }
    with open(os.path.join(directory, METADATA_NAME), "w", encoding="utf-8") as f:
        json.dump(meta, f, indent=1, sort_keys=True)
        f.write("\n")
    for s, row in enumerate(stack.images):
        for t, img in enumerate(row):
            save_image(img, os.path.join(directory, _frame_name(s, t)), maxval)


# ---------------------------------------------------------------------------
# Sampling


@njit(cache=True)
def bilinear_at(data: np.ndarray, x: float, y: float) -> float:
    """Clamped bilinear interpolation on a (h, w) float64 grid."""
    h, w = data.shape
    if x < 0.0:
        x = 0.0
    elif x > w - 1.0:
        x = w - 1.0
    if y < 0.0:
        y = 0.0
    elif y > h - 1.0:
        y = h - 1.0
    x0 = int(math.floor(x))
    y0 = int(math.floor(y))
    if x0 > w - 2:
        x0 = w - 2
    if y0 > h - 2:
        y0 = h - 2
    fx = x - x0
    fy = y - y0
    v00 = data[y0, x0]
    v10 = data[y0, x0 + 1]
    v01 = data[y0 + 1, x0]
    v11 = data[y0 + 1, x0 + 1]
    top = v00 + (v10 - v00) * fx
    bot = v01 + (v11 - v01) * fx
    return top + (bot - top) * fy


def sample_bilinear(img: GrayImage, p: Point2D) -> float:
    """Continuous intensity at p; out-of-range coordinates are clamped."""
    return bilinear_at(img.data, float(p[0]), float(p[1]))


# ---------------------------------------------------------------------------
# Otsu


OTSU_BINS = 256


def otsu_from_values(values: np.ndarray) -> float:
    """Bin-center threshold maximizing inter-class variance; ties take
    the lowest threshold. Histogram: 256 bins over [min, max]."""
    vals = np.asarray(values, dtype=np.float64).ravel()
    if vals.size == 0:
        raise NoContrast("empty value set")
    lo = float(vals.min())
    hi = float(vals.max())
    if hi == lo:
        raise NoContrast("constant intensities: no threshold exists")
    counts, edges = np.histogram(vals, bins=OTSU_BINS, range=(lo, hi))
    centers = (edges[:-1] + edges[1:]) / 2.0
    p = counts.astype(np.float64) / vals.size
    w0 = np.cumsum(p)
    m_cum = np.cumsum(p * centers)
    m_total = m_cum[-1]
    valid = (w0 > 0.0) & (w0 < 1.0)
    sigma_b = np.zeros(OTSU_BINS, dtype=np.float64)
    w = w0[valid]
    m = m_cum[valid]
    sigma_b[valid] = (m_total * w - m) ** 2 / (w * (1.0 - w))
    best = int(np.argmax(sigma_b))  # argmax takes the first (lowest) maximum
    return float(centers[best])


def otsu_threshold(img: GrayImage) -> float:
    return otsu_from_values(img.data)


def otsu_class_means(img: GrayImage, t: float):
    """Means of pixels <= t and > t."""
    data = img.data
    below = data[data <= t]
    above = data[data > t]
    if below.size == 0 or above.size == 0:
        raise EmptyClass(f"threshold {t} leaves an empty intensity class")
    return float(below.mean()), float(above.mean())

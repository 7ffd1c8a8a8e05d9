"""
Shared domain types for billboard-salience.

Coordinate convention: origin at the top-left, x rightward, y downward; pixel
(x, y) covers [x, x+1) x [y, y+1). Boxes are integer (x, y, w, h) and contain
a point when box.x <= x < box.x + box.w (likewise for y).

Rasters and maps are numpy arrays indexed [row, column] = [y, x]. Arrays are
made read-only on construction so instances can be shared between workers.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Optional, Tuple

import numpy as np

from .errors import EmptyIntersection, UnsupportedChannelCount

# ITU-R BT.601 luma weights on (R, G, B)
LUMA_WEIGHTS = np.array([0.299, 0.587, 0.114], dtype=np.float64)

SPLITS = ("train", "val", "test")


def _frozen_array(values, dtype) -> np.ndarray:
    array = np.array(values, dtype=dtype, copy=True)
    array.setflags(write=False)
    return array


def round_half_up(value: float) -> int:
    """Round to the nearest integer, halves upward (2.5 -> 3, -2.5 -> -2)."""
    return int(math.floor(value + 0.5))


@dataclass(frozen=True, eq=False)
class RasterImage:
    """Decoded pixel grid with values in [0, 1].

    ``pixels`` has shape (height, width) for luma or (height, width, 3) for RGB.
    """

    pixels: np.ndarray

    def __post_init__(self):
        pixels = _frozen_array(self.pixels, np.float64)
        if pixels.ndim == 2:
            channels = 1
        elif pixels.ndim == 3:
            channels = pixels.shape[2]
        else:
            raise UnsupportedChannelCount(f"expected a 2-D or 3-D pixel array, got {pixels.ndim}-D")
        if channels not in (1, 3):
            raise UnsupportedChannelCount(f"unsupported channel count {channels}")
        if pixels.shape[0] < 1 or pixels.shape[1] < 1:
            raise ValueError(f"image must be at least 1x1, got shape {pixels.shape}")
        if pixels.size and (not np.all(np.isfinite(pixels)) or pixels.min() < 0.0 or pixels.max() > 1.0):
            raise ValueError("pixel values must lie in [0, 1]")
        if pixels.ndim == 3 and channels == 1:
            pixels = _frozen_array(pixels[:, :, 0], np.float64)
        object.__setattr__(self, "pixels", pixels)

    @property
    def width(self) -> int:
        return int(self.pixels.shape[1])

    @property
    def height(self) -> int:
        return int(self.pixels.shape[0])

    @property
    def channels(self) -> int:
        return 1 if self.pixels.ndim == 2 else int(self.pixels.shape[2])

    @classmethod
    def from_uint8(cls, data: np.ndarray) -> "RasterImage":
        """Build an image from 8-bit samples, mapping v to v / 255."""
        return cls(np.asarray(data, dtype=np.float64) / 255.0)


@dataclass(frozen=True, eq=False)
class SaliencyMap:
    """Per-pixel salience intensities, shape (height, width)."""

    values: np.ndarray
    normalized: bool = False

    def __post_init__(self):
        values = _frozen_array(self.values, np.float64)
        if values.ndim != 2 or values.shape[0] < 1 or values.shape[1] < 1:
            raise ValueError(f"saliency map must be a non-empty 2-D array, got shape {values.shape}")
        if self.normalized and (values.min() < 0.0 or values.max() > 1.0):
            raise ValueError("normalized saliency map has values outside [0, 1]")
        object.__setattr__(self, "values", values)

    @property
    def width(self) -> int:
        return int(self.values.shape[1])

    @property
    def height(self) -> int:
        return int(self.values.shape[0])


@dataclass(frozen=True)
class BoundingBox:
    """Axis-aligned region in integer pixel coordinates."""

    x: int
    y: int
    w: int
    h: int
    image_id: str = ""

    def __post_init__(self):
        if self.w < 1 or self.h < 1:
            raise ValueError(f"box extents must be positive, got w={self.w}, h={self.h}")

    @property
    def area(self) -> int:
        return self.w * self.h

    def contains(self, x: float, y: float) -> bool:
        return self.x <= x < self.x + self.w and self.y <= y < self.y + self.h


@dataclass(frozen=True)
class Detection:
    """Detector output: a box with its confidence."""

    box: BoundingBox
    confidence: float

    def __post_init__(self):
        if not 0.0 <= self.confidence <= 1.0:
            raise ValueError(f"confidence must lie in [0, 1], got {self.confidence}")

    @property
    def image_id(self) -> str:
        return self.box.image_id


@dataclass(frozen=True)
class FixationPoint:
    x: float
    y: float
    timestamp_ms: Optional[float] = None
    duration_ms: Optional[float] = None


@dataclass(frozen=True)
class FixationSet:
    """Fixations recorded for one image, in image pixel coordinates."""

    image_id: str
    points: Tuple[FixationPoint, ...] = field(default_factory=tuple)

    def __post_init__(self):
        object.__setattr__(self, "points", tuple(self.points))

    def __len__(self) -> int:
        return len(self.points)


@dataclass(frozen=True)
class ConfusionCounts:
    tp: int = 0
    tn: int = 0
    fp: int = 0
    fn: int = 0

    @property
    def total(self) -> int:
        return self.tp + self.tn + self.fp + self.fn

    def __add__(self, other: "ConfusionCounts") -> "ConfusionCounts":
        return ConfusionCounts(
            self.tp + other.tp, self.tn + other.tn, self.fp + other.fp, self.fn + other.fn
        )


@dataclass(frozen=True)
class ManifestEntry:
    """One image of a dataset and the files that describe it."""

    image_id: str
    image_path: str
    annotation_ref: str
    split: str
    detection_ref: Optional[str] = None
    gaze_ref: Optional[str] = None


@dataclass(frozen=True)
class DatasetManifest:
    entries: Tuple[ManifestEntry, ...] = field(default_factory=tuple)
    source: Optional[str] = None

    def __post_init__(self):
        object.__setattr__(self, "entries", tuple(self.entries))

    def split(self, name: str) -> Tuple[ManifestEntry, ...]:
        return tuple(entry for entry in self.entries if entry.split == name)

    def __len__(self) -> int:
        return len(self.entries)


def clip_box(box: BoundingBox, width: int, height: int) -> BoundingBox:
    """
    Intersect a box with the frame [0, width) x [0, height).

    Args:
        box: Box to clip; may extend past any frame edge
        width: Frame width in pixels
        height: Frame height in pixels

    Returns:
        The clipped box (the input itself when already inside the frame)

    Raises:
        EmptyIntersection: If the box lies entirely outside the frame

    Examples:
        >>> clip_box(BoundingBox(-5, 0, 10, 10), 100, 100)
        BoundingBox(x=0, y=0, w=5, h=10, image_id='')
    """
    x0 = max(box.x, 0)
    y0 = max(box.y, 0)
    x1 = min(box.x + box.w, width)
    y1 = min(box.y + box.h, height)
    if x1 <= x0 or y1 <= y0:
        raise EmptyIntersection(
            f"box ({box.x}, {box.y}, {box.w}, {box.h}) lies outside the {width}x{height} frame"
        )
    if (x0, y0, x1 - x0, y1 - y0) == (box.x, box.y, box.w, box.h):
        return box
    return BoundingBox(x0, y0, x1 - x0, y1 - y0, box.image_id)


def luminance(image: RasterImage) -> RasterImage:
    """
    Convert an image to a single luma channel.

    RGB pixels are weighted (0.299, 0.587, 0.114); a luma image is returned
    unchanged.

    Raises:
        UnsupportedChannelCount: If the image is neither 1- nor 3-channel
    """
    if image.channels == 1:
        return image
    if image.channels != 3:
        raise UnsupportedChannelCount(f"unsupported channel count {image.channels}")
    luma = image.pixels @ LUMA_WEIGHTS
    # Weights sum to 1 up to rounding; keep the result inside [0, 1].
    return RasterImage(np.clip(luma, 0.0, 1.0))

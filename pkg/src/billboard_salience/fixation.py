"""
Fixation handling for billboard-salience.

Binds fixation sets to image frames as binary fixation maps, counts fixations
inside regions (half-open containment), and detects fixations in raw gaze
samples with the dispersion-threshold (I-DT) algorithm.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import List, Sequence

import numpy as np

from .core import BoundingBox, FixationPoint, FixationSet
from .errors import NonMonotonicTimestamps, OutOfFrame


@dataclass(frozen=True, eq=False)
class BinaryFixationMap:
    """Boolean grid, shape (height, width); True where at least one fixation landed."""

    fixated: np.ndarray

    def __post_init__(self):
        fixated = np.array(self.fixated, dtype=bool, copy=True)
        if fixated.ndim != 2 or fixated.shape[0] < 1 or fixated.shape[1] < 1:
            raise ValueError(f"fixation map must be a non-empty 2-D array, got shape {fixated.shape}")
        fixated.setflags(write=False)
        object.__setattr__(self, "fixated", fixated)

    @property
    def width(self) -> int:
        return int(self.fixated.shape[1])

    @property
    def height(self) -> int:
        return int(self.fixated.shape[0])

    @property
    def count(self) -> int:
        return int(self.fixated.sum())


@dataclass(frozen=True)
class IdtParams:
    """
    Dispersion-threshold identification parameters.

    Attributes:
        dispersion_threshold_px: Maximum (x range + y range) of a fixation window
        duration_threshold_ms: Minimum window duration for a fixation
    """

    dispersion_threshold_px: float = 25.0
    duration_threshold_ms: float = 100.0

    def __post_init__(self):
        if not self.dispersion_threshold_px > 0:
            raise ValueError(f"dispersion_threshold_px must be positive, got {self.dispersion_threshold_px}")
        if not self.duration_threshold_ms > 0:
            raise ValueError(f"duration_threshold_ms must be positive, got {self.duration_threshold_ms}")


def out_of_frame(fixations: FixationSet, width: int, height: int) -> List[tuple]:
    """Return (index, x, y) for every point outside [0, width) x [0, height)."""
    return [
        (i, p.x, p.y)
        for i, p in enumerate(fixations.points)
        if not (0 <= p.x < width and 0 <= p.y < height)
    ]


def build_fixation_map(fixations: FixationSet, width: int, height: int) -> BinaryFixationMap:
    """
    Mark the cell (floor(x), floor(y)) of every fixation.

    Duplicate cells collapse; an empty set gives an all-false map.

    Raises:
        OutOfFrame: Listing every point outside the frame
    """
    offending = out_of_frame(fixations, width, height)
    if offending:
        raise OutOfFrame(offending, width, height)
    fixated = np.zeros((height, width), dtype=bool)
    if fixations.points:
        xs = np.floor([p.x for p in fixations.points]).astype(np.int64)
        ys = np.floor([p.y for p in fixations.points]).astype(np.int64)
        fixated[ys, xs] = True
    return BinaryFixationMap(fixated)


def fixations_in_box(fixations: FixationSet, box: BoundingBox) -> int:
    """Count fixations with box.x <= x < box.x + box.w and box.y <= y < box.y + box.h."""
    return sum(1 for p in fixations.points if box.contains(p.x, p.y))


def detect_fixations_idt(
    gaze: Sequence[FixationPoint], params: IdtParams = IdtParams(), image_id: str = ""
) -> FixationSet:
    """
    Detect fixations in timestamped gaze samples (I-DT).

    From each start sample the window grows while its dispersion
    (max x - min x) + (max y - min y) stays within the threshold. A window
    lasting at least the duration threshold becomes a fixation at the
    centroid of its samples, with the onset timestamp and the window
    duration, and scanning resumes after it; otherwise the start slides by one
    sample.

    Raises:
        NonMonotonicTimestamps: If timestamps are missing or not strictly increasing
    """
    samples = list(gaze)
    for i, p in enumerate(samples):
        if p.timestamp_ms is None:
            raise NonMonotonicTimestamps(i, f"sample {i} has no timestamp")
        if i > 0 and p.timestamp_ms <= samples[i - 1].timestamp_ms:
            raise NonMonotonicTimestamps(i)

    found = []
    n = len(samples)
    start = 0
    while start < n:
        min_x = max_x = samples[start].x
        min_y = max_y = samples[start].y
        end = start
        while end + 1 < n:
            nxt = samples[end + 1]
            lo_x, hi_x = min(min_x, nxt.x), max(max_x, nxt.x)
            lo_y, hi_y = min(min_y, nxt.y), max(max_y, nxt.y)
            if (hi_x - lo_x) + (hi_y - lo_y) > params.dispersion_threshold_px:
                break
            min_x, max_x, min_y, max_y = lo_x, hi_x, lo_y, hi_y
            end += 1

        duration = samples[end].timestamp_ms - samples[start].timestamp_ms
        if duration >= params.duration_threshold_ms:
            window = samples[start:end + 1]
            cx = math.fsum(p.x for p in window) / len(window)
            cy = math.fsum(p.y for p in window) / len(window)
            # Centroid stays inside the window's bounding rectangle.
            found.append(FixationPoint(
                x=min(max(cx, min_x), max_x),
                y=min(max(cy, min_y), max_y),
                timestamp_ms=samples[start].timestamp_ms,
                duration_ms=duration,
            ))
            start = end + 1
        else:
            start += 1
    return FixationSet(image_id, found)

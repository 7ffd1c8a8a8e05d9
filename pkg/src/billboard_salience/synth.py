"""
Synthetic dataset generator for self-tests.

Draws small dashboard-like frames with bright textured billboard panels on a
smooth background, then writes the matching annotations, gaze fixations,
jittered detections and a manifest. Output is a pure function of the seed and
size: the same arguments produce byte-identical files.
"""

from pathlib import Path
from typing import List, Optional, Union

import numpy as np

from .core import SPLITS, BoundingBox, Detection, FixationPoint, FixationSet, ManifestEntry, RasterImage
from .formats.gaze import write_gaze
from .formats.manifest import write_manifest
from .formats.netpbm import write_image
from .formats.regions import write_annotations, write_detections
from .logging_config import get_logger

logger = get_logger(__name__)

SYNTH_WIDTH = 96
SYNTH_HEIGHT = 64
MANIFEST_NAME = "dataset.manifest"


def _floor2(value: float) -> float:
    """Truncate to two decimals, never rounding up past a frame edge."""
    return float(np.floor(value * 100.0) / 100.0)


def _draw_frame(rng: np.random.Generator, boxes: List[BoundingBox]) -> RasterImage:
    ys = np.arange(SYNTH_HEIGHT, dtype=float)[:, None]
    tint = rng.uniform(0.15, 0.35, size=3)
    ramp = 0.15 * ys / SYNTH_HEIGHT
    pixels = tint[None, None, :] + ramp[:, :, None] + rng.normal(0.0, 0.02, size=(SYNTH_HEIGHT, SYNTH_WIDTH, 3))
    for box in boxes:
        colour = rng.uniform(0.6, 1.0, size=3)
        stripes = 0.15 * ((np.arange(box.w) // 2) % 2)
        pixels[box.y:box.y + box.h, box.x:box.x + box.w, :] = colour[None, None, :] - stripes[None, :, None]
    return RasterImage(np.clip(pixels, 0.0, 1.0))


def _make_boxes(rng: np.random.Generator, image_id: str) -> List[BoundingBox]:
    boxes = []
    for _ in range(int(rng.integers(1, 4))):
        w = int(rng.integers(10, 25))
        h = int(rng.integers(8, 17))
        x = int(rng.integers(0, SYNTH_WIDTH - w + 1))
        y = int(rng.integers(0, SYNTH_HEIGHT - h + 1))
        boxes.append(BoundingBox(x, y, w, h, image_id))
    return boxes


def _make_fixations(rng: np.random.Generator, boxes: List[BoundingBox], image_id: str) -> FixationSet:
    coords = []
    for box in boxes:
        if rng.random() < 0.6:
            for _ in range(int(rng.integers(1, 4))):
                coords.append((rng.uniform(box.x, box.x + box.w), rng.uniform(box.y, box.y + box.h)))
    for _ in range(int(rng.integers(1, 4))):
        coords.append((rng.uniform(0, SYNTH_WIDTH), rng.uniform(0, SYNTH_HEIGHT)))
    points = [
        FixationPoint(_floor2(x), _floor2(y), timestamp_ms=250.0 * i, duration_ms=200.0)
        for i, (x, y) in enumerate(coords)
    ]
    return FixationSet(image_id, points)


def _make_detections(rng: np.random.Generator, boxes: List[BoundingBox], image_id: str) -> List[Detection]:
    detections = []
    for box in boxes:
        dx, dy, dw, dh = (int(v) for v in rng.integers(-2, 3, size=4))
        x = max(box.x + dx, 0)
        y = max(box.y + dy, 0)
        jittered = BoundingBox(x, y, max(box.w + dw, 1), max(box.h + dh, 1), image_id)
        detections.append(Detection(jittered, round(float(rng.uniform(0.5, 1.0)), 3)))
    if rng.random() < 0.3:
        w, h = int(rng.integers(8, 16)), int(rng.integers(6, 12))
        stray = BoundingBox(int(rng.integers(0, SYNTH_WIDTH - w)), int(rng.integers(0, SYNTH_HEIGHT - h)), w, h, image_id)
        detections.append(Detection(stray, round(float(rng.uniform(0.05, 0.5)), 3)))
    return detections


def generate_dataset(
    out_dir: Union[str, Path], seed: int, size: int, manifest_path: Optional[Union[str, Path]] = None
) -> Path:
    """
    Write a synthetic dataset of ``size`` images and return the manifest path.

    Images are assigned to splits train, val, test in turn, so three images
    give one per split.
    """
    if size < 1:
        raise ValueError(f"size must be at least 1, got {size}")
    out_dir = Path(out_dir)
    for sub in ("images", "boxes", "gaze", "dets"):
        (out_dir / sub).mkdir(parents=True, exist_ok=True)

    rng = np.random.default_rng(seed)
    entries = []
    for index in range(size):
        image_id = f"synth-{index:03d}"
        boxes = _make_boxes(rng, image_id)
        image = _draw_frame(rng, boxes)
        fixations = _make_fixations(rng, boxes, image_id)
        detections = _make_detections(rng, boxes, image_id)

        paths = {
            "image": out_dir / "images" / f"{image_id}.ppm",
            "boxes": out_dir / "boxes" / f"{image_id}.boxes",
            "gaze": out_dir / "gaze" / f"{image_id}.gaze",
            "dets": out_dir / "dets" / f"{image_id}.dets",
        }
        write_image(image, paths["image"])
        write_annotations(boxes, paths["boxes"])
        write_gaze(fixations, paths["gaze"])
        write_detections(detections, paths["dets"])
        entries.append(ManifestEntry(
            image_id=image_id,
            image_path=str(paths["image"].resolve()),
            annotation_ref=str(paths["boxes"].resolve()),
            split=SPLITS[index % len(SPLITS)],
            detection_ref=str(paths["dets"].resolve()),
            gaze_ref=str(paths["gaze"].resolve()),
        ))

    manifest = Path(manifest_path) if manifest_path is not None else out_dir / MANIFEST_NAME
    manifest.parent.mkdir(parents=True, exist_ok=True)
    write_manifest(entries, manifest)
    logger.info("synthetic_dataset_written", path=str(manifest), seed=seed, size=size)
    return manifest

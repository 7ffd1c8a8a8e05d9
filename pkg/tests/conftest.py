"""Shared fixtures for the billboard-salience test suite."""

from pathlib import Path
from typing import Optional, Sequence

import numpy as np
import pytest

from billboard_salience.core import BoundingBox, Detection, FixationPoint, FixationSet, ManifestEntry, RasterImage
from billboard_salience.dataset_manager import dataset_manager
from billboard_salience.formats.gaze import write_gaze
from billboard_salience.formats.manifest import write_manifest
from billboard_salience.formats.netpbm import write_image
from billboard_salience.formats.regions import write_annotations, write_detections
from billboard_salience.synth import generate_dataset


@pytest.fixture
def rng():
    return np.random.default_rng(20240611)


@pytest.fixture
def synth_manifest(tmp_path) -> Path:
    """Six-image synthetic dataset (two images per split)."""
    return generate_dataset(tmp_path / "synth", seed=42, size=6)


@pytest.fixture(autouse=True)
def _reset_dataset_manager():
    dataset_manager.close_all()
    yield
    dataset_manager.close_all()


class DatasetBuilder:
    """Writes small hand-made datasets: images, boxes, gaze, detections and a manifest."""

    def __init__(self, root: Path):
        self.root = root
        self.entries = []
        for sub in ("images", "boxes", "gaze", "dets"):
            (root / sub).mkdir(parents=True, exist_ok=True)

    def add(
        self,
        image_id: str,
        split: str,
        boxes: Sequence[tuple],
        width: int = 32,
        height: int = 24,
        pixels: Optional[np.ndarray] = None,
        fixations: Optional[Sequence[tuple]] = None,
        detections: Optional[Sequence[tuple]] = None,
    ) -> ManifestEntry:
        if pixels is None:
            pixels = np.full((height, width), 0.25)
        image_path = self.root / "images" / f"{image_id}.pgm"
        write_image(RasterImage(pixels), image_path)
        boxes_path = self.root / "boxes" / f"{image_id}.boxes"
        write_annotations([BoundingBox(*b, image_id=image_id) for b in boxes], boxes_path)

        gaze_path = None
        if fixations is not None:
            gaze_path = self.root / "gaze" / f"{image_id}.gaze"
            write_gaze(FixationSet(image_id, [FixationPoint(float(x), float(y)) for x, y in fixations]), gaze_path)
        dets_path = None
        if detections is not None:
            dets_path = self.root / "dets" / f"{image_id}.dets"
            write_detections(
                [Detection(BoundingBox(x, y, w, h, image_id), c) for x, y, w, h, c in detections], dets_path
            )

        entry = ManifestEntry(
            image_id=image_id,
            image_path=str(image_path),
            annotation_ref=str(boxes_path),
            split=split,
            detection_ref=str(dets_path) if dets_path else None,
            gaze_ref=str(gaze_path) if gaze_path else None,
        )
        self.entries.append(entry)
        return entry

    def write(self, name: str = "dataset.manifest") -> Path:
        path = self.root / name
        write_manifest(self.entries, path)
        return path


@pytest.fixture
def dataset_builder(tmp_path) -> DatasetBuilder:
    return DatasetBuilder(tmp_path / "data")

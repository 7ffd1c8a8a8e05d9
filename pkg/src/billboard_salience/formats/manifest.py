"""Dataset manifests (.manifest).

JSON Lines: one object per image with keys ``image_id``, ``image``,
``annotations``, ``split`` (train | val | test) and optional ``detections``
and ``gaze``. Relative paths resolve against the manifest's directory. Blank
lines and lines starting with ``#`` are ignored.

Example record::

    {"image_id": "frame-0001", "image": "images/frame-0001.ppm",
     "annotations": "boxes/frame-0001.boxes", "gaze": "gaze/frame-0001.gaze",
     "split": "test"}
"""

import json
import os
from pathlib import Path
from typing import Iterable, Optional, Union

from ..core import SPLITS, DatasetManifest, ManifestEntry
from ..errors import DuplicateImageId, MissingFile, ParseError, read_text_file
from ..logging_config import get_logger

logger = get_logger(__name__)

_REQUIRED_KEYS = ("image_id", "image", "annotations", "split")
_OPTIONAL_KEYS = ("detections", "gaze")


def _resolve(base: Path, manifest_path: str, line_no: int, field: str, value) -> str:
    if not isinstance(value, str) or not value:
        raise ParseError(manifest_path, line_no, "expected a non-empty path string", field=field)
    resolved = (base / value).resolve()
    if not resolved.is_file():
        raise MissingFile(str(resolved), referenced_from=f"{manifest_path}:{line_no}")
    return str(resolved)


def load_manifest(path: Union[str, Path]) -> DatasetManifest:
    """
    Load and validate a dataset manifest.

    Every referenced file must exist and every split label must be one of
    train, val, test.

    Raises:
        ParseError: With line number and field
        MissingFile: With the unresolvable path
        DuplicateImageId: When an image_id repeats
    """
    manifest_path = str(Path(path).resolve())
    if not os.path.isfile(manifest_path):
        raise MissingFile(manifest_path)
    base = Path(manifest_path).parent
    entries = []
    seen = {}
    lines = read_text_file(manifest_path).splitlines()
    for line_no, line in enumerate(lines, start=1):
        stripped = line.strip()
        if not stripped or stripped.startswith("#"):
            continue
        try:
            record = json.loads(stripped)
        except json.JSONDecodeError as e:
            raise ParseError(manifest_path, line_no, f"invalid JSON: {e.msg} at column {e.colno}") from None
        if not isinstance(record, dict):
            raise ParseError(manifest_path, line_no, "expected a JSON object")
        for key in _REQUIRED_KEYS:
            if key not in record:
                raise ParseError(manifest_path, line_no, "missing required field", field=key)
        for key in record:
            if key not in _REQUIRED_KEYS + _OPTIONAL_KEYS:
                raise ParseError(manifest_path, line_no, "unknown field", field=key)

        image_id = record["image_id"]
        if not isinstance(image_id, str) or not image_id:
            raise ParseError(manifest_path, line_no, "expected a non-empty string", field="image_id")
        if image_id in seen:
            raise DuplicateImageId(
                manifest_path, line_no, f"image_id {image_id!r} already used on line {seen[image_id]}",
                field="image_id",
            )
        seen[image_id] = line_no
        split = record["split"]
        if split not in SPLITS:
            raise ParseError(
                manifest_path, line_no, f"split must be one of {', '.join(SPLITS)}, got {split!r}",
                field="split",
            )

        optional = {}
        for key in _OPTIONAL_KEYS:
            if record.get(key) is not None:
                optional[key] = _resolve(base, manifest_path, line_no, key, record[key])
        entries.append(ManifestEntry(
            image_id=image_id,
            image_path=_resolve(base, manifest_path, line_no, "image", record["image"]),
            annotation_ref=_resolve(base, manifest_path, line_no, "annotations", record["annotations"]),
            split=split,
            detection_ref=optional.get("detections"),
            gaze_ref=optional.get("gaze"),
        ))

    logger.info(
        "manifest_loaded",
        path=manifest_path,
        entries=len(entries),
        **{split: sum(1 for e in entries if e.split == split) for split in SPLITS},
    )
    return DatasetManifest(entries, source=manifest_path)


def write_manifest(entries: Iterable[ManifestEntry], path: Union[str, Path], base: Optional[Path] = None) -> None:
    """Write entries as JSON Lines; paths are stored relative to ``base`` (default: the manifest's directory)."""
    path = Path(path)
    base = Path(base) if base is not None else path.parent

    def rel(value: Optional[str]) -> Optional[str]:
        if value is None:
            return None
        return Path(os.path.relpath(value, base)).as_posix()

    lines = []
    for entry in entries:
        record = {
            "image_id": entry.image_id,
            "image": rel(entry.image_path),
            "annotations": rel(entry.annotation_ref),
            "split": entry.split,
        }
        if entry.detection_ref is not None:
            record["detections"] = rel(entry.detection_ref)
        if entry.gaze_ref is not None:
            record["gaze"] = rel(entry.gaze_ref)
        lines.append(json.dumps(record) + "\n")
    path.write_text("".join(lines), encoding="utf-8")

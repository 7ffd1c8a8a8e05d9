"""Annotation (.boxes) and detection (.dets) files.

One region per line, whitespace-separated ``x y w h`` (plus ``confidence`` for
detections), one file per image. Sub-pixel values are rounded half up.
Blank lines and lines starting with ``#`` are skipped.
"""

import math
from pathlib import Path
from typing import Iterable, Iterator, List, Tuple, Union

from ..core import BoundingBox, Detection, round_half_up
from ..errors import ConfidenceOutOfRange, InvalidBox, ParseError, read_text_file

BOX_FIELDS = ("x", "y", "w", "h")
DETECTION_FIELDS = BOX_FIELDS + ("confidence",)


def _rows(path: str) -> Iterator[Tuple[int, List[str]]]:
    text = read_text_file(path)
    for line_no, line in enumerate(text.splitlines(), start=1):
        stripped = line.strip()
        if not stripped or stripped.startswith("#"):
            continue
        yield line_no, stripped.split()


def _parse_fields(path: str, line_no: int, tokens: List[str], names: Tuple[str, ...]) -> List[float]:
    if len(tokens) != len(names):
        raise ParseError(path, line_no, f"expected {len(names)} fields ({' '.join(names)}), got {len(tokens)}")
    values = []
    for name, token in zip(names, tokens):
        try:
            value = float(token)
        except ValueError:
            raise ParseError(path, line_no, f"not a number: {token!r}", field=name) from None
        if not math.isfinite(value):
            raise ParseError(path, line_no, f"not a finite number: {token!r}", field=name)
        values.append(value)
    return values


def _make_box(path: str, line_no: int, values: List[float], image_id: str) -> BoundingBox:
    x, y, w, h = (round_half_up(v) for v in values[:4])
    if w < 1:
        raise InvalidBox(path, line_no, f"width must be positive, got {values[2]:g}", field="w")
    if h < 1:
        raise InvalidBox(path, line_no, f"height must be positive, got {values[3]:g}", field="h")
    return BoundingBox(x, y, w, h, image_id)


def load_annotations(path: Union[str, Path], image_id: str) -> List[BoundingBox]:
    """
    Load the ground-truth boxes of one image.

    Raises:
        ParseError: For malformed rows, located by line and field
        InvalidBox: For zero-area or negative boxes
    """
    path = str(path)
    boxes = []
    for line_no, tokens in _rows(path):
        values = _parse_fields(path, line_no, tokens, BOX_FIELDS)
        boxes.append(_make_box(path, line_no, values, image_id))
    return boxes


def load_detections(path: Union[str, Path], image_id: str) -> List[Detection]:
    """
    Load the detector output of one image.

    Raises:
        ParseError, InvalidBox: As load_annotations
        ConfidenceOutOfRange: For confidences outside [0, 1]
    """
    path = str(path)
    detections = []
    for line_no, tokens in _rows(path):
        values = _parse_fields(path, line_no, tokens, DETECTION_FIELDS)
        confidence = values[4]
        if not 0.0 <= confidence <= 1.0:
            raise ConfidenceOutOfRange(
                path, line_no, f"confidence must lie in [0, 1], got {confidence:g}", field="confidence"
            )
        detections.append(Detection(_make_box(path, line_no, values, image_id), confidence))
    return detections


def write_annotations(boxes: Iterable[BoundingBox], path: Union[str, Path]) -> None:
    lines = [f"{b.x} {b.y} {b.w} {b.h}\n" for b in boxes]
    Path(path).write_text("".join(lines), encoding="utf-8")


def write_detections(detections: Iterable[Detection], path: Union[str, Path]) -> None:
    lines = [f"{d.box.x} {d.box.y} {d.box.w} {d.box.h} {d.confidence!r}\n" for d in detections]
    Path(path).write_text("".join(lines), encoding="utf-8")

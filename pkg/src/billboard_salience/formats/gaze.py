"""Gaze / fixation logs (.gaze).

Comma-separated with a header row naming the columns: ``x`` and ``y`` are
required, ``timestamp_ms`` and ``duration_ms`` optional (cells may be left
empty). Coordinates are image pixels; frame bounds are checked later, when
the fixations are bound to an image.
"""

import csv
import io
import math
from pathlib import Path
from typing import Optional, Union

from ..core import FixationPoint, FixationSet
from ..errors import ParseError, read_text_file

REQUIRED_COLUMNS = ("x", "y")
OPTIONAL_COLUMNS = ("timestamp_ms", "duration_ms")


def _number(path: str, line_no: int, field: str, cell: str, optional: bool) -> Optional[float]:
    cell = cell.strip()
    if cell == "":
        if optional:
            return None
        raise ParseError(path, line_no, "missing value", field=field)
    try:
        value = float(cell)
    except ValueError:
        raise ParseError(path, line_no, f"not a number: {cell!r}", field=field) from None
    if not math.isfinite(value):
        raise ParseError(path, line_no, f"not a finite number: {cell!r}", field=field)
    if optional and value < 0:
        raise ParseError(path, line_no, f"must be nonnegative, got {value:g}", field=field)
    return value


def load_gaze(path: Union[str, Path], image_id: str) -> FixationSet:
    """
    Load the fixations recorded for one image.

    Raises:
        ParseError: For a bad header or malformed rows, located by line and
            column
    """
    path = str(path)
    text = read_text_file(path)
    reader = csv.reader(io.StringIO(text))
    try:
        header = [name.strip() for name in next(reader)]
    except StopIteration:
        raise ParseError(path, 1, "missing header row") from None

    for name in REQUIRED_COLUMNS:
        if name not in header:
            raise ParseError(path, 1, f"header lacks required column {name!r}", field=name)
    for name in header:
        if name not in REQUIRED_COLUMNS + OPTIONAL_COLUMNS:
            raise ParseError(path, 1, f"unknown column {name!r}", field=name)
    if len(set(header)) != len(header):
        raise ParseError(path, 1, "duplicate column in header")

    points = []
    for row in reader:
        line_no = reader.line_num
        if not row or all(not cell.strip() for cell in row):
            continue
        if len(row) != len(header):
            raise ParseError(path, line_no, f"expected {len(header)} columns, got {len(row)}")
        cells = dict(zip(header, row))
        points.append(FixationPoint(
            x=_number(path, line_no, "x", cells["x"], optional=False),
            y=_number(path, line_no, "y", cells["y"], optional=False),
            timestamp_ms=_number(path, line_no, "timestamp_ms", cells.get("timestamp_ms", ""), optional=True),
            duration_ms=_number(path, line_no, "duration_ms", cells.get("duration_ms", ""), optional=True),
        ))
    return FixationSet(image_id, points)


def write_gaze(fixations: FixationSet, path: Union[str, Path]) -> None:
    buffer = io.StringIO()
    writer = csv.writer(buffer, lineterminator="\n")
    writer.writerow(REQUIRED_COLUMNS + OPTIONAL_COLUMNS)
    for p in fixations.points:
        writer.writerow([
            repr(p.x),
            repr(p.y),
            "" if p.timestamp_ms is None else repr(p.timestamp_ms),
            "" if p.duration_ms is None else repr(p.duration_ms),
        ])
    Path(path).write_text(buffer.getvalue(), encoding="utf-8")

"""Significance threshold records.

A small ``key=value`` text file per saliency method::

    value=0.416
    n_regions=0
    source=override
    method=spectral-residual
"""

import hashlib
from pathlib import Path
from typing import Union

from ..errors import ParseError, read_text_file
from ..significance import SignificanceThreshold

THRESHOLD_SUFFIX = ".threshold"
_KEYS = ("value", "n_regions", "source", "method")


def method_slug(method_id: str) -> str:
    """
    File-name-safe name for a method id.

    An external source keeps its directory name plus a short digest of the
    resolved directory, so two runs named "maps" in different places get
    their own threshold and report ("external:/runs/unisal" ->
    "external-unisal-<8 hex digits>").
    """
    if method_id.startswith("external:"):
        directory = Path(method_id.split(":", 1)[1])
        digest = hashlib.sha1(str(directory.resolve()).encode("utf-8")).hexdigest()[:8]
        method_id = f"external-{directory.name or 'maps'}-{digest}"
    return "".join(c if c.isalnum() or c in "-_." else "-" for c in method_id)


def threshold_path(out_dir: Union[str, Path], method_id: str) -> Path:
    return Path(out_dir) / f"{method_slug(method_id)}{THRESHOLD_SUFFIX}"


def write_threshold(threshold: SignificanceThreshold, path: Union[str, Path]) -> None:
    Path(path).write_text(
        f"value={threshold.value!r}\n"
        f"n_regions={threshold.n_regions}\n"
        f"source={threshold.source}\n"
        f"method={threshold.method_id}\n",
        encoding="utf-8",
    )


def read_threshold(path: Union[str, Path]) -> SignificanceThreshold:
    """
    Read a threshold record.

    Raises:
        ParseError: For missing keys, unknown keys or bad values
    """
    path = str(path)
    fields = {}
    for line_no, line in enumerate(read_text_file(path).splitlines(), start=1):
        if not line.strip() or line.lstrip().startswith("#"):
            continue
        key, sep, value = line.partition("=")
        key = key.strip()
        if not sep:
            raise ParseError(path, line_no, "expected key=value")
        if key not in _KEYS:
            raise ParseError(path, line_no, "unknown key", field=key)
        fields[key] = (line_no, value.strip())
    for key in _KEYS:
        if key not in fields:
            raise ParseError(path, len(fields) + 1, "missing key", field=key)

    line_no, raw = fields["value"]
    try:
        value = float(raw)
    except ValueError:
        raise ParseError(path, line_no, f"not a number: {raw!r}", field="value") from None
    count_line, raw_count = fields["n_regions"]
    if not raw_count.isdigit():
        raise ParseError(path, count_line, f"not a nonnegative integer: {raw_count!r}", field="n_regions")
    try:
        return SignificanceThreshold(
            value=value,
            n_regions=int(raw_count),
            source=fields["source"][1],
            method_id=fields["method"][1],
        )
    except ValueError as e:
        raise ParseError(path, line_no, str(e), field="value") from None

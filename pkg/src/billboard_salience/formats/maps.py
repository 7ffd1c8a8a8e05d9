"""Saliency map codecs.

Two encodings:

- ``.pgm``: binary graymap (P5), maxval 255, sample = round_half_up(v * 255).
  Reading maps samples back by v / maxval, so the round trip is within 1/510.
- ``.salf``: lossless float container. 16-byte header (magic ``SALF``,
  version, width, height as little-endian u32) followed by width * height
  little-endian float32 values, row-major.
"""

import struct
from pathlib import Path
from typing import Union

import numpy as np

from ..core import SaliencyMap
from ..errors import FormatError, UnsupportedMagic, validate_input_size
from ..logging_config import get_logger
from .netpbm import decode_netpbm, encode_netpbm, quantize

logger = get_logger(__name__)

SALF_MAGIC = b"SALF"
SALF_VERSION = 1
SALF_HEADER = struct.Struct("<4sIII")
_SALF_DTYPE = np.dtype("<f4")

MAP_EXTENSIONS = (".salf", ".pgm")


def encode_salf(values: np.ndarray) -> bytes:
    values = np.asarray(values)
    height, width = values.shape
    return SALF_HEADER.pack(SALF_MAGIC, SALF_VERSION, width, height) + values.astype(_SALF_DTYPE).tobytes()


def decode_salf(data: bytes) -> np.ndarray:
    """Decode a SALF container to a float64 array of its float32 values."""
    if len(data) < SALF_HEADER.size:
        raise FormatError(f"header truncated ({len(data)} of {SALF_HEADER.size} bytes)", offset=len(data))
    magic, version, width, height = SALF_HEADER.unpack_from(data)
    if magic != SALF_MAGIC:
        raise UnsupportedMagic(f"unsupported magic {magic!r}", offset=0)
    if version != SALF_VERSION:
        raise FormatError(f"unsupported SALF version {version}", offset=4)
    if width < 1 or height < 1:
        raise FormatError(f"map dimensions must be positive, got {width}x{height}", offset=8)
    expected = SALF_HEADER.size + width * height * _SALF_DTYPE.itemsize
    if len(data) != expected:
        raise FormatError(
            f"payload size mismatch: expected {expected} bytes, found {len(data)}",
            offset=min(len(data), expected),
        )
    values = np.frombuffer(data, dtype=_SALF_DTYPE, offset=SALF_HEADER.size).astype(np.float64)
    if not np.all(np.isfinite(values)):
        bad = int(np.argmin(np.isfinite(values)))
        raise FormatError("non-finite value", offset=SALF_HEADER.size + bad * _SALF_DTYPE.itemsize)
    return values.reshape(height, width)


def decode_map(data: bytes) -> np.ndarray:
    """
    Decode any supported map encoding, chosen by magic number.

    Returns:
        float64 array of shape (height, width); graymap samples are scaled by
        1 / maxval

    Raises:
        UnsupportedMagic: For anything that is neither SALF nor P5
        FormatError: For malformed or truncated content
    """
    if data[:4] == SALF_MAGIC:
        return decode_salf(data)
    if data[:2] == b"P5":
        samples, maxval = decode_netpbm(data)
        return samples.astype(np.float64) / maxval
    raise UnsupportedMagic(f"unsupported magic {data[:4]!r}", offset=0)


def _looks_normalized(values: np.ndarray) -> bool:
    low, high = float(values.min()), float(values.max())
    if low < 0.0 or high > 1.0:
        return False
    return (low == 0.0 and high == 1.0) or high == 0.0


def write_map(saliency: SaliencyMap, path: Union[str, Path]) -> None:
    """
    Write a map; the encoding follows the file extension (.salf or .pgm).

    Raises:
        ValueError: If a graymap is requested for a map that is not normalised
        FormatError: For unsupported extensions
    """
    path = Path(path)
    suffix = path.suffix.lower()
    if suffix == ".salf":
        payload = encode_salf(saliency.values)
    elif suffix == ".pgm":
        if not saliency.normalized:
            raise ValueError("8-bit graymap output requires a normalized map")
        payload = encode_netpbm(quantize(saliency.values))
    else:
        raise FormatError(f"unsupported map extension {suffix!r}", path=str(path))
    path.write_bytes(payload)
    logger.debug("saliency_map_written", path=str(path), width=saliency.width, height=saliency.height)


def read_map(path: Union[str, Path]) -> SaliencyMap:
    """
    Read a map written by write_map (or any P5 graymap).

    The normalized flag is set when every value lies in [0, 1] and the map
    spans exactly [0, 1] or is all zeros.

    Raises:
        FormatError: With the path and byte offset of the failure
        UnsupportedMagic: For unknown encodings
    """
    path = str(path)
    validate_input_size(path)
    try:
        values = decode_map(Path(path).read_bytes())
    except FormatError as e:
        raise type(e)(e.reason, offset=e.offset, path=path) from e
    return SaliencyMap(values, normalized=_looks_normalized(values))

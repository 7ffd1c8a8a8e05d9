"""Binary netpbm codec (P5 graymap, P6 pixmap).

Headers may contain ``#`` comments; maxval up to 65535, with 16-bit samples
stored big-endian as the netpbm family requires. Decoded samples are mapped
to [0, 1] by v / maxval.
"""

from pathlib import Path
from typing import Tuple, Union

import numpy as np

from ..core import RasterImage
from ..errors import FormatError, UnsupportedMagic, validate_input_size

NETPBM_MAGICS = {b"P5": 1, b"P6": 3}
_WHITESPACE = b" \t\n\r\x0b\x0c"


def _read_header_token(data: bytes, pos: int) -> Tuple[bytes, int]:
    """Return the next header token and the position just past it."""
    length = len(data)
    while pos < length:
        byte = data[pos:pos + 1]
        if byte == b"#":
            while pos < length and data[pos:pos + 1] not in (b"\n", b"\r"):
                pos += 1
        elif byte in _WHITESPACE:
            pos += 1
        else:
            break
    start = pos
    while pos < length and data[pos:pos + 1] not in _WHITESPACE and data[pos:pos + 1] != b"#":
        pos += 1
    if start == pos:
        raise FormatError("truncated header", offset=start)
    return data[start:pos], pos


def _read_header_int(data: bytes, pos: int, name: str) -> Tuple[int, int]:
    token, end = _read_header_token(data, pos)
    if not token.isdigit():
        raise FormatError(f"{name} is not a positive integer: {token[:16]!r}", offset=end - len(token))
    return int(token), end


def decode_netpbm(data: bytes) -> Tuple[np.ndarray, int]:
    """
    Decode a P5/P6 file to an integer sample array.

    Returns:
        (samples, maxval) where samples has shape (h, w) for P5 and (h, w, 3)
        for P6

    Raises:
        UnsupportedMagic: If the file is not P5 or P6
        FormatError: For malformed headers or truncated rasters
    """
    magic = data[:2]
    if magic not in NETPBM_MAGICS:
        raise UnsupportedMagic(f"unsupported magic {magic!r}", offset=0)
    channels = NETPBM_MAGICS[magic]

    width, pos = _read_header_int(data, 2, "width")
    height, pos = _read_header_int(data, pos, "height")
    maxval, pos = _read_header_int(data, pos, "maxval")
    if width < 1 or height < 1:
        raise FormatError(f"image dimensions must be positive, got {width}x{height}", offset=pos)
    if not 1 <= maxval <= 65535:
        raise FormatError(f"maxval must lie in [1, 65535], got {maxval}", offset=pos)
    if pos >= len(data) or data[pos:pos + 1] not in _WHITESPACE:
        raise FormatError("missing whitespace before raster", offset=pos)
    pos += 1

    dtype = np.dtype(">u2") if maxval > 255 else np.dtype("u1")
    count = width * height * channels
    expected = count * dtype.itemsize
    available = len(data) - pos
    if available < expected:
        raise FormatError(
            f"raster truncated: expected {expected} bytes, found {available}", offset=len(data)
        )
    samples = np.frombuffer(data, dtype=dtype, count=count, offset=pos).astype(np.int64)
    if samples.max(initial=0) > maxval:
        bad = int(np.argmax(samples > maxval))
        raise FormatError(f"sample exceeds maxval {maxval}", offset=pos + bad * dtype.itemsize)
    shape = (height, width) if channels == 1 else (height, width, channels)
    return samples.reshape(shape), maxval


def encode_netpbm(samples: np.ndarray, maxval: int = 255) -> bytes:
    """Encode an integer sample array as P5 (2-D) or P6 (h, w, 3)."""
    samples = np.asarray(samples)
    if samples.ndim == 2:
        magic = b"P5"
    elif samples.ndim == 3 and samples.shape[2] == 3:
        magic = b"P6"
    else:
        raise ValueError(f"cannot encode array of shape {samples.shape} as netpbm")
    dtype = np.dtype(">u2") if maxval > 255 else np.dtype("u1")
    height, width = samples.shape[:2]
    header = b"%s\n%d %d\n%d\n" % (magic, width, height, maxval)
    return header + samples.astype(dtype).tobytes()


def quantize(values: np.ndarray, maxval: int = 255) -> np.ndarray:
    """Map [0, 1] reals to integer samples, rounding half up."""
    return np.floor(np.clip(values, 0.0, 1.0) * maxval + 0.5).astype(np.int64)


def read_image(path: Union[str, Path]) -> RasterImage:
    """
    Load a P5/P6 image from disk.

    Raises:
        FormatError: With the path and byte offset of the failure
    """
    path = str(path)
    validate_input_size(path)
    data = Path(path).read_bytes()
    try:
        samples, maxval = decode_netpbm(data)
    except FormatError as e:
        raise type(e)(e.reason, offset=e.offset, path=path) from e
    return RasterImage(samples.astype(np.float64) / maxval)


def write_image(image: RasterImage, path: Union[str, Path]) -> None:
    """Write an image as 8-bit P5 (luma) or P6 (RGB)."""
    Path(path).write_bytes(encode_netpbm(quantize(image.pixels)))

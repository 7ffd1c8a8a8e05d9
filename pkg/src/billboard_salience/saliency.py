"""
Saliency map computation for billboard-salience.

Implements the spectral-residual method: the log-amplitude spectrum of a
downscaled luma image is compared with its local average, and the residual is
recombined with the original phase. Locations whose spectral statistics
deviate from the average carry the reconstructed energy.

Also provides min-max normalisation and import of maps produced by external
models (for example UniSal runs done outside this toolkit).
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import BinaryIO, Union

import numpy as np
from scipy import ndimage

from .core import RasterImage, SaliencyMap, luminance
from .errors import DimensionError, ImageTooSmall
from .formats.maps import decode_map
from .logging_config import get_logger

logger = get_logger(__name__)


@dataclass(frozen=True)
class SpectralResidualParams:
    """
    Parameters of the spectral-residual pipeline.

    Attributes:
        working_width: Width the image is resized to before the transform;
            height follows the aspect ratio
        mean_filter_size: Side of the square mean filter applied to the
            log-amplitude spectrum (odd)
        post_blur_sigma: Gaussian blur sigma, in working-scale pixels
        amplitude_floor: Smallest amplitude entering the log, relative to
            the spectrum peak; keeps near-null components from swamping the
            residual of their neighbours
        amplitude_epsilon: Absolute lower bound of that floor; also the
            relative amplitude below which a component carries no energy
    """

    working_width: int = 64
    mean_filter_size: int = 3
    post_blur_sigma: float = 3.0
    amplitude_floor: float = 1e-4
    amplitude_epsilon: float = 1e-12

    def __post_init__(self):
        if self.mean_filter_size < 1 or self.mean_filter_size % 2 == 0:
            raise ValueError(f"mean_filter_size must be odd and positive, got {self.mean_filter_size}")
        if self.working_width < self.mean_filter_size:
            raise ValueError(
                f"working_width ({self.working_width}) must be at least "
                f"mean_filter_size ({self.mean_filter_size})"
            )
        if not self.post_blur_sigma > 0:
            raise ValueError(f"post_blur_sigma must be positive, got {self.post_blur_sigma}")
        if not 0 < self.amplitude_floor < 1:
            raise ValueError(f"amplitude_floor must lie in (0, 1), got {self.amplitude_floor}")
        if not self.amplitude_epsilon > 0:
            raise ValueError(f"amplitude_epsilon must be positive, got {self.amplitude_epsilon}")


def resize_bilinear(values: np.ndarray, width: int, height: int) -> np.ndarray:
    """
    Bilinearly resample a 2-D array to (height, width).

    Pixel centres are aligned (source coordinate = (dst + 0.5) * scale - 0.5)
    and samples beyond the border replicate the edge. No anti-alias prefilter.
    """
    if width < 1 or height < 1:
        raise DimensionError(f"target dimensions must be positive, got {width}x{height}")
    src_h, src_w = values.shape
    if (src_w, src_h) == (width, height):
        return np.array(values, dtype=np.float64, copy=True)
    ys = (np.arange(height, dtype=np.float64) + 0.5) * (src_h / height) - 0.5
    xs = (np.arange(width, dtype=np.float64) + 0.5) * (src_w / width) - 0.5
    grid_y, grid_x = np.meshgrid(ys, xs, indexing="ij")
    return ndimage.map_coordinates(
        np.asarray(values, dtype=np.float64), [grid_y, grid_x], order=1, mode="nearest"
    )


def normalize_map(saliency: SaliencyMap) -> SaliencyMap:
    """
    Min-max normalise a map to [0, 1].

    A constant map normalises to all zeros: a featureless map claims no
    salience. Already-normalised maps come back unchanged.
    """
    values = saliency.values
    low = float(values.min())
    high = float(values.max())
    if high == low:
        return SaliencyMap(np.zeros_like(values), normalized=True)
    if saliency.normalized and low == 0.0 and high == 1.0:
        return saliency
    return SaliencyMap((values - low) / (high - low), normalized=True)


def spectral_residual(
    image: RasterImage, params: SpectralResidualParams = SpectralResidualParams()
) -> SaliencyMap:
    """
    Compute a normalised spectral-residual saliency map.

    The output has the input's dimensions and is deterministic for given
    inputs. Scaling the image by a positive constant leaves the map unchanged
    unless its spectrum peak is below ``amplitude_epsilon / amplitude_floor``.

    Args:
        image: Luma or RGB image
        params: Pipeline parameters

    Returns:
        Normalised SaliencyMap of the image's size

    Raises:
        ImageTooSmall: If either image side is below ``mean_filter_size``
    """
    k = params.mean_filter_size
    if image.width < k or image.height < k:
        raise ImageTooSmall(
            f"image {image.width}x{image.height} is smaller than the {k}x{k} mean filter"
        )

    luma = luminance(image).pixels
    work_w = params.working_width
    work_h = max(1, int(round(image.height * work_w / image.width)))
    small = resize_bilinear(luma, work_w, work_h)

    spectrum = np.fft.fft2(small)
    amplitude = np.abs(spectrum)
    phase = np.angle(spectrum)

    peak = float(amplitude.max())
    floor = max(params.amplitude_floor * peak, params.amplitude_epsilon)
    log_amplitude = np.log(np.maximum(amplitude, floor))
    residual = log_amplitude - ndimage.uniform_filter(log_amplitude, size=k, mode="nearest")

    # Components without amplitude have no phase to carry energy back.
    carries_energy = amplitude > params.amplitude_epsilon * peak
    recombined = np.where(carries_energy, np.exp(residual + 1j * phase), 0.0)
    energy = np.abs(np.fft.ifft2(recombined)) ** 2
    if float(np.ptp(energy)) <= 1e-12 * float(energy.max()):
        return SaliencyMap(np.zeros((image.height, image.width)), normalized=True)

    sigma = params.post_blur_sigma
    blurred = ndimage.gaussian_filter(energy, sigma, mode="nearest", radius=math.ceil(3 * sigma))
    full = resize_bilinear(blurred, image.width, image.height)

    return normalize_map(SaliencyMap(full))


def import_external_map(
    source: Union[bytes, BinaryIO], target_width: int, target_height: int
) -> SaliencyMap:
    """
    Decode a grayscale map produced elsewhere and bring it to a target size.

    Accepts the binary graymap (P5) and float-map (SALF) encodings. The map
    is bilinearly resized when its size differs from the target, then
    normalised.

    Raises:
        FormatError: If the bytes are not a well-formed supported map
        DimensionError: If the target size is not positive
    """
    if target_width < 1 or target_height < 1:
        raise DimensionError(
            f"target dimensions must be positive, got {target_width}x{target_height}"
        )
    data = source if isinstance(source, (bytes, bytearray)) else source.read()
    return fit_external_map(decode_map(bytes(data)), target_width, target_height)


def fit_external_map(values: np.ndarray, target_width: int, target_height: int) -> SaliencyMap:
    """Resize already-decoded map values to the target size and normalise them."""
    if target_width < 1 or target_height < 1:
        raise DimensionError(
            f"target dimensions must be positive, got {target_width}x{target_height}"
        )
    if values.shape != (target_height, target_width):
        logger.debug(
            "external_map_resized",
            source_size=f"{values.shape[1]}x{values.shape[0]}",
            target_size=f"{target_width}x{target_height}",
        )
        values = resize_bilinear(values, target_width, target_height)
    return normalize_map(SaliencyMap(values))

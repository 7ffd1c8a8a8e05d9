"""
Billboard significance assessment.

A region's score is the mean normalised saliency over its (clipped) box. The
significance threshold is the mean score over all regions of the training
split; a region is predicted salient when its score is strictly greater.
Ground truth comes from the eye tracker: a region is significant when at least
one fixation falls inside it.
"""

from __future__ import annotations

from dataclasses import dataclass, replace
from typing import List, Optional, Sequence

import numpy as np

from .core import BoundingBox, ConfusionCounts, FixationSet, SaliencyMap, clip_box
from .errors import EmptyIntersection, EmptyTrainingSet, MissingLabels
from .fixation import fixations_in_box
from .logging_config import get_logger

logger = get_logger(__name__)


@dataclass(frozen=True)
class RegionScore:
    """Mean saliency of one region, plus its prediction and truth once known."""

    image_id: str
    box: BoundingBox
    mean_saliency: float
    predicted_salient: Optional[bool] = None
    truth_salient: Optional[bool] = None


@dataclass(frozen=True)
class SignificanceThreshold:
    """
    Calibrated decision threshold.

    Attributes:
        value: Threshold in [0, 1]
        n_regions: Number of training regions averaged (0 for an override)
        source: Provenance, e.g. "calibrated:train" or "override"
        method_id: Saliency method the threshold belongs to
    """

    value: float
    n_regions: int
    source: str
    method_id: str = ""

    def __post_init__(self):
        if not 0.0 <= self.value <= 1.0:
            raise ValueError(f"threshold must lie in [0, 1], got {self.value}")
        if self.n_regions < 0:
            raise ValueError(f"n_regions must be nonnegative, got {self.n_regions}")


@dataclass(frozen=True)
class ConfusionStats:
    """Classification outcome; undefined rates are None."""

    counts: ConfusionCounts
    accuracy: Optional[float]
    sensitivity: Optional[float]
    specificity: Optional[float]
    precision: Optional[float]


def region_mean_saliency(saliency: SaliencyMap, box: BoundingBox) -> float:
    """
    Mean map value over the pixels of the box clipped to the frame.

    Raises:
        EmptyIntersection: If the box lies outside the frame
    """
    clipped = clip_box(box, saliency.width, saliency.height)
    patch = saliency.values[clipped.y:clipped.y + clipped.h, clipped.x:clipped.x + clipped.w]
    return float(patch.mean())


def score_regions(saliency: SaliencyMap, boxes: Sequence[BoundingBox], image_id: str) -> List[RegionScore]:
    """Score every box of an image; boxes entirely outside the frame are logged and skipped."""
    scores = []
    for box in boxes:
        try:
            scores.append(RegionScore(image_id, box, region_mean_saliency(saliency, box)))
        except EmptyIntersection as e:
            logger.warning("region_excluded", image_id=image_id, box=[box.x, box.y, box.w, box.h], error=str(e))
    return scores


def calibrate_threshold(
    scores: Sequence[RegionScore], method_id: str = "", source: str = "calibrated:train"
) -> SignificanceThreshold:
    """
    Average the region scores of the training split into a threshold.

    Raises:
        EmptyTrainingSet: If there are no regions
    """
    if not scores:
        raise EmptyTrainingSet("no training regions to calibrate the significance threshold")
    value = float(np.mean([s.mean_saliency for s in scores]))
    # Guard the [min, max] bound against rounding in the mean.
    value = min(max(value, min(s.mean_saliency for s in scores)), max(s.mean_saliency for s in scores))
    logger.info("threshold_calibrated", method=method_id, value=value, n_regions=len(scores))
    return SignificanceThreshold(value=value, n_regions=len(scores), source=source, method_id=method_id)


def classify_region(score: RegionScore, threshold: SignificanceThreshold) -> bool:
    """Salient iff the mean saliency is strictly greater than the threshold."""
    return score.mean_saliency > threshold.value


def ground_truth_salience(fixations: FixationSet, box: BoundingBox) -> bool:
    """Significant iff at least one fixation lies inside the box."""
    return fixations_in_box(fixations, box) >= 1


def label_regions(
    scores: Sequence[RegionScore],
    threshold: Optional[SignificanceThreshold],
    fixations: Optional[FixationSet],
) -> List[RegionScore]:
    """Attach predictions (given a threshold) and truths (given fixations) to scores."""
    labelled = []
    for score in scores:
        predicted = classify_region(score, threshold) if threshold is not None else None
        truth = ground_truth_salience(fixations, score.box) if fixations is not None else None
        labelled.append(replace(score, predicted_salient=predicted, truth_salient=truth))
    return labelled


def _ratio(numerator: int, denominator: int) -> Optional[float]:
    return numerator / denominator if denominator else None


def confusion_stats(regions: Sequence[RegionScore]) -> ConfusionStats:
    """
    Confusion counts and rates of labelled regions.

    accuracy = (tp + tn) / total, sensitivity = tp / (tp + fn); specificity and
    precision are supplementary. Any rate with a zero denominator is None.

    Raises:
        MissingLabels: If a region lacks its prediction or truth
    """
    tp = tn = fp = fn = 0
    for index, region in enumerate(regions):
        if region.predicted_salient is None or region.truth_salient is None:
            raise MissingLabels(
                f"region {index} of image {region.image_id!r} lacks "
                f"{'prediction' if region.predicted_salient is None else 'ground truth'}"
            )
        if region.predicted_salient and region.truth_salient:
            tp += 1
        elif region.predicted_salient:
            fp += 1
        elif region.truth_salient:
            fn += 1
        else:
            tn += 1
    counts = ConfusionCounts(tp=tp, tn=tn, fp=fp, fn=fn)
    return ConfusionStats(
        counts=counts,
        accuracy=_ratio(tp + tn, counts.total),
        sensitivity=_ratio(tp, tp + fn),
        specificity=_ratio(tn, tn + fp),
        precision=_ratio(tp, tp + fp),
    )

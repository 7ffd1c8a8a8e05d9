"""
Evaluation metrics for billboard-salience.

Detection metrics: IoU, average precision with greedy confidence-ordered
matching and an all-point interpolated precision envelope (COCO-style), and
AP averaged over IoU thresholds 0.50:0.05:0.95.

Saliency metrics against fixations: AUC-Judd (thresholds at fixated-cell
values, false-positive rate over all cells, no jitter) and NSS (mean
standardised saliency at fixated cells, population standard deviation).
"""

from __future__ import annotations

from collections import defaultdict
from dataclasses import dataclass
from typing import Dict, List, Optional, Sequence, Tuple

import numpy as np

from .core import BoundingBox, Detection, SaliencyMap
from .errors import DimensionMismatch, EmptyGroundTruth, NoFixations, ZeroVariance
from .fixation import BinaryFixationMap

# 0.50, 0.55, ..., 0.95 as their decimal values
AP_THRESHOLDS: Tuple[float, ...] = tuple(round(0.5 + 0.05 * i, 2) for i in range(10))


@dataclass(frozen=True)
class PrPoint:
    recall: float
    precision: float


@dataclass(frozen=True)
class Match:
    """Outcome of one detection in confidence order; gt_index is None for a false positive."""

    detection_index: int
    gt_index: Optional[int]
    iou: float

    @property
    def is_true_positive(self) -> bool:
        return self.gt_index is not None


def iou(a: BoundingBox, b: BoundingBox) -> float:
    """Intersection over union of two boxes; 0 when they do not overlap."""
    inter_w = min(a.x + a.w, b.x + b.w) - max(a.x, b.x)
    inter_h = min(a.y + a.h, b.y + b.h) - max(a.y, b.y)
    if inter_w <= 0 or inter_h <= 0:
        return 0.0
    intersection = inter_w * inter_h
    return intersection / (a.area + b.area - intersection)


def match_detections(
    detections: Sequence[Detection], ground_truth: Sequence[BoundingBox], iou_threshold: float
) -> List[Match]:
    """
    Greedily match detections to ground truth.

    Detections are taken by descending confidence (stable for ties). Each one
    claims the unmatched ground-truth box of the same image with the highest
    IoU at or above the threshold; IoU ties go to the earlier ground-truth box.
    """
    by_image: Dict[str, List[Tuple[int, BoundingBox]]] = defaultdict(list)
    for index, box in enumerate(ground_truth):
        by_image[box.image_id].append((index, box))

    order = sorted(range(len(detections)), key=lambda i: -detections[i].confidence)
    claimed = set()
    matches = []
    for det_index in order:
        detection = detections[det_index]
        best_index, best_iou = None, -1.0
        for gt_index, box in by_image.get(detection.image_id, ()):
            if gt_index in claimed:
                continue
            overlap = iou(detection.box, box)
            if overlap >= iou_threshold and overlap > best_iou:
                best_index, best_iou = gt_index, overlap
        if best_index is not None:
            claimed.add(best_index)
            matches.append(Match(det_index, best_index, best_iou))
        else:
            matches.append(Match(det_index, None, 0.0))
    return matches


def precision_recall_curve(matches: Sequence[Match], n_ground_truth: int) -> List[PrPoint]:
    """PR point after each prefix of the confidence-ordered matches."""
    points = []
    tp = 0
    for rank, match in enumerate(matches, start=1):
        tp += match.is_true_positive
        points.append(PrPoint(recall=tp / n_ground_truth, precision=tp / rank))
    return points


def average_precision(
    detections: Sequence[Detection], ground_truth: Sequence[BoundingBox], iou_threshold: float
) -> float:
    """
    Average precision at one IoU threshold.

    Area under the precision-recall curve of the confidence-ordered
    detections, using the monotone precision envelope (precision at recall r
    is the best precision at any recall >= r).

    Raises:
        EmptyGroundTruth: AP is undefined without ground truth
        ValueError: If iou_threshold is outside (0, 1]
    """
    if not 0.0 < iou_threshold <= 1.0:
        raise ValueError(f"iou_threshold must lie in (0, 1], got {iou_threshold}")
    if not ground_truth:
        raise EmptyGroundTruth("average precision is undefined without ground-truth boxes")
    if not detections:
        return 0.0

    curve = precision_recall_curve(match_detections(detections, ground_truth, iou_threshold), len(ground_truth))
    recall = np.concatenate(([0.0], [p.recall for p in curve], [1.0]))
    precision = np.concatenate(([0.0], [p.precision for p in curve], [0.0]))
    envelope = np.maximum.accumulate(precision[::-1])[::-1]
    return float(np.sum((recall[1:] - recall[:-1]) * envelope[1:]))


def ap_range(
    detections: Sequence[Detection], ground_truth: Sequence[BoundingBox]
) -> Tuple[float, float]:
    """Return (AP@0.5, mean AP over IoU thresholds 0.50 to 0.95 in steps of 0.05)."""
    per_threshold = [average_precision(detections, ground_truth, t) for t in AP_THRESHOLDS]
    return per_threshold[0], float(np.mean(per_threshold))


def mean_matched_iou(
    detections: Sequence[Detection], ground_truth: Sequence[BoundingBox], iou_threshold: float = 0.5
) -> Optional[float]:
    """Mean IoU of the detections matched at the threshold; None when nothing matches."""
    overlaps = [m.iou for m in match_detections(detections, ground_truth, iou_threshold) if m.is_true_positive]
    if not overlaps:
        return None
    return float(np.mean(overlaps))


def _check_pair(saliency: SaliencyMap, fixmap: BinaryFixationMap) -> None:
    if saliency.values.shape != fixmap.fixated.shape:
        raise DimensionMismatch(
            f"saliency map {saliency.width}x{saliency.height} does not match "
            f"fixation map {fixmap.width}x{fixmap.height}"
        )
    if not fixmap.fixated.any():
        raise NoFixations("fixation map has no fixated cell")


def auc_judd(saliency: SaliencyMap, fixmap: BinaryFixationMap) -> float:
    """
    AUC-Judd of a saliency map against a binary fixation map.

    Thresholds are the distinct saliency values at fixated cells. For each, the
    true-positive rate is the fraction of fixated cells at or above it and the
    false-positive rate the fraction of all cells at or above it. The curve is
    anchored at (0, 0) and (1, 1) and integrated with the trapezoidal rule.
    Only the ranking of values matters, so the map need not be normalised.

    Raises:
        DimensionMismatch: If the maps differ in size
        NoFixations: If no cell is fixated
    """
    _check_pair(saliency, fixmap)
    values = saliency.values.ravel()
    fixated_values = np.sort(values[fixmap.fixated.ravel()])
    all_values = np.sort(values)

    thresholds = np.unique(fixated_values)[::-1]
    n_fixated = fixated_values.size
    n_all = all_values.size
    tpr = (n_fixated - np.searchsorted(fixated_values, thresholds, side="left")) / n_fixated
    fpr = (n_all - np.searchsorted(all_values, thresholds, side="left")) / n_all

    tpr = np.concatenate(([0.0], tpr, [1.0]))
    fpr = np.concatenate(([0.0], fpr, [1.0]))
    return float(np.sum((fpr[1:] - fpr[:-1]) * (tpr[1:] + tpr[:-1]) / 2.0))


def nss(saliency: SaliencyMap, fixmap: BinaryFixationMap) -> float:
    """
    Normalized Scanpath Saliency: the mean standardised value at fixated cells.

    The map is standardised to zero mean and unit population standard
    deviation over all pixels, so nss(a * S + b) == nss(S) for a > 0.

    Raises:
        DimensionMismatch: If the maps differ in size
        NoFixations: If no cell is fixated
        ZeroVariance: If the map is constant
    """
    _check_pair(saliency, fixmap)
    values = saliency.values
    std = float(values.std())
    if std == 0.0:
        raise ZeroVariance("NSS is undefined for a constant saliency map")
    standardized = (values - values.mean()) / std
    return float(standardized[fixmap.fixated].mean())

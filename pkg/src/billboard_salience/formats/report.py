"""Evaluation reports (.report).

A JSON document with a fixed key order: ``metadata``, ``sections``,
``aggregates``, ``per_image``, ``errors``. Undefined values are ``null``.
Saliency and significance aggregates can be recomputed from the per-image
rows (see recompute_aggregates); detection aggregates are pooled over the
split's detection files and carried as-is.
"""

from __future__ import annotations

import json
from dataclasses import asdict, dataclass, field, replace
from pathlib import Path
from typing import Any, Dict, Optional, Sequence, Tuple, Union

import numpy as np

from ..core import BoundingBox
from ..errors import ParseError, read_text_file
from ..significance import ConfusionStats, RegionScore, confusion_stats

AGGREGATION_MODE = "mean-of-per-image"
SECTION_OK = "ok"
SKIPPED_MISSING_INPUT = "skipped: missing input"
SECTIONS = ("saliency", "significance", "detection")


@dataclass(frozen=True)
class ImageResult:
    """Per-image row: saliency metrics, labelled regions and any errors."""

    image_id: str
    auc: Optional[float] = None
    nss: Optional[float] = None
    regions: Tuple[RegionScore, ...] = ()
    errors: Tuple[str, ...] = ()

    def __post_init__(self):
        object.__setattr__(self, "regions", tuple(self.regions))
        object.__setattr__(self, "errors", tuple(self.errors))


@dataclass(frozen=True)
class Aggregates:
    mean_auc: Optional[float] = None
    mean_nss: Optional[float] = None
    ap50: Optional[float] = None
    ap50_95: Optional[float] = None
    mean_iou: Optional[float] = None
    tp: Optional[int] = None
    tn: Optional[int] = None
    fp: Optional[int] = None
    fn: Optional[int] = None
    accuracy: Optional[float] = None
    sensitivity: Optional[float] = None
    specificity: Optional[float] = None
    precision: Optional[float] = None
    threshold: Optional[float] = None


@dataclass(frozen=True)
class ReportMetadata:
    tool_version: str
    method_id: str
    aggregation_mode: str = AGGREGATION_MODE
    created_at: str = ""
    threshold_source: Optional[str] = None
    partial: bool = False


@dataclass(frozen=True)
class EvaluationReport:
    metadata: ReportMetadata
    sections: Dict[str, str] = field(default_factory=dict)
    aggregates: Aggregates = field(default_factory=Aggregates)
    per_image: Tuple[ImageResult, ...] = ()
    errors: Tuple[str, ...] = ()

    def __post_init__(self):
        object.__setattr__(self, "per_image", tuple(self.per_image))
        object.__setattr__(self, "errors", tuple(self.errors))

    @property
    def all_errors(self) -> Tuple[str, ...]:
        """Run-level errors followed by every per-image error."""
        return self.errors + tuple(e for row in self.per_image for e in row.errors)


def _mean(values: Sequence[Optional[float]]) -> Optional[float]:
    present = [v for v in values if v is not None]
    return float(np.mean(present)) if present else None


def significance_stats(per_image: Sequence[ImageResult]) -> Optional[ConfusionStats]:
    """Confusion statistics over every fully labelled region; None when there are none."""
    labelled = [
        region
        for row in per_image
        for region in row.regions
        if region.predicted_salient is not None and region.truth_salient is not None
    ]
    if not labelled:
        return None
    return confusion_stats(labelled)


def recompute_aggregates(
    per_image: Sequence[ImageResult], base: Aggregates = Aggregates(), sections: Optional[Dict[str, str]] = None
) -> Aggregates:
    """
    Derive saliency and significance aggregates from per-image rows.

    Detection aggregates and the threshold are taken from ``base``. Sections
    not marked ok keep their aggregates null.
    """
    sections = sections or {}
    updates: Dict[str, Any] = {}
    if sections.get("saliency", SECTION_OK) == SECTION_OK:
        updates["mean_auc"] = _mean([row.auc for row in per_image])
        updates["mean_nss"] = _mean([row.nss for row in per_image])
    else:
        updates["mean_auc"] = updates["mean_nss"] = None

    stats = significance_stats(per_image) if sections.get("significance", SECTION_OK) == SECTION_OK else None
    if stats is None:
        updates.update(tp=None, tn=None, fp=None, fn=None, accuracy=None,
                       sensitivity=None, specificity=None, precision=None)
    else:
        updates.update(
            tp=stats.counts.tp, tn=stats.counts.tn, fp=stats.counts.fp, fn=stats.counts.fn,
            accuracy=stats.accuracy, sensitivity=stats.sensitivity,
            specificity=stats.specificity, precision=stats.precision,
        )
    return replace(base, **updates)


# --- codec ------------------------------------------------------------------

def _region_to_dict(region: RegionScore) -> Dict[str, Any]:
    box = region.box
    return {
        "box": [box.x, box.y, box.w, box.h],
        "mean_saliency": region.mean_saliency,
        "predicted_salient": region.predicted_salient,
        "truth_salient": region.truth_salient,
    }


def report_to_dict(report: EvaluationReport) -> Dict[str, Any]:
    return {
        "metadata": asdict(report.metadata),
        "sections": {name: report.sections[name] for name in sorted(report.sections)},
        "aggregates": asdict(report.aggregates),
        "per_image": [
            {
                "image_id": row.image_id,
                "auc": row.auc,
                "nss": row.nss,
                "regions": [_region_to_dict(r) for r in row.regions],
                "errors": list(row.errors),
            }
            for row in report.per_image
        ],
        "errors": list(report.errors),
    }


def report_from_dict(data: Dict[str, Any]) -> EvaluationReport:
    """Rebuild a report from its dict form; raises KeyError/TypeError on bad structure."""
    per_image = []
    for row in data["per_image"]:
        regions = tuple(
            RegionScore(
                image_id=row["image_id"],
                box=BoundingBox(*region["box"], image_id=row["image_id"]),
                mean_saliency=region["mean_saliency"],
                predicted_salient=region["predicted_salient"],
                truth_salient=region["truth_salient"],
            )
            for region in row["regions"]
        )
        per_image.append(ImageResult(row["image_id"], row["auc"], row["nss"], regions, tuple(row["errors"])))
    return EvaluationReport(
        metadata=ReportMetadata(**data["metadata"]),
        sections=dict(data["sections"]),
        aggregates=Aggregates(**data["aggregates"]),
        per_image=tuple(per_image),
        errors=tuple(data["errors"]),
    )


def write_report(report: EvaluationReport, path: Union[str, Path]) -> None:
    """Write a report as indented JSON with stable field order."""
    Path(path).write_text(json.dumps(report_to_dict(report), indent=2) + "\n", encoding="utf-8")


def read_report(path: Union[str, Path]) -> EvaluationReport:
    """
    Read a report written by write_report.

    Raises:
        ParseError: For invalid JSON or missing/unknown fields
    """
    path = str(path)
    try:
        data = json.loads(read_text_file(path))
    except json.JSONDecodeError as e:
        raise ParseError(path, e.lineno, f"invalid JSON: {e.msg}") from None
    try:
        return report_from_dict(data)
    except (KeyError, TypeError, ValueError) as e:
        raise ParseError(path, 1, f"malformed report: {e}") from None

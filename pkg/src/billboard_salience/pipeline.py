"""
Batch pipeline for billboard-salience.

Bodies of the batch commands, shared by the CLI and the MCP tools:

1. saliency: a saliency map per image (spectral residual or imported)
2. calibrate: the significance threshold from the training split
3. evaluate: AUC-Judd / NSS against fixations, billboard significance
   against fixation ground truth, and AP of detections, over the test split
4. compare: evaluate for several saliency methods side by side

Work is distributed per image through a WorkerPool; results are reduced in
manifest order so reports do not depend on the worker count. A failing image
becomes an error entry and the run continues.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from datetime import datetime, timezone
from pathlib import Path
from typing import List, Optional, Sequence, Tuple

from . import __version__
from .core import BoundingBox, DatasetManifest, Detection, ManifestEntry, RasterImage, SaliencyMap
from .errors import (
    DimensionMismatch,
    EmptyTrainingSet,
    MissingFile,
    SalienceError,
    UsageError,
    describe_error,
)
from .fixation import build_fixation_map
from .formats.gaze import load_gaze
from .formats.manifest import load_manifest
from .formats.maps import read_map, write_map
from .formats.netpbm import read_image
from .formats.regions import load_annotations, load_detections
from .formats.report import (
    SECTION_OK,
    SKIPPED_MISSING_INPUT,
    Aggregates,
    EvaluationReport,
    ImageResult,
    ReportMetadata,
    recompute_aggregates,
    write_report,
)
from .formats.threshold import method_slug, read_threshold, threshold_path, write_threshold
from .logging_config import get_logger
from .metrics import ap_range, auc_judd, mean_matched_iou, nss
from .saliency import SpectralResidualParams, fit_external_map, spectral_residual
from .significance import (
    RegionScore,
    SignificanceThreshold,
    calibrate_threshold,
    label_regions,
    score_regions,
)
from .worker_pool import WorkerPool, failure_message

logger = get_logger(__name__)

METHOD_SPECTRAL_RESIDUAL = "spectral-residual"
EXTERNAL_PREFIX = "external:"
SKIPPED_NO_THRESHOLD = "skipped: no threshold"
# Largest relative aspect-ratio difference tolerated when resizing an external map
MAX_ASPECT_DEVIATION = 0.01


@dataclass(frozen=True)
class RunConfig:
    """
    Configuration of one batch run.

    Attributes:
        manifest_path: Dataset manifest (output location for ``synth``)
        out_dir: Directory receiving every machine artifact
        method: "spectral-residual" or "external:<dir>"
        params: Spectral-residual parameters
        threshold: Significance threshold override in [0, 1]
        workers: Concurrent per-image workers
        seed: Random seed for synthetic data
        size: Number of synthetic images
        preview: Also write an 8-bit .pgm preview of each map
    """

    manifest_path: str
    out_dir: str
    method: str = METHOD_SPECTRAL_RESIDUAL
    params: SpectralResidualParams = field(default_factory=SpectralResidualParams)
    threshold: Optional[float] = None
    workers: int = 1
    seed: int = 0
    size: int = 6
    preview: bool = False

    def __post_init__(self):
        if self.workers < 1:
            raise UsageError(f"worker count must be at least 1, got {self.workers}")
        if self.threshold is not None and not 0.0 <= self.threshold <= 1.0:
            raise UsageError(f"threshold override must lie in [0, 1], got {self.threshold}")
        if self.size < 1:
            raise UsageError(f"synthetic dataset size must be at least 1, got {self.size}")
        validate_method(self.method)

    @property
    def external_dir(self) -> Optional[Path]:
        if self.method.startswith(EXTERNAL_PREFIX):
            return Path(self.method[len(EXTERNAL_PREFIX):])
        return None


def validate_method(method: str) -> None:
    if method == METHOD_SPECTRAL_RESIDUAL:
        return
    if method.startswith(EXTERNAL_PREFIX) and method[len(EXTERNAL_PREFIX):]:
        return
    raise UsageError(f"unknown saliency method {method!r} (use {METHOD_SPECTRAL_RESIDUAL!r} or 'external:<dir>')")


def _check_external_dir(config: RunConfig) -> None:
    directory = config.external_dir
    if directory is not None and not directory.is_dir():
        raise MissingFile(str(directory), referenced_from=f"method {config.method}")


def _external_map(entry: ManifestEntry, image: RasterImage, directory: Path) -> SaliencyMap:
    for suffix in (".salf", ".pgm"):
        candidate = directory / f"{entry.image_id}{suffix}"
        if candidate.is_file():
            break
    else:
        raise MissingFile(str(directory / f"{entry.image_id}.salf"), referenced_from=f"image {entry.image_id}")

    decoded = read_map(candidate)
    map_w, map_h = decoded.width, decoded.height
    deviation = abs((map_w / map_h) / (image.width / image.height) - 1.0)
    if deviation > MAX_ASPECT_DEVIATION:
        raise DimensionMismatch(
            f"external map {candidate} is {map_w}x{map_h}, image {entry.image_id} is "
            f"{image.width}x{image.height}"
        )
    return fit_external_map(decoded.values, image.width, image.height)


def load_saliency(entry: ManifestEntry, image: RasterImage, config: RunConfig) -> SaliencyMap:
    """Saliency map of one image under the configured method."""
    directory = config.external_dir
    if directory is None:
        return spectral_residual(image, config.params)
    return _external_map(entry, image, directory)


def _collect_errors(results, entries: Sequence[ManifestEntry]) -> List[str]:
    return [failure_message(entries[r.index].image_id, r.error) for r in results if not r.ok]


# --- saliency ---------------------------------------------------------------

@dataclass(frozen=True)
class SaliencyRun:
    written: Tuple[str, ...]
    errors: Tuple[str, ...]


def run_saliency(config: RunConfig, pool: WorkerPool, manifest: Optional[DatasetManifest] = None) -> SaliencyRun:
    """Write ``<out>/maps/<image_id>.salf`` (and ``.pgm`` with preview) for every image."""
    manifest = manifest if manifest is not None else load_manifest(config.manifest_path)
    _check_external_dir(config)
    maps_dir = Path(config.out_dir) / "maps"
    maps_dir.mkdir(parents=True, exist_ok=True)

    def work(entry: ManifestEntry) -> List[str]:
        saliency = load_saliency(entry, read_image(entry.image_path), config)
        paths = [maps_dir / f"{entry.image_id}.salf"]
        if config.preview:
            paths.append(maps_dir / f"{entry.image_id}.pgm")
        for path in paths:
            write_map(saliency, path)
        return [str(p) for p in paths]

    results = pool.map_ordered(work, manifest.entries)
    written = tuple(path for r in results if r.ok for path in r.value)
    errors = tuple(_collect_errors(results, manifest.entries))
    logger.info("saliency_run_complete", method=config.method, images=len(manifest), files=len(written), errors=len(errors))
    return SaliencyRun(written, errors)


# --- calibration --------------------------------------------------------------

@dataclass(frozen=True)
class CalibrationRun:
    threshold: SignificanceThreshold
    path: Optional[str]
    errors: Tuple[str, ...]


def _train_scores(
    manifest: DatasetManifest, config: RunConfig, pool: WorkerPool
) -> Tuple[List[RegionScore], List[str]]:
    train = manifest.split("train")
    if not train:
        raise EmptyTrainingSet("manifest has no train entries")
    _check_external_dir(config)

    def work(entry: ManifestEntry) -> List[RegionScore]:
        image = read_image(entry.image_path)
        boxes = load_annotations(entry.annotation_ref, entry.image_id)
        return score_regions(load_saliency(entry, image, config), boxes, entry.image_id)

    results = pool.map_ordered(work, train)
    scores = [score for r in results if r.ok for score in r.value]
    return scores, _collect_errors(results, train)


def run_calibration(
    config: RunConfig, pool: WorkerPool, manifest: Optional[DatasetManifest] = None
) -> CalibrationRun:
    """
    Calibrate (or take the override) and write ``<out>/<method>.threshold``.

    Raises:
        EmptyTrainingSet: If no train region could be scored
    """
    if config.threshold is not None:
        threshold = SignificanceThreshold(config.threshold, 0, "override", config.method)
        errors: List[str] = []
    else:
        manifest = manifest if manifest is not None else load_manifest(config.manifest_path)
        scores, errors = _train_scores(manifest, config, pool)
        threshold = calibrate_threshold(scores, method_id=config.method)

    out_dir = Path(config.out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    path = threshold_path(out_dir, config.method)
    write_threshold(threshold, path)
    logger.info("threshold_written", path=str(path), value=threshold.value, source=threshold.source)
    return CalibrationRun(threshold, str(path), tuple(errors))


def resolve_threshold(
    config: RunConfig, manifest: DatasetManifest, pool: WorkerPool
) -> Tuple[Optional[SignificanceThreshold], List[str]]:
    """Override, else the method's record in the output directory, else calibration on the train split."""
    if config.threshold is not None:
        return SignificanceThreshold(config.threshold, 0, "override", config.method), []
    record = threshold_path(config.out_dir, config.method)
    if record.is_file():
        threshold = read_threshold(record)
        logger.info("threshold_loaded", path=str(record), value=threshold.value)
        return threshold, []
    if not manifest.split("train"):
        return None, []
    try:
        scores, errors = _train_scores(manifest, config, pool)
        return calibrate_threshold(scores, method_id=config.method), errors
    except SalienceError as e:
        return None, [f"calibration: {describe_error(e)}"]


# --- evaluation ---------------------------------------------------------------

@dataclass(frozen=True)
class _ImageEvaluation:
    result: ImageResult
    detections: Tuple[Detection, ...] = ()
    ground_truth: Tuple[BoundingBox, ...] = ()


def _evaluate_entry(
    entry: ManifestEntry, config: RunConfig, threshold: Optional[SignificanceThreshold]
) -> _ImageEvaluation:
    image = read_image(entry.image_path)
    boxes = load_annotations(entry.annotation_ref, entry.image_id)
    detections = load_detections(entry.detection_ref, entry.image_id) if entry.detection_ref else []
    errors: List[str] = []

    def note(stage: str, error: SalienceError) -> None:
        errors.append(f"{entry.image_id}: {stage}: {describe_error(error)}")
        logger.warning("image_metric_failed", image_id=entry.image_id, stage=stage, error=str(error),
                       error_type=type(error).__name__)

    saliency = None
    try:
        saliency = load_saliency(entry, image, config)
    except SalienceError as e:
        note("saliency", e)

    fixations = fixmap = None
    if entry.gaze_ref:
        try:
            fixations = load_gaze(entry.gaze_ref, entry.image_id)
            fixmap = build_fixation_map(fixations, image.width, image.height)
        except SalienceError as e:
            fixations = None
            note("gaze", e)

    auc = nss_value = None
    regions: List[RegionScore] = []
    if saliency is not None:
        if fixmap is not None:
            try:
                auc = auc_judd(saliency, fixmap)
            except SalienceError as e:
                note("auc", e)
            try:
                nss_value = nss(saliency, fixmap)
            except SalienceError as e:
                note("nss", e)
        regions = label_regions(score_regions(saliency, boxes, entry.image_id), threshold, fixations)

    result = ImageResult(entry.image_id, auc, nss_value, tuple(regions), tuple(errors))
    ground_truth = tuple(boxes) if entry.detection_ref else ()
    return _ImageEvaluation(result, tuple(detections), ground_truth)


def run_evaluation(
    config: RunConfig, pool: WorkerPool, manifest: Optional[DatasetManifest] = None, split: str = "test"
) -> Tuple[EvaluationReport, str]:
    """
    Evaluate one saliency method over a split and write ``<out>/<method>.report``.

    Returns:
        (report, path of the written report)
    """
    manifest = manifest if manifest is not None else load_manifest(config.manifest_path)
    _check_external_dir(config)
    entries = manifest.split(split)
    run_errors: List[str] = []

    threshold, calibration_errors = resolve_threshold(config, manifest, pool)
    run_errors.extend(calibration_errors)

    results = pool.map_ordered(lambda entry: _evaluate_entry(entry, config, threshold), entries)
    per_image = []
    detections: List[Detection] = []
    ground_truth: List[BoundingBox] = []
    for r in results:
        if r.ok:
            per_image.append(r.value.result)
            detections.extend(r.value.detections)
            ground_truth.extend(r.value.ground_truth)
        else:
            image_id = entries[r.index].image_id
            per_image.append(ImageResult(image_id, errors=(failure_message(image_id, r.error),)))

    has_gaze = any(e.gaze_ref for e in entries)
    has_detections = any(e.detection_ref for e in entries)
    sections = {
        "saliency": SECTION_OK if has_gaze else SKIPPED_MISSING_INPUT,
        "significance": (
            SKIPPED_MISSING_INPUT if not has_gaze
            else SKIPPED_NO_THRESHOLD if threshold is None
            else SECTION_OK
        ),
        "detection": SECTION_OK if has_detections else SKIPPED_MISSING_INPUT,
    }

    base = Aggregates(threshold=threshold.value if threshold is not None else None)
    if has_detections:
        try:
            ap50, ap50_95 = ap_range(detections, ground_truth)
            base = Aggregates(
                ap50=ap50, ap50_95=ap50_95,
                mean_iou=mean_matched_iou(detections, ground_truth),
                threshold=base.threshold,
            )
        except SalienceError as e:
            sections["detection"] = f"error: {describe_error(e)}"
            run_errors.append(f"detection: {describe_error(e)}")

    aggregates = recompute_aggregates(per_image, base=base, sections=sections)
    metadata = ReportMetadata(
        tool_version=__version__,
        method_id=config.method,
        created_at=datetime.now(timezone.utc).isoformat(timespec="seconds"),
        threshold_source=threshold.source if threshold is not None else None,
        partial=bool(run_errors) or any(row.errors for row in per_image),
    )
    report = EvaluationReport(metadata, sections, aggregates, tuple(per_image), tuple(run_errors))

    out_dir = Path(config.out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    path = out_dir / f"{method_slug(config.method)}.report"
    write_report(report, path)
    logger.info(
        "evaluation_complete",
        method=config.method,
        images=len(entries),
        path=str(path),
        errors=len(report.all_errors),
        mean_auc=aggregates.mean_auc,
        mean_nss=aggregates.mean_nss,
        accuracy=aggregates.accuracy,
        sensitivity=aggregates.sensitivity,
        ap50=aggregates.ap50,
        ap50_95=aggregates.ap50_95,
    )
    return report, str(path)


# --- comparison -----------------------------------------------------------------

COMPARISON_FIELDS = ("mean_auc", "mean_nss", "accuracy", "sensitivity", "threshold", "ap50", "ap50_95")


def run_comparison(
    config: RunConfig, methods: Sequence[str], pool: WorkerPool, manifest: Optional[DatasetManifest] = None
) -> Tuple[List[EvaluationReport], str]:
    """
    Evaluate several saliency methods on the same manifest.

    Each method gets its own report and threshold; ``<out>/comparison.report``
    lists one row per method.
    """
    if not methods:
        raise UsageError("compare needs at least one method")
    for method in methods:
        validate_method(method)
    manifest = manifest if manifest is not None else load_manifest(config.manifest_path)

    reports = []
    rows = []
    for method in methods:
        method_config = RunConfig(
            manifest_path=config.manifest_path,
            out_dir=config.out_dir,
            method=method,
            params=config.params,
            threshold=config.threshold,
            workers=config.workers,
        )
        try:
            report, _ = run_evaluation(method_config, pool, manifest)
        except SalienceError as e:
            logger.error("comparison_method_failed", method=method, error=str(e), error_type=type(e).__name__)
            rows.append({"method": method, "error": describe_error(e)})
            continue
        reports.append(report)
        row = {"method": method}
        row.update({name: getattr(report.aggregates, name) for name in COMPARISON_FIELDS})
        row["errors"] = len(report.all_errors)
        rows.append(row)

    path = Path(config.out_dir) / "comparison.report"
    path.write_text(json.dumps({"methods": rows}, indent=2) + "\n", encoding="utf-8")
    logger.info("comparison_complete", methods=list(methods), path=str(path))
    return reports, str(path)

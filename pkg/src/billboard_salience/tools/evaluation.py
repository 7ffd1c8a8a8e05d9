"""
Batch pipeline tools for billboard-salience.

MCP wrappers around the saliency, calibrate, evaluate and compare commands.
Each tool resolves the manifest through the dataset manager (opening it if
needed), runs on the shared worker pool and returns a short text summary.
Nothing raises: failures come back as "Error: ..." strings.
"""

from typing import List, Optional

from ..dataset_manager import dataset_manager
from ..errors import SalienceError, describe_error
from ..logging_config import get_logger
from ..pipeline import (
    METHOD_SPECTRAL_RESIDUAL,
    RunConfig,
    run_calibration,
    run_comparison,
    run_evaluation,
    run_saliency,
)
from ..saliency import SpectralResidualParams
from ..worker_pool import worker_pool

logger = get_logger(__name__)


def _fmt(value: Optional[float], digits: int = 3) -> str:
    return "n/a" if value is None else f"{value:.{digits}f}"


def _config(manifest: str, out_dir: str, method: str, threshold: Optional[float] = None,
            working_width: Optional[int] = None, preview: bool = False) -> RunConfig:
    params = SpectralResidualParams() if working_width is None else SpectralResidualParams(working_width=working_width)
    return RunConfig(
        manifest_path=manifest,
        out_dir=out_dir,
        method=method,
        params=params,
        threshold=threshold,
        workers=worker_pool.pool_size,
        preview=preview,
    )


def _failed(tool: str, e: Exception, **context) -> str:
    logger.error("tool_operation_failed", tool=tool, error=str(e), error_type=type(e).__name__, **context)
    if isinstance(e, SalienceError):
        return f"Error: {describe_error(e)}"
    return f"Error: {str(e)}"


def _error_tail(errors) -> List[str]:
    if not errors:
        return []
    return ["", f"{len(errors)} error(s):"] + [f"  - {message}" for message in errors]


def compute_saliency(manifest: str, out_dir: str, method: str = METHOD_SPECTRAL_RESIDUAL,
                     working_width: Optional[int] = None, preview: bool = False) -> str:
    """
    Write a saliency map for every image of the manifest.

    Returns:
        Number of maps written and any per-image errors
    """
    try:
        config = _config(manifest, out_dir, method, working_width=working_width, preview=preview)
        run = run_saliency(config, worker_pool, dataset_manager.open_dataset(manifest))
        lines = [f"Wrote {len(run.written)} file(s) to {out_dir}/maps using {method}"]
        return "\n".join(lines + _error_tail(run.errors))
    except Exception as e:
        return _failed("compute_saliency", e, manifest=manifest, method=method)


def calibrate_threshold(manifest: str, out_dir: str, method: str = METHOD_SPECTRAL_RESIDUAL,
                        threshold: Optional[float] = None) -> str:
    """
    Calibrate the significance threshold on the train split (or record an override).

    Examples:
        >>> calibrate_threshold("data/dataset.manifest", "out")
        "Threshold 0.412 (calibrated:train, 5 regions) written to out/spectral-residual.threshold"
    """
    try:
        config = _config(manifest, out_dir, method, threshold=threshold)
        dataset = dataset_manager.open_dataset(manifest) if threshold is None else None
        run = run_calibration(config, worker_pool, dataset)
        t = run.threshold
        lines = [f"Threshold {t.value:.3f} ({t.source}, {t.n_regions} regions) written to {run.path}"]
        return "\n".join(lines + _error_tail(run.errors))
    except Exception as e:
        return _failed("calibrate_threshold", e, manifest=manifest, method=method)


def evaluate_dataset(manifest: str, out_dir: str, method: str = METHOD_SPECTRAL_RESIDUAL,
                     threshold: Optional[float] = None) -> str:
    """
    Evaluate one saliency method over the test split and write its report.

    Returns:
        The headline aggregates, section states and any error entries
    """
    try:
        config = _config(manifest, out_dir, method, threshold=threshold)
        report, path = run_evaluation(config, worker_pool, dataset_manager.open_dataset(manifest))
        agg = report.aggregates
        lines = [
            f"Report written to {path}" + (" (partial)" if report.metadata.partial else ""),
            "",
            f"AUC-Judd: {_fmt(agg.mean_auc)}",
            f"NSS: {_fmt(agg.mean_nss)}",
            f"Threshold: {_fmt(agg.threshold)}",
            f"Accuracy: {_fmt(agg.accuracy)}",
            f"Sensitivity: {_fmt(agg.sensitivity)}",
            f"AP@0.5: {_fmt(agg.ap50)}",
            f"AP@0.5:0.95: {_fmt(agg.ap50_95)}",
            "",
            "Sections:",
        ]
        lines.extend(f"  {name}: {state}" for name, state in report.sections.items())
        return "\n".join(lines + _error_tail(report.all_errors))
    except Exception as e:
        return _failed("evaluate_dataset", e, manifest=manifest, method=method)


def compare_methods(manifest: str, out_dir: str, methods: List[str], threshold: Optional[float] = None) -> str:
    """
    Evaluate several saliency methods on the same manifest.

    Returns:
        One line per method with mean AUC, mean NSS, accuracy and sensitivity
    """
    try:
        if not methods:
            raise ValueError("at least one method is required")
        config = _config(manifest, out_dir, methods[0], threshold=threshold)
        reports, path = run_comparison(config, methods, worker_pool, dataset_manager.open_dataset(manifest))
        lines = [f"Comparison written to {path}", ""]
        for report in reports:
            agg = report.aggregates
            lines.append(
                f"{report.metadata.method_id}: AUC {_fmt(agg.mean_auc)}, NSS {_fmt(agg.mean_nss)}, "
                f"accuracy {_fmt(agg.accuracy)}, sensitivity {_fmt(agg.sensitivity)}"
            )
        evaluated = {report.metadata.method_id for report in reports}
        lines.extend(f"{method}: failed (see logs)" for method in methods if method not in evaluated)
        return "\n".join(lines)
    except Exception as e:
        return _failed("compare_methods", e, manifest=manifest, methods=methods)

"""
FastMCP server for billboard-salience.

Exposes the toolkit over the Model Context Protocol: dataset lifecycle,
saliency maps, threshold calibration, evaluation, method comparison and
server health.

Entry point: run with `python -m billboard_salience.server` or via the
`billboard-salience-mcp` command.
"""

from contextlib import asynccontextmanager
from typing import List, Optional

from mcp.server.fastmcp import FastMCP

from .dataset_manager import dataset_manager
from .logging_config import get_logger
from .pipeline import METHOD_SPECTRAL_RESIDUAL

logger = get_logger(__name__)

from .tools.dataset import (
    close_dataset,
    list_open_datasets,
    open_dataset,
)
from .tools.evaluation import (
    calibrate_threshold,
    compare_methods,
    compute_saliency,
    evaluate_dataset,
)
from .tools.monitoring import (
    get_server_health,
)


@asynccontextmanager
async def app_lifespan(server):
    """
    Lifespan context manager for server startup and shutdown.

    Shutdown forgets every open manifest.
    """
    logger.info("server_starting", name="billboard-salience")
    try:
        yield {}
    finally:
        logger.info("server_shutting_down")
        count = dataset_manager.close_all()
        if count > 0:
            logger.info("datasets_closed_on_shutdown", count=count)
        logger.info("server_shutdown_complete")


mcp = FastMCP("billboard-salience", lifespan=app_lifespan)


@mcp.tool()
def open_dataset_tool(path: str, reload: bool = False) -> str:
    """
    Open and validate a dataset manifest.

    The manifest is JSON Lines, one image per line with keys image_id,
    image, annotations, split and optional detections and gaze. Every
    referenced file must exist. The parsed manifest is cached, so later tools
    given the same path skip re-parsing.

    Args:
        path: Path to the manifest
        reload: Re-read the manifest even if already open

    Returns:
        Image counts per split, or an error message
    """
    return open_dataset(path, reload)


@mcp.tool()
def list_open_datasets_tool() -> str:
    """List the dataset manifests currently open."""
    return list_open_datasets()


@mcp.tool()
def close_dataset_tool(path: str) -> str:
    """
    Close an open dataset manifest.

    Args:
        path: Path the manifest was opened with
    """
    return close_dataset(path)


@mcp.tool()
def compute_saliency_tool(
    manifest: str,
    out_dir: str,
    method: str = METHOD_SPECTRAL_RESIDUAL,
    working_width: Optional[int] = None,
    preview: bool = False,
) -> str:
    """
    Compute a saliency map for every image in a manifest.

    Maps are written as <out_dir>/maps/<image_id>.salf (float32), plus an
    8-bit .pgm when preview is set.

    Args:
        manifest: Path to the dataset manifest
        out_dir: Output directory
        method: "spectral-residual" or "external:<dir>" to import maps
                produced elsewhere (<dir>/<image_id>.salf or .pgm)
        working_width: Spectral-residual working width (default: 64)
        preview: Also write .pgm previews

    Returns:
        Number of files written and any per-image errors
    """
    return compute_saliency(manifest, out_dir, method, working_width, preview)


@mcp.tool()
def calibrate_threshold_tool(
    manifest: str,
    out_dir: str,
    method: str = METHOD_SPECTRAL_RESIDUAL,
    threshold: Optional[float] = None,
) -> str:
    """
    Calibrate the billboard significance threshold.

    The threshold is the mean of the per-region mean saliency over every
    annotated billboard of the train split. A threshold override in [0, 1]
    is recorded as-is. The record goes to <out_dir>/<method>.threshold.

    Args:
        manifest: Path to the dataset manifest
        out_dir: Output directory
        method: Saliency method id
        threshold: Optional override

    Returns:
        The threshold value, its source and the record path
    """
    return calibrate_threshold(manifest, out_dir, method, threshold)


@mcp.tool()
def evaluate_dataset_tool(
    manifest: str,
    out_dir: str,
    method: str = METHOD_SPECTRAL_RESIDUAL,
    threshold: Optional[float] = None,
) -> str:
    """
    Evaluate a saliency method over the test split.

    Computes AUC-Judd and NSS against fixations, classifies billboards as
    significant or not and scores the classification against fixation
    ground truth, and computes AP@0.5 and AP@0.5:0.95 of the detections.
    Sections without inputs are marked skipped. The report is written to
    <out_dir>/<method>.report.

    Returns:
        Aggregates, section states and error entries
    """
    return evaluate_dataset(manifest, out_dir, method, threshold)


@mcp.tool()
def compare_methods_tool(
    manifest: str,
    out_dir: str,
    methods: List[str],
    threshold: Optional[float] = None,
) -> str:
    """
    Evaluate several saliency methods on one manifest.

    Writes a report per method and <out_dir>/comparison.report with one row
    per method.

    Args:
        manifest: Path to the dataset manifest
        out_dir: Output directory
        methods: Method ids, e.g. ["spectral-residual", "external:/maps/unisal"]
        threshold: Optional threshold override applied to every method
    """
    return compare_methods(manifest, out_dir, methods, threshold)


@mcp.tool()
def get_server_health_tool() -> str:
    """
    Get server health status and metrics.

    Returns:
        Formatted health report with status (HEALTHY/DEGRADED/UNHEALTHY),
        memory metrics, worker pool metrics and any active alerts.

    Design notes:
        - Read-only: does not modify server state
        - Status thresholds: memory >80% = unhealthy, >70% = degraded
        - Worker failures degrade the status until the server restarts
    """
    return get_server_health()


def main():
    """
    Main entry point for the billboard-salience MCP server.

    Starts the FastMCP server and begins listening for MCP protocol messages.
    """
    mcp.run()


if __name__ == "__main__":
    main()

"""
Dataset lifecycle tools for billboard-salience.

MCP tool functions that open, list and close dataset manifests. Opening
validates the manifest (every referenced file must exist) and caches it in the
dataset manager so later tools skip re-parsing.
"""

from collections import Counter
from pathlib import Path

from ..core import SPLITS
from ..dataset_manager import dataset_manager
from ..errors import SalienceError, describe_error
from ..logging_config import get_logger

logger = get_logger(__name__)


def open_dataset(path: str, reload: bool = False) -> str:
    """
    Open and validate a dataset manifest.

    Args:
        path: Path to a JSON Lines manifest
        reload: Re-read the manifest even if it is already open

    Returns:
        Summary with per-split image counts, or a message prefixed with "Error:"

    Examples:
        >>> open_dataset("data/dataset.manifest")
        "Opened 'dataset.manifest' (6 images: train 2, val 2, test 2)"
    """
    try:
        manifest = dataset_manager.open_dataset(path, reload=reload)
        counts = Counter(entry.split for entry in manifest.entries)
        by_split = ", ".join(f"{name} {counts.get(name, 0)}" for name in SPLITS)
        logger.info("dataset_opened", path=str(Path(path).resolve()), images=len(manifest))
        return f"Opened '{Path(path).name}' ({len(manifest)} images: {by_split})"
    except SalienceError as e:
        logger.error("tool_operation_failed", tool="open_dataset", error=str(e), error_type=type(e).__name__, path=path)
        return f"Error: {describe_error(e)}"
    except Exception as e:
        logger.error("tool_operation_failed", tool="open_dataset", error=str(e), error_type=type(e).__name__, path=path)
        return f"Error: {str(e)}"


def list_open_datasets() -> str:
    """List the manifests currently open, one absolute path per line."""
    paths = dataset_manager.list_datasets()
    if not paths:
        return "No datasets open"
    lines = [f"{len(paths)} dataset(s) open:"]
    for key in paths:
        lines.append(f"  - {key} ({len(dataset_manager.get_dataset(key))} images)")
    return "\n".join(lines)


def close_dataset(path: str) -> str:
    """
    Forget an open manifest.

    Returns:
        Confirmation, or "Error: Dataset not open: <path>"
    """
    try:
        dataset_manager.close_dataset(path)
        logger.info("dataset_closed", path=path)
        return f"Closed dataset {path}"
    except Exception as e:
        logger.error("tool_operation_failed", tool="close_dataset", error=str(e), error_type=type(e).__name__, path=path)
        return f"Error: {str(e)}"

"""
Dataset lifecycle management for billboard-salience.

The MCP server keeps validated manifests in memory so a client can open a
dataset once and run several commands against it. Manifests are keyed by
their absolute path.

Key behaviors:
- Multi-dataset support: several manifests can be open at once
- Idempotent open: opening an already-open manifest returns the cached copy
  unless ``reload`` is requested
- Path normalization: all keys are absolute paths (Path.resolve())
"""

from pathlib import Path
from typing import Dict, List

from .core import DatasetManifest
from .formats.manifest import load_manifest


class DatasetManager:
    """Manages in-memory state for open dataset manifests."""

    def __init__(self):
        self._datasets: Dict[str, DatasetManifest] = {}

    def _normalize_path(self, path: str) -> str:
        return str(Path(path).resolve())

    def open_dataset(self, path: str, reload: bool = False) -> DatasetManifest:
        """
        Load and validate a manifest, or return the cached copy.

        Raises:
            ParseError, MissingFile, DuplicateImageId: From manifest validation
        """
        key = self._normalize_path(path)
        if key in self._datasets and not reload:
            return self._datasets[key]
        manifest = load_manifest(key)
        self._datasets[key] = manifest
        return manifest

    def get_dataset(self, path: str) -> DatasetManifest:
        """
        Get an open manifest.

        Raises:
            ValueError: If the manifest is not open
        """
        key = self._normalize_path(path)
        if key not in self._datasets:
            raise ValueError(f"Dataset not open: {path}")
        return self._datasets[key]

    def close_dataset(self, path: str) -> None:
        """
        Forget an open manifest.

        Raises:
            ValueError: If the manifest is not open
        """
        key = self._normalize_path(path)
        if key not in self._datasets:
            raise ValueError(f"Dataset not open: {path}")
        del self._datasets[key]

    def list_datasets(self) -> List[str]:
        return list(self._datasets.keys())

    def close_all(self) -> int:
        """Forget every manifest (server shutdown); returns how many were open."""
        count = len(self._datasets)
        self._datasets.clear()
        return count


# Module-level singleton
dataset_manager = DatasetManager()

"""
Per-image worker pool for billboard-salience.

Batch commands fan work out per image and reduce the results in manifest
order. The pool bounds the number of concurrent workers and never lets one
failing image abort the batch: each item yields a WorkResult carrying either
its value or the exception it raised.

Key design:
- concurrent.futures threads (NOT processes); workers share read-only inputs
- results are returned in input order regardless of completion order, so the
  worker count never changes numeric results
- lifetime counters for observability (submitted, completed, failed)
"""

import threading
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from typing import Any, Callable, Dict, Generic, Iterable, List, Optional, TypeVar

from .errors import describe_error
from .logging_config import get_logger

logger = get_logger(__name__)

T = TypeVar("T")
R = TypeVar("R")


@dataclass(frozen=True)
class WorkResult(Generic[R]):
    """Outcome of one work item: ``value`` on success, ``error`` otherwise."""

    index: int
    value: Optional[R] = None
    error: Optional[BaseException] = None

    @property
    def ok(self) -> bool:
        return self.error is None


class WorkerPool:
    """
    Bounded pool of per-image workers.

    Usage:
        pool = WorkerPool(pool_size=4)
        for result in pool.map_ordered(score_image, entries):
            if result.ok:
                ...
    """

    def __init__(self, pool_size: int = 1):
        """
        Initialize the pool.

        Args:
            pool_size: Maximum number of concurrent workers (default: 1)
        """
        if pool_size < 1:
            raise ValueError(f"pool_size must be at least 1, got {pool_size}")
        self.pool_size = pool_size
        self._lock = threading.Lock()
        self._active = 0

        # Metrics
        self.total_submitted = 0
        self.total_completed = 0
        self.total_failed = 0

        logger.debug("worker_pool_initialized", pool_size=pool_size)

    def _run_one(self, fn: Callable[[T], R], index: int, item: T) -> WorkResult[R]:
        with self._lock:
            self._active += 1
        try:
            value = fn(item)
        except Exception as e:
            with self._lock:
                self.total_failed += 1
            logger.warning(
                "worker_task_failed",
                index=index,
                error=str(e),
                error_type=type(e).__name__,
            )
            return WorkResult(index=index, error=e)
        else:
            with self._lock:
                self.total_completed += 1
            return WorkResult(index=index, value=value)
        finally:
            with self._lock:
                self._active -= 1

    def map_ordered(self, fn: Callable[[T], R], items: Iterable[T]) -> List[WorkResult[R]]:
        """
        Apply ``fn`` to every item and return the outcomes in input order.

        Exceptions raised by ``fn`` are captured in the corresponding
        WorkResult instead of propagating.
        """
        items = list(items)
        with self._lock:
            self.total_submitted += len(items)
        if not items:
            return []

        if self.pool_size == 1 or len(items) == 1:
            results = [self._run_one(fn, i, item) for i, item in enumerate(items)]
        else:
            workers = min(self.pool_size, len(items))
            with ThreadPoolExecutor(max_workers=workers, thread_name_prefix="salience-worker") as executor:
                futures = [executor.submit(self._run_one, fn, i, item) for i, item in enumerate(items)]
                results = [future.result() for future in futures]

        failed = sum(1 for r in results if not r.ok)
        logger.debug("worker_batch_complete", items=len(items), failed=failed, pool_size=self.pool_size)
        return results

    def get_metrics(self) -> Dict[str, Any]:
        """
        Get pool metrics for observability.

        Returns:
            Dictionary with current pool state:
            - active_count: Number of items being processed right now
            - total_submitted: Items submitted since the pool was created
            - total_completed: Items that finished successfully
            - total_failed: Items whose worker raised
            - pool_size: Maximum concurrent workers
        """
        with self._lock:
            return {
                "active_count": self._active,
                "total_submitted": self.total_submitted,
                "total_completed": self.total_completed,
                "total_failed": self.total_failed,
                "pool_size": self.pool_size,
            }


def failure_message(label: str, error: BaseException) -> str:
    """Error entry for a failed item, e.g. ``img-3: FormatError: ...``."""
    return f"{label}: {describe_error(error)}"


# Module-level singleton used by the MCP server
worker_pool = WorkerPool(pool_size=2)

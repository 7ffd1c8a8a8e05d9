"""
Health monitoring for billboard-salience.

HealthMonitor reports process memory, system memory percentage, worker pool
utilisation and the number of open datasets. The CLI logs a snapshot at the
end of every run; the MCP server exposes it as a tool.

Status logic:
- UNHEALTHY: system memory above the threshold
- DEGRADED: system memory within 10 points of the threshold, or worker failures
- HEALTHY: otherwise
"""

from typing import Dict, List, Optional

import psutil

from .dataset_manager import dataset_manager
from .logging_config import get_logger
from .worker_pool import WorkerPool, worker_pool

logger = get_logger(__name__)


class HealthMonitor:
    """Health monitor with a configurable memory threshold."""

    def __init__(self, memory_threshold_percent: float = 80.0):
        """
        Initialize health monitor.

        Args:
            memory_threshold_percent: System memory % above which the process
                is reported unhealthy (default: 80%)
        """
        self.memory_threshold_percent = memory_threshold_percent
        logger.debug("health_monitor_initialized", memory_threshold=memory_threshold_percent)

    def check_health(self, pool: Optional[WorkerPool] = None) -> Dict:
        """
        Check process health and return metrics.

        Args:
            pool: Worker pool to report on (default: the server's pool)

        Returns:
            Dictionary with keys:
            - status: "healthy" | "degraded" | "unhealthy"
            - process_memory_mb: Current process RSS in MB
            - system_memory_percent: System-wide memory usage percentage
            - worker_pool: active_count, total_submitted, total_completed,
              total_failed, pool_size
            - open_datasets: Number of manifests open in the dataset manager
            - alerts: Actionable alert messages (empty if healthy)
        """
        pool = pool if pool is not None else worker_pool
        process_memory_mb = psutil.Process().memory_info().rss / (1024 * 1024)
        system_memory_percent = psutil.virtual_memory().percent
        pool_metrics = pool.get_metrics()
        open_datasets = len(dataset_manager.list_datasets())

        alerts: List[str] = []
        status = "healthy"

        if system_memory_percent > self.memory_threshold_percent:
            status = "unhealthy"
            alerts.append(
                f"System memory at {system_memory_percent:.1f}% "
                f"(threshold: {self.memory_threshold_percent:.1f}%)"
            )
        else:
            degraded_threshold = self.memory_threshold_percent - 10
            if system_memory_percent > degraded_threshold:
                status = "degraded"
                alerts.append(
                    f"System memory at {system_memory_percent:.1f}% "
                    f"(warning threshold: {degraded_threshold:.1f}%)"
                )
            if pool_metrics["total_failed"] > 0:
                status = "degraded"
                alerts.append(
                    f"Worker failures detected: {pool_metrics['total_failed']} "
                    f"(check logs for details)"
                )

        if status != "healthy":
            logger.warning(
                "health_check_warning",
                status=status,
                process_memory_mb=process_memory_mb,
                system_memory_percent=system_memory_percent,
                workers_failed=pool_metrics["total_failed"],
                alerts=alerts,
            )

        return {
            "status": status,
            "process_memory_mb": process_memory_mb,
            "system_memory_percent": system_memory_percent,
            "worker_pool": pool_metrics,
            "open_datasets": open_datasets,
            "alerts": alerts,
        }


# Module-level singleton
health_monitor = HealthMonitor()

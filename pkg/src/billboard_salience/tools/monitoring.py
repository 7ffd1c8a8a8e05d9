"""
Monitoring MCP tool for the billboard-salience server.

Provides get_server_health() which returns a formatted health report for MCP
clients.
"""


def get_server_health() -> str:
    """
    Get server health metrics and status.

    Returns formatted health report showing:
    - Status (HEALTHY/DEGRADED/UNHEALTHY)
    - Process memory usage
    - System memory percentage
    - Open dataset count
    - Worker pool metrics (active, submitted, completed, failed, pool size)
    - Active alerts (if any)

    Returns:
        Formatted multi-line string with health metrics
    """
    from ..monitoring import health_monitor

    metrics = health_monitor.check_health()
    pool = metrics["worker_pool"]

    lines = [
        f"Server Health: {metrics['status'].upper()}",
        "",
        f"Process Memory: {metrics['process_memory_mb']:.1f} MB",
        f"System Memory: {metrics['system_memory_percent']:.1f}%",
        f"Open Datasets: {metrics['open_datasets']}",
        "",
        "Worker Pool:",
        f"  Active items: {pool['active_count']}",
        f"  Total submitted: {pool['total_submitted']}",
        f"  Total completed: {pool['total_completed']}",
        f"  Total failed: {pool['total_failed']}",
        f"  Pool size limit: {pool['pool_size']}",
    ]

    if metrics["alerts"]:
        lines.append("")
        lines.append("Alerts:")
        for alert in metrics["alerts"]:
            lines.append(f"  - {alert}")

    return "\n".join(lines)

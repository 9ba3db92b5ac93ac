"""
Prometheus metrics for verification runs.

Sweeps are batch jobs, so the gauges live in a private registry and are
written once to a textfile (node-exporter textfile collector format).
"""

import logging

from prometheus_client import CollectorRegistry, Gauge, write_to_textfile

from .report import summarize

logger = logging.getLogger(__name__)


def build_registry(rows: list, duration_seconds: float) -> CollectorRegistry:
    """Gauges summarising result rows per suite."""
    registry = CollectorRegistry()

    rows_total = Gauge(
        "jacobi_lab_rows",
        "Result rows produced in the last run",
        ["suite"],
        registry=registry,
    )
    failures = Gauge(
        "jacobi_lab_failed_rows",
        "Rows whose measured value exceeded the bound, or that errored",
        ["suite"],
        registry=registry,
    )
    errors = Gauge(
        "jacobi_lab_error_rows",
        "Rows recording an exception",
        ["suite"],
        registry=registry,
    )
    worst = Gauge(
        "jacobi_lab_worst_ratio",
        "Largest measured/bound ratio in the suite (1 or more means a violation)",
        ["suite"],
        registry=registry,
    )
    duration = Gauge(
        "jacobi_lab_run_duration_seconds",
        "Wall time of the last run",
        registry=registry,
    )

    summary = summarize(rows)
    for suite, s in summary["suites"].items():
        rows_total.labels(suite=suite).set(s["rows"])
        failures.labels(suite=suite).set(s["failed"])
        errors.labels(suite=suite).set(s["errors"])
        worst.labels(suite=suite).set(s["worst_ratio"])
    duration.set(duration_seconds)
    return registry


def write_metrics(rows: list, path: str, duration_seconds: float):
    """Write the run's gauges to a Prometheus textfile."""
    write_to_textfile(path, build_registry(rows, duration_seconds))
    logger.info("Metrics written to %s", path)

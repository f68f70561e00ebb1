"""Exact linear algebra, 2x2 kernels, output writers and worker pools."""

from .workers import resolve_workers, run_partitioned

__all__ = ["resolve_workers", "run_partitioned"]

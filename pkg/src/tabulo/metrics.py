"""Run metrics shared by the multiply engine and the benchmark harness."""

from __future__ import annotations

from dataclasses import dataclass


def round_sig(x: float, digits: int = 6) -> float:
    """Round to the given number of significant digits (report precision)."""
    return float(f"{x:.{digits}g}")


@dataclass(frozen=True)
class RunMetrics:
    partial_products: int
    elapsed_seconds: float
    rate: float  # partial products per second
    nodes: int = 1
    scale_label: str = ""

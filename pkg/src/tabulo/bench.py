"""Strong/weak scaling harness for the multiply engine and row extraction.

A simulated node is one worker pair serving two tablets, so node count n runs
with 2n tablets and 2n workers. Each configuration repeats the timed multiply
and aggregates by median, which resists the occasional scheduling hiccup.
The clock inside table_mult starts after input compaction and stops when all
pipelines have quiesced their writes, so output compaction is never timed.

Reports serialize to CSV with the fixed header below; repetitions and the
aggregation rule are properties of the harness invocation and are not carried
in the CSV.
"""

from __future__ import annotations

import os
from dataclasses import dataclass
from typing import Optional, Sequence

from . import rng
from .errors import ZeroBaseline
from .extraction import build_extraction_table, extract_rows, sample_vertices
from .graphgen import GraphSpec, generate_graph
from .metrics import RunMetrics, round_sig
from .semiring import PLUS_TIMES
from .tablemult import MultSpec, table_mult
from .tables import SUM_COMBINER, TableRegistry

CSV_HEADER = ("experiment,mode,nodes,scale_label,rows,"
              "partial_products,seconds,rate_pp_per_sec,speedup")


def compute_speedup(baseline_rate: float, rate: float) -> float:
    """rate / baseline_rate, the speedup ratio against the one-node rate."""
    if baseline_rate <= 0:
        raise ZeroBaseline(f"baseline rate {baseline_rate} is not positive")
    return rate / baseline_rate


@dataclass(frozen=True)
class ReportRow:
    experiment: str        # "tablemult" or "extraction"
    mode: str              # "strong" or "weak"
    nodes: int
    scale_label: str
    rows: Optional[int]    # sample size for extraction rows, else None
    partial_products: int
    seconds: float
    rate: float
    speedup: float


@dataclass(frozen=True)
class ScalingReport:
    rows: tuple[ReportRow, ...]
    repetitions: int = 0
    aggregation: str = "median"
    oversubscribed: tuple[int, ...] = ()

    def speedup_ratios(self):
        """Speedup keyed by node count (or by (node count, sample size))."""
        if all(r.rows is None for r in self.rows):
            return {r.nodes: r.speedup for r in self.rows}
        return {(r.nodes, r.rows): r.speedup for r in self.rows}


def emit_csv(report: ScalingReport) -> str:
    lines = [CSV_HEADER]
    for r in report.rows:
        lines.append(",".join((
            r.experiment, r.mode, str(r.nodes), r.scale_label,
            "" if r.rows is None else str(r.rows),
            str(r.partial_products),
            f"{r.seconds:.6g}", f"{r.rate:.6g}", f"{r.speedup:.6g}")))
    return "\n".join(lines) + "\n"


def parse_csv(text: str) -> ScalingReport:
    lines = [ln for ln in text.splitlines() if ln.strip()]
    if not lines or lines[0] != CSV_HEADER:
        raise ValueError("missing or malformed report header")
    rows = []
    for ln in lines[1:]:
        parts = ln.split(",")
        if len(parts) != 9:
            raise ValueError(f"expected 9 columns, got {len(parts)}: {ln!r}")
        rows.append(ReportRow(
            experiment=parts[0], mode=parts[1], nodes=int(parts[2]),
            scale_label=parts[3], rows=int(parts[4]) if parts[4] else None,
            partial_products=int(parts[5]), seconds=float(parts[6]),
            rate=float(parts[7]), speedup=float(parts[8])))
    return ScalingReport(tuple(rows))


def weak_scale_pair(base_scale: int, node_count: int) -> tuple[int, int]:
    """The two graph scales for a weak-scaling step: at each node doubling the
    scale of one graph is incremented, alternating which, first graph first."""
    if node_count < 1 or node_count & (node_count - 1):
        raise ValueError("weak scaling node counts must be powers of two")
    doublings = node_count.bit_length() - 1
    return base_scale + (doublings + 1) // 2, base_scale + doublings // 2


def _validate_node_counts(node_counts: Sequence[int]) -> list[int]:
    counts = list(node_counts)
    if not counts or counts[0] != 1:
        raise ValueError("node counts must start at 1")
    if any(counts[i] >= counts[i + 1] for i in range(len(counts) - 1)):
        raise ValueError("node counts must be strictly ascending")
    return counts


def _aggregate(samples: list[RunMetrics], constant_pp: bool) -> tuple[int, float]:
    """Median run (lower median for even counts), as one measured pair.

    Multiply benchmarks reuse the same inputs across repetitions, so their
    partial-product count must not vary; extraction draws a fresh sample per
    repetition and its count legitimately does.
    """
    if constant_pp:
        pps = {m.partial_products for m in samples}
        if len(pps) != 1:
            raise RuntimeError(f"partial products varied across repetitions: {pps}")
    ordered = sorted(samples, key=lambda m: m.elapsed_seconds)
    mid = ordered[(len(ordered) - 1) // 2]
    return mid.partial_products, round_sig(mid.elapsed_seconds)


def _row(experiment, mode, nodes, label, rows, pp, seconds, baseline_rate):
    rate = round_sig(pp / seconds) if seconds > 0 else 0.0
    speedup = round_sig(compute_speedup(baseline_rate, rate)) if baseline_rate else 1.0
    return ReportRow(experiment, mode, nodes, label, rows, pp, seconds,
                     rate, speedup), rate


def _multiply_once(registry, workers: int) -> RunMetrics:
    registry.create_table("C", registry.get("B").splits, SUM_COMBINER)
    registry.compact("C")
    try:
        return table_mult(registry, MultSpec("AT", "B", "C", PLUS_TIMES, workers))
    finally:
        registry.drop_table("C")


def _prepare_pair(scale_at: int, scale_b: int, tablets: int, seed: int,
                  edges_per_vertex: int) -> TableRegistry:
    registry = TableRegistry()
    registry.create_table("AT", combiner=SUM_COMBINER)
    registry.create_table("B", combiner=SUM_COMBINER)
    generate_graph(registry, GraphSpec(scale_at, edges_per_vertex, rng.word(seed, 0)), "AT")
    generate_graph(registry, GraphSpec(scale_b, edges_per_vertex, rng.word(seed, 1)), "B")
    for name in ("AT", "B"):
        registry.apply_splits(name, registry.compute_optimal_splits(name, tablets))
        registry.compact(name)
    return registry


def _scaling_run(experiment_mode: str, scale_pairs, node_counts, repetitions,
                 seed, edges_per_vertex) -> ScalingReport:
    if repetitions < 1:
        raise ValueError("repetitions must be >= 1")
    rows = []
    baseline_rate = 0.0
    for n, (scale_at, scale_b) in zip(node_counts, scale_pairs):
        registry = _prepare_pair(scale_at, scale_b, 2 * n, seed, edges_per_vertex)
        samples = [_multiply_once(registry, 2 * n) for _ in range(repetitions)]
        pp, seconds = _aggregate(samples, constant_pp=True)
        row, rate = _row("tablemult", experiment_mode, n,
                         f"{scale_at}x{scale_b}", None, pp, seconds, baseline_rate)
        if n == node_counts[0]:
            baseline_rate = rate
        rows.append(row)
    cores = os.cpu_count() or 1
    return ScalingReport(tuple(rows), repetitions,
                         oversubscribed=tuple(n for n in node_counts if 2 * n > cores))


def run_strong_scaling(scale: int, node_counts: Sequence[int], repetitions: int = 3,
                       seed: int = 1, edges_per_vertex: int = 16) -> ScalingReport:
    """Fixed problem size: the same scale x scale multiply at every node count."""
    counts = _validate_node_counts(node_counts)
    return _scaling_run("strong", [(scale, scale)] * len(counts), counts,
                        repetitions, seed, edges_per_vertex)


def run_weak_scaling(base_scale: int, node_counts: Sequence[int], repetitions: int = 3,
                     seed: int = 1, edges_per_vertex: int = 16) -> ScalingReport:
    """Problem grown with resources along the alternating scale pattern."""
    counts = _validate_node_counts(node_counts)
    return _scaling_run("weak", [weak_scale_pair(base_scale, n) for n in counts],
                        counts, repetitions, seed, edges_per_vertex)


def run_extraction_scaling(mode: str, scale: int, sample_sizes: Sequence[int],
                           node_counts: Sequence[int], repetitions: int = 3,
                           seed: int = 1, edges_per_vertex: int = 16) -> ScalingReport:
    """Row-extraction timing; `scale` is fixed (strong) or the one-node base
    scale grown by log2(nodes) (weak). A fresh random diagonal is built per
    repetition; the output table copies the graph's splits."""
    if mode not in ("strong", "weak"):
        raise ValueError(f"mode must be strong or weak, not {mode!r}")
    if repetitions < 1:
        raise ValueError("repetitions must be >= 1")
    counts = _validate_node_counts(node_counts)
    rows = []
    baselines: dict[int, float] = {}
    sample_counter = 0
    for n in counts:
        if mode == "weak" and n & (n - 1):
            raise ValueError("weak scaling node counts must be powers of two")
        graph_scale = scale if mode == "strong" else scale + (n.bit_length() - 1)
        registry = TableRegistry()
        registry.create_table("G", combiner=SUM_COMBINER)
        generate_graph(registry, GraphSpec(graph_scale, edges_per_vertex,
                                           rng.word(seed, 2)), "G")
        registry.apply_splits("G", registry.compute_optimal_splits("G", 2 * n))
        registry.compact("G")
        graph_splits = registry.get("G").splits
        for size in sample_sizes:
            samples = []
            for _ in range(repetitions):
                sample = sample_vertices(graph_scale, size,
                                         rng.word(seed, 16 + sample_counter))
                sample_counter += 1
                registry.create_table("E")
                registry.create_table("OUT", graph_splits, SUM_COMBINER)
                build_extraction_table(registry, sample, "E")
                registry.compact("E")
                samples.append(extract_rows(registry, "E", "G", "OUT", 2 * n))
                registry.drop_table("E")
                registry.drop_table("OUT")
            pp, seconds = _aggregate(samples, constant_pp=False)
            row, rate = _row("extraction", mode, n, str(graph_scale), size,
                             pp, seconds, baselines.get(size, 0.0))
            baselines.setdefault(size, rate)
            rows.append(row)
    cores = os.cpu_count() or 1
    return ScalingReport(tuple(rows), repetitions,
                         oversubscribed=tuple(n for n in counts if 2 * n > cores))

"""tabulo: a miniature tablet store with a semiring table-multiply engine.

An in-process, split-partitioned, sorted key-value store in the Accumulo
shape (5-tuple keys, lazy combiners, tablet compaction) plus the three-stage
multiply pipeline over it, a deterministic power-law graph generator, cued
row extraction, and a strong/weak scaling benchmark harness.
"""

from .bench import (ReportRow, ScalingReport, compute_speedup, emit_csv,
                    parse_csv, run_extraction_scaling, run_strong_scaling,
                    run_weak_scaling, weak_scale_pair)
from .extraction import SampleSet, build_extraction_table, extract_rows, sample_vertices
from .graphgen import (GraphSpec, degree_histogram, generate_graph, label_width,
                       parse_vertex_label, vertex_label)
from .iterators import (JoinStats, PartialProduct, join_blocks, remote_source,
                        remote_write, remote_write_batches, two_table_join)
from .keys import U64_MAX, Entry, Key, entry
from .metrics import RunMetrics, round_sig
from .semiring import MIN_PLUS, PLUS_TIMES, Semiring, combiner_for
from .tablemult import MultSpec, count_partial_products, table_mult
from .tables import (DEFAULT_FLUSH_THRESHOLD, MIN_COMBINER, SUM_COMBINER,
                     CombinerSpec, Table, TableRegistry, Tablet, u64_add)
from . import errors

__version__ = "0.1.0"

__all__ = [
    "CombinerSpec", "DEFAULT_FLUSH_THRESHOLD", "Entry", "GraphSpec", "JoinStats",
    "Key", "MIN_COMBINER", "MIN_PLUS", "MultSpec", "PLUS_TIMES", "PartialProduct",
    "ReportRow", "RunMetrics", "SampleSet", "ScalingReport", "Semiring",
    "SUM_COMBINER", "Table", "TableRegistry", "Tablet", "U64_MAX",
    "build_extraction_table", "combiner_for", "compute_speedup",
    "count_partial_products", "degree_histogram", "emit_csv", "entry", "errors",
    "extract_rows", "generate_graph", "join_blocks", "label_width", "parse_csv",
    "parse_vertex_label", "remote_source", "remote_write", "remote_write_batches",
    "round_sig", "run_extraction_scaling", "run_strong_scaling", "run_weak_scaling",
    "sample_vertices", "table_mult", "two_table_join", "u64_add", "vertex_label",
    "weak_scale_pair",
]

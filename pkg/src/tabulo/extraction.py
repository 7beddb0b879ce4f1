"""Cued subgraph extraction: pull sampled rows out of a stored graph.

A binary diagonal table E holds value 1 at (v, v) for every sampled vertex.
Because E is diagonal it is its own transpose, so it goes straight into the
transposed slot of a multiply: E times G keeps exactly the rows of G whose
vertex is in the sample, each entry untouched (1 is the times identity).
Putting the small table in the first position is also the cheap direction,
since that is the side the pipelines re-read per tablet.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Tuple

import numpy as np

from . import rng
from .errors import OutputNotEmpty
from .graphgen import label_width, labels_for_ids
from .keys import U64_MAX
from .metrics import RunMetrics
from .semiring import PLUS_TIMES
from .tablemult import MultSpec, table_mult
from .tables import TableRegistry


@dataclass(frozen=True)
class SampleSet:
    vertices: Tuple[int, ...]  # sorted, distinct
    scale: int
    seed: int

    def __post_init__(self):
        n = 1 << self.scale
        if any(not 0 <= v < n for v in self.vertices):
            raise ValueError(f"sampled vertex outside [0, 2^{self.scale})")
        if list(self.vertices) != sorted(set(self.vertices)):
            raise ValueError("sample vertices must be sorted and distinct")


def sample_vertices(scale: int, size: int, seed: int) -> SampleSet:
    """Sample `size` distinct vertices of a 2^scale graph, deterministically."""
    if not 0 <= seed <= U64_MAX:
        raise ValueError("seed must fit in u64")
    picks = rng.sample_without_replacement(1 << scale, size, seed)
    return SampleSet(tuple(picks), scale, seed)


def build_extraction_table(registry: TableRegistry, sample: SampleSet,
                           target: str) -> int:
    """Write the binary diagonal for the sample; returns the entry count."""
    table = registry.get(target)
    if table.raw_count():
        raise OutputNotEmpty(target)
    if not sample.vertices:
        return 0
    ids = np.asarray(sample.vertices, dtype=np.int64)
    labels = labels_for_ids(ids, label_width(sample.scale))
    return table.write_columnar(labels, labels,
                                np.ones(len(ids), dtype=np.uint64))


def extract_rows(registry: TableRegistry, extraction_table: str, graph: str,
                 output: str, num_workers: int = 1) -> RunMetrics:
    """TableMult with the diagonal in the transposed slot; output must be an
    empty sum-combined table (conventionally pre-split like the graph)."""
    spec = MultSpec(table_at=extraction_table, table_b=graph, table_c=output,
                    semiring=PLUS_TIMES, num_workers=num_workers)
    return table_mult(registry, spec)

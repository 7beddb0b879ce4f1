"""Unpermuted power-law graph generator (Graph500-style Kronecker edges).

Produces edgesPerVertex * 2^scale directed edges over 2^scale vertices using
the canonical recursive quadrant probabilities (0.57, 0.19, 0.19, 0.05).
Unpermuted means vertex ids are not relabeled afterwards, so vertex 0 is the
highly connected hub and degree falls off with vertex popcount.

Edge e's randomness is a pure function of (seed, e), so generation shards
freely: any shard count, any block size, same graph.

Vertex labels are zero-padded decimal byte strings whose width is the digit
count of 2^scale, which makes label order agree with numeric order and keeps
row splits meaningful.
"""

from __future__ import annotations

from dataclasses import dataclass
from itertools import groupby
from typing import Dict

import numpy as np

from . import rng
from .keys import U64_MAX
from .tables import TableRegistry

KRONECKER_PROBS = (0.57, 0.19, 0.19, 0.05)
_GEN_BLOCK = 1 << 20


@dataclass(frozen=True)
class GraphSpec:
    scale: int
    edges_per_vertex: int = 16
    seed: int = 0

    def __post_init__(self):
        if self.scale < 1:
            raise ValueError("scale must be >= 1")
        if self.edges_per_vertex < 1:
            raise ValueError("edges_per_vertex must be >= 1")
        if not 0 <= self.seed <= U64_MAX:
            raise ValueError("seed must fit in u64")

    @property
    def raw_edge_count(self) -> int:
        return self.edges_per_vertex << self.scale


def label_width(scale: int) -> int:
    return len(str(1 << scale))


def vertex_label(vertex: int, scale: int) -> bytes:
    if not 0 <= vertex < (1 << scale):
        raise ValueError(f"vertex {vertex} outside [0, 2^{scale})")
    return b"%0*d" % (label_width(scale), vertex)


def parse_vertex_label(label: bytes) -> int:
    return int(label)


def labels_for_ids(ids: np.ndarray, width: int) -> np.ndarray:
    """Vectorized zero-padded decimal encoding into an S-dtype column."""
    digits = np.empty((len(ids), width), dtype=np.uint8)
    x = ids.astype(np.int64)
    for p in range(width - 1, -1, -1):
        digits[:, p] = (x % 10) + ord("0")
        x //= 10
    return digits.view(f"S{width}").reshape(-1)


def _edge_block(seed: int, start: int, stop: int, scale: int):
    """Edges [start, stop) as (src, dst) id arrays."""
    a, b, c, _ = KRONECKER_PROBS
    idx = np.arange(start, stop, dtype=np.uint64)
    edge_seeds = rng.words_array(seed, idx)
    src = np.zeros(stop - start, dtype=np.int64)
    dst = np.zeros(stop - start, dtype=np.int64)
    cuts = np.asarray([a, a + b, a + b + c])
    for level in range(scale):
        w = rng.words_from_seeds(edge_seeds, level)
        u = (w >> np.uint64(11)).astype(np.float64) / float(1 << 53)
        quadrant = np.digitize(u, cuts)
        src |= ((quadrant >> 1) & 1) << level
        dst |= (quadrant & 1) << level
    return src, dst


def generate_graph(registry: TableRegistry, spec: GraphSpec, target: str,
                   shards: int = 1) -> int:
    """Write the raw edge multiset into the target adjacency table.

    The target must already exist and carry a sum combiner; duplicate edges
    then collapse into multiplicities at scan or compaction time. Returns the
    raw edge count, which is edges_per_vertex * 2^scale by construction.
    """
    table = registry.get(target)
    if table.combiner is None:
        raise ValueError(f"target table {target!r} needs a sum combiner")
    if shards < 1:
        raise ValueError("shards must be >= 1")
    total = spec.raw_edge_count
    width = label_width(spec.scale)
    bounds = [total * s // shards for s in range(shards + 1)]
    for s in range(shards):
        for start in range(bounds[s], bounds[s + 1], _GEN_BLOCK):
            stop = min(start + _GEN_BLOCK, bounds[s + 1])
            if start >= stop:
                continue
            src, dst = _edge_block(spec.seed, start, stop, spec.scale)
            table.write_columnar(labels_for_ids(src, width),
                                 labels_for_ids(dst, width),
                                 np.ones(stop - start, dtype=np.uint64))
    return total


def degree_histogram(registry: TableRegistry, table: str) -> Dict[int, int]:
    """Map out-degree -> number of rows with that degree (distinct targets)."""
    histogram: Dict[int, int] = {}
    for _, group in groupby(registry.scan(table), key=lambda e: e.key.row):
        degree = sum(1 for _ in group)
        histogram[degree] = histogram.get(degree, 0) + 1
    return histogram

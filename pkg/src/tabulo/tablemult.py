"""TableMult: sparse generalized multiply of two stored tables.

Computes C(i, j) = plus over k of A(i, k) times B(k, j), where the first
table stores the transpose of A. Work is decomposed into one pipeline per
tablet of B; each pipeline remote-sources the transposed table restricted to
its tablet's row range, joins, and writes partial products into C. Pipelines
are single-threaded and share nothing but C's tablets, whose write paths are
individually locked, so results are independent of worker count: summation
happens later, in C's combiner, under an associative-commutative reducer.
"""

from __future__ import annotations

import time
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from itertools import groupby
from typing import Optional

from . import iterators
from .errors import OutputNotEmpty
from .iterators import JoinStats
from .metrics import RunMetrics
from .semiring import PLUS_TIMES, Semiring, vectorizable
from .tables import TableRegistry


@dataclass(frozen=True)
class MultSpec:
    table_at: str           # stores the transpose of the left operand
    table_b: str
    table_c: str
    semiring: Semiring = PLUS_TIMES
    num_workers: int = 1

    def __post_init__(self):
        if self.table_c in (self.table_at, self.table_b):
            raise ValueError("output table must differ from both inputs")
        if self.num_workers < 1:
            raise ValueError("num_workers must be >= 1")


def table_mult(registry: TableRegistry, spec: MultSpec) -> RunMetrics:
    """Run the multiply; returns partial-product count and pipeline wall time.

    The output table must already exist, be empty, and carry the combiner
    implementing the semiring's plus (it is pre-split by the caller). Timing
    covers pipeline start to last write quiescing, not output compaction.
    """
    table_at = registry.get(spec.table_at)
    table_b = registry.get(spec.table_b)
    table_c = registry.get(spec.table_c)
    if table_c.raw_count():
        raise OutputNotEmpty(spec.table_c)
    if table_c.combiner is None:
        raise ValueError(f"output table {spec.table_c!r} must carry a combiner")
    with table_b.lock:
        ranges = [(t.lower, t.upper) for t in table_b.tablets]

    started = time.perf_counter()
    if spec.num_workers == 1 or len(ranges) == 1:
        stats = [_pipeline(registry, spec, rng) for rng in ranges]
    else:
        with ThreadPoolExecutor(max_workers=spec.num_workers) as pool:
            stats = list(pool.map(lambda rng: _pipeline(registry, spec, rng), ranges))
    elapsed = time.perf_counter() - started

    pp = sum(s.partial_products for s in stats)
    rate = pp / elapsed if elapsed > 0 else 0.0
    return RunMetrics(pp, elapsed, rate, nodes=max(1, spec.num_workers // 2))


def _pipeline(registry: TableRegistry, spec: MultSpec, rng) -> JoinStats:
    """One per-tablet pipeline: source, join, write back."""
    if vectorizable(spec.semiring):
        blocks_b = registry.scan_blocks(spec.table_b, rng)
        blocks_at = registry.scan_blocks(spec.table_at, rng)
        if blocks_b is not None and blocks_at is not None:
            stream = iterators.join_blocks(blocks_at, blocks_b, spec.semiring.name)
            iterators.remote_write_batches(registry, stream, spec.table_c)
            return stream.stats
    stream = iterators.two_table_join(
        iterators.remote_source(registry, spec.table_at, rng),
        registry.scan(spec.table_b, rng),
        spec.semiring.times)
    iterators.remote_write(registry, stream, spec.table_c)
    return stream.stats


def count_partial_products(registry: TableRegistry, table_at: str, table_b: str) -> int:
    """Sum over shared rows k of nnz(AT row k) * nnz(B row k), without multiplying.

    Coordinated merge of two scans; an independent route to the number the
    join's stats report.
    """
    groups_a = groupby(registry.scan(table_at), key=lambda e: e.key.row)
    groups_b = groupby(registry.scan(table_b), key=lambda e: e.key.row)
    total = 0
    a = next(groups_a, None)
    b = next(groups_b, None)
    while a is not None and b is not None:
        if a[0] < b[0]:
            a = next(groups_a, None)
        elif b[0] < a[0]:
            b = next(groups_b, None)
        else:
            nnz_a = sum(1 for _ in a[1])
            nnz_b = sum(1 for _ in b[1])
            total += nnz_a * nnz_b
            a = next(groups_a, None)
            b = next(groups_b, None)
    return total

"""The three-stage multiply pipeline: remote source, two-table join, remote write.

The join aligns two key-sorted streams on their row field k. The first stream
holds the transposed left operand, so its qualifier is the output row i; the
second stream's qualifier is the output column j. For every k present in both
streams the full cross product of the two rows is emitted as partial products
(i, j, a times b). One row of the transposed side is buffered at a time while
the matching row of the other side streams through; nothing else is held.

Two implementations share this contract: a pure-Python streaming join over
Entry iterators (the reference), and a columnar join over compacted blocks
that does the same row alignment with numpy and emits array batches. The
multiply engine picks whichever the tables can serve; tests hold the two
equivalent.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Callable, Iterable, Iterator, NamedTuple, Optional, Sequence

import numpy as np

from .columnar import ColumnarRun
from .errors import MultiplyOverflow, RowBufferExceeded, UnsortedInput
from .keys import U64_MAX, Entry, Key
from .tables import TableRegistry

DEFAULT_ROW_BUFFER_CAP = 1 << 22
BATCH_TARGET = 1 << 18  # partial products per emitted columnar batch


class PartialProduct(NamedTuple):
    row: bytes        # i, the output row
    qualifier: bytes  # j, the output column
    value: int


@dataclass
class JoinStats:
    partial_products: int = 0
    rows_aligned: int = 0
    entries_read_a: int = 0
    entries_read_b: int = 0


class ProductBatch(NamedTuple):
    rows: np.ndarray
    quals: np.ndarray
    values: np.ndarray


def remote_source(registry: TableRegistry, table: str,
                  row_range=None) -> Iterator[Entry]:
    """Scan stage feeding the join; contract identical to a table scan."""
    return registry.scan(table, row_range)


def _checked(stream: Iterable[Entry], side: str) -> Iterator[Entry]:
    prev: Optional[Key] = None
    for e in stream:
        if prev is not None and e.key < prev:
            raise UnsortedInput(f"stream {side} is not key-sorted at {e.key!r}")
        prev = e.key
        yield e


class ProductStream:
    """Iterator of PartialProduct; stats are final once exhausted."""

    def __init__(self, stream_at: Iterable[Entry], stream_b: Iterable[Entry],
                 times: Callable[[int, int], int],
                 row_buffer_cap: int = DEFAULT_ROW_BUFFER_CAP):
        self.stats = JoinStats()
        self._gen = self._join(_checked(stream_at, "A"), _checked(stream_b, "B"),
                               times, row_buffer_cap)

    def __iter__(self) -> Iterator[PartialProduct]:
        return self._gen

    def _join(self, at_stream, b_stream, times, cap):
        stats = self.stats
        a = self._pull_a(at_stream)
        b = self._pull_b(b_stream)
        row_buffer: list[tuple[bytes, int]] = []
        while a is not None and b is not None:
            if a.key.row < b.key.row:
                a = self._pull_a(at_stream)
            elif b.key.row < a.key.row:
                b = self._pull_b(b_stream)
            else:
                k = a.key.row
                row_buffer.clear()
                while a is not None and a.key.row == k:
                    row_buffer.append((a.key.qualifier, a.value))
                    if len(row_buffer) > cap:
                        raise RowBufferExceeded(
                            f"row {k!r} exceeds the {cap}-entry buffer cap")
                    a = self._pull_a(at_stream)
                stats.rows_aligned += 1
                while b is not None and b.key.row == k:
                    j, bv = b.key.qualifier, b.value
                    for i, av in row_buffer:
                        yield PartialProduct(i, j, times(av, bv))
                    stats.partial_products += len(row_buffer)
                    b = self._pull_b(b_stream)

    def _pull_a(self, stream) -> Optional[Entry]:
        e = next(stream, None)
        if e is not None:
            self.stats.entries_read_a += 1
        return e

    def _pull_b(self, stream) -> Optional[Entry]:
        e = next(stream, None)
        if e is not None:
            self.stats.entries_read_b += 1
        return e


def two_table_join(stream_at: Iterable[Entry], stream_b: Iterable[Entry],
                   times: Callable[[int, int], int],
                   row_buffer_cap: int = DEFAULT_ROW_BUFFER_CAP) -> ProductStream:
    """Row-aligned cross-product join of two key-sorted entry streams."""
    return ProductStream(stream_at, stream_b, times, row_buffer_cap)


class BatchStream:
    """Columnar twin of ProductStream: yields ProductBatch arrays."""

    def __init__(self, blocks_at: Sequence[ColumnarRun], blocks_b: Sequence[ColumnarRun],
                 semiring_name: str, row_buffer_cap: int = DEFAULT_ROW_BUFFER_CAP):
        self.stats = JoinStats()
        self._gen = self._join(blocks_at, blocks_b, semiring_name, row_buffer_cap)

    def __iter__(self) -> Iterator[ProductBatch]:
        return self._gen

    @staticmethod
    def _flatten(blocks: Sequence[ColumnarRun]):
        blocks = [b for b in blocks if len(b)]
        if not blocks:
            return None
        if len(blocks) == 1:
            b = blocks[0]
            return b.rows, b.quals, b.values
        return (np.concatenate([b.rows for b in blocks]),
                np.concatenate([b.quals for b in blocks]),
                np.concatenate([b.values for b in blocks]))

    def _join(self, blocks_at, blocks_b, semiring_name, cap):
        stats = self.stats
        at = self._flatten(blocks_at)
        bb = self._flatten(blocks_b)
        if at is None or bb is None:
            return
        ar, aq, av = at
        br, bq, bv = bb
        stats.entries_read_a = len(ar)
        stats.entries_read_b = len(br)

        a_starts = _group_starts(ar)
        b_starts = _group_starts(br)
        a_ends = np.append(a_starts[1:], len(ar))
        b_ends = np.append(b_starts[1:], len(br))
        common, ia, ib = np.intersect1d(ar[a_starts], br[b_starts],
                                        return_indices=True)
        stats.rows_aligned = len(common)

        multiply = semiring_name == "plus_times"
        pend_r: list[np.ndarray] = []
        pend_q: list[np.ndarray] = []
        pend_v: list[np.ndarray] = []
        pending = 0
        for g in range(len(common)):
            a0, a1 = int(a_starts[ia[g]]), int(a_ends[ia[g]])
            b0, b1 = int(b_starts[ib[g]]), int(b_ends[ib[g]])
            p = a1 - a0
            if p > cap:
                raise RowBufferExceeded(
                    f"row {common[g]!r} exceeds the {cap}-entry buffer cap")
            _check_group_overflow(av[a0:a1], bv[b0:b1], multiply)
            row_q = aq[a0:a1]
            row_v = av[a0:a1]
            step = max(1, BATCH_TARGET // max(p, 1))
            for c0 in range(b0, b1, step):
                c1 = min(c0 + step, b1)
                q = c1 - c0
                pend_r.append(np.repeat(row_q, q))
                pend_q.append(np.tile(bq[c0:c1], p))
                if multiply:
                    pend_v.append(np.multiply.outer(row_v, bv[c0:c1]).ravel())
                else:
                    pend_v.append(np.add.outer(row_v, bv[c0:c1]).ravel())
                pending += p * q
                stats.partial_products += p * q
                if pending >= BATCH_TARGET:
                    yield _drain(pend_r, pend_q, pend_v)
                    pend_r, pend_q, pend_v = [], [], []
                    pending = 0
        if pending:
            yield _drain(pend_r, pend_q, pend_v)


def _group_starts(rows: np.ndarray) -> np.ndarray:
    if len(rows) == 0:
        return np.empty(0, dtype=np.intp)
    change = np.ones(len(rows), dtype=bool)
    change[1:] = rows[1:] != rows[:-1]
    return np.flatnonzero(change)


def _check_group_overflow(a_vals: np.ndarray, b_vals: np.ndarray, multiply: bool) -> None:
    # Every (a, b) pair in the group is a real product, so the max pair is an
    # exact witness: if it fits in u64, all do.
    max_a = int(a_vals.max())
    max_b = int(b_vals.max())
    if multiply:
        if max_a * max_b > U64_MAX:
            raise MultiplyOverflow(f"{max_a} * {max_b} exceeds the u64 range")
    elif max_a + max_b > U64_MAX:
        raise MultiplyOverflow(f"{max_a} (+) {max_b} exceeds the u64 range")


def _drain(rs, qs, vs) -> ProductBatch:
    if len(rs) == 1:
        return ProductBatch(rs[0], qs[0], vs[0])
    return ProductBatch(np.concatenate(rs), np.concatenate(qs),
                        np.concatenate(vs))


def join_blocks(blocks_at: Sequence[ColumnarRun], blocks_b: Sequence[ColumnarRun],
                semiring_name: str,
                row_buffer_cap: int = DEFAULT_ROW_BUFFER_CAP) -> BatchStream:
    return BatchStream(blocks_at, blocks_b, semiring_name, row_buffer_cap)


def remote_write(registry: TableRegistry, products: Iterable[PartialProduct],
                 target: str, chunk: int = 8192) -> int:
    """Route partial products into the target's tablets; summation stays lazy."""
    table = registry.get(target)
    written = 0
    batch: list[Entry] = []
    for pp in products:
        batch.append(Entry(Key(pp.row, b"", pp.qualifier), pp.value))
        if len(batch) >= chunk:
            written += table.write(batch)
            batch = []
    if batch:
        written += table.write(batch)
    return written


def remote_write_batches(registry: TableRegistry, batches: Iterable[ProductBatch],
                         target: str) -> int:
    table = registry.get(target)
    written = 0
    for b in batches:
        written += table.write_columnar(b.rows, b.quals, b.values)
    return written

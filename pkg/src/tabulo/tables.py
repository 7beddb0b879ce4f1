"""The miniature tablet store.

A table is a named, split-partitioned, key-sorted collection of entries.
Each tablet owns a half-open row range [lower, upper); an entry whose row
equals a split point belongs to the higher tablet. Tablets hold immutable
sorted runs plus a mutable write buffer; nothing is combined on the write
path. Duplicate keys are resolved lazily, at scan and compaction time, by
the table's combiner (or by keep-newest when there is none), which is the
lazy summation model this store exists to reproduce.

Concurrency: the registry dict and each tablet are individually locked.
Distinct tablets accept writes and serve scans independently; a scan takes a
per-tablet snapshot at the moment it first touches that tablet.
"""

from __future__ import annotations

import heapq
import threading
from bisect import bisect_left, bisect_right
from dataclasses import dataclass
from typing import Callable, Iterable, Iterator, Optional, Sequence

import numpy as np

from . import columnar
from .columnar import ColumnarRun
from .errors import (AddOverflow, DuplicateTableName, EmptyTable, UnknownTable,
                     UnsortedSplits)
from .keys import U64_MAX, Entry, Key, validate_entry

DEFAULT_FLUSH_THRESHOLD = 1 << 16


def u64_add(a: int, b: int) -> int:
    s = a + b
    if s > U64_MAX:
        raise AddOverflow(f"{a} + {b} exceeds the u64 range")
    return s


@dataclass(frozen=True)
class CombinerSpec:
    """An associative-commutative reducer applied to values sharing a key.

    ufunc, when present, is the vectorized equivalent used on columnar runs;
    needs_guard marks reducers that can leave the u64 range (addition).
    """
    reducer: Callable[[int, int], int]
    name: str = "custom"
    ufunc: Optional[np.ufunc] = None
    needs_guard: bool = False


SUM_COMBINER = CombinerSpec(u64_add, "sum", np.add, needs_guard=True)
MIN_COMBINER = CombinerSpec(min, "min", np.minimum)


def _validate_splits(splits: Sequence[bytes]) -> list[bytes]:
    out = list(splits)
    for s in out:
        if not isinstance(s, bytes):
            raise TypeError("split points must be bytes")
    if any(out[i] >= out[i + 1] for i in range(len(out) - 1)):
        raise UnsortedSplits(f"splits not strictly ascending: {out!r}")
    return out


class Tablet:
    """One row-range partition: sorted runs plus a write buffer."""

    __slots__ = ("lower", "upper", "runs", "buffer", "lock")

    def __init__(self, lower: Optional[bytes], upper: Optional[bytes]):
        self.lower = lower
        self.upper = upper
        self.runs: list = []      # ColumnarRun | list[Entry] (key-sorted)
        self.buffer: list[Entry] = []
        self.lock = threading.Lock()

    def snapshot(self) -> tuple[tuple, list[Entry]]:
        with self.lock:
            return tuple(self.runs), list(self.buffer)

    def raw_count(self) -> int:
        with self.lock:
            return sum(len(r) for r in self.runs) + len(self.buffer)


def _run_entries(run, lower: Optional[bytes], upper: Optional[bytes]) -> Iterator[Entry]:
    """Iterate one run restricted to rows in [lower, upper)."""
    if isinstance(run, ColumnarRun):
        if lower is not None or upper is not None:
            run = run.slice_rows(lower, upper)
        yield from run.entries()
        return
    lo = 0 if lower is None else bisect_left(run, Key(lower, b"", b""), key=lambda e: e.key)
    hi = len(run) if upper is None else bisect_left(run, Key(upper, b"", b""), key=lambda e: e.key)
    yield from run[lo:hi]


def _merge_fold(sources: list[Iterator[Entry]],
                reducer: Optional[Callable[[int, int], int]]) -> Iterator[Entry]:
    """Merge sorted entry streams and resolve duplicate keys.

    heapq.merge is stable, so for equal keys the entry from the later source
    (newer run, then buffer) comes out last; keep-newest falls out of that
    when no reducer is installed.
    """
    merged = heapq.merge(*sources, key=lambda e: e.key) if len(sources) > 1 else sources[0]
    try:
        current = next(merged)
    except StopIteration:
        return
    key, value = current.key, current.value
    for e in merged:
        if e.key == key:
            value = reducer(value, e.value) if reducer else e.value
        else:
            yield Entry(key, value)
            key, value = e.key, e.value
    yield Entry(key, value)


class Table:
    def __init__(self, name: str, splits: Sequence[bytes],
                 combiner: Optional[CombinerSpec],
                 flush_threshold: int = DEFAULT_FLUSH_THRESHOLD):
        self.name = name
        self.combiner = combiner
        self.flush_threshold = flush_threshold
        self.lock = threading.RLock()  # guards splits/tablets structure
        self.splits: list[bytes] = []
        self.tablets: list[Tablet] = []
        self._install_tablets(_validate_splits(splits))

    def _install_tablets(self, splits: list[bytes]) -> None:
        bounds = [None] + splits + [None]
        self.splits = splits
        self.tablets = [Tablet(bounds[i], bounds[i + 1]) for i in range(len(bounds) - 1)]

    # -- write path ---------------------------------------------------------

    def _tablet_for_row(self, row: bytes) -> Tablet:
        return self.tablets[bisect_right(self.splits, row)]

    def write(self, entries: Iterable[Entry]) -> int:
        accepted = 0
        with self.lock:
            splits, tablets = self.splits, self.tablets
        pending: dict[int, list[Entry]] = {}
        for e in entries:
            validate_entry(e)
            idx = bisect_right(splits, e.key.row)
            pending.setdefault(idx, []).append(e)
            accepted += 1
            if accepted % 8192 == 0:
                self._deliver(tablets, pending)
                pending = {}
        self._deliver(tablets, pending)
        return accepted

    def _deliver(self, tablets: list[Tablet], pending: dict[int, list[Entry]]) -> None:
        for idx, batch in pending.items():
            t = tablets[idx]
            with t.lock:
                t.buffer.extend(batch)
                if len(t.buffer) >= self.flush_threshold:
                    t.buffer.sort(key=lambda e: e.key)
                    t.runs.append(t.buffer)
                    t.buffer = []

    def write_columnar(self, rows: np.ndarray, quals: np.ndarray,
                       values: np.ndarray) -> int:
        """Append a columnar batch, routed and key-sorted per tablet.

        Internal trusted path: rows/qualifiers must be NUL-safe byte strings
        (no trailing 0x00) and values nonzero u64; families and visibilities
        are implied empty, timestamps zero.
        """
        if not (len(rows) == len(quals) == len(values)):
            raise ValueError("columnar batch arrays must have equal length")
        if len(rows) == 0:
            return 0
        values = np.ascontiguousarray(values, dtype=np.uint64)
        if bool((values == 0).any()):
            from .errors import ZeroValueEntry
            raise ZeroValueEntry("columnar batch carries a zero value")
        if bool((rows == b"").any()):
            raise ValueError("columnar batch carries an empty row")
        with self.lock:
            splits, tablets = self.splits, self.tablets
        if not splits:
            run = columnar.sort_batch(rows, quals, values)
            t = tablets[0]
            with t.lock:
                t.runs.append(run)
            return len(rows)
        idx = columnar.route_to_tablets(splits, rows)
        for ti in np.unique(idx):
            mask = idx == ti
            run = columnar.sort_batch(rows[mask], quals[mask], values[mask])
            t = tablets[int(ti)]
            with t.lock:
                t.runs.append(run)
        return len(rows)

    # -- read path ----------------------------------------------------------

    def scan(self, row_range: Optional[tuple[Optional[bytes], Optional[bytes]]] = None
             ) -> Iterator[Entry]:
        lower, upper = row_range if row_range else (None, None)
        reducer = self.combiner.reducer if self.combiner else None
        with self.lock:
            tablets = list(self.tablets)
        for t in tablets:
            lo = _max_bound(lower, t.lower)
            hi = _min_bound(upper, t.upper)
            if lo is not None and hi is not None and lo >= hi:
                continue
            runs, buffer = t.snapshot()
            if len(runs) == 1 and not buffer and isinstance(runs[0], ColumnarRun) \
                    and runs[0].combined:
                yield from _run_entries(runs[0], lo, hi)
                continue
            sources = [_run_entries(r, lo, hi) for r in runs]
            if buffer:
                buffer.sort(key=lambda e: e.key)
                sources.append(_run_entries(buffer, lo, hi))
            if sources:
                yield from _merge_fold(sources, reducer)

    def scan_blocks(self, row_range: Optional[tuple[Optional[bytes], Optional[bytes]]] = None
                    ) -> Optional[list[ColumnarRun]]:
        """Zero-copy combined blocks, or None when any tablet is not compacted."""
        lower, upper = row_range if row_range else (None, None)
        out = []
        with self.lock:
            tablets = list(self.tablets)
        for t in tablets:
            lo = _max_bound(lower, t.lower)
            hi = _min_bound(upper, t.upper)
            if lo is not None and hi is not None and lo >= hi:
                continue
            runs, buffer = t.snapshot()
            if buffer:
                return None
            if not runs:
                continue
            if len(runs) != 1 or not isinstance(runs[0], ColumnarRun) or not runs[0].combined:
                return None
            block = runs[0].slice_rows(lo, hi)
            if len(block):
                out.append(block)
        return out

    # -- maintenance --------------------------------------------------------

    def compact(self) -> None:
        with self.lock:
            tablets = list(self.tablets)
        for t in tablets:
            self._compact_tablet(t)

    def _compact_tablet(self, t: Tablet) -> None:
        reducer = self.combiner.reducer if self.combiner else None
        with t.lock:
            if not t.runs and not t.buffer:
                return
            all_columnar = all(isinstance(r, ColumnarRun) for r in t.runs)
            if all_columnar and not t.buffer and self.combiner is not None \
                    and self.combiner.ufunc is not None:
                merged = columnar.merge_combine(t.runs, self.combiner.ufunc,
                                                self.combiner.reducer,
                                                self.combiner.needs_guard)
                t.runs = [merged] if len(merged) else []
                return
            sources = [_run_entries(r, None, None) for r in t.runs]
            if t.buffer:
                t.buffer.sort(key=lambda e: e.key)
                sources.append(iter(t.buffer))
            entries = list(_merge_fold(sources, reducer))
            t.buffer = []
            if not entries:
                t.runs = []
                return
            run = columnar.from_entries(entries)
            t.runs = [run if run is not None else entries]

    def apply_splits(self, splits: Sequence[bytes]) -> None:
        new_splits = _validate_splits(splits)
        with self.lock:
            old = self.tablets
            moving: list[tuple[tuple, list[Entry]]] = []
            for t in old:
                with t.lock:
                    moving.append((tuple(t.runs), list(t.buffer)))
                    t.runs, t.buffer = [], []
            self._install_tablets(new_splits)
            bounds = [None] + new_splits + [None]
            for runs, buffer in moving:
                for run in runs:
                    self._redistribute_run(run, bounds)
                if buffer:
                    for idx, batch in _group_by_tablet(buffer, new_splits).items():
                        self.tablets[idx].buffer.extend(batch)
            for t in self.tablets:
                if len(t.buffer) >= self.flush_threshold:
                    t.buffer.sort(key=lambda e: e.key)
                    t.runs.append(t.buffer)
                    t.buffer = []

    def _redistribute_run(self, run, bounds: list[Optional[bytes]]) -> None:
        for i, t in enumerate(self.tablets):
            piece = list(_run_entries(run, bounds[i], bounds[i + 1])) \
                if not isinstance(run, ColumnarRun) else run.slice_rows(bounds[i], bounds[i + 1])
            if len(piece):
                t.runs.append(piece)

    def compute_optimal_splits(self, num_tablets: int) -> list[bytes]:
        if num_tablets < 1:
            raise ValueError("num_tablets must be >= 1")
        rows = [e.key.row for e in self.scan()]
        total = len(rows)
        if total == 0:
            raise EmptyTable(f"cannot compute splits for empty table {self.name!r}")
        out: list[bytes] = []
        for j in range(1, num_tablets):
            rank = -(-j * total // num_tablets)  # ceil(j * total / T), 1-based
            row = rows[rank - 1]
            if not out or row > out[-1]:
                out.append(row)
        return out

    def raw_count(self) -> int:
        with self.lock:
            tablets = list(self.tablets)
        return sum(t.raw_count() for t in tablets)


def _max_bound(a: Optional[bytes], b: Optional[bytes]) -> Optional[bytes]:
    if a is None:
        return b
    if b is None:
        return a
    return max(a, b)


def _min_bound(a: Optional[bytes], b: Optional[bytes]) -> Optional[bytes]:
    if a is None:
        return b
    if b is None:
        return a
    return min(a, b)


def _group_by_tablet(entries: Iterable[Entry], splits: list[bytes]) -> dict[int, list[Entry]]:
    grouped: dict[int, list[Entry]] = {}
    for e in entries:
        grouped.setdefault(bisect_right(splits, e.key.row), []).append(e)
    return grouped


class TableRegistry:
    """Name -> Table map; the front door for every table operation."""

    def __init__(self):
        self._tables: dict[str, Table] = {}
        self._lock = threading.RLock()

    def create_table(self, name: str, splits: Sequence[bytes] = (),
                     combiner: Optional[CombinerSpec] = None,
                     flush_threshold: int = DEFAULT_FLUSH_THRESHOLD) -> Table:
        table = Table(name, splits, combiner, flush_threshold)
        with self._lock:
            if name in self._tables:
                raise DuplicateTableName(name)
            self._tables[name] = table
        return table

    def drop_table(self, name: str) -> None:
        with self._lock:
            if name not in self._tables:
                raise UnknownTable(name)
            del self._tables[name]

    def get(self, name: str) -> Table:
        with self._lock:
            try:
                return self._tables[name]
            except KeyError:
                raise UnknownTable(name) from None

    def exists(self, name: str) -> bool:
        with self._lock:
            return name in self._tables

    def names(self) -> list[str]:
        with self._lock:
            return sorted(self._tables)

    def write(self, name: str, entries: Iterable[Entry]) -> int:
        return self.get(name).write(entries)

    def write_columnar(self, name: str, rows, quals, values) -> int:
        return self.get(name).write_columnar(rows, quals, values)

    def scan(self, name: str, row_range=None) -> Iterator[Entry]:
        return self.get(name).scan(row_range)

    def scan_blocks(self, name: str, row_range=None):
        return self.get(name).scan_blocks(row_range)

    def compact(self, name: str) -> None:
        self.get(name).compact()

    def apply_splits(self, name: str, splits: Sequence[bytes]) -> None:
        self.get(name).apply_splits(splits)

    def compute_optimal_splits(self, name: str, num_tablets: int) -> list[bytes]:
        return self.get(name).compute_optimal_splits(num_tablets)

    def raw_count(self, name: str) -> int:
        return self.get(name).raw_count()

"""Columnar entry runs: numpy-backed storage for the hot paths.

A ColumnarRun holds one key-sorted block of entries as three parallel arrays
(row, qualifier, value) with column family and visibility implied empty and
timestamp implied zero. numpy's fixed-width 'S' dtype compares by raw bytes,
which matches Python bytes ordering, with one trap: trailing NUL bytes are
stripped when elements are extracted. Eligibility therefore excludes any
field ending in 0x00; everything else (interior NULs, mixed lengths) is fine.

All heavy operations here (sort, merge, group-reduce, slicing) run inside
numpy and release the GIL, which is what lets multiply pipelines scale across
threads.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Iterable, Iterator, Optional, Sequence

import numpy as np

from .errors import AddOverflow
from .keys import U64_MAX, Entry, Key

# Exact guard threshold for the float64 shadow sum: anything below this cannot
# have wrapped uint64 arithmetic, with orders of magnitude of margin for
# float rounding across billions of terms.
_GUARD = float(1 << 62)


@dataclass
class ColumnarRun:
    rows: np.ndarray
    quals: np.ndarray
    values: np.ndarray
    combined: bool = False  # True once duplicate keys are impossible

    def __len__(self) -> int:
        return len(self.rows)

    def entries(self) -> Iterator[Entry]:
        for row, qual, value in zip(self.rows.tolist(), self.quals.tolist(),
                                    self.values.tolist()):
            yield Entry(Key(row, b"", qual), value)

    def slice_rows(self, lower: Optional[bytes], upper: Optional[bytes]) -> "ColumnarRun":
        """View of the entries whose row falls in [lower, upper)."""
        lo = 0 if lower is None else searchsorted_bytes(self.rows, lower, "left")
        hi = len(self.rows) if upper is None else searchsorted_bytes(self.rows, upper, "left")
        return ColumnarRun(self.rows[lo:hi], self.quals[lo:hi], self.values[lo:hi],
                           self.combined)


def bytes_col(values: Sequence[bytes], width: int = 1) -> np.ndarray:
    """Build an S-dtype column wide enough for the given byte strings."""
    if len(values) == 0:
        return np.empty(0, dtype=f"S{max(width, 1)}")
    return np.asarray(values, dtype=f"S{max(width, 1, max(len(v) for v in values))}")


def searchsorted_bytes(arr: np.ndarray, needle: bytes, side: str) -> int:
    """searchsorted that never truncates a needle wider than the array dtype."""
    if len(arr) == 0:
        return 0
    if len(needle) > arr.dtype.itemsize:
        needle_arr = np.asarray([needle], dtype=f"S{len(needle)}")
        return int(np.searchsorted(arr, needle_arr, side=side)[0])
    return int(np.searchsorted(arr, needle, side=side))


def eligible_field(field: bytes) -> bool:
    return not field.endswith(b"\x00")


def from_entries(entries: Sequence[Entry]) -> Optional[ColumnarRun]:
    """Convert key-sorted entries to a run, or None when not representable.

    Representable means: empty family and visibility, zero timestamp, and no
    row or qualifier ending in a NUL byte (see module docstring).
    """
    rows = []
    quals = []
    values = []
    for e in entries:
        k = e.key
        if k.family != b"" or k.visibility != b"" or k.timestamp != 0:
            return None
        if k.row.endswith(b"\x00") or k.qualifier.endswith(b"\x00"):
            return None
        rows.append(k.row)
        quals.append(k.qualifier)
        values.append(e.value)
    return ColumnarRun(bytes_col(rows), bytes_col(quals),
                       np.asarray(values, dtype=np.uint64), combined=True)


def sort_batch(rows: np.ndarray, quals: np.ndarray, values: np.ndarray) -> ColumnarRun:
    """Key-sort an unsorted batch into a run (duplicates retained)."""
    order = np.lexsort((quals, rows))
    return ColumnarRun(rows[order], quals[order], values[order], combined=False)


def _concat(runs: Sequence[ColumnarRun]) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    rows = np.concatenate([r.rows for r in runs])
    quals = np.concatenate([r.quals for r in runs])
    values = np.concatenate([r.values for r in runs])
    return rows, quals, values


def merge_combine(runs: Sequence[ColumnarRun], reduce_ufunc: np.ufunc,
                  reducer, needs_guard: bool) -> ColumnarRun:
    """Merge runs into one combined run, reducing duplicate keys.

    reduce_ufunc must agree with the scalar reducer; the scalar form is used
    to recheck any group whose float64 shadow says a sum may have left the
    u64 range (only possible for additive reducers, hence needs_guard).
    """
    if not runs:
        return ColumnarRun(np.empty(0, "S1"), np.empty(0, "S1"),
                           np.empty(0, np.uint64), combined=True)
    rows, quals, values = _concat(runs)
    if len(rows) == 0:
        return ColumnarRun(rows, quals, values, combined=True)
    order = np.lexsort((quals, rows))
    rows, quals, values = rows[order], quals[order], values[order]
    change = np.ones(len(rows), dtype=bool)
    if len(rows) > 1:
        change[1:] = (rows[1:] != rows[:-1]) | (quals[1:] != quals[:-1])
    starts = np.flatnonzero(change)
    if len(starts) == len(rows):
        return ColumnarRun(rows, quals, values, combined=True)
    with np.errstate(over="ignore"):
        reduced = reduce_ufunc.reduceat(values, starts)
    if needs_guard:
        shadow = np.add.reduceat(values.astype(np.float64), starts)
        suspect = np.flatnonzero(shadow >= _GUARD)
        if len(suspect):
            ends = np.append(starts[1:], len(values))
            vals_list = values.tolist()
            for g in suspect:
                total = 0
                for v in vals_list[starts[g]:ends[g]]:
                    total = reducer(total, v) if total else v
                if total > U64_MAX:
                    raise AddOverflow("combined value left the u64 range")
                reduced[g] = total
    return ColumnarRun(rows[starts], quals[starts], reduced, combined=True)


def route_to_tablets(splits: Sequence[bytes], rows: np.ndarray) -> np.ndarray:
    """Tablet index per row, honoring half-open ranges (row == split goes up)."""
    if not splits:
        return np.zeros(len(rows), dtype=np.intp)
    width = max(max(len(s) for s in splits), rows.dtype.itemsize)
    split_arr = np.asarray(list(splits), dtype=f"S{width}")
    return np.searchsorted(split_arr, rows, side="right")

"""Key and Entry: the universal datum of the tablet store.

A key is the 5-tuple (row, column family, column qualifier, visibility,
timestamp). Tuple comparison gives the lexicographic total order over the
fields in that order. Visibility is carried but always empty here, and
timestamp is carried but always zero; both still participate in ordering
so the on-disk shape matches the full key format.
"""

from __future__ import annotations

from typing import NamedTuple

U64_MAX = (1 << 64) - 1


class Key(NamedTuple):
    row: bytes
    family: bytes
    qualifier: bytes
    visibility: bytes = b""
    timestamp: int = 0


class Entry(NamedTuple):
    key: Key
    value: int


def entry(row: bytes, qualifier: bytes, value: int, family: bytes = b"") -> Entry:
    """Convenience constructor for the common (row, qualifier, value) case."""
    return Entry(Key(row, family, qualifier), value)


def validate_entry(e: Entry) -> None:
    """Reject entries that violate the store's invariants.

    Raises ZeroValueEntry for value 0, ValueError for anything else out of
    contract (empty row, non-bytes fields, value outside u64, non-default
    visibility or timestamp).
    """
    from .errors import ZeroValueEntry

    k = e.key
    if not isinstance(k.row, bytes) or not isinstance(k.family, bytes) \
            or not isinstance(k.qualifier, bytes) or not isinstance(k.visibility, bytes):
        raise TypeError("key fields must be bytes")
    if not k.row:
        raise ValueError("entry row must be non-empty")
    if k.visibility != b"" or k.timestamp != 0:
        raise ValueError("visibility must be empty and timestamp 0 in this store")
    if not isinstance(e.value, int):
        raise TypeError("entry value must be an int")
    if e.value == 0:
        raise ZeroValueEntry(f"zero value for key {k!r}")
    if not 0 < e.value <= U64_MAX:
        raise ValueError(f"entry value {e.value} outside unsigned 64-bit range")

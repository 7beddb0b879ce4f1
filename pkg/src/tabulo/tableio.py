"""Dump and ingest: the line-oriented persistence format.

One entry per line: row, column family, column qualifier, value separated by
tabs, newline terminated, key-sorted. Tabs, newlines and backslashes inside
fields are escaped as \\t, \\n and \\\\. A persisted table is a directory of
one such file per tablet (tablet-00000.tsv, ...) next to a `splits` file
carrying one escaped split row per line.
"""

from __future__ import annotations

import os
from pathlib import Path
from typing import Iterable, Iterator, Optional

from .errors import UnknownTable
from .keys import Entry, Key
from .tables import CombinerSpec, TableRegistry

_ESCAPES = {0x5C: b"\\\\", 0x09: b"\\t", 0x0A: b"\\n"}
_UNESCAPES = {b"\\"[0]: b"\\", b"t"[0]: b"\t", b"n"[0]: b"\n"}


def escape_field(field: bytes) -> bytes:
    if not any(b in (0x5C, 0x09, 0x0A) for b in field):
        return field
    return b"".join(_ESCAPES.get(b, bytes((b,))) for b in field)


def unescape_field(field: bytes) -> bytes:
    if b"\\" not in field:
        return field
    out = bytearray()
    i = 0
    while i < len(field):
        b = field[i]
        if b == 0x5C:
            if i + 1 >= len(field):
                raise ValueError("dangling escape at end of field")
            try:
                out += _UNESCAPES[field[i + 1]]
            except KeyError:
                raise ValueError(f"unknown escape \\{chr(field[i + 1])}") from None
            i += 2
        else:
            out.append(b)
            i += 1
    return bytes(out)


def format_line(e: Entry) -> bytes:
    k = e.key
    return b"\t".join((escape_field(k.row), escape_field(k.family),
                       escape_field(k.qualifier), b"%d" % e.value)) + b"\n"


def parse_line(line: bytes) -> Entry:
    parts = line.rstrip(b"\n").split(b"\t")
    if len(parts) != 4:
        raise ValueError(f"expected 4 tab-separated fields, got {len(parts)}")
    row, family, qualifier, value = parts
    return Entry(Key(unescape_field(row), unescape_field(family),
                     unescape_field(qualifier)), int(value))


def dump_lines(registry: TableRegistry, name: str,
               row_range=None) -> Iterator[bytes]:
    """Key-sorted, fully combined lines for a table (or a row range of it)."""
    for e in registry.scan(name, row_range):
        yield format_line(e)


def ingest_lines(registry: TableRegistry, name: str,
                 lines: Iterable[bytes]) -> int:
    return registry.write(name, (parse_line(ln) for ln in lines if ln.strip()))


def _tablet_path(directory: Path, index: int) -> Path:
    return directory / f"tablet-{index:05d}.tsv"


def save_table(registry: TableRegistry, name: str, directory) -> None:
    """Persist as a table directory; written atomically via a sibling temp dir."""
    directory = Path(directory)
    table = registry.get(name)
    tmp = directory.with_name(directory.name + ".tmp")
    if tmp.exists():
        _remove_dir(tmp)
    tmp.mkdir(parents=True)
    try:
        with table.lock:
            splits = list(table.splits)
            bounds = [None] + splits + [None]
        with open(tmp / "splits", "wb") as fh:
            for s in splits:
                fh.write(escape_field(s) + b"\n")
        for i in range(len(bounds) - 1):
            with open(_tablet_path(tmp, i), "wb") as fh:
                for e in registry.scan(name, (bounds[i], bounds[i + 1])):
                    fh.write(format_line(e))
        if directory.exists():
            _remove_dir(directory)
        os.replace(tmp, directory)
    except BaseException:
        _remove_dir(tmp)
        raise


def load_table(registry: TableRegistry, name: str, directory,
               combiner: Optional[CombinerSpec] = None) -> int:
    """Create the table from a directory; returns the entry count loaded."""
    directory = Path(directory)
    splits_file = directory / "splits"
    if not directory.is_dir() or not splits_file.exists():
        raise UnknownTable(f"no table directory at {directory}")
    with open(splits_file, "rb") as fh:
        splits = [unescape_field(ln.rstrip(b"\n")) for ln in fh if ln.rstrip(b"\n")]
    registry.create_table(name, splits, combiner)
    count = 0
    for path in sorted(directory.glob("tablet-*.tsv")):
        with open(path, "rb") as fh:
            count += ingest_lines(registry, name, fh)
    return count


def _remove_dir(path: Path) -> None:
    import shutil
    shutil.rmtree(path, ignore_errors=True)

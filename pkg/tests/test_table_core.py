"""Tablet store behavior: creation, writes, scans, compaction, splits."""

import random
import threading
from collections import Counter

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from tabulo import (SUM_COMBINER, CombinerSpec, Entry, Key, TableRegistry,
                    entry, errors)

import oracles


def rows_bytes(draw_min=1):
    return st.binary(min_size=draw_min, max_size=6)


def test_create_no_splits_one_tablet(reg):
    table = reg.create_table("C", [], SUM_COMBINER)
    assert len(table.tablets) == 1


def test_create_one_split_two_tablets(reg):
    table = reg.create_table("C", [b"000512"], SUM_COMBINER)
    assert len(table.tablets) == 2
    assert table.splits == [b"000512"]


def test_create_unsorted_splits_rejected(reg):
    with pytest.raises(errors.UnsortedSplits):
        reg.create_table("C", [b"b", b"a"], SUM_COMBINER)
    with pytest.raises(errors.UnsortedSplits):
        reg.create_table("C2", [b"a", b"a"], SUM_COMBINER)


def test_create_duplicate_name_rejected(reg):
    reg.create_table("T")
    with pytest.raises(errors.DuplicateTableName):
        reg.create_table("T")


def test_write_three_distinct_keys(reg):
    reg.create_table("T", combiner=SUM_COMBINER)
    n = reg.write("T", [entry(b"a", b"1", 1), entry(b"b", b"2", 2),
                        entry(b"c", b"3", 3)])
    assert n == 3
    assert len(list(reg.scan("T"))) == 3


def test_write_duplicate_key_combines_on_scan(reg):
    reg.create_table("T", combiner=SUM_COMBINER)
    reg.write("T", [entry(b"k", b"q", 2), entry(b"k", b"q", 3)])
    assert oracles.scan_triples(reg, "T") == [(b"k", b"q", 5)]


def test_write_zero_value_rejected(reg):
    reg.create_table("T", combiner=SUM_COMBINER)
    with pytest.raises(errors.ZeroValueEntry):
        reg.write("T", [entry(b"k", b"q", 0)])


def test_write_unknown_table(reg):
    with pytest.raises(errors.UnknownTable):
        reg.write("missing", [entry(b"k", b"q", 1)])


def test_write_empty_row_rejected(reg):
    reg.create_table("T")
    with pytest.raises(ValueError):
        reg.write("T", [entry(b"", b"q", 1)])


def test_write_nondefault_visibility_or_timestamp_rejected(reg):
    reg.create_table("T")
    with pytest.raises(ValueError):
        reg.write("T", [Entry(Key(b"r", b"", b"q", b"vis"), 1)])
    with pytest.raises(ValueError):
        reg.write("T", [Entry(Key(b"r", b"", b"q", b"", 9), 1)])


def test_scan_empty_table(reg):
    reg.create_table("T")
    assert list(reg.scan("T")) == []


def test_scan_unknown_table(reg):
    with pytest.raises(errors.UnknownTable):
        list(reg.scan("missing"))


def test_scan_range_matches_filtered_full_scan(reg):
    reg.create_table("T", [b"m"], SUM_COMBINER)
    rnd = random.Random(5)
    entries = [entry(bytes([rnd.randrange(97, 123)]) * rnd.randint(1, 3),
                     b"q%d" % i, rnd.randint(1, 9)) for i in range(200)]
    reg.write("T", entries)
    full = oracles.scan_triples(reg, "T")
    got = [(e.key.row, e.key.qualifier, e.value) for e in reg.scan("T", (None, b"m"))]
    assert got == [t for t in full if t[0] < b"m"]
    got_hi = [(e.key.row, e.key.qualifier, e.value) for e in reg.scan("T", (b"m", None))]
    assert got_hi == [t for t in full if t[0] >= b"m"]


def test_row_on_split_goes_to_higher_tablet(reg):
    table = reg.create_table("T", [b"m"], SUM_COMBINER)
    reg.write("T", [entry(b"m", b"q", 1)])
    assert table.tablets[0].raw_count() == 0
    assert table.tablets[1].raw_count() == 1


def test_compact_empty_noop(reg):
    reg.create_table("T", [b"x"], SUM_COMBINER)
    reg.compact("T")
    assert list(reg.scan("T")) == []


def test_compact_preserves_scan_and_single_run(reg):
    reg.create_table("T", [b"g", b"p"], SUM_COMBINER, flush_threshold=64)
    rnd = random.Random(11)
    entries = [entry(b"%02d" % rnd.randrange(30), b"%03d" % rnd.randrange(50),
                     rnd.randint(1, 5)) for _ in range(10_000)]
    reg.write("T", entries)
    before = oracles.scan_triples(reg, "T")
    reg.compact("T")
    after = oracles.scan_triples(reg, "T")
    assert before == after
    table = reg.get("T")
    assert all(len(t.runs) <= 1 and not t.buffer for t in table.tablets)
    # conservation: sum of scanned values equals sum of written values
    assert sum(v for _, _, v in after) == sum(e.value for e in entries)


def test_apply_splits_content_invariant(reg):
    reg.create_table("T", combiner=SUM_COMBINER)
    rnd = random.Random(3)
    reg.write("T", [entry(b"%03d" % rnd.randrange(100), b"q%d" % i, 1 + i % 7)
                    for i in range(500)])
    before = oracles.scan_triples(reg, "T")
    reg.apply_splits("T", [b"020", b"045", b"090"])
    assert oracles.scan_triples(reg, "T") == before
    assert len(reg.get("T").tablets) == 4
    reg.apply_splits("T", [])
    assert oracles.scan_triples(reg, "T") == before
    assert len(reg.get("T").tablets) == 1


def test_apply_splits_both_sides_nonempty(reg):
    reg.create_table("T", combiner=SUM_COMBINER)
    reg.write("T", [entry(b"a", b"1", 1), entry(b"z", b"1", 1)])
    reg.apply_splits("T", [b"m"])
    table = reg.get("T")
    lo = sum(1 for _ in reg.scan("T", (None, b"m")))
    hi = sum(1 for _ in reg.scan("T", (b"m", None)))
    assert lo == 1 and hi == 1
    assert len(table.tablets) == 2


def test_apply_splits_unsorted_rejected(reg):
    reg.create_table("T")
    reg.write("T", [entry(b"a", b"1", 1)])
    with pytest.raises(errors.UnsortedSplits):
        reg.apply_splits("T", [b"z", b"a"])


def test_optimal_splits_single_tablet_empty_list(reg):
    reg.create_table("T", combiner=SUM_COMBINER)
    reg.write("T", [entry(b"a", b"1", 1)])
    assert reg.compute_optimal_splits("T", 1) == []


def test_optimal_splits_quantile_ranks(reg):
    reg.create_table("T", combiner=SUM_COMBINER)
    reg.write("T", [entry(b"%03d" % i, b"q", 1) for i in range(100)])
    splits = reg.compute_optimal_splits("T", 4)
    # ranks ceil(j*100/4) = 25, 50, 75 -> the 25th, 50th, 75th entries
    assert splits == [b"024", b"049", b"074"]


def test_optimal_splits_empty_table(reg):
    reg.create_table("T")
    with pytest.raises(errors.EmptyTable):
        reg.compute_optimal_splits("T", 2)


def test_optimal_splits_balance_bound_power_law(reg):
    from tabulo import GraphSpec, generate_graph
    reg.create_table("G", combiner=SUM_COMBINER)
    generate_graph(reg, GraphSpec(8, 16, 21), "G")
    reg.compact("G")
    for tablets in (2, 4, 8):
        splits = reg.compute_optimal_splits("G", tablets)
        reg.apply_splits("G", splits)
        bounds = [None] + splits + [None]
        counts = [sum(1 for _ in reg.scan("G", (bounds[i], bounds[i + 1])))
                  for i in range(len(bounds) - 1)]
        per_row = Counter(e.key.row for e in reg.scan("G"))
        assert max(counts) - min(counts) <= max(per_row.values())
        assert sum(counts) == sum(per_row.values())


def test_scan_reflects_later_writes_on_new_scan(reg):
    reg.create_table("T", combiner=SUM_COMBINER)
    reg.write("T", [entry(b"a", b"1", 1)])
    assert len(list(reg.scan("T"))) == 1
    reg.write("T", [entry(b"b", b"1", 1)])
    assert len(list(reg.scan("T"))) == 2


def test_no_combiner_keeps_newest_value(reg):
    reg.create_table("T", combiner=None, flush_threshold=4)
    reg.write("T", [entry(b"k", b"q", 1)])
    reg.write("T", [entry(b"k", b"q", 2), entry(b"x", b"1", 1),
                    entry(b"x", b"2", 1), entry(b"x", b"3", 1)])  # forces a flush
    reg.write("T", [entry(b"k", b"q", 9)])
    triples = oracles.scan_triples(reg, "T")
    assert (b"k", b"q", 9) in triples
    assert len([t for t in triples if t[0] == b"k"]) == 1
    reg.compact("T")
    assert (b"k", b"q", 9) in oracles.scan_triples(reg, "T")


def test_flush_threshold_rolls_buffer_to_run(reg):
    table = reg.create_table("T", combiner=SUM_COMBINER, flush_threshold=8)
    for lo in range(0, 24, 8):
        reg.write("T", [entry(b"%02d" % i, b"q", 1) for i in range(lo, lo + 8)])
    t = table.tablets[0]
    assert len(t.runs) == 3
    assert not t.buffer
    assert len(oracles.scan_triples(reg, "T")) == 24


def test_drop_table(reg):
    reg.create_table("T")
    reg.drop_table("T")
    assert not reg.exists("T")
    with pytest.raises(errors.UnknownTable):
        reg.drop_table("T")


def test_combiner_reducer_overflow_at_combine_time(reg):
    reg.create_table("T", combiner=SUM_COMBINER)
    big = (1 << 64) - 2
    reg.write("T", [entry(b"k", b"q", big), entry(b"k", b"q", 5)])
    with pytest.raises(errors.AddOverflow):
        list(reg.scan("T"))
    with pytest.raises(errors.AddOverflow):
        reg.compact("T")


@given(st.lists(st.tuples(rows_bytes(), st.binary(max_size=3),
                          st.integers(min_value=1, max_value=1 << 32)),
                max_size=60))
@settings(max_examples=60, deadline=None)
def test_scan_sorted_distinct_and_conserving(rows):
    reg = TableRegistry()
    reg.create_table("T", [b"g"], SUM_COMBINER, flush_threshold=16)
    entries = [entry(r, q, v) for r, q, v in rows]
    reg.write("T", entries)
    triples = oracles.scan_triples(reg, "T")
    keys = [(r, q) for r, q, _ in triples]
    assert keys == sorted(keys)
    assert len(keys) == len(set(keys))
    assert sum(v for *_, v in triples) == sum(e.value for e in entries)
    # compaction transparency and split invariance on the same data
    reg.compact("T")
    assert oracles.scan_triples(reg, "T") == triples
    reg.apply_splits("T", [b"\x40", b"\x80", b"\xc0"])
    assert oracles.scan_triples(reg, "T") == triples


@given(st.integers(min_value=1, max_value=(1 << 64) - 1),
       st.integers(min_value=1, max_value=(1 << 64) - 1),
       st.integers(min_value=1, max_value=(1 << 64) - 1))
@settings(max_examples=100)
def test_default_reducer_associative_commutative(a, b, c):
    from tabulo import u64_add
    cap = (1 << 64) - 1

    def safe(x, y):
        return u64_add(x, y) if x + y <= cap else None

    ab = safe(a, b)
    bc = safe(b, c)
    if ab is not None and bc is not None and a + b + c <= cap:
        assert u64_add(ab, c) == u64_add(a, bc)
    if ab is not None:
        assert ab == u64_add(b, a)


def test_concurrent_writes_and_scans_smoke(reg):
    reg.create_table("T", [b"h"], SUM_COMBINER, flush_threshold=64)
    stop = threading.Event()
    failures = []

    def writer(prefix):
        try:
            for i in range(300):
                reg.write("T", [entry(prefix + b"%03d" % (i % 40), b"q", 1)])
        except Exception as exc:  # pragma: no cover
            failures.append(exc)

    def scanner():
        try:
            while not stop.is_set():
                triples = oracles.scan_triples(reg, "T")
                keys = [(r, q) for r, q, _ in triples]
                assert keys == sorted(keys) and len(keys) == len(set(keys))
        except Exception as exc:  # pragma: no cover
            failures.append(exc)

    threads = [threading.Thread(target=writer, args=(p,)) for p in (b"a", b"z")]
    scan_thread = threading.Thread(target=scanner)
    scan_thread.start()
    for t in threads:
        t.start()
    for t in threads:
        t.join()
    stop.set()
    scan_thread.join()
    assert not failures
    assert sum(v for *_, v in oracles.scan_triples(reg, "T")) == 600

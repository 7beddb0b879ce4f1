"""Command-line front end.

Tables persist as directories under the data dir (TABULO_DATA_DIR or
--data-dir). Subcommands load the tables they need, run in memory, and save
results atomically, so a failed run never leaves a partially written table
behind. Diagnostics and metrics go to stderr; data and reports go to stdout
or to --out files.

Exit codes: 0 success, 1 usage error, 2 runtime error.
"""

from __future__ import annotations

import argparse
import os
import re
import sys
from pathlib import Path

from . import bench, tableio
from .errors import DuplicateTableName, TabuloError, UnknownTable
from .extraction import build_extraction_table, extract_rows, sample_vertices
from .graphgen import GraphSpec, degree_histogram, generate_graph
from .metrics import RunMetrics
from .semiring import MIN_PLUS, PLUS_TIMES, combiner_for
from .tablemult import MultSpec, count_partial_products, table_mult
from .tables import MIN_COMBINER, SUM_COMBINER, TableRegistry

_NAME_RE = re.compile(r"^[A-Za-z0-9_.-]+$")
_COMBINERS = {"sum": SUM_COMBINER, "min": MIN_COMBINER, "none": None}
_SEMIRINGS = {"plus_times": PLUS_TIMES, "min_plus": MIN_PLUS}


def _err(message: str) -> None:
    print(f"error: {message}", file=sys.stderr)


def _data_dir(args) -> Path:
    path = Path(args.data_dir)
    path.mkdir(parents=True, exist_ok=True)
    return path


def _check_name(name: str) -> str:
    if not _NAME_RE.match(name):
        raise ValueError(f"invalid table name {name!r}")
    return name


def _load(registry: TableRegistry, data_dir: Path, name: str, combiner="sum"):
    directory = data_dir / _check_name(name)
    if not directory.is_dir():
        raise UnknownTable(f"table {name!r} not found under {data_dir}")
    tableio.load_table(registry, name, directory, _COMBINERS[combiner])
    registry.compact(name)


def _save(registry: TableRegistry, data_dir: Path, name: str) -> None:
    tableio.save_table(registry, name, data_dir / _check_name(name))


def _require_absent(data_dir: Path, name: str) -> None:
    if (data_dir / _check_name(name)).exists():
        raise DuplicateTableName(f"table {name!r} already exists under {data_dir}")


def _print_metrics(m: RunMetrics, workers: int) -> None:
    print(f"pp={m.partial_products} seconds={m.elapsed_seconds:.6g} "
          f"rate={m.rate:.6g} pp/s workers={workers}", file=sys.stderr)


def _metrics_csv(m: RunMetrics, experiment: str, label: str, rows=None) -> str:
    report = bench.ScalingReport((bench.ReportRow(
        experiment, "manual", m.nodes, label, rows, m.partial_products,
        bench.round_sig(m.elapsed_seconds), bench.round_sig(m.rate), 1.0),))
    return bench.emit_csv(report)


# -- subcommand bodies -------------------------------------------------------

def _cmd_generate(args) -> int:
    data_dir = _data_dir(args)
    _require_absent(data_dir, args.table)
    registry = TableRegistry()
    registry.create_table(args.table, combiner=SUM_COMBINER)
    spec = GraphSpec(args.scale, args.epv, args.seed)
    raw = generate_graph(registry, spec, args.table, shards=args.shards)
    registry.compact(args.table)
    distinct = sum(1 for _ in registry.scan(args.table))
    _save(registry, data_dir, args.table)
    print(f"generated {raw} raw edges ({distinct} distinct entries) "
          f"into {args.table!r}", file=sys.stderr)
    return 0


def _cmd_ingest(args) -> int:
    data_dir = _data_dir(args)
    _require_absent(data_dir, args.table)
    registry = TableRegistry()
    splits = []
    if args.splits_file:
        with open(args.splits_file, "rb") as fh:
            splits = [tableio.unescape_field(ln.rstrip(b"\n"))
                      for ln in fh if ln.rstrip(b"\n")]
    registry.create_table(args.table, splits, _COMBINERS[args.combiner])
    count = tableio.ingest_lines(registry, args.table, sys.stdin.buffer)
    registry.compact(args.table)
    _save(registry, data_dir, args.table)
    print(f"ingested {count} entries into {args.table!r}", file=sys.stderr)
    return 0


def _cmd_dump(args) -> int:
    registry = TableRegistry()
    _load(registry, _data_dir(args), args.table)
    out = sys.stdout.buffer
    for line in tableio.dump_lines(registry, args.table):
        out.write(line)
    out.flush()
    return 0


def _cmd_splits_compute(args) -> int:
    registry = TableRegistry()
    _load(registry, _data_dir(args), args.table)
    out = sys.stdout.buffer
    for s in registry.compute_optimal_splits(args.table, args.tablets):
        out.write(tableio.escape_field(s) + b"\n")
    out.flush()
    return 0


def _cmd_splits_apply(args) -> int:
    data_dir = _data_dir(args)
    registry = TableRegistry()
    _load(registry, data_dir, args.table)
    source = open(args.splits_file, "rb") if args.splits_file else sys.stdin.buffer
    try:
        splits = [tableio.unescape_field(ln.rstrip(b"\n"))
                  for ln in source if ln.rstrip(b"\n")]
    finally:
        if args.splits_file:
            source.close()
    registry.apply_splits(args.table, splits)
    _save(registry, data_dir, args.table)
    print(f"applied {len(splits)} splits to {args.table!r}", file=sys.stderr)
    return 0


def _cmd_compact(args) -> int:
    data_dir = _data_dir(args)
    registry = TableRegistry()
    _load(registry, data_dir, args.table)
    registry.compact(args.table)
    _save(registry, data_dir, args.table)
    return 0


def _cmd_tablemult(args) -> int:
    data_dir = _data_dir(args)
    semiring = _SEMIRINGS[args.semiring]
    spec = MultSpec(args.a_transpose, args.b, args.c, semiring, args.workers)
    _require_absent(data_dir, args.c)
    registry = TableRegistry()
    _load(registry, data_dir, args.a_transpose)
    _load(registry, data_dir, args.b)
    registry.create_table(args.c, registry.get(args.b).splits, combiner_for(semiring))
    metrics = table_mult(registry, spec)
    registry.compact(args.c)
    _save(registry, data_dir, args.c)
    _print_metrics(metrics, args.workers)
    if args.out:
        Path(args.out).write_text(_metrics_csv(metrics, "tablemult", args.c))
    return 0


def _cmd_count_pp(args) -> int:
    registry = TableRegistry()
    data_dir = _data_dir(args)
    _load(registry, data_dir, args.a_transpose)
    _load(registry, data_dir, args.b)
    print(count_partial_products(registry, args.a_transpose, args.b))
    return 0


def _cmd_extract(args) -> int:
    data_dir = _data_dir(args)
    _require_absent(data_dir, args.output)
    registry = TableRegistry()
    _load(registry, data_dir, args.graph)
    graph = registry.get(args.graph)
    if args.extraction_table:
        _load(registry, data_dir, args.extraction_table)
        e_name = args.extraction_table
    else:
        if args.sample_size is None:
            raise ValueError("either --extraction-table or --sample-size is required")
        scale = args.scale
        if scale is None:
            raise ValueError("--scale is required with --sample-size")
        e_name = "__extraction"
        registry.create_table(e_name)
        sample = sample_vertices(scale, args.sample_size, args.seed)
        build_extraction_table(registry, sample, e_name)
        registry.compact(e_name)
    registry.create_table(args.output, graph.splits, SUM_COMBINER)
    metrics = extract_rows(registry, e_name, args.graph, args.output, args.workers)
    registry.compact(args.output)
    _save(registry, data_dir, args.output)
    _print_metrics(metrics, args.workers)
    if args.out:
        Path(args.out).write_text(_metrics_csv(
            metrics, "extraction", args.output,
            args.sample_size if not args.extraction_table else None))
    return 0


def _cmd_bench(args) -> int:
    nodes = _int_list(args.nodes)
    if args.bench_mode == "strong":
        report = bench.run_strong_scaling(args.scale, nodes, args.reps, args.seed,
                                          args.epv)
    elif args.bench_mode == "weak":
        report = bench.run_weak_scaling(args.base_scale, nodes, args.reps,
                                        args.seed, args.epv)
    else:
        scale = args.scale if args.mode == "strong" else args.base_scale
        if scale is None:
            raise ValueError("--scale (strong) or --base-scale (weak) is required")
        report = bench.run_extraction_scaling(
            args.mode, scale, _int_list(args.sample_sizes), nodes, args.reps,
            args.seed, args.epv)
    csv = bench.emit_csv(report)
    if args.out:
        Path(args.out).write_text(csv)
    else:
        sys.stdout.write(csv)
    for row in report.rows:
        print(f"nodes={row.nodes} label={row.scale_label} rows={row.rows or '-'} "
              f"pp={row.partial_products} seconds={row.seconds:.6g} "
              f"rate={row.rate:.6g} speedup={row.speedup:.6g}", file=sys.stderr)
    if report.oversubscribed:
        print(f"warning: node counts {list(report.oversubscribed)} oversubscribe "
              f"{os.cpu_count() or 1} available cores", file=sys.stderr)
    return 0


def _cmd_info(args) -> int:
    registry = TableRegistry()
    _load(registry, _data_dir(args), args.table)
    table = registry.get(args.table)
    entries = 0
    total = 0
    row = None
    rows = 0
    for e in registry.scan(args.table):
        entries += 1
        total += e.value
        if e.key.row != row:
            rows += 1
            row = e.key.row
    print(f"table: {args.table}")
    print(f"tablets: {len(table.tablets)}")
    print(f"splits: {len(table.splits)}")
    print(f"entries: {entries}")
    print(f"rows: {rows}")
    print(f"value_sum: {total}")
    if args.degrees:
        histogram = degree_histogram(registry, args.table)
        for degree in sorted(histogram):
            print(f"degree {degree}: {histogram[degree]} rows")
    return 0


def _int_list(text: str) -> list[int]:
    return [int(part) for part in text.split(",") if part.strip()]


# -- parser ------------------------------------------------------------------

def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="tabulo",
        description="Miniature tablet store with a table-multiply engine.")
    parser.add_argument("--data-dir", default=os.environ.get("TABULO_DATA_DIR",
                                                             "tabulo-data"),
                        help="table persistence root (env TABULO_DATA_DIR)")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("generate", help="generate a power-law adjacency table")
    p.add_argument("--scale", type=int, required=True)
    p.add_argument("--epv", type=int, default=16)
    p.add_argument("--seed", type=int, default=1)
    p.add_argument("--table", required=True)
    p.add_argument("--shards", type=int, default=1)
    p.set_defaults(func=_cmd_generate)

    p = sub.add_parser("ingest", help="read dump lines from stdin into a new table")
    p.add_argument("--table", required=True)
    p.add_argument("--combiner", choices=sorted(_COMBINERS), default="sum")
    p.add_argument("--splits-file")
    p.set_defaults(func=_cmd_ingest)

    p = sub.add_parser("dump", help="write a table's entries to stdout")
    p.add_argument("--table", required=True)
    p.set_defaults(func=_cmd_dump)

    p = sub.add_parser("splits", help="tablet split maintenance")
    action = p.add_subparsers(dest="splits_action", required=True)
    pc = action.add_parser("compute", help="print entry-balanced split points")
    pc.add_argument("--table", required=True)
    pc.add_argument("--tablets", type=int, required=True)
    pc.set_defaults(func=_cmd_splits_compute)
    pa = action.add_parser("apply", help="re-partition a table")
    pa.add_argument("--table", required=True)
    pa.add_argument("--splits-file", help="default: read splits from stdin")
    pa.set_defaults(func=_cmd_splits_apply)

    p = sub.add_parser("compact", help="merge runs and apply the combiner")
    p.add_argument("--table", required=True)
    p.set_defaults(func=_cmd_compact)

    p = sub.add_parser("tablemult", help="C = AT-transpose-times-B, written to C")
    p.add_argument("--a-transpose", required=True)
    p.add_argument("--b", required=True)
    p.add_argument("--c", required=True)
    p.add_argument("--workers", type=int, default=2)
    p.add_argument("--semiring", choices=sorted(_SEMIRINGS), default="plus_times")
    p.add_argument("--out", help="also write metrics as CSV")
    p.set_defaults(func=_cmd_tablemult)

    p = sub.add_parser("countpp", help="partial products without multiplying")
    p.add_argument("--a-transpose", required=True)
    p.add_argument("--b", required=True)
    p.set_defaults(func=_cmd_count_pp)

    p = sub.add_parser("extract", help="extract sampled rows via tablemult")
    p.add_argument("--graph", required=True)
    p.add_argument("--output", required=True)
    p.add_argument("--extraction-table", help="use an existing diagonal table")
    p.add_argument("--sample-size", type=int)
    p.add_argument("--scale", type=int, help="vertex space of the graph")
    p.add_argument("--seed", type=int, default=1)
    p.add_argument("--workers", type=int, default=2)
    p.add_argument("--out", help="also write metrics as CSV")
    p.set_defaults(func=_cmd_extract)

    p = sub.add_parser("bench", help="scaling experiments")
    mode = p.add_subparsers(dest="bench_mode", required=True)
    pb = mode.add_parser("strong", help="fixed problem size")
    pb.add_argument("--scale", type=int, required=True)
    pw = mode.add_parser("weak", help="problem grown with node count")
    pw.add_argument("--base-scale", type=int, required=True)
    pe = mode.add_parser("extract", help="row extraction scaling")
    pe.add_argument("--mode", choices=("strong", "weak"), required=True)
    pe.add_argument("--scale", type=int)
    pe.add_argument("--base-scale", type=int)
    pe.add_argument("--sample-sizes", default="1024,2048")
    for px in (pb, pw, pe):
        px.add_argument("--nodes", default="1,2,4")
        px.add_argument("--reps", type=int, default=3)
        px.add_argument("--seed", type=int, default=1)
        px.add_argument("--epv", type=int, default=16)
        px.add_argument("--out", help="write the CSV report here instead of stdout")
        px.set_defaults(func=_cmd_bench)

    p = sub.add_parser("info", help="table shape and contents summary")
    p.add_argument("--table", required=True)
    p.add_argument("--degrees", action="store_true", help="print the degree histogram")
    p.set_defaults(func=_cmd_info)

    return parser


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as e:
        return 0 if not e.code else 1
    try:
        return args.func(args)
    except TabuloError as e:
        _err(str(e))
        return 2
    except (ValueError, TypeError) as e:
        _err(str(e))
        return 1
    except OSError as e:
        _err(str(e))
        return 2


if __name__ == "__main__":
    sys.exit(main())

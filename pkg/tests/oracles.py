"""Independent reference implementations the tests check the engine against.

Everything here works on dense numpy arrays or plain dicts and never touches
the store's own join/combine machinery.
"""

from collections import Counter

import numpy as np

from tabulo import Entry, Key, TableRegistry, entry
from tabulo.graphgen import label_width, vertex_label

INF = (1 << 64) - 1


def random_sparse(rng: np.random.Generator, n: int, density: float,
                  max_value: int = 50) -> np.ndarray:
    dense = np.zeros((n, n), dtype=np.int64)
    mask = rng.random((n, n)) < density
    dense[mask] = rng.integers(1, max_value + 1, size=int(mask.sum()))
    return dense


def table_from_dense(registry: TableRegistry, name: str, dense: np.ndarray,
                     scale: int, combiner) -> None:
    """Write dense[r, c] as (label(r), label(c), value) entries."""
    registry.create_table(name, combiner=combiner)
    rows, cols = np.nonzero(dense)
    registry.write(name, [
        entry(vertex_label(int(r), scale), vertex_label(int(c), scale), int(dense[r, c]))
        for r, c in zip(rows, cols)])


def dense_from_scan(registry: TableRegistry, name: str, n: int) -> np.ndarray:
    dense = np.zeros((n, n), dtype=np.int64)
    for e in registry.scan(name):
        dense[int(e.key.row), int(e.key.qualifier)] = e.value
    return dense


def dense_multiply(at_dense: np.ndarray, b_dense: np.ndarray) -> np.ndarray:
    """C = transpose(AT) @ B over plain integer arithmetic."""
    return at_dense.T.astype(np.int64) @ b_dense.astype(np.int64)


def triple_loop_multiply(at_dense: np.ndarray, b_dense: np.ndarray) -> np.ndarray:
    """The literal three-loop definition; validates dense_multiply itself."""
    n_k, n_i = at_dense.shape
    _, n_j = b_dense.shape
    out = np.zeros((n_i, n_j), dtype=np.int64)
    for i in range(n_i):
        for j in range(n_j):
            acc = 0
            for k in range(n_k):
                if at_dense[k, i] and b_dense[k, j]:
                    acc += int(at_dense[k, i]) * int(b_dense[k, j])
            out[i, j] = acc
    return out


def triple_loop_products(at_dense: np.ndarray, b_dense: np.ndarray) -> Counter:
    """Multiset of (i, j, a*b) partial products from the dense pair."""
    out = Counter()
    n_k, n_i = at_dense.shape
    _, n_j = b_dense.shape
    for k in range(n_k):
        for i in range(n_i):
            a = int(at_dense[k, i])
            if not a:
                continue
            for j in range(n_j):
                b = int(b_dense[k, j])
                if b:
                    out[(i, j, a * b)] += 1
    return out


def pp_count(at_dense: np.ndarray, b_dense: np.ndarray) -> int:
    """Sum over k of nnz(AT row k) * nnz(B row k)."""
    nnz_at = (at_dense != 0).sum(axis=1)
    nnz_b = (b_dense != 0).sum(axis=1)
    return int((nnz_at * nnz_b).sum())


def min_plus_multiply(at_dense: np.ndarray, b_dense: np.ndarray) -> np.ndarray:
    """Brute-force min-plus with INF as the absent value."""
    n_k, n_i = at_dense.shape
    _, n_j = b_dense.shape
    out = np.full((n_i, n_j), INF, dtype=np.uint64)
    for i in range(n_i):
        for j in range(n_j):
            best = INF
            for k in range(n_k):
                if at_dense[k, i] and b_dense[k, j]:
                    best = min(best, int(at_dense[k, i]) + int(b_dense[k, j]))
            out[i, j] = best
    return out


def scan_triples(registry: TableRegistry, name: str) -> list:
    return [(e.key.row, e.key.qualifier, e.value) for e in registry.scan(name)]


def group_sum(products) -> dict:
    """Hash-aggregate oracle for the remote-write-plus-combiner path."""
    out = {}
    for p in products:
        key = (p.row, p.qualifier)
        out[key] = out.get(key, 0) + p.value
    return out

"""Semirings: the (plus, times) pair that parameterizes table multiplication.

Values are unsigned 64-bit integers; any operation leaving that range raises
instead of wrapping. The zero element is the sparse absent state and is never
stored in a table, so times is only ever applied to nonzero operands.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Callable

from .errors import MultiplyOverflow
from .keys import U64_MAX
from .tables import MIN_COMBINER, SUM_COMBINER, CombinerSpec


@dataclass(frozen=True)
class Semiring:
    name: str
    plus: Callable[[int, int], int]
    times: Callable[[int, int], int]
    zero: int  # identity of plus, the absent-value representative


def _times_mul(a: int, b: int) -> int:
    p = a * b
    if p > U64_MAX:
        raise MultiplyOverflow(f"{a} * {b} exceeds the u64 range")
    return p


def _times_add(a: int, b: int) -> int:
    s = a + b
    if s > U64_MAX:
        raise MultiplyOverflow(f"{a} (+) {b} exceeds the u64 range")
    return s


def _plus_sum(a: int, b: int) -> int:
    from .tables import u64_add
    return u64_add(a, b)


PLUS_TIMES = Semiring("plus_times", _plus_sum, _times_mul, 0)

# min-plus over u64 with U64_MAX standing in for +infinity; usable because
# stored values are strictly positive and the absent state is never written.
MIN_PLUS = Semiring("min_plus", min, _times_add, U64_MAX)


def combiner_for(semiring: Semiring) -> CombinerSpec:
    """The combiner implementing the semiring's plus on an output table."""
    if semiring.name == "plus_times":
        return SUM_COMBINER
    if semiring.name == "min_plus":
        return MIN_COMBINER
    return CombinerSpec(semiring.plus, name=f"{semiring.name}-plus")


def vectorizable(semiring: Semiring) -> bool:
    """Whether the columnar join kernels know this semiring's times."""
    return semiring.name in ("plus_times", "min_plus")

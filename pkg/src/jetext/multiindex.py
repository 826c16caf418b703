"""Multi-index helpers shared by the jet and series machinery."""

from __future__ import annotations

import math
from functools import lru_cache

__all__ = [
    "as_index",
    "indices_up_to",
    "mi_abs",
    "mi_add",
    "mi_sub",
    "mi_factorial",
    "mi_binomial",
    "mi_leq",
]


def as_index(j, n: int | None = None) -> tuple[int, ...]:
    """Normalise an int or iterable into a multi-index tuple."""
    if isinstance(j, int):
        j = (j,) if n is None or n == 1 else tuple([j] + [0] * (n - 1))
    j = tuple(int(v) for v in j)
    if any(v < 0 for v in j):
        raise ValueError(f"multi-index entries must be >= 0: {j}")
    if n is not None and len(j) != n:
        raise ValueError(f"multi-index length {len(j)} does not match dimension {n}")
    return j


@lru_cache(maxsize=None)
def indices_up_to(n: int, order: int) -> tuple[tuple[int, ...], ...]:
    """All multi-indices of length n with |j| <= order, graded then lexicographic."""
    if order < 0:
        return ()
    out: list[tuple[int, ...]] = []

    def rec(prefix: tuple[int, ...], remaining: int, budget: int):
        if remaining == 0:
            out.append(prefix)
            return
        for v in range(budget + 1):
            rec(prefix + (v,), remaining - 1, budget - v)

    rec((), n, order)
    out.sort(key=lambda j: (sum(j), j))
    return tuple(out)


def mi_abs(j) -> int:
    return int(sum(j))


def mi_add(a, b) -> tuple[int, ...]:
    return tuple(x + y for x, y in zip(a, b))


def mi_sub(a, b) -> tuple[int, ...]:
    out = tuple(x - y for x, y in zip(a, b))
    if any(v < 0 for v in out):
        raise ValueError(f"multi-index subtraction underflow: {a} - {b}")
    return out


def mi_leq(a, b) -> bool:
    return all(x <= y for x, y in zip(a, b))


def mi_factorial(j) -> float:
    out = 1
    for v in j:
        out *= math.factorial(v)
    return float(out)


def mi_binomial(a, k) -> float:
    out = 1
    for x, y in zip(a, k):
        out *= math.comb(x, y)
    return float(out)

"""Exact feasibility of ``A x <= b, x >= 0`` over the rationals.

Dictionary-form simplex with Bland's rule.  The dictionary is kept as an
integer matrix over a common denominator and updated by fraction-free
(Bareiss/Edmonds) pivoting, so every intermediate value is exact and no
gcd reductions are needed.  Only the auxiliary phase-one problem is solved:
``max -x0`` subject to ``A x - x0 <= b``.
"""

from __future__ import annotations

import math
from fractions import Fraction
from typing import Sequence

import numpy as np

Number = int | Fraction


def _integer_rows(A: Sequence[Sequence[Number]], b: Sequence[Number]) -> list[list[int]]:
    rows = []
    for a_row, bi in zip(A, b):
        vals = [Fraction(bi)] + [Fraction(x) for x in a_row]
        m = 1
        for v in vals:
            m = math.lcm(m, v.denominator)
        rows.append([int(v * m) for v in vals])
    return rows


def feasible_point(A: Sequence[Sequence[Number]], b: Sequence[Number]) -> list[Fraction] | None:
    """A point x >= 0 with ``A x <= b``, or None if there is none."""
    m = len(A)
    n = len(A[0]) if m else 0
    if any(len(r) != n for r in A) or len(b) != m:
        raise ValueError("ragged constraint matrix")
    if m == 0 or all(Fraction(bi) >= 0 for bi in b):
        return [Fraction(0)] * n
    rows = _integer_rows(A, b)
    # columns: 0 = constant, 1..n = x_1..x_n, n+1 = x0
    T = np.zeros((m + 1, n + 2), dtype=object)
    for i, r in enumerate(rows, start=1):
        T[i, : n + 1] = r
        T[i, n + 1] = -1
    T[0, n + 1] = 1  # z = -x0, stored as negated coefficients
    # variable ids: x_j -> j-1 (0..n-1), x0 -> n, slack i -> n+1+i
    nonbasic = list(range(n)) + [n]
    basic = [n + 1 + i for i in range(m)]
    d = 1

    def pivot(r: int, s: int) -> None:
        nonlocal T, d
        p = T[r, s]
        col = T[:, s].copy()
        rowr = T[r, :].copy()
        T = (T * p - np.outer(col, rowr)) // d
        T[r, :] = rowr
        T[:, s] = -col
        T[r, s] = d
        d = p
        if d < 0:
            T = -T
            d = -d
        basic[r - 1], nonbasic[s - 1] = nonbasic[s - 1], basic[r - 1]

    # initial pivot: x0 enters, the most violated row leaves
    # rows were scaled by positive integers, which only rescales x0 per row
    r0 = 1 + min(range(m), key=lambda i: (rows[i][0], i))
    pivot(r0, n + 1)

    while True:
        if T[0, 0] == 0:
            break
        cands = [j for j in range(1, n + 2) if T[0, j] < 0]
        if not cands:
            break
        s = min(cands, key=lambda j: nonbasic[j - 1])
        best = None
        for i in range(1, m + 1):
            a = T[i, s]
            if a > 0:
                key = (Fraction(T[i, 0], a), basic[i - 1])
                if best is None or key < best[0]:
                    best = (key, i)
        if best is None:  # unbounded; cannot happen since -x0 <= 0
            raise AssertionError("phase-one objective unbounded")
        pivot(best[1], s)

    if T[0, 0] != 0:
        return None
    x = [Fraction(0)] * n
    for i, var in enumerate(basic, start=1):
        if var < n:
            x[var] = Fraction(T[i, 0], d)
    return x


def is_feasible(A: Sequence[Sequence[Number]], b: Sequence[Number]) -> bool:
    return feasible_point(A, b) is not None

from __future__ import annotations

from fractions import Fraction

import numpy as np
from hypothesis import given
from hypothesis import strategies as st
from scipy.optimize import linprog

from qemac.lp import feasible_point, is_feasible


def _check(A, b, x):
    assert all(v >= 0 for v in x)
    for row, bi in zip(A, b):
        assert sum(Fraction(a) * v for a, v in zip(row, x)) <= Fraction(bi)


def test_trivial_cases():
    assert feasible_point([], []) == []
    assert feasible_point([[1, 1]], [3]) == [0, 0]
    assert feasible_point([[-1]], [-2]) == [Fraction(2)]
    assert feasible_point([[1], [-1]], [1, -2]) is None


def test_fractional_vertex():
    # x + y >= 7/3, x <= 1, y <= 4/3 forces the single point (1, 4/3)
    A = [[-1, -1], [1, 0], [0, 1]]
    b = [Fraction(-7, 3), 1, Fraction(4, 3)]
    x = feasible_point(A, b)
    assert x == [1, Fraction(4, 3)]
    b[0] = Fraction(-7, 3) - Fraction(1, 10**9)
    assert not is_feasible(A, b)


def test_degenerate_cycling_candidate():
    # Beale-style degenerate system; Bland's rule must terminate
    A = [
        [Fraction(1, 4), -8, -1, 9],
        [Fraction(1, 2), -12, Fraction(-1, 2), 3],
        [0, 0, 1, 0],
        [-1, -1, -1, -1],
    ]
    b = [0, 0, 1, -1]
    x = feasible_point(A, b)
    assert x is not None
    _check(A, b, x)


@given(st.integers(1, 6), st.integers(1, 5), st.integers(0, 2**32 - 1))
def test_agrees_with_scipy(m, n, seed):
    rng = np.random.default_rng(seed)
    A = rng.integers(-4, 5, size=(m, n))
    b = rng.integers(-6, 7, size=m)
    x = feasible_point(A.tolist(), b.tolist())
    ref = linprog(np.zeros(n), A_ub=A, b_ub=b, bounds=[(0, None)] * n, method="highs")
    assert (x is not None) == (ref.status == 0)
    if x is not None:
        _check(A.tolist(), b.tolist(), x)

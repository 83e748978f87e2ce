from __future__ import annotations

import itertools
from fractions import Fraction as Fr

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st
from scipy.optimize import linprog

from qemac.capacity import (
    capacity_no_helper,
    curve,
    curve_csv,
    eacq_check,
    hull_witness,
    in_achievable_hull,
    in_region_ame,
    in_region_tqc,
    pairwise_superdense_delta0,
    r_ame,
    r_tqc,
    saturation_threshold,
    symmetric_delta_star,
)
from qemac.errors import InfeasibleParameters, LengthMismatch
from qemac.instance import build_symmetric_instance as sym

I421 = sym(2, 4, 2, 1)
I432 = sym(2, 4, 3, 2)
I321 = sym(2, 3, 2, 1)

FEASIBLE = [(S, a, b) for S in range(1, 7) for a in range(1, S + 1) for b in range(a)]


def test_ame_region_examples():
    assert in_region_ame([0] + [Fr(1, 2)] * 4, I421)
    assert in_region_ame([1] + [Fr(1, 2)] * 4, I432)
    assert not in_region_ame([0] * 5, I421)
    assert not in_region_ame([0] + [Fr(1, 2)] * 4, I432)
    with pytest.raises(LengthMismatch):
        in_region_ame([0, 1], I421)


def test_tqc_region_examples():
    assert in_region_tqc([0, 1, 1, 1], I321)
    assert not in_region_tqc([0] * 4, I321)
    assert in_region_tqc([0, 1, 1, 1, 1], I421)
    assert not in_region_tqc([0] + [Fr(1, 2)] * 4, I421)
    with pytest.raises(LengthMismatch):
        in_region_tqc([0], I321)


def test_hull_examples():
    assert in_achievable_hull([0] + [Fr(1, 2)] * 4, I421)
    assert in_achievable_hull([Fr(1, 2)] + [Fr(3, 4)] * 4, I432)
    assert not in_achievable_hull([Fr(1, 2)] + [Fr(5, 8)] * 4, I432)
    lam, u, v = hull_witness([Fr(1, 2)] + [Fr(3, 4)] * 4, I432)
    assert 0 <= lam <= 1
    assert all(a + b <= Fr(3, 4) for a, b in zip(u[1:], v[1:]))


def test_delta_star_examples():
    r = symmetric_delta_star(4, 3, 2, 0)
    assert (r.delta_star, r.capacity) == (1, Fr(1, 4))
    assert symmetric_delta_star(4, 3, 2, 1).delta_star == Fr(1, 2)
    assert symmetric_delta_star(4, 3, 2, 2).delta_star == Fr(1, 2)
    assert symmetric_delta_star(3, 2, 1, 0).delta_star == 1
    assert symmetric_delta_star(4, 3, 2, "0.5").delta_star == Fr(3, 4)
    with pytest.raises(InfeasibleParameters):
        symmetric_delta_star(3, 1, 1)
    with pytest.raises(InfeasibleParameters):
        symmetric_delta_star(3, 2, 1, -1)


def test_no_helper_examples():
    assert capacity_no_helper(8, 4, 1) == (Fr(3, 4), "alpha+beta<=S<=2alpha")
    assert capacity_no_helper(8, 8, 2) == (Fr(6, 8), "S<=alpha+beta")
    assert capacity_no_helper(4, 2, 1)[0] == Fr(1, 2)
    assert capacity_no_helper(8, 2, 1)[1] == "S>=2alpha"


# plotted coordinates of the S = 8 comparison figure
S8_CAPACITY = {
    1: {"C": [Fr(1, 4), Fr(2, 4), Fr(3, 4), Fr(3, 4), Fr(3, 4), Fr(3, 4), Fr(7, 8)],
        "ame": [Fr(1, 4), Fr(2, 4), Fr(3, 4), Fr(3, 4), Fr(3, 4), Fr(3, 4), Fr(3, 4)],
        "tqc": [Fr(k, 8) for k in range(1, 8)]},
    2: {"C": [Fr(1, 4), Fr(2, 4), Fr(2, 4), Fr(2, 4), Fr(5, 8), Fr(6, 8)],
        "ame": [Fr(1, 4)] + [Fr(2, 4)] * 5,
        "tqc": [Fr(k, 8) for k in range(1, 7)]},
}


@pytest.mark.parametrize("beta", [1, 2])
def test_s8_plotted_coordinates(beta):
    alphas = range(beta + 1, 9)
    assert [capacity_no_helper(8, a, beta)[0] for a in alphas] == S8_CAPACITY[beta]["C"]
    assert [r_ame(8, a, beta) for a in alphas] == S8_CAPACITY[beta]["ame"]
    assert [r_tqc(8, a, beta) for a in alphas] == S8_CAPACITY[beta]["tqc"]


def test_curve_432():
    pts = curve(4, 3, 2, [0, 1, 2])
    assert [p.result.delta_star for p in pts] == [1, Fr(1, 2), Fr(1, 2)]
    text = curve_csv(pts).splitlines()
    assert text[0] == "S,alpha,beta,delta0_num,delta0_den,delta_star_num,delta_star_den,capacity_num,capacity_den,regime"
    assert text[2].startswith("4,3,2,1,1,1,2,1,2,")


def test_threshold():
    assert saturation_threshold(4, 3, 2) == 1
    assert saturation_threshold(8, 4, 1) == 0
    for S, a, b in FEASIBLE:
        if S > a:
            assert pairwise_superdense_delta0(S, a, b) > saturation_threshold(S, a, b)


def test_eacq_examples():
    assert eacq_check([0, Fr(3, 4), Fr(3, 4), Fr(3, 4)], 3, 1) == {"subset_bound": True, "total_bound": True}
    assert eacq_check([0] * 4, 3, 1) == {"subset_bound": False, "total_bound": False}
    assert eacq_check([0] + [Fr(1, 3)] * 4, 4, 1) == {"subset_bound": True, "total_bound": True}
    with pytest.raises(LengthMismatch):
        eacq_check([0, 1], 3, 1)


@pytest.mark.parametrize("S,a,b", FEASIBLE)
def test_no_helper_matches_delta_star_at_zero(S, a, b):
    assert capacity_no_helper(S, a, b)[0] == 1 / (S * symmetric_delta_star(S, a, b, 0).delta_star)


@pytest.mark.parametrize("S,a,b", FEASIBLE)
def test_monotone_and_saturating(S, a, b):
    th = saturation_threshold(S, a, b)
    grid = [Fr(k, 4) for k in range(0, 4 * int(th) + 9)]
    ds = [symmetric_delta_star(S, a, b, g).delta_star for g in grid]
    assert all(x >= y for x, y in zip(ds, ds[1:]))
    floor = Fr(1, 2 * (a - b))
    assert all(d == floor for g, d in zip(grid, ds) if g >= th)
    if th > 0:
        assert symmetric_delta_star(S, a, b, th - Fr(1, 64)).delta_star > floor
    r = symmetric_delta_star(S, a, b, th)
    assert r.capacity * S * r.delta_star == 1


def _float_min_uniform(S, a, b, d0):
    """Independent float LP for the hull: min Delta with (d0, Delta, ...) covered by lam*AME + (1-lam)*TQC."""
    inst = sym(2, S, a, b)
    n = S + 1
    # variables: Delta, lam, u_0..u_S, v_0..v_S
    nv = 2 + 2 * n
    A, rhs = [], []
    for s in range(n):
        r = np.zeros(nv)
        r[2 + s] = r[2 + n + s] = 1
        if s == 0:
            rhs.append(d0)
        else:
            r[0] = -1
            rhs.append(0)
        A.append(r)
    for w in inst.W:
        for e in inst.E:
            r = np.zeros(nv)  # lam - sum(u) + 2 sum_e u <= 0
            r[1] = 1
            r[2 : 2 + n] -= 1
            for s in e:
                r[2 + s] += 2
            A.append(r)
            rhs.append(0)
            r = np.zeros(nv)
            r[1] = 1
            for s in w:
                r[2 + s] -= 2
            for s in e:
                r[2 + s] += 2
            A.append(r)
            rhs.append(0)
            r = np.zeros(nv)  # (1 - lam) - sum_w v + sum_e v <= 0
            r[1] = -1
            for s in w:
                r[2 + n + s] -= 1
            for s in e:
                r[2 + n + s] += 1
            A.append(r)
            rhs.append(-1)
    c = np.zeros(nv)
    c[0] = 1
    bounds = [(0, None), (0, 1)] + [(0, None)] * (2 * n)
    res = linprog(c, A_ub=np.array(A), b_ub=rhs, bounds=bounds, method="highs")
    assert res.status == 0
    return res.fun


@pytest.mark.parametrize("S,a,b", [(3, 2, 1), (4, 2, 1), (4, 3, 2), (5, 3, 1), (5, 4, 1), (6, 5, 3)])
def test_closed_form_matches_float_lp_oracle(S, a, b):
    for d0 in [Fr(k, 4) for k in range(9)]:
        assert abs(_float_min_uniform(S, a, b, float(d0)) - float(symmetric_delta_star(S, a, b, d0).delta_star)) < 1e-9


@given(st.sampled_from([(3, 2, 1), (4, 2, 1), (4, 3, 2), (5, 3, 1)]), st.integers(0, 24), st.integers(1, 24))
def test_region_nesting(params, num, den):
    S, a, b = params
    inst = sym(2, S, a, b)
    rng = np.random.default_rng(num * 31 + den)
    delta = [Fr(int(x), den) for x in rng.integers(0, 2 * den, S + 1)]
    if in_region_ame(delta, inst) or in_region_tqc(delta, inst):
        assert in_achievable_hull(delta, inst)
    # symmetric boundary point is in the hull, scaled below is not
    d0 = Fr(num, 8)
    ds = symmetric_delta_star(S, a, b, d0).delta_star
    assert in_achievable_hull([d0] + [ds] * S, inst)
    assert not in_achievable_hull([d0] + [ds * Fr(63, 64)] * S, inst)


def test_points_in_regions_are_consistent():
    for S, a, b in [(4, 2, 1), (5, 3, 1), (4, 3, 2)]:
        inst = sym(2, S, a, b)
        for vals in itertools.product([0, Fr(1, 2), 1], repeat=2):
            delta = [vals[0]] + [vals[1]] * S
            if in_region_tqc(delta, inst):
                assert vals[1] * (a - b) >= 1

from __future__ import annotations

import itertools
from fractions import Fraction

import numpy as np
import pytest

from qemac.cutset import ERASURES, QUDIT_OWNER, build_cutset_scheme
from qemac.errors import FieldTooSmall, InvalidPattern, WrongBlockLength
from qemac.linalg import is_invertible


@pytest.fixture(scope="module")
def gf8():
    return build_cutset_scheme(2, 3)


def test_gf8_all_erasures_recover(gf8):
    assert gf8.q == 8
    out = gf8.verify(trials=100, seed=0)
    assert out["ok"] and out["failures"] == {0: 0, 1: 0, 2: 0}


def test_gf25_all_erasures_recover():
    s = build_cutset_scheme(5, 2)
    assert s.q == 25
    assert s.verify(trials=100, seed=1)["ok"]
    assert s.verify(trials=50, seed=1, mode="drop")["ok"]


def test_cost_three_quarters(gf8):
    assert gf8.costs() == (Fraction(3, 4), Fraction(3, 4), Fraction(1, 2))
    assert gf8.uniform_cost() == Fraction(3, 4)
    assert sorted(QUDIT_OWNER.count(s) for s in (1, 2, 3)) == [2, 3, 3]


def test_each_erasure_leaves_four_readable_symbols(gf8):
    # independent recount straight from the box layout
    for t, erased_servers in enumerate(ERASURES):
        erased = {i for i, o in enumerate(QUDIT_OWNER) if o in erased_servers}
        pos = [p for b in gf8.boxes if not erased & set(b.qudits) for p in b.positions]
        assert len(pos) == 4
        assert is_invertible(gf8.G.columns(pos))


def test_mds_any_four_columns(gf8):
    assert all(is_invertible(gf8.G.columns(c)) for c in itertools.combinations(range(8), 4))


def test_no_erasure_labels_are_codeword(gf8):
    rng = np.random.default_rng(0)
    A = gf8.fq.random(4, rng)
    labels = gf8.run(A, None, rng)
    flat = np.concatenate(labels)
    order = [p for b in gf8.boxes for p in b.positions]
    assert np.array_equal(flat, gf8.coded(A)[order])


def test_errors(gf8):
    with pytest.raises(FieldTooSmall):
        build_cutset_scheme(2, 2)
    with pytest.raises(WrongBlockLength):
        gf8.coded([1, 2, 3])
    with pytest.raises(InvalidPattern):
        gf8.decode(3, [])

from __future__ import annotations

import numpy as np
import pytest
from fractions import Fraction
from hypothesis import given
from hypothesis import strategies as st

from qemac.ame import (
    decode_ame,
    encode_ame,
    label_for,
    plan_dimensions,
    smallest_lambda,
    synthesize_ame,
)
from qemac.errors import (
    Infeasible,
    InvalidPattern,
    RetryExhausted,
    ShapeMismatch,
    UnknownServer,
    WitnessRejected,
    WrongBlockLength,
)
from qemac.examples import WORKED_M, WORKED_U, four_server_instance, worked_example_scheme
from qemac.fq import construct_field
from qemac.instance import build_symmetric_instance, general_instance
from qemac.linalg import FqMatrix, inverse, rank
from qemac.nsum import box_apply

F5 = construct_field(5)


@pytest.fixture(scope="module")
def worked():
    return worked_example_scheme(repaired=True)


def _sum(f, w):
    out = np.zeros(w.shape[1], dtype=np.int64)
    for row in w:
        out = f.add(out, row)
    return out


def _label_by_servers(scheme, w):
    Y = np.zeros(scheme.N, dtype=np.int64)
    for s in range(scheme.inst.S + 1):
        Y = box_apply(Y, encode_ame(scheme, s, w), scheme.M)
    return Y


# --- dimensions -------------------------------------------------------------


def test_plan_four_server_batch_two():
    dims = plan_dimensions(four_server_instance(), [0, 1, 1, 1, 1])
    assert dims.l == 2 and dims.u == 2 and dims.N == 4
    # d^lam > max(T N, K l, N) = max(16, 12, 4)
    assert dims.lam == 2 and dims.q == 25


def test_plan_three_two_one():
    dims = plan_dimensions(build_symmetric_instance(5, 3, 2, 1), [0, 1, 1, 1])
    assert dims.l == 1 and dims.u == 1


def test_plan_zero_rate_is_infeasible():
    with pytest.raises(Infeasible):
        plan_dimensions(build_symmetric_instance(2, 2, 2, 1), [0, 1, 1])
    with pytest.raises(Infeasible):
        plan_dimensions(four_server_instance(), [0, 1, 1, 1, 1], l=3)


def test_plan_allocation_forms():
    inst = four_server_instance()
    a = plan_dimensions(inst, [1, 1, 1, 1])
    b = plan_dimensions(inst, {1: 1, 2: 1, 3: 1, 4: 1})
    assert a.alloc == b.alloc == (0, 1, 1, 1, 1)
    with pytest.raises(ShapeMismatch):
        plan_dimensions(inst, [1, 1])
    with pytest.raises(UnknownServer):
        plan_dimensions(inst, {7: 1})


def test_smallest_lambda():
    assert smallest_lambda(5, 16) == 2
    assert smallest_lambda(2, 8) == 4
    assert smallest_lambda(7, 6) == 1


def test_helper_only_allowed_with_server_0():
    inst = general_instance(5, 2, [[1, 2]], [[1]], helper=False)
    with pytest.raises(Exception):
        plan_dimensions(inst, [1, 1, 1])


# --- worked example (repaired witness) ---------------------------------------


def test_worked_example_rate_and_checks(worked):
    assert worked.rate() == Fraction(1, 2)
    assert worked.costs() == (0, Fraction(1, 2), Fraction(1, 2), Fraction(1, 2), Fraction(1, 2))
    assert all(worked.structure_checks().values())
    assert all(worked.kernel_checks().values())
    assert worked.attempts == {"M": "injected", "U": "injected", "V_dec": "injected"}


def test_worked_example_label_is_U_times_sum(worked):
    """With V_dec U = I the label is U (A + B + ... + F), exactly as in the example."""
    rng = np.random.default_rng(5)
    U = worked.U
    for _ in range(50):
        w = F5.random((6, 2), rng)
        expect = F5.matmul(U.data, _sum(F5, w).reshape(-1, 1)).reshape(-1)
        assert np.array_equal(label_for(worked, w), expect)
        assert np.array_equal(_label_by_servers(worked, w), expect)


def test_worked_example_per_stream_maps(worked):
    # V_a R_a^-1 = M_a^-1 U since M_a is invertible (stream a lives on servers 1 and 2)
    Ma = worked.M_k(0)
    assert rank(Ma) == 4
    assert worked.precomp[0] == inverse(Ma) @ worked.U
    w = np.zeros((6, 2), dtype=np.int64)
    w[0] = [1, 0]
    ops1 = encode_ame(worked, 1, w)
    col = F5.matmul(worked.precomp[0].data, np.array([[1], [0]])).reshape(-1)
    assert ops1 == [(0, int(col[0]), int(col[1]))]
    assert encode_ame(worked, 2, w) == [(1, int(col[2]), int(col[3]))]
    assert encode_ame(worked, 3, w) == [(2, 0, 0)]
    for t in range(4):
        assert decode_ame(worked, t, label_for(worked, w)).tolist() == [1, 0]


def test_printed_witness_rejected_in_strict_mode():
    inst = four_server_instance()
    dims = plan_dimensions(inst, [0, 1, 1, 1, 1], lam=1, l=2)
    with pytest.raises(WitnessRejected):
        synthesize_ame(inst, dims, M=FqMatrix(F5, WORKED_M), U=FqMatrix(F5, WORKED_U))


def test_printed_witness_unverified_mode_marks_pattern_0():
    s = worked_example_scheme(repaired=False)
    assert s.attempts["U"] == "injected-unverified"
    assert s.decodable_patterns() == [1, 2, 3]
    assert not s.structure_checks()["U_E_full_rank"]
    with pytest.raises(Infeasible):
        decode_ame(s, 0, np.zeros(4, dtype=np.int64))


def test_injected_witnesses_are_checked():
    inst = four_server_instance()
    dims = plan_dimensions(inst, [0, 1, 1, 1, 1], lam=1, l=2)
    bad_M = FqMatrix(F5, [[1, 0, 0, 0, 0, 0, 0, 0], [0, 1, 0, 0, 0, 0, 0, 0], [0, 0, 1, 0, 0, 0, 0, 0], [0, 0, 0, 1, 0, 0, 0, 0]])
    with pytest.raises(WitnessRejected):  # SSO but M_k has rank 2
        synthesize_ame(inst, dims, M=bad_M)
    with pytest.raises(WitnessRejected):
        synthesize_ame(inst, dims, M=FqMatrix(F5, WORKED_M), V_dec=FqMatrix.zeros(F5, 2, 4))


# --- sampled schemes ------------------------------------------------------------


def test_single_server_degenerate():
    inst = build_symmetric_instance(5, 1, 1, 0)
    dims = plan_dimensions(inst, [0, 1])
    assert dims.l == 1
    s = synthesize_ame(inst, dims, seed=0)
    w = np.array([[3]])
    assert decode_ame(s, 0, label_for(s, w)).tolist() == [3]


def test_432_with_helper():
    inst = build_symmetric_instance(2, 4, 3, 2)
    dims = plan_dimensions(inst, [2, 1, 1, 1, 1])
    assert dims.l == 2
    s = synthesize_ame(inst, dims, seed=0)
    assert s.costs() == (1, Fraction(1, 2), Fraction(1, 2), Fraction(1, 2), Fraction(1, 2))
    assert all(s.kernel_checks().values()) and all(s.structure_checks().values())
    assert encode_ame(s, 0, np.zeros((4, 2), dtype=np.int64)) == [(0, 0, 0), (1, 0, 0)]


def test_reproducible_from_seed():
    inst = build_symmetric_instance(5, 3, 2, 1)
    dims = plan_dimensions(inst, [0, 1, 1, 1])
    a, b = synthesize_ame(inst, dims, seed=11), synthesize_ame(inst, dims, seed=11)
    assert a.M.M == b.M.M and a.U == b.U and a.V_dec == b.V_dec


def test_retry_budget_is_explicit():
    inst = build_symmetric_instance(5, 3, 2, 1)
    dims = plan_dimensions(inst, [0, 1, 1, 1])
    with pytest.raises(RetryExhausted):
        synthesize_ame(inst, dims, seed=0, retries=0)


@given(st.integers(0, 10**6))
def test_sampled_scheme_properties(seed):
    inst = build_symmetric_instance(3, 4, 3, 1)
    s = synthesize_ame(inst, plan_dimensions(inst, [1, 1, 1, 1, 1]), seed=seed)
    f = s.field
    assert all(s.kernel_checks().values()) and all(s.structure_checks().values())
    rng = np.random.default_rng(seed)
    w = f.random((inst.K, s.dims.l), rng)
    Y = label_for(s, w)
    assert np.array_equal(Y, _label_by_servers(s, w))
    for t in range(inst.T):
        E = s.E_t(t)
        r = f.random(E.cols, rng)
        noisy = f.add(Y, f.matmul(E.data, r.reshape(-1, 1)).reshape(-1))
        assert np.array_equal(decode_ame(s, t, noisy), _sum(f, w))


@given(st.lists(st.integers(0, 24), min_size=12, max_size=12), st.lists(st.integers(0, 24), min_size=12, max_size=12))
def test_encoding_is_linear(u, v):
    s = worked_example_scheme(repaired=True)
    wu, wv = np.array(u).reshape(6, 2) % 5, np.array(v).reshape(6, 2) % 5
    for srv in range(1, 5):
        a, b = encode_ame(s, srv, wu), encode_ame(s, srv, wv)
        c = encode_ame(s, srv, F5.add(wu, wv))
        assert [(i, (x1 + x2) % 5, (z1 + z2) % 5) for (i, x1, z1), (_, x2, z2) in zip(a, b)] == c


def test_interface_errors(worked):
    w = np.zeros((6, 2), dtype=np.int64)
    with pytest.raises(UnknownServer):
        encode_ame(worked, 5, w)
    with pytest.raises(WrongBlockLength):
        encode_ame(worked, 1, np.zeros((6, 3), dtype=np.int64))
    with pytest.raises(WrongBlockLength):
        encode_ame(worked, 4, {0: [0, 0]})
    with pytest.raises(InvalidPattern):
        decode_ame(worked, 4, np.zeros(4, dtype=np.int64))
    with pytest.raises(ShapeMismatch):
        decode_ame(worked, 0, np.zeros(3, dtype=np.int64))
    assert decode_ame(worked, 0, np.zeros(4, dtype=np.int64)).tolist() == [0, 0]
    assert encode_ame(worked, 2, w) == [(1, 0, 0)]


def test_batch_decode_matches_single(worked):
    rng = np.random.default_rng(2)
    Y = F5.random((4, 7), rng)
    batch = decode_ame(worked, 2, Y)
    for j in range(7):
        assert np.array_equal(batch[:, j], decode_ame(worked, 2, Y[:, j]))

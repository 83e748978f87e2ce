"""Transfer matrices of the N-sum box and their Pauli-frame semantics.

A transfer matrix ``M = [M_l, M_r]`` (N x 2N) is *strongly self-orthogonal*
(SSO) when it has rank N and ``M_r M_l^T = M_l M_r^T``; equivalently
``M J M^T = 0`` with ``J = [[0, -I], [I, 0]]``.  Applying ``X(x_i) Z(z_i)`` to
every subsystem of the box moves the measurable label ``a`` to
``a + M [x; z]``; global phases are never tracked.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Iterable, Sequence

import numpy as np

from .errors import IndexOutOfRange, NotSSO, RetryExhausted, ShapeMismatch
from .fq import Field
from .linalg import FqMatrix, hstack, inverse, rank, solve_right, vstack

DEFAULT_RETRIES = 256


def symplectic_form(field: Field, n: int) -> FqMatrix:
    """``J = [[0, -I], [I, 0]]`` of size 2n."""
    J = np.zeros((2 * n, 2 * n), dtype=np.int64)
    minus_one = int(field.neg(1))
    for i in range(n):
        J[i, n + i] = minus_one
        J[n + i, i] = 1
    return FqMatrix(field, J)


def check_sso(M: FqMatrix) -> bool:
    n = M.rows
    if M.cols != 2 * n:
        raise ShapeMismatch(f"transfer matrix must be N x 2N, got {M.shape}")
    Ml, Mr = M.columns(range(n)), M.columns(range(n, 2 * n))
    return rank(M) == n and Mr @ Ml.T == Ml @ Mr.T


@dataclass(frozen=True)
class TransferMatrix:
    M: FqMatrix

    def __post_init__(self):
        if not check_sso(self.M):
            raise NotSSO("transfer matrix is not strongly self-orthogonal")

    @property
    def N(self) -> int:
        return self.M.rows

    @property
    def field(self) -> Field:
        return self.M.field

    def x_col(self, i: int) -> int:
        return i

    def z_col(self, i: int) -> int:
        return self.N + i

    def subsystem_columns(self, subsystems: Iterable[int]) -> list[int]:
        """Column indices ``[x_i, z_i, x_j, z_j, ...]`` for the given subsystems."""
        out = []
        for i in subsystems:
            out += [i, self.N + i]
        return out

    def submatrix(self, subsystems: Iterable[int]) -> FqMatrix:
        return self.M.columns(self.subsystem_columns(subsystems))


@dataclass(frozen=True)
class SymplecticData:
    G: FqMatrix
    H: FqMatrix
    F: FqMatrix
    J: FqMatrix
    F_inv: FqMatrix


def symplectic_complete(G: FqMatrix) -> SymplecticData:
    """Complete an SSO ``2N x N`` matrix G to a symplectic ``F = [G, H]``.

    Solve ``G^T J H0 = -I`` (possible since G has full column rank), then
    remove the alternating defect ``A = H0^T J H0`` with ``H = H0 - G·low(A)``
    where ``low`` is the strictly lower triangular part.  This is the
    skew-symmetric Gram-Schmidt step done in one shot.
    """
    field = G.field
    two_n, n = G.shape
    if two_n != 2 * n:
        raise ShapeMismatch(f"G must be 2N x N, got {G.shape}")
    J = symplectic_form(field, n)
    if rank(G) != n or not (G.T @ J @ G).is_zero():
        raise NotSSO("G is not SSO")
    minus_I = -FqMatrix.identity(field, n)
    H0 = solve_right(G.T @ J, minus_I)
    A = H0.T @ J @ H0
    low = FqMatrix(field, np.tril(A.data, k=-1))
    H = H0 - G @ low
    F = hstack([G, H])
    if not F.T @ J @ F == J:
        raise AssertionError("symplectic completion failed")
    Ab, Bb = G.take_rows(range(n)), G.take_rows(range(n, 2 * n))
    C, D = H.take_rows(range(n)), H.take_rows(range(n, 2 * n))
    F_inv = vstack([hstack([D.T, -C.T]), hstack([-Bb.T, Ab.T])])
    if not F_inv @ F == FqMatrix.identity(field, 2 * n):
        raise AssertionError("closed-form inverse does not invert F")
    return SymplecticData(G=G, H=H, F=F, J=J, F_inv=F_inv)


def transfer_to_G(M: FqMatrix) -> FqMatrix:
    """``G = [M_r^T; -M_l^T]``."""
    n = M.rows
    Ml, Mr = M.columns(range(n)), M.columns(range(n, 2 * n))
    return vstack([Mr.T, -Ml.T])


def bottom_half(F_inv: FqMatrix) -> FqMatrix:
    """``[0, I] F^-1``."""
    n = F_inv.rows // 2
    return F_inv.take_rows(range(n, 2 * n))


def random_symplectic(field: Field, n: int, rng: np.random.Generator, count: int | None = None) -> FqMatrix:
    """Product of ``count`` (default 2n^2) random symplectic transvections.

    Each factor is ``I + c v v^T J`` with v nonzero and c nonzero, which is
    exactly symplectic in every characteristic.
    """
    J = symplectic_form(field, n)
    count = 2 * n * n if count is None else count
    F = FqMatrix.identity(field, 2 * n)
    for _ in range(count):
        v = field.random(2 * n, rng)
        while not v.any():
            v = field.random(2 * n, rng)
        c = int(rng.integers(1, field.q))
        vJ = FqMatrix(field, v.reshape(1, -1)) @ J
        outer = FqMatrix(field, field.mul(v[:, None], vJ.data))
        T = FqMatrix.identity(field, 2 * n) + outer.scale(c)
        F = T @ F
    return F


def symplectic_inverse(F: FqMatrix) -> FqMatrix:
    """``F^-1 = J^-1 F^T J`` for symplectic F."""
    n = F.rows // 2
    J = symplectic_form(F.field, n)
    return (-J) @ F.T @ J


RankSpec = tuple[Sequence[int], int]


def rank_specs_hold(M: FqMatrix, rank_specs: Sequence[RankSpec]) -> bool:
    return all(rank(M.columns(cols)) == need for cols, need in rank_specs)


def sample_sso_transfer(
    N: int,
    field: Field,
    rank_specs: Sequence[RankSpec] = (),
    seed: int | np.random.Generator | None = 0,
    retries: int = DEFAULT_RETRIES,
) -> TransferMatrix:
    """Sample ``M = [0, I] F^-1`` for random symplectic F until all rank specs hold.

    ``rank_specs`` is a list of ``(column indices of M, required rank)``.
    """
    for cols, need in rank_specs:
        if need > min(N, len(cols)):
            raise ValueError(f"rank {need} unattainable for {len(cols)} columns of an N={N} matrix")
    rng = seed if isinstance(seed, np.random.Generator) else np.random.default_rng(seed)
    for _ in range(retries):
        F = random_symplectic(field, N, rng)
        M = bottom_half(symplectic_inverse(F))
        if rank_specs_hold(M, rank_specs):
            return TransferMatrix(M)
    raise RetryExhausted(f"no SSO transfer matrix met the rank specs in {retries} attempts")


Op = tuple[int, int, int]


def ops_to_exponents(ops: Iterable[Op], N: int, field: Field) -> np.ndarray:
    """Stack ``(subsystem, x, z)`` triples into the length-2N vector ``[x; z]``."""
    xz = np.zeros(2 * N, dtype=np.int64)
    for i, x, z in ops:
        if not 0 <= i < N:
            raise IndexOutOfRange(f"subsystem {i} not in [0, {N})")
        xz[i] = field.add(xz[i], field.coerce(x))
        xz[N + i] = field.add(xz[N + i], field.coerce(z))
    return xz


def box_apply(label, ops: Iterable[Op], M: TransferMatrix) -> np.ndarray:
    """New label ``a + M [x; z]`` after applying ``X(x_i) Z(z_i)`` on each listed subsystem.

    Subsystems are 0-based.  Repeated subsystems accumulate, matching
    sequential application of the operators.
    """
    field = M.field
    a = field.coerce(np.asarray(label, dtype=np.int64).reshape(-1))
    if a.size != M.N:
        raise ShapeMismatch(f"label length {a.size} != N = {M.N}")
    xz = ops_to_exponents(ops, M.N, field)
    shift = field.matmul(M.M.data, xz.reshape(-1, 1)).reshape(-1)
    return field.add(a, shift)

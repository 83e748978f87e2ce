"""Entanglement-assisted sum computation over an N-sum box.

Construction outline.  Each server owns a block of box subsystems and, for
every stream it holds, applies the Pauli exponents ``V_k R_k^-1 W_k``
restricted to its own subsystems.  A stream's contribution to the box label
is then ``M_k V_k R_k^-1 W_k = U_k V'_k R_k^-1 W_k``, which lies in the
"useful" subspace ``<U>``.  Erasing the servers of pattern t can only add a
vector in ``<E_t>`` (the columns of M belonging to the erased subsystems),
and because ``[U, E_t]`` has full column rank the receiver separates the two
components with a left inverse and reads ``V_dec U v_u = sum_k W_k``.
"""

from __future__ import annotations

import functools
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Mapping, Sequence

import numpy as np

from .errors import (
    Infeasible,
    InfeasibleParameters,
    InvalidPattern,
    NotFullColumnRank,
    RetryExhausted,
    ShapeMismatch,
    UnknownServer,
    WitnessRejected,
    WrongBlockLength,
)
from .fq import MAX_ORDER, Field, construct_field, prime_power
from .instance import QemacInstance
from .linalg import (
    FqMatrix,
    hstack,
    intersect_column_spans,
    inverse,
    is_invertible,
    left_inverse,
    rank,
    solve_right,
)
from .nsum import DEFAULT_RETRIES, TransferMatrix, check_sso, rank_specs_hold, sample_sso_transfer


@dataclass(frozen=True)
class SchemeDims:
    lam: int
    q: int
    l: int
    alloc: tuple[int, ...]  # N_s for s = 0..S
    index_sets: tuple[tuple[int, ...], ...]
    u: int = 0

    @property
    def L(self) -> int:
        return self.lam * self.l

    @property
    def N(self) -> int:
        return sum(self.alloc)

    def costs(self) -> tuple[Fraction, ...]:
        """Download cost per server, ``N_s / l`` in units of log_d."""
        return tuple(Fraction(n, self.l) for n in self.alloc)

    def rate(self) -> Fraction:
        return Fraction(self.l, sum(self.alloc[1:]))

    def to_dict(self) -> dict:
        return {
            "lam": self.lam,
            "q": self.q,
            "l": self.l,
            "alloc": list(self.alloc),
            "u": self.u,
        }


def normalize_allocation(inst: QemacInstance, allocation: Sequence[int] | Mapping[int, int]) -> tuple[int, ...]:
    """Return ``(N_0, ..., N_S)``; a length-S sequence means ``N_0 = 0``."""
    if isinstance(allocation, Mapping):
        alloc = [int(allocation.get(s, 0)) for s in inst.servers]
        extra = set(allocation) - set(inst.servers)
        if extra:
            raise UnknownServer(f"allocation for unknown servers {sorted(extra)}")
    else:
        alloc = [int(n) for n in allocation]
        if len(alloc) == inst.S:
            alloc = [0] + alloc
        if len(alloc) != inst.S + 1:
            raise ShapeMismatch(f"allocation needs {inst.S} or {inst.S + 1} entries, got {len(alloc)}")
    if any(n < 0 for n in alloc):
        raise InfeasibleParameters("allocation must be nonnegative")
    if alloc[0] and not inst.helper:
        raise InfeasibleParameters("instance has no Server 0 but N_0 > 0")
    return tuple(alloc)


def index_sets_for(alloc: Sequence[int]) -> tuple[tuple[int, ...], ...]:
    """Contiguous subsystem blocks, Server 0 first."""
    out, start = [], 0
    for n in alloc:
        out.append(tuple(range(start, start + n)))
        start += n
    return tuple(out)


def smallest_lambda(d: int, bound: int) -> int:
    lam = 1
    while d**lam <= bound:
        lam += 1
    return lam


def field_for(d: int, lam: int) -> Field:
    p, r = prime_power(d)
    if d**lam > MAX_ORDER:
        raise InfeasibleParameters(f"q = {d}^{lam} exceeds the supported order {MAX_ORDER}")
    return construct_field(p, r * lam)


def ame_l_max(inst: QemacInstance, alloc: Sequence[int]) -> tuple[int, int]:
    """``(l_max, e_max)`` from the feasibility bound with weights 2 N_s."""
    N = sum(alloc)
    e_max = max(sum(2 * alloc[s] for s in e) for e in inst.E)
    w_min = min(min(N, sum(2 * alloc[s] for s in w)) for w in inst.W)
    return w_min - e_max, e_max


def plan_dimensions(
    inst: QemacInstance,
    allocation: Sequence[int] | Mapping[int, int],
    lam: int | None = None,
    l: int | None = None,
) -> SchemeDims:
    """Dimensions of an AME scheme; ``l`` defaults to the largest feasible value."""
    alloc = normalize_allocation(inst, allocation)
    N = sum(alloc)
    l_max, e_max = ame_l_max(inst, alloc)
    if N < e_max:
        raise Infeasible(f"N = {N} < max erased dimension {e_max}")
    if l_max <= 0:
        raise Infeasible(f"feasibility bound gives l <= {l_max}")
    if l is None:
        l = l_max
    elif not 1 <= l <= l_max:
        raise Infeasible(f"l = {l} outside [1, {l_max}]")
    if lam is None:
        lam = smallest_lambda(inst.d, max(inst.T * N, inst.K * l, N))
    q = field_for(inst.d, lam).q
    return SchemeDims(lam=lam, q=q, l=l, alloc=alloc, index_sets=index_sets_for(alloc), u=N - e_max)


# ---------------------------------------------------------------------------


@dataclass(eq=False)
class AmeScheme:
    inst: QemacInstance
    dims: SchemeDims
    M: TransferMatrix
    U: FqMatrix
    U_k: tuple[FqMatrix, ...]
    V: tuple[FqMatrix, ...]
    Vp: tuple[FqMatrix, ...]
    V_dec: FqMatrix
    # fixed at synthesis: servers precompensate with these, whatever V_dec says later
    R: tuple[FqMatrix, ...]
    seed: int | None = None
    attempts: dict = field(default_factory=dict)

    @property
    def field(self) -> Field:
        return self.M.field

    @property
    def N(self) -> int:
        return self.M.N

    # derived quantities ----------------------------------------------
    def stream_subsystems(self, k: int) -> list[int]:
        return [i for s in sorted(self.inst.W[k]) for i in self.dims.index_sets[s]]

    def erased_subsystems(self, t: int) -> list[int]:
        return [i for s in sorted(self.inst.E[t]) for i in self.dims.index_sets[s]]

    def M_k(self, k: int) -> FqMatrix:
        return self.M.submatrix(self.stream_subsystems(k))

    def E_t(self, t: int) -> FqMatrix:
        return self.M.submatrix(self.erased_subsystems(t))

    @functools.cached_property
    def precomp(self) -> tuple[FqMatrix, ...]:
        """``V_k R_k^-1``: exponents per unit of stream data."""
        return tuple(self.V[k] @ inverse(self.R[k]) for k in range(self.inst.K))

    @functools.cached_property
    def pattern_left_inverses(self) -> tuple[FqMatrix | None, ...]:
        """Left inverse of ``[U, E_t]`` per pattern; None where it is rank deficient.

        Deficient patterns only occur for witnesses injected with ``strict=False``.
        """
        out = []
        for t in range(self.inst.T):
            try:
                out.append(left_inverse(hstack([self.U, self.E_t(t)])))
            except NotFullColumnRank:
                out.append(None)
        return tuple(out)

    @functools.cached_property
    def decoders(self) -> tuple[FqMatrix | None, ...]:
        """``D_t = V_dec U [I_u, 0] [U, E_t]^-L`` (l x N)."""
        u = self.U.cols
        return tuple(
            None if Li is None else self.V_dec @ self.U @ Li.take_rows(range(u)) for Li in self.pattern_left_inverses
        )

    def decodable_patterns(self) -> list[int]:
        return [t for t, D in enumerate(self.decoders) if D is not None]

    @functools.cached_property
    def encoder(self) -> FqMatrix:
        """2N x K*l map from stacked stream data to the full exponent vector [x; z].

        Rows for subsystem i come from the precompensated V of every stream
        whose replica set contains the owner of i.
        """
        N, l, K = self.N, self.dims.l, self.inst.K
        field = self.field
        out = np.zeros((2 * N, K * l), dtype=np.int64)
        for k in range(K):
            P = self.precomp[k].data
            for j, i in enumerate(self.stream_subsystems(k)):
                out[i, k * l : (k + 1) * l] = field.add(out[i, k * l : (k + 1) * l], P[2 * j])
                out[N + i, k * l : (k + 1) * l] = field.add(out[N + i, k * l : (k + 1) * l], P[2 * j + 1])
        return FqMatrix(field, out)

    def costs(self) -> tuple[Fraction, ...]:
        return self.dims.costs()

    def rate(self) -> Fraction:
        return self.dims.rate()

    # checks ------------------------------------------------------------
    def kernel_checks(self) -> dict[str, bool]:
        """Exact matrix identities certifying every pattern decodes every stream."""
        K, T, l = self.inst.K, self.inst.T, self.dims.l
        I_l = FqMatrix.identity(self.field, l)
        D = self.decoders
        annihilates = all(D[t] is not None and (D[t] @ self.E_t(t)).is_zero() for t in range(T))
        picks = all(D[t] is not None and D[t] @ self.M_k(k) @ self.precomp[k] == I_l for t in range(T) for k in range(K))
        return {"noise_annihilation": annihilates, "stream_extraction": picks}

    def structure_checks(self) -> dict[str, bool]:
        K, T = self.inst.K, self.inst.T
        e = [len(self.erased_subsystems(t)) * 2 for t in range(T)]
        return {
            "sso": check_sso(self.M.M),
            "U_full_rank": rank(self.U) == self.U.cols,
            "U_E_full_rank": all(rank(hstack([self.U, self.E_t(t)])) == self.U.cols + e[t] for t in range(T)),
            "MV_eq_UVp": all(self.M_k(k) @ self.V[k] == self.U_k[k] @ self.Vp[k] for k in range(K)),
            "R_invertible": all(is_invertible(self.R[k]) for k in range(K)),
            "R_matches_V_dec": all(self.V_dec @ self.U_k[k] @ self.Vp[k] == self.R[k] for k in range(K)),
        }


# ---------------------------------------------------------------------------


def _rank_specs(inst: QemacInstance, dims: SchemeDims, N: int):
    tmp_sub = lambda subs: [c for i in subs for c in (i, N + i)]  # noqa: E731
    specs = []
    for w in inst.W:
        subs = [i for s in sorted(w) for i in dims.index_sets[s]]
        specs.append((tmp_sub(subs), min(N, 2 * len(subs))))
    for e in inst.E:
        subs = [i for s in sorted(e) for i in dims.index_sets[s]]
        if subs:
            specs.append((tmp_sub(subs), 2 * len(subs)))
    return specs


def _as_matrix(field: Field, A) -> FqMatrix:
    return A if isinstance(A, FqMatrix) else FqMatrix(field, A)


def synthesize_ame(
    inst: QemacInstance,
    dims: SchemeDims,
    seed: int = 0,
    M=None,
    U=None,
    V_dec=None,
    retries: int = DEFAULT_RETRIES,
    strict: bool = True,
) -> AmeScheme:
    """Sample-and-verify synthesis; any of M, U, V_dec may be injected as witnesses.

    Each stage draws from its own child seed, so a failure is attributable to
    one stage and re-running with the same seed reproduces the scheme.
    With ``strict=False`` an injected U that violates the full-rank condition
    for some patterns is kept, so verification can report which ones fail.
    """
    field = field_for(inst.d, dims.lam)
    N, l, K, T = dims.N, dims.l, inst.K, inst.T
    u = N - max(2 * sum(dims.alloc[s] for s in e) for e in inst.E)
    if len(dims.alloc) != inst.S + 1 or u < l:
        raise Infeasible("dims do not fit this instance")
    ss_M, ss_U, ss_V = np.random.SeedSequence(seed).spawn(3)
    attempts = {}

    # stage 1: transfer matrix
    specs = _rank_specs(inst, dims, N)
    if M is None:
        Mt = sample_sso_transfer(N, field, specs, seed=np.random.default_rng(ss_M), retries=retries)
        attempts["M"] = "sampled"
    else:
        Mm = _as_matrix(field, M.M if isinstance(M, TransferMatrix) else M)
        if Mm.shape != (N, 2 * N) or not check_sso(Mm):
            raise WitnessRejected("injected M is not an N x 2N SSO matrix")
        if not rank_specs_hold(Mm, specs):
            raise WitnessRejected("injected M violates the stream/erasure rank requirements")
        Mt = TransferMatrix(Mm)
        attempts["M"] = "injected"

    E = [Mt.submatrix([i for s in sorted(e) for i in dims.index_sets[s]]) for e in inst.E]

    def u_ok(Um: FqMatrix) -> bool:
        return all(rank(hstack([Um, Et])) == u + Et.cols for Et in E)

    # stage 2: useful subspace
    if U is None:
        rng = np.random.default_rng(ss_U)
        for a in range(1, retries + 1):
            Um = FqMatrix.random(field, N, u, rng)
            if u_ok(Um):
                attempts["U"] = a
                break
        else:
            raise RetryExhausted(f"no admissible U in {retries} attempts")
    else:
        Um = _as_matrix(field, U)
        if Um.shape != (N, u):
            raise WitnessRejected(f"injected U must be N x {u}")
        if u_ok(Um):
            attempts["U"] = "injected"
        elif strict:
            raise WitnessRejected("injected U leaves [U, E_t] rank deficient for some pattern")
        else:
            attempts["U"] = "injected-unverified"

    # stages 3-5
    Uk, Vp, V = [], [], []
    for k, w in enumerate(inst.W):
        Mk = Mt.submatrix([i for s in sorted(w) for i in dims.index_sets[s]])
        Ukk = intersect_column_spans(Um, Mk)
        if Ukk.cols < l:
            raise Infeasible(f"stream {k}: <U> ∩ <M_k> has dimension {Ukk.cols} < l = {l}")
        Vpk = FqMatrix(field, np.eye(Ukk.cols, l, dtype=np.int64))
        Uk.append(Ukk)
        Vp.append(Vpk)
        V.append(solve_right(Mk, Ukk @ Vpk))

    # stage 6: receiver combiner
    def vdec_ok(Vd: FqMatrix) -> bool:
        return all(is_invertible(Vd @ Uk[k] @ Vp[k]) for k in range(K))

    if V_dec is None:
        rng = np.random.default_rng(ss_V)
        for a in range(1, retries + 1):
            Vd = FqMatrix.random(field, l, N, rng)
            if vdec_ok(Vd):
                attempts["V_dec"] = a
                break
        else:
            raise RetryExhausted(f"no admissible V_dec in {retries} attempts")
    else:
        Vd = _as_matrix(field, V_dec)
        if Vd.shape != (l, N) or not vdec_ok(Vd):
            raise WitnessRejected("injected V_dec leaves some R_k singular")
        attempts["V_dec"] = "injected"

    scheme = AmeScheme(
        inst=inst,
        dims=SchemeDims(dims.lam, field.q, l, dims.alloc, dims.index_sets, u),
        M=Mt,
        U=Um,
        U_k=tuple(Uk),
        V=tuple(V),
        Vp=tuple(Vp),
        V_dec=Vd,
        R=tuple(Vd @ Uk[k] @ Vp[k] for k in range(K)),
        seed=seed,
        attempts=attempts,
    )
    return scheme


# ---------------------------------------------------------------------------


def _block(field: Field, data, l: int) -> np.ndarray:
    b = field.coerce(np.asarray(data, dtype=np.int64).reshape(-1))
    if b.size != l:
        raise WrongBlockLength(f"stream block has length {b.size}, expected {l}")
    return b


def encode_ame(scheme: AmeScheme, s: int, data) -> list[tuple[int, int, int]]:
    """Operations ``(i, x_i, z_i)`` for every subsystem of server s.

    ``data`` maps stream index -> length-l block (or is a sequence indexed by
    stream); only the streams replicated at s are read.  Server 0 always
    emits zeros.
    """
    inst, field, l = scheme.inst, scheme.field, scheme.dims.l
    if not isinstance(s, (int, np.integer)) or not 0 <= s <= inst.S:
        raise UnknownServer(f"server {s} not in [0, {inst.S}]")
    subs = scheme.dims.index_sets[s]
    x = np.zeros(len(subs), dtype=np.int64)
    z = np.zeros(len(subs), dtype=np.int64)
    if s > 0:
        for k in inst.streams_of(s):
            try:
                w = _block(field, data[k], l)
            except (KeyError, IndexError):
                raise WrongBlockLength(f"server {s} is missing data for stream {k}") from None
            contrib = field.matmul(scheme.precomp[k].data, w.reshape(-1, 1)).reshape(-1)
            stream_subs = scheme.stream_subsystems(k)
            for j, i in enumerate(subs):
                pos = stream_subs.index(i)
                x[j] = field.add(x[j], contrib[2 * pos])
                z[j] = field.add(z[j], contrib[2 * pos + 1])
    return [(i, int(x[j]), int(z[j])) for j, i in enumerate(subs)]


def label_for(scheme: AmeScheme, data) -> np.ndarray:
    """Box label after every server applies its operations to a zero-labelled box."""
    field, l, K = scheme.field, scheme.dims.l, scheme.inst.K
    w = np.concatenate([_block(field, data[k], l) for k in range(K)])
    xz = field.matmul(scheme.encoder.data, w.reshape(-1, 1))
    return field.matmul(scheme.M.M.data, xz).reshape(-1)


def decode_ame(scheme: AmeScheme, t: int, Y) -> np.ndarray:
    """``D_t Y``.  Accepts a length-N label or an N x n batch of labels."""
    if not isinstance(t, (int, np.integer)) or not 0 <= t < scheme.inst.T:
        raise InvalidPattern(f"pattern {t} not in [0, {scheme.inst.T})")
    field = scheme.field
    Y = field.coerce(np.asarray(Y, dtype=np.int64))
    vec = Y.ndim == 1
    Y2 = Y.reshape(-1, 1) if vec else Y
    if Y2.shape[0] != scheme.N:
        raise ShapeMismatch(f"label length {Y2.shape[0]} != N = {scheme.N}")
    D = scheme.decoders[t]
    if D is None:
        raise Infeasible(f"pattern {t} is not decodable: [U, E_t] is rank deficient")
    out = field.matmul(D.data, Y2)
    return out.reshape(-1) if vec else out

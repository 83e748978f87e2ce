"""Classical baseline: treat every qudit as a classical dit.

Server s sends ``N_s`` symbols of F_q, a linear function of the streams it
holds.  Encoders are drawn from a structured random ensemble: a random
"useful" subspace ``<U>`` of F_q^N that is disjoint from the span of every
erasable coordinate block is fixed first, and stream k is embedded in the
part of ``<U>`` supported on its own replicas.  Then every surviving
combination of coordinates still determines the projection of the received
word onto ``<U>``, hence the sum.  The decoder ``D_t`` is obtained by
solving ``D_t A_t = [I ... I]`` directly and the identity is re-checked.
"""

from __future__ import annotations

import functools
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Mapping, Sequence

import numpy as np

from .ame import SchemeDims, field_for, index_sets_for, normalize_allocation, smallest_lambda
from .errors import (
    Infeasible,
    InvalidPattern,
    LengthMismatch,
    RetryExhausted,
    UnknownServer,
    WrongBlockLength,
)
from .fq import Field
from .instance import QemacInstance
from .linalg import FqMatrix, hstack, intersect_column_spans, inverse, is_invertible, rank, solve_right, vstack
from .nsum import DEFAULT_RETRIES


def tqc_l_max(inst: QemacInstance, alloc: Sequence[int]) -> int:
    return min(sum(alloc[s] for s in w) for w in inst.W) - max(sum(alloc[s] for s in e) for e in inst.E)


def plan_tqc_dimensions(
    inst: QemacInstance,
    allocation: Sequence[int] | Mapping[int, int],
    lam: int | None = None,
    l: int | None = None,
) -> SchemeDims:
    """Dims for the classical scheme.  ``N_0`` is recorded but carries nothing."""
    alloc = normalize_allocation(inst, allocation)
    l_max = tqc_l_max(inst, alloc)
    if l_max <= 0:
        raise Infeasible(f"classical bound gives l <= {l_max}")
    if l is None:
        l = l_max
    elif not 1 <= l <= l_max:
        raise Infeasible(f"l = {l} outside [1, {l_max}]")
    N = sum(alloc[1:])
    if lam is None:
        lam = smallest_lambda(inst.d, max(inst.T * N, inst.K * l, N))
    q = field_for(inst.d, lam).q
    if q <= N:
        raise Infeasible(f"q = {q} must exceed N = {N}")
    e_max = max(sum(alloc[s] for s in e) for e in inst.E)
    return SchemeDims(lam=lam, q=q, l=l, alloc=alloc, index_sets=index_sets_for((0,) + alloc[1:]), u=N - e_max)


@dataclass(eq=False)
class TqcScheme:
    inst: QemacInstance
    dims: SchemeDims
    fq: Field
    G: dict[tuple[int, int], FqMatrix]  # (server, stream) -> N_s x l
    D: tuple[FqMatrix, ...]  # per pattern, l x (surviving symbols)
    seed: int | None = None
    attempts: dict = field(default_factory=dict)

    @property
    def field(self) -> Field:
        return self.fq

    def survivors(self, t: int) -> list[int]:
        return [s for s in range(1, self.inst.S + 1) if s not in self.inst.E[t]]

    def A_t(self, t: int) -> FqMatrix:
        """Stacked encoders of the surviving servers, zeros where a server lacks a stream."""
        l, K = self.dims.l, self.inst.K
        blocks = []
        for s in self.survivors(t):
            n = self.dims.alloc[s]
            row = [self.G.get((s, k), FqMatrix.zeros(self.fq, n, l)) for k in range(K)]
            blocks.append(hstack(row))
        return vstack(blocks, cols=K * l, field=self.fq)

    @functools.cached_property
    def target(self) -> FqMatrix:
        I = FqMatrix.identity(self.fq, self.dims.l)
        return hstack([I] * self.inst.K)

    def kernel_checks(self) -> dict[str, bool]:
        ok = all(self.D[t] @ self.A_t(t) == self.target for t in range(self.inst.T))
        return {"decoder_identity": ok}

    def costs(self) -> tuple[Fraction, ...]:
        return self.dims.costs()

    def rate(self) -> Fraction:
        return self.dims.rate()


def _coords(index_sets, servers) -> list[int]:
    return [i for s in sorted(servers) for i in index_sets[s]]


def synthesize_tqc(
    inst: QemacInstance,
    allocation: Sequence[int] | Mapping[int, int] | SchemeDims,
    seed: int = 0,
    l: int | None = None,
    lam: int | None = None,
    retries: int = DEFAULT_RETRIES,
) -> TqcScheme:
    dims = allocation if isinstance(allocation, SchemeDims) else plan_tqc_dimensions(inst, allocation, lam=lam, l=l)
    fq = field_for(inst.d, dims.lam)
    l, K, T = dims.l, inst.K, inst.T
    idx = dims.index_sets
    N = sum(dims.alloc[1:])
    u = dims.u
    I_N = FqMatrix.identity(fq, N)
    E = [I_N.columns(_coords(idx, e)) for e in inst.E]
    W = [I_N.columns(_coords(idx, w)) for w in inst.W]
    ss_U, ss_V = np.random.SeedSequence(seed).spawn(2)
    attempts = {}

    rng = np.random.default_rng(ss_U)
    for a in range(1, retries + 1):
        U = FqMatrix.random(fq, N, u, rng)
        if all(rank(hstack([U, Et])) == u + Et.cols for Et in E):
            attempts["U"] = a
            break
    else:
        raise RetryExhausted(f"no admissible U in {retries} attempts")

    Uk = []
    for k in range(K):
        B = intersect_column_spans(U, W[k])
        if B.cols < l:
            raise Infeasible(f"stream {k}: useful part on its replicas has dimension {B.cols} < l = {l}")
        Uk.append(B @ FqMatrix(fq, np.eye(B.cols, l, dtype=np.int64)))

    rng = np.random.default_rng(ss_V)
    for a in range(1, retries + 1):
        Vd = FqMatrix.random(fq, l, N, rng)
        R = [Vd @ Uk[k] for k in range(K)]
        if all(is_invertible(r) for r in R):
            attempts["V_dec"] = a
            break
    else:
        raise RetryExhausted(f"no admissible combiner in {retries} attempts")

    G = {}
    for k, w in enumerate(inst.W):
        full = Uk[k] @ inverse(R[k])
        for s in sorted(w):
            G[(s, k)] = full.take_rows(list(idx[s]))

    scheme = TqcScheme(inst=inst, dims=dims, fq=fq, G=G, D=(), seed=seed, attempts=attempts)
    D = []
    for t in range(T):
        A = scheme.A_t(t)
        try:
            D.append(solve_right(A.T, scheme.target.T).T)
        except Infeasible:
            raise Infeasible(f"pattern {t}: no decoder solves D A = [I ... I]") from None
    scheme.D = tuple(D)
    return scheme


def encode_tqc(scheme: TqcScheme, s: int, data) -> np.ndarray:
    """The ``N_s`` symbols sent by server s."""
    inst, fq, l = scheme.inst, scheme.fq, scheme.dims.l
    if not isinstance(s, (int, np.integer)) or not 0 <= s <= inst.S:
        raise UnknownServer(f"server {s} not in [0, {inst.S}]")
    n = scheme.dims.alloc[s] if s > 0 else 0
    out = np.zeros(n, dtype=np.int64)
    for k in inst.streams_of(s) if s > 0 else []:
        try:
            w = fq.coerce(np.asarray(data[k], dtype=np.int64).reshape(-1))
        except (KeyError, IndexError):
            raise WrongBlockLength(f"server {s} is missing data for stream {k}") from None
        if w.size != l:
            raise WrongBlockLength(f"stream block has length {w.size}, expected {l}")
        out = fq.add(out, fq.matmul(scheme.G[(s, k)].data, w.reshape(-1, 1)).reshape(-1))
    return out


def decode_tqc(scheme: TqcScheme, t: int, received) -> np.ndarray:
    """Apply ``D_t`` to the surviving servers' symbols, concatenated in ascending server order."""
    if not isinstance(t, (int, np.integer)) or not 0 <= t < scheme.inst.T:
        raise InvalidPattern(f"pattern {t} not in [0, {scheme.inst.T})")
    fq = scheme.fq
    r = fq.coerce(np.asarray(received, dtype=np.int64))
    vec = r.ndim == 1
    r2 = r.reshape(-1, 1) if vec else r
    need = scheme.D[t].cols
    if r2.shape[0] != need:
        raise LengthMismatch(f"received {r2.shape[0]} symbols, pattern {t} expects {need}")
    out = fq.matmul(scheme.D[t].data, r2)
    return out.reshape(-1) if vec else out

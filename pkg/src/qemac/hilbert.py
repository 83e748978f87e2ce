"""Dense Hilbert-space cross-check of the Pauli-frame abstraction (odd characteristic).

Single-qudit operators act on ``C^q`` with basis ``|a>``, ``a`` a field
element code: ``X(x)|a> = |a + x>`` and ``Z(z)|b> = w^{tr(b z)} |b>`` with
``w = exp(2 pi i / p)``.  The Weyl operator of ``v = [x; z]`` is
``c_v * prod_i X(x_i) Z(z_i)`` with ``c_v = w^{+tr(x.z)/2}``, which is the
same operator as ``w^{-tr(x.z)/2} prod_i Z(z_i) X(x_i)``.  With this phase
``W(u) W(v) = w^{tr(z_u.x_v - x_u.z_v)/2} W(u + v)``, so the operators of a
self-orthogonal subspace form a group isomorphic to the subspace.
Multi-qudit basis indices are big-endian in the subsystem order.

Weyl operators are monomial, so they are kept as (permutation, phase)
pairs and only materialized on request.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass

import numpy as np

from .errors import DimensionMismatch, EvenCharacteristicUnsupported, PhaseInconsistency, TooLarge
from .fq import Field
from .linalg import FqMatrix
from .nsum import TransferMatrix, symplectic_complete, transfer_to_G

MAX_DIM = 2**12
TOL = 1e-9


def _check(field: Field, N: int) -> int:
    if field.p == 2:
        raise EvenCharacteristicUnsupported("dense oracle needs odd characteristic")
    dim = field.q**N
    if dim > MAX_DIM:
        raise TooLarge(f"q^N = {dim} exceeds {MAX_DIM}")
    return dim


def basis_digits(field: Field, N: int) -> np.ndarray:
    """(q^N, N) array of subsystem codes for each basis index, big-endian."""
    q = field.q
    idx = np.arange(q**N, dtype=np.int64)
    return np.stack([(idx // q ** (N - 1 - i)) % q for i in range(N)], axis=1) if N else idx[:, None]


def digits_to_index(field: Field, digits: np.ndarray) -> np.ndarray:
    q = field.q
    N = digits.shape[-1]
    w = q ** np.arange(N - 1, -1, -1, dtype=np.int64)
    return (np.asarray(digits, dtype=np.int64) * w).sum(axis=-1)


def _omega_pow(field: Field, t) -> np.ndarray:
    return np.exp(2j * np.pi * np.asarray(t, dtype=np.float64) / field.p)


@dataclass(frozen=True)
class WeylOp:
    field: Field
    x: tuple[int, ...]
    z: tuple[int, ...]
    perm: np.ndarray  # out index for each input basis index
    phase: np.ndarray  # phase picked up by each input basis vector

    @property
    def N(self) -> int:
        return len(self.x)

    def apply(self, psi: np.ndarray) -> np.ndarray:
        """Apply to a vector or to the columns of a matrix."""
        psi = np.asarray(psi, dtype=complex)
        out = np.zeros_like(psi)
        if psi.ndim == 1:
            out[self.perm] = self.phase * psi
        else:
            out[self.perm] = self.phase[:, None] * psi
        return out

    def conjugate(self, rho: np.ndarray) -> np.ndarray:
        """``W rho W^dagger``."""
        return self.apply(self.apply(rho).conj().T).conj().T

    def dense(self) -> np.ndarray:
        dim = self.perm.size
        U = np.zeros((dim, dim), dtype=complex)
        U[self.perm, np.arange(dim)] = self.phase
        return U


def weyl(x, z, field: Field, N: int | None = None) -> WeylOp:
    x = field.coerce(np.asarray(x, dtype=np.int64).reshape(-1))
    z = field.coerce(np.asarray(z, dtype=np.int64).reshape(-1))
    N = x.size if N is None else N
    if x.size != N or z.size != N:
        raise DimensionMismatch(f"x, z must have length N = {N}")
    _check(field, N)
    digits = basis_digits(field, N)
    half = pow(2, -1, field.p)
    # Z part: w^{tr(sum_i b_i z_i)} on the input, then X shifts
    bz = np.zeros(digits.shape[0], dtype=np.int64)
    for i in range(N):
        bz = field.add(bz, field.mul(digits[:, i], z[i]))
    xz = 0
    for i in range(N):
        xz = field.add(xz, field.mul(x[i], z[i]))
    t = (field.trace(bz) + half * int(field.trace(xz))) % field.p
    shifted = field.add(digits, x[None, :]) if N else digits
    return WeylOp(field, tuple(int(v) for v in x), tuple(int(v) for v in z), digits_to_index(field, shifted), _omega_pow(field, t))


def weyl_vec(v, field: Field, N: int) -> WeylOp:
    v = np.asarray(v, dtype=np.int64).reshape(-1)
    return weyl(v[:N], v[N:], field, N)


def _span(G: FqMatrix) -> np.ndarray:
    """All q^N vectors of the column span (rows of the result)."""
    f = G.field
    k = G.cols
    coeffs = basis_digits(f, k) if k else np.zeros((1, 0), dtype=np.int64)
    return f.matmul(coeffs, G.data.T)


@dataclass
class StabilizerBasis:
    M: TransferMatrix
    H: FqMatrix
    states: np.ndarray  # column a (label index, big-endian) is |a>_M

    @property
    def field(self) -> Field:
        return self.M.field

    def label_index(self, a) -> int:
        return int(digits_to_index(self.field, np.asarray(a, dtype=np.int64).reshape(-1)))

    def state(self, a) -> np.ndarray:
        return self.states[:, self.label_index(a)]

    def gram_error(self) -> float:
        G = self.states.conj().T @ self.states
        return float(np.linalg.norm(G - np.eye(G.shape[0])))


def stabilizer_projector(M: TransferMatrix) -> np.ndarray:
    """``q^-N sum_{v in <G>} W(v)``: the projector onto the label-0 state."""
    f, N = M.field, M.N
    dim = _check(f, N)
    G = transfer_to_G(M.M)
    P = np.zeros((dim, dim), dtype=complex)
    cols = np.arange(dim)
    for v in _span(G):
        W = weyl_vec(v, f, N)
        P[W.perm, cols] += W.phase
    P /= dim
    if not np.allclose(P @ P, P, atol=1e-10) or abs(np.trace(P).real - 1) > 1e-10:
        raise PhaseInconsistency("restricted Weyl operators do not average to a rank-one projector")
    return P


def character_projector(M: TransferMatrix, a, H: FqMatrix | None = None) -> np.ndarray:
    """Projector onto ``|a>_M`` from the characters of the stabilizer group.

    ``W(g)`` acts on ``|a>_M = W(H a)|0>_M`` as ``w^{tr(z_g.x_h - z_h.x_g)}``
    with ``h = H a``; inverting the character sum gives the projector.
    """
    f, N = M.field, M.N
    dim = _check(f, N)
    if H is None:
        H = symplectic_complete(transfer_to_G(M.M)).H
    h = f.matmul(H.data, np.asarray(a, dtype=np.int64).reshape(-1, 1)).reshape(-1)
    xh, zh = h[:N], h[N:]
    P = np.zeros((dim, dim), dtype=complex)
    cols = np.arange(dim)
    for g in _span(transfer_to_G(M.M)):
        xg, zg = g[:N], g[N:]
        s = 0
        for i in range(N):
            s = f.add(s, f.sub(f.mul(zg[i], xh[i]), f.mul(zh[i], xg[i])))
        chi = _omega_pow(f, int(f.trace(s)))
        W = weyl_vec(g, f, N)
        P[W.perm, cols] += np.conj(chi) * W.phase
    return P / dim


def stabilizer_basis(M: TransferMatrix) -> StabilizerBasis:
    f, N = M.field, M.N
    dim = _check(f, N)
    P0 = stabilizer_projector(M)
    j = int(np.argmax(np.linalg.norm(P0, axis=0)))
    psi0 = P0[:, j] / np.linalg.norm(P0[:, j])
    H = symplectic_complete(transfer_to_G(M.M)).H
    labels = basis_digits(f, N)
    states = np.zeros((dim, dim), dtype=complex)
    hs = f.matmul(labels, H.data.T)  # row a -> H a
    for idx in range(dim):
        states[:, idx] = weyl_vec(hs[idx], f, N).apply(psi0)
    return StabilizerBasis(M=M, H=H, states=states)


def verify_box_evolution(M: TransferMatrix, trials: int | None = None, seed: int = 0, basis: StabilizerBasis | None = None) -> float:
    """Max ``|1 - |<a + M[x;z]| W(x, z) |a>||``; exhaustive when ``trials`` is None."""
    f, N = M.field, M.N
    B = basis or stabilizer_basis(M)
    q = f.q
    if trials is None:
        cases = itertools.product(range(q**N), range(q ** (2 * N)))
        labels = basis_digits(f, N)
        vs = basis_digits(f, 2 * N)
        pairs = ((labels[i], vs[j]) for i, j in cases)
    else:
        rng = np.random.default_rng(seed)
        pairs = ((f.random(N, rng), f.random(2 * N, rng)) for _ in range(trials))
    worst = 0.0
    for a, v in pairs:
        b = f.add(a, f.matmul(M.M.data, v.reshape(-1, 1)).reshape(-1))
        out = weyl_vec(v, f, N).apply(B.state(a))
        fid = abs(np.vdot(B.state(b), out))
        worst = max(worst, abs(1 - fid))
    return worst


def partial_trace_last(rho: np.ndarray, d_a: int, d_b: int) -> np.ndarray:
    return np.trace(rho.reshape(d_a, d_b, d_a, d_b), axis1=1, axis2=3)


def trace_distance(r1: np.ndarray, r2: np.ndarray) -> float:
    ev = np.linalg.eigvalsh((r1 - r2 + (r1 - r2).conj().T) / 2)
    return float(0.5 * np.abs(ev).sum())


def twirl(rho: np.ndarray, field: Field) -> np.ndarray:
    """Average of ``(I x W) rho (I x W)^dagger`` over all q^2 Weyl operators on the last qudit."""
    q = field.q
    dim = rho.shape[0]
    if rho.shape != (dim, dim) or dim % q:
        raise DimensionMismatch(f"density matrix of shape {rho.shape} has no trailing q = {q} factor")
    d_a = dim // q
    _check(field, 1)
    if dim > MAX_DIM:
        raise TooLarge(f"joint dimension {dim} exceeds {MAX_DIM}")
    out = np.zeros_like(rho, dtype=complex)
    for x in range(q):
        for z in range(q):
            W = weyl([x], [z], field, 1).dense()
            U = np.kron(np.eye(d_a), W)
            out += U @ rho @ U.conj().T
    return out / q**2


def verify_twirl(rho: np.ndarray, field: Field) -> float:
    """Trace distance between the twirled state and ``Tr_B(rho) x I/q``."""
    q = field.q
    d_a = rho.shape[0] // q
    target = np.kron(partial_trace_last(rho, d_a, q), np.eye(q) / q)
    return trace_distance(twirl(rho, field), target)


def maximally_entangled(q: int) -> np.ndarray:
    psi = np.zeros(q * q, dtype=complex)
    psi[[a * q + a for a in range(q)]] = 1 / np.sqrt(q)
    return np.outer(psi, psi.conj())


def replace_with_mixed(rho: np.ndarray, q: int, N: int, erased) -> np.ndarray:
    """Trace out the listed subsystems and put maximally mixed qudits in their place."""
    erased = sorted(set(erased))
    if not erased:
        return rho
    keep = [i for i in range(N) if i not in erased]
    order = keep + erased
    t = rho.reshape([q] * (2 * N)).transpose(order + [N + i for i in order])
    dk, de = q ** len(keep), q ** len(erased)
    red = np.trace(t.reshape(dk, de, dk, de), axis1=1, axis2=3)
    mixed = np.kron(red, np.eye(de) / de).reshape([q] * (2 * N))
    inv = np.argsort(order)
    return mixed.transpose(list(inv) + [N + i for i in inv]).reshape(q**N, q**N)


def verify_erasure_recovery(scheme, samples: int = 4, seed: int = 0) -> dict[int, float]:
    """Per pattern, minimum over data samples of the probability of decoding the right sum."""
    from .ame import decode_ame

    f, N = scheme.field, scheme.N
    _check(f, N)
    B = stabilizer_basis(scheme.M)
    rng = np.random.default_rng(seed)
    l, K = scheme.dims.l, scheme.inst.K
    labels = basis_digits(f, N)
    out = {}
    for t in range(scheme.inst.T):
        decoded_all = decode_ame(scheme, t, labels.T)  # l x q^N
        worst = 1.0
        for _ in range(samples):
            w = f.random((K, l), rng)
            xz = f.matmul(scheme.encoder.data, w.reshape(-1, 1)).reshape(-1)
            psi = weyl_vec(xz, f, N).apply(B.states[:, 0])
            rho = np.outer(psi, psi.conj())
            rho2 = replace_with_mixed(rho, f.q, N, scheme.erased_subsystems(t))
            probs = np.real(np.einsum("ia,ij,ja->a", B.states.conj(), rho2, B.states))
            target = np.zeros(l, dtype=np.int64)
            for k in range(K):
                target = f.add(target, w[k])
            ok = np.all(decoded_all == target[:, None], axis=0)
            worst = min(worst, float(probs[ok].sum()))
        out[t] = worst
    return out


def verify_superdense(field: Field) -> float:
    """Min probability of reading (a, b) after X(a)Z(b) on one half of the pair box."""
    f = field
    pair = TransferMatrix(FqMatrix(f, [[1, 1, 0, 0], [0, 0, 1, int(f.neg(1))]]))
    B = stabilizer_basis(pair)
    worst = 1.0
    for a in range(f.q):
        for b in range(f.q):
            psi = weyl([a, 0], [b, 0], f, 2).apply(B.states[:, 0])
            probs = np.abs(B.states.conj().T @ psi) ** 2
            lab = f.add(np.array([0, 0]), f.matmul(pair.M.data, np.array([[a], [0], [b], [0]])).reshape(-1))
            worst = min(worst, float(probs[B.label_index(lab)]))
    return worst

"""End-to-end protocol simulation at the Pauli-frame level.

Every trial starts from the all-zero box label, lets each surviving server
apply its encoding operations, models the erasure, and decodes.  Two erasure
models are run side by side:

``noise``
    the erased servers encode honestly, then their subsystems receive
    uniformly random ``X(x~) Z(z~)`` (the twirl that makes them independent
    of everything else);
``drop``
    the erased servers' operations never reach the label at all.

Beyond sampling, :func:`verify_scheme` records the exact kernel identities
of the scheme, which certify correctness for every data and noise value.
"""

from __future__ import annotations

import hashlib
import itertools
import json
from dataclasses import asdict, dataclass, field
from typing import Any

import numpy as np

from .ame import AmeScheme, decode_ame, encode_ame
from .cutset import ERASURES as CUTSET_ERASURES
from .cutset import CutSetScheme
from .errors import Infeasible, InvalidPattern, ShapeMismatch
from .instance import build_symmetric_instance  # noqa: F401  (re-exported)
from .nsum import box_apply
from .tqc import TqcScheme, decode_tqc, encode_tqc

DEFAULT_SEED = 20240601
DEFAULT_TRIALS = 1000
EXHAUSTIVE_LIMIT = 10**5
MODES = ("noise", "drop")

Scheme = AmeScheme | TqcScheme | CutSetScheme


@dataclass
class TrialRecord:
    data: list[list[int]]
    t: int
    mode: str
    noise: list[int] | None
    Y: list[int]
    decoded: list[int] | None
    expected: list[int]
    verdict: bool


def _rng(seed) -> np.random.Generator:
    return seed if isinstance(seed, np.random.Generator) else np.random.default_rng(seed)


def _data_array(scheme: Scheme, w) -> np.ndarray:
    if isinstance(scheme, CutSetScheme):
        K, l = 1, 4
    else:
        K, l = scheme.inst.K, scheme.dims.l
    arr = scheme.field.coerce(np.asarray(w, dtype=np.int64))
    if arr.shape != (K, l):
        raise ShapeMismatch(f"data must be K x l = {K} x {l}, got {arr.shape}")
    return arr


def _num_patterns(scheme: Scheme) -> int:
    return len(CUTSET_ERASURES) if isinstance(scheme, CutSetScheme) else scheme.inst.T


def run_trial(scheme: Scheme, w, t: int, noise=None, seed=None, mode: str = "noise") -> TrialRecord:
    """One protocol run.  ``noise`` (or a draw from ``seed``) is used only in ``noise`` mode."""
    if mode not in MODES:
        raise ValueError(f"mode must be one of {MODES}")
    w = _data_array(scheme, w)
    if not 0 <= t < _num_patterns(scheme):
        raise InvalidPattern(f"pattern {t} not in [0, {_num_patterns(scheme)})")
    fq = scheme.field
    rng = _rng(seed)
    expected = fq.coerce(w[0]) if isinstance(scheme, CutSetScheme) else _sum_blocks(fq, w)

    if isinstance(scheme, CutSetScheme):
        labels = scheme.run(w[0], t, rng, mode)
        Y = [int(v) for lab in labels if lab is not None for v in lab]
        decoded = scheme.decode(t, labels)
        r = None
    elif isinstance(scheme, AmeScheme):
        erased = scheme.inst.E[t]
        Y = np.zeros(scheme.N, dtype=np.int64)
        for s in range(scheme.inst.S + 1):
            if mode == "drop" and s in erased:
                continue
            Y = box_apply(Y, encode_ame(scheme, s, w), scheme.M)
        subs = scheme.erased_subsystems(t)
        r = None
        if mode == "noise" and subs:
            r = fq.coerce(np.asarray(noise, dtype=np.int64)) if noise is not None else fq.random(2 * len(subs), rng)
            if r.size != 2 * len(subs):
                raise ShapeMismatch(f"noise needs {2 * len(subs)} entries, got {r.size}")
            Y = box_apply(Y, [(i, int(r[2 * j]), int(r[2 * j + 1])) for j, i in enumerate(subs)], scheme.M)
        try:
            decoded = decode_ame(scheme, t, Y)
        except Infeasible:
            decoded = None
        Y = [int(v) for v in Y]
    else:
        received = [encode_tqc(scheme, s, w) for s in scheme.survivors(t)]
        Y = [int(v) for v in np.concatenate(received)] if received else []
        decoded = decode_tqc(scheme, t, np.asarray(Y, dtype=np.int64))
        r = None
    verdict = decoded is not None and bool(np.array_equal(np.asarray(decoded), expected))
    return TrialRecord(
        data=w.tolist(),
        t=t,
        mode=mode,
        noise=None if r is None else [int(v) for v in r],
        Y=Y,
        decoded=None if decoded is None else [int(v) for v in decoded],
        expected=[int(v) for v in expected],
        verdict=verdict,
    )


def _sum_blocks(fq, w: np.ndarray) -> np.ndarray:
    out = np.zeros(w.shape[1], dtype=np.int64)
    for row in w:
        out = fq.add(out, row)
    return out


# ---------------------------------------------------------------------------
# batched trials (same maps as run_trial, vectorized over data draws)


def _batch_data(scheme: Scheme, policy: str, n: int, rng) -> tuple[np.ndarray, bool]:
    """Columns are data draws, rows the stacked stream blocks."""
    fq = scheme.field
    if isinstance(scheme, CutSetScheme):
        K, l = 1, 4
    else:
        K, l = scheme.inst.K, scheme.dims.l
    size = K * l
    total = fq.q**size
    exhaustive = policy == "exhaustive" or (policy == "auto" and total <= EXHAUSTIVE_LIMIT)
    if exhaustive:
        idx = np.arange(total, dtype=np.int64)
        cols = [(idx // fq.q**j) % fq.q for j in range(size)]
        return np.vstack(cols) if cols else np.zeros((0, 1), dtype=np.int64), True
    return fq.random((size, n), rng), False


def _ame_batch(scheme: AmeScheme, X: np.ndarray, t: int, mode: str, rng) -> np.ndarray | None:
    fq, N = scheme.field, scheme.N
    xz = fq.matmul(scheme.encoder.data, X)
    if mode == "drop":
        for i in scheme.erased_subsystems(t):
            xz[i] = 0
            xz[N + i] = 0
    Y = fq.matmul(scheme.M.M.data, xz)
    n_e = len(scheme.erased_subsystems(t))
    if mode == "noise" and n_e:
        Y = fq.add(Y, fq.matmul(scheme.E_t(t).data, fq.random((2 * n_e, X.shape[1]), rng)))
    D = scheme.decoders[t]
    return None if D is None else fq.matmul(D.data, Y)


def _tqc_batch(scheme: TqcScheme, X: np.ndarray, t: int) -> np.ndarray:
    fq = scheme.field
    received = fq.matmul(scheme.A_t(t).data, X)
    return fq.matmul(scheme.D[t].data, received)


def _expected_batch(scheme: Scheme, X: np.ndarray) -> np.ndarray:
    if isinstance(scheme, CutSetScheme):
        return X
    fq, l = scheme.field, scheme.dims.l
    out = np.zeros((l, X.shape[1]), dtype=np.int64)
    for k in range(scheme.inst.K):
        out = fq.add(out, X[k * l : (k + 1) * l])
    return out


@dataclass
class VerificationReport:
    scheme_id: str
    kind: str
    policy: str
    exhaustive: bool
    seed: int
    trials: dict[int, int]
    failures: dict[str, dict[int, int]]
    kernel: dict[str, bool]
    extra: dict[str, Any] = field(default_factory=dict)

    @property
    def passed(self) -> bool:
        return all(v == 0 for m in self.failures.values() for v in m.values()) and all(self.kernel.values())

    @property
    def total_failures(self) -> int:
        return sum(v for m in self.failures.values() for v in m.values())

    def to_dict(self) -> dict:
        d = asdict(self)
        d["trials"] = {str(k): v for k, v in self.trials.items()}
        d["failures"] = {m: {str(k): v for k, v in f.items()} for m, f in self.failures.items()}
        d["passed"] = self.passed
        return d

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), sort_keys=True, indent=2)


def scheme_id(scheme: Scheme) -> str:
    from .serialize import scheme_to_dict

    blob = json.dumps(scheme_to_dict(scheme), sort_keys=True, separators=(",", ":"))
    return hashlib.sha256(blob.encode()).hexdigest()[:16]


def verify_scheme(
    scheme: Scheme,
    policy: str = "auto",
    n: int = DEFAULT_TRIALS,
    seed: int = DEFAULT_SEED,
    modes: tuple[str, ...] = MODES,
) -> VerificationReport:
    """Sampled or exhaustive trials for every pattern plus exact kernel checks.

    ``policy`` is ``auto`` (exhaustive when q^(K l) <= 1e5), ``exhaustive``
    or ``random``.  Failures are counted, never raised.
    """
    if policy not in ("auto", "exhaustive", "random"):
        raise ValueError(f"unknown policy {policy!r}")
    rng = np.random.default_rng(seed)
    T = _num_patterns(scheme)
    X, exhaustive = _batch_data(scheme, policy, n, rng)
    expected = _expected_batch(scheme, X)
    trials = {t: X.shape[1] for t in range(T)}
    failures: dict[str, dict[int, int]] = {m: {} for m in modes}
    for t in range(T):
        for mode in modes:
            if isinstance(scheme, AmeScheme):
                got = _ame_batch(scheme, X, t, mode, rng)
            elif isinstance(scheme, TqcScheme):
                got = _tqc_batch(scheme, X, t)
            else:
                got = None
            if isinstance(scheme, CutSetScheme):
                bad = 0
                for j in range(X.shape[1]):
                    labels = scheme.run(X[:, j], t, rng, mode)
                    bad += not np.array_equal(scheme.decode(t, labels), X[:, j])
            elif got is None:
                bad = X.shape[1]
            else:
                bad = int(np.any(got != expected, axis=0).sum())
            failures[mode][t] = bad
    if isinstance(scheme, CutSetScheme):
        kernel = {"mds_minors_invertible": _cutset_minors_ok(scheme)}
        kind = "cutset"
        extra = {"costs": [str(c) for c in scheme.costs()], "uniform_cost": str(scheme.uniform_cost())}
    else:
        kernel = scheme.kernel_checks()
        kind = "ame" if isinstance(scheme, AmeScheme) else "tqc"
        extra = {"costs": [str(c) for c in scheme.costs()], "rate": str(scheme.rate())}
        if isinstance(scheme, AmeScheme):
            extra["structure"] = scheme.structure_checks()
    return VerificationReport(
        scheme_id=scheme_id(scheme),
        kind=kind,
        policy=policy,
        exhaustive=exhaustive,
        seed=seed,
        trials=trials,
        failures=failures,
        kernel=kernel,
        extra=extra,
    )


def _cutset_minors_ok(scheme: CutSetScheme) -> bool:
    from .linalg import is_invertible

    ok = True
    for t in range(len(CUTSET_ERASURES)):
        erased = {i for s in CUTSET_ERASURES[t] for i in scheme.qudits_of(s)}
        pos = [p for b in scheme.boxes if not erased & set(b.qudits) for p in b.positions]
        ok &= len(pos) == 4 and is_invertible(scheme.G.columns(pos))
    return ok


def all_data(q: int, K: int, l: int):
    """Every data assignment, as K x l arrays (small instances only)."""
    for flat in itertools.product(range(q), repeat=K * l):
        yield np.asarray(flat, dtype=np.int64).reshape(K, l)

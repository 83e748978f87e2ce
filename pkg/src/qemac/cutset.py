"""Superdense + MDS scheme for the three-server single-stream erasure problem.

Servers 1 and 2 both know stream A in F_q^4 (q = d^z), server 3 knows
nothing, and any one server may be erased.  A is expanded by a (4, 8) MDS
code.  Eight qudits are split 3/3/2; qudits (Q1, Q7) and (Q4, Q8) form
superdense pairs, each carrying two coded symbols, and the rest carry one
symbol classically.  Whatever server is erased, exactly four coded symbols
stay readable.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction

import numpy as np

from .errors import FieldTooSmall, InvalidPattern, WrongBlockLength
from .fq import Field, construct_field, prime_power
from .linalg import FqMatrix, inverse, mds_generator
from .nsum import TransferMatrix

# 0-based qudit index -> owning server
QUDIT_OWNER = (1, 1, 1, 2, 2, 2, 3, 3)
ERASURES = (frozenset({1}), frozenset({2}), frozenset({3}))


@dataclass(frozen=True)
class Box:
    qudits: tuple[int, ...]
    M: TransferMatrix
    positions: tuple[int, ...]  # coded symbols carried by the label


@dataclass(frozen=True)
class CutSetScheme:
    d: int
    z: int
    fq: Field
    G: FqMatrix  # 4 x 8 MDS generator
    boxes: tuple[Box, ...]

    @property
    def q(self) -> int:
        return self.fq.q

    @property
    def field(self) -> Field:
        return self.fq

    def coded(self, A) -> np.ndarray:
        a = self.fq.coerce(np.asarray(A, dtype=np.int64).reshape(-1))
        if a.size != 4:
            raise WrongBlockLength(f"need 4 data symbols, got {a.size}")
        return self.fq.matmul(a.reshape(1, -1), self.G.data).reshape(-1)

    def exponents(self, A) -> np.ndarray:
        """8 x 2 array of (x, z) per qudit.  The partner qudit of a pair stays idle."""
        c = self.coded(A)
        xz = np.zeros((8, 2), dtype=np.int64)
        for box in self.boxes:
            head = box.qudits[0]
            if len(box.positions) == 2:
                xz[head] = c[list(box.positions)]
            else:
                xz[head, 0] = c[box.positions[0]]
        return xz

    def qudits_of(self, s: int) -> list[int]:
        return [i for i, o in enumerate(QUDIT_OWNER) if o == s]

    def run(self, A, t: int | None, rng: np.random.Generator, mode: str = "noise") -> list[np.ndarray | None]:
        """Box labels seen by the receiver when pattern t is erased.

        ``noise`` twirls the erased qudits (random exponents); ``drop`` never
        applies their operations.  Boxes touching an erased qudit are reported
        as None either way since the receiver cannot measure them.
        """
        xz = self.exponents(A)
        erased = set() if t is None else {i for s in ERASURES[t] for i in self.qudits_of(s)}
        for i in erased:
            if mode == "noise":
                xz[i] = self.fq.add(xz[i], self.fq.random(2, rng))
            else:
                xz[i] = 0
        labels: list[np.ndarray | None] = []
        for box in self.boxes:
            if erased & set(box.qudits):
                labels.append(None)
                continue
            v = np.concatenate([xz[list(box.qudits), 0], xz[list(box.qudits), 1]]).reshape(-1, 1)
            labels.append(self.fq.matmul(box.M.M.data, v).reshape(-1)[: len(box.positions)])
        return labels

    def decode(self, t: int, labels) -> np.ndarray:
        if not 0 <= t < len(ERASURES):
            raise InvalidPattern(f"pattern {t} not in [0, 3)")
        pos, vals = [], []
        for box, lab in zip(self.boxes, labels):
            if lab is None:
                continue
            pos += list(box.positions)
            vals += list(np.asarray(lab).reshape(-1))
        if len(pos) != 4:
            raise InvalidPattern(f"pattern {t} leaves {len(pos)} readable symbols, expected 4")
        minor = self.G.columns(pos)
        y = np.asarray(vals, dtype=np.int64).reshape(1, -1)
        return self.fq.matmul(y, inverse(minor).data).reshape(-1)

    def costs(self) -> tuple[Fraction, ...]:
        """Qudits sent per recovered symbol, servers 1..3."""
        return tuple(Fraction(len(self.qudits_of(s)), 4) for s in (1, 2, 3))

    def uniform_cost(self) -> Fraction:
        return max(self.costs())

    def verify(self, trials: int = 100, seed: int = 0, mode: str = "noise") -> dict:
        rng = np.random.default_rng(seed)
        failures = {t: 0 for t in range(len(ERASURES))}
        for _ in range(trials):
            A = self.fq.random(4, rng)
            for t in failures:
                if not np.array_equal(self.decode(t, self.run(A, t, rng, mode)), A):
                    failures[t] += 1
        return {"trials": trials, "failures": failures, "ok": not any(failures.values())}


def build_cutset_scheme(d: int, z: int) -> CutSetScheme:
    p, r = prime_power(d)
    if d**z < 8:
        raise FieldTooSmall(f"q = {d}^{z} < 8: no (4, 8) MDS code")
    fq = construct_field(p, r * z)
    G = mds_generator(4, 8, fq)
    pair = TransferMatrix(FqMatrix(fq, [[1, 1, 0, 0], [0, 0, 1, int(fq.neg(1))]]))
    single = TransferMatrix(FqMatrix(fq, [[1, 0]]))
    boxes = (
        Box((0, 6), pair, (0, 1)),
        Box((1,), single, (2,)),
        Box((2,), single, (3,)),
        Box((3, 7), pair, (4, 5)),
        Box((4,), single, (6,)),
        Box((5,), single, (7,)),
    )
    return CutSetScheme(d=d, z=z, fq=fq, G=G, boxes=boxes)

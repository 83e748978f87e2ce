"""Download-cost regions and symmetric capacity, in exact rational arithmetic.

A cost tuple is ``(Delta_0, Delta_1, ..., Delta_S)``.  Nothing in this module
touches floating point; inputs are converted with :class:`fractions.Fraction`
(so decimal strings like ``"0.125"`` are read exactly).
"""

from __future__ import annotations

import csv
import io
import itertools
from dataclasses import dataclass
from fractions import Fraction
from typing import Iterable, Sequence

from .errors import InfeasibleParameters, LengthMismatch
from .instance import QemacInstance, build_symmetric_instance
from .lp import feasible_point

Rational = Fraction | int | str


def _tuple(delta: Sequence[Rational], inst: QemacInstance) -> tuple[Fraction, ...]:
    if len(delta) != inst.S + 1:
        raise LengthMismatch(f"cost tuple has {len(delta)} entries, expected S + 1 = {inst.S + 1}")
    out = tuple(Fraction(x) for x in delta)
    if any(x < 0 for x in out):
        raise ValueError("costs must be nonnegative")
    return out


def in_region_ame(delta: Sequence[Rational], inst: QemacInstance) -> bool:
    D = _tuple(delta, inst)
    total = sum(D)
    for w in inst.W:
        avail = min(total, 2 * sum(D[s] for s in w))
        for e in inst.E:
            if avail - 2 * sum(D[s] for s in e) < 1:
                return False
    return True


def in_region_tqc(delta: Sequence[Rational], inst: QemacInstance) -> bool:
    D = _tuple(delta, inst)
    return all(sum(D[s] for s in w) - sum(D[s] for s in e) >= 1 for w in inst.W for e in inst.E)


def hull_constraints(delta: Sequence[Rational], inst: QemacInstance) -> tuple[list[list[Fraction]], list[Fraction]]:
    """LP rows ``A y <= b`` over ``y = (lam, u_0..u_S, v_0..v_S) >= 0``.

    ``u`` is a point of the AME region scaled by ``lam``, ``v`` a point of the
    TQC region scaled by ``1 - lam``; ``u + v <= Delta`` encodes the upward
    closures.
    """
    D = _tuple(delta, inst)
    n = inst.S + 1
    U = lambda s: 1 + s  # noqa: E731
    V = lambda s: 1 + n + s  # noqa: E731
    width = 1 + 2 * n
    rows: list[tuple] = []
    b: list[Fraction] = []

    def add(coeffs: dict[int, int], rhs) -> None:
        r = [0] * width
        for j, c in coeffs.items():
            r[j] += c
        rows.append(tuple(r))
        b.append(Fraction(rhs))

    for s in range(n):
        add({U(s): 1, V(s): 1}, D[s])
    add({0: 1}, 1)
    for e in inst.E:
        c = {0: 1}
        for s in range(n):
            c[U(s)] = c.get(U(s), 0) - 1
        for s in e:
            c[U(s)] += 2
        add(c, 0)
    for w in inst.W:
        for e in inst.E:
            c = {0: 1}
            for s in w:
                c[U(s)] = c.get(U(s), 0) - 2
            for s in e:
                c[U(s)] = c.get(U(s), 0) + 2
            add(c, 0)
            c = {0: -1}
            for s in w:
                c[V(s)] = c.get(V(s), 0) - 1
            for s in e:
                c[V(s)] = c.get(V(s), 0) + 1
            add(c, -1)
    seen: dict[tuple, int] = {}
    A_out, b_out = [], []
    for r, bi in zip(rows, b):
        key = r + (bi,)
        if key not in seen:
            seen[key] = len(A_out)
            A_out.append([Fraction(x) for x in r])
            b_out.append(bi)
    return A_out, b_out


def hull_witness(delta: Sequence[Rational], inst: QemacInstance) -> tuple[Fraction, list, list] | None:
    """``(lam, u, v)`` certifying membership in the achievable hull, or None."""
    A, b = hull_constraints(delta, inst)
    y = feasible_point(A, b)
    if y is None:
        return None
    for row, bi in zip(A, b):
        if sum(a * x for a, x in zip(row, y)) > bi:
            raise AssertionError("LP returned an infeasible point")
    n = inst.S + 1
    return y[0], y[1 : 1 + n], y[1 + n :]


def in_achievable_hull(delta: Sequence[Rational], inst: QemacInstance) -> bool:
    return hull_witness(delta, inst) is not None


# ---------------------------------------------------------------------------
# symmetric closed forms


def _check_params(S: int, alpha: int, beta: int) -> None:
    if not (S >= alpha > beta >= 0):
        raise InfeasibleParameters(f"need S >= alpha > beta >= 0, got ({S}, {alpha}, {beta})")


@dataclass(frozen=True)
class CapacityResult:
    S: int
    alpha: int
    beta: int
    delta0: Fraction
    delta_star: Fraction
    capacity: Fraction
    regime: str

    def as_row(self) -> dict:
        return {
            "S": self.S,
            "alpha": self.alpha,
            "beta": self.beta,
            "delta0_num": self.delta0.numerator,
            "delta0_den": self.delta0.denominator,
            "delta_star_num": self.delta_star.numerator,
            "delta_star_den": self.delta_star.denominator,
            "capacity_num": self.capacity.numerator,
            "capacity_den": self.capacity.denominator,
            "regime": self.regime,
        }


def symmetric_delta_star(S: int, alpha: int, beta: int, delta0: Rational = 0) -> CapacityResult:
    """Smallest uniform data-server cost given the helper cost ``delta0``."""
    _check_params(S, alpha, beta)
    d0 = Fraction(delta0)
    if d0 < 0:
        raise InfeasibleParameters("delta0 must be nonnegative")
    floor = Fraction(1, 2 * (alpha - beta))
    if S >= alpha + beta:
        other = (1 - d0) / (S - 2 * beta)
        side = "S>=alpha+beta"
    else:
        other = Fraction(1, alpha - beta) - d0 / (2 * alpha - S)
        side = "S<alpha+beta"
    ds = max(floor, other)
    kind = "ame-floor" if ds == floor else "entanglement-limited"
    return CapacityResult(S, alpha, beta, d0, ds, 1 / (S * ds), f"{side},{kind}")


def capacity_no_helper(S: int, alpha: int, beta: int) -> tuple[Fraction, str]:
    _check_params(S, alpha, beta)
    r_ame = min(Fraction(2 * (alpha - beta), S), Fraction(S - 2 * beta, S))
    r_tqc = Fraction(alpha - beta, S)
    if alpha + beta <= S <= 2 * alpha:
        regime = "alpha+beta<=S<=2alpha"
    elif S > 2 * alpha:
        regime = "S>=2alpha"
    else:
        regime = "S<=alpha+beta"
    return max(r_ame, r_tqc), regime


def saturation_threshold(S: int, alpha: int, beta: int) -> Fraction:
    _check_params(S, alpha, beta)
    return max(Fraction(0), Fraction(2 * alpha - S, 2 * (alpha - beta)))


def pairwise_superdense_delta0(S: int, alpha: int, beta: int) -> Fraction:
    """Helper cost needed by classical coding followed by pairwise superdense coding."""
    _check_params(S, alpha, beta)
    return Fraction(S, 2 * (alpha - beta))


def r_tqc(S: int, alpha: int, beta: int) -> Fraction:
    _check_params(S, alpha, beta)
    return Fraction(alpha - beta, S)


def r_ame(S: int, alpha: int, beta: int, delta0: Rational = 0) -> Fraction:
    """Best uniform rate inside the AME region alone; 0 where that region is empty."""
    _check_params(S, alpha, beta)
    d0 = Fraction(delta0)
    floor = Fraction(1, 2 * (alpha - beta))
    # uniform Delta must satisfy d0 + (S - 2 beta) Delta >= 1 and Delta >= floor
    if S > 2 * beta:
        delta = max(floor, (1 - d0) / (S - 2 * beta))
    else:
        # slack is nonincreasing in Delta; best case is Delta = floor
        if d0 + (S - 2 * beta) * floor < 1:
            return Fraction(0)
        delta = floor
    return 1 / (S * delta)


def eacq_check(delta: Sequence[Rational], S: int, beta: int) -> dict[str, bool]:
    """Single-stream singleton bounds: every (S-beta)-subset carries >= 1/2, total >= S/(S-beta)."""
    if len(delta) != S + 1:
        raise LengthMismatch(f"cost tuple has {len(delta)} entries, expected {S + 1}")
    if not 0 <= beta < S:
        raise InfeasibleParameters(f"need 0 <= beta < S, got beta={beta}, S={S}")
    D = [Fraction(x) for x in delta]
    subsets = all(sum(D[s] for s in I) >= Fraction(1, 2) for I in itertools.combinations(range(1, S + 1), S - beta))
    total = sum(D) >= Fraction(S, S - beta)
    return {"subset_bound": subsets, "total_bound": total}


@dataclass(frozen=True)
class CurvePoint:
    delta0: Fraction
    result: CapacityResult
    r_ame: Fraction
    r_tqc: Fraction


def curve(S: int, alpha: int, beta: int, grid: Iterable[Rational]) -> list[CurvePoint]:
    _check_params(S, alpha, beta)
    out = []
    for g in grid:
        d0 = Fraction(g)
        out.append(CurvePoint(d0, symmetric_delta_star(S, alpha, beta, d0), r_ame(S, alpha, beta, d0), r_tqc(S, alpha, beta)))
    return out


CSV_COLUMNS = (
    "S",
    "alpha",
    "beta",
    "delta0_num",
    "delta0_den",
    "delta_star_num",
    "delta_star_den",
    "capacity_num",
    "capacity_den",
    "regime",
)


def curve_csv(points: Iterable[CurvePoint]) -> str:
    buf = io.StringIO()
    w = csv.DictWriter(buf, fieldnames=CSV_COLUMNS, lineterminator="\n")
    w.writeheader()
    for p in points:
        w.writerow(p.result.as_row())
    return buf.getvalue()


def hull_delta_star(S: int, alpha: int, beta: int, delta0: Rational, tol: Fraction = Fraction(1, 2**12)) -> Fraction:
    """Bisection for the smallest uniform Delta with (delta0, Delta, ..., Delta) in the hull.

    Returns an upper end of a bracket of width <= tol; independent of the
    closed form, it only queries hull membership.
    """
    inst = build_symmetric_instance(2, S, alpha, beta)
    d0 = Fraction(delta0)
    inside = lambda x: in_achievable_hull([d0] + [x] * S, inst)  # noqa: E731
    lo, hi = Fraction(0), Fraction(1)
    while not inside(hi):
        lo, hi = hi, 2 * hi
    while hi - lo > tol:
        mid = (lo + hi) / 2
        if inside(mid):
            hi = mid
        else:
            lo = mid
    return hi

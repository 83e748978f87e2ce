"""``qemac`` command line: synth, verify, capacity, hilbert, example.

Exit codes: 0 ok, 1 usage error, 2 verification failure, 3 infeasible
parameters, 4 synthesis retries exhausted.  Every JSON document written
carries the instance hash, the seed and the tool version; output is
deterministic for a given input and seed.
"""

from __future__ import annotations

import argparse
import hashlib
import json
import os
import sys
from fractions import Fraction
from pathlib import Path

from . import __version__
from . import capacity as cap
from .ame import AmeScheme, plan_dimensions, synthesize_ame
from .cutset import CutSetScheme
from .errors import FieldTooSmall, Infeasible, InfeasibleParameters, QemacError, RetryExhausted
from .examples import cutset_example_scheme, bell_box, four_server_scheme, worked_example_scheme, worked_example_transfer
from .instance import build_symmetric_instance, instance_from_spec
from .nsum import DEFAULT_RETRIES
from .serialize import load, save, scheme_to_dict
from .sim import DEFAULT_SEED, DEFAULT_TRIALS, scheme_id, verify_scheme
from .tqc import synthesize_tqc

EXIT_OK, EXIT_USAGE, EXIT_VERIFY, EXIT_INFEASIBLE, EXIT_EXHAUSTED = 0, 1, 2, 3, 4

GRAM_TOL = 1e-8
EVOLUTION_TOL = 1e-9
TWIRL_TOL = 1e-10
RECOVERY_TOL = 1e-9


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(EXIT_USAGE, f"{self.prog}: error: {message}\n")


def _default_seed() -> int:
    raw = os.environ.get("QEMAC_SEED")
    if raw is None:
        return DEFAULT_SEED
    try:
        return int(raw)
    except ValueError:
        raise UsageError(f"QEMAC_SEED must be an integer, got {raw!r}") from None


def _frac(x: Fraction) -> str:
    x = Fraction(x)
    return f"{x.numerator}/{x.denominator}"


def _meta(spec_hash: str, seed) -> dict:
    return {"spec_hash": spec_hash, "seed": seed, "version": __version__}


def _emit(doc: dict, out: str | None) -> None:
    text = json.dumps(doc, sort_keys=True, indent=2) + "\n"
    if out:
        path = Path(out)
        tmp = path.with_name(path.name + ".tmp")
        tmp.write_text(text)
        tmp.replace(path)
    sys.stdout.write(text)


def spec_hash(scheme) -> str:
    if isinstance(scheme, CutSetScheme):
        blob = json.dumps({"cutset": {"d": scheme.d, "z": scheme.z}}, sort_keys=True, separators=(",", ":"))
        return hashlib.sha256(blob.encode()).hexdigest()
    return scheme.inst.digest()


def _summary(scheme) -> dict:
    doc = {"kind": scheme_to_dict(scheme)["kind"], "scheme_id": scheme_id(scheme)}
    if isinstance(scheme, CutSetScheme):
        doc["costs"] = [_frac(c) for c in scheme.costs()]
        doc["uniform_cost"] = _frac(scheme.uniform_cost())
        return doc
    costs = scheme.costs()
    doc.update(
        costs=[_frac(c) for c in costs],
        rate=_frac(scheme.rate()),
        q=scheme.field.q,
        l=scheme.dims.l,
        in_region_ame=cap.in_region_ame(costs, scheme.inst),
        in_region_tqc=cap.in_region_tqc(costs, scheme.inst),
        in_achievable_hull=cap.in_achievable_hull(costs, scheme.inst),
    )
    return doc


# ---------------------------------------------------------------------------
# synth


def _instance(args):
    if args.sym:
        d, S, a, b = args.sym
        return build_symmetric_instance(d, S, a, b)
    try:
        spec = json.loads(Path(args.spec).read_text())
    except (OSError, json.JSONDecodeError) as e:
        raise UsageError(f"cannot read instance spec: {e}") from None
    return instance_from_spec(spec)


def _allocation(args, inst) -> list[int]:
    if args.alloc:
        try:
            return [int(x) for x in args.alloc.split(",")]
        except ValueError:
            raise UsageError("--alloc takes comma-separated integers") from None
    return [args.n0] + [args.ns] * inst.S


def cmd_synth(args) -> int:
    inst = _instance(args)
    alloc = _allocation(args, inst)
    seed = args.seed
    if args.mode == "ame":
        dims = plan_dimensions(inst, alloc, lam=args.lam, l=args.l)
        scheme = synthesize_ame(inst, dims, seed=seed, retries=args.retries)
    else:
        scheme = synthesize_tqc(inst, alloc, seed=seed, l=args.l, lam=args.lam, retries=args.retries)
    meta = _meta(inst.digest(), seed)
    if args.out:
        save(scheme, args.out, meta=meta)
    _emit({"meta": meta, "summary": _summary(scheme), "out": args.out}, None)
    return EXIT_OK


# ---------------------------------------------------------------------------
# verify


def _load_scheme(path: str):
    try:
        return load(path)
    except (OSError, json.JSONDecodeError, KeyError, TypeError) as e:
        raise UsageError(f"cannot load scheme {path}: {e}") from None


def cmd_verify(args) -> int:
    scheme = _load_scheme(args.scheme)
    report = verify_scheme(scheme, policy=args.policy, n=args.trials, seed=args.seed)
    doc = {"meta": _meta(spec_hash(scheme), args.seed), "report": report.to_dict(), "summary": _summary(scheme)}
    _emit(doc, args.out)
    return EXIT_OK if report.passed else EXIT_VERIFY


# ---------------------------------------------------------------------------
# capacity


def _range(text: str, cast=Fraction) -> list:
    """``start:stop:step`` inclusive, or ``start:stop`` with unit step."""
    parts = text.split(":")
    if len(parts) not in (2, 3):
        raise UsageError(f"range must be start:stop[:step], got {text!r}")
    try:
        start, stop = cast(parts[0]), cast(parts[1])
        step = cast(parts[2]) if len(parts) == 3 else cast(1)
    except (ValueError, ZeroDivisionError):
        raise UsageError(f"bad range {text!r}") from None
    if step <= 0:
        raise UsageError("range step must be positive")
    out, x = [], start
    while x <= stop:
        out.append(x)
        x += step
    return out


def _capacity_triples(args) -> list[tuple[int, int, int]]:
    S, a, b = args.sym
    try:
        S, b = int(S), int(b)
    except ValueError:
        raise UsageError("S and beta must be integers") from None
    if args.sweep_alpha:
        alphas = [x for x in _range(args.sweep_alpha, int) if x > b]
    else:
        try:
            alphas = [int(a)]
        except ValueError:
            raise UsageError("alpha must be an integer unless --sweep-alpha is given") from None
    return [(S, x, b) for x in alphas]


def cmd_capacity(args) -> int:
    if args.grid:
        grid = _range(args.grid)
    else:
        try:
            grid = [Fraction(args.delta0)]
        except (ValueError, ZeroDivisionError):
            raise UsageError(f"bad --delta0 {args.delta0!r}") from None
    triples = _capacity_triples(args)
    points, rows = [], []
    for S, a, b in triples:
        for p in cap.curve(S, a, b, grid):
            points.append(p)
            r = p.result
            rows.append(
                {
                    "S": S,
                    "alpha": a,
                    "beta": b,
                    "delta0": _frac(p.delta0),
                    "delta_star": _frac(r.delta_star),
                    "capacity": _frac(r.capacity),
                    "regime": r.regime,
                    "r_ame": _frac(p.r_ame),
                    "r_tqc": _frac(p.r_tqc),
                }
            )
    if args.csv:
        text = cap.curve_csv(points)
        if args.out:
            Path(args.out).write_text(text)
        sys.stdout.write(text)
        return EXIT_OK
    params = [{"S": S, "alpha": a, "beta": b} for S, a, b in triples]
    h = hashlib.sha256(json.dumps(params, sort_keys=True, separators=(",", ":")).encode()).hexdigest()
    no_helper = []
    for S, a, b in triples:
        c, regime = cap.capacity_no_helper(S, a, b)
        no_helper.append(
            {
                "S": S,
                "alpha": a,
                "beta": b,
                "capacity": _frac(c),
                "regime": regime,
                "saturation_threshold": _frac(cap.saturation_threshold(S, a, b)),
            }
        )
    _emit({"meta": _meta(h, None), "points": rows, "no_helper": no_helper}, args.out)
    return EXIT_OK


# ---------------------------------------------------------------------------
# hilbert


def cmd_hilbert(args) -> int:
    from . import hilbert as hb

    metrics: dict = {}
    checks: dict[str, bool] = {}
    if args.builtin in ("bell", "example52"):
        M = bell_box(args.q) if args.builtin == "bell" else worked_example_transfer()
        B = hb.stabilizer_basis(M)
        trials = None if args.builtin == "bell" else args.trials
        metrics["gram_error"] = B.gram_error()
        metrics["evolution_deviation"] = hb.verify_box_evolution(M, trials=trials, seed=args.seed, basis=B)
        metrics["dimension"] = int(B.states.shape[0])
        metrics["exhaustive"] = trials is None
        checks["orthonormal"] = metrics["gram_error"] < GRAM_TOL
        checks["evolution"] = metrics["evolution_deviation"] < EVOLUTION_TOL
        spec = {"builtin": args.builtin, "q": M.field.q}
    elif args.builtin == "twirl":
        f = bell_box(args.q).field
        metrics["trace_distance"] = hb.verify_twirl(hb.maximally_entangled(f.q), f)
        checks["twirl"] = metrics["trace_distance"] < TWIRL_TOL
        spec = {"builtin": "twirl", "q": f.q}
    else:
        scheme = _load_scheme(args.scheme)
        if not isinstance(scheme, AmeScheme):
            raise UsageError("the dense oracle only checks AME schemes")
        B = hb.stabilizer_basis(scheme.M)
        metrics["gram_error"] = B.gram_error()
        metrics["evolution_deviation"] = hb.verify_box_evolution(scheme.M, trials=args.trials, seed=args.seed, basis=B)
        rec = hb.verify_erasure_recovery(scheme, seed=args.seed)
        metrics["recovery_probability"] = {str(t): p for t, p in rec.items()}
        checks["orthonormal"] = metrics["gram_error"] < GRAM_TOL
        checks["evolution"] = metrics["evolution_deviation"] < EVOLUTION_TOL
        checks["recovery"] = all(p >= 1 - RECOVERY_TOL for p in rec.values())
        spec = None
    if spec is None:
        h = spec_hash(scheme)
    else:
        h = hashlib.sha256(json.dumps(spec, sort_keys=True, separators=(",", ":")).encode()).hexdigest()
    checks = {k: bool(v) for k, v in checks.items()}
    ok = all(checks.values())
    _emit({"meta": _meta(h, args.seed), "metrics": metrics, "checks": checks, "passed": ok}, args.out)
    return EXIT_OK if ok else EXIT_VERIFY


# ---------------------------------------------------------------------------
# example


def cmd_example(args) -> int:
    if args.which == "fig1":
        scheme = four_server_scheme(seed=args.seed)
    elif args.which == "sec52":
        scheme = worked_example_scheme(repaired=not args.verbatim)
    else:
        scheme = cutset_example_scheme()
    meta = _meta(spec_hash(scheme), args.seed)
    if args.out:
        save(scheme, args.out, meta=meta)
    report = verify_scheme(scheme, n=args.trials, seed=args.seed)
    _emit({"meta": meta, "summary": _summary(scheme), "report": report.to_dict(), "out": args.out}, None)
    return EXIT_OK if report.passed else EXIT_VERIFY


# ---------------------------------------------------------------------------


def build_parser() -> argparse.ArgumentParser:
    seed = _default_seed()
    p = _Parser(prog="qemac", description="Erasure-tolerant sum computation over quantum MACs.")
    p.add_argument("--version", action="version", version=f"qemac {__version__}")
    sub = p.add_subparsers(dest="command", required=True, parser_class=_Parser)

    s = sub.add_parser("synth", help="synthesize an AME or TQC scheme")
    g = s.add_mutually_exclusive_group(required=True)
    g.add_argument("--sym", nargs=4, type=int, metavar=("D", "S", "ALPHA", "BETA"))
    g.add_argument("--spec", help="instance spec JSON file")
    s.add_argument("--mode", choices=("ame", "tqc"), default="ame")
    s.add_argument("--n0", type=int, default=0, help="Server 0 subsystems")
    s.add_argument("--ns", type=int, default=1, help="subsystems per data server")
    s.add_argument("--alloc", help="explicit N_0,...,N_S (overrides --n0/--ns)")
    s.add_argument("--lam", type=int, default=None, help="field extension degree, q = d^lam")
    s.add_argument("--l", type=int, default=None, help="symbols per stream per block")
    s.add_argument("--seed", type=int, default=seed)
    s.add_argument("--retries", type=int, default=DEFAULT_RETRIES)
    s.add_argument("--out", help="scheme JSON path")
    s.set_defaults(func=cmd_synth)

    v = sub.add_parser("verify", help="simulate and check a scheme file")
    v.add_argument("scheme")
    v.add_argument("--policy", choices=("auto", "exhaustive", "random"), default="auto")
    v.add_argument("--trials", type=int, default=DEFAULT_TRIALS)
    v.add_argument("--seed", type=int, default=seed)
    v.add_argument("--out", help="report JSON path")
    v.set_defaults(func=cmd_verify)

    c = sub.add_parser("capacity", help="symmetric capacity and cost curves")
    c.add_argument("--sym", nargs=3, required=True, metavar=("S", "ALPHA", "BETA"), help="ALPHA may be '.' with --sweep-alpha")
    c.add_argument("--delta0", default="0")
    c.add_argument("--grid", help="Delta_0 range start:stop:step (inclusive)")
    c.add_argument("--sweep-alpha", help="alpha range start:stop (inclusive); values <= beta are skipped")
    c.add_argument("--csv", action="store_true", help="emit CSV curve data instead of JSON")
    c.add_argument("--out")
    c.set_defaults(func=cmd_capacity)

    h = sub.add_parser("hilbert", help="dense state-vector cross-check (odd characteristic)")
    g = h.add_mutually_exclusive_group(required=True)
    g.add_argument("scheme", nargs="?", help="AME scheme file")
    g.add_argument("--builtin", choices=("bell", "example52", "twirl"))
    h.add_argument("--q", type=int, default=3)
    h.add_argument("--trials", type=int, default=200)
    h.add_argument("--seed", type=int, default=seed)
    h.add_argument("--out")
    h.set_defaults(func=cmd_hilbert)

    e = sub.add_parser("example", help="build and verify a named construction")
    e.add_argument("--which", choices=("fig1", "sec52", "appA"), required=True)
    e.add_argument("--verbatim", action="store_true", help="with --which sec52: use the printed U instead of the repaired one")
    e.add_argument("--trials", type=int, default=DEFAULT_TRIALS)
    e.add_argument("--seed", type=int, default=seed)
    e.add_argument("--out")
    e.set_defaults(func=cmd_example)
    return p


def main(argv: list[str] | None = None) -> int:
    try:
        parser = build_parser()
        args = parser.parse_args(argv)
        return args.func(args)
    except UsageError as e:
        print(f"qemac: error: {e}", file=sys.stderr)
        return EXIT_USAGE
    except RetryExhausted as e:
        print(f"qemac: retries exhausted: {e}", file=sys.stderr)
        return EXIT_EXHAUSTED
    except (Infeasible, InfeasibleParameters, FieldTooSmall) as e:
        print(f"qemac: infeasible: {e}", file=sys.stderr)
        return EXIT_INFEASIBLE
    except QemacError as e:
        print(f"qemac: error: {e}", file=sys.stderr)
        return EXIT_USAGE
    except SystemExit as e:
        return int(e.code) if isinstance(e.code, int) else EXIT_USAGE


if __name__ == "__main__":
    sys.exit(main())

"""JSON documents for synthesized schemes.

Matrices are stored as nested lists of integer element codes, together with
the field parameters needed to interpret them.  Loading uses the stored
matrices verbatim (nothing is re-derived or re-sampled), so a document that
was edited by hand stays edited and verification will notice.
"""

from __future__ import annotations

import json
from dataclasses import replace
from pathlib import Path
from typing import Any

import numpy as np

from .ame import AmeScheme, SchemeDims, index_sets_for
from .cutset import CutSetScheme, build_cutset_scheme
from .fq import Field, construct_field
from .instance import instance_from_spec
from .linalg import FqMatrix
from .nsum import TransferMatrix
from .tqc import TqcScheme

FORMAT_VERSION = 1


def field_to_dict(f: Field) -> dict:
    return {"p": f.p, "r": f.r, "modulus": list(f.modulus)}


def field_from_dict(d: dict) -> Field:
    f = construct_field(int(d["p"]), int(d["r"]))
    if list(f.modulus) != [int(c) for c in d["modulus"]]:
        raise ValueError(f"document modulus {d['modulus']} differs from the canonical one {list(f.modulus)}")
    return f


def _mat(m: FqMatrix) -> dict:
    return {"shape": list(m.shape), "data": m.tolist()}


def _unmat(f: Field, d: dict) -> FqMatrix:
    rows, cols = (int(x) for x in d["shape"])
    return FqMatrix(f, np.asarray(d["data"], dtype=np.int64).reshape(rows, cols))


def _dims_to_dict(dims: SchemeDims) -> dict:
    return dims.to_dict()


def _dims_from_dict(d: dict, tqc: bool = False) -> SchemeDims:
    alloc = tuple(int(n) for n in d["alloc"])
    idx = index_sets_for((0,) + alloc[1:]) if tqc else index_sets_for(alloc)
    return SchemeDims(lam=int(d["lam"]), q=int(d["q"]), l=int(d["l"]), alloc=alloc, index_sets=idx, u=int(d["u"]))


def scheme_to_dict(scheme) -> dict[str, Any]:
    if isinstance(scheme, AmeScheme):
        return {
            "format": FORMAT_VERSION,
            "kind": "ame",
            "field": field_to_dict(scheme.field),
            "instance": scheme.inst.to_dict(),
            "dims": _dims_to_dict(scheme.dims),
            "seed": scheme.seed,
            "attempts": {k: v for k, v in scheme.attempts.items()},
            "M": _mat(scheme.M.M),
            "U": _mat(scheme.U),
            "U_k": [_mat(m) for m in scheme.U_k],
            "V": [_mat(m) for m in scheme.V],
            "Vp": [_mat(m) for m in scheme.Vp],
            "V_dec": _mat(scheme.V_dec),
            "R": [_mat(m) for m in scheme.R],
        }
    if isinstance(scheme, TqcScheme):
        return {
            "format": FORMAT_VERSION,
            "kind": "tqc",
            "field": field_to_dict(scheme.field),
            "instance": scheme.inst.to_dict(),
            "dims": _dims_to_dict(scheme.dims),
            "seed": scheme.seed,
            "attempts": dict(scheme.attempts),
            "G": [{"server": s, "stream": k, "matrix": _mat(m)} for (s, k), m in sorted(scheme.G.items())],
            "D": [_mat(m) for m in scheme.D],
        }
    if isinstance(scheme, CutSetScheme):
        return {
            "format": FORMAT_VERSION,
            "kind": "cutset",
            "field": field_to_dict(scheme.field),
            "d": scheme.d,
            "z": scheme.z,
            "G": _mat(scheme.G),
        }
    raise TypeError(f"cannot serialize {type(scheme).__name__}")


def scheme_from_dict(doc: dict[str, Any]):
    kind = doc.get("kind")
    if kind == "cutset":
        s = build_cutset_scheme(int(doc["d"]), int(doc["z"]))
        stored = _unmat(s.field, doc["G"])
        if stored != s.G:
            s = replace(s, G=stored)
        return s
    f = field_from_dict(doc["field"])
    inst = instance_from_spec(doc["instance"])
    if kind == "ame":
        dims = _dims_from_dict(doc["dims"])
        return AmeScheme(
            inst=inst,
            dims=dims,
            M=TransferMatrix(_unmat(f, doc["M"])),
            U=_unmat(f, doc["U"]),
            U_k=tuple(_unmat(f, m) for m in doc["U_k"]),
            V=tuple(_unmat(f, m) for m in doc["V"]),
            Vp=tuple(_unmat(f, m) for m in doc["Vp"]),
            V_dec=_unmat(f, doc["V_dec"]),
            R=tuple(_unmat(f, m) for m in doc["R"]),
            seed=doc.get("seed"),
            attempts=dict(doc.get("attempts", {})),
        )
    if kind == "tqc":
        dims = _dims_from_dict(doc["dims"], tqc=True)
        G = {(int(g["server"]), int(g["stream"])): _unmat(f, g["matrix"]) for g in doc["G"]}
        return TqcScheme(
            inst=inst,
            dims=dims,
            fq=f,
            G=G,
            D=tuple(_unmat(f, m) for m in doc["D"]),
            seed=doc.get("seed"),
            attempts=dict(doc.get("attempts", {})),
        )
    raise ValueError(f"unknown scheme kind {kind!r}")


def dumps(scheme, meta: dict | None = None) -> str:
    """Canonical JSON; ``meta`` (provenance such as seed and version) is stored alongside."""
    doc = scheme_to_dict(scheme)
    if meta:
        doc["meta"] = meta
    return json.dumps(doc, sort_keys=True, indent=1)


def loads(text: str):
    return scheme_from_dict(json.loads(text))


def save(scheme, path: str | Path, meta: dict | None = None) -> None:
    """Write atomically: a temporary sibling is renamed over the target."""
    path = Path(path)
    tmp = path.with_name(path.name + ".tmp")
    tmp.write_text(dumps(scheme, meta) + "\n")
    tmp.replace(path)


def load(path: str | Path):
    return loads(Path(path).read_text())

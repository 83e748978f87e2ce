"""Problem instances: which servers replicate which stream, which answers may be lost.

Servers are numbered as in the problem statement: 0 is the auxiliary
(entanglement-only) server, 1..S are data-servers.  Streams and erasure
patterns are 0-based positions in ``W`` and ``E``.
"""

from __future__ import annotations

import hashlib
import itertools
import json
from dataclasses import dataclass, field
from typing import Any, Iterable, Mapping

from .errors import InfeasibleParameters, NonPrimeCharacteristic
from .fq import prime_power


@dataclass(frozen=True)
class QemacInstance:
    d: int
    S: int
    W: tuple[frozenset[int], ...]
    E: tuple[frozenset[int], ...]
    helper: bool = True
    symmetric: tuple[int, int] | None = field(default=None, compare=False)  # (alpha, beta)
    stream_ids: tuple[str, ...] | None = field(default=None, compare=False)

    def __post_init__(self):
        try:
            prime_power(self.d)
        except NonPrimeCharacteristic:
            raise InfeasibleParameters(f"d = {self.d} is not a prime power") from None
        if self.S < 1:
            raise InfeasibleParameters("need at least one data-server")
        if not self.W:
            raise InfeasibleParameters("need at least one stream")
        if not self.E:
            raise InfeasibleParameters("need at least one erasure pattern (use the empty set for none)")
        servers = set(range(1, self.S + 1))
        for k, w in enumerate(self.W):
            if not w:
                raise InfeasibleParameters(f"stream {k} has no replicas")
            if not w <= servers:
                raise InfeasibleParameters(f"stream {k} replicas {sorted(w)} outside [1, {self.S}]")
        for t, e in enumerate(self.E):
            if not e <= servers:
                raise InfeasibleParameters(f"erasure {t} = {sorted(e)} outside [1, {self.S}]")

    @property
    def K(self) -> int:
        return len(self.W)

    @property
    def T(self) -> int:
        return len(self.E)

    @property
    def servers(self) -> range:
        """All server indices 0..S (Server 0 included even if unused)."""
        return range(self.S + 1)

    def streams_of(self, s: int) -> list[int]:
        return [k for k, w in enumerate(self.W) if s in w]

    def to_dict(self) -> dict[str, Any]:
        if self.symmetric is not None:
            a, b = self.symmetric
            return {"d": self.d, "S": self.S, "alpha": a, "beta": b}
        ids = self.stream_ids or tuple(str(k) for k in range(self.K))
        return {
            "d": self.d,
            "servers": self.S,
            "helper": self.helper,
            "streams": [{"id": i, "replicas": sorted(w)} for i, w in zip(ids, self.W)],
            "erasures": [sorted(e) for e in self.E],
        }

    def digest(self) -> str:
        blob = json.dumps(self.to_dict(), sort_keys=True, separators=(",", ":"))
        return hashlib.sha256(blob.encode()).hexdigest()


def build_symmetric_instance(d: int, S: int, alpha: int, beta: int) -> QemacInstance:
    """Every alpha-subset of [S] holds one stream; any beta-subset may be erased.

    Streams and patterns are listed in lexicographic subset order.
    """
    if not (S >= alpha > beta >= 0):
        raise InfeasibleParameters(f"need S >= alpha > beta >= 0, got ({S}, {alpha}, {beta})")
    W = tuple(frozenset(c) for c in itertools.combinations(range(1, S + 1), alpha))
    E = tuple(frozenset(c) for c in itertools.combinations(range(1, S + 1), beta))
    return QemacInstance(d=d, S=S, W=W, E=E, helper=True, symmetric=(alpha, beta))


def general_instance(
    d: int,
    S: int,
    replicas: Iterable[Iterable[int]],
    erasures: Iterable[Iterable[int]],
    helper: bool = True,
    stream_ids: Iterable[str] | None = None,
) -> QemacInstance:
    W = tuple(frozenset(int(s) for s in r) for r in replicas)
    E = tuple(frozenset(int(s) for s in e) for e in erasures) or (frozenset(),)
    ids = tuple(stream_ids) if stream_ids is not None else None
    return QemacInstance(d=d, S=S, W=W, E=E, helper=helper, stream_ids=ids)


def instance_from_spec(spec: Mapping[str, Any]) -> QemacInstance:
    """Parse the JSON instance document (symmetric or general form)."""
    sym_keys = {"S", "alpha", "beta"}
    gen_keys = {"servers", "streams"}
    has_sym = bool(sym_keys & spec.keys())
    has_gen = bool(gen_keys & spec.keys())
    if has_sym == has_gen:
        raise InfeasibleParameters("instance spec must be exactly one of symmetric {d,S,alpha,beta} or general")
    d = int(spec["d"])
    if has_sym:
        return build_symmetric_instance(d, int(spec["S"]), int(spec["alpha"]), int(spec["beta"]))
    streams = spec["streams"]
    return general_instance(
        d,
        int(spec["servers"]),
        [s["replicas"] for s in streams],
        spec.get("erasures", [[]]),
        helper=bool(spec.get("helper", True)),
        stream_ids=[str(s.get("id", k)) for k, s in enumerate(streams)],
    )

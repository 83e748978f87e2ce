"""Exact arithmetic in GF(p^r).

Elements are encoded as integers ``c = c_0 + c_1 p + ... + c_{r-1} p^{r-1}``
where ``(c_0, ..., c_{r-1})`` are the coefficients of the element in the
polynomial basis ``1, x, ..., x^{r-1}`` modulo the field's irreducible
modulus.  Every arithmetic method of :class:`Field` accepts scalars or
``numpy`` integer arrays of such codes and works elementwise.

Addition of codes is digit-wise addition mod p, so the encoding is an
isomorphism of additive groups ``GF(p)^r -> GF(p^r)``; this is what lets a
block of base-field symbols be packed into one extension-field symbol
without disturbing sums.
"""

from __future__ import annotations

import functools
from dataclasses import dataclass
from typing import Iterable

import numpy as np

from .errors import NonPrimeCharacteristic, UnsupportedSize

MAX_ORDER = 2**31
# extension fields up to this order get full add/mul tables
_TABLE_LIMIT = 1024


def is_prime(n: int) -> bool:
    if n < 2:
        return False
    if n % 2 == 0:
        return n == 2
    f = 3
    while f * f <= n:
        if n % f == 0:
            return False
        f += 2
    return True


def prime_factors(n: int) -> list[int]:
    out = []
    f = 2
    while f * f <= n:
        if n % f == 0:
            out.append(f)
            while n % f == 0:
                n //= f
        f += 1
    if n > 1:
        out.append(n)
    return out


def prime_power(q: int) -> tuple[int, int]:
    """Split ``q = p**r``; raise if q is not a prime power."""
    if q < 2:
        raise NonPrimeCharacteristic(f"{q} is not a prime power")
    p = prime_factors(q)[0]
    r, rest = 0, q
    while rest % p == 0:
        rest //= p
        r += 1
    if rest != 1:
        raise NonPrimeCharacteristic(f"{q} is not a prime power")
    return p, r


# ---------------------------------------------------------------------------
# polynomials over GF(p): little-endian coefficient lists


def _trim(a: list[int]) -> list[int]:
    while a and a[-1] == 0:
        a.pop()
    return a


def _poly_mod(a: list[int], f: list[int], p: int) -> list[int]:
    a = _trim([c % p for c in a])
    n = len(f) - 1
    inv_lead = pow(f[-1], p - 2, p)
    while len(a) - 1 >= n:
        c = (a[-1] * inv_lead) % p
        shift = len(a) - 1 - n
        for i, fc in enumerate(f):
            a[shift + i] = (a[shift + i] - c * fc) % p
        _trim(a)
    return a


def _poly_mul(a: list[int], b: list[int], p: int) -> list[int]:
    if not a or not b:
        return []
    out = [0] * (len(a) + len(b) - 1)
    for i, ac in enumerate(a):
        if ac:
            for j, bc in enumerate(b):
                out[i + j] = (out[i + j] + ac * bc) % p
    return _trim(out)


def _poly_sub(a: list[int], b: list[int], p: int) -> list[int]:
    n = max(len(a), len(b))
    a = a + [0] * (n - len(a))
    b = b + [0] * (n - len(b))
    return _trim([(x - y) % p for x, y in zip(a, b)])


def _poly_powmod(a: list[int], e: int, f: list[int], p: int) -> list[int]:
    result = [1]
    base = _poly_mod(a, f, p)
    while e:
        if e & 1:
            result = _poly_mod(_poly_mul(result, base, p), f, p)
        base = _poly_mod(_poly_mul(base, base, p), f, p)
        e >>= 1
    return result


def _poly_gcd(a: list[int], b: list[int], p: int) -> list[int]:
    a, b = _trim(list(a)), _trim(list(b))
    while b:
        a, b = b, _poly_mod(a, b, p)
    return a


def _x_pow_p_iter(k: int, f: list[int], p: int) -> list[int]:
    """``x^(p^k) mod f`` by k successive p-th powers."""
    h = _poly_mod([0, 1], f, p)
    for _ in range(k):
        h = _poly_powmod(h, p, f, p)
    return h


def is_irreducible(f: Iterable[int], p: int) -> bool:
    """Rabin's irreducibility test for a polynomial over GF(p).

    ``f`` is given little-endian (``f[i]`` is the coefficient of ``x^i``).
    """
    f = _trim([c % p for c in f])
    n = len(f) - 1
    if n < 1:
        return False
    if n == 1:
        return True
    x = [0, 1]
    if _poly_sub(_x_pow_p_iter(n, f, p), x, p):
        return False
    for ell in prime_factors(n):
        h = _poly_sub(_x_pow_p_iter(n // ell, f, p), x, p)
        if len(_poly_gcd(f, h, p)) != 1:
            return False
    return True


def first_irreducible(p: int, r: int) -> tuple[int, ...]:
    """Lexicographically-first monic irreducible polynomial of degree r.

    Candidates ``x^r + c_{r-1} x^{r-1} + ... + c_0`` are scanned in increasing
    order of the base-p number ``c_{r-1} ... c_1 c_0`` (highest coefficient
    most significant).  Returned little-endian, length r + 1.
    """
    for n in range(p**r):
        coeffs = [(n // p**i) % p for i in range(r)] + [1]
        if r > 1 and coeffs[0] == 0:
            continue
        if is_irreducible(coeffs, p):
            return tuple(coeffs)
    raise AssertionError(f"no irreducible polynomial of degree {r} over GF({p})")


# ---------------------------------------------------------------------------


class Field:
    """The finite field GF(p^r) with a fixed polynomial-basis encoding."""

    def __init__(self, p: int, r: int, modulus: Iterable[int]):
        self.p = int(p)
        self.r = int(r)
        self.q = self.p**self.r
        self.modulus = tuple(int(c) for c in modulus)
        if len(self.modulus) != self.r + 1 or self.modulus[-1] != 1:
            raise ValueError("modulus must be monic of degree r")
        self._powers = np.array([self.p**i for i in range(self.r)], dtype=np.int64)
        self._red = np.array(self.modulus[:-1], dtype=np.int64)
        self._add_table = self._mul_table = self._inv_table = None
        if self.r > 1 and self.q <= _TABLE_LIMIT:
            e = np.arange(self.q, dtype=np.int64)
            self._add_table = self._from_digits((self._digits(e)[:, None] + self._digits(e)[None, :]) % self.p)
            self._mul_table = self._mul_generic(e[:, None], e[None, :])
            inv = np.zeros(self.q, dtype=np.int64)
            rows, cols = np.nonzero(self._mul_table == 1)
            inv[rows] = cols
            self._inv_table = inv

    # identity ---------------------------------------------------------
    def __eq__(self, other: object) -> bool:
        return isinstance(other, Field) and (self.p, self.r, self.modulus) == (other.p, other.r, other.modulus)

    def __hash__(self) -> int:
        return hash((self.p, self.r, self.modulus))

    def __repr__(self) -> str:
        return f"GF({self.p}^{self.r})" if self.r > 1 else f"GF({self.p})"

    @property
    def is_prime(self) -> bool:
        return self.r == 1

    def __call__(self, value: int | "Fq") -> "Fq":
        if isinstance(value, Fq):
            if value.field != self:
                raise ValueError("element belongs to a different field")
            return value
        return Fq(self, int(self.coerce(value)))

    def coerce(self, a) -> np.ndarray:
        """Validate/normalize integer codes.  Prime fields reduce mod p."""
        a = np.asarray(a, dtype=np.int64)
        if self.r == 1:
            return a % self.p
        if a.size and (a.min() < 0 or a.max() >= self.q):
            raise ValueError(f"codes must lie in [0, {self.q}) for {self!r}")
        return a

    def elements(self) -> np.ndarray:
        return np.arange(self.q, dtype=np.int64)

    def random(self, shape, rng: np.random.Generator) -> np.ndarray:
        return rng.integers(0, self.q, size=shape, dtype=np.int64)

    # digits -----------------------------------------------------------
    def _digits(self, a: np.ndarray) -> np.ndarray:
        return (a[..., None] // self._powers) % self.p

    def _from_digits(self, d: np.ndarray) -> np.ndarray:
        return (d * self._powers).sum(axis=-1)

    def coefficients(self, a) -> np.ndarray:
        """Polynomial-basis coefficient vectors, shape ``a.shape + (r,)``."""
        return self._digits(np.asarray(a, dtype=np.int64))

    def from_coefficients(self, d) -> np.ndarray:
        d = np.asarray(d, dtype=np.int64) % self.p
        return self._from_digits(d)

    def _mulx(self, d: np.ndarray) -> np.ndarray:
        top = d[..., -1:]
        shifted = np.concatenate([np.zeros_like(top), d[..., :-1]], axis=-1)
        return (shifted - top * self._red) % self.p

    def _mul_generic(self, a: np.ndarray, b: np.ndarray) -> np.ndarray:
        a, b = np.broadcast_arrays(np.asarray(a, dtype=np.int64), np.asarray(b, dtype=np.int64))
        da, db = self._digits(a), self._digits(b)
        acc = np.zeros_like(da)
        cur = da
        for j in range(self.r):
            acc = (acc + db[..., j : j + 1] * cur) % self.p
            if j + 1 < self.r:
                cur = self._mulx(cur)
        return self._from_digits(acc)

    # arithmetic -------------------------------------------------------
    def add(self, a, b) -> np.ndarray:
        a, b = np.asarray(a, dtype=np.int64), np.asarray(b, dtype=np.int64)
        if self.r == 1:
            return (a + b) % self.p
        if self._add_table is not None:
            return self._add_table[a, b]
        return self._from_digits((self._digits(a) + self._digits(b)) % self.p)

    def neg(self, a) -> np.ndarray:
        a = np.asarray(a, dtype=np.int64)
        if self.r == 1:
            return (-a) % self.p
        return self._from_digits((-self._digits(a)) % self.p)

    def sub(self, a, b) -> np.ndarray:
        return self.add(a, self.neg(b))

    def mul(self, a, b) -> np.ndarray:
        a, b = np.asarray(a, dtype=np.int64), np.asarray(b, dtype=np.int64)
        if self.r == 1:
            return (a * b) % self.p
        if self._mul_table is not None:
            return self._mul_table[a, b]
        return self._mul_generic(a, b)

    def pow(self, a, e: int) -> np.ndarray:
        a = np.asarray(a, dtype=np.int64)
        result = np.ones_like(a)
        base = a
        e = int(e)
        while e:
            if e & 1:
                result = self.mul(result, base)
            base = self.mul(base, base)
            e >>= 1
        return result

    def inv(self, a) -> np.ndarray:
        a = np.asarray(a, dtype=np.int64)
        if np.any(a == 0):
            raise ZeroDivisionError("zero has no inverse")
        if self._inv_table is not None:
            return self._inv_table[a]
        return self.pow(a, self.q - 2)

    def div(self, a, b) -> np.ndarray:
        return self.mul(a, self.inv(b))

    def trace(self, a) -> np.ndarray:
        """Absolute trace ``sum_i a^(p^i)``; result codes lie in [0, p)."""
        a = np.asarray(a, dtype=np.int64)
        acc = a
        t = a
        for _ in range(1, self.r):
            t = self.pow(t, self.p)
            acc = self.add(acc, t)
        return acc

    def matmul(self, A: np.ndarray, B: np.ndarray) -> np.ndarray:
        """Matrix product of two code arrays (2-D) over this field."""
        A = np.asarray(A, dtype=np.int64)
        B = np.asarray(B, dtype=np.int64)
        m, k = A.shape
        k2, n = B.shape
        if k != k2:
            raise ValueError(f"inner dimensions differ: {A.shape} @ {B.shape}")
        if k == 0:
            return np.zeros((m, n), dtype=np.int64)
        p = self.p
        if self.r == 1:
            chunk = max(1, (2**62) // max(1, (p - 1) ** 2))
            out = np.zeros((m, n), dtype=np.int64)
            for s in range(0, k, chunk):
                out = (out + (A[:, s : s + chunk] @ B[s : s + chunk, :]) % p) % p
            return out
        r = self.r
        # regular representation: multiplication by a is an r x r matrix over GF(p)
        cols = np.empty((m, k, r, r), dtype=np.int64)  # [.., j, i] = digit i of a*x^j
        cur = self._digits(A)
        for j in range(r):
            cols[:, :, j, :] = cur
            if j + 1 < r:
                cur = self._mulx(cur)
        A2 = cols.transpose(0, 3, 1, 2).reshape(m * r, k * r)
        B2 = self._digits(B).transpose(0, 2, 1).reshape(k * r, n)
        C = (A2 @ B2) % p
        return self._from_digits(C.reshape(m, r, n).transpose(0, 2, 1))


@functools.lru_cache(maxsize=None)
def construct_field(p: int, r: int = 1) -> Field:
    """Build GF(p^r) with the lexicographically-first monic irreducible modulus."""
    if not is_prime(p):
        raise NonPrimeCharacteristic(f"characteristic {p} is not prime")
    if r < 1:
        raise ValueError("extension degree must be >= 1")
    if p**r > MAX_ORDER:
        raise UnsupportedSize(f"q = {p}^{r} exceeds {MAX_ORDER}")
    modulus = (0, 1) if r == 1 else first_irreducible(p, r)
    return Field(p, r, modulus)


def field_of_order(q: int) -> Field:
    p, r = prime_power(q)
    return construct_field(p, r)


def field_trace(x: "Fq") -> "Fq":
    """Trace of an element down to the prime subfield (returned as an Fq of x's field)."""
    return Fq(x.field, int(x.field.trace(x.value)))


@dataclass(frozen=True)
class Fq:
    """A single field element; mostly for readable scalar code and tests."""

    field: Field
    value: int

    @property
    def coefficients(self) -> tuple[int, ...]:
        return tuple(int(c) for c in self.field.coefficients(self.value))

    def _other(self, other) -> int:
        if isinstance(other, Fq):
            if other.field != self.field:
                raise ValueError("mixed fields")
            return other.value
        return int(self.field.coerce(other))

    def _wrap(self, v) -> "Fq":
        return Fq(self.field, int(v))

    def __add__(self, other):
        return self._wrap(self.field.add(self.value, self._other(other)))

    __radd__ = __add__

    def __sub__(self, other):
        return self._wrap(self.field.sub(self.value, self._other(other)))

    def __rsub__(self, other):
        return self._wrap(self.field.sub(self._other(other), self.value))

    def __neg__(self):
        return self._wrap(self.field.neg(self.value))

    def __mul__(self, other):
        return self._wrap(self.field.mul(self.value, self._other(other)))

    __rmul__ = __mul__

    def __truediv__(self, other):
        return self._wrap(self.field.div(self.value, self._other(other)))

    def __pow__(self, e: int):
        if e < 0:
            return self.inverse() ** (-e)
        return self._wrap(self.field.pow(self.value, e))

    def inverse(self) -> "Fq":
        return self._wrap(self.field.inv(self.value))

    def trace(self) -> "Fq":
        return field_trace(self)

    def __int__(self) -> int:
        return self.value

    def __bool__(self) -> bool:
        return self.value != 0

    def __repr__(self) -> str:
        return f"{self.field!r}({self.value})"


def pack_symbols(symbols, d: int, lam: int) -> np.ndarray:
    """Group base-field codes in blocks of ``lam`` into GF(d^lam) codes.

    The map is additive, so sums of packed blocks unpack to blockwise sums.
    """
    s = np.asarray(symbols, dtype=np.int64)
    if s.shape[-1] % lam:
        raise ValueError(f"trailing length {s.shape[-1]} not a multiple of {lam}")
    s = s.reshape(s.shape[:-1] + (s.shape[-1] // lam, lam))
    weights = np.array([d**j for j in range(lam)], dtype=np.int64)
    return (s * weights).sum(axis=-1)


def unpack_symbols(codes, d: int, lam: int) -> np.ndarray:
    c = np.asarray(codes, dtype=np.int64)
    weights = np.array([d**j for j in range(lam)], dtype=np.int64)
    out = (c[..., None] // weights) % d
    return out.reshape(c.shape[:-1] + (c.shape[-1] * lam,))

"""Exact arithmetic in GF(q), q = p^k.

Elements are plain integers in ``[0, q)``: the base-p digits of an element
are the coefficients (constant term first) of its polynomial representative
modulo a fixed monic irreducible of degree k.  The modulus is the
lowest-index monic irreducible in that same base-p encoding, so encodings
agree across runs.

For q <= TABLE_LIMIT the full addition and multiplication tables are built
once and shared; geometry code indexes them directly.
"""
from __future__ import annotations

from dataclasses import dataclass
from functools import cached_property, lru_cache
from typing import List, Tuple

import numpy as np

from .errors import DivisionByZero, NotPrimePower

TABLE_LIMIT = 4096
MAX_ORDER = 1 << 20

FieldElement = int


def _factor_prime_power(q: int) -> Tuple[int, int]:
    if q < 2:
        raise NotPrimePower(f"{q} is not a prime power")
    p = None
    n = q
    f = 2
    while f * f <= n:
        if n % f == 0:
            p = f
            break
        f += 1
    if p is None:
        return q, 1
    k = 0
    while n % p == 0:
        n //= p
        k += 1
    if n != 1:
        raise NotPrimePower(f"{q} is not a prime power")
    return p, k


def _digits(x: int, p: int, k: int) -> List[int]:
    out = []
    for _ in range(k):
        out.append(x % p)
        x //= p
    return out


def _undigits(c, p: int) -> int:
    x = 0
    for a in reversed(c):
        x = x * p + a
    return x


def _poly_mod(a: List[int], m: List[int], p: int) -> List[int]:
    """Remainder of a modulo the monic polynomial m (coefficient lists, low first)."""
    a = list(a)
    dm = len(m) - 1
    for i in range(len(a) - 1, dm - 1, -1):
        c = a[i] % p
        if c:
            for j in range(dm + 1):
                a[i - dm + j] = (a[i - dm + j] - c * m[j]) % p
    return [x % p for x in a[:dm]] + [0] * max(0, dm - len(a))


def _is_irreducible(m: List[int], p: int) -> bool:
    """Trial division by every monic polynomial of degree 1..deg(m)//2."""
    k = len(m) - 1
    for deg in range(1, k // 2 + 1):
        for low in range(p ** deg):
            f = _digits(low, p, deg) + [1]
            r = _poly_mod(m, f, p)
            if not any(r):
                return False
    return True


def _lowest_irreducible(p: int, k: int) -> Tuple[int, ...]:
    if k == 1:
        return (0, 1)
    for low in range(p ** k):
        m = _digits(low, p, k) + [1]
        if m[0] == 0:
            continue
        if _is_irreducible(m, p):
            return tuple(m)
    raise AssertionError("no irreducible polynomial found")  # pragma: no cover


@dataclass(frozen=True)
class FieldSpec:
    p: int
    k: int
    modulus: Tuple[int, ...]

    @property
    def q(self) -> int:
        return self.p ** self.k

    def __repr__(self):
        return f"FieldSpec(q={self.q}, p={self.p}, k={self.k}, modulus={self.modulus})"

    # -- scalar arithmetic without tables ------------------------------------
    def _mul_poly(self, a: int, b: int) -> int:
        p, k = self.p, self.k
        if k == 1:
            return a * b % p
        da, db = _digits(a, p, k), _digits(b, p, k)
        prod = [0] * (2 * k - 1)
        for i, x in enumerate(da):
            if x:
                for j, y in enumerate(db):
                    prod[i + j] += x * y
        return _undigits(_poly_mod(prod, list(self.modulus), p), p)

    def _add_poly(self, a: int, b: int) -> int:
        p, k = self.p, self.k
        if k == 1:
            return (a + b) % p
        return _undigits([(x + y) % p for x, y in zip(_digits(a, p, k), _digits(b, p, k))], p)

    def _neg_poly(self, a: int) -> int:
        p, k = self.p, self.k
        if k == 1:
            return (-a) % p
        return _undigits([(-x) % p for x in _digits(a, p, k)], p)

    # -- tables ---------------------------------------------------------------
    @cached_property
    def has_tables(self) -> bool:
        return self.q <= TABLE_LIMIT

    @cached_property
    def add_table(self) -> np.ndarray:
        q, p, k = self.q, self.p, self.k
        dig = np.array([_digits(x, p, k) for x in range(q)], dtype=np.int64)
        s = (dig[:, None, :] + dig[None, :, :]) % p
        w = p ** np.arange(k, dtype=np.int64)
        t = (s * w).sum(axis=2).astype(np.int32)
        t.setflags(write=False)
        return t

    @cached_property
    def _exp_log(self):
        """Discrete exp/log tables from the lowest-index primitive element."""
        q = self.q
        order = q - 1
        primes = [f for f in range(2, order + 1) if order % f == 0 and all(f % g for g in range(2, int(f ** 0.5) + 1))]
        for g in range(2, q) if q > 2 else [1]:
            ok = True
            for r in primes:
                if self.pow(g, order // r) == 1:
                    ok = False
                    break
            if ok:
                break
        exp = np.zeros(2 * order, dtype=np.int64)
        log = np.zeros(q, dtype=np.int64)
        x = 1
        for i in range(order):
            exp[i] = x
            log[x] = i
            x = self._mul_poly(x, g)
        exp[order:] = exp[:order]
        return exp, log

    @cached_property
    def mul_table(self) -> np.ndarray:
        q = self.q
        exp, log = self._exp_log
        t = np.zeros((q, q), dtype=np.int32)
        lg = log[1:]
        t[1:, 1:] = exp[lg[:, None] + lg[None, :]]
        t.setflags(write=False)
        return t

    @cached_property
    def neg_table(self) -> np.ndarray:
        t = np.array([self._neg_poly(a) for a in range(self.q)], dtype=np.int32)
        t.setflags(write=False)
        return t

    @cached_property
    def inv_table(self) -> np.ndarray:
        """Multiplicative inverses; entry 0 is a 0 sentinel, never a valid inverse."""
        q = self.q
        exp, log = self._exp_log
        t = np.zeros(q, dtype=np.int32)
        t[1:] = exp[(q - 1 - log[1:]) % (q - 1)]
        t.setflags(write=False)
        return t

    @cached_property
    def sub_table(self) -> np.ndarray:
        t = self.add_table[:, self.neg_table]
        t.setflags(write=False)
        return t

    @cached_property
    def lists(self):
        """(add, mul, neg, inv) as nested Python lists for scalar inner loops."""
        return (self.add_table.tolist(), self.mul_table.tolist(),
                self.neg_table.tolist(), self.inv_table.tolist())

    # -- public scalar API ----------------------------------------------------
    def add(self, a: int, b: int) -> int:
        if self.has_tables:
            return int(self.add_table[a, b])
        return self._add_poly(a, b)

    def neg(self, a: int) -> int:
        return self._neg_poly(a)

    def sub(self, a: int, b: int) -> int:
        return self.add(a, self.neg(b))

    def mul(self, a: int, b: int) -> int:
        if self.has_tables:
            return int(self.mul_table[a, b])
        return self._mul_poly(a, b)

    def pow(self, a: int, e: int) -> int:
        result, base = 1, a
        while e:
            if e & 1:
                result = self._mul_poly(result, base)
            base = self._mul_poly(base, base)
            e >>= 1
        return result

    def inv(self, a: int) -> int:
        if a == 0:
            raise DivisionByZero("inverse of zero")
        if self.has_tables:
            return int(self.inv_table[a])
        return self.pow(a, self.q - 2)

    def elements(self) -> range:
        return range(self.q)


@lru_cache(maxsize=None)
def field_new(q: int) -> FieldSpec:
    """Return the canonical presentation of GF(q).

    >>> field_new(4).modulus
    (1, 1, 1)
    """
    if not isinstance(q, (int, np.integer)) or q < 2:
        raise NotPrimePower(f"{q!r} is not a prime power")
    q = int(q)
    if q > MAX_ORDER:
        raise NotPrimePower(f"q={q} exceeds the supported order 2^20")
    p, k = _factor_prime_power(q)
    return FieldSpec(p=p, k=k, modulus=_lowest_irreducible(p, k))


def add(spec: FieldSpec, a: int, b: int) -> int:
    return spec.add(a, b)


def mul(spec: FieldSpec, a: int, b: int) -> int:
    return spec.mul(a, b)


def inv(spec: FieldSpec, a: int) -> int:
    return spec.inv(a)


def coeffs(spec: FieldSpec, a: int) -> List[int]:
    """Coefficient vector (constant term first) of the element with index a."""
    return _digits(a, spec.p, spec.k)


def from_coeffs(spec: FieldSpec, c) -> int:
    return _undigits([x % spec.p for x in c], spec.p)

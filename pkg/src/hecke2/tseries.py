"""Truncated power series in the Hecke variables ``t_p`` over GF(2).

An element of ``O/m^d`` is a set of monomials (exponent tuples indexed by the
ascending prime list) of total degree ``< d``.  Monomials are ordered by
degree, then lexicographically with higher powers of smaller primes first:
``t5 < t7 < t11 < t13 < t5^2 < t5*t7 < ...``.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass
from functools import lru_cache
from typing import Iterable, Mapping

__all__ = ["TSeries", "AmbientMismatch", "monomial_key", "monomials_below", "format_monomial"]

Monomial = tuple[int, ...]


class AmbientMismatch(ValueError):
    pass


def monomial_key(m: Monomial) -> tuple:
    return (sum(m), tuple(-e for e in m))


@lru_cache(maxsize=None)
def monomials_of_degree(nvars: int, deg: int) -> tuple[Monomial, ...]:
    out = [m for m in itertools.product(range(deg + 1), repeat=nvars) if sum(m) == deg]
    return tuple(sorted(out, key=monomial_key))


@lru_cache(maxsize=None)
def monomials_below(nvars: int, d: int) -> tuple[Monomial, ...]:
    """All monomials of total degree ``< d`` in the fixed order."""
    return tuple(m for k in range(d) for m in monomials_of_degree(nvars, k))


def format_monomial(m: Monomial, primes: tuple[int, ...]) -> str:
    parts = []
    for p, e in zip(primes, m):
        if e == 1:
            parts.append(f"t{p}")
        elif e > 1:
            parts.append(f"t{p}^{e}")
    return "*".join(parts) or "1"


@dataclass(frozen=True)
class TSeries:
    primes: tuple[int, ...]
    degree: int
    terms: frozenset[Monomial]

    def __post_init__(self):
        if tuple(sorted(self.primes)) != self.primes or len(set(self.primes)) != len(self.primes):
            raise ValueError("primes must be strictly ascending")
        if self.degree < 1:
            raise ValueError("truncation degree must be >= 1")
        for m in self.terms:
            if len(m) != len(self.primes) or min(m, default=0) < 0:
                raise ValueError(f"bad monomial {m}")
            if sum(m) >= self.degree:
                raise ValueError(f"monomial {m} not below degree {self.degree}")

    # constructors

    @classmethod
    def zero(cls, primes: Iterable[int], degree: int) -> TSeries:
        return cls(tuple(primes), degree, frozenset())

    @classmethod
    def one(cls, primes: Iterable[int], degree: int) -> TSeries:
        primes = tuple(primes)
        return cls(primes, degree, frozenset({(0,) * len(primes)}))

    @classmethod
    def var(cls, p: int, primes: Iterable[int], degree: int) -> TSeries:
        primes = tuple(primes)
        if p not in primes:
            raise AmbientMismatch(f"t{p} is not a variable of {primes}")
        m = tuple(int(q == p) for q in primes)
        return cls(primes, degree, frozenset({m}) if degree > 1 else frozenset())

    @classmethod
    def from_terms(cls, primes: Iterable[int], degree: int, terms: Iterable[Monomial]) -> TSeries:
        """Sum of the given monomials (repeats cancel); high-degree ones are dropped."""
        acc: set[Monomial] = set()
        for m in terms:
            if sum(m) < degree:
                acc ^= {tuple(m)}
        return cls(tuple(primes), degree, frozenset(acc))

    @classmethod
    def from_exponents(cls, primes: Iterable[int], degree: int, exps: Mapping[int, int]) -> TSeries:
        primes = tuple(primes)
        unknown = set(exps) - set(primes)
        if unknown:
            raise AmbientMismatch(f"variables {sorted(unknown)} not in {primes}")
        m = tuple(exps.get(p, 0) for p in primes)
        return cls.from_terms(primes, degree, [m])

    @classmethod
    def from_vector(cls, primes: Iterable[int], degree: int, v: int) -> TSeries:
        primes = tuple(primes)
        order = monomials_below(len(primes), degree)
        return cls(primes, degree, frozenset(m for j, m in enumerate(order) if (v >> j) & 1))

    # coordinates

    def to_vector(self) -> int:
        index = {m: j for j, m in enumerate(monomials_below(len(self.primes), self.degree))}
        v = 0
        for m in self.terms:
            v |= 1 << index[m]
        return v

    def sorted_terms(self) -> list[Monomial]:
        return sorted(self.terms, key=monomial_key)

    def exponent_maps(self) -> list[dict[int, int]]:
        return [{p: e for p, e in zip(self.primes, m) if e} for m in self.sorted_terms()]

    # ring structure

    def _check(self, other: TSeries) -> None:
        if (self.primes, self.degree) != (other.primes, other.degree):
            raise AmbientMismatch(
                f"ambient {self.primes}/m^{self.degree} vs {other.primes}/m^{other.degree}"
            )

    def __add__(self, other: TSeries) -> TSeries:
        self._check(other)
        return TSeries(self.primes, self.degree, self.terms ^ other.terms)

    __sub__ = __add__

    def __mul__(self, other: TSeries) -> TSeries:
        self._check(other)
        acc: set[Monomial] = set()
        d = self.degree
        for a in self.terms:
            da = sum(a)
            for b in other.terms:
                if da + sum(b) < d:
                    acc ^= {tuple(x + y for x, y in zip(a, b))}
        return TSeries(self.primes, d, frozenset(acc))

    def __pow__(self, k: int) -> TSeries:
        out = TSeries.one(self.primes, self.degree)
        for _ in range(k):
            out = out * self
        return out

    def square(self) -> TSeries:
        """Frobenius: in characteristic 2 the square of a sum is the sum of squares."""
        return TSeries.from_terms(self.primes, self.degree, [tuple(2 * e for e in m) for m in self.terms])

    def __bool__(self) -> bool:
        return bool(self.terms)

    def is_zero(self) -> bool:
        return not self.terms

    def order(self) -> int | None:
        """Lowest total degree present (``None`` for zero)."""
        return min((sum(m) for m in self.terms), default=None)

    def homogeneous_part(self, k: int) -> TSeries:
        return TSeries(self.primes, self.degree, frozenset(m for m in self.terms if sum(m) == k))

    def leading_form(self) -> TSeries:
        k = self.order()
        return self if k is None else self.homogeneous_part(k)

    def truncate(self, degree: int) -> TSeries:
        """Re-truncate at ``degree`` (raising the degree keeps every term)."""
        return TSeries.from_terms(self.primes, degree, self.terms)

    def embed(self, primes: Iterable[int]) -> TSeries:
        """View as an element over a larger variable set."""
        primes = tuple(primes)
        if not set(self.primes) <= set(primes):
            raise AmbientMismatch(f"{self.primes} is not contained in {primes}")
        pos = [primes.index(p) for p in self.primes]
        terms = []
        for m in self.terms:
            full = [0] * len(primes)
            for i, e in zip(pos, m):
                full[i] = e
            terms.append(tuple(full))
        return TSeries(primes, self.degree, frozenset(terms))

    def variables_used(self) -> set[int]:
        return {p for m in self.terms for p, e in zip(self.primes, m) if e}

    def __str__(self) -> str:
        if not self.terms:
            return "0"
        return " + ".join(format_monomial(m, self.primes) for m in self.sorted_terms())

    def __repr__(self) -> str:
        return f"TSeries({self}, primes={self.primes}, mod m^{self.degree})"

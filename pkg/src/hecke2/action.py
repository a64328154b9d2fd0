"""The action of ``O = Z/2[[t_p]]`` on a finite Hecke-stable chunk.

Once the operators ``T_p`` are known as commuting nilpotent matrices ``M_p``
on a finite-dimensional stable subspace, everything m-adic reduces to linear
algebra inside the matrix algebra they generate.  Write ``A^(d)`` for the
span of all monomials ``mu(M)`` of total degree ``>= d``.  Then ``u`` in
``O/m^d`` is well defined as an operator modulo ``A^(d)``, so

* ``u`` annihilates the chunk mod ``m^d``  iff  ``u(M) in A^(d)``;
* ``T_p = u`` mod ``m^d``  iff  ``M_p - u(M) in A^(d)``.

Both become linear conditions on the coefficients of ``u`` after taking
normal forms modulo ``A^(d)``.  Once ``d`` reaches the nilpotency index of
the algebra, ``A^(d) = 0`` and the answers are exact for the chunk.
"""

from __future__ import annotations

from functools import cached_property
from typing import Mapping, Sequence

from .linalg2 import BitMatrix, SpanBasis, echelonize, kernel_basis
from .tseries import TSeries, monomials_below

__all__ = ["HeckeModule", "NotCommuting", "relations", "express"]


class NotCommuting(ValueError):
    pass


def _combo_to_columns(combo: int, accepted: Sequence[int]) -> int:
    out = 0
    while combo:
        low = combo & -combo
        out |= 1 << accepted[low.bit_length() - 1]
        combo ^= low
    return out


def relations(vectors: Sequence[int]) -> list[int]:
    """Basis of the linear relations among ``vectors``, in reduced echelon form.

    Bit ``j`` of a relation selects ``vectors[j]``; the selected vectors sum
    to zero.  Equivalent to ``kernel_basis`` of the matrix with these
    columns, but never materialises the (often very tall) matrix.
    """
    span = SpanBasis()
    accepted: list[int] = []
    rels = []
    for j, v in enumerate(vectors):
        res, combo = span.reduce(v)
        if res:
            span.add(v)
            accepted.append(j)
        else:
            rels.append(_combo_to_columns(combo, accepted) | (1 << j))
    if not rels:
        return []
    ech = echelonize(BitMatrix(len(rels), len(vectors), rels))
    return [r for r in ech.reduced.rows if r]


def express(vectors: Sequence[int], target: int) -> int | None:
    """Coefficients ``c`` with ``sum c_j vectors[j] = target``, or ``None``.

    Vectors that depend on earlier ones get coefficient zero, which is the
    free-variables-zero solution of the column system.
    """
    span = SpanBasis()
    accepted: list[int] = []
    for j, v in enumerate(vectors):
        if span.add(v):
            accepted.append(j)
    res, combo = span.reduce(target)
    if res:
        return None
    return _combo_to_columns(combo, accepted)


class HeckeModule:
    """Commuting nilpotent matrices ``M_p`` (column convention) on ``GF(2)^n``."""

    def __init__(self, mats: Mapping[int, BitMatrix], check: bool = True):
        self.primes = tuple(sorted(mats))
        if not self.primes:
            raise ValueError("need at least one operator")
        self.mats = {p: mats[p] for p in self.primes}
        dims = {(m.nrows, m.ncols) for m in self.mats.values()}
        if len(dims) != 1 or next(iter(dims))[0] != next(iter(dims))[1]:
            raise ValueError("operators must be square of a common size")
        self.dim = next(iter(dims))[0]
        self._mono: dict[tuple[int, ...], BitMatrix] = {}
        if check:
            self.check_commuting()

    def check_commuting(self) -> None:
        for i, p in enumerate(self.primes):
            for q in self.primes[i + 1:]:
                if self.mats[p] @ self.mats[q] != self.mats[q] @ self.mats[p]:
                    raise NotCommuting(f"T_{p} and T_{q} do not commute on the chunk")

    def act(self, p: int, v: int) -> int:
        return self.mats[p].apply(v)

    def monomial_matrix(self, m: tuple[int, ...]) -> BitMatrix:
        """``prod M_p^{e_p}`` for an exponent tuple over ``self.primes``."""
        if m in self._mono:
            return self._mono[m]
        if not any(m):
            out = BitMatrix.identity(self.dim)
        else:
            i = max(k for k, e in enumerate(m) if e)
            prev = list(m)
            prev[i] -= 1
            out = self.mats[self.primes[i]] @ self.monomial_matrix(tuple(prev))
        self._mono[m] = out
        return out

    def evaluate(self, u: TSeries) -> BitMatrix:
        if u.primes != self.primes:
            u = u.embed(self.primes) if set(u.primes) <= set(self.primes) else u
        if u.primes != self.primes:
            raise ValueError(f"variables {u.primes} are not operators of this module")
        out = BitMatrix(self.dim, self.dim)
        for m in u.terms:
            out = out + self.monomial_matrix(m)
        return out

    @cached_property
    def _layers(self) -> list[SpanBasis]:
        """``layers[k]`` spans ``m^k`` acting on the chunk (all degree-k monomials)."""
        first = SpanBasis()
        first.add(BitMatrix.identity(self.dim).flatten())
        layers = [first]
        current = [BitMatrix.identity(self.dim)]
        while current:
            nxt = SpanBasis()
            new = []
            for x in current:
                for p in self.primes:
                    y = self.mats[p] @ x
                    if nxt.add(y.flatten()):
                        new.append(y)
            if not new:
                break
            layers.append(nxt)
            current = new
        return layers

    @property
    def nilpotency_index(self) -> int:
        """Least ``e`` with ``m^e`` acting as zero."""
        return len(self._layers) if self.dim else 0

    def power_filtration(self, d: int) -> SpanBasis:
        """``A^(d)``: span of all monomial matrices of degree ``>= d``."""
        cache = self.__dict__.setdefault("_filtration", {})
        if d not in cache:
            span = SpanBasis()
            for layer in self._layers[d:]:
                for v in layer.basis():
                    span.add(v)
            cache[d] = span
        return cache[d]

    def _monomial_vectors(self, d: int) -> list[int]:
        """Normal forms of ``mu(M)`` mod ``A^(d)`` for monomials of degree < d."""
        filt = self.power_filtration(d)
        return [
            filt.normal_form(self.monomial_matrix(m).flatten())
            for m in monomials_below(len(self.primes), d)
        ]

    def annihilates(self, u: TSeries) -> bool:
        """Whether ``u`` kills the chunk modulo ``m^{u.degree}``."""
        filt = self.power_filtration(u.degree)
        return not filt.normal_form(self.evaluate(u).flatten())

    def annihilator(self, d: int) -> list[TSeries]:
        """Echelon basis of ``{u in O/m^d : u kills the chunk}``."""
        rels = relations(self._monomial_vectors(d))
        return [TSeries.from_vector(self.primes, d, r) for r in rels]

    def solve(self, target: BitMatrix, d: int) -> TSeries | None:
        """Deterministic ``u`` with ``u(M) = target`` mod ``A^(d)``, or ``None``."""
        rhs = self.power_filtration(d).normal_form(target.flatten())
        coeffs = express(self._monomial_vectors(d), rhs)
        if coeffs is None:
            return None
        return TSeries.from_vector(self.primes, d, coeffs)

    def restrict(self, primes) -> HeckeModule:
        """The same space viewed as a module over a subset of the variables."""
        return HeckeModule({p: self.mats[p] for p in primes}, check=False)

    def depth(self, v: int) -> int:
        """Least ``k`` with ``m^k v = 0`` (0 for the zero vector)."""
        k = 0
        current = [v] if v else []
        while current:
            k += 1
            span = SpanBasis()
            nxt = []
            for w in current:
                for p in self.primes:
                    y = self.act(p, w)
                    if y and span.add(y):
                        nxt.append(y)
            current = nxt
        return k

    def kernel_of(self, p: int) -> list[int]:
        return kernel_basis(self.mats[p])

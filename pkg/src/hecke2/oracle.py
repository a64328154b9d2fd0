"""Slow reference implementations on plain coefficient lists.

Nothing here shares code with the fast kernel; each function is a direct
transcription of the definition.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Sequence

from .fps2 import BitSeries

__all__ = ["DenseSeries", "naive_mul", "naive_Tp", "naive_U", "naive_decompose", "ORACLE_MAX_PREC"]

ORACLE_MAX_PREC = 1 << 14


@dataclass(frozen=True)
class DenseSeries:
    coeffs: tuple[int, ...]

    def __post_init__(self):
        if not self.coeffs:
            raise ValueError("a dense series needs at least one coefficient")
        if len(self.coeffs) > ORACLE_MAX_PREC:
            raise ValueError(f"oracle precision is capped at {ORACLE_MAX_PREC}")
        if any(c not in (0, 1) for c in self.coeffs):
            raise ValueError("coefficients must be 0 or 1")

    @property
    def prec(self) -> int:
        return len(self.coeffs)

    @classmethod
    def from_list(cls, coeffs: Sequence[int]) -> DenseSeries:
        return cls(tuple(int(c) & 1 for c in coeffs))

    @classmethod
    def from_bitseries(cls, f: BitSeries) -> DenseSeries:
        return cls(tuple((f.bits >> n) & 1 for n in range(f.prec)))

    def to_bitseries(self) -> BitSeries:
        bits = 0
        for n, c in enumerate(self.coeffs):
            if c:
                bits |= 1 << n
        return BitSeries(bits, self.prec)

    def valuation(self) -> int:
        for n, c in enumerate(self.coeffs):
            if c:
                return n
        return self.prec


def naive_mul(a: DenseSeries, b: DenseSeries) -> DenseSeries:
    prec = min(a.prec + b.valuation(), b.prec + a.valuation())
    out = [0] * prec
    for i, x in enumerate(a.coeffs):
        if not x:
            continue
        for j, y in enumerate(b.coeffs):
            if y and i + j < prec:
                out[i + j] ^= 1
    return DenseSeries(tuple(out))


def naive_Tp(f: DenseSeries, p: int) -> DenseSeries:
    """``sum c_{pn} x^n + sum c_n x^{pn}``, keeping only fully known outputs."""
    n_out = (f.prec - 1) // p + 1
    out = []
    for n in range(n_out):
        c = f.coeffs[p * n]
        if n % p == 0:
            c ^= f.coeffs[n // p]
        out.append(c)
    return DenseSeries(tuple(out))


def naive_U(f: DenseSeries, ell: int) -> DenseSeries:
    n_out = (f.prec - 1) // ell + 1
    return DenseSeries(tuple(f.coeffs[ell * n] for n in range(n_out)))


def naive_decompose(generators: Sequence[DenseSeries], target: DenseSeries) -> list[int] | None:
    """Solve ``sum x_i g_i = target`` on the common prefix by Gaussian elimination.

    Returns the solution with free variables zero, or ``None``.
    """
    n = min([target.prec] + [g.prec for g in generators])
    k = len(generators)
    rows = [[generators[i].coeffs[r] for i in range(k)] + [target.coeffs[r]] for r in range(n)]
    pivots = []
    r = 0
    for col in range(k):
        piv = next((i for i in range(r, n) if rows[i][col]), None)
        if piv is None:
            continue
        rows[r], rows[piv] = rows[piv], rows[r]
        for i in range(n):
            if i != r and rows[i][col]:
                rows[i] = [x ^ y for x, y in zip(rows[i], rows[r])]
        pivots.append(col)
        r += 1
    if any(row[k] for row in rows[r:]):
        return None
    x = [0] * k
    for i, col in enumerate(pivots):
        x[col] = rows[i][k]
    return x

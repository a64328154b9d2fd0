"""Truncated power series over GF(2).

A :class:`BitSeries` is a pair ``(bits, prec)``: ``bits`` is a nonnegative
integer whose bit ``n`` is the coefficient of ``x**n`` and ``prec`` is the
number of known coefficients.  Everything at or above ``prec`` is unknown
and is stored as zero.

Multiplication goes through Kronecker substitution: each coefficient is
spread into its own machine-word slot, the two operands are multiplied as
big integers (GMP, subquadratic), and the product coefficients are the
parities of the slots.  Small operands use shift-and-xor instead.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import gmpy2
import numpy as np

__all__ = [
    "BitSeries",
    "SeriesError",
    "InsufficientPrecision",
    "ValuationError",
    "add",
    "mul",
    "square",
    "power",
    "compose_xk",
    "drop_multiples",
    "keep_multiples",
    "laurent_div",
    "theta_F",
    "truncate",
    "agree_up_to",
    "to_bit_array",
    "from_bit_array",
]

# shift-and-xor when the sparser operand has fewer nonzero terms than this;
# measured crossover against the Kronecker path is ~600 terms for 2k..140k
# coefficients
SCHOOLBOOK_MAX_TERMS = 512


class SeriesError(ValueError):
    """Base class for series arithmetic failures."""


class InsufficientPrecision(SeriesError):
    pass


class ValuationError(SeriesError):
    pass


@dataclass(frozen=True, slots=True)
class BitSeries:
    bits: int
    prec: int

    def __post_init__(self):
        if self.prec < 1:
            raise ValueError(f"precision must be >= 1, got {self.prec}")
        if self.bits < 0 or self.bits >> self.prec:
            raise ValueError("coefficients stored at or above the precision")

    @classmethod
    def from_exponents(cls, exponents, prec: int) -> BitSeries:
        bits = 0
        for e in exponents:
            if e < prec:
                bits ^= 1 << e
        return cls(bits, prec)

    @classmethod
    def zero(cls, prec: int) -> BitSeries:
        return cls(0, prec)

    @classmethod
    def one(cls, prec: int) -> BitSeries:
        return cls(1, prec)

    def exponents(self) -> list[int]:
        out = []
        b = self.bits
        while b:
            low = b & -b
            out.append(low.bit_length() - 1)
            b ^= low
        return out

    def coeff(self, n: int) -> int:
        if n >= self.prec:
            raise InsufficientPrecision(f"coefficient x^{n} not known (prec {self.prec})")
        return (self.bits >> n) & 1

    def is_zero(self) -> bool:
        """True when every known coefficient vanishes."""
        return self.bits == 0

    def valuation(self) -> int:
        """Index of the lowest nonzero coefficient; ``prec`` for the zero series."""
        if not self.bits:
            return self.prec
        return (self.bits & -self.bits).bit_length() - 1

    def degree_bound(self) -> int:
        return self.bits.bit_length()

    def __add__(self, other: BitSeries) -> BitSeries:
        return add(self, other)

    __sub__ = __add__

    def __mul__(self, other: BitSeries) -> BitSeries:
        return mul(self, other)

    def __pow__(self, k: int) -> BitSeries:
        return power(self, k)

    def __repr__(self) -> str:
        terms = [("1" if e == 0 else "x" if e == 1 else f"x^{e}") for e in self.exponents()[:8]]
        body = " + ".join(terms) if terms else "0"
        if len(terms) == 8:
            body += " + ..."
        return f"BitSeries({body}, prec={self.prec})"


def _mask(n: int) -> int:
    return (1 << n) - 1


def to_bit_array(f: BitSeries, n: int | None = None) -> np.ndarray:
    """Coefficients ``0..n-1`` of ``f`` as a uint8 array (default ``n = prec``)."""
    if n is None:
        n = f.prec
    nbytes = (n + 7) // 8
    raw = (f.bits & _mask(n)).to_bytes(nbytes, "little")
    return np.unpackbits(np.frombuffer(raw, dtype=np.uint8), bitorder="little")[:n]


def from_bit_array(arr: np.ndarray, prec: int | None = None) -> BitSeries:
    arr = np.asarray(arr, dtype=np.uint8)
    if prec is None:
        prec = len(arr)
    bits = int.from_bytes(np.packbits(arr[:prec] & 1, bitorder="little").tobytes(), "little")
    return BitSeries(bits, prec)


def add(a: BitSeries, b: BitSeries) -> BitSeries:
    prec = min(a.prec, b.prec)
    return BitSeries((a.bits ^ b.bits) & _mask(prec), prec)


def _clmul_small(a: int, b: int, n: int) -> int:
    if a.bit_count() < b.bit_count():
        a, b = b, a
    mask = _mask(n)
    c = 0
    while b:
        low = b & -b
        c ^= a << (low.bit_length() - 1)
        b ^= low
    return c & mask


def _spread(v: int, n: int, dtype) -> gmpy2.mpz:
    arr = to_bit_array(BitSeries(v & _mask(n), n)).astype(dtype)
    return gmpy2.from_binary(b"\x01\x01" + arr.tobytes())


def _clmul_kronecker(a: int, b: int, n: int) -> int:
    # slot width must hold the largest integer convolution value
    width = min(a.bit_count(), b.bit_count())
    dtype = np.uint16 if width < 1 << 16 else np.uint32
    la = min(a.bit_length(), n)
    lb = min(b.bit_length(), n)
    prod = _spread(a, la, dtype) * _spread(b, lb, dtype)
    size = np.dtype(dtype).itemsize
    raw = gmpy2.to_binary(prod)[2:]
    need = n * size
    if len(raw) < need:
        raw = raw + bytes(need - len(raw))
    slots = np.frombuffer(raw[:need], dtype=dtype)
    return from_bit_array((slots & 1).astype(np.uint8), n).bits


def _clmul(a: int, b: int, n: int) -> int:
    """Carryless product of ``a`` and ``b`` reduced mod ``x**n``."""
    if not a or not b or n <= 0:
        return 0
    a &= _mask(n)
    b &= _mask(n)
    if min(a.bit_count(), b.bit_count()) < SCHOOLBOOK_MAX_TERMS:
        return _clmul_small(a, b, n)
    return _clmul_kronecker(a, b, n)


def mul(a: BitSeries, b: BitSeries) -> BitSeries:
    """Product with valuation-aware precision ``min(pa + val b, pb + val a)``."""
    prec = min(a.prec + b.valuation(), b.prec + a.valuation())
    return BitSeries(_clmul(a.bits, b.bits, prec), prec)


def square(a: BitSeries) -> BitSeries:
    """Frobenius: spread the bits to even positions; precision doubles."""
    arr = to_bit_array(a)
    out = np.zeros(2 * a.prec, dtype=np.uint8)
    out[::2] = arr
    return from_bit_array(out)


def power(a: BitSeries, k: int) -> BitSeries:
    if k < 0:
        raise ValueError("negative power")
    if k == 0:
        return BitSeries.one(a.prec)
    result = None
    base = a
    while True:
        if k & 1:
            result = base if result is None else mul(result, base)
        k >>= 1
        if not k:
            return result
        base = square(base)


def compose_xk(f: BitSeries, k: int) -> BitSeries:
    """``f(x**k)``, known to precision ``k * prec``."""
    if k < 1:
        raise ValueError("k must be positive")
    if k == 1:
        return f
    out = np.zeros(k * f.prec, dtype=np.uint8)
    out[::k] = to_bit_array(f)
    return from_bit_array(out)


def _multiples_mask(ell: int, prec: int) -> np.ndarray:
    m = np.zeros(prec, dtype=np.uint8)
    m[::ell] = 1
    return m


def keep_multiples(f: BitSeries, ell: int) -> BitSeries:
    if ell == 1:
        return f
    return from_bit_array(to_bit_array(f) & _multiples_mask(ell, f.prec))


def drop_multiples(f: BitSeries, ell: int) -> BitSeries:
    """The projection ``pr``: zero the coefficients at exponents divisible by ``ell``."""
    return add(f, keep_multiples(f, ell)) if ell != 1 else BitSeries.zero(f.prec)


def truncate(f: BitSeries, n: int) -> BitSeries:
    if n > f.prec:
        raise InsufficientPrecision(f"cannot truncate to {n}: only {f.prec} coefficients known")
    if n < 1:
        raise ValueError("truncation length must be positive")
    return BitSeries(f.bits & _mask(n), n)


def agree_up_to(a: BitSeries, b: BitSeries, n: int | None = None) -> bool:
    """Compare the first ``n`` coefficients (default: the common known prefix)."""
    common = min(a.prec, b.prec)
    if n is None:
        n = common
    elif n > common:
        raise InsufficientPrecision(f"asked to compare {n} coefficients, only {common} known")
    return not ((a.bits ^ b.bits) & _mask(n))


def _inverse(g: BitSeries) -> BitSeries:
    """Inverse of a unit series by the char-2 Newton step ``h <- g h^2``."""
    if not g.bits & 1:
        raise ValuationError("series is not a unit")
    h = BitSeries(1, 1)
    while h.prec < g.prec:
        n = min(2 * h.prec, g.prec)
        h = truncate(mul(truncate(g, n), square(h)), n)
    return h


def laurent_div(f: BitSeries, g: BitSeries) -> BitSeries:
    """Exact quotient ``f / g`` for ``val(f) >= val(g)``.

    The result is known to ``min(prec_f - v, prec_g - v + val(f) - v)`` with
    ``v = val(g)``; the second term is the precision of ``1/g`` shifted by the
    valuation of the numerator.
    """
    if g.is_zero():
        raise ValuationError("division by a series with no known nonzero coefficient")
    v = g.valuation()
    if f.bits & _mask(v):
        raise ValuationError(f"numerator has valuation {f.valuation()} < {v}")
    f1 = BitSeries(f.bits >> v, f.prec - v) if f.prec > v else None
    if f1 is None:
        raise InsufficientPrecision("numerator known only below the divisor's valuation")
    g1 = BitSeries(g.bits >> v, g.prec - v)
    return mul(f1, _inverse(g1))


def theta_F(prec: int) -> BitSeries:
    """``x + x^9 + x^25 + ...``: exponents the odd squares below ``prec``."""
    if prec < 1:
        raise ValueError("precision must be positive")
    arr = np.zeros(prec, dtype=np.uint8)
    m = np.arange(1, math.isqrt(prec - 1) + 2, 2, dtype=np.int64)
    sq = m * m
    arr[sq[sq < prec]] = 1
    return from_bit_array(arr)

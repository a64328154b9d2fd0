"""Formal Hecke operators on GF(2) power series.

``T_p`` sends ``sum c_n x^n`` to ``sum c_{pn} x^n + sum c_n x^{pn}``, and
``U_l`` keeps only the ``c_{ln}`` part.  Both are computed by strided
slicing of the unpacked coefficient array.  From ``prec`` known input
coefficients exactly ``(prec - 1) // p + 1`` output coefficients are known.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Mapping

import numpy as np

from .fps2 import BitSeries, InsufficientPrecision, from_bit_array, to_bit_array
from .tseries import TSeries

__all__ = [
    "PrimeSet",
    "PrecisionExhausted",
    "LEVEL_PRIMES",
    "apply_Tp",
    "apply_U",
    "apply_monomial",
    "apply_tseries",
    "tp_output_prec",
    "is_odd_prime",
]

LEVEL_PRIMES = {1: (3, 5), 3: (5, 7, 11, 13), 5: (3, 7, 11, 13)}


class PrecisionExhausted(InsufficientPrecision):
    pass


def is_odd_prime(p: int) -> bool:
    if p < 3 or p % 2 == 0:
        return False
    q = 3
    while q * q <= p:
        if p % q == 0:
            return False
        q += 2
    return True


@dataclass(frozen=True)
class PrimeSet:
    """The generator primes ``S`` of the Hecke algebra at a level."""

    level: int
    primes: tuple[int, ...]

    def __post_init__(self):
        for p in self.primes:
            if not is_odd_prime(p) or p == self.level:
                raise ValueError(f"{p} is not an odd prime distinct from the level {self.level}")

    @classmethod
    def for_level(cls, level: int) -> PrimeSet:
        if level not in LEVEL_PRIMES:
            raise ValueError(f"unsupported level {level}; expected one of 1, 3, 5")
        return cls(level, LEVEL_PRIMES[level])

    @property
    def excluded(self) -> int | None:
        return None if self.level == 1 else self.level

    def __iter__(self):
        return iter(self.primes)

    def __contains__(self, p: int) -> bool:
        return p in self.primes


def tp_output_prec(prec: int, p: int) -> int:
    return (prec - 1) // p + 1


def apply_U(f: BitSeries, ell: int) -> BitSeries:
    """``sum c_n x^n -> sum c_{ell n} x^n``."""
    out_prec = tp_output_prec(f.prec, ell)
    arr = to_bit_array(f)
    return from_bit_array(arr[::ell][:out_prec])


def apply_Tp(f: BitSeries, p: int) -> BitSeries:
    out_prec = tp_output_prec(f.prec, p)
    arr = to_bit_array(f)
    out = np.array(arr[::p][:out_prec])
    # the c_n x^{pn} part: positions 0, p, 2p, ... below out_prec
    m = (out_prec + p - 1) // p
    out[::p] ^= arr[:m]
    return from_bit_array(out)


def apply_monomial(f: BitSeries, exps: Mapping[int, int], min_prec: int = 1) -> BitSeries:
    """Apply ``prod T_p^{e_p}``, smallest prime first.

    Raises :class:`PrecisionExhausted` when fewer than ``min_prec`` output
    coefficients would remain.
    """
    out = f
    for p in sorted(exps):
        e = exps[p]
        if e < 0:
            raise ValueError("negative exponent")
        for _ in range(e):
            if tp_output_prec(out.prec, p) < min_prec:
                raise PrecisionExhausted(
                    f"T_{p} on {out.prec} coefficients leaves fewer than {min_prec}"
                )
            out = apply_Tp(out, p)
    return out


def apply_tseries(f: BitSeries, u: TSeries, min_prec: int = 1) -> BitSeries:
    """``u(T) f`` for ``u`` a polynomial in the ``t_p``; precision is the worst term's."""
    if u.is_zero():
        return BitSeries.zero(f.prec)
    total = None
    for exps in u.exponent_maps():
        img = apply_monomial(f, exps, min_prec)
        total = img if total is None else total + img
    return total

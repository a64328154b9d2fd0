"""Hecke algebras acting on mod-2 modular forms of level 1, 3 and 5.

Exact GF(2) power-series arithmetic, formal Hecke operators, finite
Hecke-stable chunks of the relevant form spaces and the m-adic linear
algebra used to determine their annihilator ideals.
"""

__version__ = "0.1.0"

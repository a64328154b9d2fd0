"""Ideals of ``O/m^d`` attached to chunks, and the A, B, C structure.

All ideal statements are checked as equalities of finite-dimensional
subspaces of ``O/m^d`` (coordinates over the monomials of degree ``< d``).
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Any, Iterable, Sequence

from .action import HeckeModule, express, relations
from .fps2 import BitSeries
from .hecke import PrecisionExhausted, apply_Tp, tp_output_prec
from .linalg2 import BitMatrix, SpanBasis
from .report import Finding
from .tseries import TSeries, monomials_below

__all__ = [
    "IdealChunk",
    "NoSolution",
    "ideal_span",
    "annihilator",
    "solve_u",
    "solve_lambda",
    "epsilon",
    "nilpotency_index",
    "module_nilpotency",
    "witness_generator",
    "normalise_A",
    "IdealStructure",
    "check_ideal_structure",
    "EXPECTED_FORMS",
    "linear_form",
]


class NoSolution(ValueError):
    pass


def linear_form(primes: Sequence[int], d: int, which: Iterable[int]) -> TSeries:
    """``sum t_p`` over ``which``."""
    out = TSeries.zero(primes, d)
    for p in which:
        out = out + TSeries.var(p, primes, d)
    return out


# leading forms asserted for A, B, C and for lambda (two-variable subring)
EXPECTED_FORMS = {
    3: {"A": (5, 7, 13), "B": (7,), "C": (11,), "lambda": (7, 13), "q": 5},
    5: {"A": (3, 7, 11), "B": (7,), "C": (13,), "lambda": (3, 7), "q": 11},
}


@dataclass
class IdealChunk:
    """A subspace of ``O/m^d`` given by an echelon basis."""

    primes: tuple[int, ...]
    degree: int
    basis: list[TSeries]
    provenance: dict[str, Any] = field(default_factory=dict)

    @classmethod
    def from_elements(
        cls,
        primes: Sequence[int],
        d: int,
        elements: Iterable[TSeries],
        provenance: dict | None = None,
        module: HeckeModule | None = None,
    ) -> IdealChunk:
        primes = tuple(primes)
        vecs = []
        for u in elements:
            if u.primes != primes:
                u = u.embed(primes)
            if u.degree != d:
                u = u.truncate(d)
            vecs.append(u.to_vector())
        basis = [TSeries.from_vector(primes, d, v) for v in _echelon(vecs)]
        if module is not None:
            for u in basis:
                if not module.annihilates(u):
                    raise ValueError(f"{u} does not annihilate the chunk")
        return cls(primes, d, basis, dict(provenance or {}))

    @property
    def dim(self) -> int:
        return len(self.basis)

    def _span(self) -> SpanBasis:
        span = SpanBasis()
        for u in self.basis:
            span.add(u.to_vector())
        return span

    def contains(self, u: TSeries) -> bool:
        if u.primes != self.primes:
            u = u.embed(self.primes)
        return self._span().contains(u.truncate(self.degree).to_vector())

    __contains__ = contains

    def issubset(self, other: IdealChunk) -> bool:
        return all(other.contains(u) for u in self.basis)

    def same_span(self, other: IdealChunk) -> bool:
        return self.dim == other.dim and self.issubset(other)

    def __add__(self, other: IdealChunk) -> IdealChunk:
        return IdealChunk.from_elements(self.primes, self.degree, self.basis + other.basis)

    def order_part(self, k: int) -> list[TSeries]:
        """Echelon basis of the degree-``k`` leading forms of the elements."""
        forms = [u.homogeneous_part(k) for u in self.basis if u.order() == k]
        return [TSeries.from_vector(self.primes, self.degree, v) for v in _echelon([f.to_vector() for f in forms])]

    def leading_forms(self) -> list[TSeries]:
        return [u.leading_form() for u in self.basis]

    def linear_forms_contain(self, form: TSeries) -> bool:
        span = SpanBasis()
        for f in self.order_part(1):
            span.add(f.to_vector())
        return span.contains(form.to_vector())

    def element_with_linear_part(self, form: TSeries) -> TSeries | None:
        """The echelon-determined element whose degree-1 part is ``form``."""
        rows = [u for u in self.basis if u.order() == 1]
        coeffs = express([u.homogeneous_part(1).to_vector() for u in rows], form.to_vector())
        if coeffs is None:
            return None
        out = TSeries.zero(self.primes, self.degree)
        for i, u in enumerate(rows):
            if (coeffs >> i) & 1:
                out = out + u
        return out

    def describe(self) -> list[str]:
        return [str(u) for u in self.basis]


def _echelon(vecs: Sequence[int]) -> list[int]:
    """Reduced echelon basis of the span, pivots at the lowest monomial."""
    span = SpanBasis()
    for v in vecs:
        span.add(v)
    rows = span.basis()
    rows.sort(key=lambda r: (r & -r).bit_length())
    # back-substitute so each pivot appears in exactly one row
    for i, r in enumerate(rows):
        bit = r & -r
        for j in range(len(rows)):
            if j != i and rows[j] & bit:
                rows[j] ^= r
    return sorted(rows, key=lambda r: (r & -r).bit_length())


def ideal_span(gens: Iterable[TSeries], primes: Sequence[int], d: int) -> IdealChunk:
    """Span in ``O/m^d`` of all monomial multiples of the generators."""
    primes = tuple(primes)
    elems = []
    monos = [TSeries.from_terms(primes, d, [m]) for m in monomials_below(len(primes), d)]
    for g in gens:
        g = g.embed(primes) if g.primes != primes else g
        g = g.truncate(d)
        elems.extend(m * g for m in monos)
    return IdealChunk.from_elements(primes, d, elems)


def annihilator(module: HeckeModule, d: int, provenance: dict | None = None) -> IdealChunk:
    """``{u in O/m^d : u kills the chunk}``."""
    return IdealChunk(module.primes, d, module.annihilator(d), dict(provenance or {}))


def solve_u(module: HeckeModule, target: BitMatrix, d: int) -> TSeries:
    """``u`` with ``T_p = u`` on the chunk mod ``m^d``; ``target`` is the matrix of ``T_p``."""
    u = module.solve(target, d)
    if u is None:
        raise NoSolution(f"no u in O/m^{d} reproduces the operator on this chunk")
    return u


def solve_lambda(module: HeckeModule, q: int, pair: Sequence[int], d: int) -> tuple[TSeries, TSeries]:
    """``lambda`` in ``Z/2[[t_a, t_b]]`` with ``lambda^2 = T_q^2`` on the chunk.

    Solved inside the algebra generated by ``M_a^2, M_b^2`` at its own
    nilpotency index, where the answer is exact; returns the truncation to
    ``m^d`` and the exact element.
    """
    a, b = pair
    Ma, Mb, Mq = module.mats[a], module.mats[b], module.mats[q]
    squares = HeckeModule({a: Ma @ Ma, b: Mb @ Mb}, check=False)
    depth = max(d, squares.nilpotency_index)
    lam = squares.solve(Mq @ Mq, depth)
    if lam is None:
        raise NoSolution(f"T_{q}^2 is not a square of an element of Z/2[[t{a}, t{b}]] on this chunk")
    return lam.truncate(d), lam


def epsilon(q: int, lam: TSeries, primes: Sequence[int], d: int) -> TSeries:
    """``t_q + lambda`` in ``O/m^d``."""
    primes = tuple(primes)
    return TSeries.var(q, primes, d) + lam.embed(primes).truncate(d)


def epsilon_squared_kills(module: HeckeModule, q: int, lam_exact: TSeries) -> bool:
    """Exact matrix check that ``(t_q + lambda)^2`` is zero on the chunk."""
    deg = 2 * lam_exact.degree
    eps = TSeries.var(q, module.primes, deg) + lam_exact.embed(module.primes).truncate(deg)
    return module.evaluate(eps.square()).is_zero()


def nilpotency_index(f: BitSeries, p: int, bound: int, min_prec: int = 1) -> int | None:
    """Least ``e`` with ``T_p^e f = 0`` on the known coefficients; ``None`` past ``bound``.

    Every intermediate image must keep at least ``min_prec`` coefficients.
    """
    e = 0
    while not f.is_zero():
        if e >= bound:
            return None
        if tp_output_prec(f.prec, p) < min_prec:
            raise PrecisionExhausted(f"T_{p}^{e + 1} leaves fewer than {min_prec} coefficients")
        f = apply_Tp(f, p)
        e += 1
    return e


def module_nilpotency(module: HeckeModule, v: int, p: int) -> int:
    """Least ``e`` with ``M_p^e v = 0`` (always finite for a nilpotent matrix)."""
    e = 0
    while v:
        v = module.act(p, v)
        e += 1
        if e > module.dim:
            raise RuntimeError(f"T_{p} is not nilpotent on the chunk")
    return e


def _unflatten(v: int, n: int) -> BitMatrix:
    mask = (1 << n) - 1
    return BitMatrix(n, n, [(v >> (i * n)) & mask for i in range(n)])


def witness_generator(module: HeckeModule, u: TSeries, generators: Sequence[int]) -> int | None:
    """Index of a generator ``g`` with ``u g`` outside ``m^d g``, if any."""
    filt = module.power_filtration(u.degree)
    M = module.evaluate(u)
    high = [_unflatten(v, module.dim) for v in filt.basis()]
    for idx, g in enumerate(generators):
        span = SpanBasis()
        for X in high:
            span.add(X.apply(g))
        if not span.contains(M.apply(g)):
            return idx
    return None


def normalise_A(
    A0: TSeries, B: TSeries, C: TSeries, eps: TSeries
) -> tuple[TSeries, TSeries] | None:
    """Write ``A0 - eps = x_A + x_B + x_C`` in ``mA + mB + mC`` and return
    ``(A0 + x_A + x_B, eps + x_C)``, which coincide; ``None`` if impossible."""
    primes, d = A0.primes, A0.degree
    monos = [TSeries.from_terms(primes, d, [m]) for m in monomials_below(len(primes), d) if sum(m) >= 1]
    parts = [[m * g for m in monos] for g in (A0, B, C)]
    flat = [x for part in parts for x in part]
    coeffs = express([x.to_vector() for x in flat], (A0 + eps).to_vector())
    if coeffs is None:
        return None
    sums = []
    for k in range(3):
        acc = TSeries.zero(primes, d)
        for i, x in enumerate(parts[k]):
            if (coeffs >> (k * len(monos) + i)) & 1:
                acc = acc + x
        sums.append(acc)
    return A0 + sums[0] + sums[1], eps + sums[2]


@dataclass
class IdealStructure:
    """Elements and subspaces behind the ``I = (A^2, AC, BC)`` verification."""

    A: TSeries
    B: TSeries
    C: TSeries
    eps: TSeries
    IV: IdealChunk
    IW: IdealChunk
    I: IdealChunk
    P: IdealChunk
    findings: dict[str, Finding]

    @property
    def ok(self) -> bool:
        return all(f.ok for f in self.findings.values())


def _forms(u: TSeries, expected: TSeries) -> Finding:
    got = u.leading_form()
    return Finding(got == expected, {"leading_form": str(got), "expected": str(expected)},
                   None if got == expected else {"element": str(u)})


def check_ideal_structure(
    level: int,
    d: int,
    v_mod: HeckeModule,
    w_mod: HeckeModule,
    modd_mod: HeckeModule,
    modd_gens: Sequence[int],
    kernel_mod: HeckeModule,
    provenance: dict | None = None,
) -> IdealStructure:
    """Extract A, B, C, eps from the chunk annihilators and test the clauses.

    ``modd_gens`` are the M(odd) chunk generators as coordinate vectors of
    ``modd_mod`` (used for witnesses).
    """
    exp = EXPECTED_FORMS[level]
    primes = v_mod.primes
    prov = dict(provenance or {})
    IV = annihilator(v_mod, d, {**prov, "space": "V"})
    IW = annihilator(w_mod, d, {**prov, "space": "W"})
    I = annihilator(modd_mod, d, {**prov, "space": "Modd"})
    P = annihilator(kernel_mod, d, {**prov, "space": "kernel"})
    a = linear_form(primes, d, exp["A"])
    b = linear_form(primes, d, exp["B"])
    c = linear_form(primes, d, exp["C"])
    findings: dict[str, Finding] = {}

    A0 = IV.element_with_linear_part(a)
    B = IV.element_with_linear_part(b)
    C = IW.element_with_linear_part(c)
    lam_d, lam = solve_lambda(w_mod, exp["q"], exp["lambda"], d)
    eps = epsilon(exp["q"], lam, primes, d)
    missing = [n for n, x in (("A", A0), ("B", B), ("C", C)) if x is None]
    if missing:
        findings["extract"] = Finding(False, {}, {"missing": missing, "I(V)": IV.describe(), "I(W)": IW.describe()})
        zero = TSeries.zero(primes, d)
        return IdealStructure(zero, zero, zero, eps, IV, IW, I, P, findings)

    norm = normalise_A(A0, B, C, eps)
    if norm is None:
        findings["normalisation"] = Finding(False, {"A0": str(A0), "eps": str(eps)},
                                            {"reason": "A - eps is not in mA + mB + mC"})
        A = A0
    else:
        A, eps_n = norm
        findings["normalisation"] = Finding(A == eps_n, {"A0": str(A0), "A": str(A), "eps": str(eps), "eps_normalised": str(eps_n)})

    findings["i_leading_forms"] = Finding.combine({"A": _forms(A, a), "B": _forms(B, b), "C": _forms(C, c)})

    products = {"A^2": A * A, "A*C": A * C, "B*C": B * C}
    parts = {}
    for name, u in products.items():
        ok = modd_mod.annihilates(u)
        wit = None if ok else {"generator": witness_generator(modd_mod, u, modd_gens), "element": str(u)}
        parts[name] = Finding(ok, {"element": str(u)}, wit)
    findings["ii_products_annihilate"] = Finding.combine(parts)

    J = ideal_span(products.values(), primes, d)
    same = J.same_span(I)
    wit = None
    if not same:
        extra = [str(u) for u in I.basis if not J.contains(u)]
        lacking = [str(u) for u in J.basis if not I.contains(u)]
        wit = {"in_annihilator_only": extra, "in_span_only": lacking}
    findings["iii_span_equals_annihilator"] = Finding(same, {"dim_span": J.dim, "dim_annihilator": I.dim, "annihilator": I.describe()}, wit)

    parts = {n: Finding(kernel_mod.annihilates(x), {"element": str(x)}) for n, x in (("A", A), ("B", B), ("C", C))}
    findings["iv_kernel_annihilated"] = Finding.combine(parts)

    IV_gen = ideal_span([A, B], primes, d)
    IW_gen = ideal_span([A * A, C], primes, d)
    findings["I(V)=(A,B)"] = Finding(IV_gen.same_span(IV), {"dim": IV.dim, "basis": IV.describe()})
    findings["I(W)=(A^2,C)"] = Finding(IW_gen.same_span(IW), {"dim": IW.dim, "basis": IW.describe()})
    total = IV + IW
    findings["I(V)+I(W)=P"] = Finding(
        total.same_span(P), {"dim_sum": total.dim, "dim_P": P.dim, "contained": total.issubset(P)}
    )
    return IdealStructure(A, B, C, eps, IV, IW, I, P, findings)

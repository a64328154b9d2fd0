import itertools

import pytest
from hypothesis import given
from hypothesis import strategies as st

from hecke2.action import HeckeModule, NotCommuting, express, relations
from hecke2.linalg2 import BitMatrix, SpanBasis
from hecke2.tseries import TSeries, monomials_below


def truncated_poly_module(a, b, primes=(3, 5)):
    """GF(2)[x, y]/(x^a, y^b) with t_p acting as x and t_q as y."""
    basis = list(itertools.product(range(a), range(b)))
    index = {m: i for i, m in enumerate(basis)}

    def shift(dx, dy):
        cols = []
        for i, j in basis:
            tgt = (i + dx, j + dy)
            cols.append(1 << index[tgt] if tgt in index else 0)
        return BitMatrix.from_columns(len(basis), cols)

    p, q = primes
    return HeckeModule({p: shift(1, 0), q: shift(0, 1)})


def test_rejects_non_commuting():
    a = BitMatrix.from_lists([[0, 1], [0, 0]])
    b = BitMatrix.from_lists([[0, 0], [1, 0]])
    with pytest.raises(NotCommuting):
        HeckeModule({3: a, 5: b})


def test_nilpotency_index():
    assert truncated_poly_module(3, 2).nilpotency_index == 4  # x^2 y survives, degree 3


@pytest.mark.parametrize("a,b,d", [(2, 3, 3), (3, 3, 4), (2, 2, 5), (4, 1, 3)])
def test_annihilator_of_truncated_ring(a, b, d):
    mod = truncated_poly_module(a, b)
    ann = mod.annihilator(d)
    want = {m for m in monomials_below(2, d) if m[0] >= a or m[1] >= b}
    got = set()
    for u in ann:
        got |= set(u.terms)
    assert len(ann) == len(want)
    assert got == want


def test_solve_recovers_operator():
    mod = truncated_poly_module(3, 3)
    u = TSeries.from_terms((3, 5), 3, [(1, 0), (0, 2)])
    assert mod.solve(mod.evaluate(u), 3) == u
    # raising degree is outside the algebra of the t_p
    off = BitMatrix.from_columns(9, [0] * 8 + [1])
    assert mod.solve(off, 5) is None


def test_depth_and_kernel():
    mod = truncated_poly_module(2, 2)
    assert mod.depth(0) == 0
    assert mod.depth(1) == 3  # 1 -> x, y -> xy -> 0
    assert mod.depth(1 << 3) == 1
    assert len(mod.kernel_of(3)) == 2


def test_restrict_changes_the_ring():
    mod = truncated_poly_module(2, 3)
    sub = mod.restrict((5,))
    assert sub.primes == (5,)
    assert [str(u) for u in sub.annihilator(4)] == ["t5^3"]


def test_relations_and_express():
    vecs = [0b01, 0b10, 0b11, 0b11]
    rels = relations(vecs)
    for r in rels:
        acc = 0
        for j, v in enumerate(vecs):
            if (r >> j) & 1:
                acc ^= v
        assert acc == 0
    assert len(rels) == 2
    assert express(vecs, 0b11) == 0b011
    assert express([0b01], 0b10) is None


@given(st.integers(1, 4), st.integers(1, 4), st.integers(1, 6), st.data())
def test_annihilates_agrees_with_annihilator(a, b, d, data):
    mod = truncated_poly_module(a, b)
    n = len(monomials_below(2, d))
    u = TSeries.from_vector((3, 5), d, data.draw(st.integers(0, (1 << n) - 1)))
    sb = SpanBasis()
    for v in mod.annihilator(d):
        sb.add(v.to_vector())
    assert mod.annihilates(u) == sb.contains(u.to_vector())

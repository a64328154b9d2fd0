import random

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from hecke2.fps2 import mul, power, truncate
from hecke2.linalg2 import BitMatrix, SpanBasis, echelonize, kernel_basis, rank, solve
from hecke2.spaces import chunk_prec


@st.composite
def matrices(draw, max_dim=24):
    r = draw(st.integers(0, max_dim))
    c = draw(st.integers(1, max_dim))
    rows = draw(st.lists(st.integers(0, (1 << c) - 1), min_size=r, max_size=r))
    return BitMatrix(r, c, rows)


def test_construction_guards():
    with pytest.raises(ValueError):
        BitMatrix(2, 2, [4, 0])
    with pytest.raises(ValueError):
        BitMatrix(2, 2, [1])
    m = BitMatrix.identity(3).freeze()
    with pytest.raises(Exception):
        m[0, 1] = 1
    with pytest.raises(IndexError):
        BitMatrix(2, 2)[2, 0]


def test_numpy_round_trip():
    arr = np.array([[1, 0, 1], [0, 1, 1]], dtype=np.uint8)
    m = BitMatrix.from_numpy(arr)
    assert (m.to_numpy() == arr).all()
    assert m == BitMatrix.from_lists(arr.tolist())
    assert m.transpose().transpose() == m


def test_identity_echelon():
    e = echelonize(BitMatrix.identity(3))
    assert e.rank == 3
    assert e.reduced == BitMatrix.identity(3)


def test_rank_one():
    assert rank(BitMatrix.from_lists([[1, 1], [1, 1]])) == 1


def test_solve_examples():
    assert solve(BitMatrix.identity(4), 0b0010) == 0b0010
    # x0 + x1 = 1: free variable x1 is zero
    assert solve(BitMatrix.from_lists([[1, 1]]), 1) == 0b01
    assert solve(BitMatrix.from_lists([[1, 1], [1, 1]]), 0b01) is None


def test_kernel_examples():
    assert kernel_basis(BitMatrix.identity(5)) == []
    assert len(kernel_basis(BitMatrix(3, 4))) == 4


def test_deterministic_pivots():
    m = BitMatrix.from_lists([[0, 1, 1], [1, 1, 0], [1, 0, 1]])
    e = echelonize(m)
    assert e.pivots == (0, 1)
    assert e.reduced.rows[:2] == (0b101, 0b110)


def test_transform_reproduces_rows():
    rng = random.Random(3)
    for _ in range(50):
        m = BitMatrix(8, 10, [rng.getrandbits(10) for _ in range(8)])
        e = echelonize(m)
        for row, t in zip(e.reduced.rows, e.transform):
            acc = 0
            for i in range(m.nrows):
                if (t >> i) & 1:
                    acc ^= m.rows[i]
            assert acc == row


def test_solve_random_consistent_500():
    rng = random.Random(500)
    for _ in range(500):
        r, c = rng.randint(1, 30), rng.randint(1, 30)
        m = BitMatrix(r, c, [rng.getrandbits(c) for _ in range(r)])
        x = rng.getrandbits(c)
        b = m.apply(x)
        y = solve(m, b)
        assert y is not None and m.apply(y) == b


def _modd_generators(ctx, labels, prec):
    F, G = ctx.theta(prec), ctx.g_series(prec)
    return [truncate(mul(power(F, i), power(G, j)), prec) for i, j in labels]


def test_modd_literal_generator_matrix_is_rank_deficient(ctx3):
    # All F^i G^j with i + j odd and i + 3j <= 15, columns below x^16.  Only
    # 8 odd exponents exist there and the unreduced products satisfy
    # relations such as F^4 G = F G^2 + G^5, so the rank is far below the count.
    labels = [(i, j) for j in range(6) for i in range(16) if (i + j) % 2 and i + 3 * j <= 15]
    gens = _modd_generators(ctx3, labels, 16)
    m = BitMatrix(len(gens), 16, [g.bits for g in gens])
    assert len(labels) == 27
    assert rank(m) == 8
    F, G = ctx3.F, ctx3.G
    rel = mul(power(F, 4), G) + mul(F, power(G, 2)) + power(G, 5)
    assert truncate(rel, ctx3.N).is_zero()


def test_modd_module_basis_matrix_has_full_rank(ctx3):
    # restricted to the module basis (i < 4) and given enough coefficients,
    # the generators are independent
    labels = [(i, j) for j in range(6) for i in range(4) if (i + j) % 2 and i + 3 * j <= 15]
    prec = chunk_prec(ctx3, 15)
    gens = _modd_generators(ctx3, labels, prec)
    m = BitMatrix(len(gens), prec, [g.bits for g in gens])
    assert rank(m) == len(labels) == 11


def test_span_basis_numbering():
    s = SpanBasis()
    assert s.add(0b011)
    assert not s.add(0b011)
    assert s.add(0b110)
    res, combo = s.reduce(0b101)
    assert res == 0 and combo == 0b11
    assert s.dim == 2 and s.contains(0b101) and not s.contains(0b001)


# properties


@given(matrices())
def test_echelon_idempotent(m):
    e = echelonize(m)
    again = echelonize(e.reduced)
    assert again.reduced == e.reduced and again.pivots == e.pivots


@given(matrices())
def test_rank_nullity_and_kernel(m):
    ker = kernel_basis(m)
    assert rank(m) + len(ker) == m.ncols
    for v in ker:
        assert m.apply(v) == 0


@given(matrices(), st.data())
def test_general_solution(m, data):
    x = data.draw(st.integers(0, (1 << m.ncols) - 1))
    b = m.apply(x)
    y = solve(m, b)
    # x - y lies in the kernel span
    span = SpanBasis()
    for v in kernel_basis(m):
        span.add(v)
    assert span.contains(x ^ y)


@given(st.lists(st.integers(0, (1 << 40) - 1), max_size=30), st.integers(0, (1 << 40) - 1))
def test_normal_form_is_linear_and_canonical(vecs, w):
    s = SpanBasis()
    for v in vecs:
        s.add(v)
    nf = s.normal_form(w)
    assert s.contains(nf ^ w)
    for v in vecs:
        assert s.normal_form(w ^ v) == nf

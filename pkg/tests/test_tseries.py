import pytest
from hypothesis import given
from hypothesis import strategies as st

from hecke2.tseries import AmbientMismatch, TSeries, monomials_below

S3 = (5, 7, 11, 13)


def t(p, d=3, primes=S3):
    return TSeries.var(p, primes, d)


def elements(primes=S3, d=3):
    n = len(monomials_below(len(primes), d))
    return st.integers(0, (1 << n) - 1).map(lambda v: TSeries.from_vector(primes, d, v))


def test_monomial_order():
    names = [str(TSeries.from_terms(S3, 3, [m])) for m in monomials_below(4, 3)[:7]]
    assert names == ["1", "t5", "t7", "t11", "t13", "t5^2", "t5*t7"]


def test_mul_examples():
    assert str(t(5) * t(7)) == "t5*t7"
    assert (t(5) * TSeries.zero(S3, 3)).is_zero()
    assert (t(5) * t(7) * t(11)).is_zero()  # degree 3 vanishes mod m^3


def test_epsilon_square_leading_form():
    eps = t(5) + t(7) + t(13) + t(5) * t(11)
    sq = (eps * eps).leading_form()
    assert sq == (t(5) + t(7) + t(13)) * (t(5) + t(7) + t(13))
    assert str(sq) == "t5^2 + t7^2 + t13^2"


def test_ambient_mismatch():
    with pytest.raises(AmbientMismatch):
        t(5) + t(5, d=2)
    with pytest.raises(AmbientMismatch):
        TSeries.var(3, S3, 3)


def test_embed_and_restrict_strings():
    u = TSeries.var(11, (11, 13), 3) * TSeries.var(13, (11, 13), 3)
    assert str(u.embed(S3)) == "t11*t13"
    assert u.embed(S3).variables_used() == {11, 13}


def test_order_and_truncate():
    u = t(5) * t(7) + t(11)
    assert u.order() == 1 and str(u.leading_form()) == "t11"
    assert u.truncate(2) == t(11, d=2)
    assert TSeries.zero(S3, 3).order() is None


@given(elements(), elements(), elements())
def test_ring_laws(a, b, c):
    assert a * b == b * a
    assert (a * b) * c == a * (b * c)
    assert a * (b + c) == a * b + a * c
    assert a + a == TSeries.zero(S3, 3)


@given(elements())
def test_square_is_frobenius(a):
    assert a.square() == a * a


@given(elements())
def test_vector_round_trip(a):
    assert TSeries.from_vector(S3, 3, a.to_vector()) == a

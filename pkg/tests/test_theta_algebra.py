import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from hecke2.fps2 import BitSeries, power, theta_F, truncate
from hecke2.hecke import PrecisionExhausted
from hecke2.linalg2 import BitMatrix
from hecke2.spaces import hecke_module, v_chunk, w_chunk
from hecke2.theta_algebra import (
    IdealChunk,
    NoSolution,
    annihilator,
    epsilon,
    epsilon_squared_kills,
    ideal_span,
    linear_form,
    module_nilpotency,
    nilpotency_index,
    normalise_A,
    solve_lambda,
    solve_u,
    witness_generator,
)
from hecke2.tseries import TSeries
from tests.test_action import truncated_poly_module

S3 = (5, 7, 11, 13)
S5 = (3, 7, 11, 13)


def T(primes, d, *monos):
    """Sum of monomials given as tuples of primes, e.g. ``(5, 11)`` for ``t5 t11``."""
    out = TSeries.zero(primes, d)
    for m in monos:
        term = TSeries.one(primes, d)
        for p in m:
            term = term * TSeries.var(p, primes, d)
        out = out + term
    return out


class TestNilpotencyIndex:
    def test_examples(self, ctx3):
        F = ctx3.theta(2048)
        assert nilpotency_index(F, 3, 4) == 1
        assert nilpotency_index(BitSeries.zero(100), 3, 4) == 0
        W = w_chunk(ctx3, 63)
        assert nilpotency_index(W.series[W.index(5)], 11, 4) == 1

    def test_bound_and_precision(self):
        F3 = truncate(power(theta_F(4096), 3), 4096)
        assert nilpotency_index(F3, 3, 1) is None
        assert nilpotency_index(F3, 3, 4) == 2
        with pytest.raises(PrecisionExhausted):
            nilpotency_index(F3, 3, 4, min_prec=4000)

    def test_level1_table_matches_oracle(self, ctx1):
        # independently computed with dense lists
        V = v_chunk(ctx1, 15)
        got = [nilpotency_index(f, 3, 8) for f in V.series]
        assert got == [1, 2, 1, 2, 3, 4, 3, 4]

    def test_module_version_agrees(self, ctx1):
        V = v_chunk(ctx1, 15)
        mod = hecke_module(V, (3,))
        assert [module_nilpotency(mod, 1 << i, 3) for i in range(8)] == [1, 2, 1, 2, 3, 4, 3, 4]


class TestSolveAndAnnihilate:
    def test_truncated_poly_ring(self):
        mod = truncated_poly_module(3, 2)
        ann = annihilator(mod, 4)
        # x^3 and y^2 generate the annihilator of Z/2[x, y] / (x^3, y^2)
        x, y = TSeries.var(mod.primes[0], mod.primes, 4), TSeries.var(mod.primes[1], mod.primes, 4)
        assert ann.same_span(ideal_span([x ** 3, y ** 2], mod.primes, 4))
        u = solve_u(mod, mod.evaluate(x * y + x ** 2), 4)
        assert u == x * y + x ** 2

    def test_no_solution(self):
        mod = truncated_poly_module(2, 2)
        # 1 -> y and x -> 0 is not multiplication by anything
        with pytest.raises(NoSolution):
            solve_u(mod, BitMatrix.from_columns(4, [0b10, 0, 0, 0]), 3)

    @given(st.integers(0, (1 << 6) - 1))
    @settings(max_examples=100)
    def test_solve_recovers_modulo_annihilator(self, v):
        mod = truncated_poly_module(3, 3)
        u = TSeries.from_vector(mod.primes, 3, v)
        got = solve_u(mod, mod.evaluate(u), 3)
        assert mod.annihilates(got + u)

    def test_level3_ideals(self, s3):
        st_ = s3.ideal_structure()
        assert st_.ok, {k: f.witness for k, f in st_.findings.items() if not f.ok}
        d = 3
        # frozen values at (K, d, N) = (63, 3, 138432)
        assert st_.A == T(S3, d, (5,), (7,), (13,), (5, 11))
        assert st_.B == T(S3, d, (7,), (11, 13))
        assert st_.C == T(S3, d, (11,), (5, 7))
        assert st_.eps == T(S3, d, (5,), (7,), (13,))
        assert st_.P.dim == 12

    def test_level5_ideals(self, s5):
        st_ = s5.ideal_structure()
        assert st_.ok
        d = 3
        assert st_.A == T(S5, d, (3,), (7,), (11,), (3, 13))
        assert st_.B == T(S5, d, (7,), (11, 13))
        assert st_.C == T(S5, d, (13,), (7, 11))
        assert st_.eps == T(S5, d, (3,), (7,), (11,))

    def test_sum_inside_kernel_annihilator(self, s3, s5):
        for s in (s3, s5):
            st_ = s.ideal_structure()
            assert (st_.IV + st_.IW).issubset(st_.P)

    def test_annihilator_shrinks_with_K(self, s3):
        ctx = s3.mctx
        anns = [annihilator(hecke_module(v_chunk(ctx, K), S3), 3) for K in (15, 31, 63)]
        assert anns[2].issubset(anns[1]) and anns[1].issubset(anns[0])
        # stable at the default cutoff
        assert anns[2].same_span(annihilator(hecke_module(v_chunk(ctx, 127), S3), 3))

    def test_module_rejects_non_annihilating_element(self, s3):
        with pytest.raises(ValueError):
            IdealChunk.from_elements(S3, 3, [TSeries.var(5, S3, 3)], module=s3.v_module())

    def test_witness_generator(self, s3):
        mo = s3.modd()
        A = s3.ideal_structure().A
        assert witness_generator(mo.module, A * A, mo.generator_vectors()) is None
        bad = A * A + TSeries.var(7, S3, 3)
        assert witness_generator(mo.module, bad, mo.generator_vectors()) is not None


class TestLambdaEpsilon:
    @pytest.mark.parametrize("level", [3, 5])
    def test_epsilon(self, s3, s5, level):
        s = s3 if level == 3 else s5
        q, pair, A = (5, (7, 13), (5, 7, 13)) if level == 3 else (11, (3, 7), (3, 7, 11))
        wmod = s.w_module()
        lam_d, lam = solve_lambda(wmod, q, pair, 3)
        assert lam_d.leading_form() == linear_form(pair, 3, pair)
        eps = epsilon(q, lam, s.S, 3)
        assert eps.leading_form() == linear_form(s.S, 3, A)
        assert epsilon_squared_kills(wmod, q, lam)


class TestNormaliseA:
    def test_moves_A_to_epsilon(self):
        d = 3
        A0 = T(S3, d, (5,), (7,), (13,), (5, 11))
        B = T(S3, d, (7,), (11, 13))
        C = T(S3, d, (11,), (5, 7))
        eps = T(S3, d, (5,), (7,), (13,))
        A, eps_n = normalise_A(A0, B, C, eps)
        assert A == eps_n
        assert A.leading_form() == eps.leading_form()

    def test_impossible(self):
        d = 3
        B = T(S3, d, (7,))
        C = T(S3, d, (11,))
        assert normalise_A(T(S3, d, (5,)), B, C, T(S3, d, (13,))) is None

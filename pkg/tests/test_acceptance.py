"""Acceptance criteria 1-12, one test each.

Every test prints ``criterion N: PASS`` or ``criterion N: FAIL`` (with the
elapsed time and budget) straight to the terminal, so the lines show up in
plain ``pytest -v`` output as well.
"""

import random
import time

import pytest

from hecke2.cache import write_series
from hecke2.cli import cmd_express, cmd_verify
from hecke2.fps2 import BitSeries, agree_up_to, mul, power, theta_F, truncate
from hecke2.hecke import apply_Tp
from hecke2.oracle import DenseSeries, naive_mul, naive_Tp
from hecke2.spaces import build_context, hecke_module, trace, v_chunk, w_chunk
from hecke2.theta_algebra import annihilator
from hecke2.tseries import TSeries
from hecke2.verify import RunConfig, Session, run_one

PRIMES = (3, 5, 7, 11, 13)


@pytest.fixture(scope="module")
def sessions():
    return {lvl: Session(RunConfig(level=lvl)) for lvl in (1, 3, 5)}


@pytest.fixture
def report(pytestconfig):
    reporter = pytestconfig.pluginmanager.get_plugin("terminalreporter")
    capman = pytestconfig.pluginmanager.get_plugin("capturemanager")

    def emit(n, ok, elapsed, budget, note=""):
        line = f"criterion {n}: {'PASS' if ok else 'FAIL'} ({elapsed:.2f} s, budget {budget} s){note}"
        with capman.global_and_fixture_disabled():
            if reporter is not None:
                reporter.write_line(line)
            else:
                print(line)
        return ok

    return emit


def _checks(sessions, levels, names):
    failures = {}
    for lvl in levels:
        for name in names:
            rec = run_one(sessions[lvl], name)
            if rec.status != "pass":
                failures[(lvl, name)] = rec.witness
    return failures


def _criterion(report, n, budget, body):
    t0 = time.perf_counter()
    failures = body()
    dt = time.perf_counter() - t0
    ok = not failures and dt <= budget
    note = "" if dt <= budget else " over budget"
    report(n, ok, dt, budget, note)
    assert not failures, failures
    assert dt <= budget


def test_criterion_01_kernel_identities(sessions, report):
    _criterion(report, 1, 1, lambda: _checks(sessions, (3, 5), ["kernel_identities"]))


def test_criterion_02_trace_table(sessions, report):
    _criterion(report, 2, 5, lambda: _checks(sessions, (3, 5), ["trace_table", "conjugate_sum"]))


def test_criterion_03_composite_isomorphism(sessions, report):
    _criterion(report, 3, 10, lambda: _checks(sessions, (3, 5), ["composite_isomorphism"]))


def test_criterion_04_filtration_stability(sessions, report):
    _criterion(report, 4, 30, lambda: _checks(sessions, (3, 5), ["filtration_stability"]))


def test_criterion_05_w_splitting(sessions, report):
    _criterion(report, 5, 30, lambda: _checks(sessions, (3, 5), ["w_splitting"]))


def test_criterion_06_level1_expressions(sessions, report):
    def body():
        failures = _checks(sessions, (1,), ["solve_u"])
        for p, lead in ((11, "t3"), (13, "t5"), (7, "t3*t5")):
            out, _ = cmd_express(RunConfig(level=1, chunk=63, mdeg=3), p)
            if out["leading_form"] != lead:
                failures[p] = out
        return failures

    _criterion(report, 6, 120, body)


def test_criterion_07_lambda_epsilon(sessions, report):
    _criterion(report, 7, 120, lambda: _checks(sessions, (3, 5), ["lambda_epsilon"]))


def test_criterion_08_annihilator_forms(sessions, report):
    _criterion(report, 8, 120, lambda: _checks(sessions, (3, 5), ["annihilator_forms"]))


def test_criterion_09_ideal_structure(sessions, report):
    _criterion(report, 9, 600, lambda: _checks(sessions, (3, 5), ["ideal_structure"]))


def test_criterion_10_nilpotence(sessions, report):
    _criterion(report, 10, 300, lambda: _checks(sessions, (3, 5), ["nilpotence_sweep"]))


def _property_suites():
    failures = {}
    rng = random.Random(20261015)
    # oracle equivalence
    for i in range(1000):
        pa, pb = rng.randint(1, 400), rng.randint(1, 400)
        a, b = BitSeries(rng.getrandbits(pa), pa), BitSeries(rng.getrandbits(pb), pb)
        if mul(a, b) != naive_mul(DenseSeries.from_bitseries(a), DenseSeries.from_bitseries(b)).to_bitseries():
            failures.setdefault("mul", i)
    for i in range(1000):
        n, p = rng.randint(1, 2000), rng.choice(PRIMES)
        f = BitSeries(rng.getrandbits(n), n)
        if apply_Tp(f, p) != naive_Tp(DenseSeries.from_bitseries(f), p).to_bitseries():
            failures.setdefault("T_p", i)
    # commutativity
    for i in range(200):
        n = rng.randint(200, 3000)
        f = BitSeries(rng.getrandbits(n), n)
        for p in PRIMES:
            for q in PRIMES:
                if p < q:
                    x, y = apply_Tp(apply_Tp(f, p), q), apply_Tp(apply_Tp(f, q), p)
                    if not agree_up_to(x, y, min(x.prec, y.prec)):
                        failures.setdefault("commute", (i, p, q))
    # precision soundness: doubling N never changes reported bits
    N = 4096
    big = theta_F(2 * N)
    for i in range(50):
        f = BitSeries(rng.getrandbits(2 * N), 2 * N)
        g = BitSeries(f.bits & ((1 << N) - 1), N)
        h = BitSeries(big.bits & ((1 << N) - 1), N)
        small, large = mul(g, h), mul(f, big)
        if not agree_up_to(small, large, small.prec):
            failures.setdefault("mul@2N", i)
        for p in PRIMES:
            s, l = apply_Tp(g, p), apply_Tp(f, p)
            if not agree_up_to(s, l, s.prec):
                failures.setdefault("T_p@2N", (i, p))
    for level in (3, 5):
        c1, c2 = build_context(level, N), build_context(level, 2 * N)
        for k in (1, 3, 5, 9, 21):
            t1 = trace(c1, truncate(power(c1.theta(512), k), 512))
            t2 = trace(c2, truncate(power(c2.theta(1024), k), 1024))
            if not agree_up_to(t1, t2, t1.prec):
                failures.setdefault("trace@2N", (level, k))
        m1 = hecke_module(w_chunk(c1, 31), c1.primes.primes)
        m2 = hecke_module(w_chunk(c2, 31, prec=2 * 2 * 13 * 32), c2.primes.primes)
        if any(m1.mats[p].rows != m2.mats[p].rows for p in c1.primes.primes):
            failures.setdefault("W matrices@2N", level)
        if not annihilator(m1, 3).same_span(annihilator(m2, 3)):
            failures.setdefault("annihilator@2N", level)
    c1, c2 = build_context(1, N), build_context(1, 2 * N)
    v1 = hecke_module(v_chunk(c1, 31), (3, 5, 7))
    v2 = hecke_module(v_chunk(c2, 31, prec=2 * 2 * 13 * 32), (3, 5, 7))
    if any(v1.mats[p].rows != v2.mats[p].rows for p in (3, 5, 7)):
        failures.setdefault("V matrices@2N", 1)
    return failures


def test_criterion_11_property_suites(report):
    _criterion(report, 11, 120, _property_suites)


def test_criterion_12_negative_controls(sessions, report, tmp_path):
    def body():
        failures = _checks(sessions, (3, 5), ["negative_control"])
        # corrupted cache file: one flipped coefficient in the stored theta series
        cfg = RunConfig(level=3, checks=("kernel_identities",), cache_dir=str(tmp_path))
        n = max(cfg.kernel_prec, cfg.madic_prec)
        F = theta_F(n)
        write_series(tmp_path / f"theta_F-{n}.fps2", BitSeries(F.bits ^ (1 << 805), n))
        rep, code = cmd_verify(cfg)
        if code != 1 or rep["checks"][0]["status"] != "fail":
            failures["corrupted_cache"] = rep["checks"][0]
        # perturbed A: the product check itself must fail
        st = sessions[3].ideal_structure()
        bad = st.A + TSeries.var(7, sessions[3].S, 3)
        if sessions[3].modd().module.annihilates(bad * bad):
            failures["perturbed_A"] = str(bad)
        return failures

    _criterion(report, 12, 60, body)

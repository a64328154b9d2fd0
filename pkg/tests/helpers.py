"""Strategies and shared sessions for the test suite."""

from hypothesis import strategies as st

from hecke2.fps2 import BitSeries
from hecke2.verify import RunConfig, Session


@st.composite
def series(draw, min_prec=1, max_prec=700, sparse=False):
    prec = draw(st.integers(min_prec, max_prec))
    if sparse:
        exps = draw(st.sets(st.integers(0, prec - 1), max_size=12))
        bits = sum(1 << e for e in exps)
    else:
        bits = draw(st.integers(0, (1 << prec) - 1))
    return BitSeries(bits, prec)


def series_at(prec):
    return st.integers(0, (1 << prec) - 1).map(lambda b: BitSeries(b, prec))


_sessions = {}


def madic_session(level):
    """Default m-adic session (K = 63, d = 3), built once per test run."""
    if level not in _sessions:
        _sessions[level] = Session(RunConfig(level=level))
    return _sessions[level]

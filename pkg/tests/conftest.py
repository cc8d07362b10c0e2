import sys
from fractions import Fraction
from functools import lru_cache

import pytest
from hypothesis import HealthCheck, settings
from hypothesis import strategies as st

from asympt.delta import DeltaNet
from asympt.exact import PiecewisePoly, Poly
from asympt.expansion import make_ladder
from asympt.mollifier import build_base, build_mollifier

settings.register_profile("default", deadline=None, suppress_health_check=[HealthCheck.too_slow])
settings.load_profile("default")

LADDER = make_ladder(Fraction(1, 8), Fraction(1, 2), 10)


@lru_cache(maxsize=None)
def net(k: int, m: int | None = None, eps=Fraction(1, 16)) -> DeltaNet:
    return DeltaNet(build_mollifier(k, eps, build_base(m or k + 3)))


@pytest.fixture
def ladder():
    return LADDER


small_ints = st.integers(min_value=-6, max_value=6)
rationals = st.fractions(min_value=-4, max_value=4, max_denominator=12)
nonzero_rationals = rationals.filter(lambda q: q != 0)


@st.composite
def polys(draw, max_degree=4):
    return Poly(draw(st.lists(rationals, min_size=0, max_size=max_degree + 1)))


@st.composite
def piecewise(draw, max_pieces=3, max_degree=3):
    n = draw(st.integers(min_value=1, max_value=max_pieces))
    pts = sorted(set(draw(st.lists(rationals, min_size=n + 1, max_size=n + 1))))
    if len(pts) < 2:
        return PiecewisePoly()
    pieces = [draw(polys(max_degree)) for _ in range(len(pts) - 1)]
    return PiecewisePoly(pts, pieces)


def pytest_terminal_summary(terminalreporter):
    mod = sys.modules.get("test_acceptance")
    if mod is None or not mod.RESULTS:
        return
    terminalreporter.section("acceptance criteria")
    for n in sorted(mod.RESULTS):
        terminalreporter.write_line(mod.RESULTS[n])

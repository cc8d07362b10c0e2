from fractions import Fraction

import mpmath
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from asympt.distributions import (
    DeltaDeriv,
    Density,
    Derivative,
    Heaviside,
    PrincipalValue,
    Scale,
    Sum,
    bump,
    canonical,
    combine,
    continuity_bound,
    convolve_with_test,
    derivative,
    equivalent,
    format_distribution,
    linear_terms,
    pair,
    parse_distribution,
    parse_test_function,
)
from asympt.errors import DistributionSyntaxError, DomainError, NotSmoothError, SupportError, UnknownAtomError
from asympt.exact import Enclosure, PiecewisePoly, Poly

from conftest import net

TOL = Fraction(1, 2**40)


def overlaps(a, b, slack=Fraction(0)):
    a = a if isinstance(a, Enclosure) else Enclosure.point(a)
    b = b if isinstance(b, Enclosure) else Enclosure.point(b)
    return a.lo - slack <= b.hi and b.lo - slack <= a.hi


# random smooth test functions: a polynomial times a bump of order m
@st.composite
def smooth_tests(draw, m=6, center=None):
    c = draw(st.fractions(min_value=-1, max_value=1, max_denominator=8)) if center is None else center
    r = draw(st.fractions(min_value=Fraction(1, 4), max_value=Fraction(3, 2), max_denominator=8))
    coeffs = draw(st.lists(st.fractions(min_value=-3, max_value=3, max_denominator=6), min_size=1, max_size=3))
    p = Poly(coeffs)
    if p.is_zero:
        p = Poly.const(1)
    return bump(c, r, m) * p


atoms = st.one_of(
    st.builds(DeltaDeriv, st.integers(min_value=0, max_value=3), st.fractions(min_value=-1, max_value=1, max_denominator=4)),
    st.builds(Heaviside, st.fractions(min_value=-1, max_value=1, max_denominator=4)),
    st.builds(
        lambda a, cs: Density(PiecewisePoly.from_poly(Poly(cs), a, a + 1)),
        st.fractions(min_value=-2, max_value=1, max_denominator=4),
        st.lists(st.fractions(min_value=-2, max_value=2, max_denominator=3), min_size=1, max_size=3),
    ),
)


# ---- parsing and canonical form ------------------------------------------


def test_parse_examples():
    assert parse_distribution("delta") == DeltaDeriv(0, 0)
    assert parse_distribution("D^1(heaviside)") == DeltaDeriv(0, 0)
    t = parse_distribution("2*delta + D^2(heaviside@1)")
    assert t == Sum((Scale(2, DeltaDeriv(0, 0)), DeltaDeriv(1, 1)))
    assert parse_distribution("delta^(2)@1/2") == DeltaDeriv(2, Fraction(1, 2))
    assert parse_distribution("D(pv1x)") == PrincipalValue(1)
    dens = parse_distribution("poly:1,2@[0,1]")
    assert dens == Density(PiecewisePoly.from_poly(Poly((1, 2)), 0, 1))


def test_format_round_trip():
    for text in ["2*delta + D^2(heaviside@1)", "pv1x - 3*delta^(1)@2", "1/2*poly:1,0,1@[-1,1]"]:
        t = parse_distribution(text)
        assert parse_distribution(format_distribution(t)) == t


def test_parse_errors_carry_positions():
    with pytest.raises(UnknownAtomError) as info:
        parse_distribution("2*delta + gamma")
    assert info.value.position == 10
    with pytest.raises(DistributionSyntaxError) as info:
        parse_distribution("D^2(delta")
    assert info.value.position == 9
    with pytest.raises(DistributionSyntaxError):
        parse_distribution("")
    with pytest.raises(DistributionSyntaxError):
        parse_distribution("delta )")
    with pytest.raises(DistributionSyntaxError):
        parse_distribution("poly:1@[1,0]")


def test_heaviside_derivative_rules():
    assert derivative(Heaviside(2)) == DeltaDeriv(0, 2)
    assert derivative(Heaviside(), 3) == DeltaDeriv(2, 0)
    assert derivative(DeltaDeriv(1, 0)) == DeltaDeriv(2, 0)


def test_second_derivative_of_abs():
    absx = Density(PiecewisePoly([-2, 0, 2], [Poly((0, -1)), Poly((0, 1))]))
    terms = linear_terms(Derivative(2, absx))
    # interior kink gives 2 delta; the window edges contribute their own jumps
    assert terms[DeltaDeriv(0, 0)] == 2
    assert terms[DeltaDeriv(1, -2)] == 2 and terms[DeltaDeriv(1, 2)] == -2
    assert terms[DeltaDeriv(0, -2)] == -1 and terms[DeltaDeriv(0, 2)] == -1


@given(phis=st.lists(smooth_tests(m=5), min_size=20, max_size=20))
@settings(max_examples=1)
def test_rewrites_agree_under_pairing(phis):
    absx = Density(PiecewisePoly([-3, 0, 3], [Poly((0, -1)), Poly((0, 1))]))
    for phi in phis:
        assert pair(Derivative(1, Heaviside()), phi) == pair(DeltaDeriv(0, 0), phi)
        # test functions live inside (-3, 3), away from the window edges
        assert pair(Derivative(2, absx), phi) == 2 * phi(0)


def test_densities_merge():
    f = PiecewisePoly.from_poly(Poly((1,)), 0, 1)
    t = combine((2, Density(f)), (-1, Density(f)))
    assert t == Density(f)
    assert canonical(combine((1, Density(f)), (-1, Density(f)))) == Sum(())


# ---- pairing --------------------------------------------------------------


def test_pairing_examples():
    phi = bump(Fraction(1, 3), 1, 6)
    assert pair(DeltaDeriv(0, 0), phi) == phi(0)
    assert pair(DeltaDeriv(1, 0), phi) == -phi.derivative()(0)
    assert pair(Heaviside(0), phi) == phi.integrate(0, Fraction(4, 3))
    psi4 = bump(0, 1, 4)
    assert pair(PrincipalValue(0), psi4 * Poly((0, 1))) == 1


def test_pv_pairing_against_quadrature():
    phi = bump(Fraction(1, 2), 1, 4)
    enc = pair(PrincipalValue(0), phi, TOL)
    assert isinstance(enc, Enclosure) and enc.width <= TOL
    with mpmath.workdps(30):
        ref = mpmath.quad(lambda x: (_float_eval(phi, x) - _float_eval(phi, -x)) / x, [0, 0.5, 1, 1.5])
        assert abs(ref - mpmath.mpf(enc.mid.numerator) / enc.mid.denominator) < 1e-15


def _float_eval(phi, x):
    for u, v, p in phi.intervals():
        if float(u) <= x <= float(v):
            return sum(mpmath.mpf(c.numerator) / c.denominator * x**i for i, c in enumerate(p.coeffs))
    return mpmath.mpf(0)


def test_pairing_requires_smoothness():
    hat = PiecewisePoly([-1, 0, 1], [Poly((1, 1)), Poly((1, -1))])
    assert pair(DeltaDeriv(0, 0), hat) == 1
    with pytest.raises(NotSmoothError) as info:
        pair(DeltaDeriv(1, 0), hat)
    assert "delta^(1)" in str(info.value)
    with pytest.raises(NotSmoothError):
        pair(PrincipalValue(0), PiecewisePoly.indicator(0, 1))


@given(atom=atoms, phi=smooth_tests(), psi=smooth_tests(), a=st.integers(-3, 3), b=st.integers(-3, 3))
@settings(max_examples=40)
def test_pairing_is_bilinear(atom, phi, psi, a, b):
    assert pair(atom, phi * a + psi * b) == a * pair(atom, phi) + b * pair(atom, psi)
    t = combine((a, atom), (b, DeltaDeriv(1, 0)))
    assert pair(t, phi) == a * pair(atom, phi) + b * pair(DeltaDeriv(1, 0), phi)


@given(atom=atoms, phi=smooth_tests(), n=st.integers(min_value=1, max_value=2))
@settings(max_examples=40)
def test_derivative_adjoint_identity(atom, phi, n):
    assert pair(Derivative(n, atom), phi) == (-1) ** n * pair(atom, phi.derivative(n))


@given(phi=smooth_tests(center=Fraction(1, 3)), n=st.integers(min_value=0, max_value=2))
@settings(max_examples=10)
def test_pv_derivative_adjoint_identity(phi, n):
    lhs = pair(Derivative(1, PrincipalValue(n)), phi, TOL)
    rhs = pair(PrincipalValue(n), phi.derivative(), TOL)
    assert overlaps(lhs, -rhs if not isinstance(rhs, Enclosure) else Enclosure(-rhs.hi, -rhs.lo))


# ---- convolution ----------------------------------------------------------


def test_convolution_examples():
    phi = bump(0, 1, 5)
    assert convolve_with_test(DeltaDeriv(0, 0), phi) == phi
    assert convolve_with_test(DeltaDeriv(1, 0), phi) == phi.derivative()
    d = net(1).instantiate(Fraction(1, 8))
    ramp = convolve_with_test(Heaviside(0), d, window=(-1, 1))
    assert ramp(Fraction(1, 8)) == 1 and ramp(Fraction(1, 2)) == 1
    assert ramp(Fraction(-1, 8)) == 0
    x = Fraction(1, 20)
    assert ramp(x) == d.integrate(Fraction(-1, 8), x)
    with pytest.raises(SupportError):
        convolve_with_test(Heaviside(0), d)


@given(atom=atoms, phi=smooth_tests(), chi=smooth_tests())
@settings(max_examples=30)
def test_convolution_pairing_compatibility(atom, phi, chi):
    window = (-6, 6)
    conv = convolve_with_test(atom, phi, window)
    lhs = (conv * chi).integrate()
    assert lhs == pair(atom, phi.reflect().convolve(chi))


def test_pv_convolution_pairs_through_the_adjoint():
    phi, chi = bump(0, Fraction(1, 2), 5), bump(Fraction(1, 3), 1, 5)
    conv = convolve_with_test(PrincipalValue(0), phi)
    lhs = conv.pair(chi, TOL)
    rhs = pair(PrincipalValue(0), phi.reflect().convolve(chi), TOL)
    assert overlaps(lhs, rhs)
    # pointwise value against the defining pairing
    x = Fraction(1, 5)
    assert overlaps(conv(x, TOL), pair(PrincipalValue(0), phi.reflect().affine(1, x), TOL))


# ---- continuity bounds ----------------------------------------------------


def test_continuity_examples():
    b = continuity_bound(DeltaDeriv(1, 0), (-1, 1))
    assert (b.constant, b.order) == (1, 1)
    b = continuity_bound(Heaviside(0), (-2, 2))
    assert (b.constant, b.order) == (4, 0)
    with pytest.raises(DomainError):
        continuity_bound(DeltaDeriv(0, 0), (0, float("inf")))


@given(phis=st.lists(smooth_tests(m=6), min_size=100, max_size=100))
@settings(max_examples=1)
def test_continuity_bound_holds_for_random_smooth_tests(phis):
    exprs = [
        parse_distribution("2*delta + D^2(heaviside@1/2)"),
        parse_distribution("delta^(2)@-1/2 - 3*heaviside"),
        parse_distribution("poly:1,-2,1@[-2,1] + pv1x"),
    ]
    region = (-3, 3)
    for t in exprs:
        bound = continuity_bound(t, region)
        for phi in phis:
            assert bound.holds(t, phi, Fraction(1, 2**20))


def test_test_function_language():
    assert parse_test_function("bump@0:1") == bump(0, 1)
    assert parse_test_function("bump@1/2:1/4:6") == bump(Fraction(1, 2), Fraction(1, 4), 6)
    p = parse_test_function("poly:1,2@[0,2]:5")
    assert p == bump(1, 1, 5) * Poly((1, 2))
    with pytest.raises(DomainError):
        parse_test_function("gauss@0")
    assert equivalent(parse_distribution("D(heaviside)"), DeltaDeriv(0, 0))

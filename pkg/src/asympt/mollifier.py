"""Moment-vanishing mollifiers built from a polynomial bump.

The kernel is ``phi(x) = sum_j c_j psi(x / eps**j)`` with ``psi`` the
normalized bump ``c_m (1 - x^2)^m`` on ``[-1, 1]``.  The coefficients solve
the strengthened linear system ``sum_j c_j eps**((i+1) j) = [i == 0]`` for
``i = 0..k``, which makes every moment of order ``1..k`` vanish for any
symmetric or non-symmetric base.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field
from fractions import Fraction

import mpmath

from .errors import (
    DomainError,
    InsufficientSmoothnessError,
    LadderError,
    SearchExhaustedError,
    SingularSystemError,
)
from .exact import DEFAULT_WIDTH, Enclosure, PiecewisePoly, Poly, as_rational, fmt_rational, solve_linear
from .expansion import loglog_slope

MATCH_TOLERANCE = Fraction(1, 4)
SEARCH_DEPTH = 64


@dataclass(frozen=True)
class BaseBump:
    m: int
    shape: PiecewisePoly

    @property
    def normalization(self) -> Fraction:
        return self.shape.pieces[0].coeffs[0]


def build_base(m: int) -> BaseBump:
    """``psi_m = c_m (1 - x^2)^m`` on ``[-1, 1]`` with ``∫ psi_m = 1`` exactly."""
    if m < 1:
        raise InsufficientSmoothnessError(f"bump exponent m must be >= 1, got {m}")
    raw = Poly((1, 0, -1)) ** m
    c = 1 / raw.integrate(-1, 1)
    return BaseBump(m, PiecewisePoly.from_poly(raw * c, -1, 1))


def _check_eps(eps) -> Fraction:
    eps = as_rational(eps)
    if eps == 1:
        raise SingularSystemError("the Vandermonde system is singular at eps = 1")
    if not 0 < eps < 1:
        raise DomainError(f"eps must lie in (0, 1), got {eps}")
    return eps


def solve_vandermonde(k: int, eps) -> list:
    """Exact ``c_0..c_k`` with ``sum_j c_j eps^((i+1) j) = [i == 0]``, ``i = 0..k``."""
    if k < 0:
        raise DomainError(f"moment order k must be >= 0, got {k}")
    eps = _check_eps(eps)
    mat = [[eps ** ((i + 1) * j) for j in range(k + 1)] for i in range(k + 1)]
    rhs = [Fraction(int(i == 0)) for i in range(k + 1)]
    sol = solve_linear(mat, rhs)
    if sol is None:
        raise SingularSystemError(f"Vandermonde system singular for k={k}, eps={eps}")
    return sol


@dataclass
class Mollifier:
    """A stage-``k`` kernel.

    For ``dim > 1`` the kernel is the tensor product of ``shape`` with
    itself; ``shape`` is then the 1-d factor already rescaled so that the
    product vanishes outside the unit ball.
    """

    k: int
    epsilon: Fraction
    coeffs: list
    base: BaseBump
    shape: PiecewisePoly
    dim: int = 1
    radial_scale: Fraction = Fraction(1)

    @property
    def m(self) -> int:
        return self.base.m

    def moment(self, alpha) -> Fraction:
        """Exact moment ``∫ x^alpha phi`` for an int (1-d) or a multi-index."""
        if isinstance(alpha, int):
            alpha = (alpha,) + (0,) * (self.dim - 1)
        if len(alpha) != self.dim:
            raise DomainError(f"multi-index {alpha} does not match dim {self.dim}")
        out = Fraction(1)
        for a in alpha:
            out *= self.shape.moment(a)
        return out

    def moment_residuals(self, upto: int | None = None) -> list:
        upto = self.k if upto is None else upto
        return [self.moment(0) - 1] + [self.moment(i) for i in range(1, upto + 1)]

    def to_dict(self) -> dict:
        return {
            "k": self.k,
            "m": self.m,
            "dim": self.dim,
            "epsilon": fmt_rational(self.epsilon),
            "coeffs": [fmt_rational(c) for c in self.coeffs],
            "shape": self.shape.to_dict(),
        }

    def dumps(self) -> str:
        return json.dumps(self.to_dict(), indent=1)

    @classmethod
    def from_dict(cls, data: dict) -> "Mollifier":
        moll = build_mollifier(data["k"], as_rational(data["epsilon"]), build_base(data["m"]), data.get("dim", 1))
        stored = PiecewisePoly.from_dict(data["shape"])
        if stored != moll.shape or [fmt_rational(c) for c in moll.coeffs] != list(data["coeffs"]):
            raise DomainError("mollifier file is inconsistent with its (k, m, dim, epsilon)")
        return moll

    @classmethod
    def loads(cls, text: str) -> "Mollifier":
        return cls.from_dict(json.loads(text))


def radial_scale(dim: int) -> Fraction:
    """Rational ``1/ceil(sqrt(dim))``: the cube ``[-s, s]^dim`` then fits the unit ball."""
    return Fraction(1, math.isqrt(dim - 1) + 1) if dim > 1 else Fraction(1)


def build_mollifier(k: int, eps, base: BaseBump | None = None, dim: int = 1) -> Mollifier:
    if k < 1:
        raise DomainError(f"moment order k must be >= 1, got {k}")
    if dim < 1:
        raise DomainError(f"dimension must be >= 1, got {dim}")
    base = base or build_base(k + 3)
    if not base.shape.is_symmetric():
        raise DomainError("base bump must be symmetric")
    eps = _check_eps(eps)
    coeffs = solve_vandermonde(k, eps)
    phi = PiecewisePoly()
    for j, c in enumerate(coeffs):
        phi = phi + base.shape.affine(eps**j, 0) * c
    s = radial_scale(dim)
    if s != 1:
        phi = phi.affine(s, 0) * (1 / s)
    moll = Mollifier(k, eps, coeffs, base, phi, dim, s)
    bad = [i for i, r in enumerate(moll.moment_residuals()) if r != 0]
    if bad:
        raise SingularSystemError(f"moment check failed at orders {bad}")
    return moll


def l1_norm(phi, tol=DEFAULT_WIDTH) -> Enclosure:
    """Enclosure of ``∫ |phi|`` of width at most ``tol``."""
    tol = as_rational(tol)
    shape = phi.shape if isinstance(phi, Mollifier) else phi.shape if isinstance(phi, BaseBump) else phi
    dim = phi.dim if isinstance(phi, Mollifier) else 1
    if dim == 1:
        return shape.l1_norm(tol)
    inner = tol / (dim * 4**dim)
    while True:
        one = shape.l1_norm(inner)
        enc = Enclosure(one.lo**dim, one.hi**dim)
        if enc.width <= tol:
            return enc
        inner /= 16


def find_epsilon(k: int, delta, base: BaseBump | None = None, tol=None):
    """Largest ``eps = 2^-t`` whose ``∫|phi|`` upper bound is at most ``1 + delta``."""
    delta = as_rational(delta)
    if delta <= 0:
        raise DomainError(f"delta must be positive, got {delta}")
    tol = min(delta / 64, DEFAULT_WIDTH) if tol is None else as_rational(tol)
    base = base or build_base(k + 3)
    best = None
    for t in range(1, SEARCH_DEPTH + 1):
        eps = Fraction(1, 2**t)
        moll = build_mollifier(k, eps, base)
        enc = l1_norm(moll, tol)
        if best is None or enc.hi < best[1].hi:
            best = (eps, enc)
        if enc.hi <= 1 + delta:
            return eps, moll
    raise SearchExhaustedError(
        f"no eps >= 2^-{SEARCH_DEPTH} gives ∫|phi| <= 1 + {delta}; best {best[1]} at eps={best[0]}",
        best=best,
    )


# ---------------------------------------------------------------------------
# Exponent law for the coefficients
# ---------------------------------------------------------------------------


def predicted_exponents(k: int) -> tuple:
    """Integers ``(alpha_0..alpha_k, beta)`` with ``val(c_j) = alpha_j - beta``."""
    common = sum(q * (k + 1 - q) for q in range(1, k))
    alpha = [common + sum(k + 1 - m for m in range(j, k)) for j in range(k + 1)]
    return alpha, k + common


@dataclass
class ExponentReport:
    k: int
    alpha: list
    beta: int
    measured_valuations: list
    match: list = field(default_factory=list)

    @property
    def predicted_valuations(self) -> list:
        return [a - self.beta for a in self.alpha]

    @property
    def all_match(self) -> bool:
        return all(self.match)

    def identities_hold(self) -> bool:
        k, a, b = self.k, self.alpha, self.beta
        tri = all(j + a[j] - b == (k - j) * (k - j + 1) // 2 for j in range(k + 1))
        return tri and k + a[k] - b == 0


def exponent_report(k: int, ladder) -> ExponentReport:
    pts = [as_rational(e) for e in ladder]
    if len(pts) < 3 or len(set(pts)) != len(pts) or not all(0 < e < 1 for e in pts):
        raise LadderError("exponent report needs at least 3 distinct ladder points in (0, 1)")
    alpha, beta = predicted_exponents(k)
    table = [solve_vandermonde(k, e) for e in pts]
    measured = []
    for j in range(k + 1):
        vals = [abs(row[j]) for row in table]
        slope, _ = loglog_slope(pts, vals)
        measured.append(float(slope))
    match = [abs(v - (a - beta)) < MATCH_TOLERANCE for v, a in zip(measured, alpha)]
    return ExponentReport(k, alpha, beta, measured, match)


# ---------------------------------------------------------------------------
# Opt-in smooth bump (numerical)
# ---------------------------------------------------------------------------


def smooth_bump_l1(k: int, eps, dps: int = 30) -> tuple:
    """``∫|phi|`` for the C-infinity bump ``exp(-1/(1-x^2))`` by quadrature.

    Returns ``(value, error_estimate)`` as mpmath numbers.  This mode is not
    exact: moments vanish only up to the quadrature error.
    """
    eps = _check_eps(eps)
    coeffs = solve_vandermonde(k, eps)
    with mpmath.workdps(dps):

        def raw(x):
            return mpmath.exp(-1 / (1 - x * x)) if abs(x) < 1 else mpmath.mpf(0)

        norm = mpmath.quad(raw, [-1, 0, 1])
        scales = [mpmath.mpf(eps.numerator) ** j / mpmath.mpf(eps.denominator) ** j for j in range(k + 1)]
        cs = [mpmath.mpf(c.numerator) / c.denominator for c in coeffs]

        def phi(x):
            return sum(c * raw(x / s) for c, s in zip(cs, scales)) / norm

        knots = sorted({0} | {s for s in scales} | {-s for s in scales})
        val, err = mpmath.quad(lambda x: abs(phi(x)), knots, error=True)
    return val, err

"""Delta nets ``D_eps = eps^-d theta(x/eps)``, their audit, and cut-off functions."""

from __future__ import annotations

import math
import re
import warnings
from dataclasses import dataclass, field
from fractions import Fraction

import mpmath

from .errors import DomainError, InsufficientSmoothnessError
from .exact import DEFAULT_WIDTH, Enclosure, PiecewisePoly, as_rational
from .mollifier import Mollifier, build_mollifier

MOMENT_SEARCH_EXTRA = 4


@dataclass(frozen=True)
class DeltaNet:
    """A stage-``k`` net; ``base.shape`` is the 1-d kernel ``theta``.

    For ``dim > 1`` the net is the tensor product of the 1-d factor, so every
    quantity factorizes; :meth:`instantiate` returns that factor.
    """

    base: Mollifier

    @property
    def k(self) -> int:
        return self.base.k

    @property
    def dim(self) -> int:
        return self.base.dim

    @property
    def theta(self) -> PiecewisePoly:
        return self.base.shape

    def instantiate(self, eps) -> PiecewisePoly:
        eps = as_rational(eps)
        if not 0 < eps < 1:
            raise DomainError(f"eps must lie in (0, 1), got {eps}")
        return self.theta.affine(eps, 0) * (1 / eps)


def make_net(k: int, eps, m: int | None = None, dim: int = 1) -> DeltaNet:
    from .mollifier import build_base

    return DeltaNet(build_mollifier(k, eps, build_base(m or k + 3), dim))


def instantiate_delta(net: DeltaNet, eps) -> PiecewisePoly:
    return net.instantiate(eps)


# ---------------------------------------------------------------------------
# Audit
# ---------------------------------------------------------------------------


@dataclass
class DeltaReport:
    epsilon: Fraction
    support_radius: Fraction
    mass: Fraction
    moment_residuals: list
    first_nonzero_moment: int | None
    l1: Enclosure
    l1_excess: Enclosure
    base_l1_excess: Enclosure
    excess_bound: Fraction
    sup_quantities: dict = field(default_factory=dict)

    @property
    def support_ok(self) -> bool:
        return self.support_radius <= self.epsilon

    @property
    def moments_ok(self) -> bool:
        return self.mass == 1 and all(r == 0 for r in self.moment_residuals)

    @property
    def excess_scale_free(self) -> bool:
        return self.l1_excess == self.base_l1_excess

    @property
    def excess_ok(self) -> bool:
        return self.l1_excess.hi <= self.excess_bound

    def rows(self) -> list:
        out = [
            ("(i) support radius", str(self.support_radius), self.support_ok),
            ("(ii) mass", str(self.mass), self.mass == 1),
            ("(iii) moment residuals 1..k", " ".join(str(r) for r in self.moment_residuals), self.moments_ok),
            ("(iii) first nonzero moment", str(self.first_nonzero_moment), True),
            ("(iv) L1 excess", f"{float(self.l1_excess.lo):.6g}..{float(self.l1_excess.hi):.6g}", self.excess_ok),
        ]
        for a, v in sorted(self.sup_quantities.items()):
            out.append((f"(v) |ln eps|^-1 eps^(d+{a}) sup|D^({a})|", mpmath.nstr(v, 10), True))
        return out


def first_nonzero_moment(shape: PiecewisePoly, start: int, stop: int) -> int | None:
    for i in range(start, stop + 1):
        if shape.moment(i) != 0:
            return i
    return None


def scaled_sup(net: DeltaNet, eps, alpha: int) -> Enclosure:
    """``eps^(d+alpha) sup |D_eps^(alpha)|`` (equals ``sup |theta^(alpha)|`` exactly)."""
    eps = as_rational(eps)
    d = net.instantiate(eps).derivative(alpha)
    sup = d.sup_abs()
    f = eps ** (1 + alpha)
    one_d = Enclosure(sup.lo * f, sup.hi * f)
    if net.dim == 1:
        return one_d
    rest = net.instantiate(eps).sup_abs() * eps
    return one_d * Enclosure(rest.lo ** (net.dim - 1), rest.hi ** (net.dim - 1))


def audit_delta(net: DeltaNet, eps, k: int | None = None, alpha_max: int = 2, tol=DEFAULT_WIDTH) -> DeltaReport:
    eps = as_rational(eps)
    k = net.k if k is None else k
    if alpha_max >= net.base.m - 1:
        raise InsufficientSmoothnessError(
            f"alpha_max={alpha_max} needs a base bump with m > {alpha_max + 1} (got m={net.base.m})"
        )
    d = net.instantiate(eps)
    lo, hi = d.support
    l1 = d.l1_norm(tol)
    base_l1 = net.theta.l1_norm(tol)
    sups = {}
    with mpmath.workdps(30):
        log_eps = abs(mpmath.log(mpmath.mpf(eps.numerator) / eps.denominator))
        for a in range(alpha_max + 1):
            s = scaled_sup(net, eps, a)
            sups[a] = (mpmath.mpf(s.mid.numerator) / s.mid.denominator) / log_eps
    return DeltaReport(
        epsilon=eps,
        support_radius=max(-lo, hi),
        mass=d.integrate(),
        moment_residuals=[d.moment(i) for i in range(1, k + 1)],
        first_nonzero_moment=first_nonzero_moment(d, 1, k + MOMENT_SEARCH_EXTRA),
        l1=l1,
        l1_excess=l1 - 1,
        base_l1_excess=base_l1 - 1,
        excess_bound=Fraction(1, k),
        sup_quantities=sups,
    )


def standard_impossibility_check(k_list, base=None, eps=Fraction(1, 16)) -> list:
    """First nonzero moment of each stage-``k`` kernel at fixed ``eps``.

    A fixed kernel always has some nonzero moment; vanishing of every moment
    is only approached along the family ``eps -> 0``.
    """
    rows = []
    for k in k_list:
        moll = build_mollifier(k, eps, base)
        first = first_nonzero_moment(moll.shape, 1, 2 * k + 2)
        if first is None or first > 2 * k:
            raise AssertionError(f"stage {k}: all moments through 2k vanish for a fixed kernel")
        rows.append({"k": k, "first_nonzero_moment": first, "value": moll.shape.moment(first)})
    return rows


# ---------------------------------------------------------------------------
# Domains and cut-offs
# ---------------------------------------------------------------------------


def _endpoint(text: str):
    t = text.strip().lower()
    if t in ("inf", "+inf"):
        return math.inf
    if t == "-inf":
        return -math.inf
    return as_rational(t)


@dataclass(frozen=True)
class Domain1D:
    """Finite union of disjoint open intervals (endpoints may be infinite)."""

    intervals: tuple

    def __post_init__(self):
        if not self.intervals:
            raise DomainError("domain needs at least one interval")
        ivs = sorted(self.intervals, key=lambda iv: iv[0])
        for a, b in ivs:
            if not a < b:
                raise DomainError(f"empty interval ({a}, {b})")
        for (_, b), (c, _) in zip(ivs, ivs[1:]):
            if c < b:
                raise DomainError("domain intervals overlap")
        object.__setattr__(self, "intervals", tuple(ivs))

    @classmethod
    def real_line(cls) -> "Domain1D":
        return cls(((-math.inf, math.inf),))

    @property
    def is_real_line(self) -> bool:
        return self.intervals == ((-math.inf, math.inf),)

    def contains(self, x) -> bool:
        return any(a < x < b for a, b in self.intervals)

    def boundary_distance(self, x):
        """Distance from ``x`` to the boundary (``inf`` for the real line; 0 outside)."""
        for a, b in self.intervals:
            if a < x < b:
                return min(x - a, b - x)
        return Fraction(0)

    def __str__(self):
        def f(v):
            return "inf" if v == math.inf else "-inf" if v == -math.inf else str(v)

        return ",".join(f"({f(a)},{f(b)})" for a, b in self.intervals)


_IV = re.compile(r"\(\s*([^,()]+)\s*,\s*([^,()]+)\s*\)")


def parse_domain(text: str) -> Domain1D:
    text = text.strip()
    if text.upper() in ("R", "REAL"):
        return Domain1D.real_line()
    ivs = _IV.findall(text)
    if not ivs or _IV.sub("", text).replace(",", "").strip():
        raise DomainError(f"cannot parse domain {text!r}; expected '(a,b),(c,d)'")
    return Domain1D(tuple((_endpoint(a), _endpoint(b)) for a, b in ivs))


def core_set(domain: Domain1D, eps) -> list:
    """``X = {|x| <= 1/eps, dist(x, boundary) >= 2 eps}`` as closed intervals."""
    eps = as_rational(eps)
    ball = 1 / eps
    out = []
    for a, b in domain.intervals:
        lo = -ball if a == -math.inf else max(a + 2 * eps, -ball)
        hi = ball if b == math.inf else min(b - 2 * eps, ball)
        if lo < hi:
            out.append((lo, hi))
    return out


@dataclass
class Cutoff:
    epsilon: Fraction
    shape: PiecewisePoly
    domain: Domain1D
    core: list

    def __call__(self, x) -> Fraction:
        return self.shape(x)

    def one_region(self) -> list:
        """Intervals on which ``Pi == 1`` is guaranteed (margin ``eps`` inside the core)."""
        e = self.epsilon
        return [(lo + e, hi - e) for lo, hi in self.core if lo + e <= hi - e]


def build_cutoff(domain: Domain1D, eps, net: DeltaNet) -> Cutoff:
    """``Pi = chi_X ⋆ D_eps`` computed exactly and checked on its breakpoints."""
    eps = as_rational(eps)
    d = net.instantiate(eps)
    core = core_set(domain, eps)
    if not core:
        warnings.warn(f"core set is empty at eps={eps}; returning the zero cut-off", stacklevel=2)
        return Cutoff(eps, PiecewisePoly(), domain, core)
    chi = PiecewisePoly()
    for lo, hi in core:
        chi = chi + PiecewisePoly.indicator(lo, hi)
    shape = chi.convolve(d)
    cut = Cutoff(eps, shape, domain, core)
    _verify_cutoff(cut)
    return cut


def _verify_cutoff(cut: Cutoff):
    """Pieces inside the one-region are the constant 1; support stays ``eps`` inside."""
    for lo, hi in cut.one_region():
        for u, v, p in cut.shape.intervals():
            if u < hi and v > lo and p != p.const(1):
                raise AssertionError(f"cut-off is not identically 1 on [{max(u, lo)}, {min(v, hi)}]")
    a, b = cut.shape.support
    if cut.domain.boundary_distance(a) < cut.epsilon or cut.domain.boundary_distance(b) < cut.epsilon:
        raise AssertionError("cut-off support reaches within eps of the boundary")
    for u, v, _ in cut.shape.intervals():
        mid = (u + v) / 2
        if cut.domain.boundary_distance(mid) < cut.epsilon and cut.shape(mid) != 0:
            raise AssertionError(f"cut-off nonzero at {mid}, within eps of the boundary")

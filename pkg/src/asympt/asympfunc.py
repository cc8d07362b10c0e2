"""Finite-stage representatives of asymptotic functions.

A :class:`Representative` stores one exact function per ladder point ``eps``
on a bounded window.  Distributions are embedded as ``(T * Pi_eps) ⋆ D_eps``,
smooth functions as the constant family.  Algebra is slicewise; pairings are
fitted into :class:`~asympt.field.AsymptoticNumber` values; growth is
measured as exact log-log slopes of sup-norms on a compact window.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from fractions import Fraction

from .delta import DeltaNet, Domain1D, build_cutoff, core_set
from .distributions import (
    DeltaDeriv,
    Density,
    Heaviside,
    MixedFunction,
    PrincipalValue,
    add_values,
    convolve_with_test,
    linear_terms,
    pair,
)
from .errors import (
    BoundaryFlagError,
    DomainError,
    InsufficientSmoothnessError,
    LadderError,
    NoValidExpansionError,
    NotSmoothError,
    SupportError,
)
from .exact import DEFAULT_WIDTH, Enclosure, PiecewisePoly, Poly, as_rational
from .expansion import EpsLadder, ExpansionFit, OrderEstimate, fit_expansion, is_geometric, measure_order, rational_power
from .field import INF, AsymptoticNumber

BOUNDARY_MARGIN = 3
NEITHER_RESIDUAL = 0.1
EXACT_SLOPE_DENOMINATOR = 12


def ladder_points(ladder) -> tuple:
    pts = tuple(ladder.points) if isinstance(ladder, EpsLadder) else tuple(as_rational(e) for e in ladder)
    if not pts or not all(0 < e < 1 for e in pts):
        raise LadderError("ladder points must lie in (0, 1)")
    if len(set(pts)) != len(pts):
        raise LadderError("ladder points must be distinct")
    return pts


def _window(w) -> tuple:
    lo, hi = (as_rational(v) for v in w)
    if not lo < hi:
        raise DomainError(f"invalid window [{lo}, {hi}]")
    return lo, hi


@dataclass
class Representative:
    """One exact slice per ``eps``, valid on ``window``.

    ``pair_regions[eps]`` lists the intervals where the slice agrees with the
    unwindowed construction (where the cut-off is identically 1); ``None``
    means the whole window.
    """

    slices: dict
    window: tuple
    provenance: tuple
    stage: int | None = None
    pair_regions: dict = field(default_factory=dict)

    @property
    def ladder(self) -> tuple:
        return tuple(self.slices)

    def __getitem__(self, eps):
        return self.slices[as_rational(eps)]

    def is_zero(self) -> bool:
        return all(_is_zero_slice(s) for s in self.slices.values())

    def __add__(self, other):
        return rep_add(self, other)

    def __sub__(self, other):
        return rep_add(self, rep_scale(other, -1))

    def __mul__(self, other):
        if isinstance(other, Representative):
            return rep_mul(self, other)
        return rep_scale(self, other)

    __rmul__ = __mul__

    def __neg__(self):
        return rep_scale(self, -1)


def _is_zero_slice(s) -> bool:
    if isinstance(s, MixedFunction):
        return s.smooth.is_zero and not s.pv_terms
    return s.is_zero


# ---------------------------------------------------------------------------
# Embeddings
# ---------------------------------------------------------------------------


def _atom_points(terms) -> list:
    pts = []
    for atom in terms:
        if isinstance(atom, (DeltaDeriv, Heaviside)):
            pts.append(atom.a)
        elif isinstance(atom, Density):
            pts.extend(atom.f.support)
        else:
            pts.append(Fraction(0))
    return pts


def default_window(t, domain: Domain1D | None = None, ladder=None) -> tuple:
    """Hull of the atom locations widened by 1 (and at least ``[-2, 2]``), clipped to the domain."""
    pts = _atom_points(linear_terms(t)) + [Fraction(0)]
    lo, hi = min(min(pts) - 1, Fraction(-2)), max(max(pts) + 1, Fraction(2))
    if domain is not None and not domain.is_real_line:
        a = min(iv[0] for iv in domain.intervals)
        b = max(iv[1] for iv in domain.intervals)
        emax = max(ladder_points(ladder)) if ladder is not None else Fraction(0)
        ball = 1 / emax if emax else None
        lo = a if a != -math.inf else -ball
        hi = b if b != math.inf else ball
    return lo, hi


def embed_distribution(t, domain: Domain1D | None, net: DeltaNet, ladder, window=None) -> Representative:
    """``eps -> ((T * Pi_eps) ⋆ D_eps)`` on ``window``.

    The cut-off is skipped on the real line and whenever ``T`` is a
    combination of point atoms with margin ``3 eps`` and densities inside the
    cut-off's plateau; otherwise Heaviside atoms and densities are multiplied
    by ``Pi_eps`` exactly.  Point atoms closer than ``3 eps_max`` to the
    boundary are rejected.
    """
    if net.k < 1:
        raise DomainError("embedding needs a net of stage k >= 1")
    if net.dim != 1:
        raise DomainError("embedding is implemented for d = 1")
    domain = domain or Domain1D.real_line()
    pts = ladder_points(ladder)
    terms = linear_terms(t)
    window = _window(window or default_window(t, domain, pts))
    emax = max(pts)
    bounded = not domain.is_real_line
    if bounded:
        for atom in terms:
            if isinstance(atom, PrincipalValue):
                raise DomainError("p.v. 1/x is embedded only on the real line")
            if isinstance(atom, (DeltaDeriv, Heaviside)):
                dist = domain.boundary_distance(atom.a)
                if dist == 0:
                    raise SupportError(f"{atom} lies outside the domain {domain}")
                if dist < BOUNDARY_MARGIN * emax:
                    raise BoundaryFlagError(
                        f"{atom} lies within {BOUNDARY_MARGIN}*eps={BOUNDARY_MARGIN * emax} of the boundary of {domain}"
                    )
    slices, regions = {}, {}
    for eps in pts:
        d = net.instantiate(eps)
        plateau = [(lo + eps, hi - eps) for lo, hi in core_set(domain, eps)] if bounded else None
        needs_cut = bounded and any(
            isinstance(a, Heaviside) or (isinstance(a, Density) and not _inside(a.f.support, plateau))
            for a in terms
        )
        if needs_cut:
            cut = build_cutoff(domain, eps, net).shape
            local = []
            for atom, c in terms.items():
                if isinstance(atom, Heaviside):
                    hcut = cut.clip(atom.a, cut.support[1]) if not cut.is_zero and atom.a < cut.support[1] else PiecewisePoly()
                    local.append((Density(hcut), c))
                elif isinstance(atom, Density):
                    local.append((Density(atom.f * cut), c))
                else:
                    local.append((atom, c))
            expr = _combination(local)
        else:
            expr = _combination(terms.items())
        slices[eps] = convolve_with_test(expr, d, window)
        regions[eps] = plateau
    return Representative(slices, window, ("embed", str(_combination(terms.items()))), net.k, regions)


def _inside(support, plateau) -> bool:
    if plateau is None:
        return True
    a, b = support
    return any(lo <= a and b <= hi for lo, hi in plateau)


def _combination(items):
    from .distributions import Scale, Sum

    return Sum(tuple(Scale(as_rational(c), a) for a, c in items))


def embed_smooth(f, ladder, window=(-2, 2)) -> Representative:
    """Constant family ``eps -> f`` restricted to ``window``."""
    pts = ladder_points(ladder)
    window = _window(window)
    if isinstance(f, Poly):
        g = PiecewisePoly.from_poly(f, *window) if not f.is_zero else PiecewisePoly()
    elif isinstance(f, PiecewisePoly):
        g = f.clip(*window)
    else:
        c = as_rational(f)
        g = PiecewisePoly.from_poly(Poly.const(c), *window) if c else PiecewisePoly()
    return Representative({e: g for e in pts}, window, ("smooth", repr(f)), None, {e: None for e in pts})


# ---------------------------------------------------------------------------
# Algebra
# ---------------------------------------------------------------------------


def _aligned(r: Representative, s: Representative):
    if set(r.slices) != set(s.slices):
        raise LadderError("representatives live on different ladders")
    lo, hi = max(r.window[0], s.window[0]), min(r.window[1], s.window[1])
    if not lo < hi:
        raise DomainError("representative windows do not overlap")
    return (lo, hi)


def _restrict(sl, window):
    if isinstance(sl, MixedFunction):
        return sl.restrict(*window)
    return sl.clip(*window)


def _merge_regions(r, s, eps):
    a, b = r.pair_regions.get(eps), s.pair_regions.get(eps)
    if a is None:
        return b
    if b is None:
        return a
    out = []
    for u, v in a:
        for x, y in b:
            lo, hi = max(u, x), min(v, y)
            if lo < hi:
                out.append((lo, hi))
    return out


def _stage(r, s):
    stages = [x for x in (r.stage, s.stage) if x is not None]
    return min(stages) if stages else None


def rep_add(r: Representative, s: Representative) -> Representative:
    w = _aligned(r, s)
    slices = {}
    for e in r.slices:
        a, b = _restrict(r.slices[e], w), _restrict(s.slices[e], w)
        slices[e] = (a + b) if not isinstance(a, MixedFunction) and not isinstance(b, MixedFunction) else MixedFunction(PiecewisePoly()) + a + b
    return Representative(slices, w, ("add", r.provenance, s.provenance), _stage(r, s),
                          {e: _merge_regions(r, s, e) for e in r.slices})


def rep_mul(r: Representative, s: Representative) -> Representative:
    w = _aligned(r, s)
    slices = {}
    for e in r.slices:
        a, b = _restrict(r.slices[e], w), _restrict(s.slices[e], w)
        slices[e] = b * a if isinstance(b, MixedFunction) else a * b
    return Representative(slices, w, ("mul", r.provenance, s.provenance), _stage(r, s),
                          {e: _merge_regions(r, s, e) for e in r.slices})


def rep_derivative(r: Representative, n: int = 1) -> Representative:
    """Slicewise classical derivative; jumps are allowed only at the window edges."""
    slices = {}
    for e, sl in r.slices.items():
        try:
            slices[e] = sl.derivative(n, interior=r.window) if isinstance(sl, MixedFunction) else sl.derivative(n, interior=r.window)
        except NotSmoothError as exc:
            raise InsufficientSmoothnessError(f"slice at eps={e} is not C^{n - 1} inside the window: {exc}") from None
    return Representative(slices, r.window, ("derivative", n, r.provenance), r.stage, dict(r.pair_regions))


def rep_scale(r: Representative, c) -> Representative:
    """Multiply slice ``eps`` by ``c`` (a rational, or an AsymptoticNumber evaluated at ``eps``)."""
    slices = {}
    for e, sl in r.slices.items():
        v = c.evaluate(e) if isinstance(c, AsymptoticNumber) else as_rational(c)
        slices[e] = sl * v
    return Representative(slices, r.window, ("scale", str(c), r.provenance), r.stage, dict(r.pair_regions))


def rep_algebra(op: str, *args):
    if op == "add":
        return rep_add(*args)
    if op == "mul":
        return rep_mul(*args)
    if op == "derivative":
        return rep_derivative(*args)
    if op == "scale":
        return rep_scale(*args)
    raise ValueError(f"unknown operation {op!r}")


# ---------------------------------------------------------------------------
# Growth classification
# ---------------------------------------------------------------------------


@dataclass
class GrowthEntry:
    alpha: int
    window: tuple
    slope: object
    residual: float
    exact: bool
    classification: str
    order: object
    sups: list

    def __str__(self):
        return f"alpha={self.alpha} slope={self.slope} residual={self.residual:.3g} -> {self.classification}({self.order})"


@dataclass
class GrowthReport:
    entries: list

    @property
    def is_moderate(self) -> bool:
        return all(e.classification in ("moderate", "null") for e in self.entries)

    @property
    def is_null(self) -> bool:
        return all(e.classification == "null" for e in self.entries)

    def __getitem__(self, alpha) -> GrowthEntry:
        return self.entries[alpha]


def _exact_slope(pts, sups, guess: float):
    """Rational ``s`` with ``sup_i = sup_0 (eps_i/eps_0)^s`` exactly, if any."""
    s = Fraction(guess).limit_denominator(EXACT_SLOPE_DENOMINATOR)
    e0, s0 = pts[0], sups[0]
    try:
        for e, sup in zip(pts, sups):
            f = rational_power(e / e0, s)
            if sup.lo != s0.lo * f or sup.hi != s0.hi * f:
                return None
    except ValueError:
        return None
    return s


def classify(r: Representative, window, alpha_max: int = 2, ladder=None) -> GrowthReport:
    """Growth of ``sup_K |d^alpha R_eps|`` on the compact window ``K``."""
    pts = ladder_points(ladder) if ladder is not None else r.ladder
    if len(pts) < 4 or not is_geometric(pts):
        raise LadderError("classification needs a geometric ladder of at least 4 points")
    k_lo, k_hi = _window(window)
    if not (r.window[0] <= k_lo and k_hi <= r.window[1]):
        raise SupportError(f"window [{k_lo}, {k_hi}] is not inside the representative window {r.window}")
    entries = []
    for alpha in range(alpha_max + 1):
        sups = []
        for e in pts:
            sl = r.slices[e]
            if isinstance(sl, MixedFunction):
                if sl.pv_terms:
                    raise DomainError("sup-norms of p.v. convolutions are not available")
                sl = sl.smooth
            try:
                d = sl.derivative(alpha, interior=(k_lo, k_hi))
            except NotSmoothError as exc:
                raise InsufficientSmoothnessError(f"slice at eps={e} is not C^{alpha - 1} on the window: {exc}") from None
            sups.append(d.sup_abs(k_lo, k_hi))
        entries.append(_classify_sups(alpha, (k_lo, k_hi), pts, sups))
    return GrowthReport(entries)


def _classify_sups(alpha, window, pts, sups) -> GrowthEntry:
    if all(s.hi == 0 for s in sups):
        return GrowthEntry(alpha, window, INF, 0.0, True, "null", INF, sups)
    est = measure_order([(e, s) for e, s in zip(pts, sups)])
    slope, residual, exact = est.order, est.residual, False
    if all(s.lo > 0 for s in sups):
        s_exact = _exact_slope(pts, sups, est.order)
        if s_exact is not None:
            slope, residual, exact = s_exact, 0.0, True
    if residual > NEITHER_RESIDUAL:
        return GrowthEntry(alpha, window, slope, residual, exact, "neither", None, sups)
    if slope >= 1:
        return GrowthEntry(alpha, window, slope, residual, exact, "null", math.floor(slope), sups)
    return GrowthEntry(alpha, window, slope, residual, exact, "moderate", max(0, math.ceil(-slope)), sups)


# ---------------------------------------------------------------------------
# Pairings
# ---------------------------------------------------------------------------


@dataclass
class PairingResult:
    number: AsymptoticNumber | None
    fit: ExpansionFit | None
    samples: list
    warning: str | None = None

    def to_dict(self) -> dict:
        out = self.fit.to_dict() if self.fit is not None else {}
        out["number"] = str(self.number) if self.number is not None else None
        out["samples"] = [{"epsilon": str(e), "value": _fmt_value(v)} for e, v in self.samples]
        if self.warning:
            out["warning"] = self.warning
        return out


def _fmt_value(v):
    if isinstance(v, Enclosure):
        return {"enclosure": [str(v.lo), str(v.hi)], "width": str(v.width)}
    return str(v)


def _check_pair_support(r: Representative, phi: PiecewisePoly, eps):
    if phi.is_zero:
        return
    a, b = phi.support
    if a < r.window[0] or b > r.window[1]:
        raise SupportError(f"test function support [{a}, {b}] leaves the window {r.window}")
    region = r.pair_regions.get(eps)
    if region is not None and not _inside((a, b), region):
        raise SupportError(f"test function support [{a}, {b}] leaves the cut-off plateau at eps={eps}")


def slice_pairings(r: Representative, phi: PiecewisePoly, tol=DEFAULT_WIDTH) -> list:
    out = []
    for e, sl in r.slices.items():
        _check_pair_support(r, phi, e)
        if isinstance(sl, MixedFunction):
            out.append((e, sl.pair(phi, tol)))
        else:
            out.append((e, (sl * phi).integrate()))
    return out


def rep_pair(r: Representative, phi: PiecewisePoly, grid, trunc=8, tol=DEFAULT_WIDTH, max_residual=None) -> PairingResult:
    samples = slice_pairings(r, phi, tol)
    kwargs = {} if max_residual is None else {"max_residual": max_residual}
    try:
        fit = fit_expansion(samples, grid, trunc, **kwargs)
    except NoValidExpansionError as exc:
        return PairingResult(None, exc.fit, samples, f"not classifiable on this grid: {exc}")
    return PairingResult(fit.to_number(), fit, samples)


# ---------------------------------------------------------------------------
# Quantitative checks
# ---------------------------------------------------------------------------


@dataclass
class PreservationReport:
    estimate: OrderEstimate
    errors: list
    target: object

    @property
    def exact_zero(self) -> bool:
        return all(e == 0 for _, e in self.errors)


def check_pairing_preservation(t, phi: PiecewisePoly, net: DeltaNet, ladder, domain=None, window=None) -> PreservationReport:
    """Decay of ``|<R_eps, phi> - <T, phi>|`` along the ladder."""
    r = embed_distribution(t, domain, net, ladder, window)
    target = pair(t, phi)
    errors = []
    for e, v in slice_pairings(r, phi):
        diff = add_values(v, -target)
        errors.append((e, abs(diff)))
    return PreservationReport(measure_order(errors), errors, target)


@dataclass
class SmoothConsistency:
    defects: dict
    sups: dict
    bounds: dict
    bound_holds: dict
    estimate: OrderEstimate

    @property
    def all_bounds_hold(self) -> bool:
        return all(self.bound_holds.values())

    @property
    def exact_zero(self) -> bool:
        return all(d.is_zero for d in self.defects.values())


def check_smooth_consistency(f, net: DeltaNet, ladder, window) -> SmoothConsistency:
    """``sup_K |f ⋆ D_eps - f|`` per slice against the Taylor bound.

    The defect is computed exactly on ``K`` from ``f`` restricted to
    ``K + [-eps, eps]``.  The bound is
    ``eps^(k+1)/(k+1)! * ∫|D_eps| * sup_{K+eps} |f^(k+1)|``.
    """
    k = net.k
    k_lo, k_hi = _window(window)
    pts = ladder_points(ladder)
    defects, sups, bounds, holds = {}, {}, {}, {}
    for e in pts:
        wlo, whi = k_lo - e, k_hi + e
        g = PiecewisePoly.from_poly(f, wlo, whi) if isinstance(f, Poly) else f.clip(wlo, whi)
        try:
            top = g.derivative(k + 1, interior=(wlo, whi))
        except NotSmoothError as exc:
            raise InsufficientSmoothnessError(f"f needs {k + 1} classical derivatives near K: {exc}") from None
        d = net.instantiate(e)
        defect = (g.convolve(d) - g).clip(k_lo, k_hi)
        sup = defect.sup_abs(k_lo, k_hi)
        l1 = d.l1_norm()
        ftop = top.sup_abs(wlo, whi)
        scale = e ** (k + 1) / math.factorial(k + 1)
        bound = Enclosure(scale * l1.lo * ftop.lo, scale * l1.hi * ftop.hi)
        defects[e], sups[e], bounds[e] = defect, sup, bound
        holds[e] = sup.hi <= bound.lo
    est = measure_order([(e, sups[e]) for e in pts])
    return SmoothConsistency(defects, sups, bounds, holds, est)


@dataclass
class ProductReport:
    result: PairingResult
    lhs: str
    rhs: str

    @property
    def number(self):
        return self.result.number

    def to_dict(self) -> dict:
        out = {"lhs": self.lhs, "rhs": self.rhs}
        out.update(self.result.to_dict())
        return out


def product_experiment(lhs, rhs, phi, net: DeltaNet, ladder, grid, trunc=8, domain=None, window=None, tol=DEFAULT_WIDTH):
    """Embed both factors, multiply slicewise, pair with ``phi`` and fit."""
    if window is None:
        a = default_window(lhs, domain, ladder)
        b = default_window(rhs, domain, ladder)
        window = (min(a[0], b[0]), max(a[1], b[1]))
    r = embed_distribution(lhs, domain, net, ladder, window)
    s = embed_distribution(rhs, domain, net, ladder, window)
    res = rep_pair(rep_mul(r, s), phi, grid, trunc, tol)
    return ProductReport(res, str(lhs), str(rhs))


def pairings_agree(s, t, net: DeltaNet, ladder, tests, domain=None, window=None) -> bool:
    """True when ``<Sigma(S) - Sigma(T), phi>`` decays at order ``>= k+1`` for every test function."""
    if window is None:
        a, b = default_window(s, domain, ladder), default_window(t, domain, ladder)
        window = (min(a[0], b[0]), max(a[1], b[1]))
    diff = embed_distribution(s, domain, net, ladder, window) - embed_distribution(t, domain, net, ladder, window)
    for phi in tests:
        vals = slice_pairings(diff, phi)
        if all(v == 0 for _, v in vals):
            continue
        nonzero = [(e, v) for e, v in vals if v != 0]
        if len(nonzero) < 3:
            return False
        if measure_order(vals).order < net.k + 1:
            return False
    return True

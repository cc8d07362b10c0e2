"""Exact rational, polynomial and piecewise-polynomial arithmetic.

Every scalar is a :class:`fractions.Fraction`; nothing in this module touches
floating point.  Piecewise polynomials are stored in a closed canonical form
(adjacent equal pieces merged, zero end pieces stripped) so that equality of
two functions is equality of their representations.

Evaluation convention for :class:`PiecewisePoly`: a point ``x`` in
``[b_i, b_{i+1})`` uses piece ``i``; the last breakpoint uses the last piece;
everything outside the support evaluates to 0.
"""

from __future__ import annotations

import heapq
import json
from bisect import bisect_left, bisect_right
from dataclasses import dataclass
from fractions import Fraction
from math import comb

from .errors import (
    DegenerateScaleError,
    InvalidIntervalError,
    NotSmoothError,
    ZeroPolynomialError,
)

Rational = Fraction

DEFAULT_WIDTH = Fraction(1, 2**40)
SUP_REL_WIDTH = Fraction(1, 2**60)


def as_rational(value) -> Fraction:
    """Coerce ints, Fractions and ``"p/q"`` / decimal strings to a Fraction.

    Floats are rejected: a float silently entering an exact pipeline is the
    failure this module exists to prevent.
    """
    if isinstance(value, Fraction):
        return value
    if isinstance(value, bool):
        raise TypeError("booleans are not rationals")
    if isinstance(value, int):
        return Fraction(value)
    if isinstance(value, str):
        return Fraction(value.strip())
    if isinstance(value, float):
        raise TypeError(f"refusing float {value!r}; pass a Fraction or 'p/q' string")
    return Fraction(value)


def fmt_rational(q: Fraction) -> str:
    """Serialize as ``"p/q"`` (always with a denominator)."""
    return f"{q.numerator}/{q.denominator}"


def _sign(q) -> int:
    return (q > 0) - (q < 0)


@dataclass(frozen=True)
class Enclosure:
    """Closed rational interval ``[lo, hi]`` known to contain a real value."""

    lo: Fraction
    hi: Fraction

    def __post_init__(self):
        if self.lo > self.hi:
            raise InvalidIntervalError(f"empty enclosure [{self.lo}, {self.hi}]")

    @classmethod
    def point(cls, q) -> "Enclosure":
        q = as_rational(q)
        return cls(q, q)

    @property
    def width(self) -> Fraction:
        return self.hi - self.lo

    @property
    def mid(self) -> Fraction:
        return (self.lo + self.hi) / 2

    @property
    def is_exact(self) -> bool:
        return self.lo == self.hi

    def __contains__(self, q) -> bool:
        return self.lo <= q <= self.hi

    def __add__(self, other):
        if isinstance(other, Enclosure):
            return Enclosure(self.lo + other.lo, self.hi + other.hi)
        other = as_rational(other)
        return Enclosure(self.lo + other, self.hi + other)

    __radd__ = __add__

    def __neg__(self):
        return Enclosure(-self.hi, -self.lo)

    def __sub__(self, other):
        return self + (-other)

    def __rsub__(self, other):
        return (-self) + other

    def __mul__(self, other):
        if isinstance(other, Enclosure):
            prods = [a * b for a in (self.lo, self.hi) for b in (other.lo, other.hi)]
            return Enclosure(min(prods), max(prods))
        other = as_rational(other)
        a, b = self.lo * other, self.hi * other
        return Enclosure(min(a, b), max(a, b))

    __rmul__ = __mul__

    def __abs__(self):
        if self.lo >= 0:
            return self
        if self.hi <= 0:
            return -self
        return Enclosure(Fraction(0), max(-self.lo, self.hi))

    def __str__(self):
        return f"[{self.lo}, {self.hi}]"


# ---------------------------------------------------------------------------
# Polynomials
# ---------------------------------------------------------------------------


class Poly:
    """Univariate polynomial with rational coefficients, degree-ascending."""

    __slots__ = ("coeffs",)

    def __init__(self, coeffs=()):
        cs = [as_rational(c) for c in coeffs]
        while cs and cs[-1] == 0:
            cs.pop()
        self.coeffs = tuple(cs)

    @classmethod
    def const(cls, c) -> "Poly":
        return cls((c,))

    @classmethod
    def x(cls) -> "Poly":
        return cls((0, 1))

    @classmethod
    def monomial(cls, n: int, c=1) -> "Poly":
        return cls((0,) * n + (c,))

    @property
    def degree(self) -> int:
        return len(self.coeffs) - 1

    @property
    def is_zero(self) -> bool:
        return not self.coeffs

    def __bool__(self):
        return bool(self.coeffs)

    def lc(self) -> Fraction:
        return self.coeffs[-1] if self.coeffs else Fraction(0)

    def __eq__(self, other):
        if isinstance(other, Poly):
            return self.coeffs == other.coeffs
        if isinstance(other, (int, Fraction)):
            return self.coeffs == Poly.const(other).coeffs
        return NotImplemented

    def __hash__(self):
        return hash(self.coeffs)

    def __repr__(self):
        return f"Poly({[str(c) for c in self.coeffs]})"

    def __call__(self, x):
        acc = Fraction(0) if not isinstance(x, Poly) else Poly()
        if isinstance(x, Poly):
            for c in reversed(self.coeffs):
                acc = acc * x + c
            return acc
        x = as_rational(x)
        for c in reversed(self.coeffs):
            acc = acc * x + c
        return acc

    compose = __call__

    def __add__(self, other):
        if not isinstance(other, Poly):
            other = Poly.const(other)
        a, b = self.coeffs, other.coeffs
        if len(a) < len(b):
            a, b = b, a
        return Poly([x + y for x, y in zip(a, b)] + list(a[len(b):]))

    __radd__ = __add__

    def __neg__(self):
        return Poly([-c for c in self.coeffs])

    def __sub__(self, other):
        return self + (-other if isinstance(other, Poly) else -as_rational(other))

    def __rsub__(self, other):
        return (-self) + other

    def __mul__(self, other):
        if not isinstance(other, Poly):
            other = as_rational(other)
            return Poly([c * other for c in self.coeffs])
        if self.is_zero or other.is_zero:
            return Poly()
        out = [Fraction(0)] * (len(self.coeffs) + len(other.coeffs) - 1)
        for i, a in enumerate(self.coeffs):
            if a:
                for j, b in enumerate(other.coeffs):
                    out[i + j] += a * b
        return Poly(out)

    __rmul__ = __mul__

    def __pow__(self, n: int):
        result = Poly.const(1)
        base = self
        while n:
            if n & 1:
                result = result * base
            base = base * base
            n >>= 1
        return result

    def derivative(self, n: int = 1) -> "Poly":
        cs = list(self.coeffs)
        for _ in range(n):
            cs = [i * c for i, c in enumerate(cs)][1:]
        return Poly(cs)

    def antiderivative(self) -> "Poly":
        return Poly([0] + [c / (i + 1) for i, c in enumerate(self.coeffs)])

    def integrate(self, a, b) -> Fraction:
        big = self.antiderivative()
        return big(b) - big(a)

    def taylor_shift(self, a) -> "Poly":
        """Return ``p(x + a)``."""
        a = as_rational(a)
        cs = list(self.coeffs)
        n = len(cs)
        if a == 0 or n <= 1:
            return Poly(cs)
        for i in range(n):
            for j in range(n - 2, i - 1, -1):
                cs[j] += a * cs[j + 1]
        return Poly(cs)

    def scale_arg(self, s) -> "Poly":
        """Return ``p(s * x)``."""
        s = as_rational(s)
        out, power = [], Fraction(1)
        for c in self.coeffs:
            out.append(c * power)
            power *= s
        return Poly(out)

    def affine(self, scale, shift) -> "Poly":
        """Return ``p(scale * x + shift)``."""
        return self.taylor_shift(shift).scale_arg(scale)

    def reverse(self, n: int | None = None) -> "Poly":
        n = self.degree if n is None else n
        cs = list(self.coeffs) + [Fraction(0)] * (n + 1 - len(self.coeffs))
        return Poly(reversed(cs))

    def divmod(self, other: "Poly"):
        if other.is_zero:
            raise ZeroDivisionError("polynomial division by zero")
        rem = list(self.coeffs)
        dq = other.degree
        lc = other.lc()
        if len(rem) - 1 < dq:
            return Poly(), Poly(rem)
        quot = [Fraction(0)] * (len(rem) - dq)
        for i in range(len(rem) - 1, dq - 1, -1):
            c = rem[i] / lc
            quot[i - dq] = c
            if c:
                for j, b in enumerate(other.coeffs):
                    rem[i - dq + j] -= c * b
        return Poly(quot), Poly(rem[:dq])

    def monic(self) -> "Poly":
        if self.is_zero:
            return self
        return self * (1 / self.lc())

    def gcd(self, other: "Poly") -> "Poly":
        a, b = self, other
        while not b.is_zero:
            a, b = b, a.divmod(b)[1]
        return a.monic()

    def squarefree(self) -> "Poly":
        if self.degree < 1:
            return self
        g = self.gcd(self.derivative())
        return self.divmod(g)[0]

    def sign_variations(self) -> int:
        signs = [_sign(c) for c in self.coeffs if c]
        return sum(1 for s, t in zip(signs, signs[1:]) if s != t)

    def max_abs_on(self, a, b) -> Fraction:
        """Rigorous upper bound for ``max |p|`` on ``[a, b]`` (Taylor at the centre)."""
        c = (as_rational(a) + as_rational(b)) / 2
        h = (as_rational(b) - as_rational(a)) / 2
        total, power = Fraction(0), Fraction(1)
        for d in self.taylor_shift(c).coeffs:
            total += abs(d) * power
            power *= h
        return total


# ---------------------------------------------------------------------------
# Real root isolation (Descartes rule + bisection)
# ---------------------------------------------------------------------------


def _descartes_count(q: Poly, a: Fraction, b: Fraction) -> int:
    """Upper bound (exact when 0 or 1) on the roots of ``q`` in open ``(a, b)``."""
    r = q.affine(b - a, a)
    n = r.degree
    if n < 1:
        return 0
    return r.reverse(n).taylor_shift(1).sign_variations()


def _isolate_open(q: Poly, a: Fraction, b: Fraction) -> list:
    out = []
    stack = [(a, b)]
    while stack:
        u, v = stack.pop()
        n = _descartes_count(q, u, v)
        if n == 0:
            continue
        if n == 1:
            out.append((u, v))
            continue
        m = (u + v) / 2
        if q(m) == 0:
            out.append((m, m))
        stack.append((m, v))
        stack.append((u, m))
    out.sort()
    return out


def _tighten(q: Poly, a: Fraction, b: Fraction):
    """Shrink an isolating interval until neither endpoint is a root."""
    while q(a) == 0 or q(b) == 0:
        m = (a + b) / 2
        if q(m) == 0:
            return m, m
        if _descartes_count(q, a, m) == 1:
            b = m
        else:
            a = m
    return a, b


def _bisect_once(q: Poly, a: Fraction, b: Fraction):
    m = (a + b) / 2
    qm = q(m)
    if qm == 0:
        return m, m
    if _sign(q(a)) != _sign(qm):
        return a, m
    return m, b


def refine_root(q: Poly, a, b, width) -> tuple:
    """Bisect an isolating interval (non-root endpoints) below ``width``."""
    a, b = as_rational(a), as_rational(b)
    while b - a > width:
        a, b = _bisect_once(q, a, b)
    return a, b


def isolate_real_roots(p: Poly, interval, width=DEFAULT_WIDTH) -> list:
    """Disjoint rational intervals, each holding exactly one real root of ``p``.

    Roots at rational points found along the way are returned as degenerate
    intervals ``(r, r)``.  Non-degenerate intervals have non-root endpoints
    and width at most ``width``.
    """
    if p.is_zero:
        raise ZeroPolynomialError("cannot isolate roots of the zero polynomial")
    lo, hi = (as_rational(t) for t in interval)
    if lo > hi:
        raise InvalidIntervalError(f"invalid interval [{lo}, {hi}]")
    width = as_rational(width)
    q = p.squarefree()
    if q.degree < 1:
        return []
    if lo == hi:
        return [(lo, lo)] if q(lo) == 0 else []
    out = []
    if q(lo) == 0:
        out.append((lo, lo))
    for u, v in _isolate_open(q, lo, hi):
        if u != v:
            u, v = _tighten(q, u, v)
        if u != v:
            u, v = refine_root(q, u, v, width)
        out.append((u, v))
    if q(hi) == 0:
        out.append((hi, hi))
    return out


# ---------------------------------------------------------------------------
# Piecewise polynomials
# ---------------------------------------------------------------------------


class PiecewisePoly:
    """Compactly supported piecewise polynomial with rational data.

    ``pieces[i]`` is a polynomial in the global variable ``x`` valid on
    ``[breakpoints[i], breakpoints[i+1]]``.  Outside ``[b_0, b_n]`` the
    function is identically zero.
    """

    __slots__ = ("breakpoints", "pieces")

    def __init__(self, breakpoints=(), pieces=()):
        bps = [as_rational(b) for b in breakpoints]
        ps = [p if isinstance(p, Poly) else Poly(p) for p in pieces]
        if bps and len(ps) != len(bps) - 1:
            raise ValueError("need exactly one piece per interval")
        if not bps and ps:
            raise ValueError("pieces without breakpoints")
        for u, v in zip(bps, bps[1:]):
            if not u < v:
                raise ValueError("breakpoints must be strictly increasing")
        # canonical form: merge equal neighbours, strip zero end pieces
        mb, mp = bps[:1], []
        for i, p in enumerate(ps):
            if mp and mp[-1] == p:
                mb[-1] = bps[i + 1]
            else:
                mp.append(p)
                mb.append(bps[i + 1])
        while mp and mp[0].is_zero:
            mp.pop(0)
            mb.pop(0)
        while mp and mp[-1].is_zero:
            mp.pop()
            mb.pop()
        if not mp:
            mb = []
        self.breakpoints = tuple(mb)
        self.pieces = tuple(mp)

    # -- constructors -------------------------------------------------------

    @classmethod
    def zero(cls) -> "PiecewisePoly":
        return cls()

    @classmethod
    def from_poly(cls, p, a, b) -> "PiecewisePoly":
        a, b = as_rational(a), as_rational(b)
        if not a < b:
            raise InvalidIntervalError(f"invalid interval [{a}, {b}]")
        return cls((a, b), (p if isinstance(p, Poly) else Poly(p),))

    @classmethod
    def indicator(cls, a, b) -> "PiecewisePoly":
        return cls.from_poly(Poly.const(1), a, b)

    # -- basic protocol -----------------------------------------------------

    @property
    def is_zero(self) -> bool:
        return not self.pieces

    @property
    def support(self):
        if not self.pieces:
            return None
        return self.breakpoints[0], self.breakpoints[-1]

    def intervals(self):
        """Yield ``(a, b, poly)`` for each piece."""
        for i, p in enumerate(self.pieces):
            yield self.breakpoints[i], self.breakpoints[i + 1], p

    def __eq__(self, other):
        if not isinstance(other, PiecewisePoly):
            return NotImplemented
        return self.breakpoints == other.breakpoints and self.pieces == other.pieces

    def __hash__(self):
        return hash((self.breakpoints, self.pieces))

    def __repr__(self):
        if self.is_zero:
            return "PiecewisePoly(0)"
        return f"PiecewisePoly({len(self.pieces)} pieces on [{self.breakpoints[0]}, {self.breakpoints[-1]}])"

    def __call__(self, x) -> Fraction:
        x = as_rational(x)
        bps = self.breakpoints
        if not bps or x < bps[0] or x > bps[-1]:
            return Fraction(0)
        i = min(bisect_right(bps, x) - 1, len(self.pieces) - 1)
        return self.pieces[i](x)

    def limit(self, x, side: str) -> Fraction:
        """One-sided limit at ``x`` (``side`` is ``'-'`` or ``'+'``)."""
        x = as_rational(x)
        bps = self.breakpoints
        if not bps:
            return Fraction(0)
        if side == "-":
            if x <= bps[0] or x > bps[-1]:
                return Fraction(0)
            i = bisect_left(bps, x) - 1
        else:
            if x < bps[0] or x >= bps[-1]:
                return Fraction(0)
            i = bisect_right(bps, x) - 1
        return self.pieces[i](x)

    def piece_at(self, x, side: str = "+") -> Poly:
        x = as_rational(x)
        bps = self.breakpoints
        if not bps:
            return Poly()
        if side == "-":
            i = bisect_left(bps, x) - 1
        else:
            i = bisect_right(bps, x) - 1
        if 0 <= i < len(self.pieces):
            return self.pieces[i]
        return Poly()

    # -- grid helpers -------------------------------------------------------

    def _on_grid(self, grid):
        """Polynomial on each cell ``[grid[i], grid[i+1]]`` (grid refines self)."""
        out = []
        bps = self.breakpoints
        for u, v in zip(grid, grid[1:]):
            if not bps or v <= bps[0] or u >= bps[-1]:
                out.append(Poly())
            else:
                i = bisect_right(bps, u) - 1
                out.append(self.pieces[i])
        return out

    def refine(self, points) -> tuple:
        """Breakpoints and per-cell polynomials on the grid refined by ``points``."""
        grid = sorted(set(self.breakpoints) | {as_rational(p) for p in points})
        return grid, self._on_grid(grid)

    # -- arithmetic ---------------------------------------------------------

    def _combine(self, other: "PiecewisePoly", op) -> "PiecewisePoly":
        grid = sorted(set(self.breakpoints) | set(other.breakpoints))
        if len(grid) < 2:
            return PiecewisePoly()
        a, b = self._on_grid(grid), other._on_grid(grid)
        return PiecewisePoly(grid, [op(p, q) for p, q in zip(a, b)])

    def __add__(self, other):
        if not isinstance(other, PiecewisePoly):
            return NotImplemented
        return self._combine(other, lambda p, q: p + q)

    def __sub__(self, other):
        if not isinstance(other, PiecewisePoly):
            return NotImplemented
        return self._combine(other, lambda p, q: p - q)

    def __neg__(self):
        return PiecewisePoly(self.breakpoints, [-p for p in self.pieces])

    def __mul__(self, other):
        if isinstance(other, PiecewisePoly):
            lo = max(self.breakpoints[0], other.breakpoints[0]) if self.pieces and other.pieces else None
            hi = min(self.breakpoints[-1], other.breakpoints[-1]) if lo is not None else None
            if lo is None or lo >= hi:
                return PiecewisePoly()
            return self._combine(other, lambda p, q: p * q)
        if isinstance(other, Poly):
            return PiecewisePoly(self.breakpoints, [p * other for p in self.pieces])
        c = as_rational(other)
        if c == 0:
            return PiecewisePoly()
        return PiecewisePoly(self.breakpoints, [p * c for p in self.pieces])

    __rmul__ = __mul__

    def affine(self, scale, shift) -> "PiecewisePoly":
        """Return ``x -> f((x - shift) / scale)``."""
        scale, shift = as_rational(scale), as_rational(shift)
        if scale == 0:
            raise DegenerateScaleError("affine map with scale 0")
        inv = 1 / scale
        bps = [scale * b + shift for b in self.breakpoints]
        ps = [p.affine(inv, -shift * inv) for p in self.pieces]
        if scale < 0:
            bps.reverse()
            ps.reverse()
        return PiecewisePoly(bps, ps)

    def reflect(self) -> "PiecewisePoly":
        return self.affine(-1, 0)

    def clip(self, a, b) -> "PiecewisePoly":
        """Restriction to ``[a, b]`` (zero elsewhere)."""
        a, b = as_rational(a), as_rational(b)
        if not self.pieces or b <= a:
            return PiecewisePoly()
        return self * PiecewisePoly.indicator(a, b)

    def is_symmetric(self) -> bool:
        return self == self.reflect()

    # -- calculus -----------------------------------------------------------

    def integrate(self, a=None, b=None) -> Fraction:
        if not self.pieces:
            return Fraction(0)
        a = self.breakpoints[0] if a is None else as_rational(a)
        b = self.breakpoints[-1] if b is None else as_rational(b)
        if a > b:
            raise InvalidIntervalError(f"integration bounds out of order: {a} > {b}")
        total = Fraction(0)
        for u, v, p in self.intervals():
            lo, hi = max(u, a), min(v, b)
            if lo < hi:
                total += p.integrate(lo, hi)
        return total

    def moment(self, i: int, center=0) -> Fraction:
        """``∫ (x - center)^i f(x) dx``."""
        w = Poly((-as_rational(center), 1)) ** i
        return (self * w).integrate()

    def jumps(self, order: int = 0) -> list:
        """Nonzero jumps ``f^(order)(x+) - f^(order)(x-)`` at every breakpoint."""
        out = []
        bps, ps = self.breakpoints, self.pieces
        derivs = [p.derivative(order) for p in ps]
        for i, x in enumerate(bps):
            left = derivs[i - 1](x) if i > 0 else Fraction(0)
            right = derivs[i](x) if i < len(ps) else Fraction(0)
            if left != right:
                out.append((x, right - left))
        return out

    def smoothness(self) -> int:
        """Largest ``r`` with ``f`` in ``C^r`` on the real line (``-1`` if discontinuous)."""
        if not self.pieces:
            return 10**9
        top = max(p.degree for p in self.pieces) + 1
        for r in range(top + 1):
            if self.jumps(r):
                return r - 1
        return top

    def derivative(self, n: int = 1, strict: bool = True, interior=None) -> "PiecewisePoly":
        """Piecewise classical derivative of order ``n``.

        With ``strict`` a jump in any derivative of order ``< n`` raises
        :class:`NotSmoothError` carrying the offending jumps.  ``interior``
        restricts the check to breakpoints inside an open window ``(lo, hi)``.
        """
        if strict:
            bad = []
            for r in range(n):
                for x, j in self.jumps(r):
                    if interior is None or interior[0] < x < interior[1]:
                        bad.append((x, r, j))
            if bad:
                raise NotSmoothError(
                    "function is not C^%d: jump of derivative order %d at x=%s" % (n - 1, bad[0][1], bad[0][0]),
                    bad,
                )
        return PiecewisePoly(self.breakpoints, [p.derivative(n) for p in self.pieces])

    def antiderivative(self) -> "PiecewisePoly":
        """``F(x) = ∫_{-inf}^x f`` on the support; the tail value ``∫ f`` is dropped."""
        out, acc = [], Fraction(0)
        for u, v, p in self.intervals():
            big = p.antiderivative()
            out.append(big + (acc - big(u)))
            acc += big(v) - big(u)
        return PiecewisePoly(self.breakpoints, out)

    def convolve(self, other: "PiecewisePoly") -> "PiecewisePoly":
        """Exact ``(f ⋆ g)(x) = ∫ f(y) g(x - y) dy``."""
        if not self.pieces or not other.pieces:
            return PiecewisePoly()
        contributions = []
        grid = set()
        for a, b, p in self.intervals():
            for c, d, q in other.intervals():
                for u, v, h in _convolve_pieces(p, a, b, q, c, d):
                    contributions.append((u, v, h))
                    grid.add(u)
                    grid.add(v)
        grid = sorted(grid)
        cells = [Poly() for _ in range(len(grid) - 1)]
        for u, v, h in contributions:
            i, j = bisect_left(grid, u), bisect_left(grid, v)
            for t in range(i, j):
                cells[t] = cells[t] + h
        return PiecewisePoly(grid, cells)

    def abs(self, tol=DEFAULT_WIDTH):
        """``|f|`` split at every sign change, plus the induced integral error.

        Returns ``(g, err)`` with ``∫ g <= ∫ |f| <= ∫ g + err`` and
        ``err <= tol``.  ``g`` coincides with ``|f|`` except on sub-intervals of
        isolating intervals around irrational sign changes.
        """
        tol = as_rational(tol)
        # (cut, p) for every sign-changing isolating interval
        brackets = []
        per_piece = []
        for u, v, p in self.intervals():
            cuts = []
            if p.degree >= 1:
                q = p.affine(v - u, u).squarefree()
                for s, t in _isolate_open(q, Fraction(0), Fraction(1)):
                    if s != t:
                        s, t = _tighten(q, s, t)
                    if s == t:
                        cuts.append([u + (v - u) * s, u + (v - u) * s])
                        continue
                    a, b = u + (v - u) * s, u + (v - u) * t
                    if _sign(p(a)) == _sign(p(b)):
                        continue
                    cut = [a, b]
                    cuts.append(cut)
                    brackets.append((cut, p))
            per_piece.append((u, v, p, cuts))

        def bracket_err(cut, p):
            a, b = cut
            return Fraction(0) if a == b else (b - a) * p.max_abs_on(a, b)

        heap = []
        total = Fraction(0)
        for idx, (cut, p) in enumerate(brackets):
            e = bracket_err(cut, p)
            total += e
            heapq.heappush(heap, (-e, idx))
        while total > tol and heap:
            neg_e, idx = heapq.heappop(heap)
            cut, p = brackets[idx]
            # sign tests on p are valid: bracket endpoints are not roots
            a, b = _bisect_once(p, cut[0], cut[1])
            cut[0], cut[1] = a, b
            e = bracket_err(cut, p)
            total += e + neg_e
            heapq.heappush(heap, (-e, idx))

        cells = []
        for u, v, p, cuts in per_piece:
            cuts = sorted(cuts)
            splits = [u] + [(a + b) / 2 for a, b in cuts] + [v]
            free_lo = [u] + [b for _, b in cuts]
            free_hi = [a for a, _ in cuts] + [v]
            for j in range(len(splits) - 1):
                if splits[j] == splits[j + 1]:
                    continue
                sg = _sign(p(_nonroot_point(p, free_lo[j], free_hi[j])))
                cells.append((splits[j], splits[j + 1], p * (sg or 1)))
        g = _assemble_cells(cells)
        return g, total

    def l1_norm(self, tol=DEFAULT_WIDTH) -> Enclosure:
        """Enclosure of ``∫ |f|`` of width at most ``tol``."""
        g, err = self.abs(tol)
        lo = max(g.integrate(), abs(self.integrate()))
        return Enclosure(lo, max(lo, g.integrate() + err))

    def sup_abs(self, a=None, b=None, rel_width=SUP_REL_WIDTH) -> Enclosure:
        """Enclosure of ``sup_{[a,b]} |f|`` via critical-point isolation.

        Root refinement is relative to each piece's length, which makes the
        result exactly equivariant under rescaling ``x -> x / s``.
        """
        if not self.pieces:
            return Enclosure.point(0)
        sa, sb = self.breakpoints[0], self.breakpoints[-1]
        a = sa if a is None else as_rational(a)
        b = sb if b is None else as_rational(b)
        if a > b:
            raise InvalidIntervalError(f"invalid interval [{a}, {b}]")
        lo = hi = Fraction(0)
        for u, v, p in self.intervals():
            s, t = max(u, a), min(v, b)
            if s > t:
                continue
            ends = max(abs(p(s)), abs(p(t)))
            lo, hi = max(lo, ends), max(hi, ends)
            if s == t or p.degree < 2:
                continue
            dq = p.derivative().affine(t - s, s).squarefree()
            if dq.degree < 1:
                continue
            for x0, x1 in _isolate_open(dq, Fraction(0), Fraction(1)):
                if x0 != x1:
                    x0, x1 = _tighten(dq, x0, x1)
                if x0 != x1:
                    x0, x1 = refine_root(dq, x0, x1, rel_width)
                c0, c1 = s + (t - s) * x0, s + (t - s) * x1
                mid = (c0 + c1) / 2
                val = abs(p(mid))
                lo = max(lo, val)
                hi = max(hi, val if c0 == c1 else p.max_abs_on(c0, c1))
        return Enclosure(lo, max(lo, hi))

    # -- serialization ------------------------------------------------------

    def to_dict(self) -> dict:
        return {
            "breakpoints": [fmt_rational(b) for b in self.breakpoints],
            "pieces": [[fmt_rational(c) for c in p.coeffs] for p in self.pieces],
        }

    @classmethod
    def from_dict(cls, data: dict) -> "PiecewisePoly":
        return cls(
            [as_rational(b) for b in data["breakpoints"]],
            [Poly([as_rational(c) for c in cs]) for cs in data["pieces"]],
        )

    def dumps(self) -> str:
        return json.dumps(self.to_dict())

    @classmethod
    def loads(cls, text: str) -> "PiecewisePoly":
        return cls.from_dict(json.loads(text))


def _nonroot_point(p: Poly, lo, hi) -> Fraction:
    """A point of ``[lo, hi]`` where ``p`` does not vanish (if any exists)."""
    if lo == hi:
        return lo
    n = max(p.degree, 0) + 2
    for k in range(1, n):
        x = lo + (hi - lo) * Fraction(k, n)
        if p(x) != 0:
            return x
    return (lo + hi) / 2


def _assemble_cells(cells) -> PiecewisePoly:
    """Build from ordered ``(a, b, poly)`` cells, filling gaps with zero."""
    bps, ps = [], []
    for a, b, p in cells:
        if not bps:
            bps.append(a)
        elif bps[-1] != a:
            bps.append(a)
            ps.append(Poly())
        bps.append(b)
        ps.append(p)
    return PiecewisePoly(bps, ps)


def _convolve_pieces(p: Poly, a, b, q: Poly, c, d):
    """Convolution of ``p·1[a,b]`` with ``q·1[c,d]`` as ``(u, v, poly)`` cells."""
    # p(y) q(x - y) = sum_r x^r s_r(y)
    s = []
    for r in range(len(q.coeffs)):
        inner = Poly(
            [q.coeffs[j] * comb(j, r) * (-1) ** (j - r) for j in range(r, len(q.coeffs))]
        )
        s.append((p * inner).antiderivative())

    def h(lower, upper):
        # lower/upper: ("const", value) or ("shift", value) meaning x - value
        total = Poly()
        xr = Poly.const(1)
        for big in s:
            up = Poly.const(big(upper[1])) if upper[0] == "const" else big.taylor_shift(-upper[1])
            lo = Poly.const(big(lower[1])) if lower[0] == "const" else big.taylor_shift(-lower[1])
            total = total + xr * (up - lo)
            xr = xr * Poly.x()
        return total

    cells = []
    left_end, right_start = min(a + d, b + c), max(a + d, b + c)
    if a + c < left_end:
        cells.append((a + c, left_end, h(("const", a), ("shift", c))))
    if left_end < right_start:
        if a + d <= b + c:
            cells.append((left_end, right_start, h(("shift", d), ("shift", c))))
        else:
            cells.append((left_end, right_start, h(("const", a), ("const", b))))
    if right_start < b + d:
        cells.append((right_start, b + d, h(("shift", d), ("const", b))))
    return cells


# ---------------------------------------------------------------------------
# Operation-style entry points
# ---------------------------------------------------------------------------


def solve_linear(mat, rhs):
    """Gauss-Jordan elimination over the rationals; ``None`` when singular."""
    n = len(mat)
    a = [[as_rational(v) for v in row] + [as_rational(r)] for row, r in zip(mat, rhs)]
    for col in range(n):
        piv = next((r for r in range(col, n) if a[r][col] != 0), None)
        if piv is None:
            return None
        a[col], a[piv] = a[piv], a[col]
        p = a[col][col]
        a[col] = [v / p for v in a[col]]
        for r in range(n):
            if r != col and a[r][col] != 0:
                f = a[r][col]
                a[r] = [v - f * w for v, w in zip(a[r], a[col])]
    return [row[-1] for row in a]


def pw_combine(f: PiecewisePoly, g: PiecewisePoly, op: str) -> PiecewisePoly:
    if op == "add":
        return f + g
    if op == "mul":
        return f * g
    raise ValueError(f"unknown op {op!r}")


def pw_affine(f: PiecewisePoly, scale, shift) -> PiecewisePoly:
    return f.affine(scale, shift)


def pw_integrate(f: PiecewisePoly, a, b) -> Fraction:
    a, b = as_rational(a), as_rational(b)
    if a > b:
        raise InvalidIntervalError(f"integration bounds out of order: {a} > {b}")
    return f.integrate(a, b)


def pw_derivative(f: PiecewisePoly, n: int = 1) -> PiecewisePoly:
    return f.derivative(n, strict=True)


def pw_convolve(f: PiecewisePoly, g: PiecewisePoly) -> PiecewisePoly:
    return f.convolve(g)


def pw_abs(f: PiecewisePoly, tol=DEFAULT_WIDTH):
    return f.abs(tol)

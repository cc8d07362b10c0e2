"""Truncated Puiseux series in a formal infinitesimal ``e``.

An :class:`AsymptoticNumber` is ``sum a_q e^q + O(e^T)`` with rational
exponents ``q < T`` and Gaussian-rational coefficients.  ``T`` may be
``math.inf`` for numbers known exactly (literals, finite sums).  Every
operation computes the truncation order its inputs actually justify.
"""

from __future__ import annotations

import math
import re
from dataclasses import dataclass
from fractions import Fraction
from functools import total_ordering

import sympy

from .errors import NotOrderedError, TruncationError, UnsupportedDegreeError
from .exact import as_rational

INF = math.inf
DEFAULT_TRUNC = Fraction(8)


@total_ordering
class GaussQ:
    """Gaussian rational ``re + im*i``."""

    __slots__ = ("re", "im")

    def __init__(self, re=0, im=0):
        self.re = as_rational(re)
        self.im = as_rational(im)

    @classmethod
    def of(cls, x) -> "GaussQ":
        return x if isinstance(x, GaussQ) else cls(x)

    def __bool__(self):
        return bool(self.re) or bool(self.im)

    @property
    def is_real(self) -> bool:
        return self.im == 0

    def __eq__(self, other):
        if isinstance(other, (int, Fraction)):
            other = GaussQ(other)
        if not isinstance(other, GaussQ):
            return NotImplemented
        return self.re == other.re and self.im == other.im

    def __lt__(self, other):
        other = GaussQ.of(other)
        if not (self.is_real and other.is_real):
            raise NotOrderedError("complex numbers are not ordered")
        return self.re < other.re

    def __hash__(self):
        return hash((self.re, self.im))

    def __add__(self, other):
        other = GaussQ.of(other)
        return GaussQ(self.re + other.re, self.im + other.im)

    __radd__ = __add__

    def __neg__(self):
        return GaussQ(-self.re, -self.im)

    def __sub__(self, other):
        return self + (-GaussQ.of(other))

    def __rsub__(self, other):
        return GaussQ.of(other) - self

    def __mul__(self, other):
        other = GaussQ.of(other)
        return GaussQ(
            self.re * other.re - self.im * other.im,
            self.re * other.im + self.im * other.re,
        )

    __rmul__ = __mul__

    def inverse(self) -> "GaussQ":
        n = self.re * self.re + self.im * self.im
        if n == 0:
            raise ZeroDivisionError("GaussQ division by zero")
        return GaussQ(self.re / n, -self.im / n)

    def __truediv__(self, other):
        return self * GaussQ.of(other).inverse()

    def __rtruediv__(self, other):
        return GaussQ.of(other) * self.inverse()

    def sign(self) -> int:
        if not self.is_real:
            raise NotOrderedError("complex numbers are not ordered")
        return (self.re > 0) - (self.re < 0)

    def __repr__(self):
        return f"GaussQ({self.re}, {self.im})"

    def __str__(self):
        return _fmt_coeff(self)

    def to_sympy(self):
        return sympy.Rational(self.re.numerator, self.re.denominator) + sympy.I * sympy.Rational(
            self.im.numerator, self.im.denominator
        )


def _fmt_q(q: Fraction) -> str:
    return str(q.numerator) if q.denominator == 1 else f"{q.numerator}/{q.denominator}"


def _fmt_coeff(c: GaussQ) -> str:
    if c.im == 0:
        return _fmt_q(c.re)
    if c.re == 0:
        return f"{_fmt_q(c.im)}i"
    sign = "+" if c.im > 0 else "-"
    return f"({_fmt_q(c.re)}{sign}{_fmt_q(abs(c.im))}i)"


def _fmt_power(q: Fraction) -> str:
    if q == 1:
        return "e"
    if q.denominator == 1:
        return f"e^{q.numerator}"
    return f"e^{{{_fmt_q(q)}}}"


class AsymptoticNumber:
    """Truncated series ``sum a_q e^q + O(e^trunc)``.

    ``terms`` maps exponent to coefficient; only nonzero coefficients with
    exponent below ``trunc`` are kept.
    """

    __slots__ = ("terms", "trunc")

    def __init__(self, terms=None, trunc=DEFAULT_TRUNC):
        trunc = trunc if trunc == INF else as_rational(trunc)
        items = terms.items() if isinstance(terms, dict) else (terms or ())
        acc: dict[Fraction, GaussQ] = {}
        for q, c in items:
            q = as_rational(q)
            if q >= trunc:
                continue
            acc[q] = acc.get(q, GaussQ()) + GaussQ.of(c if not isinstance(c, int) else Fraction(c))
        self.terms = tuple(sorted((q, c) for q, c in acc.items() if c))
        self.trunc = trunc

    # -- constructors -------------------------------------------------------

    @classmethod
    def exact(cls, terms=None) -> "AsymptoticNumber":
        return cls(terms, INF)

    @classmethod
    def const(cls, c, trunc=INF) -> "AsymptoticNumber":
        return cls({Fraction(0): GaussQ.of(as_rational(c) if not isinstance(c, GaussQ) else c)}, trunc)

    @classmethod
    def eps(cls, q=1, c=1, trunc=INF) -> "AsymptoticNumber":
        return cls({as_rational(q): GaussQ.of(as_rational(c) if not isinstance(c, GaussQ) else c)}, trunc)

    @classmethod
    def big_o(cls, q) -> "AsymptoticNumber":
        return cls((), as_rational(q))

    # -- protocol -----------------------------------------------------------

    @property
    def is_zero(self) -> bool:
        """No stored terms: zero up to the truncation order."""
        return not self.terms

    @property
    def is_exact(self) -> bool:
        return self.trunc == INF

    @property
    def is_real(self) -> bool:
        return all(c.is_real for _, c in self.terms)

    def coeff(self, q) -> GaussQ:
        q = as_rational(q)
        for e, c in self.terms:
            if e == q:
                return c
        return GaussQ()

    def leading(self):
        """``(exponent, coefficient)`` of the lowest term, or ``None``."""
        return self.terms[0] if self.terms else None

    def valuation(self):
        """Lowest stored exponent; for numbers with no stored terms the
        truncation order (a lower bound), which is ``inf`` for exact zero."""
        return self.terms[0][0] if self.terms else self.trunc

    def with_trunc(self, trunc) -> "AsymptoticNumber":
        t = trunc if trunc == INF else as_rational(trunc)
        return AsymptoticNumber(self.terms, min(t, self.trunc))

    def __eq__(self, other):
        if isinstance(other, (int, Fraction)):
            other = AsymptoticNumber.const(other)
        if not isinstance(other, AsymptoticNumber):
            return NotImplemented
        return self.terms == other.terms and self.trunc == other.trunc

    def __hash__(self):
        return hash((self.terms, self.trunc))

    def equal_below(self, other: "AsymptoticNumber", order=None) -> bool:
        """Agreement of stored terms below ``order`` (default: common truncation)."""
        order = min(self.trunc, other.trunc) if order is None else order
        a = [(q, c) for q, c in self.terms if q < order]
        b = [(q, c) for q, c in other.terms if q < order]
        return a == b

    def __repr__(self):
        return f"AsymptoticNumber({self})"

    def __str__(self):
        return format_series(self)

    # -- arithmetic ---------------------------------------------------------

    @staticmethod
    def _lift(x) -> "AsymptoticNumber":
        if isinstance(x, AsymptoticNumber):
            return x
        if isinstance(x, GaussQ):
            return AsymptoticNumber.const(x)
        return AsymptoticNumber.const(as_rational(x))

    def __add__(self, other):
        other = self._lift(other)
        return AsymptoticNumber(list(self.terms) + list(other.terms), min(self.trunc, other.trunc))

    __radd__ = __add__

    def __neg__(self):
        return AsymptoticNumber([(q, -c) for q, c in self.terms], self.trunc)

    def __sub__(self, other):
        return self + (-self._lift(other))

    def __rsub__(self, other):
        return self._lift(other) - self

    def __mul__(self, other):
        other = self._lift(other)
        trunc = min(self.valuation() + other.trunc, other.valuation() + self.trunc)
        if isinstance(trunc, float) and math.isnan(trunc):
            trunc = INF
        out = []
        for q1, c1 in self.terms:
            for q2, c2 in other.terms:
                if q1 + q2 < trunc:
                    out.append((q1 + q2, c1 * c2))
        return AsymptoticNumber(out, trunc)

    __rmul__ = __mul__

    def inverse(self, trunc=DEFAULT_TRUNC) -> "AsymptoticNumber":
        """Multiplicative inverse.

        For an exact input whose tail is nonzero the geometric series is cut
        at absolute order ``trunc``; otherwise the input's own truncation
        decides.
        """
        if not self.terms:
            raise TruncationError(f"division by a number that is zero up to O(e^{self.trunc})")
        v, lead = self.terms[0]
        inv_lead = lead.inverse()
        tail = [(q - v, c * inv_lead) for q, c in self.terms[1:]]
        if self.trunc == INF:
            if not tail:
                return AsymptoticNumber({-v: inv_lead}, INF)
            rel = as_rational(trunc) + v
        else:
            rel = self.trunc - v
        t = AsymptoticNumber(tail, rel)
        # 1/(1+t) = sum (-t)^n; t has positive valuation
        vt = t.valuation()
        acc = AsymptoticNumber.const(1, rel)
        if t.terms:
            n_max = math.ceil(rel / vt)
            power = AsymptoticNumber.const(1, rel)
            neg_t = -t
            for _ in range(n_max):
                power = power * neg_t
                power = power.with_trunc(rel)
                acc = acc + power
        acc = acc.with_trunc(rel)
        return AsymptoticNumber([(q - v, c * inv_lead) for q, c in acc.terms], rel - v)

    def __truediv__(self, other):
        other = self._lift(other)
        return self * other.inverse()

    def __rtruediv__(self, other):
        return self._lift(other) * self.inverse()

    def __pow__(self, n: int):
        if n < 0:
            return self.inverse() ** (-n)
        out = AsymptoticNumber.const(1)
        for _ in range(n):
            out = out * self
        return out

    # -- order --------------------------------------------------------------

    def sign(self) -> int:
        if not self.is_real:
            raise NotOrderedError("only real asymptotic numbers are ordered")
        if not self.terms:
            return 0
        return self.terms[0][1].sign()

    def evaluate(self, eps) -> Fraction:
        """Truncated evaluation at a rational ``eps`` (exact rational powers only)."""
        from .expansion import rational_power

        eps = as_rational(eps)
        total = GaussQ()
        for q, c in self.terms:
            total = total + c * rational_power(eps, q)
        if not total.is_real:
            raise NotOrderedError("complex value cannot be evaluated to a rational")
        return total.re


def an_add(a, b):
    return AsymptoticNumber._lift(a) + b


def an_mul(a, b):
    return AsymptoticNumber._lift(a) * b


def an_inv(a, trunc=DEFAULT_TRUNC):
    return AsymptoticNumber._lift(a).inverse(trunc)


def an_valuation(a):
    return AsymptoticNumber._lift(a).valuation()


def an_cmp(a, b) -> int:
    """Three-way comparison of real numbers: -1, 0 or 1."""
    a, b = AsymptoticNumber._lift(a), AsymptoticNumber._lift(b)
    if not (a.is_real and b.is_real):
        raise NotOrderedError("only real asymptotic numbers are ordered")
    return (a - b).sign()


# ---------------------------------------------------------------------------
# Text form
# ---------------------------------------------------------------------------


def format_series(a: AsymptoticNumber) -> str:
    parts = []
    for q, c in a.terms:
        neg = c.re < 0 or (c.re == 0 and c.im < 0)
        mag = -c if neg else c
        if q == 0:
            body = _fmt_coeff(mag)
        elif mag == 1:
            body = _fmt_power(q)
        else:
            body = f"{_fmt_coeff(mag)}*{_fmt_power(q)}"
        parts.append(("-" if neg else "+", body))
    if a.trunc != INF:
        parts.append(("+", f"O({_fmt_power(a.trunc) if a.trunc != 0 else '1'})"))
    if not parts:
        return "0"
    out = ("-" if parts[0][0] == "-" else "") + parts[0][1]
    for s, body in parts[1:]:
        out += f" {s} {body}"
    return out


_TOKEN = re.compile(
    r"\s*(?:(?P<num>\d+(?:/\d+)?)|(?P<O>O)|(?P<e>e)|(?P<i>i)|(?P<op>[-+*/^(){}]))"
)


class _Parser:
    def __init__(self, text: str, trunc):
        self.text = text
        self.pos = 0
        self.trunc = trunc
        self.tokens = []
        while self.pos < len(text):
            if text[self.pos:].strip() == "":
                break
            m = _TOKEN.match(text, self.pos)
            if not m or m.end() == self.pos:
                raise ValueError(f"unexpected character {text[self.pos]!r} at position {self.pos}")
            kind = m.lastgroup
            self.tokens.append((kind, m.group(kind), m.start(kind)))
            self.pos = m.end()
        self.i = 0

    def peek(self):
        return self.tokens[self.i] if self.i < len(self.tokens) else (None, None, len(self.text))

    def take(self, value=None):
        tok = self.peek()
        if value is not None and tok[1] != value:
            raise ValueError(f"expected {value!r} at position {tok[2]}, got {tok[1]!r}")
        self.i += 1
        return tok

    def parse(self) -> AsymptoticNumber:
        out = self.expr()
        if self.i != len(self.tokens):
            raise ValueError(f"trailing input at position {self.peek()[2]}")
        return out

    def expr(self):
        sign = 1
        if self.peek()[1] in "+-" and self.peek()[1] is not None:
            sign = -1 if self.take()[1] == "-" else 1
        acc = self.term()
        if sign < 0:
            acc = -acc
        while self.peek()[1] in ("+", "-"):
            op = self.take()[1]
            rhs = self.term()
            acc = acc + rhs if op == "+" else acc - rhs
        return acc

    def term(self):
        acc = self.factor()
        while self.peek()[1] in ("*", "/"):
            op = self.take()[1]
            rhs = self.factor()
            acc = acc * rhs if op == "*" else acc * rhs.inverse(self.trunc)
        return acc

    def exponent(self) -> Fraction:
        tok = self.peek()
        if tok[1] in ("{", "("):
            close = "}" if tok[1] == "{" else ")"
            self.take(tok[1])
            sign = 1
            if self.peek()[1] == "-":
                self.take()
                sign = -1
            num = self.take()
            if num[0] != "num":
                raise ValueError(f"expected exponent at position {num[2]}")
            self.take(close)
            return sign * Fraction(num[1])
        sign = 1
        if tok[1] == "-":
            self.take()
            sign = -1
        num = self.take()
        if num[0] != "num" or "/" in num[1]:
            raise ValueError(f"expected integer exponent at position {num[2]}")
        return sign * Fraction(num[1])

    def factor(self):
        base = self.atom()
        if self.peek()[1] == "^":
            self.take()
            if isinstance(base, tuple):  # bare e
                return AsymptoticNumber.eps(self.exponent())
            q = self.exponent()
            if q.denominator != 1:
                raise ValueError("rational powers are only supported for e")
            return base ** int(q)
        if isinstance(base, tuple):
            return AsymptoticNumber.eps(1)
        return base

    def atom(self):
        kind, val, pos = self.peek()
        if kind == "num":
            self.take()
            if self.peek()[0] == "i":
                self.take()
                return AsymptoticNumber.const(GaussQ(0, Fraction(val)))
            return AsymptoticNumber.const(Fraction(val))
        if kind == "i":
            self.take()
            return AsymptoticNumber.const(GaussQ(0, 1))
        if kind == "e":
            self.take()
            return ("e",)
        if kind == "O":
            self.take()
            self.take("(")
            if self.peek()[1] == "1":
                self.take()
                q = Fraction(0)
            else:
                self.take()  # e
                q = Fraction(1)
                if self.peek()[1] == "^":
                    self.take()
                    q = self.exponent()
            self.take(")")
            return AsymptoticNumber.big_o(q)
        if val == "(":
            self.take()
            inner = self.expr()
            self.take(")")
            return inner
        raise ValueError(f"unexpected token {val!r} at position {pos}")


def parse_series(text: str, trunc=DEFAULT_TRUNC) -> AsymptoticNumber:
    """Parse the text form (or any arithmetic expression in ``e`` and ``i``).

    Literals are exact; ``trunc`` only bounds the geometric series produced
    by divisions by non-monomials.
    """
    return _Parser(text, trunc).parse()


# ---------------------------------------------------------------------------
# Newton-Puiseux roots
# ---------------------------------------------------------------------------


@dataclass
class PuiseuxRoot:
    value: AsymptoticNumber
    exact: bool = True
    stage: int = 0
    note: str = ""


def _poly_eval(coeffs, z: AsymptoticNumber) -> AsymptoticNumber:
    acc = AsymptoticNumber.const(0)
    for c in reversed(coeffs):
        acc = acc * z + c
    return acc


def _shifted_coeffs(coeffs, s: AsymptoticNumber):
    """Coefficients of ``P(s + z)`` as a polynomial in ``z``."""
    n = len(coeffs) - 1
    out = []
    for i in range(n + 1):
        acc = AsymptoticNumber.const(0)
        power = AsymptoticNumber.const(1)
        for l in range(i, n + 1):
            acc = acc + coeffs[l] * power * math.comb(l, i)
            power = power * s
        out.append(acc)
    return out


def _lower_hull(points):
    """Lower convex hull of ``(i, v)`` points sorted by ``i``."""
    hull = []
    for p in points:
        while len(hull) >= 2:
            (x1, y1), (x2, y2) = hull[-2], hull[-1]
            # drop hull[-1] if it lies on or above segment hull[-2] -> p
            if (y2 - y1) * (p[0] - x1) >= (p[1] - y1) * (x2 - x1):
                hull.pop()
            else:
                break
        hull.append(p)
    return hull


def _gaussian_roots(char_coeffs):
    """Roots in Q(i) (with multiplicity) and the degree left unresolved."""
    z = sympy.Symbol("z")
    poly = sum(c.to_sympy() * z**k for k, c in enumerate(char_coeffs))
    _, factors = sympy.factor_list(sympy.expand(poly), z, gaussian=True)
    roots, leftover = [], 0
    for fac, mult in factors:
        p = sympy.Poly(fac, z)
        if p.degree() == 0:
            continue
        if p.degree() == 1:
            a1, a0 = p.all_coeffs()
            r = sympy.nsimplify(-a0 / a1)
            re_, im_ = sympy.re(r), sympy.im(r)
            roots.append((GaussQ(Fraction(int(re_.p), int(re_.q)), Fraction(int(im_.p), int(im_.q))), mult))
        else:
            leftover += p.degree() * mult
    return roots, leftover


def puiseux_root(coeffs, trunc=DEFAULT_TRUNC, max_stages: int = 64):
    """Roots of ``sum coeffs[i] z^i`` as truncated Puiseux series.

    Each returned root ``r`` satisfies ``valuation(P(r)) >= trunc`` when
    flagged exact.  Characteristic polynomials with roots outside Q(i)
    yield roots flagged inexact, carrying the stage at which lifting stopped.
    """
    coeffs = [AsymptoticNumber._lift(c) for c in coeffs]
    while coeffs and coeffs[-1].is_zero and coeffs[-1].is_exact:
        coeffs.pop()
    deg = len(coeffs) - 1
    if deg < 1:
        raise UnsupportedDegreeError("polynomial must have degree >= 1")
    if deg > 4:
        raise UnsupportedDegreeError(f"degree {deg} > 4 is not supported")
    if coeffs[-1].is_zero:
        raise TruncationError("leading coefficient is zero up to truncation")
    target = as_rational(trunc)
    roots: list[PuiseuxRoot] = []

    def root_trunc(shifted, mult):
        # conservative truncation of the root from the Newton polygon of P(s+z)
        pts = [(0, shifted[0].valuation())]
        pts += [(i, shifted[i].valuation()) for i in range(1, mult + 1) if shifted[i].terms]
        hull = _lower_hull(pts)
        vals = [
            Fraction(y1 - y2) / (x2 - x1) if y1 != INF else INF
            for (x1, y1), (x2, y2) in zip(hull, hull[1:])
        ]
        return min(vals) if vals else INF

    def finish(s, shifted, mult, stage):
        value = AsymptoticNumber(s.terms, root_trunc(shifted, mult))
        for _ in range(mult):
            roots.append(PuiseuxRoot(value, True, stage))

    def branch(s, gamma_last, mult, stage):
        shifted = _shifted_coeffs(coeffs, s)
        q0 = shifted[0]
        if q0.is_zero and q0.is_exact:
            j0 = next(i for i in range(1, deg + 1) if not shifted[i].is_zero)
            exact_mult = min(j0, mult)
            for _ in range(exact_mult):
                roots.append(PuiseuxRoot(AsymptoticNumber(s.terms, INF), True, stage))
            mult -= exact_mult
            if mult == 0:
                return
            first = j0
        else:
            first = 0
            # back-substitution of the truncated root must already reach the target
            trial = AsymptoticNumber(s.terms, root_trunc(shifted, mult))
            settled = _poly_eval(coeffs, trial).valuation() >= target
            if q0.valuation() >= target and (settled or not q0.terms):
                finish(s, shifted, mult, stage)
                return
        if stage >= max_stages:
            for _ in range(mult):
                roots.append(PuiseuxRoot(s, False, stage, "stage limit reached"))
            return
        pts = [(i, shifted[i].valuation()) for i in range(first, deg + 1) if shifted[i].terms]
        if first == 0 and not q0.terms:
            pts.insert(0, (0, q0.valuation()))
        hull = _lower_hull(pts)
        produced = 0
        for (x1, y1), (x2, y2) in zip(hull, hull[1:]):
            gamma = Fraction(y1 - y2) / (x2 - x1) if y1 != INF else None
            if gamma is None or gamma <= gamma_last:
                continue
            # characteristic polynomial over the points on this edge
            char = []
            for i in range(x1, x2 + 1):
                c = shifted[i]
                v = c.valuation() if c.terms else None
                if v is not None and v == y1 - gamma * (i - x1):
                    char.append(c.terms[0][1])
                else:
                    char.append(GaussQ())
            found, leftover = _gaussian_roots(char)
            for c, m in found:
                if produced + m > mult:
                    m = mult - produced
                if m <= 0:
                    continue
                produced += m
                nxt = s + AsymptoticNumber.eps(gamma, c)
                branch(nxt, gamma, m, stage + 1)
            if leftover:
                take = min(leftover, mult - produced)
                produced += take
                for _ in range(take):
                    roots.append(
                        PuiseuxRoot(
                            AsymptoticNumber(s.terms, gamma),
                            False,
                            stage,
                            f"characteristic polynomial has roots outside Q(i) at exponent {gamma}",
                        )
                    )
        if produced < mult:
            # remaining roots are beyond the resolved precision of q0
            finish(s, shifted, mult - produced, stage)

    branch(AsymptoticNumber.exact(), -INF, deg, 0)
    return roots

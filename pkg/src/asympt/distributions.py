"""A small exact calculus of distributions on the real line.

Atoms are ``delta^(n)_a``, ``H_a`` (Heaviside step at ``a``), derivatives of
``p.v. 1/x`` and piecewise-polynomial densities.  Expressions are kept in a
canonical form: a flat sum of rational multiples of atoms, with derivatives
pushed into the atoms.

Convolution convention: ``(T ⋆ phi)(x) = <T(y), phi(x - y)>``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction

import mpmath
from mpmath.libmp import to_rational

from .errors import DistributionSyntaxError, DomainError, NotSmoothError, SupportError, UnknownAtomError
from .exact import DEFAULT_WIDTH, Enclosure, PiecewisePoly, Poly, as_rational
from .mollifier import build_base

DEFAULT_BUMP_M = 4

# ---------------------------------------------------------------------------
# AST
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class DeltaDeriv:
    n: int = 0
    a: Fraction = Fraction(0)

    def __str__(self):
        head = "delta" if self.n == 0 else f"delta^({self.n})"
        return head if self.a == 0 else f"{head}@{self.a}"


@dataclass(frozen=True)
class Heaviside:
    a: Fraction = Fraction(0)

    def __str__(self):
        return "heaviside" if self.a == 0 else f"heaviside@{self.a}"


@dataclass(frozen=True)
class PrincipalValue:
    """``D^n (p.v. 1/x)``."""

    n: int = 0

    def __str__(self):
        return "pv1x" if self.n == 0 else f"D^{self.n}(pv1x)"


@dataclass(frozen=True)
class Density:
    f: PiecewisePoly

    def __str__(self):
        parts = []
        for u, v, p in self.f.intervals():
            parts.append("poly:" + ",".join(str(c) for c in p.coeffs) + f"@[{u},{v}]")
        return " + ".join(parts) if parts else "0"


ATOMS = (DeltaDeriv, Heaviside, PrincipalValue, Density)


@dataclass(frozen=True)
class Scale:
    c: Fraction
    t: object

    def __str__(self):
        return f"{self.c}*{_paren(self.t)}"


@dataclass(frozen=True)
class Sum:
    terms: tuple

    def __str__(self):
        return " + ".join(str(t) for t in self.terms) if self.terms else "0"


@dataclass(frozen=True)
class Derivative:
    n: int
    t: object

    def __str__(self):
        return f"D^{self.n}({self.t})"


def _paren(t):
    return f"({t})" if isinstance(t, Sum) else str(t)


def _atom_key(atom):
    if isinstance(atom, DeltaDeriv):
        return (0, atom.a, atom.n)
    if isinstance(atom, Heaviside):
        return (1, atom.a, 0)
    if isinstance(atom, PrincipalValue):
        return (2, 0, atom.n)
    return (3, atom.f.breakpoints[0] if atom.f.pieces else 0, hash(atom.f))


# ---------------------------------------------------------------------------
# Canonical form
# ---------------------------------------------------------------------------


def linear_terms(t) -> dict:
    """``{atom: coefficient}`` with derivatives pushed into the atoms."""
    out: dict = {}

    def acc(atom, c):
        if isinstance(atom, Density) and atom.f.is_zero:
            return
        out[atom] = out.get(atom, Fraction(0)) + c
        if out[atom] == 0:
            del out[atom]

    def walk(node, c):
        if isinstance(node, ATOMS):
            acc(node, c)
        elif isinstance(node, Scale):
            walk(node.t, c * node.c)
        elif isinstance(node, Sum):
            for s in node.terms:
                walk(s, c)
        elif isinstance(node, Derivative):
            for atom, cc in linear_terms(node.t).items():
                for a2, c2 in _derive_atom(atom, node.n).items():
                    acc(a2, c * cc * c2)
        else:
            raise TypeError(f"not a distribution expression: {node!r}")

    walk(t, Fraction(1))
    return _merge_densities(out)


def _merge_densities(terms: dict) -> dict:
    dens = [(a, c) for a, c in terms.items() if isinstance(a, Density)]
    if len(dens) <= 1 and all(c == 1 for _, c in dens):
        return terms
    out = {a: c for a, c in terms.items() if not isinstance(a, Density)}
    total = PiecewisePoly()
    for a, c in dens:
        total = total + a.f * c
    if not total.is_zero:
        out[Density(total)] = Fraction(1)
    return out


def _derive_atom(atom, n: int) -> dict:
    if n == 0:
        return {atom: Fraction(1)}
    if isinstance(atom, DeltaDeriv):
        return {DeltaDeriv(atom.n + n, atom.a): Fraction(1)}
    if isinstance(atom, PrincipalValue):
        return {PrincipalValue(atom.n + n): Fraction(1)}
    if isinstance(atom, Heaviside):
        return _derive_atom(DeltaDeriv(0, atom.a), n - 1)
    f = atom.f
    out: dict = {}
    for x, j in f.jumps(0):
        out[DeltaDeriv(0, x)] = out.get(DeltaDeriv(0, x), Fraction(0)) + j
    df = f.derivative(1, strict=False)
    out_rest = _derive_atom(Density(df), n - 1) if not df.is_zero else {}
    res: dict = {}
    for a, c in out.items():
        for a2, c2 in _derive_atom(a, n - 1).items():
            res[a2] = res.get(a2, Fraction(0)) + c * c2
    for a, c in out_rest.items():
        res[a] = res.get(a, Fraction(0)) + c
    return {a: c for a, c in res.items() if c != 0}


def canonical(t):
    """Flat ``Sum`` of ``Scale(c, atom)`` (bare atoms when ``c == 1``)."""
    terms = linear_terms(t)
    items = sorted(terms.items(), key=lambda kv: _atom_key(kv[0]))
    parts = tuple(a if c == 1 else Scale(c, a) for a, c in items)
    if len(parts) == 1:
        return parts[0]
    return Sum(parts)


def derivative(t, n: int = 1):
    return canonical(Derivative(n, t))


def combine(*pairs):
    """``canonical(sum c_i T_i)`` from ``(c_i, T_i)`` pairs."""
    return canonical(Sum(tuple(Scale(as_rational(c), t) for c, t in pairs)))


def equivalent(s, t) -> bool:
    return linear_terms(s) == linear_terms(t)


# ---------------------------------------------------------------------------
# Parsing
# ---------------------------------------------------------------------------


class _Scanner:
    def __init__(self, text: str):
        self.text = text
        self.pos = 0

    def skip(self):
        while self.pos < len(self.text) and self.text[self.pos].isspace():
            self.pos += 1

    def peek(self, s: str) -> bool:
        self.skip()
        return self.text.startswith(s, self.pos)

    def eat(self, s: str):
        if not self.peek(s):
            raise DistributionSyntaxError(f"expected {s!r}", self.pos)
        self.pos += len(s)

    def at_end(self) -> bool:
        self.skip()
        return self.pos >= len(self.text)

    def number(self) -> Fraction:
        self.skip()
        start = self.pos
        if self.pos < len(self.text) and self.text[self.pos] in "+-":
            self.pos += 1
        while self.pos < len(self.text) and (self.text[self.pos].isdigit() or self.text[self.pos] == "/"):
            self.pos += 1
        tok = self.text[start : self.pos]
        try:
            return as_rational(tok)
        except (ValueError, ZeroDivisionError):
            raise DistributionSyntaxError(f"bad number {tok!r}", start) from None

    def integer(self) -> int:
        q = self.number()
        if q.denominator != 1 or q < 0:
            raise DistributionSyntaxError("expected a nonnegative integer", self.pos)
        return int(q)

    def word(self) -> str:
        self.skip()
        start = self.pos
        while self.pos < len(self.text) and (self.text[self.pos].isalnum()):
            self.pos += 1
        return self.text[start : self.pos]


def _parse_expr(sc: _Scanner):
    terms = []
    sign = Fraction(1)
    if sc.peek("-"):
        sc.eat("-")
        sign = Fraction(-1)
    terms.append(Scale(sign, _parse_term(sc)))
    while True:
        if sc.peek("+"):
            sc.eat("+")
            terms.append(_parse_term(sc))
        elif sc.peek("-"):
            sc.eat("-")
            terms.append(Scale(Fraction(-1), _parse_term(sc)))
        else:
            return Sum(tuple(terms))


def _parse_term(sc: _Scanner):
    sc.skip()
    if sc.pos < len(sc.text) and (sc.text[sc.pos].isdigit()):
        c = sc.number()
        sc.eat("*")
        return Scale(c, _parse_term(sc))
    return _parse_factor(sc)


def _parse_factor(sc: _Scanner):
    sc.skip()
    start = sc.pos
    if sc.peek("("):
        sc.eat("(")
        e = _parse_expr(sc)
        sc.eat(")")
        return e
    if sc.peek("D^"):
        sc.eat("D^")
        n = sc.integer()
        sc.eat("(")
        e = _parse_expr(sc)
        sc.eat(")")
        return Derivative(n, e)
    if sc.peek("D("):
        sc.eat("D")
        sc.eat("(")
        e = _parse_expr(sc)
        sc.eat(")")
        return Derivative(1, e)
    if sc.peek("poly:"):
        sc.eat("poly:")
        coeffs = [sc.number()]
        while sc.peek(","):
            sc.eat(",")
            coeffs.append(sc.number())
        sc.eat("@")
        sc.eat("[")
        a = sc.number()
        sc.eat(",")
        b = sc.number()
        sc.eat("]")
        if not a < b:
            raise DistributionSyntaxError("density window must have a < b", start)
        return Density(PiecewisePoly.from_poly(Poly(coeffs), a, b))
    name = sc.word()
    if name == "delta":
        n = 0
        if sc.peek("^"):
            sc.eat("^")
            sc.eat("(")
            n = sc.integer()
            sc.eat(")")
        return DeltaDeriv(n, _parse_at(sc))
    if name == "heaviside":
        return Heaviside(_parse_at(sc))
    if name == "pv1x":
        return PrincipalValue(0)
    if not name:
        raise DistributionSyntaxError("expected an atom", start)
    raise UnknownAtomError(f"unknown atom {name!r}", start)


def _parse_at(sc: _Scanner) -> Fraction:
    if sc.peek("@"):
        sc.eat("@")
        return sc.number()
    return Fraction(0)


def parse_distribution(text: str):
    sc = _Scanner(text)
    if sc.at_end():
        raise DistributionSyntaxError("empty expression", 0)
    e = _parse_expr(sc)
    if not sc.at_end():
        raise DistributionSyntaxError(f"unexpected {sc.text[sc.pos]!r}", sc.pos)
    return canonical(e)


def format_distribution(t) -> str:
    return str(canonical(t))


# ---------------------------------------------------------------------------
# Test functions
# ---------------------------------------------------------------------------


def bump(center=0, radius=1, m: int = DEFAULT_BUMP_M) -> PiecewisePoly:
    """``psi_m((x - center) / radius)``, supported on ``[center - radius, center + radius]``."""
    radius = as_rational(radius)
    if radius <= 0:
        raise DomainError("bump radius must be positive")
    return build_base(m).shape.affine(radius, as_rational(center))


def parse_test_function(text: str) -> PiecewisePoly:
    """``bump@a:r[:m]`` or ``poly:c0,c1,...@[a,b][:m]`` (polynomial times a bump on [a,b])."""
    text = text.strip()
    try:
        if text.startswith("bump@"):
            parts = text[len("bump@") :].split(":")
            if len(parts) not in (2, 3):
                raise ValueError
            m = int(parts[2]) if len(parts) == 3 else DEFAULT_BUMP_M
            return bump(as_rational(parts[0]), as_rational(parts[1]), m)
        if text.startswith("poly:"):
            body, _, rest = text[len("poly:") :].partition("@")
            win, _, mtxt = rest.partition("]")
            a, b = (as_rational(t) for t in win.strip("[ ").split(","))
            m = int(mtxt.lstrip(":")) if mtxt.strip() else DEFAULT_BUMP_M
            p = Poly([as_rational(t) for t in body.split(",")])
            return bump((a + b) / 2, (b - a) / 2, m) * p
    except (ValueError, ZeroDivisionError):
        pass
    raise DomainError(f"cannot parse test function {text!r}; use bump@a:r[:m] or poly:c0,c1@[a,b][:m]")


# ---------------------------------------------------------------------------
# Pairing
# ---------------------------------------------------------------------------


def _log_enclosure(ratio: Fraction, width) -> Enclosure:
    """Rigorous enclosure of ``ln(ratio)`` of width below ``width``."""
    bits = max(64, int(math.log2(1 / width)) + 16 if width > 0 else 64)
    iv = mpmath.iv
    old = iv.prec
    try:
        iv.prec = bits
        v = iv.log(iv.mpf(ratio.numerator) / iv.mpf(ratio.denominator))
        lo, hi = (Fraction(*to_rational(raw)) for raw in v._mpi_)
    finally:
        iv.prec = old
    return Enclosure(lo, hi)


def pair_pv(g: PiecewisePoly, tol=DEFAULT_WIDTH):
    """``<p.v. 1/x, g> = ∫_0^∞ (g(x) - g(-x)) / x dx``; Fraction if log-free."""
    tol = as_rational(tol)
    if g.is_zero:
        return Fraction(0)
    if g.limit(0, "-") != g.limit(0, "+"):
        raise NotSmoothError("p.v. 1/x needs a test function continuous at 0", [(Fraction(0), 0, None)])
    h = (g - g.reflect()).clip(0, max(abs(b) for b in g.support) + 1)
    exact = Fraction(0)
    logs = []
    for u, v, p in h.intervals():
        c0 = p.coeffs[0] if p.coeffs else Fraction(0)
        q = Poly(p.coeffs[1:])
        exact += q.integrate(u, v)
        if c0 != 0:
            if u == 0:
                raise NotSmoothError("p.v. 1/x diverges: odd part does not vanish at 0", [(Fraction(0), 0, c0)])
            logs.append((c0, v / u))
    if not logs:
        return exact
    total_c = sum(abs(c) for c, _ in logs)
    each = tol / (2 * total_c * len(logs))
    enc = Enclosure.point(exact)
    for c, r in logs:
        enc = enc + _log_enclosure(r, each) * c
    return enc


def _check_smooth_at(phi: PiecewisePoly, a: Fraction, n: int, atom):
    for r in range(n + 1):
        if any(x == a for x, _ in phi.jumps(r)):
            raise NotSmoothError(f"test function is not C^{n} at {a}, needed by {atom}", [(a, r, None)])


def pair_atom(atom, phi: PiecewisePoly, tol=DEFAULT_WIDTH):
    if isinstance(atom, DeltaDeriv):
        _check_smooth_at(phi, atom.a, atom.n, atom)
        return (-1) ** atom.n * phi.piece_at(atom.a).derivative(atom.n)(atom.a)
    if isinstance(atom, Heaviside):
        if phi.is_zero or atom.a >= phi.support[1]:
            return Fraction(0)
        return phi.integrate(max(atom.a, phi.support[0]), phi.support[1])
    if isinstance(atom, Density):
        return (atom.f * phi).integrate()
    if isinstance(atom, PrincipalValue):
        try:
            g = phi.derivative(atom.n)
        except NotSmoothError as exc:
            raise NotSmoothError(f"test function is not C^{atom.n - 1}, needed by {atom}", exc.jumps) from None
        return (-1) ** atom.n * pair_pv(g, tol)
    raise TypeError(f"unknown atom {atom!r}")


def add_values(a, b):
    if isinstance(a, Enclosure) or isinstance(b, Enclosure):
        return (a if isinstance(a, Enclosure) else Enclosure.point(a)) + b
    return a + b


def pair(t, phi: PiecewisePoly, tol=DEFAULT_WIDTH):
    """``<T, phi>``: a Fraction when exact, an :class:`Enclosure` when p.v. logs enter."""
    terms = linear_terms(t)
    n_pv = sum(1 for a in terms if isinstance(a, PrincipalValue)) or 1
    total = Fraction(0)
    for atom, c in terms.items():
        sub_tol = as_rational(tol) / (n_pv * abs(c))
        total = add_values(total, pair_atom(atom, phi, sub_tol) * c)
    return total


# ---------------------------------------------------------------------------
# Convolution with test functions
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class PVTerm:
    """``coef * M(x) * (p.v. 1/x ⋆ G)(x)``; ``M = None`` means 1."""

    coef: Fraction
    kernel: PiecewisePoly
    multiplier: PiecewisePoly | None = None


@dataclass(frozen=True)
class MixedFunction:
    """Piecewise polynomial plus p.v.-convolution terms; evaluated by enclosures."""

    smooth: PiecewisePoly
    pv_terms: tuple = ()

    def __call__(self, x, tol=DEFAULT_WIDTH):
        x = as_rational(x)
        val = self.smooth(x)
        for t in self.pv_terms:
            m = Fraction(1) if t.multiplier is None else t.multiplier(x)
            if m == 0:
                continue
            g = t.kernel.reflect().affine(1, x)
            val = add_values(val, pair_pv(g, tol / len(self.pv_terms) / abs(t.coef * m)) * (t.coef * m))
        return val if isinstance(val, Enclosure) else Enclosure.point(val)

    def pair(self, phi: PiecewisePoly, tol=DEFAULT_WIDTH):
        """``∫ self * phi`` using ``<pv ⋆ G, psi> = <pv, Ǧ ⋆ psi>``."""
        val = (self.smooth * phi).integrate()
        for t in self.pv_terms:
            psi = phi if t.multiplier is None else t.multiplier * phi
            if psi.is_zero:
                continue
            g = t.kernel.reflect().convolve(psi)
            val = add_values(val, pair_pv(g, tol / len(self.pv_terms) / abs(t.coef)) * t.coef)
        return val

    def __add__(self, other):
        other = as_mixed(other)
        return MixedFunction(self.smooth + other.smooth, self.pv_terms + other.pv_terms)

    def __neg__(self):
        return self * Fraction(-1)

    def __sub__(self, other):
        return self + (-as_mixed(other))

    def __mul__(self, other):
        if isinstance(other, MixedFunction):
            if self.pv_terms and other.pv_terms:
                raise DomainError("products of two p.v. convolutions are not supported")
            if other.pv_terms:
                return other * self.smooth
            return self * other.smooth
        if isinstance(other, PiecewisePoly):
            terms = tuple(
                PVTerm(t.coef, t.kernel, other if t.multiplier is None else t.multiplier * other)
                for t in self.pv_terms
            )
            return MixedFunction(self.smooth * other, terms)
        c = as_rational(other)
        if c == 0:
            return MixedFunction(PiecewisePoly())
        return MixedFunction(self.smooth * c, tuple(PVTerm(t.coef * c, t.kernel, t.multiplier) for t in self.pv_terms))

    __rmul__ = __mul__

    def derivative(self, n: int = 1, interior=None):
        out = self
        for _ in range(n):
            terms = []
            for t in out.pv_terms:
                terms.append(PVTerm(t.coef, t.kernel.derivative(1), t.multiplier))
                if t.multiplier is not None:
                    dm = t.multiplier.derivative(1, interior=interior)
                    if not dm.is_zero:
                        terms.append(PVTerm(t.coef, t.kernel, dm))
            out = MixedFunction(out.smooth.derivative(1, interior=interior), tuple(terms))
        return out

    def restrict(self, a, b):
        win = PiecewisePoly.indicator(a, b)
        return self * win


def as_mixed(f) -> MixedFunction:
    if isinstance(f, MixedFunction):
        return f
    if isinstance(f, PiecewisePoly):
        return MixedFunction(f)
    raise TypeError(f"cannot treat {f!r} as a function")


def convolve_with_test(t, phi: PiecewisePoly, window=None):
    """``T ⋆ phi``: exact PiecewisePoly (restricted to ``window`` when given).

    Heaviside atoms give a non-compact ramp, so a ``window`` is required for
    them.  Any p.v. part turns the result into a :class:`MixedFunction`.
    """
    if phi.is_zero:
        return PiecewisePoly()
    smooth = PiecewisePoly()
    pv_terms = []
    for atom, c in linear_terms(t).items():
        if isinstance(atom, DeltaDeriv):
            try:
                part = phi.derivative(atom.n)
            except NotSmoothError as exc:
                raise NotSmoothError(f"test function is not C^{atom.n - 1}, needed by {atom}", exc.jumps) from None
            smooth = smooth + part.affine(1, atom.a) * c
        elif isinstance(atom, Heaviside):
            if window is None:
                raise SupportError("Heaviside convolution needs a bounded window")
            lo, hi = (as_rational(w) for w in window)
            ramp = phi.antiderivative().affine(1, atom.a)
            top = atom.a + phi.support[1]
            if top < hi:
                ramp = ramp + PiecewisePoly.from_poly(Poly.const(phi.integrate()), top, hi)
            smooth = smooth + ramp.clip(lo, hi) * c
        elif isinstance(atom, Density):
            smooth = smooth + atom.f.convolve(phi) * c
        else:
            pv_terms.append(PVTerm(c, phi.derivative(atom.n)))
    if window is not None:
        smooth = smooth.clip(*window)
    if pv_terms:
        mult = PiecewisePoly.indicator(*window) if window is not None else None
        return MixedFunction(smooth, tuple(PVTerm(p.coef, p.kernel, mult) for p in pv_terms))
    return smooth


# ---------------------------------------------------------------------------
# Continuity bounds
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class SeminormBound:
    """``|<T, phi>| <= C * sum_{mu <= m} sup |phi^(mu)|`` for ``supp phi ⊂ G``."""

    constant: Fraction
    order: int
    region: tuple

    def seminorm(self, phi: PiecewisePoly) -> Fraction:
        """Upper bound of ``sum_{mu <= m} sup |phi^(mu)|``."""
        total = Fraction(0)
        for mu in range(self.order + 1):
            total += phi.derivative(mu, strict=False).sup_abs().hi
        return total

    def holds(self, t, phi: PiecewisePoly, tol=DEFAULT_WIDTH) -> bool:
        v = pair(t, phi, tol)
        mag = abs(v).hi if isinstance(v, Enclosure) else abs(v)
        return mag <= self.constant * self.seminorm(phi)


def continuity_bound(t, region) -> SeminormBound:
    a, b = region
    if a in (-math.inf, math.inf) or b in (-math.inf, math.inf):
        raise DomainError("continuity bounds need a bounded region")
    a, b = as_rational(a), as_rational(b)
    if not a < b:
        raise DomainError(f"invalid region ({a}, {b})")
    reach = max(abs(a), abs(b))
    total, order = Fraction(0), 0
    for atom, c in linear_terms(t).items():
        if isinstance(atom, DeltaDeriv):
            ci, mi = Fraction(1), atom.n
        elif isinstance(atom, Heaviside):
            ci, mi = b - a, 0
        elif isinstance(atom, Density):
            clipped = atom.f.clip(a, b)
            ci, mi = clipped.l1_norm().hi if not clipped.is_zero else Fraction(0), 0
        else:
            ci, mi = 2 * reach, atom.n + 1
        total += abs(c) * ci
        order = max(order, mi)
    return SeminormBound(total, order, (a, b))

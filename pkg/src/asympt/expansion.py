"""Epsilon ladders, exact expansion fits and decay-order measurement."""

from __future__ import annotations

import re
from dataclasses import dataclass, field
from fractions import Fraction

import mpmath
from sympy import integer_nthroot

from .errors import IllPosedFitError, InsufficientDataError, LadderError, NoValidExpansionError
from .exact import Enclosure, as_rational, solve_linear
from .field import INF, AsymptoticNumber

MP_DPS = 50
DEFAULT_MAX_RESIDUAL = Fraction(10**6)


@dataclass(frozen=True)
class EpsLadder:
    eps0: Fraction
    ratio: Fraction
    count: int

    @property
    def points(self) -> tuple:
        return tuple(self.eps0 * self.ratio**i for i in range(self.count))

    def __iter__(self):
        return iter(self.points)

    def __len__(self):
        return self.count

    def __str__(self):
        return f"{self.eps0}*({self.ratio})^0..{self.count - 1}"


def make_ladder(eps0, ratio, count: int) -> EpsLadder:
    eps0, ratio = as_rational(eps0), as_rational(ratio)
    if not 0 < eps0 < 1:
        raise LadderError(f"ladder base {eps0} must lie in (0, 1)")
    if not 0 < ratio < 1:
        raise LadderError(f"ladder ratio {ratio} must lie in (0, 1)")
    if count < 4:
        raise LadderError(f"ladder needs at least 4 points, got {count}")
    return EpsLadder(eps0, ratio, count)


_POW = re.compile(r"^\s*(\d+(?:/\d+)?)\^(-?\d+)\s*$")


def _parse_point(text: str) -> tuple:
    m = _POW.match(text)
    if m:
        return Fraction(m.group(1)), int(m.group(2))
    return as_rational(text), None


def parse_ladder(text: str) -> EpsLadder:
    """``"2^-3..2^-12"`` or a comma list of rationals forming a geometric ladder."""
    if ".." in text:
        left, right = text.split("..")
        (b1, e1), (b2, e2) = _parse_point(left), _parse_point(right)
        if e1 is None or e2 is None or b1 != b2:
            raise LadderError(f"cannot parse ladder {text!r}; use B^-i..B^-j")
        step = 1 if e2 < e1 else -1
        if e1 == e2:
            raise LadderError("ladder endpoints coincide")
        return make_ladder(b1**e1, b1 ** (-step), abs(e1 - e2) + 1)
    pts = [as_rational(t) for t in text.split(",")]
    return ladder_from_points(pts)


def ladder_from_points(pts) -> EpsLadder:
    pts = [as_rational(p) for p in pts]
    if len(pts) < 2:
        raise LadderError("ladder needs at least 4 points")
    ratio = pts[1] / pts[0]
    for a, b in zip(pts, pts[1:]):
        if b / a != ratio:
            raise LadderError("ladder points are not geometric")
    return make_ladder(pts[0], ratio, len(pts))


def is_geometric(pts) -> bool:
    pts = list(pts)
    if len(pts) < 2:
        return False
    r = pts[1] / pts[0]
    return all(b / a == r for a, b in zip(pts, pts[1:]))


def rational_power(x, q) -> Fraction:
    """``x**q`` for rational ``x > 0`` and rational ``q`` when the result is rational."""
    x, q = as_rational(x), as_rational(q)
    if q.denominator == 1:
        return x ** int(q)
    if x <= 0:
        raise ValueError("rational powers need a positive base")
    n = q.denominator
    rn, ok_n = integer_nthroot(x.numerator, n)
    rd, ok_d = integer_nthroot(x.denominator, n)
    if not (ok_n and ok_d):
        raise ValueError(f"{x}^{q} is irrational")
    return Fraction(int(rn), int(rd)) ** q.numerator


def _try_rational_power(x, q):
    try:
        return rational_power(x, q)
    except ValueError:
        return None


def parse_grid(text: str, count: int, trunc) -> list:
    """Exponent grid from ``int``, ``half``, ``a:b`` or a comma list."""
    text = text.strip()
    if text in ("int", "half"):
        step = Fraction(1) if text == "int" else Fraction(1, 2)
        start = Fraction(-2)
        n = max(1, count - 1)
        return [start + step * i for i in range(n)]
    if ":" in text:
        a, b = text.split(":")
        return [Fraction(i) for i in range(int(a), int(b) + 1)]
    return [as_rational(t) for t in text.split(",")]


# ---------------------------------------------------------------------------
# Exact least squares
# ---------------------------------------------------------------------------


@dataclass
class ExpansionFit:
    grid: list
    coefficients: dict
    trunc: object
    residuals: list
    residual_norm: object
    sensitivity: dict
    condition: float
    exact: bool
    coefficient_errors: dict = field(default_factory=dict)
    samples: list = field(default_factory=list)

    @property
    def terms(self) -> list:
        return [(q, c) for q, c in sorted(self.coefficients.items()) if q < self.trunc and c != 0]

    def to_number(self) -> AsymptoticNumber:
        return AsymptoticNumber(self.terms, self.trunc)

    def to_dict(self) -> dict:
        lead = self.terms[0] if self.terms else None
        return {
            "leading_exponent": str(lead[0]) if lead else None,
            "leading_coefficient": str(lead[1]) if lead else None,
            "terms": [{"q": str(q), "coeff": str(c)} for q, c in self.terms],
            "residual": str(self.residual_norm),
            "exact": self.exact,
            "condition": self.condition,
            "trunc": str(self.trunc),
        }


def fit_expansion(samples, grid, trunc, max_residual=DEFAULT_MAX_RESIDUAL) -> ExpansionFit:
    """Fit ``g(eps) ~ sum_q a_q eps^q`` over a declared exponent grid.

    Exponents at or above ``trunc`` are fitted as nuisance terms and dropped
    from the result.  With exact samples and rational design entries the
    normal equations are solved over the rationals; enclosure samples are
    fitted at their midpoints and their half-widths propagated through the
    (exact) pseudo-inverse.  ``residual_norm`` is ``max_i |r_i| / eps_i^trunc``.
    """
    trunc = trunc if trunc == INF else as_rational(trunc)
    grid = sorted({as_rational(q) for q in grid})
    if not grid:
        raise IllPosedFitError("empty exponent grid")
    samples = [(as_rational(e), v) for e, v in samples]
    if len(samples) <= len(grid):
        raise IllPosedFitError(
            f"{len(samples)} samples cannot fit {len(grid)} exponents with a residual check",
            suggested_grid=grid[: max(1, len(samples) - 1)],
        )
    values, halfwidths = [], []
    for _, v in samples:
        if isinstance(v, Enclosure):
            values.append(v.mid)
            halfwidths.append(v.width / 2)
        else:
            values.append(as_rational(v))
            halfwidths.append(Fraction(0))
    design = [[_try_rational_power(e, q) for q in grid] for e, _ in samples]
    exact = all(x is not None for row in design for x in row)
    if exact:
        coeffs, sens, cond, resid = _exact_fit(design, values, grid)
    else:
        coeffs, sens, cond, resid = _float_fit(samples, values, grid)
    residual_norm = Fraction(0)
    scaled = []
    for (e, _), r in zip(samples, resid):
        scale = _try_rational_power(e, trunc) if trunc != INF else None
        if trunc == INF:
            s = abs(r)
        elif scale is not None:
            s = abs(r) / scale
        else:
            s = Fraction(abs(r)) / Fraction(mpmath.power(mpmath.mpf(e.numerator) / e.denominator, float(trunc)))
        scaled.append(s)
        residual_norm = max(residual_norm, s)
    errors = {
        q: sum((abs(w) * h for w, h in zip(sens[q], halfwidths)), Fraction(0)) for q in grid
    }
    if any(halfwidths):
        exact = False
    emax = max(e for e, _ in samples)
    if residual_norm != 0:
        for q in grid:
            if q < trunc and trunc != INF:
                floor = residual_norm * (_try_rational_power(emax, trunc - q) or Fraction(0))
                if abs(coeffs[q]) <= max(floor, errors[q]):
                    coeffs[q] = Fraction(0)
    fit = ExpansionFit(
        grid=grid,
        coefficients=coeffs,
        trunc=trunc,
        residuals=resid,
        residual_norm=residual_norm,
        sensitivity={q: sum((abs(w) for w in sens[q]), Fraction(0)) for q in grid},
        condition=cond,
        exact=exact,
        coefficient_errors=errors,
        samples=samples,
    )
    if residual_norm > max_residual:
        raise NoValidExpansionError(
            f"no expansion on grid {[str(q) for q in grid]} fits within residual "
            f"{max_residual} (scaled residual {float(residual_norm):.3e})",
            fit=fit,
        )
    return fit


def _exact_fit(design, values, grid):
    n = len(grid)
    normal = [[sum(row[i] * row[j] for row in design) for j in range(n)] for i in range(n)]
    inv = _inverse(normal)
    # pseudo-inverse rows: inv * A^T
    pinv = [[sum(inv[i][k] * row[k] for k in range(n)) for row in design] for i in range(n)]
    coeffs = {q: sum(w * v for w, v in zip(pinv[i], values)) for i, q in enumerate(grid)}
    resid = [v - sum(row[i] * coeffs[q] for i, q in enumerate(grid)) for row, v in zip(design, values)]
    sens = {q: pinv[i] for i, q in enumerate(grid)}
    cond = float(max(sum(abs(w) for w in pinv[i]) for i in range(n)))
    return coeffs, sens, cond, resid


def _inverse(mat):
    n = len(mat)
    cols = []
    for j in range(n):
        e = [Fraction(int(i == j)) for i in range(n)]
        col = solve_linear(mat, e)
        if col is None:
            raise IllPosedFitError(
                "normal equations are singular; use a coarser grid", suggested_grid=None
            )
        cols.append(col)
    return [[cols[j][i] for j in range(n)] for i in range(n)]


def _mp(q: Fraction):
    return mpmath.mpf(q.numerator) / q.denominator


def _to_fraction(x) -> Fraction:
    m, e = mpmath.mpf(x).man_exp
    return Fraction(int(m)) * Fraction(2) ** int(e)


def _float_fit(samples, values, grid):
    with mpmath.workdps(MP_DPS):
        a = mpmath.matrix([[mpmath.power(_mp(e), _mp(q)) for q in grid] for e, _ in samples])
        y = mpmath.matrix([_mp(v) for v in values])
        normal = a.T * a
        try:
            inv = normal ** -1
        except ZeroDivisionError:
            raise IllPosedFitError("normal equations are singular; use a coarser grid", suggested_grid=grid[:-1])
        pinv = inv * a.T
        c = pinv * y
        coeffs = {q: _to_fraction(c[i]) for i, q in enumerate(grid)}
        fitted = a * c
        resid = [_to_fraction(y[i] - fitted[i]) for i in range(len(values))]
        sens = {q: [_to_fraction(pinv[i, k]) for k in range(len(values))] for i, q in enumerate(grid)}
        cond = float(max(sum(abs(pinv[i, k]) for k in range(len(values))) for i in range(len(grid))))
    return coeffs, sens, cond, resid


# ---------------------------------------------------------------------------
# Decay orders
# ---------------------------------------------------------------------------


@dataclass
class OrderEstimate:
    """Log-log slope of ``|value|`` against ``eps``.

    ``residual`` is the RMS deviation from the fitted line in natural-log
    units; ``order`` is ``inf`` when every sample is an exact zero.
    """

    order: float
    residual: float
    stderr: float
    table: list = field(default_factory=list)

    @property
    def is_exact_null(self) -> bool:
        return self.order == INF


def _value_mid(v) -> Fraction:
    if isinstance(v, Enclosure):
        return abs(v).hi if v.lo <= 0 <= v.hi else abs(v.mid)
    return abs(as_rational(v))


def measure_order(samples) -> OrderEstimate:
    samples = [(as_rational(e), v) for e, v in samples]
    table = [(e, v) for e, v in samples]
    nonzero = [(e, _value_mid(v)) for e, v in samples if _value_mid(v) != 0]
    if not nonzero:
        return OrderEstimate(INF, 0.0, 0.0, table)
    if len(nonzero) < 3:
        raise InsufficientDataError(f"need at least 3 nonzero samples, got {len(nonzero)}")
    with mpmath.workdps(MP_DPS):
        xs = [mpmath.log(_mp(e)) for e, _ in nonzero]
        ys = [mpmath.log(_mp(v)) for _, v in nonzero]
        n = len(xs)
        mx, my = sum(xs) / n, sum(ys) / n
        sxx = sum((x - mx) ** 2 for x in xs)
        sxy = sum((x - mx) * (y - my) for x, y in zip(xs, ys))
        slope = sxy / sxx
        icpt = my - slope * mx
        res = [y - (icpt + slope * x) for x, y in zip(xs, ys)]
        rms = mpmath.sqrt(sum(r * r for r in res) / n)
        stderr = mpmath.sqrt(sum(r * r for r in res) / max(n - 2, 1) / sxx)
    return OrderEstimate(float(slope), float(rms), float(stderr), table)


def loglog_slope(xs, ys) -> tuple:
    """Least-squares slope and RMS residual of ``log ys`` against ``log xs``."""
    with mpmath.workdps(MP_DPS):
        lx = [mpmath.log(x if not isinstance(x, Fraction) else _mp(x)) for x in xs]
        ly = [mpmath.log(y if not isinstance(y, Fraction) else _mp(y)) for y in ys]
        n = len(lx)
        mx, my = sum(lx) / n, sum(ly) / n
        sxx = sum((x - mx) ** 2 for x in lx)
        slope = sum((x - mx) * (y - my) for x, y in zip(lx, ly)) / sxx
        icpt = my - slope * mx
        rms = mpmath.sqrt(sum((y - icpt - slope * x) ** 2 for x, y in zip(lx, ly)) / n)
    return slope, rms

"""Acceptance suite: one check per criterion, each printing a PASS/FAIL line.

Run directly (``python tests/test_acceptance.py``) for just the summary, or
through pytest, where the lines are repeated in the terminal summary.
"""

import math
import random
import sys
from fractions import Fraction
from pathlib import Path

import mpmath
import pytest

sys.path.insert(0, str(Path(__file__).parent))

from asympt.asympfunc import (  # noqa: E402
    check_pairing_preservation,
    check_smooth_consistency,
    classify,
    embed_distribution,
    product_experiment,
    rep_derivative,
    rep_mul,
    rep_pair,
    rep_scale,
)
from asympt.delta import audit_delta, make_net, build_cutoff, parse_domain, scaled_sup  # noqa: E402
from asympt.distributions import (  # noqa: E402
    DeltaDeriv,
    Density,
    Derivative,
    Heaviside,
    PrincipalValue,
    bump,
    combine,
    parse_distribution,
)
from asympt.errors import NoValidExpansionError  # noqa: E402
from asympt.exact import PiecewisePoly, Poly  # noqa: E402
from asympt.expansion import fit_expansion, loglog_slope, make_ladder, parse_grid  # noqa: E402
from asympt.field import AsymptoticNumber, GaussQ, puiseux_root  # noqa: E402
from conftest import LADDER, net  # noqa: E402
from asympt.mollifier import (  # noqa: E402
    build_base,
    build_mollifier,
    exponent_report,
    find_epsilon,
    l1_norm,
    predicted_exponents,
)

GRID = parse_grid("int", len(LADDER), 4)
TWO_M40 = Fraction(1, 2**40)
RESULTS: dict = {}


# ---------------------------------------------------------------------------


def criterion_1():
    eps = Fraction(1, 16)
    for k in range(1, 9):
        shape = build_mollifier(k, eps, build_base(k + 3)).shape
        if shape.integrate() != 1:
            return False, f"k={k}: mass {shape.integrate()}"
        for i in range(1, k + 1):
            mom = (shape * Poly.monomial(i)).integrate()
            if mom != 0:
                return False, f"k={k}: moment {i} = {mom}"
    return True, "k=1..8: mass 1 and moments 1..k exactly 0"


def criterion_2():
    parts = []
    for k in range(1, 6):
        eps, moll = find_epsilon(k, Fraction(1, 20))
        enc = l1_norm(moll, TWO_M40)
        if not (1 - TWO_M40 <= enc.lo and enc.hi <= Fraction(105, 100)):
            return False, f"k={k}: ∫|phi| in [{float(enc.lo)}, {float(enc.hi)}]"
        parts.append(f"k={k}:eps={eps},hi={float(enc.hi):.6f}")
    for eps in (Fraction(1, 10), Fraction(1, 2)):
        enc = l1_norm(build_mollifier(1, eps), TWO_M40)
        closed = (1 + eps) / (1 - eps)
        if not (enc.lo >= 1 - TWO_M40 and enc.hi <= closed):
            return False, f"closed form {closed} does not bound [{enc.lo}, {enc.hi}] at eps={eps}"
        parts.append(f"(1+e)/(1-e)={closed}>={float(enc.hi):.6f}")
    return True, "; ".join(parts)


def criterion_3():
    if predicted_exponents(2) != ([7, 4, 2], 4):
        return False, f"k=2 gives {predicted_exponents(2)}"
    worst = 0.0
    for k in range(1, 7):
        alpha, beta = predicted_exponents(k)
        for j in range(k + 1):
            if j + alpha[j] - beta != Fraction((k - j) * (k - j + 1), 2):
                return False, f"identity fails at k={k}, j={j}"
        if k + alpha[k] - beta != 0:
            return False, f"k + alpha_k - beta != 0 at k={k}"
        rep = exponent_report(k, LADDER)
        for j, (meas, pred) in enumerate(zip(rep.measured_valuations, rep.predicted_valuations)):
            dev = abs(meas - pred)
            worst = max(worst, dev)
            if dev >= 0.25:
                return False, f"k={k}, j={j}: measured {meas:.4f} vs {pred}"
    return True, f"identities exact for k=1..6; worst valuation deviation {worst:.4f} < 1/4"


def criterion_4():
    _, moll = find_epsilon(4, Fraction(1, 20))
    dnet = make_net(4, moll.epsilon)
    lo_eps, hi_eps = Fraction(1, 2**4), Fraction(1, 2**16)
    reports = [audit_delta(dnet, e, alpha_max=2) for e in (lo_eps, hi_eps)]
    for r in reports:
        if not (r.support_ok and r.moments_ok):
            return False, f"(i)-(iii) fail at eps={r.epsilon}"
        if not (r.excess_scale_free and r.l1_excess.hi <= Fraction(1, 4)):
            return False, f"(iv) excess {r.l1_excess} at eps={r.epsilon}"
    if reports[0].l1_excess != reports[1].l1_excess:
        return False, "(iv) excess depends on eps"
    # closed form: eps^(1+a) sup|D^(a)| is eps-free, so the ratio is ln(2^16)/ln(2^4) = 4
    for a in range(3):
        if scaled_sup(dnet, lo_eps, a) != scaled_sup(dnet, hi_eps, a):
            return False, f"(v) scaled sup of order {a} depends on eps"
    ratios = [reports[0].sup_quantities[a] / reports[1].sup_quantities[a] for a in range(3)]
    if any(abs(r - 4) > 0.04 for r in ratios):
        return False, f"(v) ratios {ratios}"
    # fitted decay against 1/|ln eps| along 2^-4 .. 2^-16
    pts = [Fraction(1, 2**t) for t in range(4, 17)]
    slopes = []
    with mpmath.workdps(30):
        logs = [abs(mpmath.log(mpmath.mpf(e.numerator) / e.denominator)) for e in pts]
        for a in range(3):
            s = scaled_sup(dnet, pts[0], a).mid
            qs = [mpmath.mpf(s.numerator) / s.denominator / L for L in logs]
            slope, _ = loglog_slope(logs, qs)
            slopes.append(float(slope))
    if any(abs(s + 1) > 0.01 for s in slopes):
        return False, f"(v) fitted exponents {slopes}"
    excess = float(reports[0].l1_excess.hi)
    return True, f"(i)-(iii) exact, excess {excess:.4g} <= 1/4 eps-free, (v) ratio 4 (fit slopes {[round(s, 6) for s in slopes]})"


def criterion_5():
    rng = random.Random(5)
    cut = build_cutoff(parse_domain("(0,10)"), Fraction(1, 8), net(1))
    lo, hi = Fraction(3, 8), min(10 - Fraction(3, 8), 8 - Fraction(1, 4))
    ones = [b for b in cut.shape.breakpoints if lo <= b <= hi] + [lo, hi]
    ones += [lo + (hi - lo) * Fraction(rng.randint(0, 10**6), 10**6) for _ in range(100)]
    zeros = [b for b in cut.shape.breakpoints if b <= Fraction(1, 8)] + [Fraction(1, 8)]
    zeros += [Fraction(rng.randint(1, 10**6), 8 * 10**6) for _ in range(100)]
    bad_one = [x for x in ones if cut(x) != 1]
    bad_zero = [x for x in zeros if cut(x) != 0]
    if bad_one or bad_zero:
        return False, f"Pi != 1 at {bad_one[:3]}, Pi != 0 at {bad_zero[:3]}"
    return True, f"Pi == 1 at {len(ones)} points of [{lo}, {hi}], Pi == 0 at {len(zeros)} points of (0, 1/8]"


def criterion_6():
    window = (-2, 2)
    phi = bump(Fraction(1, 3), 1, 10)
    rows, misses = [], []
    for name, t in (("delta", DeltaDeriv(0, 0)), ("delta'", DeltaDeriv(1, 0)), ("H", Heaviside(0))):
        for k in (1, 2, 3):
            dnet = net(k, m=k + 8)
            est = check_pairing_preservation(t, phi, dnet, LADDER, window=window).estimate
            rows.append(f"{name}/k{k}:{est.order:.4f}")
            if est.order < k + 1:
                misses.append(f"{name}/k{k} fitted order {est.order:.5f} < {k + 1}")
            if est.residual >= 0.1:
                misses.append(f"{name}/k{k} fit residual {est.residual:.3g} >= 0.1")
            # polynomial test function of degree k on a window around the atom
            p = Poly([Fraction(j + 1, 3) * (-1) ** j for j in range(k + 1)])
            poly_phi = PiecewisePoly.from_poly(p, Fraction(-1), Fraction(3, 2))
            zero = check_pairing_preservation(t, poly_phi, dnet, LADDER, window=window)
            if not zero.exact_zero:
                # for H the error is |sum_j p_j mu_{j+1} eps^{j+1} / (j+1)|, nonzero once mu_{k+1} != 0
                mu = [dnet.theta.moment(j + 1) for j in range(k + 1)]
                closed = all(
                    err == abs(sum(c * e ** (j + 1) * mu[j] / (j + 1) for j, c in enumerate(p.coeffs)))
                    for e, err in zero.errors
                )
                note = f", equals moment formula with mu_{k + 1} = {mu[k]}" if closed else ""
                misses.append(f"{name}/k{k} polynomial error not exactly zero{note}")
    detail = "orders " + " ".join(rows)
    if misses:
        return False, "; ".join(misses) + " | " + detail
    return True, detail + "; polynomial errors exactly 0"


def criterion_7():
    sq = Poly((0, 0, 1))
    for k in (2, 3):
        if not check_smooth_consistency(sq, net(k), LADDER, (-1, 1)).exact_zero:
            return False, f"x^2, k={k}: defect not zero"
    dnet = net(1)
    mu2 = dnet.theta.moment(2)
    rep = check_smooth_consistency(sq, dnet, LADDER, (-1, 1))
    for e in LADDER:
        if rep.defects[e] != PiecewisePoly.from_poly(Poly.const(e**2 * mu2), -1, 1):
            return False, f"x^2, k=1: defect at eps={e} is not eps^2 mu2"
    rep5 = check_smooth_consistency(Poly((0, 0, 0, 0, 0, 1)), net(3), LADDER, (-1, 1))
    if rep5.estimate.order < 4 or not rep5.all_bounds_hold:
        return False, f"x^5, k=3: order {rep5.estimate.order:.4f}, bounds {rep5.bound_holds}"
    return True, f"x^2 exact (k>=2 zero, k=1 eps^2*{mu2}); x^5 k=3 order {rep5.estimate.order:.3f}, Taylor bound holds on all slices"


def _same(r, s):
    for e in r.slices:
        a, b = r.slices[e], s.slices[e]
        if isinstance(a, PiecewisePoly) and isinstance(b, PiecewisePoly):
            if not (a - b).is_zero:
                return False
        elif a != b:
            return False
    return True


def criterion_8():
    ladder = make_ladder(Fraction(1, 8), Fraction(1, 2), 5)
    window = (-2, 2)
    dnet = net(2, m=7)

    def emb(t):
        return embed_distribution(t, None, dnet, ladder, window)

    hp = Derivative(1, Heaviside(0))
    lhs = emb(parse_distribution("2*delta + 3*D^1(heaviside)"))
    rhs = rep_scale(emb(DeltaDeriv(0, 0)), 2) + rep_scale(emb(hp), 3)
    if not (lhs - rhs).is_zero():
        return False, "Sigma(2 delta + 3 H') differs from 2 Sigma(delta) + 3 Sigma(H')"
    atoms = [
        DeltaDeriv(0, 0),
        DeltaDeriv(1, Fraction(1, 3)),
        Heaviside(Fraction(-1, 2)),
        Density(PiecewisePoly.from_poly(Poly((1, 2, -1)), Fraction(-1, 2), 1)),
        PrincipalValue(0),
    ]
    for a in atoms:
        if not _same(emb(Derivative(1, a)), rep_derivative(emb(a))):
            return False, f"derivative does not commute for {a}"
    rng = random.Random(8)
    point_atoms = atoms[:4]
    for _ in range(20):
        picks = rng.sample(point_atoms, 2)
        cs = [Fraction(rng.randint(-6, 6), rng.randint(1, 4)) for _ in picks]
        t = combine(*zip(cs, picks))
        if not _same(emb(Derivative(1, t)), rep_derivative(emb(t))):
            return False, f"derivative does not commute for {t}"
        lin = emb(t) - (rep_scale(emb(picks[0]), cs[0]) + rep_scale(emb(picks[1]), cs[1]))
        if not lin.is_zero():
            return False, f"embedding not linear on {t}"
    return True, "linear combination exact zero; derivative commutes for 5 atoms and 20 random combinations"


def criterion_9():
    phi = bump(0, 1, 2)
    consts = []
    for m in (3, 4, 5):
        rep = product_experiment(DeltaDeriv(0, 0), Heaviside(0), phi, net(1, m=m), LADDER, GRID, trunc=4)
        if rep.number is None:
            return False, f"m={m}: {rep.result.warning}"
        c0 = rep.number.coeff(0)
        if rep.result.fit.residual_norm > Fraction(1, 10**6) or abs(c0.re - phi(0) / 2) > Fraction(1, 10**6):
            return False, f"m={m}: constant {c0}, residual {rep.result.fit.residual_norm}"
        consts.append(str(c0))
    dnet = net(1)
    rep = embed_distribution(DeltaDeriv(0, 0), None, dnet, LADDER, (-2, 2))
    res = rep_pair(rep_mul(rep, rep), phi, GRID, trunc=4)
    theta_sq = (dnet.theta * dnet.theta).integrate()
    if res.number is None or res.number.valuation() != -1 or res.number.coeff(-1) != theta_sq * phi(0):
        return False, f"delta^2 leading term {res.number}"
    return True, f"delta*H constants {consts} = phi(0)/2 = {phi(0) / 2}; delta^2 leading {theta_sq * phi(0)} e^-1 exact"


def _random_number(rng):
    terms = {}
    for _ in range(rng.randint(1, 4)):
        q = Fraction(rng.randint(-4, 10), 2)
        terms[q] = terms.get(q, GaussQ()) + GaussQ(Fraction(rng.randint(-9, 9), rng.randint(1, 5)), Fraction(rng.randint(-9, 9), rng.randint(1, 5)))
    trunc = rng.choice([Fraction(4), Fraction(11, 2), Fraction(8)])
    return AsymptoticNumber({q: c for q, c in terms.items() if q < trunc}, trunc)


def criterion_10():
    rng = random.Random(10)
    one = AsymptoticNumber.const(1)
    for i in range(200):
        a, b, c = (_random_number(rng) for _ in range(3))
        checks = [((a + b) + c, a + (b + c)), (a * b, b * a), ((a * b) * c, a * (b * c)), (a * (b + c), a * b + a * c)]
        if a.terms and a.valuation() < a.trunc:
            prod = a * a.inverse()
            checks.append((prod, one))
        for lhs, rhs in checks:
            if not lhs.equal_below(rhs, min(lhs.trunc, rhs.trunc)):
                return False, f"axiom check {i} failed: {lhs} vs {rhs}"
    eps = AsymptoticNumber.eps(1)
    for coeffs in ([-eps, 0, 1], [-(1 + eps), 0, 1]):
        roots = puiseux_root(coeffs, 8)
        for r in roots:
            back = coeffs[0] + r.value * r.value
            if not r.exact or back.valuation() < 8:
                return False, f"root {r.value} has residual valuation {back.valuation()}"
    return True, "200 random axiom triples exact below truncation; roots of z^2-e, z^2-(1+e) back-substitute to O(e^8)"


def criterion_11():
    window = (-2, 2)
    dnet = net(1)
    report = classify(embed_distribution(DeltaDeriv(0, 0), None, dnet, LADDER, window), (-1, 1), alpha_max=2)
    for n in range(3):
        e = report[n]
        if not (e.exact and e.slope == -(1 + n) and e.residual == 0):
            return False, f"Sigma(delta) order {n}: slope {e.slope}, residual {e.residual}"
    h = classify(embed_distribution(Heaviside(0), None, dnet, LADDER, window), (-1, 1), alpha_max=0)[0]
    if h.slope != 0:
        return False, f"Sigma(H) slope {h.slope}"
    return True, "Sigma(delta) slopes -1, -2, -3 exact with zero residual; Sigma(H) slope 0"


def criterion_12():
    samples = [(e, 3 / e**2 + 2 + 5 * e**3) for e in LADDER]
    fit = fit_expansion(samples, GRID, 4)
    if fit.residual_norm != 0 or fit.terms != [(-2, 3), (0, 2), (3, 5)]:
        return False, f"recovered {fit.terms} with residual {fit.residual_norm}"
    # a ladder of exact squares so that eps^(1/2) stays rational
    sq_ladder = make_ladder(Fraction(1, 4), Fraction(1, 4), 10)
    root = [(e, Fraction(math.isqrt(e.numerator), math.isqrt(e.denominator))) for e in sq_ladder]
    try:
        fit_expansion(root, GRID, 4)
    except NoValidExpansionError:
        return True, "3e^-2 + 2 + 5e^3 recovered with zero residual from 10 points; e^(1/2) rejected on the integer grid"
    return False, "e^(1/2) accepted on the integer grid"


CRITERIA = {
    1: ("moment exactness", criterion_1),
    2: ("L1 infimum approach", criterion_2),
    3: ("exponent law", criterion_3),
    4: ("delta-net audit", criterion_4),
    5: ("cut-off sandwich", criterion_5),
    6: ("pairing preservation order", criterion_6),
    7: ("smooth consistency", criterion_7),
    8: ("linearity and derivative commutation", criterion_8),
    9: ("products", criterion_9),
    10: ("field axioms and roots", criterion_10),
    11: ("moderateness slopes", criterion_11),
    12: ("expansion extractor", criterion_12),
}


def run_criterion(n):
    name, fn = CRITERIA[n]
    try:
        ok, detail = fn()
    except Exception as exc:  # report, do not hide
        ok, detail = False, f"{type(exc).__name__}: {exc}"
    line = f"{'PASS' if ok else 'FAIL'} criterion {n} ({name}): {detail}"
    RESULTS[n] = line
    print(line)
    return ok, line


@pytest.mark.parametrize("n", sorted(CRITERIA))
def test_criterion(n):
    ok, line = run_criterion(n)
    assert ok, line


if __name__ == "__main__":
    outcomes = [run_criterion(n)[0] for n in sorted(CRITERIA)]
    sys.exit(0 if all(outcomes) else 1)

"""Command-line interface: ``asympt <command> ...``.

Exit codes: 0 success, 1 computational failure (message printed verbatim),
2 usage error.
"""

from __future__ import annotations

import argparse
import csv
import json
import sys
from dataclasses import asdict, dataclass, field
from fractions import Fraction
from pathlib import Path

from .asympfunc import embed_distribution, product_experiment, rep_pair
from .delta import DeltaNet, audit_delta, build_cutoff, parse_domain
from .distributions import pair, parse_distribution, parse_test_function
from .errors import AsymptError, DistributionSyntaxError
from .exact import DEFAULT_WIDTH, Enclosure, PiecewisePoly, as_rational, fmt_rational
from .expansion import fit_expansion, parse_grid, parse_ladder
from .field import DEFAULT_TRUNC, format_series, parse_series, puiseux_root
from .mollifier import Mollifier, build_base, build_mollifier, exponent_report, l1_norm

DEFAULT_LADDER = "2^-3..2^-12"
DEFAULT_K = 1
DEFAULT_NET_EPS = Fraction(1, 16)


@dataclass
class RunConfig:
    """Fully resolved flags of one invocation; echoed into every JSON report."""

    command: str
    options: dict = field(default_factory=dict)

    def to_dict(self) -> dict:
        return asdict(self)


def _rational(text: str) -> Fraction:
    try:
        return as_rational(text)
    except (ValueError, ZeroDivisionError, TypeError):
        raise argparse.ArgumentTypeError(f"not a rational number: {text!r}") from None


def _positive_int(text: str) -> int:
    try:
        v = int(text)
    except ValueError:
        raise argparse.ArgumentTypeError(f"not an integer: {text!r}") from None
    if v < 1:
        raise argparse.ArgumentTypeError(f"expected a positive integer, got {v}")
    return v


def _nonneg_int(text: str) -> int:
    try:
        v = int(text)
    except ValueError:
        raise argparse.ArgumentTypeError(f"not an integer: {text!r}") from None
    if v < 0:
        raise argparse.ArgumentTypeError(f"expected a nonnegative integer, got {v}")
    return v


def _jsonable(v):
    if isinstance(v, Fraction):
        return fmt_rational(v)
    if isinstance(v, Path):
        return str(v)
    if isinstance(v, (list, tuple)):
        return [_jsonable(x) for x in v]
    return v


def _config(args) -> RunConfig:
    opts = {k: _jsonable(v) for k, v in vars(args).items() if k not in ("func",)}
    return RunConfig(" ".join(x for x in (args.command, getattr(args, "sub", None)) if x), opts)


def _emit_json(obj, out=None):
    text = json.dumps(obj, indent=2, default=str)
    if out:
        Path(out).write_text(text + "\n")
    return text


def _table(rows, headers) -> str:
    rows = [[str(c) for c in r] for r in rows]
    widths = [max(len(h), *(len(r[i]) for r in rows)) if rows else len(h) for i, h in enumerate(headers)]
    line = "  ".join(h.ljust(w) for h, w in zip(headers, widths))
    body = ["  ".join(c.ljust(w) for c, w in zip(r, widths)) for r in rows]
    return "\n".join([line, "  ".join("-" * w for w in widths)] + body)


def _fmt_value(v):
    if isinstance(v, Enclosure):
        return {"enclosure": [fmt_rational(v.lo), fmt_rational(v.hi)], "width": fmt_rational(v.width)}
    return fmt_rational(v)


def _load_moll(path) -> Mollifier:
    return Mollifier.loads(Path(path).read_text())


def _net(args) -> DeltaNet:
    if getattr(args, "moll", None):
        return DeltaNet(_load_moll(args.moll))
    m = args.m or args.k + 3
    return DeltaNet(build_mollifier(args.k, args.net_epsilon, build_base(m)))


def _phi(spec: str) -> PiecewisePoly:
    p = Path(spec)
    if p.suffix == ".json" and p.exists():
        return PiecewisePoly.loads(p.read_text())
    return parse_test_function(spec)


# ---------------------------------------------------------------------------
# Commands
# ---------------------------------------------------------------------------


def _audit_moll(moll: Mollifier, tol, ladder_text: str) -> dict:
    residuals = moll.moment_residuals()
    enc = l1_norm(moll, tol)
    ladder = parse_ladder(ladder_text)
    rep = exponent_report(moll.k, ladder.points)
    return {
        "k": moll.k,
        "m": moll.m,
        "dim": moll.dim,
        "epsilon": fmt_rational(moll.epsilon),
        "mass_residual": fmt_rational(residuals[0]),
        "moment_residuals": [fmt_rational(r) for r in residuals[1:]],
        "l1": {"enclosure": [fmt_rational(enc.lo), fmt_rational(enc.hi)], "width": fmt_rational(enc.width)},
        "exponents": {
            "alpha": rep.alpha,
            "beta": rep.beta,
            "predicted_valuations": rep.predicted_valuations,
            "measured_valuations": rep.measured_valuations,
            "match": rep.match,
            "identities_hold": rep.identities_hold(),
        },
    }


def _print_moll_audit(report: dict):
    rows = [("mass - 1", report["mass_residual"])]
    rows += [(f"moment {i}", r) for i, r in enumerate(report["moment_residuals"], 1)]
    lo, hi = report["l1"]["enclosure"]
    rows.append(("∫|phi| (enclosure)", f"[{float(Fraction(lo)):.12f}, {float(Fraction(hi)):.12f}]"))
    print(_table(rows, ["quantity", "value"]))
    ex = report["exponents"]
    rows = [
        (j, ex["alpha"][j], ex["predicted_valuations"][j], f"{ex['measured_valuations'][j]:.4f}", ex["match"][j])
        for j in range(len(ex["alpha"]))
    ]
    print()
    print(f"beta = {ex['beta']}")
    print(_table(rows, ["j", "alpha_j", "alpha_j - beta", "measured", "match"]))


def cmd_mollifier_build(args) -> int:
    m = args.m or args.k + 3
    moll = build_mollifier(args.k, args.epsilon, build_base(m), args.dim)
    Path(args.out).write_text(moll.dumps() + "\n")
    report = _audit_moll(moll, args.tol, args.ladder)
    _print_moll_audit(report)
    print(f"\nwrote {args.out}")
    return 0


def cmd_mollifier_audit(args) -> int:
    moll = _load_moll(args.file)
    report = _audit_moll(moll, args.tol, args.ladder)
    _print_moll_audit(report)
    report["config"] = _config(args).to_dict()
    print()
    print(_emit_json(report, args.json))
    return 0


def cmd_delta_audit(args) -> int:
    net = DeltaNet(_load_moll(args.moll))
    rep = audit_delta(net, args.epsilon, alpha_max=args.alpha_max, tol=args.tol)
    print(_table([(a, b, "ok" if c else "FAIL") for a, b, c in rep.rows()], ["property", "value", "status"]))
    ok = rep.support_ok and rep.moments_ok and rep.excess_scale_free
    return 0 if ok else 1


def cmd_cutoff_build(args) -> int:
    net = DeltaNet(_load_moll(args.moll))
    dom = parse_domain(args.domain)
    cut = build_cutoff(dom, args.epsilon, net)
    payload = {
        "domain": str(dom),
        "epsilon": fmt_rational(cut.epsilon),
        "core": [[fmt_rational(a), fmt_rational(b)] for a, b in cut.core],
        "plateau": [[fmt_rational(a), fmt_rational(b)] for a, b in cut.one_region()],
        "shape": cut.shape.to_dict(),
        "config": _config(args).to_dict(),
    }
    _emit_json(payload, args.out)
    rows = [(f"[{a}, {b}]", "Pi == 1") for a, b in cut.one_region()]
    if not cut.shape.is_zero:
        rows.append((f"support [{cut.shape.support[0]}, {cut.shape.support[1]}]", "Pi != 0 only here"))
    print(_table(rows, ["region", "property"]))
    print(f"\nwrote {args.out}")
    return 0


def cmd_dist_pair(args) -> int:
    t = parse_distribution(args.dist)
    phi = _phi(args.phi)
    v = pair(t, phi, args.tol)
    if isinstance(v, Enclosure):
        print(f"enclosure [{v.lo}, {v.hi}] width {float(v.width):.3e} (~{float(v.mid):.15g})")
    else:
        print(f"{fmt_rational(v)} (exact, ~{float(v):.15g})")
    return 0


def cmd_embed(args) -> int:
    t = parse_distribution(args.dist)
    dom = parse_domain(args.domain)
    net = _net(args)
    ladder = parse_ladder(args.ladder)
    window = tuple(_rational(x) for x in args.window.split(",")) if args.window else None
    rep = embed_distribution(t, dom, net, ladder, window)
    phi = _phi(args.pair)
    grid = parse_grid(args.grid, len(ladder), args.trunc)
    res = rep_pair(rep, phi, grid, args.trunc, args.tol)
    exact_value = pair(t, phi, args.tol)
    with open(args.csv, "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(["epsilon", "pairing", "error"])
        for e, v in res.samples:
            err = v - exact_value
            w.writerow([fmt_rational(e), _csv_value(v), _csv_value(err)])
    if res.number is None:
        print(res.warning, file=sys.stderr)
        return 1
    print(format_series(res.number))
    return 0


def _csv_value(v):
    if isinstance(v, Enclosure):
        return f"{float(v.mid):.17g}±{float(v.width) / 2:.3g}"
    return fmt_rational(v)


def cmd_product(args) -> int:
    lhs, rhs = parse_distribution(args.lhs), parse_distribution(args.rhs)
    phi = _phi(args.phi)
    net = _net(args)
    ladder = parse_ladder(args.ladder)
    grid = parse_grid(args.grid, len(ladder), args.trunc)
    dom = parse_domain(args.domain)
    rep = product_experiment(lhs, rhs, phi, net, ladder, grid, args.trunc, dom, tol=args.tol)
    payload = rep.to_dict()
    payload["config"] = _config(args).to_dict()
    print(_emit_json(payload, args.out))
    return 0 if rep.number is not None else 1


def _read_samples(path) -> list:
    out = []
    with open(path, newline="") as fh:
        for row in csv.DictReader(fh):
            e = as_rational(row["epsilon"])
            if "lo" in row and "hi" in row:
                out.append((e, Enclosure(as_rational(row["lo"]), as_rational(row["hi"]))))
            elif "value_num" in row:
                out.append((e, Fraction(int(row["value_num"]), int(row["value_den"]))))
            else:
                out.append((e, as_rational(row["value"])))
    return out


def cmd_expand_fit(args) -> int:
    samples = _read_samples(args.csv)
    grid = parse_grid(args.grid, len(samples), args.trunc)
    fit = fit_expansion(samples, grid, args.trunc, args.max_residual)
    payload = fit.to_dict()
    payload["number"] = format_series(fit.to_number())
    payload["config"] = _config(args).to_dict()
    print(_emit_json(payload, args.out))
    return 0


def cmd_field(args) -> int:
    if args.poly:
        coeffs = [parse_series(c, args.trunc) for c in args.poly.split(";")]
        for r in puiseux_root(coeffs, args.trunc):
            flag = "" if r.exact else f"  [inexact at stage {r.stage}: {r.note}]"
            print(format_series(r.value) + flag)
        return 0
    print(format_series(parse_series(args.expr, args.trunc)))
    return 0


# ---------------------------------------------------------------------------
# Parser
# ---------------------------------------------------------------------------


def _add_net_flags(p):
    p.add_argument("--moll", help="mollifier JSON file (overrides --k/--m/--net-epsilon)")
    p.add_argument("--k", type=_positive_int, default=DEFAULT_K, help="net stage (default 1)")
    p.add_argument("--m", type=_positive_int, default=None, help="bump exponent (default k+3)")
    p.add_argument("--net-epsilon", type=_rational, default=DEFAULT_NET_EPS, help="kernel epsilon (default 1/16)")


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="asympt", description="Exact finite-stage asymptotic functions.")
    ap.add_argument("--seed", type=int, default=0, help="seed for randomized checks (recorded in reports)")
    sub = ap.add_subparsers(dest="command", required=True)

    mol = sub.add_parser("mollifier", help="build or audit a moment-vanishing kernel")
    msub = mol.add_subparsers(dest="sub", required=True)
    b = msub.add_parser("build")
    b.add_argument("--k", type=_positive_int, required=True)
    b.add_argument("--epsilon", type=_rational, required=True)
    b.add_argument("--m", type=_positive_int, default=None, help="bump exponent (default k+3)")
    b.add_argument("--dim", type=_positive_int, default=1)
    b.add_argument("--out", default="moll.json")
    b.add_argument("--tol", type=_rational, default=DEFAULT_WIDTH)
    b.add_argument("--ladder", default=DEFAULT_LADDER)
    b.set_defaults(func=cmd_mollifier_build)
    a = msub.add_parser("audit")
    a.add_argument("file")
    a.add_argument("--tol", type=_rational, default=DEFAULT_WIDTH)
    a.add_argument("--ladder", default=DEFAULT_LADDER)
    a.add_argument("--json", default=None, help="also write the JSON report here")
    a.set_defaults(func=cmd_mollifier_audit)

    dl = sub.add_parser("delta", help="audit a delta net")
    dsub = dl.add_subparsers(dest="sub", required=True)
    d = dsub.add_parser("audit")
    d.add_argument("--moll", required=True)
    d.add_argument("--epsilon", type=_rational, required=True)
    d.add_argument("--alpha-max", type=_nonneg_int, default=2)
    d.add_argument("--tol", type=_rational, default=DEFAULT_WIDTH)
    d.set_defaults(func=cmd_delta_audit)

    co = sub.add_parser("cutoff", help="build a cut-off function")
    csub = co.add_subparsers(dest="sub", required=True)
    c = csub.add_parser("build")
    c.add_argument("--domain", required=True)
    c.add_argument("--epsilon", type=_rational, required=True)
    c.add_argument("--moll", required=True)
    c.add_argument("--out", default="cutoff.json")
    c.set_defaults(func=cmd_cutoff_build)

    di = sub.add_parser("dist", help="pair a distribution with a test function")
    disub = di.add_subparsers(dest="sub", required=True)
    p = disub.add_parser("pair")
    p.add_argument("--dist", required=True)
    p.add_argument("--phi", required=True, help="bump@a:r[:m], poly:c0,c1@[a,b][:m] or a PiecewisePoly JSON file")
    p.add_argument("--tol", type=_rational, default=DEFAULT_WIDTH)
    p.set_defaults(func=cmd_dist_pair)

    e = sub.add_parser("embed", help="embed a distribution and fit its pairing")
    e.add_argument("--dist", required=True)
    e.add_argument("--domain", default="(-inf,inf)")
    _add_net_flags(e)
    e.add_argument("--ladder", default=DEFAULT_LADDER)
    e.add_argument("--pair", required=True, help="test function spec")
    e.add_argument("--grid", default="int")
    e.add_argument("--trunc", type=_rational, default=DEFAULT_TRUNC)
    e.add_argument("--window", default=None, help="a,b")
    e.add_argument("--tol", type=_rational, default=DEFAULT_WIDTH)
    e.add_argument("--csv", default="embed_slices.csv")
    e.set_defaults(func=cmd_embed, sub=None)

    pr = sub.add_parser("product", help="multiply two embedded distributions")
    pr.add_argument("--lhs", required=True)
    pr.add_argument("--rhs", required=True)
    pr.add_argument("--phi", required=True)
    pr.add_argument("--domain", default="(-inf,inf)")
    _add_net_flags(pr)
    pr.add_argument("--ladder", default=DEFAULT_LADDER)
    pr.add_argument("--grid", default="int")
    pr.add_argument("--trunc", type=_rational, default=DEFAULT_TRUNC)
    pr.add_argument("--tol", type=_rational, default=DEFAULT_WIDTH)
    pr.add_argument("--out", default=None)
    pr.set_defaults(func=cmd_product, sub=None)

    ex = sub.add_parser("expand", help="fit an expansion to sampled values")
    exsub = ex.add_subparsers(dest="sub", required=True)
    f = exsub.add_parser("fit")
    f.add_argument("--csv", required=True, help="columns epsilon,value_num,value_den or epsilon,lo,hi")
    f.add_argument("--grid", default="int")
    f.add_argument("--trunc", type=_rational, default=DEFAULT_TRUNC)
    f.add_argument("--max-residual", type=_rational, default=Fraction(10**6))
    f.add_argument("--out", default=None)
    f.set_defaults(func=cmd_expand_fit)

    fl = sub.add_parser("field", help="evaluate or solve in the truncated series field")
    g = fl.add_mutually_exclusive_group(required=True)
    g.add_argument("--expr")
    g.add_argument("--poly", help="ascending coefficients separated by ';' (prints the roots)")
    fl.add_argument("--trunc", type=_rational, default=DEFAULT_TRUNC)
    fl.set_defaults(func=cmd_field, sub=None)
    return ap


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code or 0)
    try:
        return args.func(args)
    except DistributionSyntaxError as exc:
        # malformed expressions are usage errors, not computational ones
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except AsymptError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    except ValueError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2


run = main

if __name__ == "__main__":
    sys.exit(main())

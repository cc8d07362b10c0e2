"""Products of embedded distributions paired with a test function.

Prints the fitted expansion of <Sigma(S) Sigma(T), phi> for a few pairs and
several base bumps, so basis (in)dependence of each coefficient is visible.
"""

import argparse
import json
from fractions import Fraction

from asympt.asympfunc import product_experiment
from asympt.distributions import bump, parse_distribution
from asympt.expansion import make_ladder, parse_grid

from _common import RESULTS, make_delta_net

PAIRS = [("delta", "heaviside"), ("delta", "delta"), ("heaviside", "heaviside"), ("delta^(1)", "heaviside")]


def main():
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--trunc", type=Fraction, default=Fraction(4))
    ap.add_argument("--out", default=None)
    args = ap.parse_args()
    ladder = make_ladder(Fraction(1, 8), Fraction(1, 2), 10)
    grid = parse_grid("int", len(ladder), args.trunc)
    phi = bump(0, 1, 2)
    records = []
    for lhs, rhs in PAIRS:
        for m in (3, 4, 5):
            rep = product_experiment(
                parse_distribution(lhs), parse_distribution(rhs), phi, make_delta_net(1, m=m), ladder, grid, args.trunc
            )
            rec = {"lhs": lhs, "rhs": rhs, "m": m, "number": str(rep.number), "warning": rep.result.warning}
            if rep.result.fit is not None:
                rec["residual"] = float(rep.result.fit.residual_norm)
            records.append(rec)
            print(f"{lhs:>10} * {rhs:<10} m={m}: {rep.number}")
    out = RESULTS if args.out is None else args.out
    path = __import__("pathlib").Path(out)
    path.mkdir(parents=True, exist_ok=True)
    (path / "products.json").write_text(json.dumps(records, indent=2))
    print("wrote", path / "products.json")


if __name__ == "__main__":
    main()

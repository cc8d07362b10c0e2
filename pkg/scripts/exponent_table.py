"""Predicted versus measured valuations of the mollifier coefficients c_j(eps)."""

import argparse
from fractions import Fraction

from asympt.expansion import make_ladder
from asympt.mollifier import exponent_report

from _common import print_rows, write_csv


def main():
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--kmax", type=int, default=6)
    ap.add_argument("--out", default=None, help="output directory (default: results/)")
    args = ap.parse_args()
    ladder = make_ladder(Fraction(1, 8), Fraction(1, 2), 10)
    header = ["k", "j", "alpha_j", "beta", "predicted", "measured", "deviation"]
    rows = []
    for k in range(1, args.kmax + 1):
        rep = exponent_report(k, ladder)
        for j, (meas, pred) in enumerate(zip(rep.measured_valuations, rep.predicted_valuations)):
            rows.append([k, j, rep.alpha[j], rep.beta, pred, f"{meas:.6f}", f"{abs(meas - pred):.2e}"])
    print_rows(header, rows)
    print("wrote", write_csv("exponent_table.csv", header, rows, args.out))


if __name__ == "__main__":
    main()

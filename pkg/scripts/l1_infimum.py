"""How close ∫|phi| gets to 1 as the node spacing eps shrinks, per stage k."""

import argparse
from fractions import Fraction

from asympt.mollifier import build_base, build_mollifier, find_epsilon, l1_norm

from _common import print_rows, write_csv

TOL = Fraction(1, 2**40)


def main():
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--kmax", type=int, default=5)
    ap.add_argument("--tmax", type=int, default=8, help="scan eps = 2^-1 .. 2^-tmax")
    ap.add_argument("--delta", type=Fraction, default=Fraction(1, 20))
    ap.add_argument("--out", default=None)
    args = ap.parse_args()
    header = ["k", "eps", "l1_lo", "l1_hi", "closed_form_k1"]
    rows = []
    for k in range(1, args.kmax + 1):
        base = build_base(k + 3)
        for t in range(1, args.tmax + 1):
            eps = Fraction(1, 2**t)
            enc = l1_norm(build_mollifier(k, eps, base), TOL)
            closed = f"{float((1 + eps) / (1 - eps)):.8f}" if k == 1 else ""
            rows.append([k, str(eps), f"{float(enc.lo):.10f}", f"{float(enc.hi):.10f}", closed])
    print_rows(header, rows)
    for k in range(1, args.kmax + 1):
        his = [float(r[3]) for r in rows if r[0] == k]
        ok = all(b <= a for a, b in zip(his, his[1:]))
        print(f"k={k}: upper bound {'non-increasing' if ok else 'NOT monotone'} along the scan")
    print("wrote", write_csv("l1_infimum.csv", header, rows, args.out))
    for k in range(1, args.kmax + 1):
        eps, _ = find_epsilon(k, args.delta)
        print(f"k={k}: largest dyadic eps with ∫|phi| <= 1 + {args.delta} is {eps}")


if __name__ == "__main__":
    main()

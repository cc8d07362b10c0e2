"""Fitted decay order of the pairing error <Sigma(T)_eps, phi> - <T, phi>.

Several test functions are used so the pre-asymptotic bias of the log-log
fit (which can sit slightly on either side of the true integer order) is
visible rather than hidden by one lucky choice.
"""

import argparse
from fractions import Fraction

from asympt.asympfunc import check_pairing_preservation
from asympt.distributions import DeltaDeriv, Heaviside, bump
from asympt.expansion import make_ladder

from _common import make_delta_net, print_rows, write_csv

TESTS = {
    "bump@1/3:1:10": bump(Fraction(1, 3), 1, 10),
    "bump@-1/5:1:12": bump(Fraction(-1, 5), 1, 12),
    "bump@1/2:3/2:10": bump(Fraction(1, 2), Fraction(3, 2), 10),
}
TARGETS = {"delta": DeltaDeriv(0, 0), "delta'": DeltaDeriv(1, 0), "H": Heaviside(0)}


def main():
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--out", default=None)
    args = ap.parse_args()
    ladder = make_ladder(Fraction(1, 8), Fraction(1, 2), 10)
    header = ["phi", "T", "k", "order", "residual", "k+1"]
    rows = []
    for label, phi in TESTS.items():
        for name, t in TARGETS.items():
            for k in (1, 2, 3):
                est = check_pairing_preservation(t, phi, make_delta_net(k, m=k + 8), ladder, window=(-3, 3)).estimate
                rows.append([label, name, k, f"{est.order:.5f}", f"{est.residual:.2e}", k + 1])
    print_rows(header, rows)
    print("wrote", write_csv("preservation_orders.csv", header, rows, args.out))


if __name__ == "__main__":
    main()

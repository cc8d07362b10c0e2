import csv
from fractions import Fraction
from pathlib import Path

from asympt.delta import DeltaNet
from asympt.mollifier import build_base, build_mollifier

RESULTS = Path(__file__).resolve().parent.parent / "results"


def make_delta_net(k, m=None, eps=Fraction(1, 16)):
    return DeltaNet(build_mollifier(k, eps, build_base(m or k + 3)))


def write_csv(name, header, rows, out_dir=None):
    out = Path(out_dir or RESULTS)
    out.mkdir(parents=True, exist_ok=True)
    path = out / name
    with path.open("w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(header)
        w.writerows(rows)
    return path


def print_rows(header, rows):
    widths = [max(len(str(x)) for x in col) for col in zip(header, *rows)]
    for r in [header, *rows]:
        print("  ".join(str(x).rjust(w) for x, w in zip(r, widths)))

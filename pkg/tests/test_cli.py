import csv
import json
from fractions import Fraction


from asympt.cli import main
from asympt.exact import PiecewisePoly
from asympt.mollifier import Mollifier

SHORT_LADDER = "2^-3..2^-8"


def run(capsys, *argv):
    code = main(list(argv))
    out = capsys.readouterr()
    return code, out.out, out.err


def last_json(text):
    return json.loads(text[text.index("{") :])


def test_field_geometric_series(capsys):
    code, out, _ = run(capsys, "field", "--expr", "1/(1-e)", "--trunc", "6")
    assert code == 0
    assert out.strip() == "1 + e + e^2 + e^3 + e^4 + e^5 + O(e^6)"


def test_field_roots(capsys):
    code, out, _ = run(capsys, "field", "--poly=-e;0;1")
    assert code == 0
    assert sorted(out.split("\n")[:2]) == ["-e^{1/2}", "e^{1/2}"]


def test_mollifier_build_and_audit(tmp_path, capsys):
    path = tmp_path / "moll.json"
    code, out, _ = run(capsys, "mollifier", "build", "--k", "2", "--epsilon", "1/16", "--m", "5", "--out", str(path))
    assert code == 0
    moll = Mollifier.loads(path.read_text())
    assert moll.k == 2 and moll.m == 5 and moll.epsilon == Fraction(1, 16)
    assert "moment 1" in out and "moment 2" in out
    code, out, _ = run(capsys, "mollifier", "audit", str(path), "--json", str(tmp_path / "audit.json"))
    assert code == 0
    report = json.loads((tmp_path / "audit.json").read_text())
    assert [Fraction(r) for r in report["moment_residuals"]] == [0, 0]
    assert Fraction(report["mass_residual"]) == 0
    assert report["exponents"]["alpha"] == [7, 4, 2] and report["exponents"]["beta"] == 4
    assert report["config"]["command"] == "mollifier audit"


def test_delta_audit_and_cutoff(tmp_path, capsys):
    path = tmp_path / "moll.json"
    assert main(["mollifier", "build", "--k", "1", "--epsilon", "1/16", "--out", str(path)]) == 0
    capsys.readouterr()
    code, out, _ = run(capsys, "delta", "audit", "--moll", str(path), "--epsilon", "1/64")
    assert code == 0 and "FAIL" not in out.split("(iv)")[0]
    cpath = tmp_path / "cut.json"
    code, out, _ = run(capsys, "cutoff", "build", "--domain", "(0,10)", "--epsilon", "1/8", "--moll", str(path), "--out", str(cpath))
    assert code == 0
    payload = json.loads(cpath.read_text())
    assert payload["plateau"] == [["3/8", "63/8"]]
    shape = PiecewisePoly.from_dict(payload["shape"])
    assert shape(Fraction(1, 2)) == 1 and shape(Fraction(1, 8)) == 0


def test_dist_pair(capsys):
    code, out, _ = run(capsys, "dist", "pair", "--dist", "delta", "--phi", "bump@0:1:2")
    assert code == 0 and out.startswith("15/16 (exact")
    code, out, _ = run(capsys, "dist", "pair", "--dist", "pv1x", "--phi", "bump@1/2:1")
    assert code == 0 and out.startswith("enclosure [")


def test_product_delta_heaviside(tmp_path, capsys):
    out_path = tmp_path / "prod.json"
    code, out, _ = run(
        capsys,
        "product", "--lhs", "delta", "--rhs", "heaviside", "--phi", "bump@0:1:2",
        "--ladder", "2^-3..2^-12", "--grid", "int", "--trunc", "4", "--out", str(out_path),
    )
    assert code == 0
    payload = json.loads(out_path.read_text())
    terms = {t["q"]: Fraction(t["coeff"]) for t in payload["terms"]}
    assert terms["0"] == Fraction(15, 32)
    assert Fraction(payload["config"]["options"]["trunc"]) == 4
    assert last_json(out) == payload


def test_embed_writes_slices(tmp_path, capsys):
    csv_path = tmp_path / "slices.csv"
    code, out, _ = run(
        capsys, "embed", "--dist", "delta", "--pair", "bump@0:1:2", "--ladder", "2^-3..2^-12",
        "--k", "2", "--trunc", "3", "--csv", str(csv_path),
    )
    assert code == 0 and out.strip().startswith("15/16")
    rows = list(csv.DictReader(csv_path.open()))
    assert len(rows) == 10 and rows[0]["epsilon"] == "1/8"


def test_expand_fit(tmp_path, capsys):
    path = tmp_path / "samples.csv"
    with path.open("w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(["epsilon", "value_num", "value_den"])
        for i in range(3, 13):
            e = Fraction(1, 2**i)
            v = 3 / e**2 + 2 + 5 * e**3
            w.writerow([str(e), v.numerator, v.denominator])
    code, out, _ = run(capsys, "expand", "fit", "--csv", str(path), "--trunc", "4")
    assert code == 0
    payload = last_json(out)
    assert payload["number"] == "3*e^-2 + 2 + 5*e^3 + O(e^4)"
    assert Fraction(payload["residual"]) == 0


def test_exit_codes(tmp_path, capsys):
    assert run(capsys, "nonsense")[0] == 2
    assert run(capsys, "mollifier", "build", "--k", "x", "--epsilon", "1/2")[0] == 2
    code, _, err = run(capsys, "mollifier", "build", "--k", "1", "--epsilon", "1", "--out", str(tmp_path / "m.json"))
    assert code == 1 and "singular" in err
    code, _, err = run(capsys, "dist", "pair", "--dist", "delta +", "--phi", "bump@0:1")
    assert code == 2 and "position" in err
    code, _, err = run(capsys, "field", "--expr", "1/(e-e)")
    assert code == 1


def test_outputs_are_deterministic(tmp_path, capsys):
    args = ["product", "--lhs", "delta", "--rhs", "delta", "--phi", "bump@0:1:2", "--ladder", SHORT_LADDER, "--trunc", "2"]
    _, first, _ = run(capsys, *args)
    _, second, _ = run(capsys, *args)
    assert first == second

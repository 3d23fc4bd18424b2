import csv
import io
import json
import math

import pytest

from ecs_metrology import cli


def run(capsys, *argv):
    code = cli.main(list(argv))
    out = capsys.readouterr().out
    return code, out


def run_json(capsys, *argv):
    code, out = run(capsys, *argv, "--format", "json")
    return code, json.loads(out)


def test_phase_bound_examples(capsys):
    code, rows = run_json(capsys, "phase-bound", "--family", "joo", "--alpha", "1")
    assert code == 0
    assert rows[0]["delta_theta_paper_formula"] == pytest.approx(0.6468749626195496, rel=1e-12)
    _, rows = run_json(capsys, "phase-bound", "--family", "noon", "--n", "4")
    assert rows[0]["delta_theta_from_oracle"] == pytest.approx(0.25, abs=1e-12)
    _, rows = run_json(capsys, "phase-bound", "--family", "coherent", "--alpha", "2")
    assert rows[0]["delta_theta_from_oracle"] == pytest.approx(0.25, abs=1e-10)


def test_phase_bound_sweep_rows(capsys):
    _, rows = run_json(capsys, "phase-bound", "--family", "joo,quasiBell1",
                       "--alpha-range", "0.5:2:4", "--family", "noon", "--n", "1,2")
    assert [(r["family"], r["alpha"], r["noon_n"]) for r in rows] == [
        ("joo", 0.5, None), ("joo", 1.0, None), ("joo", 1.5, None), ("joo", 2.0, None),
        ("quasiBell1", 0.5, None), ("quasiBell1", 1.0, None), ("quasiBell1", 1.5, None),
        ("quasiBell1", 2.0, None), ("noon", None, 1), ("noon", None, 2),
    ]


def test_usage_errors(capsys):
    for argv in (["phase-bound", "--family", "bogus", "--alpha", "1"],
                 ["phase-bound", "--family", "joo"],
                 ["phase-bound", "--family", "noon", "--alpha", "1"],
                 ["compare-energy"],
                 ["bank-design", "--epsilon", "1,-2"],
                 ["bank-design", "--epsilon", "1,2", "--demo-clicks", "1"],
                 ["force-detect", "--alpha", "1", "--epsilon", "1", "--priors", "0.3,0.3"],
                 ["entanglement", "--alpha-range", "2:1:3"],
                 ["nope"]):
        with pytest.raises(SystemExit) as info:
            cli.main(argv)
        assert info.value.code == 2, argv
    capsys.readouterr()


def test_compare_energy(capsys):
    code, rows = run_json(capsys, "compare-energy", "--energy", "2", "--family", "joo,quasiBell2")
    assert code == 0
    by = {r["family"]: r for r in rows}
    assert by["joo"]["delta_theta_paper_formula"] < by["quasiBell2"]["delta_theta_paper_formula"]
    assert by["joo"]["paper_vs_oracle_deviation"] <= 1e-6
    _, rows = run_json(capsys, "compare-energy", "--energy", "1", "--family", "joo")
    assert len(rows) == 1 and rows[0]["energy"] == 1.0


def test_compare_energy_row_errors(capsys):
    # odd-parity states cannot reach one photon; that row carries the error
    code, rows = run_json(capsys, "compare-energy", "--energy", "1", "--family", "joo,quasiBell2")
    assert code == 0
    assert rows[0]["error"] is None
    assert "EnergyRangeError" in rows[1]["error"]
    code, rows = run_json(capsys, "compare-energy", "--energy", "0.5", "--family", "quasiBell2")
    assert code == 1
    capsys.readouterr()


def test_entanglement(capsys):
    _, rows = run_json(capsys, "entanglement", "--alpha", "0,1,5")
    zero, one, five = rows
    assert "degenerate" in zero["error"]
    assert one["e_psi1"] == pytest.approx(0.9484184662366614, abs=1e-12)
    assert one["e_psi2"] == 1.0
    assert one["abs_diff_psi1"] <= 1e-8
    for key in ("e_psi1", "e_psi2", "e_psi3", "e_psi4"):
        assert five[key] == pytest.approx(1.0, abs=1e-6)


def test_force_detect(capsys):
    _, rows = run_json(capsys, "force-detect", "--alpha", "1", "--epsilon", "0,1",
                       "--trials", "100000", "--seed", "0")
    zero, one = rows
    assert zero["pe_ecs"] == pytest.approx(0.5) and zero["pe_coherent"] == pytest.approx(0.5)
    assert one["pe_coherent"] == pytest.approx(0.10246995118967495, abs=1e-15)
    assert one["paper_claim_pe_ecs"] == 0
    assert abs(one["force_overlap_abs"] - one["force_overlap_oracle_abs"]) <= 1e-9
    assert one["seed"] == 0
    for key, ref in (("mc_pe_ecs", one["pe_ecs"]), ("mc_pe_coherent", one["pe_coherent"])):
        assert abs(one[key] - ref) <= 3 * math.sqrt(ref * (1 - ref) / 100_000)


def test_force_detect_alpha_zero_row(capsys):
    code, rows = run_json(capsys, "force-detect", "--alpha", "0", "--epsilon", "1")
    assert code == 1
    assert "DegenerateProbeError" in rows[0]["error"]
    capsys.readouterr()


def test_bank_design(capsys):
    _, rows = run_json(capsys, "bank-design", "--epsilon", "1,2,4", "--demo-clicks", "0,1,0")
    assert [r["beta"] for r in rows] == pytest.approx([1, 1.41421356, 2])
    assert all(r["bank_decision"] is True for r in rows)
    _, rows = run_json(capsys, "bank-design", "--epsilon-range", "0.1:10:8:log")
    assert len(rows) == 8
    assert all(abs(r["beta"] ** 2 - r["epsilon"]) <= 1e-12 * r["epsilon"] for r in rows)


def test_csv_and_json_agree(capsys):
    argv = ["force-detect", "--alpha", "0.7,1.2", "--epsilon", "0.5", "--trials", "1000"]
    _, text = run(capsys, *argv, "--format", "csv")
    _, data = run_json(capsys, *argv)
    rows = list(csv.DictReader(io.StringIO(text)))
    assert list(rows[0].keys()) == list(data[0].keys())
    for crow, jrow in zip(rows, data):
        for key, jval in jrow.items():
            cval = crow[key]
            if jval is None:
                assert cval == ""
            elif isinstance(jval, bool):
                assert cval == str(jval).lower()
            elif isinstance(jval, (int, float)):
                assert float(cval) == jval
            else:
                assert cval == jval


def test_csv_format_details(capsys):
    _, text = run(capsys, "force-detect", "--alpha", "1", "--epsilon", "1")
    assert "\r" not in text
    header, row = text.strip().split("\n")
    assert header.startswith("alpha,epsilon,beta")
    assert "0.77961764091470187+0i" in row


def test_output_file(tmp_path, capsys):
    path = tmp_path / "out.csv"
    assert cli.main(["bank-design", "--epsilon", "1,4", "--output", str(path)]) == 0
    assert capsys.readouterr().out == ""
    assert path.read_text().splitlines()[0] == "index,epsilon,beta,beta_squared,click,bank_decision"


def test_jobs_do_not_change_output(capsys):
    argv = ["compare-energy", "--energy-range", "1.5:3:4", "--family", "joo,quasiBell2,quasiBell3"]
    _, serial = run(capsys, *argv)
    _, parallel = run(capsys, *argv, "--jobs", "4")
    assert serial == parallel


def test_parse_range():
    assert cli.parse_range("1:3:3") == [1.0, 2.0, 3.0]
    assert cli.parse_range("1:100:3:log") == pytest.approx([1, 10, 100])
    assert cli.parse_range("2:2:1") == [2.0]

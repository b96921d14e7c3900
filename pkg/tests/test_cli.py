import csv
import json
from pathlib import Path

import jsonschema
import pytest

from dampedchain.cli import main
from dampedchain.report import load_schema

DATA = Path(__file__).parent / "data"
FIVE = str(DATA / "five_node_edges.txt")
FOUR = str(DATA / "four_node_edges.txt")
EIGHT = str(DATA / "eight_node_edges.txt")


def run_cli(capsys, *argv):
    code = main(list(argv))
    out = capsys.readouterr().out
    return code, out


def run_json(capsys, *argv):
    code, out = run_cli(capsys, *argv)
    assert code == 0, out
    return json.loads(out)


def test_structure_commands(capsys):
    report = run_json(capsys, "structure", "--input", FOUR)
    assert report["structure"]["regime"] == "regular"
    report = run_json(capsys, "structure", "--input", EIGHT)
    assert report["structure"]["regime"] == "singular"
    assert [c["states"] for c in report["structure"]["classes"]] == [
        [1, 2, 3, 4],
        [5, 6, 7, 8],
    ]


def test_expand_reproduces_coefficient_table(capsys):
    report = run_json(capsys, "expand", "--input", FIVE, "--order", "2")
    coeffs = report["expansion"]["coefficients"]
    assert [round(c, 5) for c in coeffs[0]] == [0.14096, -0.04591, -0.03168, -0.03168, -0.03168]
    assert [round(c, 5) for c in coeffs[1]] == [-0.01946, 0.00456, 0.00497, 0.00497, 0.00497]
    base = report["expansion"]["base"]
    assert base[0] == pytest.approx(5 / 66, abs=1e-11)


def test_bounds_family_one_reproduces_reference_row(capsys):
    report = run_json(
        capsys, "bounds", "--input", FIVE, "--epsilon", "0.15", "--theorem", "1"
    )
    record = report["bounds"]["reports"][0]
    assert record["id"] == "1"
    per_state = [round(v, 4) for v in record["per_state"]]
    # The empirically estimated constants land near the known envelope values.
    assert per_state[0] == pytest.approx(0.0874, abs=0.02)
    deltas = [row["delta"] for row in report["bounds"]["ergodicity"]]
    assert len(deltas) == 12
    assert deltas[0] == pytest.approx(0.5, abs=1e-9)
    assert deltas[11] == pytest.approx(1 / 3, abs=1e-6)


def test_stationary_epsilon_grid(capsys):
    report = run_json(
        capsys, "stationary", "--input", FIVE, "--epsilon-grid", "0.05,0.15"
    )
    entries = report["stationary"]["by_epsilon"]
    assert [e["epsilon"] for e in entries] == [0.05, 0.15]
    for entry in entries:
        assert entry["direct"]["pi"] == pytest.approx(entry["series"]["pi"], abs=1e-8)
        assert entry["direct"]["pi"] == pytest.approx(entry["power"]["pi"], abs=1e-8)


def test_triangular_sweep_command(capsys, tmp_path):
    plot = tmp_path / "sweep.csv"
    report = run_json(
        capsys,
        "triangular",
        "--input",
        EIGHT,
        "--epsilon",
        "0.1",
        "--initial",
        "point:1",
        "--n-grid",
        "0:30",
        "--plot-data",
        str(plot),
    )
    rows = report["triangular"]["rows"]
    assert rows[10]["rel_error"][0] == pytest.approx(0.36788, abs=1e-4)
    assert rows[30]["rel_error"][0] == pytest.approx(0.04979, abs=1e-4)
    with plot.open() as fh:
        table = list(csv.reader(fh))
    assert table[0][:3] == ["n", "eps_n", "bound"]
    assert len(table) == 32


def test_coupling_sim_requires_seed(capsys):
    code, out = run_cli(capsys, "coupling-sim", "--input", FIVE)
    assert code == 1
    assert json.loads(out)["error"]["type"] == "ChainError"


def test_coupling_sim_runs_and_is_deterministic(capsys):
    args = (
        "coupling-sim",
        "--input",
        FIVE,
        "--epsilon",
        "0.15",
        "--seed",
        "9",
        "--trials",
        "2000",
        "--horizon",
        "10",
    )
    first = run_json(capsys, *args)
    second = run_json(capsys, *args)
    assert first == second
    sim = first["coupling_sim"]
    assert sim["generator"] == "philox4x64"
    assert len(sim["tail"]) == 11


def test_report_is_byte_identical_and_schema_valid(capsys, tmp_path):
    out1 = tmp_path / "a.json"
    out2 = tmp_path / "b.json"
    for out in (out1, out2):
        code, _ = run_cli(
            capsys,
            "report",
            "--input",
            EIGHT,
            "--epsilon",
            "0.1",
            "--initial",
            "point:1",
            "--seed",
            "5",
            "--trials",
            "500",
            "--horizon",
            "12",
            "--out",
            str(out),
        )
        assert code == 0
    assert out1.read_bytes() == out2.read_bytes()
    report = json.loads(out1.read_text())
    jsonschema.validate(report, load_schema())


@pytest.mark.parametrize(
    "argv",
    [
        ("structure", "--input", FIVE),
        ("stationary", "--input", FOUR, "--epsilon", "0.2"),
        ("expand", "--input", EIGHT, "--epsilon", "0.1"),
        ("bounds", "--input", EIGHT, "--epsilon", "0.1"),
        ("triangular", "--input", EIGHT, "--epsilon", "0.1", "--n-grid", "0:6"),
    ],
)
def test_all_commands_emit_schema_valid_reports(capsys, argv):
    report = run_json(capsys, *argv)
    jsonschema.validate(report, load_schema())


def test_error_reports_are_structured(capsys, tmp_path):
    # Asking for the regular-chain bound family on a split chain must fail loudly.
    code, out = run_cli(
        capsys, "bounds", "--input", EIGHT, "--epsilon", "0.1", "--theorem", "1"
    )
    assert code == 1
    payload = json.loads(out)
    assert payload["error"]["type"] == "RegimeError"
    assert "family 1" in payload["error"]["message"]


def test_bounds_plot_data_is_ergodicity_table(capsys, tmp_path):
    plot = tmp_path / "delta.csv"
    run_json(
        capsys, "bounds", "--input", FIVE, "--epsilon", "0.15", "--theorem", "5",
        "--plot-data", str(plot),
    )
    with plot.open() as fh:
        table = list(csv.reader(fh))
    assert table[0] == ["N", "delta"]
    assert len(table) == 13
    assert float(table[1][1]) == pytest.approx(0.5, abs=1e-9)


def test_damping_file_flag(capsys, tmp_path):
    weights = tmp_path / "weights.txt"
    weights.write_text("0.4 0.1 0.1 0.2 0.2\n")
    report = run_json(
        capsys, "stationary", "--input", FIVE, "--epsilon", "1.0",
        "--damping", str(weights),
    )
    # At full damping the stationary law is the damping vector itself.
    entry = report["stationary"]["by_epsilon"][0]
    assert entry["direct"]["pi"] == pytest.approx([0.4, 0.1, 0.1, 0.2, 0.2], abs=1e-10)


def test_thread_cap_does_not_change_output(capsys, monkeypatch):
    argv = ("stationary", "--input", FIVE, "--epsilon-grid", "0.05,0.1,0.2,0.4")
    monkeypatch.setenv("DAMPED_CHAIN_THREADS", "1")
    serial = run_json(capsys, *argv)
    monkeypatch.setenv("DAMPED_CHAIN_THREADS", "4")
    threaded = run_json(capsys, *argv)
    assert serial == threaded


def test_matrix_echo_reingests_identically(capsys, tmp_path):
    report = run_json(capsys, "structure", "--input", FIVE)
    echo = tmp_path / "echo.json"
    echo.write_text(json.dumps({"matrix": report["inputs"]["matrix"]}))
    second = run_json(capsys, "structure", "--input", str(echo))
    assert second["inputs"]["matrix"] == report["inputs"]["matrix"]
    assert second["structure"] == report["structure"]


def test_full_report_reproducible_from_its_own_echo(capsys, tmp_path):
    # Feeding the echoed matrix and damping back with the same seed must
    # reproduce every analysis section bit for bit.
    argv = (
        "report", "--input", EIGHT, "--epsilon", "0.1", "--initial", "point:1",
        "--seed", "77", "--trials", "400", "--horizon", "8",
    )
    first = run_json(capsys, *argv)
    echo = tmp_path / "echo.json"
    echo.write_text(
        json.dumps({
            "matrix": first["inputs"]["matrix"],
            "damping": first["inputs"]["damping"],
        })
    )
    second = run_json(
        capsys,
        "report", "--input", str(echo), "--epsilon", "0.1", "--initial", "point:1",
        "--seed", "77", "--trials", "400", "--horizon", "8",
    )
    for section in ("structure", "stationary", "spectrum", "expansion", "bounds",
                    "coupling_sim", "triangular"):
        assert second[section] == first[section], section

import json
import subprocess
import sys

import pytest

from symtrotter.cli import main, parse_time


def run(args, tmp_path):
    return main(args + ["--out", str(tmp_path)])


@pytest.mark.parametrize("text,val", [("pi", 3.141592653589793), ("2pi", 6.283185307179586), ("pi/2", 1.5707963267948966), ("0.5*pi", 1.5707963267948966), ("1.25", 1.25), ("-pi", -3.141592653589793)])
def test_parse_time(text, val):
    assert parse_time(text) == pytest.approx(val)


def test_evolve_outputs(tmp_path, capsys):
    assert run(["evolve", "--steps", "10", "--points", "5"], tmp_path) == 0
    lines = (tmp_path / "evolve.csv").read_text().splitlines()
    assert lines[0].startswith("# config: ")
    assert lines[1].split(",")[:3] == ["index", "time", "exact"]
    assert len(lines) == 7
    assert (tmp_path / "evolve.svg").read_text().startswith("<svg")


def test_sweep_outputs(tmp_path):
    code = run(["sweep", "--steps", "2,4", "--backend", "analytic", "--strategy", "general,naive"], tmp_path)
    assert code == 0
    rows = (tmp_path / "sweep.csv").read_text().splitlines()[2:]
    assert len(rows) == 4
    exp = (tmp_path / "sweep_expectations.csv").read_text().splitlines()
    assert len(exp) == 2 + 4 * 64
    data = json.loads((tmp_path / "sweep.json").read_text())
    assert data["config"]["strategy"] == "general"
    assert (tmp_path / "sweep.svg").exists()


def test_table_small(tmp_path, capsys):
    args = ["table", "--steps", "4", "--backend", "sampled-noisy", "--shots", "256", "--repeats", "2", "--twirls", "2",
            "--mitigation", "none,qrem"]
    assert run(args, tmp_path) == 0
    out = capsys.readouterr().out
    assert "shallow_shallow" in out
    assert (tmp_path / "table.txt").read_text().startswith("# config: ")
    assert len((tmp_path / "table.csv").read_text().splitlines()) == 2 + 6


def test_calibrate_endianness(tmp_path):
    noise = tmp_path / "n.json"
    noise.write_text(json.dumps({"p1": 0, "p2": 0, "readout": [[[0.9, 0.0], [0.1, 1.0]], [[1.0, 0.0], [0.0, 1.0]]]}))
    site = tmp_path / "site"
    bit = tmp_path / "bit"
    assert main(["calibrate", "--qubits", "2", "--shots", "4000", "--noise", str(noise), "--out", str(site)]) == 0
    assert main(["calibrate", "--qubits", "2", "--shots", "4000", "--noise", str(noise), "--out", str(bit), "--endianness", "bit-major"]) == 0

    def matrix(d):
        rows = (d / "assignment.csv").read_text().splitlines()[2:]
        return {r.split(",")[0]: [float(v) for v in r.split(",")[1:]] for r in rows}

    s, b = matrix(site), matrix(bit)
    # qubit 0 has the readout error: site-major flips 00 -> 10, bit-major 00 -> 01
    assert s["10"][0] > 0.05 and s["01"][0] == 0
    assert b["01"][0] > 0.05 and b["10"][0] == 0


def test_optimize_plan_and_file(tmp_path, capsys):
    assert run(["optimize", "--steps", "30"], tmp_path) == 0
    rep = json.loads(capsys.readouterr().out)
    assert rep["output_cnots"] == 5 and rep["input_cnots"] == 62
    circ = tmp_path / "c.txt"
    circ.write_text("CNOT 0,1\nRZ 0,0.3\nCNOT 0,1\n")
    assert main(["optimize", str(circ), "--out", str(tmp_path)]) == 0
    rep = json.loads(capsys.readouterr().out)
    assert rep["output_cnots"] == 0
    assert "RZ 0" in (tmp_path / "optimized.txt").read_text()


def test_optimize_bit_major_flips_qubits(tmp_path, capsys):
    circ = tmp_path / "c.txt"
    circ.write_text("# width=3\nH 0\n")
    assert main(["optimize", str(circ), "--out", str(tmp_path), "--endianness", "bit-major"]) == 0
    body = [l for l in (tmp_path / "optimized.txt").read_text().splitlines() if not l.startswith("#")]
    assert body and all(l.split()[1].startswith("0,") for l in body)


@pytest.mark.parametrize(
    "args",
    [
        ["evolve", "--strategy", "nope"],
        ["evolve", "--steps", "x"],
        ["sweep", "--strategy", "shallow_shallow", "--time", "1.0"],
        ["evolve", "--noise", "/nonexistent.json"],
        ["evolve", "--time", "banana"],
        ["table", "--steps", "4,5"],
        ["optimize", "/nonexistent.txt"],
        ["evolve", "--strategy", "shallow_specific", "--initial-state", "010+110"],
    ],
)
def test_config_errors_exit_2(args, tmp_path, capsys):
    assert run(args, tmp_path) == 2
    assert "configuration error" in capsys.readouterr().err


def test_bad_noise_file_exit_2(tmp_path):
    bad = tmp_path / "bad.yaml"
    bad.write_text("p1: [unclosed\n")
    assert run(["evolve", "--noise", str(bad)], tmp_path) == 2
    bad.write_text("p1: 5\n")
    assert run(["evolve", "--noise", str(bad)], tmp_path) == 2


def test_singular_readout_exit_3(tmp_path, capsys):
    noise = tmp_path / "n.json"
    # every outcome reads 0, so the calibrated matrix is rank one
    noise.write_text(json.dumps({"readout": [[1.0, 1.0], [0.0, 0.0]]}))
    args = ["table", "--strategy", "general", "--mitigation", "qrem", "--steps", "2", "--backend", "sampled-noisy",
            "--noise", str(noise), "--shots", "128", "--repeats", "1"]
    assert run(args, tmp_path) == 3
    assert "numerical failure" in capsys.readouterr().err


def test_argparse_usage_error_exit_2():
    with pytest.raises(SystemExit) as e:
        main(["evolve", "--backend", "quantum"])
    assert e.value.code == 2


def test_module_entry_point(tmp_path):
    r = subprocess.run([sys.executable, "-m", "symtrotter", "optimize", "--steps", "4", "--out", str(tmp_path)],
                       capture_output=True, text=True)
    assert r.returncode == 0
    assert json.loads(r.stdout)["output_cnots"] == 4


def test_same_seed_same_bytes(tmp_path):
    args = ["sweep", "--steps", "3", "--backend", "sampled-noisy", "--shots", "256", "--repeats", "2", "--twirls", "2",
            "--mitigation", "qrem+zne+twirl", "--seed", "11"]
    run(args, tmp_path / "a")
    run(args, tmp_path / "b")
    for name in ("sweep.csv", "sweep_expectations.csv", "sweep.json"):
        assert (tmp_path / "a" / name).read_bytes() == (tmp_path / "b" / name).read_bytes()
    run(args[:-1] + ["12"], tmp_path / "c")
    assert (tmp_path / "a" / "sweep.csv").read_bytes() != (tmp_path / "c" / "sweep.csv").read_bytes()

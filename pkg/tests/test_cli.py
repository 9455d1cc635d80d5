import json
import subprocess
import sys

import pytest

from hallscatter.cli import main, run


def test_scatter_twice_identical():
    argv = ["scatter", "--quiver", "a2", "--order", "5", "--seed", "7"]
    assert run(argv) == run(argv)


def test_output_envelope():
    code, text = run(["scatter", "--quiver", "kronecker", "--order", "3", "--seed", "2"])
    doc = json.loads(text)
    assert code == 0
    assert doc["seed"] == 2 and doc["schema_version"] == 1
    assert len(doc["config_hash"]) == 64 and doc["tool_version"]


def test_config_hash_tracks_seed():
    a = json.loads(run(["scatter", "--order", "3", "--seed", "1"])[1])
    b = json.loads(run(["scatter", "--order", "3", "--seed", "2"])[1])
    assert a["config_hash"] != b["config_hash"]


def test_emit_file_and_svg(tmp_path):
    out, svg = tmp_path / "d.json", tmp_path / "d.svg"
    code, text = run(["scatter", "--order", "4", "--emit", str(out), "--emit-svg", str(svg)])
    assert code == 0
    assert out.read_text() == text
    assert svg.read_text().startswith("<svg") and svg.read_text().count("<line") == 3


def test_quiver_file(tmp_path):
    path = tmp_path / "q.json"
    path.write_text('{"vertices": 2, "arrows": [[1, 2]]}')
    a = json.loads(run(["scatter", "--quiver", str(path), "--order", "3"])[1])
    b = json.loads(run(["scatter", "--quiver", "a2", "--order", "3"])[1])
    assert a["result"]["diagram"] == b["result"]["diagram"]


@pytest.mark.parametrize(
    "argv,code",
    [
        (["scatter", "--order", "0"], 2),
        (["scatter", "--quiver", "/no/such/file.json"], 2),
        (["scatter", "--primes", "2,2"], 2),
        (["scatter", "--primes", "2,4"], 2),
        (["theta", "--lambda", "1;2", "--endpoint", "0,1"], 2),
        (["tropical", "--theta", "a,b"], 2),
        (["scatter", "--bogus"], 2),
        (["verify", "--suite", "nope"], 2),
        (["scatter", "--coeff", "hall"], 3),
        (["scatter", "--quiver", "a3", "--emit-svg", "x.svg", "--order", "2"], 2),
        (["theta", "--quiver", "kronecker", "--coeff", "hall", "--lambda", "0,0;1,0", "--endpoint", "1,1"], 3),
        (["tropical", "--order", "3", "--theta", "0,0"], 3),
    ],
)
def test_exit_codes(argv, code):
    assert run(argv)[0] == code


def test_tropical_agrees():
    doc = json.loads(run(["tropical", "--order", "4", "--theta", "1/3,-1/3"])[1])
    assert doc["result"]["agree"] and doc["result"]["disks"]


def test_cps_check_command():
    doc = json.loads(run(["cps-check", "--quiver", "a3", "--order", "3", "--lambda", "0,0,0;1,-1,0", "--seed", "4"])[1])
    assert doc["result"]["holds"]


def test_counterexample_command():
    doc = json.loads(run(["counterexample", "--convention", "standard"])[1])
    assert doc["result"]["standard"]["ok"]


def test_verify_single_suite():
    code, text = run(["verify", "--suite", "hall-identities"])
    assert code == 0 and json.loads(text)["result"]["passed"]


def test_console_entry_point():
    proc = subprocess.run(
        [sys.executable, "-m", "hallscatter.cli", "scatter", "--order", "2"], capture_output=True, text=True
    )
    assert proc.returncode == 0
    assert json.loads(proc.stdout)["command"] == "scatter"


def test_main_returns_code(capsys):
    assert main(["scatter", "--order", "0"]) == 2
    assert "validation" in capsys.readouterr().err

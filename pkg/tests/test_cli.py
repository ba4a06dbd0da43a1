import json

import numpy as np
import pytest

from corrlab.boxes import CorrelationBox, pr_box, uniform_box
from corrlab.cli import main
from corrlab.hilbert import state_from_json


@pytest.fixture
def files(tmp_path):
    paths = {}
    for name, box in (("pr", pr_box()), ("uniform", uniform_box())):
        paths[name] = tmp_path / f"{name}.json"
        paths[name].write_text(box.to_json())
    t = np.zeros((2, 2, 2, 2))
    t[0, 0, 0, 0] = t[0, 1, 1, 0] = 1.0
    t[1, :, 0, 0] = 1.0
    paths["signaling"] = tmp_path / "signaling.json"
    paths["signaling"].write_text(CorrelationBox.from_table(t).to_json())
    paths["broken"] = tmp_path / "broken.json"
    paths["broken"].write_text('{"scenario": [2, 2, 2, 2], "table": [[0.5]]}')
    return paths


def run(capsys, *argv):
    code = main([str(a) for a in argv])
    out = capsys.readouterr().out
    return code, (json.loads(out) if out.strip().startswith("{") else out)


def test_box_chsh(capsys, files):
    code, out = run(capsys, "box", "chsh", files["pr"])
    assert code == 0 and out["outputs"]["K"] == 4.0


def test_box_check(capsys, files):
    assert run(capsys, "box", "check", files["pr"])[0] == 0
    code, out = run(capsys, "box", "check", files["signaling"])
    assert code == 1 and not out["outputs"]["is_no_signaling"]


@pytest.mark.parametrize("name", ["broken", "missing"])
def test_malformed_files(capsys, files, tmp_path, name):
    path = files.get(name, tmp_path / "nope.json")
    assert main(["box", "chsh", str(path)]) == 2


def test_membership(capsys, files):
    code, out = run(capsys, "polytope", "membership", files["pr"])
    assert code == 0 and out["outputs"]["status"] == "nonlocal"
    code, out = run(capsys, "polytope", "membership", files["uniform"])
    assert out["outputs"]["status"] == "local"


def test_game_table_roundtrip(capsys):
    code, out = run(capsys, "game", "table", "--p", "0.25")
    box = CorrelationBox.from_json(json.dumps(out["outputs"]))
    assert code == 0 and box.table[1, 1, 0, 0] == 0.75


def test_game_play_classical(capsys):
    code, out = run(capsys, "game", "play", "--p", "0.3333333333", "--strategy", "classical",
                    "--rounds", 1000, "--seed", 1)
    assert code == 0 and out["outputs"]["win_rate"] == 1.0 and out["outputs"]["seed"] == 1


def test_game_play_deterministic(capsys):
    argv = ["game", "play", "--p", "0.5", "--strategy", "quantum", "--rounds", 2000, "--seed", 3]
    assert run(capsys, *argv)[1] == run(capsys, *argv)[1]


@pytest.mark.parametrize("argv", [
    ["game", "play", "--p", "0.7", "--strategy", "pr", "--rounds", "10", "--seed", "0"],
    ["game", "play", "--p", "0.2", "--strategy", "pr", "--rounds", "0", "--seed", "0"],
    ["game", "play", "--p", "0.2", "--strategy", "pr", "--rounds", "10"],
    ["tomography", "--shots", "10"],
    ["decohere", "--modes", "5", "--tmax", "-1", "--seed", "0"],
    ["clone", "advantage", "--n", "0"],
])
def test_range_checks(capsys, argv):
    with pytest.raises(SystemExit) as e:
        main(argv)
    assert e.value.code == 2


def test_sweep(capsys):
    code, out = run(capsys, "game", "sweep", "--grid", "0.3", "0.45", "--family", "classical", "pr")
    rows = out["outputs"]["rows"]
    assert code == 0 and len(rows) == 4
    assert main(["game", "sweep", "--grid", "0.9"]) == 2
    assert main(["game", "sweep", "--grid", "0.3", "--rounds", "10"]) == 2


def test_quantum_optimize(capsys):
    code, out = run(capsys, "quantum", "optimize", "--objective", "min")
    assert code == 0 and out["outputs"]["K"] == pytest.approx(-2 * np.sqrt(2), abs=1e-6)
    rho, dims = state_from_json(json.dumps(out["outputs"]["state"]))
    assert dims == [2, 2] and rho.dim == 4


def test_steer_demo(capsys):
    code, out = run(capsys, "steer", "demo")
    assert code == 0 and out["outputs"]["no_signaling"]


def test_clone(capsys):
    code, out = run(capsys, "clone", "advantage", "--n", 3)
    assert [r["n"] for r in out["outputs"]["records"]] == [1, 2, 3]
    code, out = run(capsys, "clone", "pr-signal", "--seed", 0)
    assert code == 0 and out["outputs"]["accuracy"] == 1.0


def test_tomography(capsys):
    code, out = run(capsys, "tomography", "--shots", 100, "--seed", 1)
    assert code == 0 and out["outputs"]["fidelity_error"] < 0.1
    assert main(["tomography", "--shots", "10", "--seed", "0", "--bloch", "1", "1", "0"]) == 2


def test_decohere_csv(capsys):
    code, out = run(capsys, "decohere", "--modes", 50, "--branches", 2, "--tmax", 10, "--steps", 4,
                    "--seed", 0, "--csv")
    lines = out.strip().splitlines()
    assert code == 0 and lines[0] == "t,zeta_01,offdiag_norm" and len(lines) == 6


def test_decohere_json(capsys):
    code, out = run(capsys, "decohere", "--modes", 1, "--tmax", 10, "--steps", 2, "--seed", 0)
    assert code == 0
    assert all(r["zeta_01"] == pytest.approx(1.0) for r in out["outputs"]["rows"])

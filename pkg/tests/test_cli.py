import json
import subprocess
import sys

import pytest

from sensorgame.cli import main
from sensorgame.topology import build_network, generate


def _write(path, obj):
    path.write_text(json.dumps(obj))
    return str(path)


@pytest.fixture
def nets(tmp_path):
    return {
        "path": _write(tmp_path / "path.json", generate("path", 5).to_dict()),
        "dpath": _write(tmp_path / "dpath.json", generate("path", 5, 0, "directed").to_dict()),
        "star": _write(tmp_path / "star.json", generate("star", 5).to_dict()),
        "tree": _write(tmp_path / "tree.json", generate("random_tree", 9, seed=4).to_dict()),
        "cycle": _write(tmp_path / "cycle.json", build_network(4, [(0, 1), (1, 2), (2, 3), (3, 0)], "undirected", 0).to_dict()),
        "big": _write(tmp_path / "big.json", generate("path", 30).to_dict()),
    }


def _files(out):
    return {p.name: p.read_bytes() for p in sorted(out.iterdir())}


def test_kernel_all_reports_discrepancy(nets, tmp_path, capsys):
    out = tmp_path / "k"
    assert main(["kernel", "--network", nets["path"], "--method", "all", "--out", str(out)]) == 0
    line = (out / "discrepancy.txt").read_text().split()
    assert line[0] == "max_discrepancy" and float(line[1]) <= 1e-9
    assert {"kernel_numeric.csv", "kernel_lemma2.csv", "manifest.json"} <= set(_files(out))


def test_kernel_lemma2_on_cycle_is_input_error(nets, tmp_path):
    assert main(["kernel", "--network", nets["cycle"], "--method", "lemma2", "--out", str(tmp_path / "c")]) == 1


def test_kernel_lemma3_binary(nets, tmp_path):
    out = tmp_path / "d"
    assert main(["kernel", "--network", nets["dpath"], "--method", "lemma3", "--out", str(out)]) == 0
    cells = (out / "kernel_lemma3.csv").read_text().replace("\n", ",").strip(",").split(",")
    assert set(cells) == {"0", "1"}


def test_solve_ne_on_path(nets, tmp_path):
    out = tmp_path / "s"
    assert main(["solve", "--network", nets["path"], "--f", "1", "--solver", "ne", "--out", str(out)]) == 0
    rep = json.loads((out / "report.json").read_text())
    assert rep["ne_exists"] is True and rep["value"] == 1.0


def test_solve_no_ne_is_success(nets, tmp_path, capsys):
    out = tmp_path / "s"
    assert main(["solve", "--network", nets["star"], "--f", "1", "--solver", "ne", "--out", str(out)]) == 0
    rep = json.loads((out / "report.json").read_text())
    assert rep["ne_exists"] is False
    assert "no pure NE" in capsys.readouterr().out


def test_solve_tree_vs_brute(nets, tmp_path):
    vals = {}
    for solver in ("stackelberg-tree", "stackelberg-brute"):
        out = tmp_path / solver
        assert main(["solve", "--network", nets["tree"], "--f", "2", "--solver", solver, "--out", str(out)]) == 0
        rep = json.loads((out / "report.json").read_text())
        assert rep["evaluations"] > 0 and rep["certified_by"]
        vals[solver] = rep["value"]
    assert vals["stackelberg-tree"] == pytest.approx(vals["stackelberg-brute"], abs=1e-9)


def test_solve_exit_codes(nets, tmp_path):
    out = str(tmp_path / "x")
    assert main(["solve", "--network", nets["big"], "--f", "3", "--solver", "stackelberg-brute", "--out", out]) == 2
    assert main(["solve", "--network", nets["path"], "--f", "9", "--out", out]) == 1
    assert main(["solve", "--network", str(tmp_path / "missing.json"), "--f", "1", "--out", out]) == 1
    assert main(["solve", "--network", nets["path"]]) == 1  # missing --f
    assert main(["solve", "--network", nets["cycle"], "--f", "1", "--solver", "stackelberg-tree", "--out", out]) == 1


def test_reproduce_recipe(tmp_path):
    out = tmp_path / "r"
    assert main(["reproduce", "--recipe", "thm6", "--count", "10", "--seed", "3", "--out", str(out)]) == 0
    summary = json.loads((out / "summary.json").read_text())
    assert summary["passed"] == summary["total"] >= 10
    assert main(["reproduce", "--recipe", "nope", "--out", str(out)]) == 1


def test_manifest_contents(nets, tmp_path):
    out = tmp_path / "m"
    main(["solve", "--network", nets["path"], "--f", "2", "--out", str(out)])
    man = json.loads((out / "manifest.json").read_text())
    assert man["command"] == "solve"
    assert list(man["inputs"]) == [nets["path"]]
    assert man["parameters"] == {"f": 2, "solver": "stackelberg-tree"}
    assert set(man["outputs"]) == {"report.json"}
    assert "version" in man


@pytest.mark.parametrize("argv", [
    ["reproduce", "--recipe", "alg1-vs-brute", "--count", "8", "--seed", "11"],
    ["kernel", "--network", "{tree}", "--method", "all"],
    ["response", "--network", "{tree}", "--attackers", "1,2", "--detectors", "3,4"],
])
def test_byte_identical_reruns(argv, nets, tmp_path):
    argv = [a.format(tree=nets["tree"]) for a in argv]
    assert main(argv + ["--out", str(tmp_path / "a")]) == 0
    assert main(argv + ["--out", str(tmp_path / "b")]) == 0
    assert _files(tmp_path / "a") == _files(tmp_path / "b")


def test_platoon_actions(tmp_path, capsys):
    scn = _write(tmp_path / "scn.json", {"n": 6, "leader_position": 0, "mode": "undirected"})
    out = tmp_path / "g"
    assert main(["platoon", "--scenario", scn, "--f", "2", "--action", "game", "--out", str(out)]) == 0
    rep = json.loads((out / "report.json").read_text())
    assert rep["prediction"] == {"attacker": [0, 1], "detector": [3, 4], "value": rep["prediction"]["value"], "saddle": True}
    assert rep["pure_nash"]["ne_exists"] is True

    out = tmp_path / "sw"
    assert main(["platoon", "--scenario", scn, "--f", "1", "--action", "sweep", "--out", str(out)]) == 0
    rows = (out / "sweep.csv").read_text().splitlines()
    assert len(rows) == 7 and all(r.endswith(",1") for r in rows[1:])

    out = tmp_path / "sim"
    small = _write(tmp_path / "small.json", {"n": 4, "k_u": 2.0})
    args = ["platoon", "--scenario", small, "--action", "simulate", "--attackers", "1", "--detectors", "3"]
    assert main(args + ["--out", str(out)]) == 0
    check = json.loads((out / "dc_check.json").read_text())
    assert check["max_position_error"] <= 1e-3
    assert (out / "trajectory.csv").read_text().startswith("t,")


def test_platoon_interior_prediction_rejected(tmp_path):
    scn = _write(tmp_path / "scn.json", {"n": 5, "leader_position": 2})
    assert main(["platoon", "--scenario", scn, "--f", "1", "--predict", "--out", str(tmp_path / "o")]) == 1


def test_console_entry_point(tmp_path):
    proc = subprocess.run([sys.executable, "-m", "sensorgame.cli", "--version"], capture_output=True, text=True)
    assert proc.returncode == 0 and proc.stdout.strip()

import json

import pytest

from volbench.circuit import deserialize
from volbench.cli import main
from volbench.report import strip_volatile
from volbench.survey import bundled_dataset_text


def run_cli(capsys, *argv):
    code = main(list(argv))
    out = capsys.readouterr()
    return code, out.out, out.err


@pytest.mark.parametrize("scaling,estimate,initial,adjusted", [
    ("n^2", "gate-depth", 2, 3),
    ("n^3*log", "runtime", 4, 4),
    ("1", "gate-count", 1, 1),
])
def test_classify(capsys, scaling, estimate, initial, adjusted):
    code, out, _ = run_cli(capsys, "classify", "--scaling", scaling, "--estimate", estimate, "--json")
    assert code == 0
    data = json.loads(out)
    assert data["initial"] == f"QV-{initial}" and data["adjusted"] == f"QV-{adjusted}"


def test_classify_unparseable_exits_2(capsys):
    code, _, err = run_cli(capsys, "classify", "--scaling", "n^^2")
    assert code == 2 and "error" in err


def test_tables_check_passes(capsys):
    code, out, err = run_cli(capsys, "tables", "--check")
    assert code == 0
    assert "QV-1" in out and "check passed" in err


def test_tables_json(capsys):
    code, out, _ = run_cli(capsys, "tables", "--json")
    data = json.loads(out)
    assert data["adjusted"]["classes"]["QV-2"]["count"] == 18
    assert data["adjustments"]["O(n)"] == {"adjusted": 12, "kept": 4}


def test_tables_check_fails_on_altered_dataset(capsys, tmp_path):
    lines = bundled_dataset_text().splitlines()
    altered = tmp_path / "alt.csv"
    altered.write_text("\n".join(lines[:-1]) + "\n")
    code, _, err = run_cli(capsys, "tables", "--dataset", str(altered), "--check")
    assert code == 4
    assert "check failed" in err


def test_invalid_flag_exits_2(capsys):
    with pytest.raises(SystemExit) as exc:
        main(["run", "--p2", "1.5"])
    assert exc.value.code == 2
    code, _, _ = run_cli(capsys, "run", "--circuits", "1", "--out", "/dev/null")
    assert code == 2


def test_capacity_error_exits_3(capsys, tmp_path):
    code, _, err = run_cli(
        capsys, "run", "--class", "1", "--n-max", "21", "--circuits", "2", "--shots", "10",
        "--out", str(tmp_path / "r.json"),
    )
    assert code == 3 and "capacity" in err


def test_simulate_too_wide_exits_3(capsys, tmp_path):
    path = tmp_path / "wide.json"
    path.write_text(json.dumps({"width": 21, "layers": []}))
    code, _, err = run_cli(capsys, "circuit", "simulate", "--in", str(path))
    assert code == 3


def test_run_writes_report_and_replays(capsys, tmp_path):
    first = tmp_path / "a.json"
    code, out, _ = run_cli(
        capsys, "run", "--class", "1,2", "--n-max", "4", "--circuits", "4", "--shots", "100",
        "--p2", "0.03", "--p-readout", "0.01", "--seed", "7", "--out", str(first),
    )
    assert code == 0 and "QV-1 =" in out
    report = json.loads(first.read_text())
    assert report["config"]["seed"] == 7
    assert "rng_algorithm" in report["config"]
    assert [s["k"] for s in report["scores"]] == [1, 2]
    second = tmp_path / "b.json"
    code, _, _ = run_cli(capsys, "run", "--config", str(first), "--jobs", "2", "--out", str(second))
    assert code == 0
    assert strip_volatile(json.loads(second.read_text())) == strip_volatile(report)


def test_seed_environment_fallback(capsys, tmp_path, monkeypatch):
    monkeypatch.setenv("VOLBENCH_SEED", "99")
    out = tmp_path / "r.json"
    code, _, _ = run_cli(capsys, "run", "--class", "1", "--n-max", "2", "--circuits", "2", "--shots", "10", "--out", str(out))
    assert code == 0
    assert json.loads(out.read_text())["config"]["seed"] == 99


def test_flags_override_config_file(capsys, tmp_path):
    cfg = tmp_path / "cfg.json"
    cfg.write_text(json.dumps({"circuits": 3, "shots": 50, "seed": 4, "classes": [1], "n_max": 2}))
    out = tmp_path / "r.json"
    code, _, _ = run_cli(capsys, "run", "--config", str(cfg), "--shots", "20", "--out", str(out))
    assert code == 0
    config = json.loads(out.read_text())["config"]
    assert config["shots"] == 20 and config["circuits"] == 3 and config["seed"] == 4


def test_circuit_gen_and_simulate(capsys, tmp_path):
    path = tmp_path / "c.json"
    code, _, _ = run_cli(capsys, "circuit", "gen", "--n", "3", "--depth", "3", "--seed", "5", "--out", str(path))
    assert code == 0
    circuit = deserialize(path.read_text())
    assert circuit.width == 3 and circuit.depth() == 3
    code, out, _ = run_cli(capsys, "circuit", "simulate", "--in", str(path))
    probs = json.loads(out)["probabilities"]
    assert len(probs) == 8 and abs(sum(probs) - 1) < 1e-9
    code, out, _ = run_cli(
        capsys, "circuit", "simulate", "--in", str(path), "--shots", "300", "--p2", "0.1", "--seed", "1"
    )
    counts = json.loads(out)
    assert counts["shots"] == 300 and sum(counts["counts"].values()) == 300
    assert all(len(b) == 3 for b in counts["counts"])


def test_simulate_bad_circuit_file_exits_2(capsys, tmp_path):
    path = tmp_path / "bad.json"
    path.write_text('{"width": 2, "layers": [{"perm": [0, 0], "gates": []}]}')
    code, _, err = run_cli(capsys, "circuit", "simulate", "--in", str(path))
    assert code == 2

import json
import re
import subprocess
import sys

import pytest

from ra_isac.channel import ScenarioDistribution
from ra_isac.cli import build_parser, main
from ra_isac.config import ExperimentConfig, config_to_dict

FLAGS = ["--config", "--seed", "--output", "--grid-points", "--omega1", "--workers", "--mc-runs"]


@pytest.fixture
def small_config(tmp_path):
    cfg = ExperimentConfig(
        distribution=ScenarioDistribution(num_tx=4, num_rx=4, num_users=2, num_nlos_paths=1),
        monte_carlo_runs=2,
        grid_points=5,
        pattern_points=31,
    )
    path = tmp_path / "small.json"
    path.write_text(json.dumps(config_to_dict(cfg)))
    return str(path)


def run(argv, capsys):
    code = main(argv)
    out, err = capsys.readouterr()
    return code, out, err


def strip_wall(line):
    return re.sub(r" wall=\S+", "", line)


def test_help_lists_every_flag(capsys):
    with pytest.raises(SystemExit):
        build_parser().parse_args(["solve", "--help"])
    text = capsys.readouterr().out
    for flag in FLAGS:
        assert flag in text


def test_module_entry_point():
    out = subprocess.run([sys.executable, "-m", "ra_isac", "--help"], capture_output=True, text=True)
    assert out.returncode == 0
    for command in ("solve", "rotation-search", "tradeoff", "beampattern", "montecarlo", "validate-config"):
        assert command in out.stdout


def test_validate_default_config(capsys):
    code, out, _ = run(["validate-config"], capsys)
    assert code == 0
    doc = json.loads(out)
    assert doc["distribution"]["num_users"] == 4 and doc["grid_points"] == 361


def test_validate_applies_overrides(capsys):
    code, out, _ = run(["validate-config", "--seed", "9", "--grid-points", "21", "--omega1", "0.25"], capsys)
    doc = json.loads(out)
    assert code == 0 and doc["seed"] == 9 and doc["grid_points"] == 21
    assert doc["weight_grid"] == [{"comm_weight": 0.25, "sense_weight": 0.75}]


def test_malformed_config_reports_field_path(tmp_path, capsys):
    path = tmp_path / "bad.json"
    path.write_text(json.dumps({"distribution": {"num_userz": 3}}))
    code, _, err = run(["validate-config", "--config", str(path)], capsys)
    assert code != 0
    assert "config.distribution.num_userz" in err


def test_bad_override_and_missing_file(tmp_path, capsys):
    code, _, err = run(["validate-config", "--omega1", "1.5"], capsys)
    assert code != 0 and "--omega1" in err
    code, _, err = run(["validate-config", "--grid-points", "1"], capsys)
    assert code != 0 and "--grid-points" in err
    code, _, _ = run(["validate-config", "--config", str(tmp_path / "missing.json")], capsys)
    assert code != 0


def test_solve_is_repeatable(small_config, tmp_path, capsys):
    lines, blobs = [], []
    out_path = tmp_path / "nested" / "dir" / "solve.json"
    for _ in range(2):
        code, out, _ = run(["solve", "--config", small_config, "--omega1", "1.0", "--seed", "7",
                            "--output", str(out_path)], capsys)
        assert code == 0
        lines.append(strip_wall(out.strip()))
        blobs.append(out_path.read_bytes())
    assert lines[0] == lines[1]
    assert re.fullmatch(r"solve: objective=\S+ phi\*=\S+", lines[0])
    assert blobs[0] == blobs[1]
    doc = json.loads(blobs[0])
    assert doc["config"]["seed"] == 7
    assert doc["result"]["comm_weight"] == 1.0


def test_tradeoff_row_count(small_config, tmp_path, capsys):
    out_path = tmp_path / "t" / "tradeoff.csv"
    code, out, _ = run(["tradeoff", "--config", small_config, "--mc-runs", "1", "--output", str(out_path)], capsys)
    assert code == 0 and out.startswith("tradeoff:")
    lines = out_path.read_text().splitlines()
    assert len(lines) == 1 + 3 * 11
    sidecar = json.loads(out_path.with_suffix(".json").read_text())
    assert sidecar["config"]["monte_carlo_runs"] == 1
    assert sidecar["config"]["output_path"] == str(out_path)


@pytest.mark.parametrize("command", ["tradeoff", "montecarlo"])
def test_outputs_do_not_depend_on_workers(command, small_config, tmp_path, capsys):
    blobs = []
    out_path = tmp_path / "out" / f"{command}.csv"
    for workers in ("1", "2", "2"):
        code, _, _ = run([command, "--config", small_config, "--omega1", "0.5", "--workers", workers,
                          "--output", str(out_path)], capsys)
        assert code == 0
        files = sorted(p for p in out_path.parent.iterdir() if p.stem == out_path.stem)
        blobs.append([p.read_bytes() for p in files])
    assert blobs[0] == blobs[1] == blobs[2]


def test_rotation_search_and_beampattern_outputs(small_config, tmp_path, capsys):
    profile = tmp_path / "rs" / "profile.csv"
    code, _, _ = run(["rotation-search", "--config", small_config, "--output", str(profile)], capsys)
    assert code == 0
    assert len(profile.read_text().splitlines()) == 1 + 5
    assert profile.with_suffix(".json").exists()
    pattern = tmp_path / "bp" / "pattern.csv"
    code, out, _ = run(["beampattern", "--config", small_config, "--output", str(pattern)], capsys)
    assert code == 0 and out.startswith("beampattern:")
    assert len(pattern.read_text().splitlines()) == 1 + 31


def test_log_level_env(monkeypatch, capsys):
    monkeypatch.setenv("RA_ISAC_LOG", "debug")
    assert run(["validate-config"], capsys)[0] == 0
    monkeypatch.setenv("RA_ISAC_LOG", "loud")
    assert run(["validate-config"], capsys)[0] == 0

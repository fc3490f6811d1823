import json

from cmspectra.cli import main


def test_gap_cli_writes_reports(tmp_path, capsys):
    cfg = tmp_path / "gap.json"
    cfg.write_text(json.dumps({
        "experiment": "gap",
        "family": {"kind": "regular", "d": 3},
        "n": 40,
        "replicates": 2,
        "seed": 4,
    }))
    code = main(["gap", "--config", str(cfg), "--out", str(tmp_path / "out")])
    assert code == 0
    out = capsys.readouterr().out
    summary = json.loads(out)
    assert summary["gap"]["prediction"] == 1.0
    assert (tmp_path / "out" / "gap_replicates.csv").exists()
    assert (tmp_path / "out" / "gap_summary.json").exists()


def test_cli_flag_overrides(tmp_path, capsys):
    code = main([
        "gap", "--family", '{"kind": "regular", "d": 3}', "--n", "40",
        "--replicates", "2", "--seed", "4",
    ])
    assert code == 0
    assert json.loads(capsys.readouterr().out)["config"]["n"] == 40


def test_cli_config_error_exit_2(tmp_path):
    cfg = tmp_path / "bad.json"
    cfg.write_text(json.dumps({"experiment": "gap", "bogus": 1}))
    assert main(["gap", "--config", str(cfg)]) == 2
    assert main(["gap", "--family", "not json"]) == 2


def test_cli_sampling_error_exit_3():
    code = main([
        "gap", "--family", '{"kind": "explicit", "degrees": [3, 3, 1, 1]}',
        "--replicates", "1",
    ])
    assert code == 3


def test_cli_solver_error_exit_4(tmp_path):
    cfg = tmp_path / "tight.json"
    cfg.write_text(json.dumps({
        "experiment": "gap",
        "family": {"kind": "regular", "d": 3},
        "n": 40,
        "replicates": 1,
        "seed": 4,
        "max_iter": 1,
    }))
    assert main(["gap", "--config", str(cfg)]) == 4


def test_oracle_subcommand(tmp_path, capsys):
    assert main(["oracle", "--degrees", "2,2,2"]) == 0
    law = json.loads(capsys.readouterr().out)
    assert law["p_simple"]["num"] == 8 and law["p_simple"]["den"] == 15

    out = tmp_path / "law.json"
    assert main(["oracle", "--degrees", "2,2,2,2", "--out", str(out)]) == 0
    assert json.loads(out.read_text())["simple_count"] == 48


def test_oracle_bad_degrees():
    assert main(["oracle", "--degrees", "2,x"]) == 2


def test_validate_single_fast_criterion(capsys):
    assert main(["validate", "--criterion", "1", "--workers", "1"]) == 0
    out = capsys.readouterr().out
    assert "ACCEPTANCE 1" in out and "PASS" in out


def test_validate_rejects_unknown_criterion():
    assert main(["validate", "--criterion", "99"]) == 2


def test_esd_cli(tmp_path, capsys):
    code = main([
        "esd", "--family", '{"kind": "regular", "d": 3}', "--n", "60",
        "--replicates", "1", "--seed", "2", "--out", str(tmp_path),
    ])
    assert code == 0
    assert (tmp_path / "esd_histogram.csv").exists()


def test_sweep_cli(capsys):
    code = main([
        "sweep", "--n-grid", "120,240", "--replicates", "2", "--seed", "3",
        "--exponent", "0.3",
    ])
    assert code == 0
    summary = json.loads(capsys.readouterr().out)
    assert set(summary["per_n"]) == {"120", "240"}

import json

import pytest

from bitbudget.cli import main


def _json(capsys):
    return json.loads(capsys.readouterr().out)


def test_regimes(capsys):
    assert main(["regimes", "--m", "1024", "--n", "16", "--l", "8", "--r", "0.8"]) == 0
    out = _json(capsys)
    assert out["case"] in range(1, 6) and out["K"] == 2 ** out["H"]


def test_simulate_smoke(capsys, tmp_path):
    target = tmp_path / "sim.json"
    assert main(["simulate", "--m", "1", "--n", "1", "--l", "4", "--trials", "2", "--out", str(target)]) == 0
    out = _json(capsys)
    assert out["transcript_bits"] == 4 and out["mean_mse"] >= 0
    assert json.loads(target.read_text()) == out


def test_simulate_is_seeded(capsys):
    argv = ["simulate", "--m", "32", "--n", "4", "--l", "8", "--trials", "3", "--seed", "4"]
    main(argv)
    a = _json(capsys)
    main(argv)
    assert _json(capsys) == a


def test_bad_input_exit_code(capsys):
    assert main(["simulate", "--m", "16", "--n", "4", "--l", "2", "--trials", "2"]) == 2
    assert "error" in capsys.readouterr().err


def test_balls_bins(capsys):
    assert main(["balls-bins", "--n", "64", "--k", "16", "--trials", "2000"]) == 0
    assert "pass" in capsys.readouterr().out


def test_inner_bench(capsys):
    assert main(["inner-bench", "--trials", "20"]) == 0
    assert _json(capsys)["mse"] > 0


def test_verify_assumptions(capsys):
    rc = main(["verify-assumptions", "--model", "binary", "--samples", "20000", "--seed", "1"])
    assert rc == 0 and "binary" in capsys.readouterr().out


def test_sweep_and_plot(capsys, tmp_path):
    cfg = tmp_path / "e.ini"
    cfg.write_text("[experiment]\nmodel = density\nr = 0.8\nm = 4, 8, 16, 32\nn = 4\nl = 8\ntrials = 3\n")
    csv_path = tmp_path / "s.csv"
    assert main(["sweep", str(cfg), "--out", str(csv_path), "--threads", "1"]) == 0
    assert "4 rows" in capsys.readouterr().out
    svg = tmp_path / "s.svg"
    assert main(["plot", str(csv_path), "--out", str(svg)]) == 0
    assert svg.read_text().lstrip().startswith("<?xml")


def test_missing_config(capsys, tmp_path):
    assert main(["sweep", str(tmp_path / "nope.ini")]) == 2


def test_unknown_command():
    with pytest.raises(SystemExit):
        main(["frobnicate"])

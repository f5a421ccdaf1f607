import csv
import json
import subprocess
import sys

import pytest

from fraclob.cli import ConfigError, RunConfig, main


def rows(path):
    with open(path, newline="") as fh:
        return list(csv.reader(fh))


def test_defaults_match_table():
    c = RunConfig()
    assert (c.L, c.M, c.D_alpha, c.nu, c.r, c.p0, c.kappa, c.mu) == (200, 400, 0.5, 0.5, 0.5, 1300, 1.0, 0.1)
    assert c.dx == 0.5
    assert c.gamma1 == c.gamma2 == 8


def test_config_text_round_trip():
    c = RunConfig(alpha=0.8, seeds=[1, 2, 3], scheme="nonuniform")
    back = RunConfig.from_text(c.to_text())
    assert back == c
    assert back.to_text() == c.to_text()


def test_config_parse_errors():
    with pytest.raises(ConfigError, match="line 1"):
        RunConfig.from_text("alpha 0.8\n")
    with pytest.raises(ConfigError, match="unknown key"):
        RunConfig.from_text("colour = red\n")
    with pytest.raises(ConfigError, match="alpha"):
        RunConfig.from_text("alpha = abc\n")
    with pytest.raises(ConfigError, match="rho"):
        RunConfig(rho=1.2).validate()


def test_kernel_stdout(capsys):
    assert main(["kernel", "--alpha", "1.0"]) == 0
    out = capsys.readouterr().out.strip().splitlines()
    assert out == ["j,K_j", "1,1.0"]


def test_kernel_file(tmp_path):
    assert main(["kernel", "--alpha", "0.8", "--out", str(tmp_path)]) == 0
    r = rows(tmp_path / "kernel_alpha0.8.csv")
    assert r[1] == ["1", "0.8"]
    assert json.loads((tmp_path / "manifest.json").read_text())["experiment"] == "kernel"


def test_simulate_defaults(tmp_path):
    assert main(["simulate", "--alpha", "1.0", "--out", str(tmp_path)]) == 0
    seed = RunConfig().seeds[0]
    r = rows(tmp_path / f"midprice_alpha1_seed{seed}.csv")
    assert r[0] == ["ell", "t", "p"]
    assert len(r) - 1 == 100
    assert float(r[1][2]) == pytest.approx(1300.0)
    man = json.loads((tmp_path / "manifest.json").read_text())
    assert man["seeds"] == [seed]
    assert "config.txt" in man["files"]
    assert RunConfig.from_text((tmp_path / "config.txt").read_text()).events == 100


def test_simulate_replay_and_frames(tmp_path):
    a, b = tmp_path / "a", tmp_path / "b"
    assert main(["simulate", "--out", str(a), "--events", "30", "--seed", "5", "--frames", "10"]) == 0
    pot = a / "potential_alpha1_seed5.csv"
    assert main(["simulate", "--out", str(b), "--events", "30", "--seed", "99",
                 "--potential", str(pot)]) == 0
    pa = [r[2] for r in rows(a / "midprice_alpha1_seed5.csv")]
    pb = [r[2] for r in rows(b / "midprice_alpha1_seed99.csv")]
    assert pa == pb
    assert len(list((a / "frames_alpha1_seed5").iterdir())) == 2


def test_variance_alpha08_dx02(tmp_path):
    assert main(["variance", "--alpha", "0.8", "--dx", "0.2", "--out", str(tmp_path)]) == 0
    fit = json.loads((tmp_path / "variance_fit.json").read_text())["rows"][0]
    assert fit["dx"] == pytest.approx(0.2)
    assert abs(fit["alpha_hat"] - 0.8) <= 0.01
    assert abs(fit["sigma0_hat"] - fit["sigma0_theory"]) <= 0.05


def test_impact_small(tmp_path):
    args = ["impact", "--out", str(tmp_path), "--set", "q_points=8", "--set", "delays=1,2"]
    assert main(args) == 0
    r = rows(tmp_path / "impact_market_alpha1.csv")
    assert r[0] == ["delay", "Q", "dP_mean", "dP_std"]
    assert len(r) - 1 == 16
    fits = json.loads((tmp_path / "impact_fit_market_alpha1.json").read_text())
    assert [f["delay"] for f in fits["fits"]] == [1, 2]
    assert fits["fits"][0]["power"]["b"] > 0


def test_facts_small(tmp_path):
    args = ["facts", "--out", str(tmp_path), "--events", "1000", "--set", "q_points=12"]
    for s in (1, 2, 3, 4):
        args += ["--seed", str(s)]
    assert main(args) == 0
    doc = json.loads((tmp_path / "facts_alpha1.json").read_text())
    assert len(doc["sessions"]) == 4
    assert doc["volume"]["n_hours"] == 32
    assert rows(tmp_path / "acf_alpha1_seed1.csv")[0] == ["lag", "signs", "returns", "abs_returns"]
    for stem in ("hist", "qq", "mean_excess", "midprice"):
        assert (tmp_path / f"{stem}_alpha1_seed1.csv").exists()


def test_complexity(tmp_path):
    assert main(["complexity", "--out", str(tmp_path)]) == 0
    r = rows(tmp_path / "complexity.csv")
    assert r[0] == ["alpha", "dx", "steps", "steps_full_memory"]
    assert len(r) - 1 == 5 * 3


def test_invalid_config_exit(tmp_path, capsys):
    assert main(["simulate", "--rho", "1.5", "--out", str(tmp_path)]) == 2
    assert "rho" in capsys.readouterr().err
    assert main(["simulate", "--alpha", "1.4", "--out", str(tmp_path)]) == 2
    assert main(["simulate", "--dx", "0.3", "--out", str(tmp_path)]) == 2


def test_experiment_error_exit(tmp_path, capsys):
    assert main(["simulate", "--potential", str(tmp_path / "missing.csv"), "--out", str(tmp_path)]) == 1
    assert "fraclob simulate" in capsys.readouterr().err


def test_config_file(tmp_path):
    cfg = tmp_path / "run.txt"
    cfg.write_text(RunConfig(events=12, out=str(tmp_path / "o"), seeds=[7]).to_text())
    assert main(["simulate", "--config", str(cfg)]) == 0
    assert len(rows(tmp_path / "o" / "midprice_alpha1_seed7.csv")) == 13


def test_module_entry_point():
    res = subprocess.run([sys.executable, "-m", "fraclob.cli", "kernel", "--alpha", "1"],
                         capture_output=True, text=True, check=True)
    assert res.stdout.splitlines() == ["j,K_j", "1,1.0"]

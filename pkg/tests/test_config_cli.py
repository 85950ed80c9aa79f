import json
import subprocess
import sys

import pytest

from sublin.cli import main
from sublin.config import ConfigError, loads, parse_config, parse_policy_spec

COIN = {"kind": "discrete", "values": [-1, 1], "probs": [0.5, 0.5]}
NORMAL = {"kind": "normal", "mean": 0, "sd": 1}


class TestParseConfig:
    def test_minimal_defaults(self):
        cfg = parse_config({"subcommand": "choquet", "dist": NORMAL})
        assert cfg.params == {"tol": 1e-8, "t_cap": 1e6, "r": None}
        assert cfg.threads == 1 and cfg.seed == 20240917
        assert cfg.tolerances["choquet_rtol"] == 1e-6

    def test_bound_precondition(self):
        with pytest.raises(ConfigError, match="p > 2∨r"):
            parse_config({"subcommand": "bound", "dist": NORMAL, "params": {"p": 2, "r": 1}})
        with pytest.raises(ConfigError, match="p > 2∨r"):
            parse_config({"subcommand": "bound", "dist": NORMAL, "params": {"p": 3, "r": 3}})

    def test_duplicate_key(self):
        with pytest.raises(ConfigError, match="duplicate"):
            loads('{"subcommand": "dp", "subcommand": "dp"}')

    def test_unknown_keys(self):
        with pytest.raises(ConfigError, match="colour"):
            parse_config({"subcommand": "dp", "dist": COIN, "colour": 1})
        with pytest.raises(ConfigError, match="params.bogus"):
            parse_config({"subcommand": "dp", "dist": COIN, "params": {"bogus": 1}})
        with pytest.raises(ConfigError, match="tolerances.nope"):
            parse_config({"subcommand": "verify", "tolerances": {"nope": 1}})

    def test_field_paths_in_errors(self):
        with pytest.raises(ConfigError) as err:
            parse_config({"subcommand": "simulate", "dist": COIN, "params": {"policies": ["constant:0", "zigzag"]}})
        assert err.value.path == "params.policies[1]"
        with pytest.raises(ConfigError) as err:
            parse_config({"subcommand": "dp", "dist": {"kind": "normal", "sigma": 1}})
        assert err.value.path == "dist"

    def test_type_checks(self):
        with pytest.raises(ConfigError):
            parse_config({"subcommand": "dp", "dist": COIN, "params": {"N": 2.5}})
        with pytest.raises(ConfigError):
            parse_config({"subcommand": "dp", "dist": COIN, "seed": -1})
        with pytest.raises(ConfigError):
            parse_config({"subcommand": "dp", "dist": COIN, "threads": 0})
        with pytest.raises(ConfigError):
            parse_config({"subcommand": "dp"})
        with pytest.raises(ConfigError):
            parse_config({"subcommand": "verify", "params": {"suite": "huge"}})

    def test_unknown_subcommand(self):
        with pytest.raises(ConfigError):
            parse_config({"subcommand": "plot"})

    def test_hash_ignores_threads_and_out(self):
        a = parse_config({"subcommand": "dp", "dist": COIN, "threads": 1})
        b = parse_config({"subcommand": "dp", "dist": COIN, "threads": 8, "out": "/tmp/x"})
        c = parse_config({"subcommand": "dp", "dist": COIN, "seed": 5})
        assert a.content_hash() == b.content_hash() != c.content_hash()

    def test_overrides_merge(self):
        cfg = parse_config({"subcommand": "dp", "dist": COIN, "params": {"N": 3}},
                           {"params": {"r": 2.0}, "seed": 9})
        assert cfg.params["N"] == 3 and cfg.params["r"] == 2.0 and cfg.seed == 9

    def test_policy_specs(self):
        assert parse_policy_spec("cyclic:0,1,1") == ("cyclic", [0, 1, 1])
        assert parse_policy_spec("mean-seeking") == ("mean-seeking", [])
        for bad in ("constant", "constant:0,1", "cyclic:-1", "greedy"):
            with pytest.raises(ValueError):
                parse_policy_spec(bad)


class TestCli:
    def test_dp_prints_value(self, capsys):
        assert main(["dp", "--dist", json.dumps(COIN), "--param", "N=2"]) == 0
        assert "0.426777" in capsys.readouterr().out

    def test_unknown_subcommand_exit_1(self, capsys):
        assert main(["frobnicate"]) == 1

    def test_bad_flag_exit_1(self):
        with pytest.raises(SystemExit) as exc:
            main(["dp", "--no-such-flag"])
        assert exc.value.code == 1

    def test_bound_rejected_exit_1(self, capsys):
        assert main(["bound", "--dist", json.dumps(NORMAL), "--param", "p=2", "--param", "r=1"]) == 1
        assert "p > 2∨r" in capsys.readouterr().err

    def test_bound_prints_block_table(self, capsys):
        assert main(["bound", "--dist", json.dumps(NORMAL), "--param", "K_max=4"]) == 0
        out = capsys.readouterr().out
        assert out.splitlines()[0].split() == ["k", "n_k", "g1_k", "g2_k", "g3_k"]

    def test_module_error_reported(self, tmp_path, capsys):
        code = main(["dp", "--dist", json.dumps(NORMAL), "--out", str(tmp_path)])
        assert code == 1
        rep = json.loads((tmp_path / "report.json").read_text())
        assert rep["error"].startswith("TypeError") and rep["exit_code"] == 1

    def test_report_is_self_describing(self, tmp_path, capsys):
        out1 = tmp_path / "a"
        out2 = tmp_path / "b"
        args = ["simulate", "--dist", json.dumps(COIN), "--param", "N=16", "--param", "replications=64",
                "--param", 'policies=["constant:0", "mean-seeking"]', "--seed", "3"]
        assert main(args + ["--out", str(out1), "--threads", "1"]) == 0
        rep1 = json.loads((out1 / "report.json").read_text())
        assert rep1["schema_version"] == 1 and len(rep1["config_hash"]) == 64
        assert main(["--config", str(out1 / "report.json"), "--out", str(out2), "--threads", "4"]) == 0
        rep2 = json.loads((out2 / "report.json").read_text())
        assert rep2["config_hash"] == rep1["config_hash"]
        assert rep2["results"] == rep1["results"]
        assert (out1 / "survival.csv").read_text() == (out2 / "survival.csv").read_text()

    def test_config_file_with_flags(self, tmp_path, capsys):
        path = tmp_path / "cfg.json"
        path.write_text(json.dumps({"subcommand": "functionals", "dist": NORMAL, "params": {"r": 3}}))
        assert main(["--config", str(path), "--json"]) == 0
        rep = json.loads(capsys.readouterr().out)
        assert rep["results"]["sigma_bar_sq"] == pytest.approx(1.0)

    def test_series_csv(self, tmp_path, capsys):
        dist = {"kind": "pareto", "alpha": 3, "sign": "symmetric"}
        assert main(["series", "--dist", json.dumps(dist), "--param", "N=256", "--param", 'which="truncated"',
                     "--out", str(tmp_path)]) == 0
        lines = (tmp_path / "series_truncated_moment.csv").read_text().splitlines()
        assert lines[0] == "n,term,partial_sum" and len(lines) == 10

    def test_probe_and_ma_lil(self, tmp_path, capsys):
        assert main(["probe", "--dist", json.dumps(NORMAL), "--param", "k_min=4", "--param", "k_max=7",
                     "--param", "replications=20"]) == 0
        assert "verdict:" in capsys.readouterr().out
        assert main(["ma-lil", "--dist", json.dumps(NORMAL), "--param", "N=1024", "--param", "seeds=3",
                     "--param", 'coefficients={"kind":"finite","beta":{"0":0.5,"1":0.5}}',
                     "--out", str(tmp_path)]) == 0
        rows = (tmp_path / "ma_summary.csv").read_text().splitlines()
        assert rows[0] == "seed,max_over_window,residual,target" and len(rows) == 4

    def test_verify_subset_and_exit_codes(self, capsys):
        assert main(["verify", "--check", "choquet_exactness", "--check", "dp_oracle"]) == 0
        out = capsys.readouterr().out
        assert "[PASS]  1 choquet_exactness" in out
        # an impossible tolerance makes the suite fail with exit code 2
        assert main(["verify", "--check", "ma_residual", "--tolerance", "residual_max=0"]) == 2

    def test_entry_point_runs_as_module(self):
        proc = subprocess.run([sys.executable, "-m", "sublin.cli", "dp", "--dist", json.dumps(COIN)],
                              capture_output=True, text=True)
        assert proc.returncode == 0 and "0.426777" in proc.stdout
        proc = subprocess.run([sys.executable, "-m", "sublin.cli", "nope"], capture_output=True, text=True)
        assert proc.returncode == 1

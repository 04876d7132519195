import json

import pytest

from stochlyap.cli import (
    EXIT_CONFIG,
    EXIT_OK,
    OUTDIR_ENV,
    RunConfig,
    main,
)
from stochlyap.models import Convention, NoiseKind

SMALL = [
    "--spin-up-steps", "200",
    "--nle-steps", "500",
    "--sample-every", "50",
]


def run(args, capsys):
    code = main(args)
    captured = capsys.readouterr()
    return code, captured.out, captured.err


class TestRunConfig:
    def test_defaults_match_reference_protocol(self):
        cfg = RunConfig()
        assert cfg.dt == 0.001
        assert cfg.spin_up_steps == 50_000
        assert cfg.nle_steps == 100_000
        assert cfg.eta == 0.8
        assert cfg.scheme == "euler-maruyama"

    def test_validation(self):
        with pytest.raises(ValueError):
            RunConfig(system="unknown").validate()
        with pytest.raises(ValueError):
            RunConfig(eta=1.2).validate()
        with pytest.raises(ValueError):
            RunConfig(dt=-1.0).validate()

    def test_system_def_kinds(self):
        assert RunConfig(system="deterministic").system_def().kind is NoiseKind.NONE
        assert RunConfig(system="salt").system_def().kind is NoiseKind.SALT
        assert RunConfig(system="fd").system_def().kind is NoiseKind.FD

    def test_deterministic_forces_zero_beta(self):
        assert RunConfig(system="deterministic", beta=0.7).system_def().beta == 0.0

    def test_strict_mode_converts_to_stratonovich(self):
        cfg = RunConfig(system="fd", convention_mode="stratonovich-strict")
        assert cfg.system_def().convention is Convention.STRATONOVICH

    def test_hash_changes_with_config(self):
        assert RunConfig().config_hash() != RunConfig(seed=2).config_hash()
        assert len(RunConfig().config_hash()) == 12


class TestConfigResolution:
    def test_print_config(self, capsys):
        code, out, _ = run(["nle", "--print-config", "--seed", "9"], capsys)
        assert code == EXIT_OK
        assert "seed = 9" in out
        assert "config_hash = " in out

    def test_file_then_flag_precedence(self, tmp_path, capsys):
        cfgfile = tmp_path / "run.cfg"
        cfgfile.write_text("seed = 5\neta = 0.6  # inline comment\n")
        code, out, _ = run(
            ["nle", "--config", str(cfgfile), "--seed", "11", "--print-config"],
            capsys,
        )
        assert code == EXIT_OK
        assert "seed = 11" in out  # flag wins
        assert "eta = 0.6" in out  # file value survives

    def test_unknown_key_rejected(self, tmp_path, capsys):
        cfgfile = tmp_path / "run.cfg"
        cfgfile.write_text("bogus = 1\n")
        code, _, err = run(["nle", "--config", str(cfgfile)], capsys)
        assert code == EXIT_CONFIG
        assert "bogus" in err

    def test_malformed_line_rejected(self, tmp_path, capsys):
        cfgfile = tmp_path / "run.cfg"
        cfgfile.write_text("just words\n")
        code, _, _ = run(["nle", "--config", str(cfgfile)], capsys)
        assert code == EXIT_CONFIG

    def test_invalid_value_exit_code(self, capsys):
        code, _, err = run(["nle", "--eta", "1.5"], capsys)
        assert code == EXIT_CONFIG
        assert "eta" in err

    def test_outdir_env_fallback(self, tmp_path, capsys, monkeypatch):
        monkeypatch.setenv(OUTDIR_ENV, str(tmp_path / "envout"))
        code, _, _ = run(["simulate", "--system", "deterministic"] + SMALL, capsys)
        assert code == EXIT_OK
        assert (tmp_path / "envout" / "trajectory.csv").exists()

    def test_outdir_flag_beats_env(self, tmp_path, capsys, monkeypatch):
        monkeypatch.setenv(OUTDIR_ENV, str(tmp_path / "envout"))
        code, _, _ = run(
            ["simulate", "--outdir", str(tmp_path / "flagout")] + SMALL, capsys
        )
        assert code == EXIT_OK
        assert (tmp_path / "flagout" / "trajectory.csv").exists()
        assert not (tmp_path / "envout").exists()


class TestSimulate:
    def test_writes_header_and_rows(self, tmp_path, capsys):
        out = tmp_path / "traj.csv"
        code, stdout, _ = run(
            ["simulate", "--system", "fd", "--output", str(out)] + SMALL, capsys
        )
        assert code == EXIT_OK
        lines = out.read_text().splitlines()
        assert lines[0].startswith("# config-hash = ")
        assert lines[1].startswith("# generator-id = np-philox4x64")
        assert lines[2] == "t,x,y,z"
        assert len(lines) == 3 + 500 + 1  # header + initial state + steps

    def test_bit_identical_reruns(self, tmp_path, capsys):
        a, b = tmp_path / "a.csv", tmp_path / "b.csv"
        run(["simulate", "--system", "salt", "--output", str(a)] + SMALL, capsys)
        run(["simulate", "--system", "salt", "--output", str(b)] + SMALL, capsys)
        assert a.read_bytes() == b.read_bytes()

    def test_noise_kinds_differ(self, tmp_path, capsys):
        a, b = tmp_path / "salt.csv", tmp_path / "fd.csv"
        run(["simulate", "--system", "salt", "--output", str(a)] + SMALL, capsys)
        run(["simulate", "--system", "fd", "--output", str(b)] + SMALL, capsys)
        assert a.read_text().splitlines()[3:] != b.read_text().splitlines()[3:]


class TestNle:
    def test_json_summary_keys(self, tmp_path, capsys):
        conv = tmp_path / "conv.csv"
        summ = tmp_path / "summary.json"
        code, stdout, _ = run(
            ["nle", "--system", "salt", "--output", str(conv),
             "--json-output", str(summ)] + SMALL,
            capsys,
        )
        assert code == EXIT_OK
        data = json.loads(summ.read_text())
        for key in ("lambdas", "sum", "trace_residual", "restarts",
                    "w_T_over_T", "theoretical_sum", "t_final",
                    "generator_id", "config_hash"):
            assert key in data
        assert len(data["lambdas"]) == 3
        assert data["sum"] == pytest.approx(-(10 + 1 + 8 / 3), abs=1e-9)
        assert "sum = " in stdout

    def test_convergence_csv_shape(self, tmp_path, capsys):
        conv = tmp_path / "conv.csv"
        run(["nle", "--output", str(conv),
             "--json-output", str(tmp_path / "s.json")] + SMALL, capsys)
        lines = conv.read_text().splitlines()
        assert lines[2] == "t,lambda1,lambda2,lambda3,sum"
        assert len(lines) == 3 + 10  # 500 steps sampled every 50


class TestSweep:
    def test_csv_format_and_regression_line(self, tmp_path, capsys):
        out = tmp_path / "sweep.csv"
        code, stdout, _ = run(
            ["sweep", "--count", "5", "--mode", "fixed", "--jobs", "1",
             "--output", str(out)] + SMALL,
            capsys,
        )
        assert code == EXIT_OK
        lines = out.read_text().splitlines()
        assert lines[2] == "beta,seed,sum_salt,sum_fd,w_T_over_T,theory_fd_sum"
        assert len(lines) == 3 + 5
        assert "fd-sum regression" in stdout


class TestReproduce:
    def test_table2_overrides_parameters(self, tmp_path, capsys):
        code, stdout, _ = run(
            ["reproduce", "table2", "--output", str(tmp_path / "c.csv"),
             "--json-output", str(tmp_path / "s.json")] + SMALL,
            capsys,
        )
        assert code == EXIT_OK
        data = json.loads((tmp_path / "s.json").read_text())
        # sigma=16, r=45.92, b=4 gives the trace -(16 + 1 + 4)
        assert data["sum"] == pytest.approx(-21.0, abs=1e-9)

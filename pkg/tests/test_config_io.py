import numpy as np
import pytest

from hallsync.cli import main
from hallsync.config import (
    ConfigError,
    RunConfig,
    parse_config,
    serialize_config,
)
from hallsync.snapshots import SnapshotError, read_snapshot, write_snapshot

from conftest import random_hermitian_field


class TestConfigParsing:
    def test_roundtrip_identity(self):
        cfg = RunConfig(n=32, nu=0.013, dt=7.5e-4, seed=99, out_dir="/tmp/x")
        assert parse_config(serialize_config(cfg)) == cfg

    def test_serialize_idempotent(self):
        cfg = RunConfig()
        text = serialize_config(cfg)
        assert serialize_config(parse_config(text)) == text

    def test_comments_and_blank_lines(self):
        cfg = parse_config("# heading\n\nn = 32  # inline\nnu = 0.5\n")
        assert cfg.n == 32
        assert cfg.nu == 0.5

    def test_invalid_r_names_interval(self):
        with pytest.raises(ConfigError, match=r"\(2, 3\)"):
            parse_config("r = 3.5\n")

    def test_duplicate_key_reports_both_lines(self):
        with pytest.raises(ConfigError, match="line 3.*first set on line 1"):
            parse_config("n = 32\nnu = 0.5\nn = 64\n")

    def test_unknown_key(self):
        with pytest.raises(ConfigError, match="unknown key 'bogus'"):
            parse_config("bogus = 1\n")

    def test_all_errors_collected(self):
        try:
            parse_config("bogus = 1\nn = 7\nr = 9\n")
        except ConfigError as exc:
            assert len(exc.errors) == 3
        else:
            pytest.fail("expected ConfigError")

    def test_unparseable_value(self):
        with pytest.raises(ConfigError, match="cannot parse"):
            parse_config("n = banana\n")


class TestSnapshots:
    def test_bit_exact_roundtrip(self, grid32, tmp_path):
        u = random_hermitian_field(grid32, seed=50)
        b = random_hermitian_field(grid32, seed=51)
        path = tmp_path / "state.bin"
        write_snapshot(path, [u, b], 0.625, 0.01, 0.02, 0.5)
        fields, t, nu, mu, eta = read_snapshot(path)
        assert (t, nu, mu, eta) == (0.625, 0.01, 0.02, 0.5)
        assert len(fields) == 2
        assert np.array_equal(fields[0].coeffs, u.coeffs)
        assert np.array_equal(fields[1].coeffs, b.coeffs)

    def test_single_field_count_inferred(self, grid32, tmp_path):
        b = random_hermitian_field(grid32, seed=52)
        path = tmp_path / "b.bin"
        write_snapshot(path, [b], 0.0, 1.0, 1.0, 0.0)
        fields, *_ = read_snapshot(path)
        assert len(fields) == 1

    def test_bad_magic_rejected(self, tmp_path):
        path = tmp_path / "junk.bin"
        path.write_bytes(b"NOPE!" + b"\x00" * 64)
        with pytest.raises(SnapshotError):
            read_snapshot(path)

    def test_truncated_body_rejected(self, grid32, tmp_path):
        u = random_hermitian_field(grid32, seed=53)
        path = tmp_path / "trunc.bin"
        write_snapshot(path, [u], 0.0, 1.0, 1.0, 0.0)
        raw = path.read_bytes()
        path.write_bytes(raw[:-8])
        with pytest.raises(SnapshotError):
            read_snapshot(path)


def _twin_config_text(tmp_path, **over):
    base = dict(n=32, nu=0.02, mu=0.01, eta=0.01, dt=2e-3, t_end=0.02,
                seed=5, forcing_amplitude=0.5, output_every=2,
                cr=1e6, init_amplitude_u=0.3, init_amplitude_b=0.3,
                perturbation_amplitude=1e-3)
    base.update(over)
    text = "".join(f"{k} = {v!r}\n" for k, v in base.items())
    path = tmp_path / "run.cfg"
    path.write_text(text)
    return str(path)


class TestCliDeterminism:
    def test_twin_csv_bitwise_reproducible(self, tmp_path):
        cfg = _twin_config_text(tmp_path)
        outs = []
        for name in ("a", "b"):
            out = tmp_path / name
            assert main(["twin", "--config", cfg, "--out", str(out)]) == 0
            outs.append((out / "twin.csv").read_bytes())
        assert outs[0] == outs[1]

    def test_twin_snapshot_resume_equivalent(self, tmp_path):
        cfg_full = _twin_config_text(tmp_path, t_end=0.02, snapshot_every=5)
        out_full = tmp_path / "full"
        assert main(["twin", "--config", cfg_full, "--out", str(out_full)]) == 0

        # resume from the half-way snapshot and compare the final snapshot
        cfg_resume = _twin_config_text(tmp_path, t_end=0.02, snapshot_every=5)
        out_res = tmp_path / "res"
        prefix = str(out_full / "snap_00000005")
        assert main(["twin", "--config", cfg_resume, "--out", str(out_res),
                     "--resume", prefix]) == 0
        # the resumed run restarts its step counter, so its step-5 snapshot
        # corresponds to step 10 of the uninterrupted run
        final_full = (out_full / "snap_00000010_shadow.bin").read_bytes()
        final_res = (out_res / "snap_00000005_shadow.bin").read_bytes()
        assert final_full[13:] == final_res[13:]  # bodies bit-identical
        assert final_full[:13] == final_res[:13]  # header (same t, n)

    def test_simulate_writes_energy_csv(self, tmp_path):
        cfg = _twin_config_text(tmp_path)
        out = tmp_path / "sim"
        assert main(["simulate", "--config", cfg, "--out", str(out)]) == 0
        head = (out / "energy.csv").read_text().splitlines()[0]
        assert head.split(",")[:3] == ["t", "E_u", "E_b"]

    def test_emhd_twin_runs(self, tmp_path):
        cfg = _twin_config_text(tmp_path, eta=0.05)
        out = tmp_path / "emhd"
        assert main(["emhd-twin", "--config", cfg, "--out", str(out)]) == 0
        assert (out / "emhd_twin.csv").exists()

    def test_bad_config_exit_code(self, tmp_path):
        path = tmp_path / "bad.cfg"
        path.write_text("n = 7\n")
        assert main(["simulate", "--config", str(path)]) == 2

    def test_lp_check_passes(self, tmp_path, capsys):
        assert main(["lp-check", "--n", "32", "--seed", "3",
                     "--out", str(tmp_path)]) == 0
        assert (tmp_path / "lp_check.csv").exists()
        assert "FAIL" not in capsys.readouterr().out

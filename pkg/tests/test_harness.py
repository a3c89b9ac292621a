"""Config parsing, CLI behavior, data synthesis, artifact writers, kernels."""

import json
import os
import subprocess
import sys

import numpy as np
import pytest

from qnls import _kernels
from qnls.cli import main
from qnls.config import ConfigError, default_config, load_config, parse_config
from qnls.reports import config_sha256, fmt, write_csv, write_report
from qnls.roughdata import DataSpec, gen_rough_data
from qnls.spectral import Grid


# ---------------------------------------------------------------------------
# config
# ---------------------------------------------------------------------------

class TestConfig:
    def test_defaults_complete(self):
        cfg = default_config()
        assert cfg["run"]["alpha"] == 0.6
        assert cfg["run"]["beta"] == 0.2
        assert cfg["rates"]["k_hi"] == 8
        assert cfg["identity"]["dt"] == 1e-3

    def test_file_overrides(self, tmp_path):
        p = tmp_path / "a.cfg"
        p.write_text("# comment\n[run]\nseed = 42\nalpha = 0.55\n\n[rates]\nn_seeds = 2\n")
        cfg = parse_config(p)
        assert cfg["run"]["seed"] == 42
        assert cfg["run"]["alpha"] == 0.55
        assert cfg["rates"]["n_seeds"] == 2
        # untouched keys keep defaults
        assert cfg["run"]["beta"] == 0.2

    def test_unknown_key_rejected(self, tmp_path):
        p = tmp_path / "a.cfg"
        p.write_text("[run]\nnot_a_key = 1\n")
        with pytest.raises(ConfigError):
            parse_config(p)

    def test_unknown_section_rejected(self, tmp_path):
        p = tmp_path / "a.cfg"
        p.write_text("[nonsense]\nx = 1\n")
        with pytest.raises(ConfigError):
            parse_config(p)

    def test_duplicate_key_rejected(self, tmp_path):
        p = tmp_path / "a.cfg"
        p.write_text("[run]\nseed = 1\nseed = 2\n")
        with pytest.raises(ConfigError):
            parse_config(p)

    def test_bad_value_rejected(self, tmp_path):
        p = tmp_path / "a.cfg"
        p.write_text("[run]\nseed = banana\n")
        with pytest.raises(ConfigError):
            parse_config(p)

    def test_key_outside_section_rejected(self, tmp_path):
        p = tmp_path / "a.cfg"
        p.write_text("seed = 1\n")
        with pytest.raises(ConfigError):
            parse_config(p)

    def test_list_values(self, tmp_path):
        p = tmp_path / "a.cfg"
        p.write_text("[lipschitz]\nepsilons = 1e-3, 1e-2\n\n[rates]\nkinds = gain1, kkk1\n")
        cfg = parse_config(p)
        assert cfg["lipschitz"]["epsilons"] == [1e-3, 1e-2]
        assert cfg["rates"]["kinds"] == ["gain1", "kkk1"]

    def test_load_config_default_path(self):
        assert load_config(None) == default_config()


# ---------------------------------------------------------------------------
# rough data synthesis
# ---------------------------------------------------------------------------

class TestRoughData:
    def test_modulus_profile(self):
        g = Grid(256)
        spec = DataSpec(sigma=0.7, freq_hi=32.0, amplitude=2.0, seed=1)
        f = gen_rough_data(spec, g)
        xi = g.frequencies
        inside = (np.abs(xi) >= 1.0) & (np.abs(xi) <= 32.0)
        want = 2.0 * (1.0 + xi[inside] ** 2) ** (-0.5 * (0.7 + 0.5))
        np.testing.assert_allclose(np.abs(f.coeffs[inside]), want, rtol=1e-12)
        assert np.all(f.coeffs[~inside] == 0)

    def test_zero_mode_flag(self):
        g = Grid(64)
        base = DataSpec(sigma=0.0, freq_hi=8.0, seed=2)
        assert gen_rough_data(base, g).coeffs[0] == 0
        with_zero = DataSpec(sigma=0.0, freq_hi=8.0, seed=2, include_zero_mode=True)
        assert gen_rough_data(with_zero, g).coeffs[0] != 0

    def test_seed_determinism_and_variation(self):
        g = Grid(64)
        a = gen_rough_data(DataSpec(0.5, 8.0, seed=5), g)
        b = gen_rough_data(DataSpec(0.5, 8.0, seed=5), g)
        c = gen_rough_data(DataSpec(0.5, 8.0, seed=6), g)
        np.testing.assert_array_equal(a.coeffs, b.coeffs)
        assert np.any(a.coeffs != c.coeffs)

    def test_guard_respected(self):
        g = Grid(64)  # guard frequency 16
        with pytest.raises(ValueError):
            gen_rough_data(DataSpec(0.5, 20.0, seed=1), g)


# ---------------------------------------------------------------------------
# artifact writers
# ---------------------------------------------------------------------------

class TestReports:
    def test_fmt_rules(self):
        assert fmt(True) == "1"
        assert fmt(False) == "0"
        assert fmt(3) == "3"
        assert fmt(0.1) == "0.10000000000000001"
        assert fmt("kind") == "kind"

    def test_csv_bytes(self, tmp_path):
        p = tmp_path / "t.csv"
        write_csv(p, ["a", "b"], [[1, 2.5], [3, float("inf")]])
        raw = p.read_bytes()
        assert raw == b"a,b\n1,2.5\n3,inf\n"

    def test_csv_reproducible(self, tmp_path):
        rows = [[0.1, 1e-17], [2.0, 3.0]]
        p1, p2 = tmp_path / "a.csv", tmp_path / "b.csv"
        write_csv(p1, ["x", "y"], rows)
        write_csv(p2, ["x", "y"], rows)
        assert p1.read_bytes() == p2.read_bytes()

    def test_report_envelope(self, tmp_path):
        cfg = default_config()
        p = tmp_path / "r.json"
        write_report(p, "demo", cfg, {"value": 1.5, "nan": float("nan")}, passed=True)
        doc = json.loads(p.read_text())
        assert doc["experiment"] == "demo"
        assert doc["passed"] is True
        assert doc["results"]["value"] == 1.5
        assert doc["results"]["nan"] is None
        assert doc["config"]["run"]["alpha"] == 0.6
        assert doc["config_sha256"] == config_sha256(cfg)
        assert "created" in doc

    def test_config_sha_tracks_content(self):
        a = default_config()
        b = default_config()
        assert config_sha256(a) == config_sha256(b)
        b["run"]["seed"] = 9999
        assert config_sha256(a) != config_sha256(b)


# ---------------------------------------------------------------------------
# command line
# ---------------------------------------------------------------------------

class TestCli:
    def test_identity_writes_artifacts(self, tmp_path):
        rc = main(["identity", "--out", str(tmp_path)])
        assert rc == 0
        assert (tmp_path / "identity.csv").exists()
        doc = json.loads((tmp_path / "identity.json").read_text())
        assert doc["results"]["max_residual"] <= 1e-5

    def test_seed_flag_changes_artifacts(self, tmp_path):
        main(["identity", "--out", str(tmp_path / "a"), "--seed", "1"])
        main(["identity", "--out", str(tmp_path / "b"), "--seed", "2"])
        main(["identity", "--out", str(tmp_path / "c"), "--seed", "1"])
        a = (tmp_path / "a" / "identity.csv").read_bytes()
        b = (tmp_path / "b" / "identity.csv").read_bytes()
        c = (tmp_path / "c" / "identity.csv").read_bytes()
        assert a != b
        assert a == c

    def test_bad_config_exit_2(self, tmp_path):
        p = tmp_path / "bad.cfg"
        p.write_text("[run]\nbogus = 1\n")
        rc = main(["identity", "--config", str(p), "--out", str(tmp_path)])
        assert rc == 2

    def test_missing_config_exit_2(self, tmp_path):
        rc = main(["identity", "--config", str(tmp_path / "absent.cfg"), "--out", str(tmp_path)])
        assert rc == 2

    def test_usage_error_exit_2(self):
        with pytest.raises(SystemExit) as info:
            main(["not-a-command"])
        assert info.value.code == 2

    def test_out_env_fallback(self, tmp_path, monkeypatch):
        monkeypatch.setenv("QNLS_OUT", str(tmp_path / "envdir"))
        rc = main(["simulate"])
        assert rc == 0
        assert (tmp_path / "envdir" / "trajectory.csv").exists()

    def test_simulate_sidecar_consistent(self, tmp_path):
        rc = main(["simulate", "--out", str(tmp_path)])
        assert rc == 0
        doc = json.loads((tmp_path / "trajectory.json").read_text())
        import hashlib

        digest = hashlib.sha256((tmp_path / "trajectory.csv").read_bytes()).hexdigest()
        assert doc["csv_sha256"] == digest
        assert len(doc["times"]) == len(doc["l2_history"])

    def test_console_entry_point(self, tmp_path):
        proc = subprocess.run(
            [sys.executable, "-m", "qnls", "identity", "--out", str(tmp_path)],
            capture_output=True,
            text=True,
        )
        assert proc.returncode == 0
        assert "PASS" in proc.stdout


# ---------------------------------------------------------------------------
# kernel twins
# ---------------------------------------------------------------------------

class TestKernels:
    def test_env_flag_honored(self):
        env = dict(os.environ, QNLS_DISABLE_NUMBA="1")
        out = subprocess.run(
            [sys.executable, "-c", "from qnls import _kernels; print(_kernels.USE_NUMBA)"],
            capture_output=True,
            text=True,
            env=env,
        )
        assert out.stdout.strip() == "False"

    def test_bilinear_twins_agree(self):
        if not _kernels.HAS_NUMBA:
            pytest.skip("numba unavailable in this interpreter")
        rng = np.random.default_rng(2)
        n = 128
        sym = rng.standard_normal((n, n)) + 1j * rng.standard_normal((n, n))
        u = rng.standard_normal(n) + 1j * rng.standard_normal(n)
        v = rng.standard_normal(n) + 1j * rng.standard_normal(n)
        a = _kernels._bilinear_contract_nb(sym, u, v)
        b = _kernels.bilinear_contract_numpy(sym, u, v)
        np.testing.assert_allclose(a, b, atol=1e-12 * np.max(np.abs(b)))

    def test_trilinear_twins_agree(self):
        if not _kernels.HAS_NUMBA:
            pytest.skip("numba unavailable in this interpreter")
        from qnls.mnorm import BoxSpec, build_model

        box = BoxSpec((1, 1, -1), (4.0, 2.0, 2.0), (1.0, 2.0, 16.0))
        m = build_model(box, 16.0, n_tau=8, n_xi=16)
        assert not m.empty
        rng = np.random.default_rng(3)
        n1 = (len(m.xi_grids[0]), len(m.mu_grids[0]))
        n2 = (len(m.xi_grids[1]), len(m.mu_grids[1]))
        n3 = (len(m.xi_grids[2]), len(m.mu_grids[2]))
        u1 = rng.standard_normal(n1) + 1j * rng.standard_normal(n1)
        u2 = rng.standard_normal(n2) + 1j * rng.standard_normal(n2)
        u3 = rng.standard_normal(n3) + 1j * rng.standard_normal(n3)
        args = (m.ix3, m.shift, m.mu_grids[0], m.mu_grids[1], m.lo3, m.dmus[2], m.nneg3, n3[1])
        p3a = _kernels._partial3_nb(u1, u2, *args, n3[0])
        p3b = _kernels.trilinear_partial3_numpy(u1, u2, *args, n3[0])
        np.testing.assert_allclose(p3a, p3b, atol=1e-12 * max(1.0, np.max(np.abs(p3b))))
        p1a = _kernels._partial1_nb(u2, u3, *args, n1[0])
        p1b = _kernels.trilinear_partial1_numpy(u2, u3, *args, n1[0])
        np.testing.assert_allclose(p1a, p1b, atol=1e-12 * max(1.0, np.max(np.abs(p1b))))
        p2a = _kernels._partial2_nb(u1, u3, *args, n2[0])
        p2b = _kernels.trilinear_partial2_numpy(u1, u3, *args, n2[0])
        np.testing.assert_allclose(p2a, p2b, atol=1e-12 * max(1.0, np.max(np.abs(p2b))))

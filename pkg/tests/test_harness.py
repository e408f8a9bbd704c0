import dataclasses
import os

import numpy as np
import pytest

from twoch import cli
from twoch.config import ScenarioConfig, make_config, parse_config_text
from twoch.errors import BlowUpError, ConfigError
from twoch.experiment import run_experiment
from twoch.io import write_outputs
from twoch.scenarios import build_scenario
from twoch.state import total_energy_eulerian, validate_eulerian


def test_parse_config_text():
    text = """
    # comment line
    scenario = single_peakon   # trailing comment
    dt = 0.002
    output_times = 0, 0.5, 1
    """
    cfg = make_config(parse_config_text(text))
    assert cfg.scenario == "single_peakon" and cfg.dt == 0.002
    assert cfg.output_times == (0.0, 0.5, 1.0)


@pytest.mark.parametrize("text", ["dt 0.1", "= 3", "bogus = 1", "dt = abc", "n = 2.5"])
def test_bad_config_lines(text):
    with pytest.raises(ConfigError):
        make_config(parse_config_text(text))


@pytest.mark.parametrize("kw", [dict(dt=0.0), dict(t_max=-1.0), dict(n=2), dict(scenario="x"),
                                dict(output_times=(0.0, 5.0)), dict(eta=0.0), dict(xi_lo=-1.0)])
def test_invalid_configs(kw):
    with pytest.raises(ConfigError):
        make_config(**kw)


@pytest.mark.parametrize("name", ["steady_background", "single_peakon", "peakon_antipeakon",
                                  "dambreak_2ch", "atom_test"])
def test_presets_are_compatible(name):
    s = build_scenario(make_config(scenario=name, k=0.5))
    assert validate_eulerian(s).ok


def test_steady_background_has_zero_defect():
    rep = validate_eulerian(build_scenario(make_config(scenario="steady_background", k=1.0)))
    assert rep["boundary"] == 0.0 and rep["compatibility"] == 0.0


def test_preset_energies():
    single = build_scenario(make_config(scenario="single_peakon", n=8001))
    assert total_energy_eulerian(single) == pytest.approx(2.0, abs=1e-4)
    pair = build_scenario(make_config(scenario="peakon_antipeakon", n=8001))
    assert np.allclose(pair.u, -pair.u[::-1])
    # two unit peakons minus twice their H^1 overlap 2 e^{-6}
    assert total_energy_eulerian(pair) == pytest.approx(4.0 * (1.0 - np.exp(-6.0)), abs=1e-4)


def test_steady_run_is_stationary():
    res = run_experiment(make_config(scenario="steady_background", k=1.0, t_max=1.0, n=201,
                                     output_times=(0.0, 0.5, 1.0)))
    assert len(res.records) == 3 and res.ok
    for r in res.records:
        np.testing.assert_allclose(r.u, res.records[0].u, atol=1e-12)
        np.testing.assert_allclose(r.rho, res.records[0].rho, atol=1e-12)


def test_record_count_matches_output_times():
    cfg = make_config(scenario="single_peakon", t_max=0.2, dt=0.01, n=401,
                      output_times=(0.0, 0.1, 0.2))
    res = run_experiment(cfg)
    assert [r.t for r in res.records] == [0.0, 0.1, 0.2]
    assert all(r.g_defect < 1e-10 for r in res.records)


def test_vanishing_density_rows():
    cfg = make_config(scenario="peakon_antipeakon", t_max=0.2, dt=0.01, n=401,
                      densities=(0.4, 0.2))
    res = run_experiment(cfg)
    assert [row[:2] for row in res.vanishing] == [(1, 0.4), (2, 0.2)]
    assert res.vanishing[0][3] > res.vanishing[1][3] > 0.0


def _read(path):
    with open(path, encoding="utf-8") as fh:
        return fh.read()


def test_outputs_are_written_and_deterministic(tmp_path):
    cfg = make_config(scenario="steady_background", k=1.0, t_max=0.1, dt=0.05, n=51,
                      output_times=(0.0, 0.05, 0.1))
    a, b = tmp_path / "a", tmp_path / "b"
    write_outputs(run_experiment(cfg), a)
    write_outputs(run_experiment(cfg), b)
    names = sorted(os.listdir(a))
    assert names == ["atoms.csv", "diagnostics.csv", "manifest.txt",
                     "snapshot_0000.csv", "snapshot_0001.csv", "snapshot_0002.csv"]
    for name in names:
        if name != "manifest.txt":
            assert _read(a / name) == _read(b / name)
    strip = lambda s: [l for l in s.splitlines() if not l.startswith("timestamp")]
    assert strip(_read(a / "manifest.txt")) == strip(_read(b / "manifest.txt"))
    assert _read(a / "snapshot_0000.csv").splitlines()[0] == "x,u,rho,mu_density"
    diag = _read(a / "diagnostics.csv").splitlines()
    assert diag[0] == "t,energy,g_defect,r_defect,min_yxi,pq_defect" and len(diag) == 4
    # shortest round-trip decimal
    x0 = _read(a / "snapshot_0000.csv").splitlines()[2].split(",")[0]
    assert float(x0) == np.linspace(cfg.x_lo, cfg.x_hi, cfg.n)[1] and x0 == repr(float(x0))


def test_atom_test_writes_atom_row(tmp_path):
    cfg = make_config(scenario="atom_test", t_max=0.01, dt=0.005, n=401)
    write_outputs(run_experiment(cfg), tmp_path)
    rows = _read(tmp_path / "atoms.csv").splitlines()
    assert rows[0] == "t,position,mass"
    t, pos, mass = map(float, rows[1].split(","))
    assert t == 0.0 and pos == 0.0 and mass == pytest.approx(1.0, abs=1e-12)


def test_manifest_records_config(tmp_path):
    cfg = make_config(scenario="single_peakon", t_max=0.01, dt=0.01, n=101)
    write_outputs(run_experiment(cfg), tmp_path)
    lines = dict(l.split(" = ", 1) for l in _read(tmp_path / "manifest.txt").splitlines())
    for f in dataclasses.fields(ScenarioConfig):
        assert f.name in lines
    assert lines["scenario"] == "single_peakon" and "timestamp" in lines


def test_cli_success_and_overrides(tmp_path):
    cfgfile = tmp_path / "run.cfg"
    cfgfile.write_text("scenario = steady_background\nk = 1\nt_max = 5\n")
    rc = cli.main(["--config", str(cfgfile), "--tmax", "0.02", "--dt", "0.01", "--nodes", "51",
                   "--out", str(tmp_path / "out"), "-q"])
    assert rc == 0
    lines = _read(tmp_path / "out" / "manifest.txt")
    assert "t_max = 0.02" in lines and "n = 51" in lines


def test_cli_exit_codes(tmp_path, monkeypatch):
    out = str(tmp_path / "o")
    assert cli.main(["--config", str(tmp_path / "missing.cfg"), "--out", out, "-q"]) == 2
    bad = tmp_path / "bad.cfg"
    bad.write_text("kappa = 1\nt_max = 0.01\nn = 51\n")
    assert cli.main(["--config", str(bad), "--out", out, "-q"]) == 2
    tight = tmp_path / "tight.cfg"
    tight.write_text("scenario = single_peakon\nt_max = 0.02\ndt = 0.01\nn = 201\ng_bound = 1e-300\n")
    assert cli.main(["--config", str(tight), "--out", out, "-q"]) == 4

    def boom(cfg):
        raise BlowUpError("stage 2 produced NaN", stage=2)

    monkeypatch.setattr(cli, "run_experiment", boom)
    assert cli.main(["--scenario", "single_peakon", "--out", out, "-q"]) == 3

import dataclasses
from pathlib import Path

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st
from hypothesis.extra.numpy import arrays

from nhjunction import cli
from nhjunction.cli import MODES, RunConfig, build_config, main, parse_config, read_csv, write_csv
from nhjunction.errors import ConfigError, RunFailed
from nhjunction.observables import ObservableSeries

FAST = ["--samples", "40", "--steps", "200", "--stride", "20"]


def test_empty_config_defaults():
    cfg = parse_config([])
    p = cfg.params
    assert (p.delta, p.omega, p.coupling, p.gamma, p.tau) == (1.0, 1 / 3, 0.007, 0.1, 0.005)
    assert (p.n_step, p.n_mcs, p.mu1, p.mu2, p.seed) == (10_000, 2500, 1.0, 1.0, 42)
    assert cfg.record_stride == 10 and cfg.mode == "SMJ" and cfg.beta_sweep is None


@pytest.mark.parametrize("mode, flags", MODES.items())
def test_mode_table(mode, flags):
    p = parse_config(["--mode", mode]).params
    assert (p.nhc_enabled, p.decay_enabled) == flags


@pytest.mark.parametrize(
    "argv, message",
    [
        (["--tau", "-1"], "tau must be > 0"),
        (["--samples", "0"], "n_mcs must be >= 1"),
        (["--steps", "105", "--stride", "10"], "record_stride must divide n_step"),
        (["--workers", "0"], "workers must be >= 1"),
        (["--sweep-count", "0"], "count must be >= 1"),
        (["--mode", "SMJ+X"], "invalid choice"),
        (["--gamma", "abc"], "invalid float"),
    ],
)
def test_config_errors(argv, message):
    with pytest.raises(ConfigError, match=message):
        parse_config(argv)


def test_file_keys_and_flag_override(tmp_path):
    cfg_file = tmp_path / "run.cfg"
    cfg_file.write_text("# comment\nmode = SMJ+nH\ngamma = 0.2\nn_mcs = 77\nbeta_sweep = 0.0005, 20\n")
    cfg = parse_config(["--config", str(cfg_file), "--gamma", "0.3"])
    assert cfg.mode == "SMJ+nH" and cfg.params.decay_enabled
    assert cfg.params.gamma == 0.3 and cfg.params.n_mcs == 77
    assert cfg.beta_sweep == (0.0005, 20)


@pytest.mark.parametrize(
    "text, message",
    [
        ("bogus = 1\n", "unknown config key"),
        ("nhc_enabled = true\n", "set through mode"),
        ("n_step = 1.5\n", "n_step must be an int"),
        ("just words\n", "expected 'key = value'"),
    ],
)
def test_file_errors(tmp_path, text, message):
    f = tmp_path / "bad.cfg"
    f.write_text(text)
    with pytest.raises(ConfigError, match=message):
        parse_config(["--config", str(f)])


def test_describe_round_trips_through_build_config():
    cfg = parse_config(["--mode", "SMJ+nH+NHC", "--beta", "0.0075", "--sweep-count", "3"])
    entries = {k: str(v) for k, v in cfg.describe().items() if k not in ("nhc_enabled", "decay_enabled")}
    assert build_config(entries) == cfg


def test_beta_schedule():
    betas = cli.sweep_betas(0.0005, 20)
    assert betas[0] == pytest.approx(0.0005) and betas[-1] == pytest.approx(0.010)
    assert betas[14] == pytest.approx(0.0075)


finite = st.floats(-1e300, 1e300, allow_nan=False)


@given(n=st.integers(0, 20), data=st.data())
def test_csv_round_trip_real(tmp_path_factory, n, data):
    t = np.cumsum(data.draw(arrays(float, n, elements=st.floats(1e-6, 10.0))))
    mean = data.draw(arrays(float, n, elements=finite))
    err = data.draw(arrays(float, n, elements=st.floats(0, 1e300)))
    path = tmp_path_factory.mktemp("csv") / "s.csv"
    write_csv(ObservableSeries(t, mean, err, "s"), path)
    back = read_csv(path)
    assert np.array_equal(back.times, t) and np.array_equal(back.mean, mean) and np.array_equal(back.stderr, err)


@given(data=st.data())
def test_csv_round_trip_complex(tmp_path_factory, data):
    n = 5
    t = np.arange(n) * 0.05
    re = data.draw(arrays(float, n, elements=finite))
    im = data.draw(arrays(float, n, elements=finite))
    path = tmp_path_factory.mktemp("csv") / "c.csv"
    write_csv(ObservableSeries(t, re + 1j * im, np.zeros(n), "c"), path)
    assert path.read_text().splitlines()[0] == "time,re_mean,im_mean,stderr"
    back = read_csv(path)
    assert np.array_equal(back.mean.real, re) and np.array_equal(back.mean.imag, im)


def test_empty_series_header_only(tmp_path):
    path = write_csv(ObservableSeries(np.array([]), np.array([]), np.array([]), "e"), tmp_path / "e.csv")
    assert path.read_bytes() == b"time,mean,stderr\n"


def test_run_experiment_outputs(tmp_path):
    out = tmp_path / "run"
    assert main(FAST + ["--mode", "SMJ+nH", "--out", str(out)]) == 0
    names = {p.name for p in out.iterdir()}
    assert names == {f"{n}.csv" for n in cli.SERIES_NAMES} | {"spectrum.csv", "metadata.txt"}
    lines = (out / "trace.csv").read_text().splitlines()
    assert lines[0] == "time,mean,stderr"
    t0, m0, _ = map(float, lines[1].split(","))
    assert t0 == 0.0 and m0 == pytest.approx(1.0, abs=1e-14)
    assert b"\r" not in (out / "trace.csv").read_bytes()
    meta = (out / "metadata.txt").read_text()
    assert "mode = SMJ+nH" in meta and "seed = 42" in meta and "wall_time_s" in meta


def test_spectrum_written_for_long_runs(tmp_path):
    out = tmp_path / "long"
    assert main(["--samples", "8", "--steps", "6000", "--stride", "10", "--out", str(out)]) == 0
    rows = (out / "spectrum.csv").read_text().splitlines()
    assert rows[0] == "omega,magnitude" and len(rows) > 100


def test_sweep_layout(tmp_path):
    cfg = parse_config(FAST + ["--beta", "0.001", "--sweep-count", "2", "--out", str(tmp_path)])
    cfg = dataclasses.replace(cfg, sweep_modes=("SMJ", "SMJ+nH+NHC"))
    results = cli.sweep_beta(cfg)
    assert set(results) == {(0, "SMJ"), (0, "SMJ+nH+NHC"), (1, "SMJ"), (1, "SMJ+nH+NHC")}
    meta = (tmp_path / "beta_1" / "mode_SMJ+nH+NHC" / "metadata.txt").read_text()
    assert "beta = 0.002" in meta and "nhc_enabled = True" in meta and "decay_enabled = True" in meta


def test_single_cell_sweep_matches_run(tmp_path):
    assert main(FAST + ["--beta", "0.004", "--sweep-count", "1", "--out", str(tmp_path / "s")]) == 0
    assert main(FAST + ["--beta", "0.004", "--out", str(tmp_path / "r")]) == 0
    for name in cli.SERIES_NAMES:
        a = (tmp_path / "s" / "beta_0" / "mode_SMJ" / f"{name}.csv").read_bytes()
        assert a == (tmp_path / "r" / f"{name}.csv").read_bytes()


def test_byte_identical_reruns(tmp_path):
    for k in range(2):
        assert main(FAST + ["--mode", "SMJ+NHC", "--out", str(tmp_path / str(k))]) == 0
    for name in cli.SERIES_NAMES:
        assert (tmp_path / "0" / f"{name}.csv").read_bytes() == (tmp_path / "1" / f"{name}.csv").read_bytes()


def test_exit_codes(tmp_path, monkeypatch):
    assert main(["--tau", "-1"]) == 1
    assert main(["--nonsense"]) == 1

    def boom(config):
        raise RunFailed("too many aborted samples")

    monkeypatch.setattr(cli, "run_experiment", boom)
    assert main(FAST + ["--out", str(tmp_path)]) == 2


def test_abort_threshold(tmp_path, monkeypatch):
    real = cli.run_ensemble

    def lossy(params, stride, workers):
        rec = real(params, stride, workers)
        return dataclasses.replace(rec, aborted=list(range(params.n_mcs // 50)))

    monkeypatch.setattr(cli, "run_ensemble", lossy)
    cfg = parse_config(["--samples", "100", "--steps", "20", "--stride", "10", "--out", str(tmp_path)])
    with pytest.raises(RunFailed):
        cli.run_experiment(cfg)


def test_run_config_rejects_mismatched_params():
    cfg = RunConfig()
    with pytest.raises(ConfigError):
        dataclasses.replace(cfg, params=dataclasses.replace(cfg.params, nhc_enabled=True))

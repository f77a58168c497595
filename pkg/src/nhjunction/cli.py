"""Command-line driver: configuration, the four dynamics modes, beta sweeps and CSV output.

Usage::

    nhjunction --mode SMJ+NHC --beta 0.0075 --out runs/fig5
    nhjunction --config sweep.cfg --sweep-count 20 --workers 8

A config file holds ``key = value`` lines; keys are the ``RunConfig`` fields or
any ``ModelParams`` field.  Command-line flags override the file.
"""

from __future__ import annotations

import argparse
import dataclasses
import logging
import sys
import time
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from . import __version__
from .ensemble import run_ensemble
from .errors import ConfigError, InsufficientData, RunFailed
from .model import ModelParams
from .observables import SERIES_NAMES, ObservableSeries, Spectrum, fourier_spectrum, observable_series

log = logging.getLogger(__name__)

# mode -> (nhc_enabled, decay_enabled)
MODES = {
    "SMJ": (False, False),
    "SMJ+NHC": (True, False),
    "SMJ+nH": (False, True),
    "SMJ+nH+NHC": (True, True),
}

MAX_ABORT_FRACTION = 0.01
SPECTRUM_T_MIN = 20.0


@dataclass(frozen=True)
class RunConfig:
    params: ModelParams = ModelParams()
    mode: str = "SMJ"
    # (beta0, count) for the schedule beta_l = beta0 * (1 + l)
    beta_sweep: tuple[float, int] | None = None
    sweep_modes: tuple[str, ...] = tuple(MODES)
    record_stride: int = 10
    output_dir: Path = Path("results")
    workers: int = 1
    spectrum_window: str | None = None

    def __post_init__(self):
        if self.mode not in MODES:
            raise ConfigError(f"mode must be one of {', '.join(MODES)}")
        bad = [m for m in self.sweep_modes if m not in MODES]
        if bad or not self.sweep_modes:
            raise ConfigError(f"sweep_modes must be a non-empty subset of {', '.join(MODES)}")
        nhc, decay = MODES[self.mode]
        if (self.params.nhc_enabled, self.params.decay_enabled) != (nhc, decay):
            raise ConfigError(f"params do not match mode {self.mode}")
        if self.beta_sweep is not None:
            beta0, count = self.beta_sweep
            if not beta0 > 0:
                raise ConfigError("beta_sweep beta0 must be > 0")
            if count < 1:
                raise ConfigError("beta_sweep count must be >= 1")
        if self.record_stride < 1:
            raise ConfigError("record_stride must be >= 1")
        if self.params.n_step % self.record_stride:
            raise ConfigError("record_stride must divide n_step")
        if self.workers < 1:
            raise ConfigError("workers must be >= 1")
        if self.spectrum_window not in (None, "hann"):
            raise ConfigError("spectrum_window must be none or hann")

    def with_mode(self, mode: str) -> "RunConfig":
        nhc, decay = MODES[mode]
        params = dataclasses.replace(self.params, nhc_enabled=nhc, decay_enabled=decay)
        return dataclasses.replace(self, mode=mode, params=params)

    def describe(self) -> dict:
        """Flat ``key -> value`` view, as accepted by :func:`parse_config`."""
        out = {"mode": self.mode, "record_stride": self.record_stride, "workers": self.workers}
        out["output_dir"] = str(self.output_dir)
        out["spectrum_window"] = self.spectrum_window or "none"
        out["sweep_modes"] = ",".join(self.sweep_modes)
        if self.beta_sweep is not None:
            out["beta_sweep"] = f"{self.beta_sweep[0]!r},{self.beta_sweep[1]}"
        for f in dataclasses.fields(ModelParams):
            out[f.name] = getattr(self.params, f.name)
        return out


# ---------------------------------------------------------------- parsing

_PARAM_FIELDS = {f.name: f for f in dataclasses.fields(ModelParams)}
# keys decided by the mode, never set directly
_MODE_KEYS = {"nhc_enabled", "decay_enabled"}
_RUN_KEYS = {"mode", "beta_sweep", "sweep_modes", "record_stride", "output_dir", "workers", "spectrum_window"}

# flag dest -> config key
_FLAG_KEYS = {
    "mode": "mode",
    "beta": "beta",
    "seed": "seed",
    "samples": "n_mcs",
    "steps": "n_step",
    "tau": "tau",
    "out": "output_dir",
    "workers": "workers",
    "stride": "record_stride",
    "gamma": "gamma",
    "omega": "omega",
    "delta": "delta",
    "coupling": "coupling",
    "mu1": "mu1",
    "mu2": "mu2",
}


def read_config_file(path) -> dict[str, str]:
    """Parse ``key = value`` lines; ``#`` starts a comment."""
    entries = {}
    try:
        text = Path(path).read_text(encoding="utf-8")
    except OSError as exc:
        raise ConfigError(f"cannot read config file {path}: {exc}") from exc
    for lineno, raw in enumerate(text.splitlines(), 1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        key, sep, value = line.partition("=")
        if not sep:
            raise ConfigError(f"{path}:{lineno}: expected 'key = value'")
        entries[key.strip()] = value.strip()
    return entries


def _convert(key: str, value, kind):
    if not isinstance(value, str):
        return value
    try:
        if kind is bool:
            lowered = value.lower()
            if lowered not in ("true", "false", "1", "0", "yes", "no"):
                raise ValueError(value)
            return lowered in ("true", "1", "yes")
        if kind is int:
            return int(value, 0)
        if kind is float:
            return float(value)
    except ValueError:
        raise ConfigError(f"{key} must be a{'n' if kind is int else ''} {kind.__name__}, got {value!r}") from None
    return value


def _param_kind(name: str):
    default = _PARAM_FIELDS[name].default
    return type(default)


def build_config(entries: dict) -> RunConfig:
    """Validated :class:`RunConfig` from a flat ``key -> value`` mapping."""
    unknown = set(entries) - set(_PARAM_FIELDS) - _RUN_KEYS
    if unknown:
        raise ConfigError(f"unknown config key(s): {', '.join(sorted(unknown))}")
    forced = _MODE_KEYS & set(entries)
    if forced:
        raise ConfigError(f"{', '.join(sorted(forced))} is set through mode")

    mode = str(entries.get("mode", "SMJ")).strip()
    if mode not in MODES:
        raise ConfigError(f"mode must be one of {', '.join(MODES)}, got {mode!r}")
    nhc, decay = MODES[mode]
    kwargs = {name: _convert(name, entries[name], _param_kind(name)) for name in _PARAM_FIELDS if name in entries}
    kwargs.update(nhc_enabled=nhc, decay_enabled=decay)
    try:
        params = ModelParams(**kwargs)
    except (TypeError, ValueError) as exc:
        raise ConfigError(str(exc)) from exc

    sweep = entries.get("beta_sweep")
    if isinstance(sweep, str):
        parts = [p.strip() for p in sweep.split(",")]
        if len(parts) != 2:
            raise ConfigError("beta_sweep must be 'beta0, count'")
        sweep = (_convert("beta_sweep", parts[0], float), _convert("beta_sweep", parts[1], int))
    modes = entries.get("sweep_modes", tuple(MODES))
    if isinstance(modes, str):
        modes = tuple(m.strip() for m in modes.split(",") if m.strip())
    window = entries.get("spectrum_window")
    if isinstance(window, str) and window.lower() == "none":
        window = None

    return RunConfig(
        params=params,
        mode=mode,
        beta_sweep=sweep,
        sweep_modes=tuple(modes),
        record_stride=_convert("record_stride", entries.get("record_stride", 10), int),
        output_dir=Path(entries.get("output_dir", "results")),
        workers=_convert("workers", entries.get("workers", 1), int),
        spectrum_window=window,
    )


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise ConfigError(message)


def make_parser() -> argparse.ArgumentParser:
    p = _Parser(prog="nhjunction", description=__doc__.split("\n\n")[0])
    p.add_argument("--config", type=Path, help="key = value config file")
    p.add_argument("--mode", choices=list(MODES))
    p.add_argument("--beta", type=float, help="inverse temperature (beta0 of a sweep)")
    p.add_argument("--sweep-count", type=int, help="run the beta schedule beta0*(1+l), l < count")
    p.add_argument("--seed", type=int)
    p.add_argument("--samples", type=int, help="Monte Carlo samples")
    p.add_argument("--steps", type=int, help="time steps per trajectory")
    p.add_argument("--tau", type=float, help="time step")
    p.add_argument("--out", type=Path, help="output directory")
    p.add_argument("--workers", type=int)
    p.add_argument("--stride", type=int, help="record every N steps")
    for name in ("gamma", "omega", "delta", "coupling", "mu1", "mu2"):
        p.add_argument(f"--{name}", type=float)
    p.add_argument("-v", "--verbose", action="store_true")
    return p


def parse_config(argv=None) -> RunConfig:
    """Resolve config file and flags (flags win) into a :class:`RunConfig`.

    Raises
    ------
    ConfigError
        Naming the offending key and the violated constraint.
    """
    args = make_parser().parse_args(argv)
    entries = read_config_file(args.config) if args.config else {}
    for dest, key in _FLAG_KEYS.items():
        value = getattr(args, dest)
        if value is not None:
            entries[key] = value
    if args.sweep_count is not None:
        beta0 = args.beta if args.beta is not None else float(entries.get("beta", ModelParams.beta))
        entries["beta_sweep"] = (beta0, args.sweep_count)
    return build_config(entries)


# ---------------------------------------------------------------- output

def _fmt(x) -> str:
    return f"{x:.16e}"


def write_csv(series: ObservableSeries, path) -> Path:
    """Write ``time,mean,stderr`` (``time,re_mean,im_mean,stderr`` if complex).

    17 significant digits, so parsing the file reproduces the series exactly.
    """
    path = Path(path)
    with path.open("w", encoding="utf-8", newline="\n") as fh:
        if series.is_complex:
            fh.write("time,re_mean,im_mean,stderr\n")
            for t, m, e in zip(series.times, series.mean, series.stderr):
                fh.write(f"{_fmt(t)},{_fmt(m.real)},{_fmt(m.imag)},{_fmt(e)}\n")
        else:
            fh.write("time,mean,stderr\n")
            for t, m, e in zip(series.times, series.mean, series.stderr):
                fh.write(f"{_fmt(t)},{_fmt(m)},{_fmt(e)}\n")
    return path


def read_csv(path, label: str | None = None) -> ObservableSeries:
    """Inverse of :func:`write_csv`."""
    path = Path(path)
    lines = path.read_text(encoding="utf-8").splitlines()
    header = lines[0].split(",")
    data = np.array([[float(v) for v in line.split(",")] for line in lines[1:]]).reshape(-1, len(header))
    if header == ["time", "re_mean", "im_mean", "stderr"]:
        mean = data[:, 1] + 1j * data[:, 2]
    elif header == ["time", "mean", "stderr"]:
        mean = data[:, 1]
    else:
        raise ValueError(f"unrecognized header in {path}")
    return ObservableSeries(data[:, 0], mean, data[:, -1], label or path.stem)


def write_spectrum_csv(spectrum: Spectrum | None, path) -> Path:
    path = Path(path)
    with path.open("w", encoding="utf-8", newline="\n") as fh:
        fh.write("omega,magnitude\n")
        if spectrum is not None:
            for w, a in zip(spectrum.omega, spectrum.magnitude):
                fh.write(f"{_fmt(w)},{_fmt(a)}\n")
    return path


def write_metadata(config: RunConfig, path, extra: dict) -> Path:
    path = Path(path)
    with path.open("w", encoding="utf-8", newline="\n") as fh:
        for key, value in {**config.describe(), **extra}.items():
            fh.write(f"{key} = {value}\n")
    return path


# ---------------------------------------------------------------- runs

def run_experiment(config: RunConfig) -> dict[str, Path]:
    """Propagate the ensemble of ``config`` and write every observable.

    Returns a mapping from observable name to the written file.

    Raises
    ------
    RunFailed
        If more than 1% of the samples hit a non-finite state.
    """
    params = config.params
    out = Path(config.output_dir)
    out.mkdir(parents=True, exist_ok=True)
    start = time.perf_counter()
    ensemble = run_ensemble(params, config.record_stride, config.workers)
    n_aborted = len(ensemble.aborted)
    if n_aborted > MAX_ABORT_FRACTION * params.n_mcs:
        raise RunFailed(f"{n_aborted} of {params.n_mcs} samples aborted")

    files = {}
    for name in SERIES_NAMES:
        files[name] = write_csv(observable_series(ensemble, name), out / f"{name}.csv")
    try:
        spectrum = fourier_spectrum(observable_series(ensemble, "popdiff"), SPECTRUM_T_MIN, config.spectrum_window)
    except InsufficientData as exc:
        log.warning("spectrum skipped: %s", exc)
        spectrum = None
    files["spectrum"] = write_spectrum_csv(spectrum, out / "spectrum.csv")
    extra = {
        "version": __version__,
        "aborted_samples": ",".join(map(str, ensemble.aborted)) or "none",
        "wall_time_s": f"{time.perf_counter() - start:.3f}",
    }
    files["metadata"] = write_metadata(config, out / "metadata.txt", extra)
    log.info("%s beta=%g done in %s s", config.mode, params.beta, extra["wall_time_s"])
    return files


def sweep_betas(beta0: float, count: int) -> list[float]:
    return [beta0 * (1 + l) for l in range(count)]


def sweep_beta(config: RunConfig) -> dict[tuple[int, str], dict | Exception]:
    """Run every (beta_l, mode) cell into ``output_dir/beta_<l>/mode_<name>/``.

    A failing cell is logged and reported in the result; the other cells still run.
    """
    if config.beta_sweep is None:
        raise ConfigError("beta_sweep is not set")
    results = {}
    for l, beta in enumerate(sweep_betas(*config.beta_sweep)):
        for mode in config.sweep_modes:
            cell = config.with_mode(mode)
            cell = dataclasses.replace(
                cell,
                params=dataclasses.replace(cell.params, beta=beta),
                output_dir=Path(config.output_dir) / f"beta_{l}" / f"mode_{mode}",
            )
            try:
                results[(l, mode)] = run_experiment(cell)
            except (RunFailed, ValueError, FloatingPointError, OSError) as exc:
                log.error("cell beta_%d/%s failed: %s", l, mode, exc)
                results[(l, mode)] = exc
    failed = sum(isinstance(r, Exception) for r in results.values())
    log.info("sweep finished: %d cells, %d failed", len(results), failed)
    return results


def main(argv=None) -> int:
    argv = sys.argv[1:] if argv is None else argv
    logging.basicConfig(level=logging.INFO if ("-v" in argv or "--verbose" in argv) else logging.WARNING)
    try:
        config = parse_config(argv)
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return 1
    try:
        if config.beta_sweep is not None:
            results = sweep_beta(config)
            if any(isinstance(r, Exception) for r in results.values()):
                return 2
        else:
            run_experiment(config)
    except (RunFailed, ValueError, FloatingPointError, OSError) as exc:
        print(f"run failed: {exc}", file=sys.stderr)
        return 2
    return 0


if __name__ == "__main__":
    sys.exit(main())

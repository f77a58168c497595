"""Ensemble estimators: traces, reduced density matrices, population difference,
trace-law residual and Fourier spectra.

All estimators are reductions over the per-sample arrays of an
:class:`~nhjunction.ensemble.EnsembleRecord`.  Standard errors are those of the
Monte Carlo sample mean; ratios of means use the first-order (delta method) error.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .ensemble import EnsembleRecord
from .errors import InsufficientData, VanishingTrace

# below this |trace| the normalized matrices are not defined
TRACE_FLOOR = 1e-12
MIN_SPECTRUM_POINTS = 16


@dataclass(frozen=True)
class QuantumMatrix2:
    """2x2 matrix estimate in the (upper, lower) adiabatic basis.

    ``values[a-1, b-1]`` is the (a, b) element; ``stderr`` has the same layout.
    The (2, 1) element is the conjugate of (1, 2) by construction.
    """

    values: np.ndarray
    stderr: np.ndarray

    def __post_init__(self):
        if np.shape(self.values) != (2, 2) or np.shape(self.stderr) != (2, 2):
            raise ValueError("QuantumMatrix2 needs 2x2 values and stderr")
        if not np.all(np.isfinite(self.values)):
            raise ValueError("non-finite matrix entry")

    def __getitem__(self, pair):
        a, b = pair
        return self.values[a - 1, b - 1]

    @property
    def trace(self) -> float:
        return float((self.values[0, 0] + self.values[1, 1]).real)


@dataclass(frozen=True)
class ObservableSeries:
    """Time series of an ensemble average with its standard error."""

    times: np.ndarray
    mean: np.ndarray
    stderr: np.ndarray
    label: str

    def __post_init__(self):
        times = np.asarray(self.times, dtype=float)
        if times.ndim != 1 or np.shape(self.mean) != times.shape or np.shape(self.stderr) != times.shape:
            raise ValueError("times, mean and stderr must be 1-d arrays of equal length")
        if times.size > 1 and np.any(np.diff(times) <= 0):
            raise ValueError("times must be strictly increasing")
        if np.any(np.asarray(self.stderr) < 0):
            raise ValueError("stderr must be >= 0")

    @property
    def is_complex(self) -> bool:
        return np.iscomplexobj(self.mean)

    def window(self, t_min: float) -> "ObservableSeries":
        keep = self.times >= t_min - 1e-9 * max(1.0, abs(t_min))
        return ObservableSeries(self.times[keep], self.mean[keep], self.stderr[keep], self.label)


@dataclass(frozen=True)
class Spectrum:
    """Magnitude ``|amplitude|`` versus angular frequency."""

    omega: np.ndarray
    magnitude: np.ndarray

    def peak(self, lo: float, hi: float) -> tuple[float, float]:
        """``(omega, magnitude)`` of the largest bin with ``lo <= omega < hi``."""
        sel = np.flatnonzero((self.omega >= lo) & (self.omega < hi))
        if sel.size == 0:
            raise InsufficientData(f"no frequency bins in [{lo}, {hi})")
        k = sel[np.argmax(self.magnitude[sel])]
        return float(self.omega[k]), float(self.magnitude[k])


def _sem(x, axis=0):
    """Standard error of the mean; zero for a single sample."""
    n = x.shape[axis]
    if n < 2:
        return np.zeros(np.delete(x.shape, axis))
    return np.std(x, axis=axis, ddof=1) / np.sqrt(n)


def _ratio(num, den):
    """Ratio of sample means and its delta-method standard error.

    ``num`` and ``den`` have samples along axis 0.  Complex ``num`` gets the
    modulus of the complex error.
    """
    n_bar = num.mean(axis=0)
    d_bar = den.mean(axis=0)
    if np.any(np.abs(d_bar) <= TRACE_FLOOR):
        raise VanishingTrace("ensemble trace below the numerical floor")
    r = n_bar / d_bar
    resid = (num - r * den) / d_bar
    return r, (_complex_sem(resid) if np.iscomplexobj(resid) else _sem(resid))


def _complex_sem(z):
    # |z - mean| spread, i.e. sqrt(sem(Re)^2 + sem(Im)^2)
    return np.hypot(_sem(z.real), _sem(z.imag))


def _matrix(c11, c22, c12, e11, e22, e12) -> QuantumMatrix2:
    values = np.array([[c11, c12], [np.conj(c12), c22]], dtype=complex)
    stderr = np.array([[e11, e12], [e12, e22]], dtype=float)
    return QuantumMatrix2(values, stderr)


def estimate_unnormalized(ensemble: EnsembleRecord, t: float) -> QuantumMatrix2:
    """Unnormalized reduced density matrix Xi(t), the sample mean of
    ``[Omega0]_aa' * weight_aa'(t)``.

    Raises
    ------
    IncompleteEnsemble
        If ``t`` is not on the recording grid.
    """
    k = ensemble.time_index(t)
    x11, x22, x12 = ensemble.xi11[:, k], ensemble.xi22[:, k], ensemble.xi12[:, k]
    return _matrix(x11.mean(), x22.mean(), x12.mean(), _sem(x11), _sem(x22), _complex_sem(x12))


def trace_omega(ensemble: EnsembleRecord, t: float) -> tuple[float, float]:
    """``Xi_11(t) + Xi_22(t)`` and its standard error."""
    k = ensemble.time_index(t)
    tr = ensemble.xi11[:, k] + ensemble.xi22[:, k]
    return float(tr.mean()), float(_sem(tr))


def estimate_normalized(ensemble: EnsembleRecord, t: float) -> QuantumMatrix2:
    """Xi(t) divided by its trace; the result has trace 1 up to roundoff.

    Raises
    ------
    VanishingTrace
        If the ensemble trace is at or below ``TRACE_FLOOR``.
    """
    k = ensemble.time_index(t)
    x11, x22, x12 = ensemble.xi11[:, k], ensemble.xi22[:, k], ensemble.xi12[:, k]
    tr = x11 + x22
    c11, e11 = _ratio(x11, tr)
    c22, e22 = _ratio(x22, tr)
    c12, e12 = _ratio(x12, tr)
    return _matrix(c11, c22, c12, e11, e22, e12)


def population_difference(ensemble: EnsembleRecord, t: float) -> tuple[float, float]:
    """Normalized expectation of the lead sigma_z, evaluated at the evolved points."""
    k = ensemble.time_index(t)
    value, err = _ratio(ensemble.popdiff[:, k], ensemble.xi11[:, k] + ensemble.xi22[:, k])
    return float(value), float(err)


def coherence(ensemble: EnsembleRecord, t: float) -> tuple[complex, float]:
    """Normalized off-diagonal element ``X_12(t)``; ``X_21`` is its conjugate."""
    m = estimate_normalized(ensemble, t)
    return complex(m[1, 2]), float(m.stderr[0, 1])


# whole-grid versions used by the writers

def _series_mean(ensemble, x, label):
    err = _complex_sem(x) if np.iscomplexobj(x) else _sem(x)
    return ObservableSeries(ensemble.times, x.mean(axis=0), err, label)


def _series_ratio(ensemble, x, label):
    value, err = _ratio(x, ensemble.xi11 + ensemble.xi22)
    return ObservableSeries(ensemble.times, value, err, label)


def observable_series(ensemble: EnsembleRecord, name: str) -> ObservableSeries:
    """Series for one of ``SERIES_NAMES`` over the whole recording grid."""
    if name == "trace":
        return _series_mean(ensemble, ensemble.xi11 + ensemble.xi22, name)
    if name == "xi11":
        return _series_mean(ensemble, ensemble.xi11, name)
    if name == "xi22":
        return _series_mean(ensemble, ensemble.xi22, name)
    if name == "chi11":
        return _series_ratio(ensemble, ensemble.xi11, name)
    if name == "chi22":
        return _series_ratio(ensemble, ensemble.xi22, name)
    if name == "re_chi12":
        s = _series_ratio(ensemble, ensemble.xi12, name)
        return ObservableSeries(s.times, s.mean.real, s.stderr, name)
    if name == "chi12":
        return _series_ratio(ensemble, ensemble.xi12, name)
    if name == "popdiff":
        return _series_ratio(ensemble, ensemble.popdiff, name)
    raise KeyError(f"unknown observable {name!r}")


SERIES_NAMES = ("trace", "xi11", "xi22", "chi11", "chi22", "re_chi12", "popdiff")


def trace_law_residual(ensemble: EnsembleRecord, times=None) -> ObservableSeries:
    """Residual ``dTr/dt + gamma * Xi_11`` on a uniform grid.

    The derivative is a central difference on ``times`` (default: the recording
    grid), so the residual lives on the interior points.  ``stderr`` is the
    combined error bound: the Monte Carlo error of the per-sample residual plus the
    central-difference truncation estimate ``h^2/6 |Tr'''|``, with ``Tr'''`` from
    the five-point third difference (edge points reuse the neighbouring value).
    """
    params = ensemble.params
    if times is None:
        idx = np.arange(len(ensemble.times))
    else:
        idx = np.array([ensemble.time_index(t) for t in np.asarray(times, dtype=float)])
    if idx.size < 3:
        raise InsufficientData("trace-law residual needs at least 3 grid points")
    grid = ensemble.times[idx]
    h = np.diff(grid)
    if not np.allclose(h, h[0], rtol=1e-9, atol=0.0):
        raise ValueError("trace-law grid must be uniform")
    h = h[0]

    tr = ensemble.xi11[:, idx] + ensemble.xi22[:, idx]
    gamma = params.gamma if params.decay_enabled else 0.0
    per_sample = (tr[:, 2:] - tr[:, :-2]) / (2.0 * h) + gamma * ensemble.xi11[:, idx[1:-1]]
    stat = _sem(per_sample)

    mean_tr = tr.mean(axis=0)
    disc = np.zeros(idx.size - 2)
    if idx.size >= 5:
        third = (mean_tr[4:] - 2.0 * mean_tr[3:-1] + 2.0 * mean_tr[1:-3] - mean_tr[:-4]) / (2.0 * h**3)
        # the two edge points reuse their neighbour's estimate
        disc[:] = h**2 / 6.0 * np.abs(np.pad(third, 1, mode="edge"))
    return ObservableSeries(grid[1:-1], per_sample.mean(axis=0), stat + disc, "trace_law_residual")


def fourier_spectrum(series: ObservableSeries, t_min: float = 20.0, window: str | None = None) -> Spectrum:
    """Amplitude spectrum of a real series restricted to ``t >= t_min``.

    The mean over the window is removed, then a real DFT is taken.  Magnitudes are
    scaled so that a cosine of amplitude A on a grid frequency gives A.  ``window``
    is ``None`` (rectangular) or ``"hann"``.

    Raises
    ------
    InsufficientData
        If fewer than ``MIN_SPECTRUM_POINTS`` points remain.
    """
    if series.is_complex:
        raise TypeError("spectrum needs a real series")
    part = series.window(t_min)
    n = part.times.size
    if n < MIN_SPECTRUM_POINTS:
        raise InsufficientData(f"{n} points after t={t_min}, need {MIN_SPECTRUM_POINTS}")
    dt = np.diff(part.times)
    if not np.allclose(dt, dt[0], rtol=1e-9, atol=0.0):
        raise ValueError("spectrum needs a uniform time grid")
    y = np.asarray(part.mean, dtype=float)
    y = y - y.mean()
    if window is None:
        taper = np.ones(n)
    elif window == "hann":
        taper = np.hanning(n)
    else:
        raise ValueError(f"unknown window {window!r}")
    amplitude = np.abs(np.fft.rfft(y * taper)) * (2.0 / taper.sum())
    # DC and (even n) Nyquist bins have no mirror partner
    amplitude[0] *= 0.5
    if n % 2 == 0:
        amplitude[-1] *= 0.5
    omega = 2.0 * np.pi * np.fft.rfftfreq(n, dt[0])
    return Spectrum(omega, amplitude)

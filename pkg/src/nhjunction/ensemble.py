"""Monte Carlo ensemble propagation.

Samples are split into fixed-size blocks that do not depend on the number of
workers.  Every block is propagated as one vectorized array of shape
``(3, block)``: rows are the trajectories of elements (1,1), (2,2) and (1,2).
Blocks are concatenated in index order, so results are bitwise identical for any
worker count.
"""

from __future__ import annotations

import logging
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field

import numpy as np

from . import model
from .dynamics import ExtendedPoint, _advance
from .model import AdiabaticPair, ModelParams
from .sampling import draw_initial_ensemble

log = logging.getLogger(__name__)

BLOCK_SIZE = 1024
PAIRS = (AdiabaticPair(1, 1), AdiabaticPair(2, 2), AdiabaticPair(1, 2))
_SIGNS = np.array([[p.surface_sign] for p in PAIRS])


@dataclass
class EnsembleRecord:
    """Per-sample contributions on the recording grid, shape ``(n_samples, n_times)``.

    ``xi11``, ``xi22``, ``xi12``
        ``[Omega0]_aa' * weight_aa'(t) * J(t)`` where ``J`` is the phase-space volume
        carried by the sample (see :func:`propagate_block`).
    ``popdiff``
        ``sum_aa' xi_aa'(t) [sigma_z(Q_aa'(t))]_a'a``.
    ``p_squared``
        ``P^2`` averaged over the three element trajectories.
    """

    params: ModelParams
    times: np.ndarray
    xi11: np.ndarray
    xi22: np.ndarray
    xi12: np.ndarray
    popdiff: np.ndarray
    p_squared: np.ndarray
    sample_indices: np.ndarray
    aborted: list[int] = field(default_factory=list)

    @property
    def n_samples(self) -> int:
        return self.xi11.shape[0]

    def time_index(self, t: float) -> int:
        from .errors import IncompleteEnsemble

        hits = np.flatnonzero(np.isclose(self.times, t, rtol=0.0, atol=1e-9 * max(1.0, abs(t))))
        if hits.size == 0:
            raise IncompleteEnsemble(f"no snapshot at t={t}")
        return int(hits[0])


def record_steps(n_step: int, record_stride: int) -> np.ndarray:
    steps = np.arange(0, n_step + 1, record_stride)
    if steps[-1] != n_step:
        steps = np.append(steps, n_step)
    return steps


def _decay_rates(params: ModelParams) -> np.ndarray:
    return np.array([[model.decay_rate(p, params)] for p in PAIRS])


def propagate_block(params: ModelParams, indices, record_stride: int) -> dict:
    """Propagate the samples ``indices``; returns per-sample contribution arrays.

    The estimators integrate over phase space by transporting the Monte Carlo
    points.  A point carries the volume ``J = exp(int kappa dt)`` while the density
    element on it is multiplied by ``exp(-int kappa dt)``; the product keeps only
    the phase and decay factors.  Both factors are tracked separately anyway so
    the cancellation is explicit.
    """
    indices = np.asarray(indices)
    n = len(indices)
    x0, omega0 = draw_initial_ensemble(params, indices)
    x = ExtendedPoint(*(np.repeat(np.asarray(c, float)[None, :], 3, axis=0) for c in x0.as_array()))
    steps = record_steps(params.n_step, record_stride)
    n_t = len(steps)
    out = {name: np.empty((n, n_t)) for name in ("xi11", "xi22", "popdiff", "p_squared")}
    out["xi12"] = np.empty((n, n_t), dtype=complex)
    alive = np.ones(n, dtype=bool)

    tau = params.tau
    decay_dt = _decay_rates(params) * tau
    log_w = np.zeros((3, n), dtype=complex)
    log_volume = np.zeros((3, n))

    def record(k):
        nonlocal alive
        finite = np.all(np.isfinite(x.as_array()), axis=(0, 1)) & np.all(np.isfinite(log_w), axis=0)
        alive &= finite
        measure = np.exp(log_w + log_volume)
        c11 = omega0[:, 0, 0].real * measure[0].real
        c22 = omega0[:, 1, 1].real * measure[1].real
        c12 = omega0[:, 0, 1] * measure[2]
        sz1 = model.sigma_z_adiabatic(x.Q[0], params)
        sz2 = model.sigma_z_adiabatic(x.Q[1], params)
        szm = model.sigma_z_adiabatic(x.Q[2], params)
        out["xi11"][:, k] = c11
        out["xi22"][:, k] = c22
        out["xi12"][:, k] = c12
        out["popdiff"][:, k] = c11 * sz1[:, 0, 0] + c22 * sz2[:, 1, 1] + 2.0 * (c12 * szm[:, 1, 0]).real
        out["p_squared"][:, k] = np.mean(x.P**2, axis=0)

    record(0)
    k = 1
    with np.errstate(over="ignore", invalid="ignore"):
        for n_done in range(1, params.n_step + 1):
            x, mid, kappa_dt = _advance(x, _SIGNS, params, tau)
            log_w.real -= decay_dt + kappa_dt
            log_volume += kappa_dt
            log_w[2].imag -= model.bohr_frequency(mid.Q[2], PAIRS[2], params) * tau
            if n_done == steps[k]:
                record(k)
                k += 1
    out["alive"] = alive
    return out


def _block_job(args):
    params, indices, record_stride = args
    return propagate_block(params, indices, record_stride)


def run_ensemble(params: ModelParams, record_stride: int = 10, workers: int = 1) -> EnsembleRecord:
    """Propagate ``params.n_mcs`` samples and collect their contributions."""
    if record_stride < 1:
        raise ValueError("record_stride must be >= 1")
    all_indices = np.arange(params.n_mcs)
    blocks = [all_indices[i : i + BLOCK_SIZE] for i in range(0, params.n_mcs, BLOCK_SIZE)]
    jobs = [(params, b, record_stride) for b in blocks]
    if workers > 1 and len(blocks) > 1:
        with ProcessPoolExecutor(max_workers=workers) as pool:
            results = list(pool.map(_block_job, jobs))
    else:
        results = [_block_job(j) for j in jobs]

    alive = np.concatenate([r["alive"] for r in results])
    aborted = [int(i) for i in all_indices[~alive]]
    if aborted:
        log.warning("%d of %d samples aborted on non-finite state", len(aborted), params.n_mcs)

    def gather(name):
        return np.concatenate([r[name] for r in results])[alive]

    times = record_steps(params.n_step, record_stride) * params.tau
    return EnsembleRecord(
        params=params,
        times=times,
        xi11=gather("xi11"),
        xi22=gather("xi22"),
        xi12=gather("xi12"),
        popdiff=gather("popdiff"),
        p_squared=gather("p_squared"),
        sample_indices=all_indices[alive],
        aborted=aborted,
    )

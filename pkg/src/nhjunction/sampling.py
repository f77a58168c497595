"""Seeded initial ensemble: thermal oscillator, thermostat momenta, initial quantum state.

Each Monte Carlo sample owns an independent generator keyed by
``derive_sample_seed(master_seed, index)``, so a sample's draws do not depend on
how the ensemble is partitioned across workers.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from . import model
from .dynamics import ExtendedPoint
from .model import ModelParams

_GOLDEN = 0x9E3779B97F4A7C15


def _splitmix64(z):
    """SplitMix64 finalizer on uint64 ndarrays (wrapping arithmetic)."""
    z = np.array(z, dtype=np.uint64, ndmin=1)
    z = z + np.uint64(_GOLDEN)
    z = (z ^ (z >> np.uint64(30))) * np.uint64(0xBF58476D1CE4E5B9)
    z = (z ^ (z >> np.uint64(27))) * np.uint64(0x94D049BB133111EB)
    return z ^ (z >> np.uint64(31))


def derive_sample_seed(master_seed, sample_index):
    """64-bit seed for one sample: ``mix(master ^ mix(index))``.

    Both mixing stages are bijections of the 64-bit integers, so distinct indices
    never collide under a fixed master seed.  Accepts ints or integer arrays.
    """
    master = np.asarray(master_seed).astype(np.uint64)
    index = np.asarray(sample_index).astype(np.uint64)
    out = _splitmix64(master ^ _splitmix64(index))
    return int(out[0]) if index.ndim == 0 and master.ndim == 0 else out


def bath_variances(params: ModelParams) -> tuple[float, float]:
    """``(Var Q, Var P)`` of the initial oscillator distribution.

    ``standard_wigner`` is the normalized thermal Wigner function,
    ``exp(-2 tanh(beta w/2)/w * H)``; ``as_printed`` drops the factor 2 in the
    exponent, which doubles both variances.
    """
    t = np.tanh(0.5 * params.beta * params.omega)
    scale = 2.0 if params.bath_distribution == "standard_wigner" else 1.0
    var_p = params.omega / (scale * t)
    var_q = 1.0 / (scale * params.omega * t)
    return var_q, var_p


def sample_bath(params: ModelParams, rng: np.random.Generator):
    var_q, var_p = bath_variances(params)
    z = rng.standard_normal(2)
    return z[0] * np.sqrt(var_q), z[1] * np.sqrt(var_p)


def sample_thermostat(params: ModelParams, rng: np.random.Generator):
    """``(Lambda1, Lambda2, Pi1, Pi2)``; positions start at zero.

    Momenta are always drawn, so that switching the thermostat off does not shift
    the bath draws of later samples.
    """
    z = rng.standard_normal(2)
    if not params.nhc_enabled:
        return 0.0, 0.0, 0.0, 0.0
    if params.thermostat_momentum_variance == "thermal":
        sd1, sd2 = np.sqrt(params.mu1 * params.kT), np.sqrt(params.mu2 * params.kT)
    else:
        sd1 = sd2 = 1.0
    return 0.0, 0.0, z[0] * sd1, z[1] * sd2


def initial_quantum_matrix(Q, params: ModelParams) -> np.ndarray:
    """Initial density matrix in the (upper, lower) adiabatic basis at ``Q``.

    ``diabatic_ground``: projector on the ground state of ``-delta sigma_z``; equals
    ``diag(0, 1)`` wherever the adiabatic and lead bases coincide (Q = 0 or c = 0).
    ``adiabatic_superposition``: the equal-weight pure state ``(|1> + |2>)/sqrt(2)``.
    """
    Q = np.asarray(Q, dtype=float)
    m = np.empty(Q.shape + (2, 2), dtype=complex)
    if params.initial_state == "adiabatic_superposition":
        m[...] = 0.5
        return m
    half = 0.5 * model.mixing_angle(Q, params)
    # overlaps of the lead ground state with (upper, lower)
    v1, v2 = -np.sin(half), np.cos(half)
    m[..., 0, 0] = v1 * v1
    m[..., 0, 1] = m[..., 1, 0] = v1 * v2
    m[..., 1, 1] = v2 * v2
    return m


@dataclass(frozen=True)
class InitialSample:
    point: ExtendedPoint
    omega0: np.ndarray
    sample_index: int


def draw_initial_sample(params: ModelParams, sample_index: int) -> InitialSample:
    rng = np.random.default_rng(derive_sample_seed(params.seed, sample_index))
    Q, P = sample_bath(params, rng)
    L1, L2, Pi1, Pi2 = sample_thermostat(params, rng)
    point = ExtendedPoint(float(Q), float(P), L1, L2, float(Pi1), float(Pi2))
    return InitialSample(point, initial_quantum_matrix(Q, params), sample_index)


def draw_initial_ensemble(params: ModelParams, indices) -> tuple[ExtendedPoint, np.ndarray]:
    """Initial points (coordinate arrays) and quantum matrices for ``indices``."""
    coords = np.empty((6, len(indices)))
    for k, i in enumerate(indices):
        coords[:, k] = draw_initial_sample(params, int(i)).point.as_array()
    return ExtendedPoint.from_array(coords), initial_quantum_matrix(coords[0], params)

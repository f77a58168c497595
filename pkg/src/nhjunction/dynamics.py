"""Nose-Hoover chain flow in extended phase space and jump-free propagation of
density-matrix elements.

A point of the extended phase space is ``(Q, P, Lambda1, Lambda2, Pi1, Pi2)``.  The
flow is ``dX/dt = B(X) grad H(X)`` with the antisymmetric, point-dependent matrix
``B``, which for one thermostatted mode and a chain of length two gives::

    dQ/dt   = P
    dP/dt   = F - P Pi1/mu1
    dL1/dt  = Pi1/mu1
    dL2/dt  = Pi2/mu2
    dPi1/dt = P^2 - kT - Pi1 Pi2/mu2
    dPi2/dt = Pi1^2/mu1 - kT

Each element (a, a') of the density matrix rides its own trajectory driven by the
mean force (F_a + F_a')/2 and accumulates the complex weight
``exp(-int (i w_aa' + g_aa' + kappa) dt)``.

All functions broadcast over ndarray-valued point coordinates, so one call can
advance a whole ensemble.
"""

from __future__ import annotations

from dataclasses import dataclass, fields

import numpy as np

from . import model
from .errors import NonFiniteState
from .model import AdiabaticPair, ModelParams

# fourth-order Suzuki-Yoshida weights for the thermostat sub-propagator
_W1 = 1.0 / (2.0 - 2.0 ** (1.0 / 3.0))
_YOSHIDA = (_W1, 1.0 - 2.0 * _W1, _W1)


@dataclass(frozen=True)
class ExtendedPoint:
    Q: np.ndarray | float
    P: np.ndarray | float
    Lambda1: np.ndarray | float = 0.0
    Lambda2: np.ndarray | float = 0.0
    Pi1: np.ndarray | float = 0.0
    Pi2: np.ndarray | float = 0.0

    def as_array(self) -> np.ndarray:
        """Coordinates stacked along a leading axis of length 6."""
        return np.stack(np.broadcast_arrays(*(np.asarray(getattr(self, f.name), float) for f in fields(self))))

    @classmethod
    def from_array(cls, a) -> "ExtendedPoint":
        return cls(*np.asarray(a, dtype=float))

    def is_finite(self) -> bool:
        return bool(np.all(np.isfinite(self.as_array())))


@dataclass(frozen=True)
class ElementTrajectory:
    """Snapshot of one density-matrix element's trajectory."""

    pair: AdiabaticPair
    point: ExtendedPoint
    weight: complex | np.ndarray
    elapsed: float


def extended_vector_field(x: ExtendedPoint, mean_force, params: ModelParams) -> ExtendedPoint:
    """Time derivative of ``x``; ``mean_force`` is (F_a + F_a')/2 at ``x.Q``."""
    Q, P = np.asarray(x.Q, float), np.asarray(x.P, float)
    if not params.nhc_enabled:
        zero = np.zeros_like(Q * P)
        return ExtendedPoint(P + 0.0 * Q, mean_force + 0.0 * P, zero, zero, zero, zero)
    kT = params.kT
    v1 = x.Pi1 / params.mu1
    v2 = x.Pi2 / params.mu2
    return ExtendedPoint(
        Q=P + 0.0 * Q,
        P=mean_force - P * v1,
        Lambda1=v1 + 0.0 * Q,
        Lambda2=v2 + 0.0 * Q,
        Pi1=P**2 - kT - x.Pi1 * v2,
        Pi2=x.Pi1 * v1 - kT + 0.0 * Q,
    )


def compressibility(x: ExtendedPoint, params: ModelParams):
    """Divergence of the flow, ``-Pi1/mu1 - Pi2/mu2`` (zero without thermostat)."""
    if not params.nhc_enabled:
        return np.zeros_like(np.asarray(x.Q, dtype=float))
    return -np.asarray(x.Pi1) / params.mu1 - np.asarray(x.Pi2) / params.mu2


def conserved_energy(x: ExtendedPoint, pair: AdiabaticPair, params: ModelParams):
    """Extended Hamiltonian on the mean surface of ``pair``; conserved by the exact flow."""
    sign = AdiabaticPair(*pair).check().surface_sign
    return _extended_energy(x, sign, params)


def _extended_energy(x: ExtendedPoint, sign, params: ModelParams):
    energy = 0.5 * np.asarray(x.P) ** 2 + model.surface_potential(x.Q, sign, params)
    if params.nhc_enabled:
        energy = (
            energy
            + 0.5 * np.asarray(x.Pi1) ** 2 / params.mu1
            + 0.5 * np.asarray(x.Pi2) ** 2 / params.mu2
            + params.kT * (np.asarray(x.Lambda1) + np.asarray(x.Lambda2))
        )
    return energy


def _thermostat_flow(P, L1, L2, Pi1, Pi2, dt, params: ModelParams):
    """Thermostat sub-flow over ``dt``: (P, Lambda, Pi) move, Q is frozen.

    ``thermostat_substeps`` repetitions of a fourth-order Suzuki-Yoshida triple of
    symmetric substeps; within a substep Pi2 kick, Pi1 damp-kick-damp, P scaling
    with Lambda drift, then the mirror image.
    Inputs are not modified.
    """
    kT, mu1, mu2 = params.kT, params.mu1, params.mu2
    P, L1, L2 = np.array(P, dtype=float), np.array(L1, dtype=float), np.array(L2, dtype=float)
    Pi1, Pi2 = np.array(Pi1, dtype=float), np.array(Pi2, dtype=float)
    tmp = np.empty_like(P * Pi1 * Pi2)
    damp = np.empty_like(tmp)
    ns = params.thermostat_substeps

    def kick_pi2(h):
        np.multiply(Pi1, Pi1, out=tmp)
        np.subtract(tmp, mu1 * kT, out=tmp)
        np.multiply(tmp, 0.5 * h / mu1, out=tmp)
        np.add(Pi2, tmp, out=Pi2)

    def update_pi1(h):
        np.multiply(Pi1, damp, out=Pi1)
        np.multiply(P, P, out=tmp)
        np.subtract(tmp, kT, out=tmp)
        np.multiply(tmp, 0.5 * h, out=tmp)
        np.add(Pi1, tmp, out=Pi1)
        np.multiply(Pi1, damp, out=Pi1)

    for _ in range(ns):
        for weight in _YOSHIDA:
            h = weight * dt / ns
            kick_pi2(h)
            np.multiply(Pi2, -0.25 * h / mu2, out=damp)
            np.exp(damp, out=damp)
            update_pi1(h)
            L1 += Pi1 * (h / mu1)
            L2 += Pi2 * (h / mu2)
            np.multiply(Pi1, -h / mu1, out=tmp)
            np.exp(tmp, out=tmp)
            P *= tmp
            update_pi1(h)
            kick_pi2(h)
    return P, L1, L2, Pi1, Pi2


def _advance(x: ExtendedPoint, sign, params: ModelParams, tau: float):
    """One splitting step; returns ``(new_point, midpoint, kappa_dt)``.

    Order: thermostat(tau/2), velocity Verlet core, thermostat(tau/2).  ``midpoint``
    is the state halfway through the drift.  ``kappa_dt`` is the compressibility
    integrated over the step along the discrete flow, ``-(dLambda1 + dLambda2)``.
    """
    Q, P = x.Q, x.P
    L1, L2, Pi1, Pi2 = x.Lambda1, x.Lambda2, x.Pi1, x.Pi2
    nhc = params.nhc_enabled
    if nhc:
        P, L1, L2, Pi1, Pi2 = _thermostat_flow(P, L1, L2, Pi1, Pi2, 0.5 * tau, params)
    P = P + model.surface_force(Q, sign, params) * (0.5 * tau)
    mid = ExtendedPoint(Q + P * (0.5 * tau), P, L1, L2, Pi1, Pi2)
    Q = Q + P * tau
    P = P + model.surface_force(Q, sign, params) * (0.5 * tau)
    if nhc:
        P, L1, L2, Pi1, Pi2 = _thermostat_flow(P, L1, L2, Pi1, Pi2, 0.5 * tau, params)
        kappa_dt = -((L1 - x.Lambda1) + (L2 - x.Lambda2))
    else:
        kappa_dt = 0.0
    return ExtendedPoint(Q, P, L1, L2, Pi1, Pi2), mid, kappa_dt


def step_with_midpoint(x: ExtendedPoint, pair: AdiabaticPair, params: ModelParams, tau: float | None = None):
    """Like :func:`step`, also returning the mid-drift point and the step's
    integrated compressibility."""
    sign = AdiabaticPair(*pair).check().surface_sign
    with np.errstate(over="ignore", invalid="ignore"):
        new, mid, kappa_dt = _advance(x, sign, params, params.tau if tau is None else tau)
    if not new.is_finite():
        raise NonFiniteState("integrator produced a non-finite state")
    return new, mid, kappa_dt


def step(x: ExtendedPoint, pair: AdiabaticPair, params: ModelParams, tau: float | None = None) -> ExtendedPoint:
    """Advance ``x`` by one time step on the mean surface of ``pair``.

    Symmetric Trotter splitting (thermostat half-step, velocity Verlet core,
    thermostat half-step); second order, and exactly time reversible without the
    thermostat.  ``tau`` defaults to ``params.tau``; a negative value steps backwards.

    Raises
    ------
    NonFiniteState
        If any coordinate of the result is NaN or infinite.
    """
    return step_with_midpoint(x, pair, params, tau)[0]


def log_weight_increment(x_mid, pair: AdiabaticPair, params: ModelParams, kappa_dt=None, tau=None):
    """Exponent ``-(i w_aa'(Q_mid) + g_aa') tau - int kappa dt`` for one step.

    ``kappa_dt`` is the compressibility integrated over the step as returned by
    :func:`step_with_midpoint`; when omitted it is approximated by ``kappa(x_mid) tau``.
    """
    tau = params.tau if tau is None else tau
    pair = AdiabaticPair(*pair).check()
    if kappa_dt is None:
        kappa_dt = compressibility(x_mid, params) * tau
    exponent = -model.decay_rate(pair, params) * tau - np.asarray(kappa_dt, dtype=float)
    if pair.diagonal:
        return exponent + 0j
    return exponent - 1j * model.bohr_frequency(x_mid.Q, pair, params) * tau


def weight_increment(x_mid, pair: AdiabaticPair, params: ModelParams, kappa_dt=None, tau=None):
    """Per-step propagator factor ``exp(-(i w_aa' + g_aa' + kappa) tau)``."""
    return np.exp(log_weight_increment(x_mid, pair, params, kappa_dt, tau))


def propagate_element(
    x0: ExtendedPoint,
    pair: AdiabaticPair,
    params: ModelParams,
    record_stride: int = 1,
) -> list[ElementTrajectory]:
    """Jump-free short-time propagation of one density-matrix element.

    Runs ``params.n_step`` steps from ``x0`` on the mean surface of ``pair`` and
    returns snapshots every ``record_stride`` steps, always including t = 0 and the
    final step.  The weight starts at 1 and is accumulated in exponent form.
    """
    if record_stride < 1:
        raise ValueError("record_stride must be >= 1")
    if not x0.is_finite():
        raise NonFiniteState("initial point is not finite")
    pair = AdiabaticPair(*pair).check()
    sign = pair.surface_sign
    x = x0
    log_w = np.zeros(np.shape(np.asarray(x0.Q)), dtype=complex)
    snapshots = [ElementTrajectory(pair, x, np.exp(log_w), 0.0)]
    for n in range(1, params.n_step + 1):
        x, mid, kappa_dt = _advance(x, sign, params, params.tau)
        if not x.is_finite():
            raise NonFiniteState(f"non-finite state at step {n}")
        log_w = log_w + log_weight_increment(mid, pair, params, kappa_dt)
        if n % record_stride == 0 or n == params.n_step:
            snapshots.append(ElementTrajectory(pair, x, np.exp(log_w), n * params.tau))
    return snapshots

"""Two-level junction coupled to a harmonic mode: Hamiltonians and adiabatic quantities.

Index convention used everywhere in the package: adiabatic state 1 is the upper
surface (the one attached to the sink), state 2 is the lower surface.

Every function accepts a scalar or an ndarray for ``Q`` and broadcasts.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import NamedTuple

import numpy as np

from .errors import DegenerateJump

UPPER = 1
LOWER = 2

BATH_DISTRIBUTIONS = ("standard_wigner", "as_printed")
THERMOSTAT_MOMENTUM_VARIANCES = ("thermal", "unit")
INITIAL_STATES = ("diabatic_ground", "adiabatic_superposition")


@dataclass(frozen=True)
class ModelParams:
    """Physical and numerical constants (adimensional, hbar = k_B = 1)."""

    delta: float = 1.0
    omega: float = 1.0 / 3.0
    coupling: float = 0.007
    gamma: float = 0.1
    beta: float = 0.005
    mu1: float = 1.0
    mu2: float = 1.0
    tau: float = 0.005
    n_step: int = 10_000
    n_mcs: int = 2500
    seed: int = 42
    nhc_enabled: bool = False
    decay_enabled: bool = False
    # sampling options
    bath_distribution: str = "standard_wigner"
    thermostat_momentum_variance: str = "thermal"
    initial_state: str = "diabatic_ground"
    # Suzuki-Yoshida substeps inside each thermostat half-step
    thermostat_substeps: int = 4

    def __post_init__(self):
        positive = ("delta", "omega", "beta", "mu1", "mu2", "tau")
        for name in positive:
            value = getattr(self, name)
            if not np.isfinite(value) or value <= 0:
                raise ValueError(f"{name} must be > 0")
        if not np.isfinite(self.gamma) or self.gamma < 0:
            raise ValueError("gamma must be >= 0")
        if not np.isfinite(self.coupling):
            raise ValueError("coupling must be finite")
        if self.n_step < 1:
            raise ValueError("n_step must be >= 1")
        if self.n_mcs < 1:
            raise ValueError("n_mcs must be >= 1")
        if self.thermostat_substeps < 1:
            raise ValueError("thermostat_substeps must be >= 1")
        if not 0 <= self.seed < 2**64:
            raise ValueError("seed must be a 64-bit unsigned integer")
        if self.bath_distribution not in BATH_DISTRIBUTIONS:
            raise ValueError(f"bath_distribution must be one of {BATH_DISTRIBUTIONS}")
        if self.thermostat_momentum_variance not in THERMOSTAT_MOMENTUM_VARIANCES:
            raise ValueError(
                f"thermostat_momentum_variance must be one of {THERMOSTAT_MOMENTUM_VARIANCES}"
            )
        if self.initial_state not in INITIAL_STATES:
            raise ValueError(f"initial_state must be one of {INITIAL_STATES}")

    @property
    def kT(self) -> float:
        return 1.0 / self.beta


class AdiabaticPair(NamedTuple):
    """Density-matrix element label (alpha, alpha') with indices in {1, 2}."""

    alpha: int
    alpha_prime: int

    def check(self) -> "AdiabaticPair":
        if self.alpha not in (1, 2) or self.alpha_prime not in (1, 2):
            raise ValueError(f"adiabatic indices must be 1 or 2, got {tuple(self)}")
        return self

    @property
    def diagonal(self) -> bool:
        return self.alpha == self.alpha_prime

    @property
    def surface_sign(self) -> float:
        """+1 for the upper surface, -1 for the lower one, 0 for the mean surface."""
        return 0.5 * (_state_sign(self.alpha) + _state_sign(self.alpha_prime))


def _state_sign(alpha: int) -> float:
    if alpha == UPPER:
        return 1.0
    if alpha == LOWER:
        return -1.0
    raise ValueError(f"adiabatic index must be 1 or 2, got {alpha}")


def _gap_half(Q, params: ModelParams):
    """sqrt(delta^2 + c^2 Q^2), half the adiabatic gap."""
    return np.hypot(params.delta, params.coupling * np.asarray(Q, dtype=float))


def diabatic_hamiltonian(Q, params: ModelParams) -> np.ndarray:
    """Q-dependent part of the adiabatic Hamiltonian in the lead (sigma_z) basis.

    Returns ``-delta*sigma_z - c*Q*sigma_x + (omega^2 Q^2 / 2) * 1`` with shape
    ``Q.shape + (2, 2)``.
    """
    Q = np.asarray(Q, dtype=float)
    harmonic = 0.5 * params.omega**2 * Q**2
    h = np.empty(Q.shape + (2, 2))
    h[..., 0, 0] = harmonic - params.delta
    h[..., 1, 1] = harmonic + params.delta
    h[..., 0, 1] = h[..., 1, 0] = -params.coupling * Q
    return h


def adiabatic_energies(Q, params: ModelParams):
    """Closed-form eigenvalues ``(E_lower, E_upper)`` of :func:`diabatic_hamiltonian`."""
    Q = np.asarray(Q, dtype=float)
    harmonic = 0.5 * params.omega**2 * Q**2
    r = _gap_half(Q, params)
    return harmonic - r, harmonic + r


def surface_energy(Q, alpha: int, params: ModelParams):
    """E_alpha(Q) with the package index convention (1 = upper, 2 = lower)."""
    Q = np.asarray(Q, dtype=float)
    return 0.5 * params.omega**2 * Q**2 + _state_sign(alpha) * _gap_half(Q, params)


def mixing_angle(Q, params: ModelParams):
    """Angle theta in (-pi/2, pi/2) with tan(theta) = c Q / delta.

    The adiabatic eigenvectors in the lead basis are
    ``lower = (cos(theta/2), sin(theta/2))`` and ``upper = (-sin(theta/2), cos(theta/2))``,
    both continuous in Q.
    """
    return np.arctan2(params.coupling * np.asarray(Q, dtype=float), params.delta)


def adiabatic_basis(Q, params: ModelParams) -> np.ndarray:
    """Orthogonal matrix whose columns are (upper, lower) eigenvectors in the lead basis."""
    half = 0.5 * mixing_angle(Q, params)
    c, s = np.cos(half), np.sin(half)
    U = np.empty(np.shape(half) + (2, 2))
    U[..., 0, 0], U[..., 1, 0] = -s, c
    U[..., 0, 1], U[..., 1, 1] = c, s
    return U


def hellmann_feynman_force(Q, alpha: int, params: ModelParams):
    """F_alpha(Q) = -dE_alpha/dQ."""
    Q = np.asarray(Q, dtype=float)
    return -(params.omega**2) * Q - _state_sign(alpha) * params.coupling**2 * Q / _gap_half(Q, params)


def mean_force(Q, pair: AdiabaticPair, params: ModelParams):
    """(F_alpha + F_alpha') / 2, the force driving the trajectory of element ``pair``."""
    return surface_force(Q, AdiabaticPair(*pair).check().surface_sign, params)


def surface_force(Q, sign, params: ModelParams):
    """Force on the surface ``omega^2 Q^2/2 + sign * sqrt(delta^2 + c^2 Q^2)``."""
    Q = np.asarray(Q, dtype=float)
    return -(params.omega**2) * Q - sign * params.coupling**2 * Q / _gap_half(Q, params)


def surface_potential(Q, sign, params: ModelParams):
    Q = np.asarray(Q, dtype=float)
    return 0.5 * params.omega**2 * Q**2 + sign * _gap_half(Q, params)


def coupling_vector(Q, params: ModelParams):
    """C_12(Q) = <Phi_1 | d/dQ Phi_2> = c*delta / (2 (delta^2 + c^2 Q^2)).  C_21 = -C_12."""
    Q = np.asarray(Q, dtype=float)
    return params.coupling * params.delta / (2.0 * _gap_half(Q, params) ** 2)


def _coupling(Q, pair: AdiabaticPair, params: ModelParams):
    alpha, beta = pair
    if alpha == beta:
        return np.zeros_like(np.asarray(Q, dtype=float))
    c12 = coupling_vector(Q, params)
    return c12 if (alpha, beta) == (1, 2) else -c12


def momentum_shift(Q, P, pair: AdiabaticPair, params: ModelParams):
    """S_ab = (E_a - E_b) C_ab / (P C_ab); in one dimension this is (E_a - E_b) / P.

    The printed form is evaluated as written, so a vanishing ``P * C_ab`` is an error
    rather than a silent limit.
    """
    pair = AdiabaticPair(*pair).check()
    if pair.diagonal:
        raise DegenerateJump("momentum shift needs two distinct states")
    P = np.asarray(P, dtype=float)
    C = _coupling(Q, pair, params)
    projection = P * C
    if np.any(projection == 0):
        raise DegenerateJump("P * C_ab vanishes; jump direction undefined")
    gap = surface_energy(Q, pair.alpha, params) - surface_energy(Q, pair.alpha_prime, params)
    return gap * C / projection


def bohr_frequency(Q, pair: AdiabaticPair, params: ModelParams):
    """omega_{a a'}(Q) = E_a(Q) - E_a'(Q)."""
    alpha, alpha_prime = AdiabaticPair(*pair).check()
    # (s_a - s_a') * sqrt(...) keeps diagonal pairs exactly zero
    return (_state_sign(alpha) - _state_sign(alpha_prime)) * _gap_half(Q, params)


def decay_rate(pair: AdiabaticPair, params: ModelParams) -> float:
    """gamma_{a a'} = Gamma_aa + Gamma_a'a' for Gamma = (gamma/2) diag(1, 0)."""
    alpha, alpha_prime = AdiabaticPair(*pair).check()
    if not params.decay_enabled:
        return 0.0
    gamma = decay_matrix(params.gamma)
    return float(gamma[alpha - 1, alpha - 1] + gamma[alpha_prime - 1, alpha_prime - 1])


def decay_matrix(gamma: float) -> np.ndarray:
    """Decay operator in the adiabatic basis: only the upper state leaks."""
    return np.diag([0.5 * gamma, 0.0])


def sigma_z_adiabatic(Q, params: ModelParams) -> np.ndarray:
    """Lead population-difference operator sigma_z expressed in the adiabatic basis.

    ``[[-cos(theta), -sin(theta)], [-sin(theta), cos(theta)]]`` for (upper, lower).
    """
    theta = mixing_angle(Q, params)
    c, s = np.cos(theta), np.sin(theta)
    out = np.empty(np.shape(theta) + (2, 2))
    out[..., 0, 0] = -c
    out[..., 1, 1] = c
    out[..., 0, 1] = out[..., 1, 0] = -s
    return out

"""Closed-form surfaces against dense eigensolvers and finite differences."""

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from nhjunction import model
from nhjunction.errors import DegenerateJump
from nhjunction.model import AdiabaticPair, ModelParams

EIG_TOL = 1e-12
FD_TOL = 1e-6

coords = st.floats(-300.0, 300.0, allow_nan=False)
couplings = st.floats(1e-4, 0.5)
PAIRS = [AdiabaticPair(a, b) for a in (1, 2) for b in (1, 2)]


def _params(c=0.007, **kw):
    return ModelParams(coupling=c, **kw)


@given(Q=coords, c=couplings)
def test_energies_match_eigvalsh(Q, c):
    p = _params(c)
    lower, upper = model.adiabatic_energies(Q, p)
    ref = np.linalg.eigvalsh(model.diabatic_hamiltonian(Q, p))
    scale = max(1.0, abs(ref).max())
    assert abs(lower - ref[0]) <= EIG_TOL * scale
    assert abs(upper - ref[1]) <= EIG_TOL * scale
    assert model.surface_energy(Q, 1, p) == pytest.approx(upper, rel=0, abs=EIG_TOL * scale)
    assert model.surface_energy(Q, 2, p) == pytest.approx(lower, rel=0, abs=EIG_TOL * scale)


@given(Q=coords, c=couplings)
def test_basis_diagonalizes_hamiltonian(Q, c):
    p = _params(c)
    U = model.adiabatic_basis(Q, p)
    h = U.T @ model.diabatic_hamiltonian(Q, p) @ U
    scale = max(1.0, abs(h).max())
    assert np.allclose(U.T @ U, np.eye(2), atol=EIG_TOL)
    assert abs(h[0, 1]) <= EIG_TOL * scale
    assert h[0, 0] == pytest.approx(model.surface_energy(Q, 1, p), abs=EIG_TOL * scale)
    assert h[1, 1] == pytest.approx(model.surface_energy(Q, 2, p), abs=EIG_TOL * scale)


@pytest.mark.parametrize("alpha", [1, 2])
@given(Q=st.floats(-200.0, 200.0), c=couplings)
def test_force_is_energy_gradient(alpha, Q, c):
    p = _params(c)
    h = 1e-4
    fd = -(model.surface_energy(Q + h, alpha, p) - model.surface_energy(Q - h, alpha, p)) / (2 * h)
    assert model.hellmann_feynman_force(Q, alpha, p) == pytest.approx(fd, rel=FD_TOL, abs=FD_TOL)


@given(Q=st.floats(-200.0, 200.0), c=couplings)
def test_coupling_is_basis_derivative(Q, c):
    p = _params(c)
    h = 1e-4
    dU = (model.adiabatic_basis(Q + h, p) - model.adiabatic_basis(Q - h, p)) / (2 * h)
    U = model.adiabatic_basis(Q, p)
    # <upper| d/dQ lower>
    fd = U[:, 0] @ dU[:, 1]
    assert model.coupling_vector(Q, p) == pytest.approx(fd, rel=FD_TOL, abs=FD_TOL)


def test_coupling_peak_value():
    p = _params(0.007)
    assert model.coupling_vector(0.0, p) == pytest.approx(0.007 / 2, rel=1e-15)


@given(Q=coords)
def test_mean_force_is_average(Q):
    p = _params()
    for pair in PAIRS:
        a, b = pair
        expected = 0.5 * (model.hellmann_feynman_force(Q, a, p) + model.hellmann_feynman_force(Q, b, p))
        assert model.mean_force(Q, pair, p) == pytest.approx(expected, rel=1e-14, abs=1e-14)


def test_off_diagonal_surface_is_harmonic():
    p = _params()
    Q = np.linspace(-100, 100, 11)
    assert np.array_equal(model.mean_force(Q, (1, 2), p), -(p.omega**2) * Q)


def test_surface_signs():
    assert AdiabaticPair(1, 1).surface_sign == 1.0
    assert AdiabaticPair(2, 2).surface_sign == -1.0
    assert AdiabaticPair(1, 2).surface_sign == 0.0
    with pytest.raises(ValueError):
        AdiabaticPair(0, 3).check()


def test_momentum_shift_example():
    # gap 2*delta at Q=0, divided by P
    p = _params()
    assert model.momentum_shift(0.0, 2.0, (1, 2), p) == pytest.approx(1.0, rel=1e-15)
    assert model.momentum_shift(0.0, 2.0, (2, 1), p) == pytest.approx(-1.0, rel=1e-15)


@given(Q=coords, P=st.floats(0.1, 100.0) | st.floats(-100.0, -0.1))
def test_momentum_shift_one_dimensional_form(Q, P):
    p = _params()
    gap = model.surface_energy(Q, 1, p) - model.surface_energy(Q, 2, p)
    assert model.momentum_shift(Q, P, (1, 2), p) == pytest.approx(gap / P, rel=1e-13)


def test_momentum_shift_degenerate():
    p = _params()
    with pytest.raises(DegenerateJump):
        model.momentum_shift(0.3, 0.0, (1, 2), p)
    with pytest.raises(DegenerateJump):
        model.momentum_shift(0.3, 1.0, (1, 1), p)
    with pytest.raises(DegenerateJump):
        model.momentum_shift(0.3, 1.0, (1, 2), _params(0.0))


@given(Q=coords)
def test_bohr_frequency(Q):
    p = _params()
    gap = model.surface_energy(Q, 1, p) - model.surface_energy(Q, 2, p)
    assert model.bohr_frequency(Q, (1, 2), p) == pytest.approx(gap, rel=1e-14)
    assert model.bohr_frequency(Q, (2, 1), p) == pytest.approx(-gap, rel=1e-14)
    assert model.bohr_frequency(Q, (1, 1), p) == 0.0
    assert model.bohr_frequency(Q, (2, 2), p) == 0.0


def test_decay_rates():
    on = _params(gamma=0.1, decay_enabled=True)
    assert model.decay_rate((1, 1), on) == pytest.approx(0.1)
    assert model.decay_rate((1, 2), on) == pytest.approx(0.05)
    assert model.decay_rate((2, 1), on) == pytest.approx(0.05)
    assert model.decay_rate((2, 2), on) == 0.0
    off = _params(gamma=0.1)
    assert all(model.decay_rate(pair, off) == 0.0 for pair in PAIRS)


@given(Q=coords, c=couplings)
def test_sigma_z_rotation(Q, c):
    p = _params(c)
    U = model.adiabatic_basis(Q, p)
    ref = U.T @ np.diag([1.0, -1.0]) @ U
    assert np.allclose(model.sigma_z_adiabatic(Q, p), ref, atol=EIG_TOL)


def test_broadcasting():
    p = _params()
    Q = np.linspace(-5, 5, 12).reshape(3, 4)
    assert model.adiabatic_energies(Q, p)[0].shape == (3, 4)
    assert model.sigma_z_adiabatic(Q, p).shape == (3, 4, 2, 2)
    assert model.diabatic_hamiltonian(Q, p).shape == (3, 4, 2, 2)


@pytest.mark.parametrize(
    "kw, message",
    [
        ({"tau": -1.0}, "tau must be > 0"),
        ({"beta": 0.0}, "beta must be > 0"),
        ({"gamma": -0.1}, "gamma must be >= 0"),
        ({"n_step": 0}, "n_step must be >= 1"),
        ({"initial_state": "x"}, "initial_state"),
        ({"bath_distribution": "x"}, "bath_distribution"),
    ],
)
def test_params_validation(kw, message):
    with pytest.raises(ValueError, match=message):
        ModelParams(**kw)


def test_default_params():
    p = ModelParams()
    assert (p.delta, p.omega, p.coupling, p.gamma) == (1.0, 1.0 / 3.0, 0.007, 0.1)
    assert (p.tau, p.n_step, p.n_mcs, p.seed, p.mu1, p.mu2) == (0.005, 10_000, 2500, 42, 1.0, 1.0)
    assert p.kT == pytest.approx(200.0)

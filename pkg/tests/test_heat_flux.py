import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from scipy.integrate import quad

from wigner_phonon.bose_integrals import BranchConfig, equilibrium_energy_density_dT
from wigner_phonon.dispersion import debye, einstein, quadratic
from wigner_phonon.errors import DomainError, GridTooSmall, UnsupportedDimension
from wigner_phonon.heat_flux import (TemperatureJet, asymptotic_flux, conductivity_zero, fourier_flux,
                                     j2_divergence, j2_tensor, quantum_flux_correction)
from wigner_phonon.verification import j2_quadrature

LA = BranchConfig("LA", debye(1.0))
K_REF = 2 * math.pi ** 2 / 15


def test_conductivity_at_unit_temperature():
    res = conductivity_zero(LA, 1.0)
    assert res.k_trace == pytest.approx(K_REF, rel=1e-10)
    np.testing.assert_allclose(res.K, K_REF / 3 * np.eye(3), rtol=1e-12)


@settings(max_examples=40, deadline=None)
@given(st.floats(0.05, 20.0), st.floats(0.2, 5.0), st.floats(0.1, 10.0))
def test_debye_conductivity_equals_tau_c2_heat_capacity(T, c, tau):
    br = BranchConfig("LA", debye(c), tau_Q=tau)
    k = conductivity_zero(br, T).k_trace
    assert k == pytest.approx(tau * c * c * equilibrium_energy_density_dT(br, T), rel=1e-10)


def test_quadratic_conductivity_against_quadrature():
    a, T = 0.6, 1.4
    br = BranchConfig("ZA", quadratic(a))

    def f(r):
        x = a * r * r / T
        u = math.exp(-x)
        return 4 * math.pi * r * r * (2 * a * r) ** 2 * (a * r * r) ** 2 * u / (-math.expm1(-x)) ** 2

    val, _ = quad(f, 0, 60.0, epsabs=0, epsrel=1e-12, limit=200)
    ref = val / ((2 * math.pi) ** 3 * T * T)
    assert conductivity_zero(br, T).k_trace == pytest.approx(ref, rel=1e-9)


def test_temperature_exponent_is_the_dimension():
    # k0 = tau c^2 dW/dT with W ~ T^(d+1), so k0 ~ T^d
    for T in (0.5, 1.0, 2.0):
        assert conductivity_zero(LA, T).temperature_exponent == pytest.approx(3.0, abs=1e-6)
    ratio = conductivity_zero(LA, 2.0).k_trace / conductivity_zero(LA, 1.0).k_trace
    assert ratio == pytest.approx(8.0, rel=1e-12)


def test_einstein_conductivity_is_zero():
    res = conductivity_zero(BranchConfig("O", einstein(1.0), bz_volume=1.0), 1.0)
    assert res.k_trace == 0.0 and not res.K.any()


def test_fourier_flux_examples():
    np.testing.assert_array_equal(fourier_flux(LA, TemperatureJet.uniform(1.0)), 0.0)
    tj = TemperatureJet(1.0, np.array([0.3, 0, 0]), np.zeros((3, 3)))
    np.testing.assert_allclose(fourier_flux(LA, tj), [-K_REF * 0.3 / 3, 0, 0], rtol=1e-12)


@settings(max_examples=40, deadline=None)
@given(st.floats(0.1, 5.0), st.lists(st.floats(-3, 3), min_size=3, max_size=3).filter(lambda g: np.linalg.norm(g) > 1e-3))
def test_fourier_flux_runs_down_the_gradient(T, g):
    tj = TemperatureJet(T, np.array(g), np.zeros((3, 3)))
    assert fourier_flux(LA, tj) @ np.array(g) < 0


def test_j2_zero_without_gradients():
    np.testing.assert_array_equal(j2_tensor(LA, TemperatureJet.uniform(1.3)), 0.0)


@pytest.mark.parametrize("T0,a,b", [(1.0, 0.1, 0.05), (1.0, -0.2, 0.1), (1.5, 0.05, -0.08)])
def test_j2_matches_direct_quadrature(T0, a, b):
    tj = TemperatureJet(T0, np.array([a, 0, 0]), np.diag([2 * b, 0, 0]))
    ref = j2_quadrature(LA, tj)
    got = j2_tensor(LA, tj)
    assert np.max(np.abs(got - ref)) / np.max(np.abs(ref)) <= 1e-6


def test_j2_matches_quadrature_for_general_jet_and_speed():
    br = BranchConfig("LA", debye(1.7))
    H = np.array([[0.1, 0.03, -0.02], [0.03, -0.05, 0.04], [-0.02, 0.04, 0.07]])
    tj = TemperatureJet(0.8, np.array([0.1, -0.2, 0.05]), H)
    ref = j2_quadrature(br, tj)
    assert np.max(np.abs(j2_tensor(br, tj) - ref)) / np.max(np.abs(ref)) <= 1e-6


@settings(max_examples=30, deadline=None)
@given(st.lists(st.floats(-1, 1), min_size=9, max_size=9))
def test_j2_symmetric(v):
    H = np.zeros((3, 3))
    H[np.triu_indices(3)] = v[3:]
    H = H + H.T
    J = j2_tensor(LA, TemperatureJet(1.0, np.array(v[:3]), H))
    np.testing.assert_array_equal(J, J.T)


def test_j2_needs_three_dimensional_debye():
    tj2 = TemperatureJet(1.0, np.array([0.1, 0]), np.zeros((2, 2)))
    with pytest.raises(UnsupportedDimension):
        j2_tensor(BranchConfig("LA2", debye(1.0, dim=2)), tj2)
    with pytest.raises(DomainError):
        j2_tensor(BranchConfig("ZA", quadratic(1.0)), TemperatureJet.uniform(1.0))


def _profile(x, T0=1.0, a=0.1, b=0.05, e=0.02):
    """T = T0 + a x + b x^2 + e x^3 as a field of jets along x_1."""
    n = x.size
    T = T0 + a * x + b * x * x + e * x ** 3
    G = np.zeros((n, 3))
    H = np.zeros((n, 3, 3))
    D3 = np.zeros((n, 3, 3, 3))
    G[:, 0] = a + 2 * b * x + 3 * e * x * x
    H[:, 0, 0] = 2 * b + 6 * e * x
    D3[:, 0, 0, 0] = 6 * e
    return TemperatureJet(T, G, H, D3)


def test_quantum_correction_uniform_field():
    tj = TemperatureJet(np.full(9, 1.2), np.zeros((9, 3)), np.zeros((9, 3, 3)), np.zeros((9, 3, 3, 3)))
    np.testing.assert_array_equal(quantum_flux_correction(LA, tj), 0.0)


def test_quantum_correction_grid_converges_to_analytic():
    errs = []
    for n in (21, 41, 81):
        x = np.linspace(-1, 1, n)
        tj = _profile(x)
        ana = quantum_flux_correction(LA, tj, method="analytic")
        grid = quantum_flux_correction(LA, tj, spacing=[x[1] - x[0]], method="grid")
        errs.append(np.max(np.abs(ana - grid)))
    assert errs[0] / errs[1] == pytest.approx(4.0, rel=0.15)
    assert errs[1] / errs[2] == pytest.approx(4.0, rel=0.15)


def test_linear_profile_gives_constant_j2():
    # in d = 3 the J2 prefactor is independent of T, and with a zero Hessian
    # J2 depends on grad T only, so its divergence vanishes
    x = np.linspace(-1, 1, 41)
    tj = _profile(x, e=0.0, b=0.0)
    J = j2_tensor(LA, tj)
    np.testing.assert_allclose(J, np.broadcast_to(J[0], J.shape), rtol=1e-13)
    assert np.max(np.abs(J)) > 0
    np.testing.assert_allclose(quantum_flux_correction(LA, tj, method="analytic"), 0.0, atol=1e-16)
    grid = quantum_flux_correction(LA, tj, spacing=[x[1] - x[0]], method="grid")
    np.testing.assert_allclose(grid, 0.0, atol=1e-12)


def test_grid_divergence_guards():
    x = np.linspace(-1, 1, 2)
    with pytest.raises(GridTooSmall):
        quantum_flux_correction(LA, _profile(x), spacing=[2.0], method="grid")
    with pytest.raises(DomainError):
        quantum_flux_correction(LA, _profile(np.linspace(-1, 1, 9)), method="grid")
    with pytest.raises(DomainError):
        j2_divergence(LA, TemperatureJet(1.0, np.zeros(3), np.zeros((3, 3))))


def test_asymptotic_flux_limits_and_scaling():
    x = np.linspace(-1, 1, 41)
    tj = _profile(x, e=0.0)
    base = asymptotic_flux(LA, tj, 0.0)
    np.testing.assert_array_equal(base.total, fourier_flux(LA, tj))
    r = []
    for h in (0.2, 0.1):
        f = asymptotic_flux(LA, tj, h)
        r.append(np.linalg.norm(f.total - f.Q0) / np.linalg.norm(f.Q0))
    assert r[0] / r[1] == pytest.approx(4.0, rel=1e-10)
    assert np.max(np.abs(asymptotic_flux(LA, tj, 0.2).Q2)) > 0

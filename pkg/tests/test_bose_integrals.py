import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from scipy.special import gamma, zeta

from wigner_phonon.bose_integrals import (BranchConfig, QuadratureSpec, angular_tensor, bose_moment,
                                          closure_integral, equilibrium_energy_density,
                                          equilibrium_energy_density_dT, occupancy, reduced_moment,
                                          sphere_measure, sphere_quadrature)
from wigner_phonon.dispersion import debye, einstein, quadratic
from wigner_phonon.errors import DivergentIntegral, DomainError, UnsupportedDimension, UnsupportedRank


def test_occupancy_examples():
    assert occupancy(math.log(2.0)) == pytest.approx(1.0, rel=1e-15)
    assert occupancy(1000.0) == 0.0
    assert occupancy(1.0) == pytest.approx(0.5819767069, rel=1e-10)
    with pytest.raises(DomainError):
        occupancy(0.0)


def test_sphere_measure():
    assert sphere_measure(1) == pytest.approx(2.0)
    assert sphere_measure(2) == pytest.approx(2 * math.pi)
    assert sphere_measure(3) == pytest.approx(4 * math.pi)
    with pytest.raises(UnsupportedDimension):
        sphere_measure(4)


def test_angular_tensor_examples():
    a2 = angular_tensor(2, 3)
    assert a2[0, 1] == 0.0
    assert a2[0, 0] == pytest.approx(4 * math.pi / 3)
    assert angular_tensor(4, 3)[0, 0, 1, 1] == pytest.approx(4 * math.pi / 15)
    with pytest.raises(UnsupportedRank):
        angular_tensor(5, 3)


@pytest.mark.parametrize("d", [2, 3])
@pytest.mark.parametrize("rank", [2, 4])
def test_angular_tensor_matches_quadrature(rank, d):
    quad = sphere_quadrature(d)
    n, w = quad.nodes, quad.weights
    if rank == 2:
        num = np.einsum("a,ai,aj->ij", w, n, n)
    else:
        num = np.einsum("a,ai,aj,ak,al->ijkl", w, n, n, n, n)
    np.testing.assert_allclose(num, angular_tensor(rank, d), atol=1e-13)


def test_reduced_moment_examples():
    assert reduced_moment(2) == pytest.approx(math.pi ** 2 / 3, rel=1e-10)
    assert reduced_moment(4) == pytest.approx(4 * math.pi ** 4 / 15, rel=1e-10)
    with pytest.raises(DivergentIntegral):
        reduced_moment(1)


def test_closure_integral_examples():
    assert closure_integral("I1", 3) == pytest.approx(math.pi ** 2, rel=1e-10)
    assert closure_integral("I2", 3) == pytest.approx(4 * math.pi ** 2, rel=1e-10)
    for d in (1, 2):
        for kind in ("I1", "I2"):
            with pytest.raises(DivergentIntegral):
                closure_integral(kind, d)


@pytest.mark.parametrize("transform", ["exp-substitution", "algebraic-mapping"])
@pytest.mark.parametrize("m", [0.5, 1.0, 1.5, 3.0, 6.0])
def test_bose_moment_gamma_zeta(m, transform):
    spec = QuadratureSpec(radial_transform=transform)
    assert bose_moment(m, spec) == pytest.approx(gamma(m + 1) * zeta(m + 1), rel=1e-10)


def test_bose_moment_diverges_at_zero_order():
    with pytest.raises(DivergentIntegral):
        bose_moment(0.0)


def test_energy_density_examples():
    la = BranchConfig("LA", debye(1.0))
    assert equilibrium_energy_density(la, 1.0) == pytest.approx(math.pi ** 2 / 30, rel=1e-12)
    assert equilibrium_energy_density(la, 1e-30) < 1e-100
    op = BranchConfig("O", einstein(1.0), bz_volume=(2 * math.pi) ** 3)
    assert equilibrium_energy_density(op, 1.0) == pytest.approx(1 / (math.e - 1), rel=1e-14)
    assert equilibrium_energy_density(op, 1e-3) == 0.0


def test_energy_density_rejects_nonpositive_T():
    with pytest.raises(DomainError):
        equilibrium_energy_density(BranchConfig("LA", debye(1.0)), 0.0)


def test_energy_density_quadratic_against_direct_quadrature():
    from scipy.integrate import quad
    br = BranchConfig("ZA", quadratic(0.7))
    T = 1.3

    def f(r):
        x = 0.7 * r * r / T
        return 4 * math.pi * r * r * 0.7 * r * r * math.exp(-x) / -math.expm1(-x)

    radial, _ = quad(f, 0, 40.0, epsabs=0, epsrel=1e-12, limit=200)
    assert equilibrium_energy_density(br, T) == pytest.approx(radial / (2 * math.pi) ** 3, rel=1e-9)


def test_einstein_needs_zone_volume():
    with pytest.raises(DomainError):
        BranchConfig("O", einstein(1.0))


@settings(max_examples=40, deadline=None)
@given(st.floats(0.05, 20.0),
       st.sampled_from([BranchConfig("LA", debye(1.2)), BranchConfig("ZA", quadratic(0.5)),
                        BranchConfig("O", einstein(0.8), bz_volume=50.0)]))
def test_energy_derivative_matches_finite_difference(T, br):
    h = 1e-6 * T
    fd = (equilibrium_energy_density(br, T + h) - equilibrium_energy_density(br, T - h)) / (2 * h)
    dW = equilibrium_energy_density_dT(br, T)
    assert dW == pytest.approx(fd, rel=1e-5, abs=1e-300)


@settings(max_examples=40, deadline=None)
@given(st.floats(0.05, 10.0), st.floats(1.01, 3.0))
def test_energy_density_monotone_in_T(T, factor):
    br = BranchConfig("LA", debye(0.9))
    assert equilibrium_energy_density(br, T * factor) > equilibrium_energy_density(br, T)


def test_energy_density_vectorized():
    br = BranchConfig("LA", debye(1.0))
    T = np.array([0.5, 1.0, 2.0])
    W = equilibrium_energy_density(br, T)
    np.testing.assert_allclose(W, math.pi ** 2 / 30 * T ** 4, rtol=1e-12)

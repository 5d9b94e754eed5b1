import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from wigner_phonon.dispersion import debye, einstein, quadratic
from wigner_phonon.errors import GridMismatch, GridTooSmall, NonPeriodicDomain
from wigner_phonon.moyal import (PhaseSpaceGrid, integral_form_apply, moyal_term,
                                 quantum_exp_term2_grid, transport_apply)
from wigner_phonon.qmep_closure import XiJet, quantum_exp_term2
from wigner_phonon.verification import random_parity_error, richardson_ratio


def grid1d(n=21, lo=-1.0, hi=1.0):
    x = np.linspace(lo, hi, n)
    return PhaseSpaceGrid((x,), (x.copy(),))


def interior(a, w=2):
    return a[w:-w, w:-w]


def test_zeroth_term_of_constants():
    g = grid1d()
    one = np.ones(g.shape)
    np.testing.assert_array_equal(moyal_term(0, one, one, g), 1.0)


def test_first_term_of_linear_symbols():
    g = grid1d()
    (X,), (Q,) = g.mesh()
    X, Q = X + 0 * Q, Q + 0 * X
    np.testing.assert_allclose(interior(moyal_term(1, X, Q, g), 1), 0.5j, atol=1e-13)


def test_boundary_ring_is_marked_invalid():
    g = grid1d()
    (X,), (Q,) = g.mesh()
    X, Q = X + 0 * Q, Q + 0 * X
    m = moyal_term(1, X, Q, g)
    assert np.isnan(m[0, 5]) and np.isnan(m[5, -1])


def test_parity_on_random_smooth_symbols():
    assert random_parity_error() <= 1e-12


@settings(max_examples=25, deadline=None)
@given(st.lists(st.floats(-1.5, 1.5), min_size=4, max_size=4), st.sampled_from([0, 1, 2]))
def test_parity_property(c, n):
    g = grid1d(15)
    (X,), (Q,) = g.mesh()
    a = np.sin(c[0] * X + c[1] * Q) + 0 * X * Q
    b = np.exp(c[2] * X * Q) * np.cos(c[3] * Q) + 0 * X * Q
    ab = moyal_term(n, a, b, g)
    ba = moyal_term(n, b, a, g)
    ok = np.isfinite(ab)
    np.testing.assert_allclose(ab[ok], (-1) ** n * ba[ok], atol=1e-12 * (1 + np.max(np.abs(ab[ok]))))


def test_second_term_of_polynomials_is_exact():
    # x^2 #_2 q^2 = -(1/8) * 2 * 2
    g = grid1d()
    (X,), (Q,) = g.mesh()
    m = moyal_term(2, X ** 2 + 0 * Q, Q ** 2 + 0 * X, g)
    np.testing.assert_allclose(interior(m), -0.5, atol=1e-12)


def test_quantum_exponential_on_grid_matches_closed_form():
    xs = np.linspace(0.0, 2.0, 81)
    g = PhaseSpaceGrid((xs,), (xs,))
    (X,), (Q,) = g.mesh()
    e2 = quantum_exp_term2_grid(X * Q, g)
    ref = quantum_exp_term2(XiJet(np.array(1.0), np.array([1.0]), np.array([1.0]),
                                  np.zeros((1, 1)), np.ones((1, 1)), np.zeros((1, 1))))
    assert e2[40, 40] == pytest.approx(ref, rel=1e-3)
    assert ref == pytest.approx(5 * math.e / 24, rel=1e-14)


def test_grid_validation():
    with pytest.raises(GridTooSmall):
        PhaseSpaceGrid((np.linspace(0, 1, 5),), (np.linspace(0, 1, 9),))
    with pytest.raises(GridMismatch):
        PhaseSpaceGrid((np.array([0, 1, 2, 3, 4, 5, 7.0]),), (np.linspace(0, 1, 9),))
    g = grid1d()
    with pytest.raises(GridMismatch):
        moyal_term(1, np.ones((3, 3)), np.ones((3, 3)), g)


def _slab(n=128, periodic=True):
    x = np.arange(n) * 2 * np.pi / n
    q = np.array([[1.0, 0.5, -0.2], [0.3, 1.0, 0.0], [-0.8, 0.1, 0.4]])
    return x, PhaseSpaceGrid.slab(x, q, periodic=periodic)


def test_einstein_transport_is_zero():
    x, g = _slab()
    f = np.sin(x)[:, None] * np.ones(3)
    np.testing.assert_array_equal(transport_apply(einstein(0.5), f, g, 0.3), 0.0)
    np.testing.assert_array_equal(integral_form_apply(einstein(0.5), f, g, 0.3), 0.0)


def test_semiclassical_transport_of_sine_is_second_order():
    errs = []
    for n in (64, 128):
        x = np.arange(n) * 2 * np.pi / n
        g = PhaseSpaceGrid.slab(x, np.array([[1.0], [-1.0]]), periodic=True)
        f = np.sin(x)[:, None] * np.ones(2)
        out = transport_apply(debye(1.5, dim=1), f, g, 0.0)
        expect = 1.5 * np.cos(x)[:, None] * np.array([1.0, -1.0])
        errs.append(np.max(np.abs(out - expect)))
    assert errs[0] / errs[1] == pytest.approx(4.0, rel=0.05)


def test_quadratic_transport_has_no_hbar_term():
    x, g = _slab()
    f = np.cos(2 * x)[:, None] * np.ones(3)
    m = quadratic(0.7)
    np.testing.assert_array_equal(transport_apply(m, f, g, 0.5), transport_apply(m, f, g, 0.0))


def test_integral_form_exact_for_quadratic_symbols():
    x, g = _slab()
    f = (np.sin(x) + 0.2 * np.cos(3 * x))[:, None] * np.ones(3)
    m = quadratic(0.7)
    a = integral_form_apply(m, f, g, 0.4)
    b = transport_apply(m, f, g, 0.4, method="spectral")
    assert np.max(np.abs(a - b)) <= 1e-12 * np.max(np.abs(b))


def test_richardson_ratio_is_sixteen():
    for r in richardson_ratio():
        assert r == pytest.approx(16.0, rel=0.2)


def test_spectral_and_integral_forms_need_periodic_grid():
    x, g = _slab(periodic=False)
    f = np.sin(x)[:, None] * np.ones(3)
    with pytest.raises(NonPeriodicDomain):
        transport_apply(debye(1.0), f, g, 0.1, method="spectral")
    with pytest.raises(NonPeriodicDomain):
        integral_form_apply(debye(1.0), f, g, 0.1)

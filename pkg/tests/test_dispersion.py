import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from wigner_phonon.dispersion import DispersionModel, PhysicalScales, debye, einstein, quadratic
from wigner_phonon.errors import DegenerateMomentum, DomainError

finite = st.floats(-5, 5, allow_nan=False)
vec3 = st.tuples(finite, finite, finite).map(np.array)


def test_energy_examples():
    assert debye(1.0).energy([0.0, 0.0, 0.0]) == 0.0
    assert quadratic(1.0).energy([1.0, 1.0, 0.0]) == pytest.approx(2.0)
    assert debye(2.0).energy([3.0, 4.0, 0.0]) == pytest.approx(10.0)


def test_group_velocity_examples():
    np.testing.assert_array_equal(einstein(0.2).group_velocity([0.3, -1.0, 2.0]), np.zeros(3))
    np.testing.assert_allclose(debye(1.0).group_velocity([0.0, 0.0, 5.0]), [0, 0, 1])
    np.testing.assert_allclose(quadratic(0.5).group_velocity([1.0, 2.0, 3.0]), [1, 2, 3])


def test_third_derivative_examples():
    np.testing.assert_array_equal(quadratic(1.0).third_derivatives([1.0, 0, 0]), 0.0)
    np.testing.assert_array_equal(einstein(1.0).third_derivatives([1.0, 1, 1]), 0.0)
    t = debye(1.0).third_derivatives([1.0, 0, 0])
    assert t[1, 1, 1] == 0.0
    assert t[0, 1, 1] == pytest.approx(-1.0)


def test_third_derivatives_match_finite_differences():
    m = debye(1.3)
    q = np.array([0.7, -0.4, 1.1])
    h = 1e-5
    fd = np.zeros((3, 3, 3))
    for k in range(3):
        e = np.zeros(3)
        e[k] = h
        fd[:, :, k] = (m.hessian(q + e) - m.hessian(q - e)) / (2 * h)
    np.testing.assert_allclose(m.third_derivatives(q), fd, atol=1e-6)


def test_debye_origin_is_degenerate():
    with pytest.raises(DegenerateMomentum):
        debye(1.0).group_velocity([0.0, 0.0, 0.0])
    with pytest.raises(DegenerateMomentum):
        debye(1.0).third_derivatives(np.zeros(3))


@pytest.mark.parametrize("kind,param,dim", [("debye", 0.0, 3), ("einstein", -1.0, 3),
                                            ("quadratic", 1.0, 4), ("optical", 1.0, 3)])
def test_invalid_models(kind, param, dim):
    with pytest.raises(DomainError):
        DispersionModel(kind, param, dim)


def test_wrong_momentum_dimension():
    with pytest.raises(DomainError):
        debye(1.0, dim=2).energy([1.0, 2.0, 3.0])


def test_scales_validation():
    assert PhysicalScales.si().k_B == pytest.approx(1.380649e-23)
    with pytest.raises(DomainError):
        PhysicalScales(hbar_eff=-1.0)
    with pytest.raises(DomainError):
        PhysicalScales(k_B=0.0)


@settings(max_examples=60, deadline=None)
@given(vec3, st.sampled_from([debye(0.8), quadratic(0.6), einstein(0.3)]))
def test_energy_nonnegative(q, model):
    assert model.energy(q) >= 0.0


@settings(max_examples=60, deadline=None)
@given(vec3.filter(lambda q: np.linalg.norm(q) > 1e-2))
def test_debye_third_derivatives_fully_symmetric(q):
    t = debye(1.7).third_derivatives(q)
    for perm in [(0, 2, 1), (1, 0, 2), (1, 2, 0), (2, 0, 1), (2, 1, 0)]:
        np.testing.assert_allclose(t, t.transpose(perm), atol=1e-12)


@settings(max_examples=60, deadline=None)
@given(vec3.filter(lambda q: np.linalg.norm(q) > 1e-2), st.floats(0.1, 4.0))
def test_debye_speed_is_constant(q, c):
    assert np.linalg.norm(debye(c).group_velocity(q)) == pytest.approx(c, rel=1e-12)


def test_vectorized_shapes():
    q = np.random.default_rng(0).normal(size=(4, 5, 3))
    m = debye(1.0)
    assert m.energy(q).shape == (4, 5)
    assert m.group_velocity(q).shape == (4, 5, 3)
    assert m.hessian(q).shape == (4, 5, 3, 3)
    assert m.third_derivatives(q).shape == (4, 5, 3, 3, 3)

"""Bose-Einstein moment integrals, sphere measures and angular quadrature.

Radial integrals are reduced to dimensionless half-line integrals in
z = h(q)/k_B T and evaluated with adaptive Gauss-Kronrod quadrature after a
change of variables. Divergence is decided analytically from the small-z
power of each integrand, never by probing numerically.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from functools import lru_cache
from typing import Callable, Literal, Union

import numpy as np
from scipy import integrate

from .dispersion import DispersionModel
from .errors import (DivergentIntegral, DomainError, ToleranceNotReached,
                     UnsupportedDimension, UnsupportedRank)

TWO_PI = 2.0 * math.pi


@dataclass(frozen=True)
class QuadratureSpec:
    relative_tolerance: float = 1e-12
    absolute_tolerance: float = 1e-14
    max_subdivisions: int = 200
    radial_transform: Literal["exp-substitution", "algebraic-mapping"] = "algebraic-mapping"

    def __post_init__(self):
        if self.relative_tolerance <= 0 or self.absolute_tolerance <= 0:
            raise DomainError("quadrature tolerances must be > 0")
        if self.max_subdivisions < 8:
            raise DomainError("max_subdivisions must be >= 8")
        if self.radial_transform not in ("exp-substitution", "algebraic-mapping"):
            raise DomainError(f"unknown radial transform {self.radial_transform!r}")


DEFAULT_SPEC = QuadratureSpec()

Relaxation = Union[float, Callable[[float], float]]


@dataclass(frozen=True)
class BranchConfig:
    """One phonon branch: dispersion, BGK relaxation times, zone volume.

    ``tau_W`` and ``tau_Q`` are either constants or callables of the local
    temperature. ``bz_volume`` regularizes Einstein moments, whose constant
    symbol is not integrable over the whole momentum space.
    """

    label: str
    dispersion: DispersionModel
    tau_W: Relaxation = 1.0
    tau_Q: Relaxation = 1.0
    bz_volume: float | None = None

    def __post_init__(self):
        for name in ("tau_W", "tau_Q"):
            tau = getattr(self, name)
            if not callable(tau) and not tau > 0:
                raise DomainError(f"{name} must be > 0, got {tau}")
        if self.dispersion.kind == "einstein":
            if self.bz_volume is None or not self.bz_volume > 0:
                raise DomainError(f"Einstein branch {self.label!r} needs bz_volume > 0")

    @property
    def dim(self) -> int:
        return self.dispersion.dim

    def tau_w_at(self, T):
        return self.tau_W(T) if callable(self.tau_W) else self.tau_W

    def tau_q_at(self, T):
        return self.tau_Q(T) if callable(self.tau_Q) else self.tau_Q


def occupancy(xi):
    """Bose-Einstein occupation 1/(e^xi - 1) for xi > 0."""
    xi = np.asarray(xi, dtype=float)
    if np.any(~(xi > 0)):
        raise DomainError("occupancy requires xi > 0")
    with np.errstate(over="ignore"):
        out = 1.0 / np.expm1(xi)
    return out if out.ndim else float(out)


def sphere_measure(d: int) -> float:
    _check_dim(d)
    return 2.0 * math.pi ** (d / 2) / math.gamma(d / 2)


def _check_dim(d: int):
    if d not in (1, 2, 3):
        raise UnsupportedDimension(f"dimension must be 1, 2 or 3, got {d}")


def angular_tensor(rank: int, d: int) -> np.ndarray:
    """Exact integral of n_i1 ... n_ir over the unit sphere S_d."""
    _check_dim(d)
    mis = sphere_measure(d)
    eye = np.eye(d)
    if rank == 0:
        return np.asarray(mis)
    if rank in (1, 3):
        return np.zeros((d,) * rank)
    if rank == 2:
        return mis / d * eye
    if rank == 4:
        sym = (np.einsum("ij,hk->ijhk", eye, eye) + np.einsum("ih,jk->ijhk", eye, eye)
               + np.einsum("ik,jh->ijhk", eye, eye))
        return mis / (d * (d + 2)) * sym
    raise UnsupportedRank(f"angular tensors are tabulated for ranks 0-4, got {rank}")


@dataclass(frozen=True)
class SphereQuadrature:
    """Product rule on S_d: Gauss-Legendre in n_1, trapezoid in azimuth.

    The polar axis is the first coordinate, so integrands depending only on
    n_1 (slab symmetry) are integrated exactly in the azimuth.
    """

    dim: int
    nodes: np.ndarray = field(repr=False)
    weights: np.ndarray = field(repr=False)


@lru_cache(maxsize=32)
def sphere_quadrature(d: int, n_mu: int = 48, n_phi: int = 32) -> SphereQuadrature:
    _check_dim(d)
    if d == 1:
        nodes = np.array([[1.0], [-1.0]])
        weights = np.ones(2)
    elif d == 2:
        phi = TWO_PI * (np.arange(n_phi) + 0.5) / n_phi
        nodes = np.stack([np.cos(phi), np.sin(phi)], axis=-1)
        weights = np.full(n_phi, TWO_PI / n_phi)
    else:
        mu, wmu = np.polynomial.legendre.leggauss(n_mu)
        phi = TWO_PI * (np.arange(n_phi) + 0.5) / n_phi
        s = np.sqrt(1.0 - mu * mu)
        nodes = np.stack([
            np.repeat(mu, n_phi),
            np.outer(s, np.cos(phi)).ravel(),
            np.outer(s, np.sin(phi)).ravel(),
        ], axis=-1)
        weights = np.repeat(wmu, n_phi) * (TWO_PI / n_phi)
    nodes.setflags(write=False)
    weights.setflags(write=False)
    return SphereQuadrature(d, nodes, weights)


# -- dimensionless half-line integrals ------------------------------------

def _tail_cutoff(power: float, atol: float) -> float:
    # z^power e^{-z} below atol * 1e-3 beyond z_max
    z = 40.0
    target = math.log(atol) - 7.0
    while max(power, 0.0) * math.log(z) - z > target:
        z *= 1.25
    return z


def half_line_integral(f: Callable[[np.ndarray], np.ndarray], power: float,
                       spec: QuadratureSpec = DEFAULT_SPEC) -> float:
    """Integrate f over (0, inf) where f(z) ~ z^power e^{-z} for large z.

    The integrand must be integrable at 0; callers check that analytically.
    """
    z_max = _tail_cutoff(power, spec.absolute_tolerance)
    peak = max(power, 1.0)
    if spec.radial_transform == "algebraic-mapping":
        # z = s t / (1 - t): clusters nodes around the peak of the integrand
        t_max = z_max / (peak + z_max)

        def g(t):
            z = peak * t / (1.0 - t)
            return f(z) * peak / (1.0 - t) ** 2

        lo, hi = 0.0, t_max
        breaks = [0.5 * t_max]
    else:
        def g(u):
            z = math.exp(u)
            return f(z) * z

        lo, hi = math.log(1e-30), math.log(z_max)
        breaks = [0.0, math.log(peak)]
    val, err, info = integrate.quad(lambda s: float(g(s)), lo, hi, points=breaks,
                                    epsabs=spec.absolute_tolerance,
                                    epsrel=spec.relative_tolerance,
                                    limit=spec.max_subdivisions, full_output=1)[:3]
    # quad's estimate is conservative; allow a modest factor before giving up
    if err > 100.0 * max(spec.absolute_tolerance, spec.relative_tolerance * abs(val)):
        raise ToleranceNotReached(
            f"half-line quadrature error {err:.3g} exceeds tolerance "
            f"({info.get('last', '?')} subdivisions)")
    return val


def _u(z):
    return math.exp(-z), -math.expm1(-z)


@lru_cache(maxsize=256)
def bose_moment(m: float, spec: QuadratureSpec = DEFAULT_SPEC) -> float:
    """int_0^inf z^m / (e^z - 1) dz, equal to Gamma(m+1) zeta(m+1).

    Near z = 0 the integrand behaves as z^(m-1): convergent only for m > 0.
    """
    if not m > 0:
        raise DivergentIntegral(f"int z^{m}/(e^z-1) diverges at z=0 (needs m > 0)")

    def f(z):
        u, one_minus_u = _u(z)
        return z ** m * u / one_minus_u

    return half_line_integral(f, m, spec)


@lru_cache(maxsize=256)
def reduced_moment(n: float, spec: QuadratureSpec = DEFAULT_SPEC) -> float:
    """int_0^inf z^n e^z / (e^z - 1)^2 dz, equal to Gamma(n+1) zeta(n).

    The integrand behaves as z^(n-2) near 0, so n = 1 already diverges
    logarithmically; n must exceed 1.
    """
    if not n > 1:
        raise DivergentIntegral(f"reduced moment of order {n} diverges at z=0 (needs n > 1)")

    def f(z):
        u, one_minus_u = _u(z)
        return z ** n * u / (one_minus_u * one_minus_u)

    return half_line_integral(f, n, spec)


@lru_cache(maxsize=32)
def closure_integral(kind: str, d: int, spec: QuadratureSpec = DEFAULT_SPEC) -> float:
    """Dimensionless integrals I1(d), I2(d) of the order-hbar^2 closure.

    I1 = int xi^d e^xi (e^xi + 1)/(e^xi - 1)^3, integrand ~ 2 xi^(d-3);
    I2 = int xi^(d+1) e^xi (e^2xi + 4e^xi + 1)/(e^xi - 1)^4, ~ 6 xi^(d-3).
    Both diverge at xi = 0 unless d = 3.
    """
    _check_dim(d)
    if kind not in ("I1", "I2"):
        raise DomainError(f"closure integral kind must be 'I1' or 'I2', got {kind!r}")
    if d < 3:
        raise DivergentIntegral(
            f"{kind}({d}) diverges: integrand ~ xi^{d - 3} at xi=0 (bulk d=3 only)")
    if kind == "I1":
        def f(z):
            u, om = _u(z)
            return z ** d * u * (1.0 + u) / om ** 3
        return half_line_integral(f, d, spec)

    def f(z):
        u, om = _u(z)
        return z ** (d + 1) * u * (1.0 + 4.0 * u + u * u) / om ** 4
    return half_line_integral(f, d + 1, spec)


# -- equilibrium energy densities -----------------------------------------

def equilibrium_energy_density(branch: BranchConfig, T, spec: QuadratureSpec = DEFAULT_SPEC,
                               k_B: float = 1.0):
    """Equilibrium energy density (1/(2pi)^d) int h / (e^{h/k_B T} - 1) dq.

    Vectorized over ``T``; the dimensionless radial integral is computed once
    by quadrature and rescaled analytically in T.
    """
    T = np.asarray(T, dtype=float)
    if np.any(~(T > 0)):
        raise DomainError("temperature must be > 0")
    model = branch.dispersion
    d = model.dim
    kT = k_B * T
    pref = sphere_measure(d) / TWO_PI ** d
    if model.kind == "debye":
        out = pref * bose_moment(d, spec) * kT ** (d + 1) / model.param ** d
    elif model.kind == "quadratic":
        out = pref * 0.5 * bose_moment(d / 2, spec) * kT * (kT / model.param) ** (d / 2)
    else:
        eps = model.param
        with np.errstate(over="ignore"):
            out = branch.bz_volume / TWO_PI ** d * eps / np.expm1(eps / kT)
    return out if np.ndim(out) else float(out)


def equilibrium_energy_density_dT(branch: BranchConfig, T, spec: QuadratureSpec = DEFAULT_SPEC,
                                  k_B: float = 1.0):
    """Temperature derivative of :func:`equilibrium_energy_density`."""
    T = np.asarray(T, dtype=float)
    model = branch.dispersion
    d = model.dim
    if model.kind == "debye":
        out = (d + 1) * equilibrium_energy_density(branch, T, spec, k_B) / T
    elif model.kind == "quadratic":
        out = (d / 2 + 1) * equilibrium_energy_density(branch, T, spec, k_B) / T
    else:
        x = model.param / (k_B * T)
        with np.errstate(over="ignore", invalid="ignore"):
            # e^x / (e^x - 1)^2 written in e^{-x} to avoid overflow
            u = np.exp(-x)
            occ2 = u / (-np.expm1(-x)) ** 2
        out = branch.bz_volume / TWO_PI ** d * model.param * x / T * occ2
    return out if np.ndim(out) else float(out)

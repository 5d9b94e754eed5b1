"""Quantum maximum-entropy closure for energy and energy-flux moments.

The closure distribution is expanded as g = g0 + hbar^2 g2 with
g0 = 1/(e^xi - 1) and xi = eta0 h + eta1 . (c h). Multipliers are split the
same way, eta = eta^(0) + hbar^2 eta^(2); the order-hbar^2 moments are linear
in eta^(2) with the zero-order Jacobian as coefficient matrix.

Debye branches are handled by separating the radial integral: every moment is
a dimensionless Bose integral times an angular sum of powers of
beta(n) = eta0 + c eta1 . n, which is the inverse directional temperature.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np
from scipy import integrate

from .bose_integrals import (DEFAULT_SPEC, TWO_PI, BranchConfig, QuadratureSpec,
                             bose_moment, closure_integral,
                             reduced_moment, sphere_measure, sphere_quadrature)
from .dispersion import DispersionModel
from .errors import (ComplexEigenvalues, DivergentIntegral, NoConvergence,
                     NonPositiveExponent, OutsideRealizableSet)


# -- state containers -------------------------------------------------------

@dataclass
class LagrangeMultipliers:
    """Zero-order multipliers (eta0, eta1) and their hbar^2 parts.

    Arrays may carry leading batch dimensions; ``eta1`` has trailing size d.
    """

    eta0: np.ndarray
    eta1: np.ndarray
    eta0_2: np.ndarray | float = 0.0
    eta1_2: np.ndarray | float = 0.0

    def __post_init__(self):
        self.eta0 = np.asarray(self.eta0, dtype=float)
        self.eta1 = np.asarray(self.eta1, dtype=float)
        self.eta0_2 = np.broadcast_to(np.asarray(self.eta0_2, dtype=float), self.eta0.shape).copy()
        self.eta1_2 = np.broadcast_to(np.asarray(self.eta1_2, dtype=float), self.eta1.shape).copy()

    @classmethod
    def equilibrium(cls, T, d: int = 3, k_B: float = 1.0) -> "LagrangeMultipliers":
        T = np.asarray(T, dtype=float)
        return cls(1.0 / (k_B * T), np.zeros(T.shape + (d,)))

    @property
    def dim(self) -> int:
        return self.eta1.shape[-1]

    def zero_order_vector(self) -> np.ndarray:
        return np.concatenate([self.eta0[..., None], self.eta1], axis=-1)

    def second_order_vector(self) -> np.ndarray:
        return np.concatenate([self.eta0_2[..., None], self.eta1_2], axis=-1)


@dataclass
class MultiplierJet:
    """Spatial derivatives of the zero-order multipliers.

    ``grad_eta1[..., i, k]`` is d eta1_k / dx_i and ``hess_eta1[..., i, j, k]``
    is d^2 eta1_k / dx_i dx_j.
    """

    grad_eta0: np.ndarray
    grad_eta1: np.ndarray
    hess_eta0: np.ndarray
    hess_eta1: np.ndarray

    @classmethod
    def zeros(cls, d: int = 3, batch: tuple = ()) -> "MultiplierJet":
        return cls(np.zeros(batch + (d,)), np.zeros(batch + (d, d)),
                   np.zeros(batch + (d, d)), np.zeros(batch + (d, d, d)))

    @classmethod
    def from_temperature(cls, tjet: "TemperatureJet", k_B: float = 1.0) -> "MultiplierJet":
        """Jet of eta0 = 1/(k_B T(x)) with eta1 = 0."""
        T = np.asarray(tjet.T, dtype=float)
        G = np.asarray(tjet.grad, dtype=float)
        H = np.asarray(tjet.hess, dtype=float)
        d = G.shape[-1]
        Te = T[..., None]
        grad = -G / (k_B * Te ** 2)
        hess = (-H / Te[..., None] ** 2
                + 2.0 * G[..., :, None] * G[..., None, :] / Te[..., None] ** 3) / k_B
        return cls(grad, np.zeros(T.shape + (d, d)), hess, np.zeros(T.shape + (d, d, d)))


@dataclass
class MomentState:
    """Energy density W and energy flux Q split into orders hbar^0 and hbar^2."""

    W0: np.ndarray
    Q0: np.ndarray
    W2: np.ndarray | float = 0.0
    Q2: np.ndarray | float = 0.0

    def __post_init__(self):
        self.W0 = np.asarray(self.W0, dtype=float)
        self.Q0 = np.asarray(self.Q0, dtype=float)
        self.W2 = np.broadcast_to(np.asarray(self.W2, dtype=float), self.W0.shape).copy()
        self.Q2 = np.broadcast_to(np.asarray(self.Q2, dtype=float), self.Q0.shape).copy()

    def total(self, hbar: float) -> tuple[np.ndarray, np.ndarray]:
        return self.W0 + hbar ** 2 * self.W2, self.Q0 + hbar ** 2 * self.Q2


@dataclass
class XiJet:
    """Value and first/second phase-space derivatives of a symbol at a point.

    ``hess_xq[..., i, j]`` is d^2 xi / dx_i dq_j.
    """

    value: np.ndarray
    grad_x: np.ndarray
    grad_q: np.ndarray
    hess_xx: np.ndarray
    hess_xq: np.ndarray
    hess_qq: np.ndarray


@dataclass
class TemperatureJet:
    """Temperature and its spatial derivatives at one point (or a batch)."""

    T: np.ndarray
    grad: np.ndarray
    hess: np.ndarray
    third: np.ndarray | None = None

    def __post_init__(self):
        self.T = np.asarray(self.T, dtype=float)
        self.grad = np.asarray(self.grad, dtype=float)
        self.hess = np.asarray(self.hess, dtype=float)
        if self.third is not None:
            self.third = np.asarray(self.third, dtype=float)
        if np.any(~(self.T > 0)):
            raise OutsideRealizableSet("temperature must be > 0")

    @classmethod
    def uniform(cls, T: float, d: int = 3) -> "TemperatureJet":
        return cls(T, np.zeros(d), np.zeros((d, d)), np.zeros((d, d, d)))


@dataclass(frozen=True)
class ClosureTensors:
    J: np.ndarray
    T3: np.ndarray
    U4: np.ndarray


# -- pointwise symbols ---------------------------------------------------------

def xi_value(eta: LagrangeMultipliers, model: DispersionModel, q):
    q = np.asarray(q, dtype=float)
    h = model.energy(q)
    xi = eta.eta0 * h
    if model.kind != "einstein" and np.any(eta.eta1 != 0):
        c = model.group_velocity(q)
        xi = xi + np.sum(eta.eta1 * c, axis=-1) * h
    if np.any(~(xi > 0)):
        raise NonPositiveExponent("xi = eta0 h + eta1.c h must be > 0")
    return xi


def g0_mep(eta: LagrangeMultipliers, model: DispersionModel, q):
    xi = xi_value(eta, model, q)
    with np.errstate(over="ignore"):
        return 1.0 / np.expm1(xi)


def _bose_factors(xi):
    """e^xi(e^xi+1)/(e^xi-1)^3 and e^xi(e^2xi+4e^xi+1)/(e^xi-1)^4, overflow-safe."""
    u = np.exp(-xi)
    om = -np.expm1(-xi)
    return u * (1.0 + u) / om ** 3, u * (1.0 + 4.0 * u + u * u) / om ** 4


def xi_jet(eta: LagrangeMultipliers, jet: MultiplierJet, model: DispersionModel, q) -> XiJet:
    """Build the phase-space jet of xi = eta0(x) h(q) + eta1(x) . c(q) h(q)."""
    q = np.asarray(q, dtype=float)
    h = model.energy(q)
    c = model.group_velocity(q)
    H = model.hessian(q)
    T3 = model.third_derivatives(q)
    eta0, eta1 = eta.eta0, eta.eta1
    v = c * h[..., None]                                   # c h
    dv = H * h[..., None, None] + c[..., :, None] * c[..., None, :]   # d(c_k h)/dq_j, [k, j]
    value = eta0 * h + np.sum(eta1 * v, axis=-1)
    grad_q = eta0[..., None] * c + np.einsum("...k,...kj->...j", eta1, dv)
    # d^2(c_k h)/dq_j dq_l
    d2v = (T3 * h[..., None, None, None]
           + H[..., :, :, None] * c[..., None, None, :]
           + H[..., :, None, :] * c[..., None, :, None]
           + c[..., :, None, None] * H[..., None, :, :])
    hess_qq = eta0[..., None, None] * H + np.einsum("...k,...kjl->...jl", eta1, d2v)
    grad_x = jet.grad_eta0 * h[..., None] + np.einsum("...ik,...k->...i", jet.grad_eta1, v)
    hess_xx = jet.hess_eta0 * h[..., None, None] + np.einsum("...ijk,...k->...ij", jet.hess_eta1, v)
    hess_xq = (jet.grad_eta0[..., :, None] * c[..., None, :]
               + np.einsum("...ik,...kj->...ij", jet.grad_eta1, dv))
    return XiJet(value, grad_x, grad_q, hess_xx, hess_xq, hess_qq)


def g2_mep_generic(jet: XiJet):
    """Order-hbar^2 coefficient of the closure distribution from a xi jet."""
    xi = np.asarray(jet.value, dtype=float)
    if np.any(~(xi > 0)):
        raise NonPositiveExponent("g2 requires xi > 0")
    xx, xq, qq = jet.hess_xx, jet.hess_xq, jet.hess_qq
    gx, gq = jet.grad_x, jet.grad_q
    t1 = np.einsum("...ij,...ij->...", xx, qq) - np.einsum("...ij,...ji->...", xq, xq)
    t2 = (np.einsum("...ij,...i,...j->...", xx, gq, gq)
          - 2.0 * np.einsum("...ij,...i,...j->...", xq, gq, gx)
          + np.einsum("...ij,...i,...j->...", qq, gx, gx))
    e1, e2 = _bose_factors(xi)
    return -0.125 * (e1 * t1 - e2 / 3.0 * t2)


def g2_mep_debye(tjet: TemperatureJet, c: float, q, k_B: float = 1.0):
    """Closed-form g2 for a Debye branch at local equilibrium, xi = c|q|/k_B T."""
    q = np.asarray(q, dtype=float)
    r = np.linalg.norm(q, axis=-1)
    from .dispersion import Q_MIN
    from .errors import DegenerateMomentum
    if np.any(r < Q_MIN):
        raise DegenerateMomentum("g2 is singular at q = 0")
    n = q / r[..., None]
    T = tjet.T
    G = tjet.grad
    Hs = tjet.hess
    xi = c * r / (k_B * T)
    if np.any(~(xi > 0)):
        raise NonPositiveExponent("g2 requires xi > 0")
    e1, e2 = _bose_factors(xi)
    GG = np.einsum("...i,...i->...", G, G)
    Gn = np.einsum("...i,...i->...", G, n)
    nHn = np.einsum("...i,...ij,...j->...", n, Hs, n)
    lap = np.trace(Hs, axis1=-2, axis2=-1)
    block1 = (2.0 * GG - T * lap + T * nHn - 3.0 * Gn ** 2) / (k_B ** 2 * T ** 4)
    block2 = c * r * ((GG - Gn ** 2) - T * nHn) / (k_B ** 3 * T ** 5)
    return -0.125 * c ** 2 * (e1 * block1 - e2 / 3.0 * block2)


def quantum_exp_term2(a: XiJet):
    """hbar^2 coefficient of the quantum exponential Exp(a)."""
    xx, xp, pp = a.hess_xx, a.hess_xq, a.hess_qq
    ax, ap = a.grad_x, a.grad_q
    bracket = (np.einsum("...ij,...ij->...", xx, pp)
               - np.einsum("...ij,...ji->...", xp, xp)
               + np.einsum("...ij,...i,...j->...", xx, ap, ap) / 3.0
               - 2.0 / 3.0 * np.einsum("...ij,...i,...j->...", xp, ap, ax)
               + np.einsum("...ij,...i,...j->...", pp, ax, ax) / 3.0)
    return -0.125 * np.exp(a.value) * bracket


# -- realizability -------------------------------------------------------------

def is_realizable(eta: LagrangeMultipliers, model: DispersionModel) -> np.ndarray:
    """xi > 0 on all of momentum space (away from q = 0)."""
    eta0 = np.asarray(eta.eta0)
    norm1 = np.linalg.norm(eta.eta1, axis=-1)
    if model.kind == "debye":
        return eta0 > model.param * norm1
    if model.kind == "quadratic":
        # xi = alpha q^2 (eta0 + 2 alpha eta1 . q) is unbounded below if eta1 != 0
        return (eta0 > 0) & (norm1 == 0)
    return eta0 > 0


def _require_realizable(eta, model):
    ok = is_realizable(eta, model)
    if not np.all(ok):
        raise NonPositiveExponent(
            "multipliers give xi <= 0 somewhere in momentum space "
            f"({np.size(ok) - np.count_nonzero(ok)} state(s))")


# -- zero-order moment maps ---------------------------------------------------

@dataclass
class ZeroOrder:
    """Zero-order moments and derivatives with respect to (eta0, eta1)."""

    W: np.ndarray
    Q: np.ndarray
    J: np.ndarray
    jac: np.ndarray           # d(W, Q)/d(eta0, eta1), shape (..., d+1, d+1)
    jac_J: np.ndarray | None = field(default=None, repr=False)   # dJ/d eta, (..., d, d, d+1)


def _debye_constant(model: DispersionModel, spec: QuadratureSpec) -> float:
    d = model.dim
    return bose_moment(d, spec) / (TWO_PI ** d * model.param ** d)


def _ipow(x, k: int):
    """x**k for a small positive integer k by repeated multiplication."""
    out = x
    for _ in range(k - 1):
        out = out * x
    return out


def _angular_sum(p, *factors):
    """sum_a p[..., a] f1[a, i] f2[a, j] ... as a matrix product."""
    outer = factors[0]
    for f in factors[1:]:
        outer = (outer[..., None] * f.reshape((f.shape[0],) + (1,) * (outer.ndim - 1) + f.shape[1:]))
    flat = outer.reshape(outer.shape[0], -1)
    return (p @ flat).reshape(p.shape[:-1] + outer.shape[1:])


def _debye_zero_order(eta0, eta1, model, spec, quad, with_jac_J=False) -> ZeroOrder:
    d = model.dim
    c = model.param
    K = _debye_constant(model, spec)
    n, w = quad.nodes, quad.weights
    beta = eta0[..., None] + c * eta1 @ n.T                       # (..., M)
    ib = 1.0 / beta
    p1 = w * _ipow(ib, d + 1)
    p2 = p1 * ib
    psi = np.concatenate([np.ones((len(w), 1)), c * n], axis=-1)  # (M, d+1)
    U = K * p1 @ psi
    W, Q = U[..., 0], U[..., 1:]
    J = K * c * c * _angular_sum(p1, n, n)
    jac = -(d + 1) * K * _angular_sum(p2, psi, psi)
    jac_J = None
    if with_jac_J:
        jac_J = -(d + 1) * K * c * c * _angular_sum(p2, n, n, psi)

    iso = np.all(eta1 == 0, axis=-1)
    if np.any(iso):
        # exact angular identities; the flux vanishes by parity
        mis = sphere_measure(d)
        b1 = eta0 ** (-(d + 1))
        b2 = eta0 ** (-(d + 2))
        eye = np.eye(d)
        W_iso = K * mis * b1
        J_iso = K * c * c * (mis / d) * b1[..., None, None] * eye
        jac_iso = np.zeros(jac.shape)
        jac_iso[..., 0, 0] = -(d + 1) * K * mis * b2
        jac_iso[..., 1:, 1:] = -(d + 1) * K * c * c * (mis / d) * b2[..., None, None] * eye
        W = np.where(iso, W_iso, W)
        Q = np.where(iso[..., None], 0.0, Q)
        J = np.where(iso[..., None, None], J_iso, J)
        jac = np.where(iso[..., None, None], jac_iso, jac)
        if with_jac_J:
            # dJ/d eta1 is an odd angular moment and vanishes at isotropy
            jiso = np.zeros(jac_J.shape)
            jiso[..., 0] = -(d + 1) * K * c * c * (mis / d) * b2[..., None, None] * eye
            jac_J = np.where(iso[..., None, None, None], jiso, jac_J)
    return ZeroOrder(W, Q, J, jac, jac_J)


def _quadratic_zero_order(eta0, eta1, model, spec, with_jac_J=False) -> ZeroOrder:
    d = model.dim
    a = model.param
    mis = sphere_measure(d)
    pref = mis / TWO_PI ** d
    x = eta0 * a
    W = pref * 0.5 * bose_moment(d / 2, spec) / (eta0 * x ** (d / 2))
    eye = np.eye(d)
    J = (pref / d * 4.0 * a ** 3 * 0.5 * bose_moment((d + 2) / 2, spec)
         * x ** (-(d + 4) / 2))[..., None, None] * eye
    jac = np.zeros(eta0.shape + (d + 1, d + 1))
    jac[..., 0, 0] = -(d / 2 + 1) * W / eta0
    # formal derivative at eta1 = 0: -int (c h)(c h)^T e^xi/(e^xi-1)^2
    dq = -pref / d * 4.0 * a ** 4 * 0.5 * reduced_moment((d + 4) / 2, spec) * x ** (-(d + 6) / 2)
    jac[..., 1:, 1:] = dq[..., None, None] * eye
    jac_J = None
    if with_jac_J:
        jac_J = np.zeros(eta0.shape + (d, d, d + 1))
        jac_J[..., 0] = -(d / 2 + 2) * J / eta0[..., None, None]
    return ZeroOrder(W, np.zeros(eta1.shape), J, jac, jac_J)


def _einstein_zero_order(eta0, eta1, branch, with_jac_J=False) -> ZeroOrder:
    d = branch.dim
    eps = branch.dispersion.param
    V = branch.bz_volume / TWO_PI ** d
    x = eta0 * eps
    with np.errstate(over="ignore"):
        u = np.exp(-x)
        om = -np.expm1(-x)
        W = V * eps * u / om
        dW = -V * eps * eps * u / om ** 2
    jac = np.zeros(eta0.shape + (d + 1, d + 1))
    jac[..., 0, 0] = dW
    jac_J = np.zeros(eta0.shape + (d, d, d + 1)) if with_jac_J else None
    return ZeroOrder(W, np.zeros(eta1.shape), np.zeros(eta0.shape + (d, d)), jac, jac_J)


def zero_order(eta: LagrangeMultipliers, branch: BranchConfig, spec: QuadratureSpec = DEFAULT_SPEC,
               quad=None, with_jac_J: bool = False) -> ZeroOrder:
    model = branch.dispersion
    _require_realizable(eta, model)
    if model.kind == "debye":
        quad = quad or sphere_quadrature(model.dim)
        return _debye_zero_order(eta.eta0, eta.eta1, model, spec, quad, with_jac_J)
    if model.kind == "quadratic":
        return _quadratic_zero_order(eta.eta0, eta.eta1, model, spec, with_jac_J)
    return _einstein_zero_order(eta.eta0, eta.eta1, branch, with_jac_J)


# -- order hbar^2 source terms ---------------------------------------------------

@dataclass
class SecondOrderSources:
    """Moments of g2(eta^(0)): the eta^(2)-independent part of W2, Q2, J2."""

    W: np.ndarray
    Q: np.ndarray
    J: np.ndarray


def _debye_g2_sources(eta0, eta1, jet: MultiplierJet, model, spec, quad) -> SecondOrderSources:
    d = model.dim
    c = model.param
    I1 = closure_integral("I1", d, spec)
    I2 = closure_integral("I2", d, spec)
    n, w = quad.nodes, quad.weights
    eye = np.eye(d)
    P = eye - n[:, :, None] * n[:, None, :]                          # (M, d, d)
    beta = eta0[..., None] + c * eta1 @ n.T                            # (..., M)
    dbeta = jet.grad_eta0[..., None, :] + c * np.einsum("...ik,ak->...ai", jet.grad_eta1, n)
    ddbeta = (jet.hess_eta0[..., None, :, :]
              + c * np.einsum("...ijk,ak->...aij", jet.hess_eta1, n))
    Mx = (jet.grad_eta0[..., None, :, None] * n[:, None, :]
          + c * jet.grad_eta1[..., None, :, :])                        # (..., M, d, d)
    s = eta0[..., None, None] * n + c * eta1[..., None, :]             # (..., M, d)
    e0 = eta0[..., None]
    A = (e0 * np.einsum("aij,...aij->...a", P, ddbeta)
         - np.einsum("...aij,...aji->...a", Mx, Mx))
    B = (np.einsum("...ai,...aij,...aj->...a", s, ddbeta, s)
         - 2.0 * np.einsum("...aij,...ai,...aj->...a", Mx, s, dbeta)
         + e0 * np.einsum("...ai,aij,...aj->...a", dbeta, P, dbeta))
    kernel = w * (-(I1 / 8.0) * A * beta ** (-(d + 1)) + (I2 / 24.0) * B * beta ** (-(d + 2)))
    pref = c ** (2 - d) / TWO_PI ** d
    GW = pref * kernel.sum(axis=-1)
    GQ = pref * c * kernel @ n
    GJ = pref * c * c * _angular_sum(kernel, n, n)
    return SecondOrderSources(GW, GQ, GJ)


def _numeric_g2_sources(eta, jet, branch, spec, quad) -> SecondOrderSources:
    """Radial adaptive quadrature of g2 moments for a single state."""
    model = branch.dispersion
    d = model.dim
    n, w = quad.nodes, quad.weights
    kT = 1.0 / float(eta.eta0)
    scale = model.thermal_momentum(kT)

    def integrand(r):
        q = r * scale * n
        xj = xi_jet(eta, jet, model, q)
        g2 = g2_mep_generic(xj)
        h = model.energy(q)
        c = model.group_velocity(q)
        wt = w * h * g2 * (r * scale) ** (d - 1) * scale
        return np.concatenate([[wt.sum()], wt @ c, np.einsum("a,ai,aj->ij", wt, c, c).ravel()])

    # the small-|q| behaviour is integrable; quad_vec never samples r = 0
    val, _ = integrate.quad_vec(integrand, 0.0, 60.0, epsabs=spec.absolute_tolerance,
                                epsrel=max(spec.relative_tolerance, 1e-10), limit=spec.max_subdivisions)
    val = val / TWO_PI ** d
    return SecondOrderSources(val[0], val[1:d + 1], val[d + 1:].reshape(d, d))


def second_order_sources(eta: LagrangeMultipliers, jet: MultiplierJet | None, branch: BranchConfig,
                         spec: QuadratureSpec = DEFAULT_SPEC, quad=None) -> SecondOrderSources:
    model = branch.dispersion
    d = model.dim
    batch = eta.eta0.shape
    zeros = SecondOrderSources(np.zeros(batch), np.zeros(batch + (d,)), np.zeros(batch + (d, d)))
    if jet is None or model.kind == "einstein":
        # every term of g2 carries a momentum derivative of xi
        return zeros
    if model.kind == "debye":
        if d < 3:
            closure_integral("I1", d, spec)   # raises DivergentIntegral
        quad = quad or sphere_quadrature(d)
        return _debye_g2_sources(eta.eta0, eta.eta1, jet, model, spec, quad)
    quad = quad or sphere_quadrature(d, 16, 16)
    if batch:
        raise NotImplementedError("numeric g2 moments are evaluated one state at a time")
    return _numeric_g2_sources(eta, jet, branch, spec, quad)


# -- public moment maps ----------------------------------------------------------

def moments_from_multipliers(eta: LagrangeMultipliers, branch: BranchConfig,
                             spec: QuadratureSpec = DEFAULT_SPEC, jet: MultiplierJet | None = None,
                             quad=None) -> MomentState:
    """(W, Q) at orders hbar^0 and hbar^2 from the multipliers.

    ``jet`` carries spatial derivatives of eta^(0); without it g2 = 0 and the
    order-hbar^2 moments are the linear response to eta^(2) alone.
    """
    z = zero_order(eta, branch, spec, quad)
    lin = np.einsum("...ij,...j->...i", z.jac, eta.second_order_vector())
    src = second_order_sources(eta, jet, branch, spec, quad)
    return MomentState(z.W, z.Q, lin[..., 0] + src.W, lin[..., 1:] + src.Q)


def flux_tensor_j(eta: LagrangeMultipliers, branch: BranchConfig, spec: QuadratureSpec = DEFAULT_SPEC,
                  order: int = 0, jet: MultiplierJet | None = None, quad=None) -> np.ndarray:
    """J = (1/(2pi)^d) int c (x) c h g dq at order 0 or 2."""
    if order not in (0, 2):
        raise ValueError("order must be 0 or 2")
    z = zero_order(eta, branch, spec, quad, with_jac_J=(order == 2))
    if order == 0:
        return z.J
    src = second_order_sources(eta, jet, branch, spec, quad)
    return np.einsum("...ijk,...k->...ij", z.jac_J, eta.second_order_vector()) + src.J


def closure_tensors_TU(eta: LagrangeMultipliers, branch: BranchConfig,
                       spec: QuadratureSpec = DEFAULT_SPEC, quad=None) -> ClosureTensors:
    """J, T_ijk = <h d^3h/dq_i dq_j dq_k> and U_ijkr = <c_r h d^3h> at order 0.

    For Debye the radial factor is int q^(d-2) g0 dq, which behaves as
    q^(d-3) at the origin and is finite only for d = 3.
    """
    model = branch.dispersion
    d = model.dim
    z = zero_order(eta, branch, spec, quad)
    batch = eta.eta0.shape
    if model.kind != "debye":
        return ClosureTensors(z.J, np.zeros(batch + (d,) * 3), np.zeros(batch + (d,) * 4))
    if d < 3:
        raise DivergentIntegral(
            f"T and U tensors diverge for Debye branches in d={d}: radial integrand ~ q^{d - 3}")
    c = model.param
    quad = quad or sphere_quadrature(d)
    n, w = quad.nodes, quad.weights
    eye = np.eye(d)
    t = (3.0 * np.einsum("ai,aj,ak->aijk", n, n, n)
         - np.einsum("ij,ak->aijk", eye, n) - np.einsum("ik,aj->aijk", eye, n)
         - np.einsum("jk,ai->aijk", eye, n))
    beta = eta.eta0[..., None] + c * eta.eta1 @ n.T
    pw = w * beta ** (-(d - 1))
    radial = bose_moment(d - 2, spec) * c ** (-(d - 1)) / TWO_PI ** d
    T3 = c * c * radial * _angular_sum(pw, t)
    U4 = c ** 3 * radial * _angular_sum(pw, t, n)
    return ClosureTensors(z.J, T3, U4)


# -- inversion ---------------------------------------------------------------------

def initial_guess(target: MomentState, branch: BranchConfig, spec: QuadratureSpec = DEFAULT_SPEC):
    """Closed-form equilibrium eta0 from W and linear-response eta1 from Q."""
    model = branch.dispersion
    d = model.dim
    W = target.W0
    if model.kind == "debye":
        c = model.param
        Kw = _debye_constant(model, spec) * sphere_measure(d)
        eta0 = (Kw / W) ** (1.0 / (d + 1))
        eta1 = -target.Q0 * (d * eta0 ** (d + 2) / ((d + 1) * Kw * c * c))[..., None]
        norm = np.linalg.norm(eta1, axis=-1)
        shrink = np.where(c * norm > 0.5 * eta0, 0.5 * eta0 / np.maximum(c * norm, 1e-300), 1.0)
        return eta0, eta1 * shrink[..., None]
    if model.kind == "quadratic":
        a = model.param
        C = sphere_measure(d) / TWO_PI ** d * 0.5 * bose_moment(d / 2, spec) * a ** (-d / 2)
        return (C / W) ** (1.0 / (d / 2 + 1)), np.zeros(target.Q0.shape)
    eps = model.param
    V = branch.bz_volume / TWO_PI ** d
    return np.log1p(V * eps / W) / eps, np.zeros(target.Q0.shape)


def multipliers_from_moments(target: MomentState, branch: BranchConfig,
                             spec: QuadratureSpec = DEFAULT_SPEC,
                             guess: LagrangeMultipliers | None = None,
                             jet: MultiplierJet | None = None, quad=None,
                             tol: float = 1e-13, max_iter: int = 60,
                             max_halvings: int = 40) -> LagrangeMultipliers:
    """Invert the moment map: damped Newton at order 0, linear solve at order 2."""
    model = branch.dispersion
    d = model.dim
    W = target.W0
    Q = target.Q0
    if np.any(~(W > 0)):
        raise OutsideRealizableSet("energy density must be > 0")
    qnorm = np.linalg.norm(Q, axis=-1)
    if model.kind == "debye":
        if np.any(qnorm >= model.param * W):
            raise OutsideRealizableSet("|Q| >= c W cannot be the flux of a positive distribution")
    elif np.any(qnorm > 0):
        raise OutsideRealizableSet(
            f"{model.kind} closures carry no zero-order flux; Q0 must vanish")

    if model.kind == "debye":
        if guess is None:
            eta0, eta1 = initial_guess(target, branch, spec)
        else:
            eta0, eta1 = np.array(guess.eta0, dtype=float), np.array(guess.eta1, dtype=float)
        eta0, eta1 = _newton_debye(W, Q, eta0, eta1, model, spec,
                                   quad or sphere_quadrature(d), tol, max_iter, max_halvings)
    else:
        # closed-form inverse for the flux-free branches
        eta0, eta1 = initial_guess(target, branch, spec)

    eta = LagrangeMultipliers(eta0, eta1)
    z = zero_order(eta, branch, spec, quad)
    src = second_order_sources(eta, jet, branch, spec, quad)
    rhs = np.concatenate([(target.W2 - src.W)[..., None], target.Q2 - src.Q], axis=-1)
    if model.kind == "einstein":
        if np.any(target.Q2 != 0):
            raise OutsideRealizableSet("Einstein branches carry no flux at any order")
        e2 = np.zeros(rhs.shape)
        e2[..., 0] = rhs[..., 0] / z.jac[..., 0, 0]
    else:
        e2 = np.linalg.solve(z.jac, rhs[..., None])[..., 0]
    return LagrangeMultipliers(eta0, eta1, e2[..., 0], e2[..., 1:])


def _newton_debye(W, Q, eta0, eta1, model, spec, quad, tol, max_iter, max_halvings):
    c = model.param
    eta0 = np.array(eta0, dtype=float)
    eta1 = np.array(eta1, dtype=float)
    scale = np.concatenate([W[..., None], np.repeat(c * W[..., None], Q.shape[-1], axis=-1)], axis=-1)
    target = np.concatenate([W[..., None], Q], axis=-1)
    for _ in range(max_iter):
        z = _debye_zero_order(eta0, eta1, model, spec, quad)
        res = np.concatenate([z.W[..., None], z.Q], axis=-1) - target
        err = np.max(np.abs(res / scale), axis=-1)
        if np.all(err <= tol):
            return eta0, eta1
        step = -np.linalg.solve(z.jac, res[..., None])[..., 0]
        step = np.where((err <= tol)[..., None], 0.0, step)
        alpha = np.ones(eta0.shape)
        for _ in range(max_halvings + 1):
            e0 = eta0 + alpha * step[..., 0]
            e1 = eta1 + alpha[..., None] * step[..., 1:]
            bad = ~(e0 > c * np.linalg.norm(e1, axis=-1))
            if not np.any(bad):
                break
            alpha = np.where(bad, 0.5 * alpha, alpha)
        else:
            raise OutsideRealizableSet("Newton step left the realizable set after step halving")
        eta0, eta1 = e0, e1
    raise NoConvergence(f"moment inversion did not converge in {max_iter} iterations "
                        f"(max scaled residual {float(np.max(err)):.3g})")


# -- hyperbolicity ------------------------------------------------------------------

def characteristic_speeds(eta: LagrangeMultipliers, branch: BranchConfig, direction: int = 0,
                          spec: QuadratureSpec = DEFAULT_SPEC, quad=None) -> np.ndarray:
    """Eigenvalues of the zero-order system along ``direction``.

    Solves d F_x/d eta v = lambda d U/d eta v, a symmetric-definite pair
    whenever the state is realizable; returns sorted eigenvalues.
    """
    model = branch.dispersion
    d = model.dim
    if model.kind != "debye":
        return np.zeros(eta.eta0.shape + (d + 1,))
    if not np.all(is_realizable(eta, model)):
        raise ComplexEigenvalues("state outside the realizable set; hyperbolicity is lost")
    c = model.param
    quad = quad or sphere_quadrature(d)
    n, w = quad.nodes, quad.weights
    K = _debye_constant(model, spec)
    beta = eta.eta0[..., None] + c * eta.eta1 @ n.T
    p2 = w * _ipow(1.0 / beta, d + 2)
    psi = np.concatenate([np.ones((len(w), 1)), c * n], axis=-1)
    A = _angular_sum(p2, psi, psi)
    B = _angular_sum(p2 * c * n[:, direction], psi, psi)
    lam = np.linalg.eigvals(np.linalg.solve(A, B))
    scale = np.max(np.abs(lam), axis=-1, keepdims=True) + c * 1e-300
    if np.any(np.abs(lam.imag) > 1e-8 * scale):
        raise ComplexEigenvalues("characteristic speeds have non-negligible imaginary parts")
    return np.sort(lam.real, axis=-1)

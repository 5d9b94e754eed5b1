"""Oracle cross-checks grouped into suites (moyal, closure, heatflux).

Every check returns the measured error next to its tolerance; a suite passes
when every error is within tolerance. Random inputs use fixed seeds so the
report is reproducible.
"""

from __future__ import annotations

import math
from dataclasses import asdict, dataclass

import numpy as np
from scipy import integrate

from .bose_integrals import BranchConfig, closure_integral, reduced_moment
from .dispersion import debye, quadratic
from .heat_flux import conductivity_zero, j2_tensor
from .moyal import (PhaseSpaceGrid, integral_form_apply, moyal_term, quantum_exp_term2_grid,
                    transport_apply)
from .qmep_closure import (LagrangeMultipliers, MultiplierJet, TemperatureJet, XiJet, flux_tensor_j,
                           g2_mep_debye, g2_mep_generic, moments_from_multipliers,
                           multipliers_from_moments, quantum_exp_term2, xi_jet)

SUITES = ("moyal", "closure", "heatflux")


@dataclass
class Check:
    name: str
    error: float
    tolerance: float

    @property
    def passed(self) -> bool:
        return bool(np.isfinite(self.error) and self.error <= self.tolerance)

    def as_dict(self) -> dict:
        d = asdict(self)
        d["passed"] = self.passed
        return d


def _rel(a, b):
    a = np.asarray(a, dtype=complex if np.iscomplexobj(a) or np.iscomplexobj(b) else float)
    b = np.asarray(b, dtype=a.dtype)
    scale = np.max(np.abs(b))
    return float(np.max(np.abs(a - b)) / (scale if scale > 0 else 1.0))


# -- shared oracles ---------------------------------------------------------------

def richardson_ratio(model=None, hbars=(0.4, 0.2, 0.1), n=64):
    """Discrepancy ratios between the integral form and the hbar^2 operator."""
    model = model or debye(1.0)
    L = 2.0 * math.pi
    x = np.arange(n) * L / n
    rng = np.random.default_rng(7)
    q = rng.normal(size=(6, 3)) + np.array([1.5, 0.0, 0.0])
    grid = PhaseSpaceGrid.slab(x, q, periodic=True)
    g = (np.sin(x) + 0.3 * np.cos(2 * x))[:, None] * np.ones(len(q))
    errs = []
    for h in hbars:
        diff = integral_form_apply(model, g, grid, h) - transport_apply(model, g, grid, h, method="spectral")
        errs.append(float(np.max(np.abs(diff))))
    return [errs[i] / errs[i + 1] for i in range(len(errs) - 1)]


def random_parity_error(seed=3, n=15):
    rng = np.random.default_rng(seed)
    x = np.linspace(-1.0, 1.0, n)
    q = np.linspace(-1.0, 1.0, n)
    grid = PhaseSpaceGrid((x, x), (q, q))
    (X1, X2), (Q1, Q2) = grid.mesh()
    worst = 0.0
    for _ in range(3):
        c = rng.normal(size=8)
        a = np.exp(-(c[0] * X1 + c[1] * Q2) ** 2) * np.sin(c[2] * X2 + c[3] * Q1) + 0 * X1 * Q1 * X2 * Q2
        b = np.cos(c[4] * X1 * Q1 + c[5] * X2) * np.exp(c[6] * Q2 + c[7] * X1) + 0 * X1 * Q1 * X2 * Q2
        for k in (0, 1, 2):
            ab = moyal_term(k, a, b, grid)
            ba = moyal_term(k, b, a, grid)
            ok = np.isfinite(ab)
            err = np.max(np.abs(ab[ok] - (-1) ** k * ba[ok])) / max(np.max(np.abs(ab[ok])), 1e-300)
            worst = max(worst, float(err))
    return worst


def j2_quadrature(branch: BranchConfig, tjet: TemperatureJet, n_mu=24, n_phi=24, epsrel=1e-12):
    """(c^2/(2pi)^3) int n n h g2 dq by adaptive radial x product angular quadrature."""
    c = branch.dispersion.param
    mu, wm = np.polynomial.legendre.leggauss(n_mu)
    phi = np.arange(n_phi) * 2 * np.pi / n_phi
    M, P = np.meshgrid(mu, phi, indexing="ij")
    s = np.sqrt(1 - M ** 2)
    n = np.stack([M, s * np.cos(P), s * np.sin(P)], -1).reshape(-1, 3)
    w = (wm[:, None] * np.full(n_phi, 2 * np.pi / n_phi)).ravel()

    def f(r):
        g = g2_mep_debye(tjet, c, r * n)
        return np.einsum("a,ai,aj->ij", w * g * c * r * c * c * r * r, n, n).ravel()

    val, _ = integrate.quad_vec(f, 0.0, np.inf, epsrel=epsrel, epsabs=0.0)
    return val.reshape(3, 3) / (2 * np.pi) ** 3


def g2_debye_generic_pair(T, G, H, q, c=1.0):
    tj = TemperatureJet(T, G, H)
    eta = LagrangeMultipliers(1.0 / T, np.zeros(3))
    jet = MultiplierJet.from_temperature(tj)
    return g2_mep_debye(tj, c, q), g2_mep_generic(xi_jet(eta, jet, debye(c), q))


# -- suites -------------------------------------------------------------------------

def moyal_suite() -> list[Check]:
    checks = []
    x = np.linspace(-1, 1, 21)
    grid = PhaseSpaceGrid((x,), (x,))
    (X,), (Q,) = grid.mesh()
    X, Q = X + 0 * Q, Q + 0 * X
    m1 = moyal_term(1, X, Q, grid)
    checks.append(Check("moyal #1 of linear symbols equals i/2", _rel(m1[1:-1, 1:-1], 0.5j), 1e-12))
    checks.append(Check("moyal parity a#b = (-1)^n b#a", random_parity_error(), 1e-12))

    xs = np.linspace(0.0, 2.0, 81)
    grid = PhaseSpaceGrid((xs,), (xs,))
    (X,), (Q,) = grid.mesh()
    e2 = quantum_exp_term2_grid(X * Q, grid)
    ref = quantum_exp_term2(XiJet(np.array(1.0), np.array([1.0]), np.array([1.0]),
                                  np.zeros((1, 1)), np.ones((1, 1)), np.zeros((1, 1))))
    checks.append(Check("Exp_2 from Moyal composition matches closed form", abs(e2[40, 40] - ref) / ref, 1e-3))

    n = 128
    L = 2 * math.pi
    xg = np.arange(n) * L / n
    qp = np.array([[1.0, 0.5, -0.2], [0.3, 1.0, 0.0]])
    g = np.sin(xg)[:, None] * np.ones(2)
    gridp = PhaseSpaceGrid.slab(xg, qp, periodic=True)
    m = debye(1.0)
    expect = np.cos(xg)[:, None] * (qp[:, 0] / np.linalg.norm(qp, axis=1))
    checks.append(Check("semiclassical transport equals c.grad g", _rel(transport_apply(m, g, gridp, 0.0), expect), 1e-3))
    mq = quadratic(0.7)
    checks.append(Check("integral form exact for quadratic symbols",
                        _rel(integral_form_apply(mq, g, gridp, 0.3),
                             transport_apply(mq, g, gridp, 0.3, method="spectral")), 1e-12))
    ratios = richardson_ratio()
    checks.append(Check("integral form minus hbar^2 operator is O(hbar^4) (ratio 16)",
                        max(abs(r - 16.0) / 16.0 for r in ratios), 0.2))
    return checks


def closure_suite() -> list[Check]:
    checks = []
    br = BranchConfig("LA", debye(1.0))
    m = moments_from_multipliers(LagrangeMultipliers(1.0, np.zeros(3)), br)
    checks.append(Check("W0 at eta0=1 equals pi^2/30", abs(m.W0 / (math.pi ** 2 / 30) - 1), 1e-12))
    checks.append(Check("isotropic state has zero flux", float(np.max(np.abs(m.Q0))), 0.0))
    J = flux_tensor_j(LagrangeMultipliers(1.0, np.zeros(3)), br)
    checks.append(Check("equilibrium J0 = (c^2/3) W0 I", _rel(J, m.W0 / 3 * np.eye(3)), 1e-12))

    rng = np.random.default_rng(11)
    worst = 0.0
    for _ in range(20):
        eta = LagrangeMultipliers(rng.uniform(0.5, 2.0), rng.uniform(-0.15, 0.15, 3))
        eta.eta1 *= eta.eta0
        back = multipliers_from_moments(moments_from_multipliers(eta, br), br)
        v, w = eta.zero_order_vector(), back.zero_order_vector()
        worst = max(worst, float(np.linalg.norm(v - w) / np.linalg.norm(v)))
    checks.append(Check("multiplier round trip", worst, 1e-8))

    worst = 0.0
    for _ in range(20):
        G = rng.normal(size=3) * 0.3
        H = rng.normal(size=(3, 3)) * 0.3
        a, b = g2_debye_generic_pair(rng.uniform(0.5, 2), G, H + H.T, rng.normal(size=3))
        worst = max(worst, abs(a - b) / max(abs(a), 1e-300))
    checks.append(Check("g2 Debye closed form equals generic formula", worst, 1e-10))

    ref = 5.0 / 24.0 * math.e
    val = quantum_exp_term2(XiJet(np.array(1.0), np.array([1.0]), np.array([1.0]),
                                  np.zeros((1, 1)), np.ones((1, 1)), np.zeros((1, 1))))
    checks.append(Check("Exp_2(xp) at (1,1) equals 5e/24", abs(val - ref) / ref, 1e-12))
    return checks


def heatflux_suite() -> list[Check]:
    checks = [
        Check("I1(3) = pi^2", abs(closure_integral("I1", 3) / math.pi ** 2 - 1), 1e-8),
        Check("I2(3) = 4 pi^2", abs(closure_integral("I2", 3) / (4 * math.pi ** 2) - 1), 1e-8),
    ]
    worst = max(abs(reduced_moment(n) / (math.factorial(n) * _zeta(n)) - 1) for n in range(2, 9))
    checks.append(Check("reduced moments equal n! zeta(n)", worst, 1e-10))
    br = BranchConfig("LA", debye(1.0))
    res = conductivity_zero(br, 1.0)
    checks.append(Check("k0(T=1) = 2 pi^2/15", abs(res.k_trace / (2 * math.pi ** 2 / 15) - 1), 1e-8))
    checks.append(Check("K0 isotropic", float(np.max(np.abs(res.K - res.k_trace / 3 * np.eye(3)))), 1e-14))
    checks.append(Check("log-log slope of k0 equals d", abs(res.temperature_exponent - 3.0), 1e-6))
    worst = 0.0
    for a, b in ((0.1, 0.05), (-0.2, 0.1), (0.05, -0.08)):
        tj = TemperatureJet(1.0, np.array([a, 0, 0]), np.diag([2 * b, 0, 0]))
        worst = max(worst, _rel(j2_tensor(br, tj), j2_quadrature(br, tj)))
    checks.append(Check("J2 closed form equals direct quadrature", worst, 1e-6))
    return checks


def _zeta(n):
    from scipy.special import zeta
    return float(zeta(n))


_RUNNERS = {"moyal": moyal_suite, "closure": closure_suite, "heatflux": heatflux_suite}


def run_suite(name: str, tolerance: float | None = None) -> dict:
    if name not in _RUNNERS:
        raise ValueError(f"unknown suite {name!r}; choose from {SUITES}")
    checks = _RUNNERS[name]()
    if tolerance is not None:
        for c in checks:
            c.tolerance = tolerance
    items = [c.as_dict() for c in checks]
    return {"suite": name, "passed": all(i["passed"] for i in items), "checks": items}

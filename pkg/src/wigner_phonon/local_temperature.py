"""Common local-equilibrium temperature across phonon branches."""

from __future__ import annotations

import logging
from dataclasses import dataclass, field

import numpy as np

from .bose_integrals import (DEFAULT_SPEC, BranchConfig, QuadratureSpec,
                             equilibrium_energy_density, equilibrium_energy_density_dT,
                             occupancy)
from .dispersion import DispersionModel, PhysicalScales
from .errors import DomainError, NoBracket, NoConvergence

log = logging.getLogger(__name__)

T_FLOOR = 1e-150
T_CEIL = 1e150


@dataclass(frozen=True)
class BranchEnsemble:
    branches: tuple
    scales: PhysicalScales = field(default_factory=PhysicalScales)

    def __post_init__(self):
        object.__setattr__(self, "branches", tuple(self.branches))
        if not self.branches:
            raise DomainError("an ensemble needs at least one branch")
        dims = {b.dim for b in self.branches}
        if len(dims) != 1:
            raise DomainError(f"all branches must share the dimension, got {sorted(dims)}")

    @property
    def dim(self) -> int:
        return self.branches[0].dim

    @property
    def k_B(self) -> float:
        return self.scales.k_B

    def __len__(self):
        return len(self.branches)

    def __iter__(self):
        return iter(self.branches)


def total_energy(ensemble: BranchEnsemble, T, spec: QuadratureSpec = DEFAULT_SPEC):
    return sum(equilibrium_energy_density(b, T, spec, ensemble.k_B) for b in ensemble)


def total_energy_dT(ensemble: BranchEnsemble, T, spec: QuadratureSpec = DEFAULT_SPEC):
    return sum(equilibrium_energy_density_dT(b, T, spec, ensemble.k_B) for b in ensemble)


def _initial_temperature(ensemble, W, spec):
    """Invert the power law of the dominant power-law branch, else start at 1."""
    coeffs = []
    for b in ensemble:
        if b.dispersion.kind == "einstein":
            continue
        d = b.dim
        p = d + 1 if b.dispersion.kind == "debye" else d / 2 + 1
        coeffs.append((equilibrium_energy_density(b, 1.0, spec, ensemble.k_B), p))
    if not coeffs:
        return np.ones(np.shape(W))
    a, p = max(coeffs, key=lambda t: t[0])
    a_tot = sum(c for c, pp in coeffs if pp == p)
    return (W / a_tot) ** (1.0 / p)


def solve_t_le(ensemble: BranchEnsemble, per_branch_W, spec: QuadratureSpec = DEFAULT_SPEC,
               tol: float = 1e-13, max_iter: int = 100):
    """Temperature T_LE with total_energy(T_LE) = sum of branch energies.

    ``per_branch_W`` is a sequence with one (broadcastable) array per branch.
    Returns ``(T_LE, eta0_LE)`` with eta0_LE = 1/(k_B T_LE).
    """
    Ws = [np.asarray(w, dtype=float) for w in per_branch_W]
    if len(Ws) != len(ensemble):
        raise DomainError(f"expected {len(ensemble)} branch energies, got {len(Ws)}")
    for w in Ws:
        if np.any(~(w > 0)):
            raise DomainError("branch energy densities must be > 0")
    W = sum(Ws)
    scalar = np.ndim(W) == 0
    W = np.atleast_1d(W)

    # geometric bracket around the power-law guess
    T0 = np.clip(_initial_temperature(ensemble, W, spec), 1e-100, 1e100)
    lo, hi = T0 / 2.0, T0 * 2.0
    for _ in range(400):
        flo = total_energy(ensemble, lo, spec) - W
        fhi = total_energy(ensemble, hi, spec) - W
        need_lo = flo > 0
        need_hi = fhi < 0
        if not (np.any(need_lo) or np.any(need_hi)):
            break
        lo = np.where(need_lo, lo / 4.0, lo)
        hi = np.where(need_hi, hi * 4.0, hi)
        if np.any(lo < T_FLOOR) or np.any(hi > T_CEIL) or not np.all(np.isfinite(fhi)):
            raise NoBracket("target energy lies outside representable temperatures")
    else:
        raise NoBracket("could not bracket the local-equilibrium temperature")

    # Newton with bisection safeguard
    T = np.clip(T0, lo, hi)
    for _ in range(max_iter):
        f = total_energy(ensemble, T, spec) - W
        if np.all(np.abs(f) <= tol * W):
            break
        lo = np.where(f < 0, T, lo)
        hi = np.where(f > 0, T, hi)
        T_new = T - f / total_energy_dT(ensemble, T, spec)
        outside = ~((T_new > lo) & (T_new < hi))
        T_new = np.where(outside, 0.5 * (lo + hi), T_new)
        # rounding floor: the update no longer moves T and the residual is tiny
        stalled = (np.abs(T_new - T) <= 4 * np.finfo(float).eps * T) & (np.abs(f) <= 1e-12 * W)
        T = T_new
        if np.all(stalled | (np.abs(f) <= tol * W)):
            break
    else:
        raise NoConvergence("local-equilibrium temperature iteration did not converge")
    eta0 = 1.0 / (ensemble.k_B * T)
    if scalar:
        return float(T[0]), float(eta0[0])
    return T, eta0


def t_le_hbar2_correction(ensemble: BranchEnsemble, per_branch_W2, T_le,
                          spec: QuadratureSpec = DEFAULT_SPEC):
    """Order-hbar^2 shift of T_LE: sum W2 / sum dW/dT at T_LE.

    With W2^LE_mu = dW_mu/dT * T2 the order-hbar^2 relaxation terms also sum
    to zero over branches.
    """
    return sum(np.asarray(w, dtype=float) for w in per_branch_W2) / total_energy_dT(ensemble, T_le, spec)


def bgk_energy_imbalance(ensemble: BranchEnsemble, per_branch_W, T_le, spec: QuadratureSpec = DEFAULT_SPEC):
    """sum_mu (W_mu - W_mu^LE)/tau^W_mu, zero when all tau^W agree."""
    total = 0.0
    for b, w in zip(ensemble, per_branch_W):
        total = total + (w - equilibrium_energy_density(b, T_le, spec, ensemble.k_B)) / b.tau_w_at(T_le)
    return total


def equilibrium_wigner(model: DispersionModel, T, q, k_B: float = 1.0):
    """Bose-Einstein occupancy 1/(e^{h(q)/k_B T} - 1)."""
    T = np.asarray(T, dtype=float)
    if np.any(~(T > 0)):
        raise DomainError("temperature must be > 0")
    h = model.energy(q)
    if np.any(h <= 0):
        raise DomainError("equilibrium occupancy is singular where h(q) = 0")
    return occupancy(h / (k_B * T))


def log_imbalance(ensemble: BranchEnsemble, per_branch_W, T_le, spec: QuadratureSpec = DEFAULT_SPEC):
    taus = {float(np.mean(b.tau_w_at(T_le))) for b in ensemble}
    if len(taus) > 1:
        imb = bgk_energy_imbalance(ensemble, per_branch_W, T_le, spec)
        log.info("unequal tau_W: BGK energy imbalance max %.3e", float(np.max(np.abs(imb))))

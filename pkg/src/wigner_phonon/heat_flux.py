"""Long-time asymptotic heat flux: Fourier conductivity and its hbar^2 correction.

At leading order in the relaxation time the flux is Q0 = -K0 grad T. The
order-hbar^2 flux is Q2 = -tau^Q div J2, where J2 is the energy-flux tensor of
g2 evaluated on the local-equilibrium (Debye, d = 3) distribution. J2 is
quadratic in grad T and linear in the Hessian, so it cannot be written as a
conductivity times a gradient.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .bose_integrals import (DEFAULT_SPEC, TWO_PI, BranchConfig, QuadratureSpec,
                             closure_integral, reduced_moment, sphere_measure)
from .errors import DomainError, GridTooSmall, UnsupportedDimension
from .qmep_closure import TemperatureJet

__all__ = ["TemperatureJet", "ConductivityResult", "FluxDecomposition", "conductivity_zero",
           "conductivity_trace", "fourier_flux", "j2_tensor", "j2_divergence",
           "quantum_flux_correction", "asymptotic_flux"]


@dataclass(frozen=True)
class ConductivityResult:
    """Zero-order conductivity tensor, its trace and d ln k / d ln T."""

    K: np.ndarray
    k_trace: float
    temperature_exponent: float


@dataclass(frozen=True)
class FluxDecomposition:
    Q0: np.ndarray
    Q2: np.ndarray
    hbar_eff: float

    @property
    def total(self) -> np.ndarray:
        return self.Q0 + self.hbar_eff ** 2 * self.Q2


def conductivity_trace(branch: BranchConfig, T, spec: QuadratureSpec = DEFAULT_SPEC, k_B: float = 1.0):
    """k0 = tr K0 with K0 = tau^Q/((2pi)^d k_B T^2) int c c h^2 e^x/(e^x-1)^2 dq.

    The radial integral reduces to reduced_moment(d+1) for Debye branches and
    to reduced_moment((d+4)/2) for quadratic ones.
    """
    T = np.asarray(T, dtype=float)
    if np.any(~(T > 0)):
        raise DomainError("temperature must be > 0")
    model = branch.dispersion
    d = model.dim
    kT = k_B * T
    tau = branch.tau_q_at(T)
    pref = tau * sphere_measure(d) / (TWO_PI ** d * k_B * T * T)
    if model.kind == "debye":
        c = model.param
        out = pref * c ** 4 * (kT / c) ** (d + 2) * reduced_moment(d + 1, spec)
    elif model.kind == "quadratic":
        a = model.param
        out = pref * 2.0 * a ** 4 * (kT / a) ** ((d + 6) / 2) * reduced_moment((d + 4) / 2, spec)
    else:
        out = np.zeros(T.shape)
    return out if np.ndim(out) else float(out)


def conductivity_zero(branch: BranchConfig, T: float, spec: QuadratureSpec = DEFAULT_SPEC,
                      k_B: float = 1.0) -> ConductivityResult:
    """Isotropic zero-order conductivity tensor K0 = (k0/d) I at temperature T."""
    d = branch.dim
    k = conductivity_trace(branch, T, spec, k_B)
    if branch.dispersion.kind == "einstein":
        return ConductivityResult(np.zeros((d, d)), 0.0, 0.0)
    eps = 1e-4
    up = conductivity_trace(branch, T * (1 + eps), spec, k_B)
    dn = conductivity_trace(branch, T * (1 - eps), spec, k_B)
    expo = (np.log(up) - np.log(dn)) / (np.log1p(eps) - np.log1p(-eps))
    return ConductivityResult(k / d * np.eye(d), float(k), float(expo))


def fourier_flux(branch: BranchConfig, tjet: TemperatureJet, spec: QuadratureSpec = DEFAULT_SPEC,
                 k_B: float = 1.0) -> np.ndarray:
    """Q0 = -K0 grad T, vectorized over a batch of jets."""
    k = conductivity_trace(branch, tjet.T, spec, k_B)
    return -(np.asarray(k) / branch.dim)[..., None] * tjet.grad


def _j2_prefactor(branch, T, k_B):
    model = branch.dispersion
    d = model.dim
    if model.kind != "debye":
        raise DomainError("the closed-form J2 is derived for Debye branches")
    if d != 3:
        raise UnsupportedDimension(
            f"the hbar^2 flux tensor is finite only for d = 3 (Debye), got d = {d}")
    c = model.param
    return -(c ** 5 / (8.0 * TWO_PI ** d)) * (sphere_measure(d) / d) * k_B ** (d - 1) * T ** (d - 3) / c ** (d + 1)


def _j2_blocks(T, G, H, I1, I2):
    GG = np.einsum("...i,...i->...", G, G)
    lap = np.trace(H, axis1=-2, axis2=-1)
    GiGj = G[..., :, None] * G[..., None, :]
    Te = T[..., None, None]
    iso = (2.0 * GG - T * lap) * I1 - GG * I2 / 3.0
    X = (Te * H - 3.0 * GiGj) * I1 + (GiGj + Te * H) * I2 / 3.0
    return iso, X


def j2_tensor(branch: BranchConfig, tjet: TemperatureJet, spec: QuadratureSpec = DEFAULT_SPEC,
              k_B: float = 1.0) -> np.ndarray:
    """Closed-form J2_hk = (1/(2pi)^3) int c_h c_k h g2 dq for a Debye branch.

    The angular average of n_h n_k n_i n_j is (mis/(d(d+2))) times the
    symmetrized delta product, so the rank-4 block reduces to
    (delta_hk tr X + 2 X_hk)/(d+2).
    """
    T = tjet.T
    d = branch.dim
    P = _j2_prefactor(branch, T, k_B)
    I1 = closure_integral("I1", d, spec)
    I2 = closure_integral("I2", d, spec)
    iso, X = _j2_blocks(T, tjet.grad, tjet.hess, I1, I2)
    trX = np.trace(X, axis1=-2, axis2=-1)
    eye = np.eye(d)
    br = (iso + trX / (d + 2))[..., None, None] * eye + 2.0 * X / (d + 2)
    return np.asarray(P)[..., None, None] * br


def j2_divergence(branch: BranchConfig, tjet: TemperatureJet, spec: QuadratureSpec = DEFAULT_SPEC,
                  k_B: float = 1.0) -> np.ndarray:
    """sum_h d J2_hk / dx_h by the chain rule; needs ``tjet.third``."""
    if tjet.third is None:
        raise DomainError("analytic divergence needs third temperature derivatives")
    d = branch.dim
    P = _j2_prefactor(branch, tjet.T, k_B)   # constant in T for d = 3
    I1 = closure_integral("I1", d, spec)
    I2 = closure_integral("I2", d, spec)
    T, G, H, T3 = tjet.T, tjet.grad, tjet.hess, tjet.third
    Te = T[..., None]
    GH = np.einsum("...i,...ik->...k", G, H)
    lap = np.trace(H, axis1=-2, axis2=-1)
    dlap = np.einsum("...iik->...k", T3)
    d_iso = (4.0 * GH - G * lap[..., None] - Te * dlap) * I1 - 2.0 / 3.0 * GH * I2
    # dX_ij/dx_m
    GmHij = G[..., :, None, None] * H[..., None, :, :]
    HmiGj = H[..., :, :, None] * G[..., None, None, :]
    GiHmj = np.swapaxes(HmiGj, -1, -2)
    Tt = T[..., None, None, None] * T3
    dX = (GmHij + Tt - 3.0 * HmiGj - 3.0 * GiHmj) * I1 + (HmiGj + GiHmj + GmHij + Tt) * I2 / 3.0
    d_trX = np.einsum("...kii->...k", dX)
    div_X = np.einsum("...hhk->...k", dX)
    return np.asarray(P)[..., None] * (d_iso + (d_trX + 2.0 * div_X) / (d + 2))


def quantum_flux_correction(branch: BranchConfig, tjet_field: TemperatureJet, spec: QuadratureSpec = DEFAULT_SPEC,
                            spacing=None, k_B: float = 1.0, method: str = "auto") -> np.ndarray:
    """Q2 = -tau^Q div J2 on a field of temperature jets.

    With ``method="analytic"`` (or ``auto`` and third derivatives present)
    the divergence uses the chain rule. With ``method="grid"`` J2 is formed
    at every node and differentiated by second-order central differences
    along the leading array axes, which are taken as x_1, x_2, ... with the
    given ``spacing``.
    """
    if method == "auto":
        method = "analytic" if tjet_field.third is not None else "grid"
    tau = np.asarray(branch.tau_q_at(tjet_field.T))
    if method == "analytic":
        return -tau[..., None] * j2_divergence(branch, tjet_field, spec, k_B)
    if method != "grid":
        raise ValueError(f"unknown divergence method {method!r}")
    J2 = j2_tensor(branch, tjet_field, spec, k_B)
    shape = np.shape(tjet_field.T)
    if spacing is None:
        raise DomainError("grid divergence needs the node spacing")
    spacing = np.atleast_1d(np.asarray(spacing, dtype=float))
    if len(spacing) != len(shape) or len(shape) > branch.dim:
        raise DomainError("one spacing per spatial grid axis is required")
    if min(shape) < 3:
        raise GridTooSmall(f"divergence stencils need >= 3 nodes per axis, got {shape}")
    div = np.zeros(shape + (branch.dim,))
    for h, dx in enumerate(spacing):
        div += np.gradient(J2[..., h, :], dx, axis=h, edge_order=2)
    return -tau[..., None] * div


def asymptotic_flux(branch: BranchConfig, tjet_field: TemperatureJet, hbar_eff: float,
                    spec: QuadratureSpec = DEFAULT_SPEC, spacing=None, k_B: float = 1.0,
                    method: str = "auto") -> FluxDecomposition:
    """Q = Q0 + hbar^2 Q2 at long times.

    The order-hbar^2 contribution coupling eta1 to the equilibrium U tensor,
    of relative size delta T / T, is left out.
    """
    Q0 = fourier_flux(branch, tjet_field, spec, k_B)
    if hbar_eff == 0.0:
        return FluxDecomposition(Q0, np.zeros(Q0.shape), 0.0)
    Q2 = quantum_flux_correction(branch, tjet_field, spec, spacing, k_B, method)
    return FluxDecomposition(Q0, Q2, float(hbar_eff))

"""Phonon dispersion symbols h(q) and their momentum derivatives.

Momenta are phonon momenta (hbar times the wave vector), so a Debye branch
reads h(q) = c|q| and a quadratic (ZA-like) branch h(q) = alpha_bar |q|^2.
All evaluators accept arrays of momenta with shape ``(..., d)``.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Literal

import numpy as np

from .errors import DegenerateMomentum, DomainError

Q_MIN = 1e-12

K_B_SI = 1.380649e-23
HBAR_SI = 1.054571817e-34


@dataclass(frozen=True)
class PhysicalScales:
    """Semiclassical parameter and Boltzmann constant.

    In ``nondimensional`` mode ``k_B = 1`` and ``hbar_eff`` is a free small
    parameter; in ``SI`` mode both default to their SI values.
    """

    hbar_eff: float = 0.0
    k_B: float = 1.0
    unit_system: Literal["nondimensional", "SI"] = "nondimensional"

    def __post_init__(self):
        if self.hbar_eff < 0:
            raise DomainError(f"hbar_eff must be >= 0, got {self.hbar_eff}")
        if self.k_B <= 0:
            raise DomainError(f"k_B must be > 0, got {self.k_B}")
        if self.unit_system not in ("nondimensional", "SI"):
            raise DomainError(f"unknown unit system {self.unit_system!r}")

    @classmethod
    def si(cls, hbar_eff: float = HBAR_SI) -> "PhysicalScales":
        return cls(hbar_eff=hbar_eff, k_B=K_B_SI, unit_system="SI")


KINDS = ("debye", "einstein", "quadratic")


@dataclass(frozen=True)
class DispersionModel:
    """Isotropic dispersion relation of one phonon branch.

    ``param`` is the sound speed for ``debye``, the constant energy for
    ``einstein`` and the coefficient of |q|^2 for ``quadratic``.
    """

    kind: str
    param: float
    dim: int = 3

    def __post_init__(self):
        if self.kind not in KINDS:
            raise DomainError(f"unknown dispersion kind {self.kind!r}")
        if not self.param > 0:
            raise DomainError(f"{self.kind} parameter must be > 0, got {self.param}")
        if self.dim not in (1, 2, 3):
            raise DomainError(f"dimension must be 1, 2 or 3, got {self.dim}")

    @property
    def c(self) -> float:
        if self.kind != "debye":
            raise AttributeError("sound speed is defined only for Debye branches")
        return self.param

    def _as_q(self, q) -> np.ndarray:
        q = np.asarray(q, dtype=float)
        if q.shape[-1:] != (self.dim,):
            raise DomainError(f"momentum must have trailing dimension {self.dim}, got {q.shape}")
        return q

    def _norm_checked(self, q: np.ndarray) -> np.ndarray:
        r = np.linalg.norm(q, axis=-1)
        if np.any(r < Q_MIN):
            raise DegenerateMomentum(
                f"Debye symbol is not differentiable at |q| < {Q_MIN:g}")
        return r

    def energy(self, q) -> np.ndarray:
        q = self._as_q(q)
        r2 = np.sum(q * q, axis=-1)
        if self.kind == "debye":
            return self.param * np.sqrt(r2)
        if self.kind == "quadratic":
            return self.param * r2
        return np.full(q.shape[:-1], self.param)

    def group_velocity(self, q) -> np.ndarray:
        q = self._as_q(q)
        if self.kind == "debye":
            r = self._norm_checked(q)
            return self.param * q / r[..., None]
        if self.kind == "quadratic":
            return 2.0 * self.param * q
        return np.zeros_like(q)

    def hessian(self, q) -> np.ndarray:
        q = self._as_q(q)
        eye = np.eye(self.dim)
        if self.kind == "debye":
            r = self._norm_checked(q)[..., None, None]
            n = q / r[..., 0]
            return self.param * (eye - n[..., :, None] * n[..., None, :]) / r
        if self.kind == "quadratic":
            return np.broadcast_to(2.0 * self.param * eye, q.shape[:-1] + eye.shape).copy()
        return np.zeros(q.shape[:-1] + eye.shape)

    def third_derivatives(self, q) -> np.ndarray:
        """Fully symmetric tensor d^3 h / dq_i dq_j dq_k."""
        q = self._as_q(q)
        d = self.dim
        shape = q.shape[:-1] + (d, d, d)
        if self.kind != "debye":
            return np.zeros(shape)
        r = self._norm_checked(q)
        n = q / r[..., None]
        eye = np.eye(d)
        t = 3.0 * np.einsum("...i,...j,...k->...ijk", n, n, n)
        t -= np.einsum("ij,...k->...ijk", eye, n)
        t -= np.einsum("ik,...j->...ijk", eye, n)
        t -= np.einsum("jk,...i->...ijk", eye, n)
        return self.param * t / (r * r)[..., None, None, None]

    def thermal_momentum(self, kT: float) -> float:
        """Momentum at which h(q) equals kT (radial scale for quadratures)."""
        if self.kind == "debye":
            return kT / self.param
        if self.kind == "quadratic":
            return float(np.sqrt(kT / self.param))
        raise DomainError("Einstein branches have no thermal momentum scale")


def debye(c: float = 1.0, dim: int = 3) -> DispersionModel:
    return DispersionModel("debye", c, dim)


def einstein(eps0: float, dim: int = 3) -> DispersionModel:
    return DispersionModel("einstein", eps0, dim)


def quadratic(alpha_bar: float, dim: int = 3) -> DispersionModel:
    return DispersionModel("quadratic", alpha_bar, dim)

"""Finite-volume solver for the per-branch (W, Q) moment system in slab geometry.

Space is the interval [0, L] along x_1 with full three-dimensional momentum
integrals; by symmetry only Q_x is nonzero. Each branch carries the fields
W0, Q0 (order hbar^0) and W2, Q2 (order hbar^2). The zero-order system is
closed by the maximum-entropy multipliers and is independent of the
order-hbar^2 fields, which then obey a linear system with coefficients and
sources set by the zero-order solution:

    dW2/dt + d/dx [Q2 - (1/24) d^2 T_xxx / dx^2] = -(W2 - W2^LE)/tau^W
    dQ2/dt + d/dx [J2_xx - (1/24) d^2 U_xxxx / dx^2] = -Q2/tau^Q

Time stepping is Strang splitting: half a relaxation step, an SSP-RK2
transport step, half a relaxation step. The relaxation substeps are exact
exponentials toward the local-equilibrium values at frozen T_LE.
"""

from __future__ import annotations

import logging
import math
from dataclasses import dataclass, field, replace
from typing import Callable, Sequence

import numpy as np

from .bose_integrals import (DEFAULT_SPEC, QuadratureSpec, equilibrium_energy_density,
                             equilibrium_energy_density_dT, sphere_quadrature)
from .errors import (ComplexEigenvalues, DomainError, InversionFailure, NoConvergence,
                     OutsideRealizableSet, StabilityViolation)
from .local_temperature import BranchEnsemble, solve_t_le
from .qmep_closure import (LagrangeMultipliers, MultiplierJet, _debye_g2_sources,
                           _debye_zero_order, _newton_debye, characteristic_speeds as _closure_speeds,
                           closure_tensors_TU, initial_guess, MomentState)

log = logging.getLogger(__name__)

NG = 2
BOUNDARIES = ("periodic", "fixed-temperature")
W2_CLOSURES = ("energy-conserving", "zero")


@dataclass
class ScenarioConfig:
    """Everything needed to run one slab simulation.

    ``initial_T`` is a callable of x or an array of N cell values.
    ``initial_flux`` optionally gives Q0_x per branch (scalar or N values).
    ``wall_T`` overrides the fixed-temperature wall values (left, right).
    ``branch_T`` optionally starts each branch at its own temperature (scalar
    or N values per branch); ``initial_T`` then only sets the wall defaults.
    """

    ensemble: BranchEnsemble
    length: float
    n_cells: int
    initial_T: Callable | Sequence[float] | np.ndarray
    boundary: str = "periodic"
    hbar_eff: float = 0.0
    quantum: bool = True
    t_end: float = 1.0
    cfl: float = 0.5
    output_interval: float | None = None
    initial_flux: Sequence | None = None
    wall_T: tuple | None = None
    branch_T: Sequence | None = None
    w2_le: str = "energy-conserving"
    reconstruction: str = "muscl"
    spec: QuadratureSpec = DEFAULT_SPEC
    n_mu: int = 32
    n_phi: int = 8

    def __post_init__(self):
        if not self.length > 0:
            raise DomainError(f"domain length must be > 0, got {self.length}")
        if int(self.n_cells) != self.n_cells or self.n_cells < 16:
            raise DomainError(f"need at least 16 cells, got {self.n_cells}")
        if not 0.0 < self.cfl < 1.0:
            raise DomainError(f"CFL number must lie in (0, 1), got {self.cfl}")
        if self.boundary not in BOUNDARIES:
            raise DomainError(f"boundary must be one of {BOUNDARIES}, got {self.boundary!r}")
        if self.w2_le not in W2_CLOSURES:
            raise DomainError(f"w2_le must be one of {W2_CLOSURES}, got {self.w2_le!r}")
        if self.reconstruction not in ("muscl", "first-order"):
            raise DomainError(f"unknown reconstruction {self.reconstruction!r}")
        if self.hbar_eff < 0 or self.t_end < 0:
            raise DomainError("hbar_eff and t_end must be >= 0")
        if self.ensemble.dim != 3:
            raise DomainError("the slab solver integrates over three-dimensional momentum space")
        for b in self.ensemble:
            if b.dispersion.kind == "quadratic":
                raise DomainError(
                    f"branch {b.label!r}: quadratic dispersions admit no realizable flux closure "
                    "(xi is unbounded below for eta1 != 0)")

    @property
    def dx(self) -> float:
        return self.length / self.n_cells

    @property
    def x(self) -> np.ndarray:
        return (np.arange(self.n_cells) + 0.5) * self.dx

    @property
    def quantum_active(self) -> bool:
        return self.quantum and self.hbar_eff > 0

    def temperature_profile(self) -> np.ndarray:
        if callable(self.initial_T):
            T = np.broadcast_to(np.asarray(self.initial_T(self.x), dtype=float), (self.n_cells,)).copy()
        else:
            T = np.asarray(self.initial_T, dtype=float)
            if T.shape != (self.n_cells,):
                raise DomainError(f"initial temperature needs {self.n_cells} samples, got {T.shape}")
        if not np.all(np.isfinite(T)) or np.any(T <= 0):
            raise DomainError("initial temperature must be finite and > 0 in every cell")
        return T

    def walls(self, T0: np.ndarray) -> tuple[float, float]:
        if self.wall_T is not None:
            lo, hi = self.wall_T
        elif callable(self.initial_T):
            lo, hi = (float(np.asarray(self.initial_T(np.array([0.0, self.length])))[i]) for i in (0, 1))
        else:
            lo, hi = float(T0[0]), float(T0[-1])
        if not (lo > 0 and hi > 0):
            raise DomainError("wall temperatures must be > 0")
        return lo, hi


@dataclass
class SolverState:
    """Cell fields of shape (branches, cells) plus the multiplier cache."""

    time: float
    W0: np.ndarray
    Q0: np.ndarray
    W2: np.ndarray
    Q2: np.ndarray
    eta0: np.ndarray
    eta1: np.ndarray
    T_le: np.ndarray
    solver: "TransportSolver" = field(repr=False, compare=False)

    def copy(self) -> "SolverState":
        return replace(self, W0=self.W0.copy(), Q0=self.Q0.copy(), W2=self.W2.copy(),
                       Q2=self.Q2.copy(), eta0=self.eta0.copy(), eta1=self.eta1.copy(),
                       T_le=self.T_le.copy())

    def total_W(self, hbar: float | None = None) -> np.ndarray:
        hbar = self.solver.hbar if hbar is None else hbar
        return self.W0 + hbar ** 2 * self.W2

    def total_Q(self, hbar: float | None = None) -> np.ndarray:
        hbar = self.solver.hbar if hbar is None else hbar
        return self.Q0 + hbar ** 2 * self.Q2


@dataclass(frozen=True)
class Snapshot:
    time: float
    x: np.ndarray
    W0: np.ndarray
    Q0: np.ndarray
    W2: np.ndarray
    Q2: np.ndarray
    T_le: np.ndarray
    hbar_eff: float

    @property
    def flux_zero(self) -> np.ndarray:
        return self.Q0.sum(axis=0)

    @property
    def flux_quantum(self) -> np.ndarray:
        return self.hbar_eff ** 2 * self.Q2.sum(axis=0)


@dataclass
class RunResult:
    snapshots: list
    diagnostics: dict
    final: SolverState


def _minmod(a, b):
    return np.where(a * b > 0, np.sign(a) * np.minimum(np.abs(a), np.abs(b)), 0.0)


class TransportSolver:
    """Holds the grid, quadrature and branch data of one scenario."""

    def __init__(self, config: ScenarioConfig):
        self.config = config
        self.ensemble = config.ensemble
        self.branches = list(config.ensemble)
        self.spec = config.spec
        self.k_B = config.ensemble.k_B
        self.dx = config.dx
        self.n = config.n_cells
        self.hbar = config.hbar_eff
        self.quad = sphere_quadrature(3, config.n_mu, config.n_phi)
        self.debye = [b.dispersion.kind == "debye" for b in self.branches]
        self._walls = None

    # -- setup ------------------------------------------------------------------

    def initialize(self) -> SolverState:
        cfg = self.config
        T = cfg.temperature_profile()
        if cfg.boundary == "fixed-temperature":
            self._walls = cfg.walls(T)
        nb = len(self.branches)
        if cfg.branch_T is None:
            Tb = [T] * nb
        else:
            if len(cfg.branch_T) != nb:
                raise DomainError("branch_T needs one entry per branch")
            Tb = [np.broadcast_to(np.asarray(t, dtype=float), (self.n,)) for t in cfg.branch_T]
            if any(np.any(~(t > 0)) for t in Tb):
                raise DomainError("branch temperatures must be > 0")
        W0 = np.array([equilibrium_energy_density(b, t, self.spec, self.k_B)
                       for b, t in zip(self.branches, Tb)])
        Q0 = np.zeros((nb, self.n))
        if cfg.initial_flux is not None:
            if len(cfg.initial_flux) != nb:
                raise DomainError("initial_flux needs one entry per branch")
            for i, q in enumerate(cfg.initial_flux):
                Q0[i] = np.broadcast_to(np.asarray(q, dtype=float), (self.n,))
                if not self.debye[i] and np.any(Q0[i] != 0):
                    raise DomainError(f"branch {self.branches[i].label!r} cannot carry a flux")
        zeros = np.zeros((nb, self.n))
        eta0 = np.zeros((nb, self.n))
        eta1 = np.zeros((nb, self.n))
        state = SolverState(0.0, W0, Q0, zeros.copy(), zeros.copy(), eta0, eta1,
                            np.asarray(T, dtype=float), self)
        self._refresh_multipliers(state, warm=False)
        state.T_le = self._t_le(state.W0)
        return state

    # -- closure helpers ----------------------------------------------------------

    def _t_le(self, W0):
        T, _ = solve_t_le(self.ensemble, list(W0), self.spec, tol=1e-15)
        return np.atleast_1d(T)

    def _invert(self, ib, W, Q, eta0=None, eta1=None):
        """Zero-order multipliers (eta0, eta1_x) of one Debye branch, cellwise."""
        model = self.branches[ib].dispersion
        Qv = np.zeros(W.shape + (3,))
        Qv[..., 0] = Q
        try:
            if eta0 is None:
                e0, e1 = initial_guess(MomentState(W, Qv), self.branches[ib], self.spec)
            else:
                e1 = np.zeros(W.shape + (3,))
                e1[..., 0] = eta1
                e0 = eta0
                bad = ~(e0 > model.param * np.abs(e1[..., 0]))
                if np.any(bad):
                    g0, g1 = initial_guess(MomentState(W, Qv), self.branches[ib], self.spec)
                    e0 = np.where(bad, g0, e0)
                    e1 = np.where(bad[..., None], g1, e1)
            if np.any(~(W > 0)) or np.any(np.abs(Q) >= model.param * W):
                raise OutsideRealizableSet("cell moments outside the realizable set")
            e0, e1 = _newton_debye(W, Qv, e0, e1, model, self.spec, self.quad, 1e-13, 60, 40)
        except (OutsideRealizableSet, NoConvergence) as exc:
            raise InversionFailure(f"branch {self.branches[ib].label!r}: {exc}") from exc
        return e0, e1[..., 0]

    def _refresh_multipliers(self, state: SolverState, warm: bool = True):
        for ib, b in enumerate(self.branches):
            W = state.W0[ib]
            if np.any(~(W > 0)):
                raise InversionFailure(f"branch {b.label!r}: energy density became non-positive")
            if self.debye[ib]:
                if warm:
                    state.eta0[ib], state.eta1[ib] = self._invert(ib, W, state.Q0[ib], state.eta0[ib], state.eta1[ib])
                else:
                    state.eta0[ib], state.eta1[ib] = self._invert(ib, W, state.Q0[ib])
            else:
                e0, _ = initial_guess(MomentState(W, np.zeros(W.shape + (3,))), b, self.spec)
                state.eta0[ib], state.eta1[ib] = e0, 0.0

    def _vec(self, eta1x):
        v = np.zeros(np.shape(eta1x) + (3,))
        v[..., 0] = eta1x
        return v

    def _zero_order(self, ib, eta0, eta1x, with_jac_J=False):
        return _debye_zero_order(eta0, self._vec(eta1x), self.branches[ib].dispersion,
                                 self.spec, self.quad, with_jac_J)

    # -- hyperbolicity --------------------------------------------------------------

    def characteristic_speeds(self, state: SolverState) -> np.ndarray:
        """Largest |lambda| per branch and cell, shape (branches, cells)."""
        out = np.zeros(state.W0.shape)
        for ib, b in enumerate(self.branches):
            if not self.debye[ib]:
                continue
            eta = LagrangeMultipliers(state.eta0[ib], self._vec(state.eta1[ib]))
            lam = _closure_speeds(eta, b, 0, self.spec, self.quad)
            out[ib] = np.max(np.abs(lam), axis=-1)
        return out

    def max_stable_dt(self, state: SolverState) -> float:
        lam = float(np.max(self.characteristic_speeds(state), initial=0.0))
        return math.inf if lam == 0.0 else self.config.cfl * self.dx / lam

    # -- ghost cells ------------------------------------------------------------------

    def _extend(self, a, kind):
        """Pad a (cells,) array with NG ghost values on each side."""
        if self.config.boundary == "periodic":
            return np.concatenate([a[-NG:], a, a[:NG]])
        if kind == "eta0":
            lo, hi = self._walls
            left = np.full(NG, 1.0 / (self.k_B * lo))
            right = np.full(NG, 1.0 / (self.k_B * hi))
            return np.concatenate([left, a, right])
        if kind == "copy":
            return np.concatenate([np.full(NG, a[0]), a, np.full(NG, a[-1])])
        # linear extrapolation
        left = [a[0] + (k + 1) * (a[0] - a[1]) for k in range(NG)][::-1]
        right = [a[-1] + (k + 1) * (a[-1] - a[-2]) for k in range(NG)]
        return np.concatenate([left, a, right])

    # -- spatial operator ---------------------------------------------------------------

    def _rhs(self, W0, Q0, W2, Q2, eta0, eta1):
        """Transport tendencies -dF/dx for every branch."""
        dW0 = np.zeros(W0.shape)
        dQ0 = np.zeros(W0.shape)
        dW2 = np.zeros(W0.shape)
        dQ2 = np.zeros(W0.shape)
        quantum = self.config.quantum_active
        for ib, b in enumerate(self.branches):
            if not self.debye[ib]:
                continue
            e0 = self._extend(eta0[ib], "eta0")
            e1 = self._extend(eta1[ib], "copy")
            c = b.dispersion.param
            z = self._zero_order(ib, e0, e1, with_jac_J=quantum)
            etac = LagrangeMultipliers(e0, self._vec(e1))
            lam = np.max(np.abs(_closure_speeds(etac, b, 0, self.spec, self.quad)), axis=-1)
            j = np.arange(NG - 1, NG + self.n)            # left cell of each interface
            a = np.maximum(lam[j], lam[j + 1])

            # zero order: reconstructed multipliers at the n+1 interfaces
            if self.config.reconstruction == "muscl":
                s0 = _minmod(e0[1:-1] - e0[:-2], e0[2:] - e0[1:-1])
                s1 = _minmod(e1[1:-1] - e1[:-2], e1[2:] - e1[1:-1])
            else:
                s0 = np.zeros(e0.size - 2)
                s1 = np.zeros(e0.size - 2)
            # cells 1 .. size-2 carry slopes; interface j+1/2 uses cells j, j+1
            cells = slice(NG - 1, NG + self.n)           # left cells of the interfaces
            cells_r = slice(NG, NG + self.n + 1)
            L0 = e0[cells] + 0.5 * s0[cells.start - 1:cells.stop - 1]
            L1 = e1[cells] + 0.5 * s1[cells.start - 1:cells.stop - 1]
            R0 = e0[cells_r] - 0.5 * s0[cells_r.start - 1:cells_r.stop - 1]
            R1 = e1[cells_r] - 0.5 * s1[cells_r.start - 1:cells_r.stop - 1]
            badL = ~(L0 > c * np.abs(L1))
            badR = ~(R0 > c * np.abs(R1))
            L0 = np.where(badL, e0[cells], L0)
            L1 = np.where(badL, e1[cells], L1)
            R0 = np.where(badR, e0[cells_r], R0)
            R1 = np.where(badR, e1[cells_r], R1)
            zl = self._zero_order(ib, L0, L1)
            zr = self._zero_order(ib, R0, R1)
            FW = 0.5 * (zl.Q[:, 0] + zr.Q[:, 0]) - 0.5 * a * (zr.W - zl.W)
            FQ = 0.5 * (zl.J[:, 0, 0] + zr.J[:, 0, 0]) - 0.5 * a * (zr.Q[:, 0] - zl.Q[:, 0])
            dW0[ib] = -(FW[1:] - FW[:-1]) / self.dx
            dQ0[ib] = -(FQ[1:] - FQ[:-1]) / self.dx

            if not quantum:
                continue
            w2 = self._extend(W2[ib], "extrapolate")
            q2 = self._extend(Q2[ib], "extrapolate")
            J2 = self._j2_cells(ib, e0, e1, z, w2, q2)         # valid on cells 1 .. size-2
            ct = closure_tensors_TU(etac, b, self.spec, self.quad)
            T111 = ct.T3[:, 0, 0, 0]
            U1111 = ct.U4[:, 0, 0, 0, 0]
            d2T = (T111[j + 2] - T111[j + 1] - T111[j] + T111[j - 1]) / (2.0 * self.dx ** 2)
            d2U = (U1111[j + 2] - U1111[j + 1] - U1111[j] + U1111[j - 1]) / (2.0 * self.dx ** 2)
            F2W = 0.5 * (q2[j] + q2[j + 1]) - d2T / 24.0 - 0.5 * a * (w2[j + 1] - w2[j])
            F2Q = 0.5 * (J2[j] + J2[j + 1]) - d2U / 24.0 - 0.5 * a * (q2[j + 1] - q2[j])
            dW2[ib] = -(F2W[1:] - F2W[:-1]) / self.dx
            dQ2[ib] = -(F2Q[1:] - F2Q[:-1]) / self.dx
        return dW0, dQ0, dW2, dQ2

    def _j2_cells(self, ib, e0, e1, z, w2, q2):
        """J2_xx = dJ/deta . eta2 + (J moment of g2) on the extended cells."""
        m = e0.size
        jet = MultiplierJet.zeros(3, (m,))
        g0 = np.zeros(m)
        g1 = np.zeros(m)
        h0 = np.zeros(m)
        h1 = np.zeros(m)
        g0[1:-1] = (e0[2:] - e0[:-2]) / (2 * self.dx)
        g1[1:-1] = (e1[2:] - e1[:-2]) / (2 * self.dx)
        h0[1:-1] = (e0[2:] - 2 * e0[1:-1] + e0[:-2]) / self.dx ** 2
        h1[1:-1] = (e1[2:] - 2 * e1[1:-1] + e1[:-2]) / self.dx ** 2
        jet.grad_eta0[:, 0] = g0
        jet.grad_eta1[:, 0, 0] = g1
        jet.hess_eta0[:, 0, 0] = h0
        jet.hess_eta1[:, 0, 0, 0] = h1
        src = _debye_g2_sources(e0, self._vec(e1), jet, self.branches[ib].dispersion, self.spec, self.quad)
        rhs = np.zeros((m, 4))
        rhs[:, 0] = w2 - src.W
        rhs[:, 1] = q2 - src.Q[:, 0]
        rhs[:, 2:] = -src.Q[:, 1:]
        eta2 = np.linalg.solve(z.jac, rhs[..., None])[..., 0]
        return np.einsum("mk,mk->m", z.jac_J[:, 0, 0, :], eta2) + src.J[:, 0, 0]

    # -- relaxation -----------------------------------------------------------------------

    def _relax(self, state: SolverState, dt: float):
        T = self._t_le(state.W0)
        quantum = self.config.quantum_active
        if quantum and self.config.w2_le == "energy-conserving":
            dWdT = np.array([equilibrium_energy_density_dT(b, T, self.spec, self.k_B) for b in self.branches])
            T2 = state.W2.sum(axis=0) / dWdT.sum(axis=0)
        for ib, b in enumerate(self.branches):
            tw = np.asarray(b.tau_w_at(T), dtype=float)
            tq = np.asarray(b.tau_q_at(T), dtype=float)
            fw = np.exp(-dt / tw)
            fq = np.exp(-dt / tq)
            Wle = equilibrium_energy_density(b, T, self.spec, self.k_B)
            state.W0[ib] = Wle + (state.W0[ib] - Wle) * fw
            state.Q0[ib] = state.Q0[ib] * fq
            if quantum:
                W2le = dWdT[ib] * T2 if self.config.w2_le == "energy-conserving" else 0.0
                state.W2[ib] = W2le + (state.W2[ib] - W2le) * fw
                state.Q2[ib] = state.Q2[ib] * fq
        state.T_le = T

    # -- stepping -----------------------------------------------------------------------------

    def _transport(self, state: SolverState, dt: float):
        u = (state.W0, state.Q0, state.W2, state.Q2)
        k1 = self._rhs(*u, state.eta0, state.eta1)
        stage = state.copy()
        stage.W0, stage.Q0, stage.W2, stage.Q2 = (f + dt * k for f, k in zip(u, k1))
        self._refresh_multipliers(stage)
        k2 = self._rhs(stage.W0, stage.Q0, stage.W2, stage.Q2, stage.eta0, stage.eta1)
        new = tuple(0.5 * f + 0.5 * (s + dt * k)
                    for f, s, k in zip(u, (stage.W0, stage.Q0, stage.W2, stage.Q2), k2))
        state.W0, state.Q0, state.W2, state.Q2 = new
        state.eta0, state.eta1 = stage.eta0, stage.eta1
        self._refresh_multipliers(state)

    def step(self, state: SolverState, dt: float) -> SolverState:
        """Advance one Strang-split step; the input state is not modified."""
        if not dt > 0:
            raise DomainError(f"time step must be > 0, got {dt}")
        limit = self.max_stable_dt(state)
        if dt > limit * (1.0 + 1e-12):
            raise StabilityViolation(
                f"dt = {dt:.6g} exceeds CFL limit {limit:.6g} (cfl={self.config.cfl})")
        new = state.copy()
        self._relax(new, 0.5 * dt)
        self._refresh_multipliers(new)
        self._transport(new, dt)
        self._relax(new, 0.5 * dt)
        self._refresh_multipliers(new)
        new.time = state.time + dt
        return new

    # -- driver ---------------------------------------------------------------------------------

    def snapshot(self, state: SolverState) -> Snapshot:
        return Snapshot(state.time, self.config.x.copy(), state.W0.copy(), state.Q0.copy(),
                        state.W2.copy(), state.Q2.copy(), state.T_le.copy(), self.hbar)

    def run(self, callback: Callable | None = None) -> RunResult:
        cfg = self.config
        state = self.initialize()
        if cfg.quantum_active:
            log.warning("hbar^2 dispersive terms are active: third-derivative fluxes are not "
                        "hyperbolic and admit unbounded propagation speeds")
        interval = cfg.output_interval or cfg.t_end or 1.0
        snaps = [self.snapshot(state)]
        energy0 = self._energies(state)
        next_out = min(interval, cfg.t_end)
        steps = 0
        while state.time < cfg.t_end * (1 - 1e-14):
            dt = min(self.max_stable_dt(state), next_out - state.time)
            state = self.step(state, dt)
            steps += 1
            if state.time >= next_out * (1 - 1e-14):
                state.time = next_out
                snaps.append(self.snapshot(state))
                if callback:
                    callback(snaps[-1])
                next_out = min(next_out + interval, cfg.t_end)
        energy1 = self._energies(state)
        diag = {
            "steps": steps,
            "time": state.time,
            "energy_initial": energy0,
            "energy_final": energy1,
            "energy_total_relative_drift": _rel_drift(energy0["total_zero_order"],
                                                      energy1["total_zero_order"]),
            "max_speed": float(np.max(self.characteristic_speeds(state), initial=0.0)),
            "T_le_min": float(state.T_le.min()),
            "T_le_max": float(state.T_le.max()),
            "dispersive_terms": "active" if cfg.quantum_active else "off",
        }
        return RunResult(snaps, diag, state)

    def _energies(self, state: SolverState) -> dict:
        e0 = state.W0.sum(axis=1) * self.dx
        e2 = state.W2.sum(axis=1) * self.dx
        out = {b.label: {"zero_order": float(e0[i]), "order_hbar2": float(e2[i])}
               for i, b in enumerate(self.branches)}
        out["total_zero_order"] = float(e0.sum())
        out["total_order_hbar2"] = float(e2.sum())
        return out


def _rel_drift(a, b):
    return abs(b - a) / abs(a) if a else abs(b - a)


# -- functional interface ---------------------------------------------------------------------------

def initialize(config: ScenarioConfig) -> SolverState:
    return TransportSolver(config).initialize()


def step(state: SolverState, dt: float) -> SolverState:
    return state.solver.step(state, dt)


def characteristic_speeds(state: SolverState) -> np.ndarray:
    return state.solver.characteristic_speeds(state)


def run(config: ScenarioConfig, callback: Callable | None = None) -> RunResult:
    return TransportSolver(config).run(callback)

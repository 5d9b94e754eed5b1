"""Grid-level Moyal product terms and the hbar^2-corrected transport operator.

Fields live on a phase-space grid: one or more uniform x axes followed by
momentum nodes. For a tensor grid the momentum nodes are the product of
uniform q axes (one per x axis); for a slab grid they are arbitrary momentum
samples in d dimensions while x varies along the first component only.

Derivatives are central differences. Nodes where a stencil does not fit are
set to NaN, so invalid boundary rings propagate through compositions.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .dispersion import DispersionModel
from .errors import GridMismatch, GridTooSmall, NonPeriodicDomain

MIN_NODES = 7


def _uniform_spacing(axis: np.ndarray, name: str) -> float:
    axis = np.asarray(axis, dtype=float)
    if axis.ndim != 1 or axis.size < MIN_NODES:
        raise GridTooSmall(f"{name} axis needs at least {MIN_NODES} nodes, got {axis.size}")
    steps = np.diff(axis)
    h = float(steps.mean())
    if not h > 0 or np.max(np.abs(steps - h)) > 1e-9 * abs(h):
        raise GridMismatch(f"{name} axis must be uniform and increasing")
    return h


@dataclass
class PhaseSpaceGrid:
    """Uniform x axes and momentum nodes.

    Parameters
    ----------
    x_axes : sequence of 1-D arrays
        Uniform spatial axes. Periodic axes exclude the right endpoint.
    q_axes : sequence of 1-D arrays, optional
        Uniform momentum axes, one per x axis (tensor grid).
    q_points : array (..., d), optional
        Momentum samples for a slab grid; mutually exclusive with q_axes.
    periodic : bool
        Whether the x axes wrap around.
    """

    x_axes: tuple
    q_axes: tuple | None = None
    q_points: np.ndarray | None = None
    periodic: bool = False
    dx: tuple = field(init=False)
    dq: tuple = field(init=False)

    def __post_init__(self):
        self.x_axes = tuple(np.asarray(a, dtype=float) for a in self.x_axes)
        self.dx = tuple(_uniform_spacing(a, f"x{i}") for i, a in enumerate(self.x_axes))
        if (self.q_axes is None) == (self.q_points is None):
            raise GridMismatch("give exactly one of q_axes or q_points")
        if self.q_axes is not None:
            self.q_axes = tuple(np.asarray(a, dtype=float) for a in self.q_axes)
            if len(self.q_axes) != len(self.x_axes):
                raise GridMismatch("tensor grids need one q axis per x axis")
            self.dq = tuple(_uniform_spacing(a, f"q{i}") for i, a in enumerate(self.q_axes))
            mesh = np.meshgrid(*self.q_axes, indexing="ij")
            self.q_points = np.stack(mesh, axis=-1)
        else:
            self.q_points = np.asarray(self.q_points, dtype=float)
            if self.q_points.ndim < 2:
                self.q_points = self.q_points[:, None]
            self.dq = ()

    @classmethod
    def slab(cls, x, q_points, periodic: bool = False) -> "PhaseSpaceGrid":
        return cls((x,), q_points=q_points, periodic=periodic)

    @property
    def is_tensor(self) -> bool:
        return self.q_axes is not None

    @property
    def nx(self) -> int:
        return len(self.x_axes)

    @property
    def shape(self) -> tuple:
        return tuple(a.size for a in self.x_axes) + self.q_points.shape[:-1]

    def mesh(self):
        """Broadcastable coordinate arrays (x_1..x_k, q_1..q_d)."""
        nq = self.q_points.ndim - 1
        xs = []
        for i, a in enumerate(self.x_axes):
            shp = [1] * (self.nx + nq)
            shp[i] = a.size
            xs.append(a.reshape(shp))
        qs = [self.q_points[..., j].reshape((1,) * self.nx + self.q_points.shape[:-1])
              for j in range(self.q_points.shape[-1])]
        return xs, qs

    def check(self, *fields):
        for f in fields:
            if np.shape(f) != self.shape:
                raise GridMismatch(f"field shape {np.shape(f)} does not match grid {self.shape}")

    def x_derivative(self, f, axis: int, order: int):
        return _diff(f, axis, order, self.dx[axis], self.periodic)

    def q_derivative(self, f, axis: int, order: int):
        if not self.is_tensor:
            raise GridMismatch("momentum derivatives need a tensor grid")
        return _diff(f, self.nx + axis, order, self.dq[axis], False)


_STENCILS = {
    1: ((-1, 1), (-0.5, 0.5)),
    2: ((-1, 0, 1), (1.0, -2.0, 1.0)),
    3: ((-2, -1, 1, 2), (-0.5, 1.0, -1.0, 0.5)),
}


def _diff(f, axis: int, order: int, h: float, periodic: bool):
    """Second-order central difference of the given order along ``axis``."""
    offsets, coeffs = _STENCILS[order]
    f = np.asarray(f)
    out = np.zeros(f.shape, dtype=np.result_type(f, float))
    for o, w in zip(offsets, coeffs):
        out = out + w * np.roll(f, -o, axis=axis)
    out = out / h ** order
    if not periodic:
        width = max(abs(o) for o in offsets)
        idx = [slice(None)] * f.ndim
        idx[axis] = np.r_[0:width, f.shape[axis] - width:f.shape[axis]]
        out[tuple(idx)] = np.nan
    return out


# -- Moyal terms ----------------------------------------------------------------

def moyal_term(n: int, a, b, grid: PhaseSpaceGrid):
    """Term a #_n b of the semiclassical Moyal expansion, for n in {0, 1, 2}."""
    grid.check(a, b)
    if n == 0:
        return np.asarray(a) * np.asarray(b)
    if not grid.is_tensor:
        raise GridMismatch("Moyal terms need a tensor grid")
    k = grid.nx
    if n == 1:
        s = 0.0
        for i in range(k):
            s = s + (grid.x_derivative(a, i, 1) * grid.q_derivative(b, i, 1)
                     - grid.q_derivative(a, i, 1) * grid.x_derivative(b, i, 1))
        return 0.5j * s
    if n == 2:
        s = 0.0
        for i in range(k):
            for j in range(k):
                axx = _second(grid, a, "x", i, "x", j)
                aqq = _second(grid, a, "q", i, "q", j)
                axq = _second(grid, a, "x", i, "q", j)
                bqq = _second(grid, b, "q", i, "q", j)
                bxx = _second(grid, b, "x", i, "x", j)
                bqx = _second(grid, b, "q", i, "x", j)
                s = s + axx * bqq - 2.0 * axq * bqx + aqq * bxx
        return -0.125 * s
    raise ValueError(f"Moyal terms are implemented for n = 0, 1, 2; got {n}")


def _second(grid, f, kind1, i, kind2, j):
    d1 = grid.x_derivative if kind1 == "x" else grid.q_derivative
    d2 = grid.x_derivative if kind2 == "x" else grid.q_derivative
    if kind1 == kind2 and i == j:
        return d1(f, i, 2)
    return d2(d1(f, i, 1), j, 1)


def quantum_exp_term2_grid(a, grid: PhaseSpaceGrid, n_t: int = 12):
    """hbar^2 coefficient of Exp(a) built from Moyal terms on the grid.

    E_t = Exp(t a) solves dE/dt = a # E with E_0 = 1. The order-hbar term
    vanishes since a #_1 e^{ta} = 0, and the order-hbar^2 term is
    int_0^1 e^{(1-t)a} (a #_2 e^{ta}) dt, integrated here by Gauss-Legendre.
    """
    grid.check(a)
    a = np.asarray(a, dtype=float)
    t, w = np.polynomial.legendre.leggauss(n_t)
    t = 0.5 * (t + 1.0)
    w = 0.5 * w
    out = np.zeros(a.shape)
    for tk, wk in zip(t, w):
        out = out + wk * np.exp((1.0 - tk) * a) * np.real(moyal_term(2, a, np.exp(tk * a), grid))
    return out


# -- transport operator ----------------------------------------------------------

def _spectral_wavenumbers(grid: PhaseSpaceGrid):
    ks = []
    for a, h in zip(grid.x_axes, grid.dx):
        k = 2.0 * np.pi * np.fft.fftfreq(a.size, d=h)
        if a.size % 2 == 0:
            k[a.size // 2] = 0.0     # Nyquist mode has no consistent derivative
        ks.append(k)
    return ks


def _x_spectrum(f, grid):
    return np.fft.fftn(f, axes=tuple(range(grid.nx)))


def _x_inverse(F, grid):
    return np.fft.ifftn(F, axes=tuple(range(grid.nx)))


def _x_mesh_k(grid):
    ks = _spectral_wavenumbers(grid)
    nq = grid.q_points.ndim - 1
    out = []
    for i, k in enumerate(ks):
        shp = [1] * (grid.nx + nq)
        shp[i] = k.size
        out.append(k.reshape(shp))
    return out


def _spectral_derivative(f, grid, orders):
    F = _x_spectrum(f, grid)
    kk = _x_mesh_k(grid)
    mult = 1.0
    for axis, m in enumerate(orders):
        if m:
            mult = mult * (1j * kk[axis]) ** m
    return np.real(_x_inverse(F * mult, grid))


def transport_apply(model: DispersionModel, g, grid: PhaseSpaceGrid, hbar_eff: float = 0.0,
                    method: str = "fd"):
    """S[h] g = c . grad_x g - (hbar^2/24) h_ijk d^3 g/dx_i dx_j dx_k.

    ``method`` selects central finite differences (``fd``) or FFT derivatives
    (``spectral``, periodic grids only).
    """
    grid.check(g)
    g = np.asarray(g, dtype=float)
    k = grid.nx
    q = grid.q_points
    if q.shape[-1] != model.dim or k > model.dim:
        raise GridMismatch(f"grid momenta have dimension {q.shape[-1]}, model has {model.dim}")
    if method == "spectral" and not grid.periodic:
        raise NonPeriodicDomain("spectral derivatives need a periodic x domain")
    if method not in ("fd", "spectral"):
        raise ValueError(f"unknown derivative method {method!r}")
    if model.kind == "einstein":
        return np.zeros(g.shape)

    qshape = (1,) * k + q.shape[:-1]

    def deriv(orders):
        if method == "spectral":
            return _spectral_derivative(g, grid, orders)
        f = g
        for axis, m in enumerate(orders):
            if m:
                f = grid.x_derivative(f, axis, m)
        return f

    c = model.group_velocity(q)
    out = np.zeros(g.shape)
    for i in range(k):
        orders = [0] * k
        orders[i] = 1
        out = out + c[..., i].reshape(qshape) * deriv(orders)
    if hbar_eff != 0.0 and model.kind == "debye":
        t3 = model.third_derivatives(q)
        for i in range(k):
            for j in range(k):
                for l in range(k):
                    orders = [0] * k
                    for a in (i, j, l):
                        orders[a] += 1
                    out = out - hbar_eff ** 2 / 24.0 * t3[..., i, j, l].reshape(qshape) * deriv(orders)
    return out


def integral_form_apply(model: DispersionModel, g, grid: PhaseSpaceGrid, hbar_eff: float):
    """S[h] g from the symbol difference (i/hbar)[h(q + hbar k/2) - h(q - hbar k/2)].

    Each Fourier mode exp(i k . x) of g is multiplied by the symbol difference;
    for hbar -> 0 this reduces to i k . c(q).
    """
    grid.check(g)
    if not grid.periodic:
        raise NonPeriodicDomain("the integral form is evaluated spectrally on periodic x domains")
    q = grid.q_points
    k = grid.nx
    if q.shape[-1] != model.dim or k > model.dim:
        raise GridMismatch(f"grid momenta have dimension {q.shape[-1]}, model has {model.dim}")
    g = np.asarray(g, dtype=float)
    if model.kind == "einstein":
        return np.zeros(g.shape)
    F = _x_spectrum(g, grid)
    kk = np.meshgrid(*_spectral_wavenumbers(grid), indexing="ij")
    kvec = np.zeros(kk[0].shape + (model.dim,))
    for i in range(k):
        kvec[..., i] = kk[i]
    xs = kk[0].shape
    kvec = kvec.reshape(xs + (1,) * (q.ndim - 1) + (model.dim,))
    qb = q.reshape((1,) * k + q.shape)
    if hbar_eff == 0.0:
        c = model.group_velocity(qb)
        mult = 1j * np.sum(kvec * c, axis=-1)
    else:
        shift = 0.5 * hbar_eff * kvec
        mult = 1j * (model.energy(qb + shift) - model.energy(qb - shift)) / hbar_eff
    return np.real(_x_inverse(F * mult, grid))

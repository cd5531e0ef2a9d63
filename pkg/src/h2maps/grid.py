"""Uniform planar grids, Wirtinger-derivative stencils and radial quadrature.

The complex coordinate is ``z = (x1 + i x2) / 2`` so that

    d/dz    = d/dx1 - i d/dx2
    d/dzbar = d/dx1 + i d/dx2

and ``d/dz d/dzbar`` is the planar Laplacian.  Field arrays have shape
``(nx, ny, ...)`` with axis 0 along ``x1``; trailing axes (vector or matrix
components) are carried along untouched.

Two boundary treatments are supported.  ``periodic`` wraps the stencils.
``dirichlet_reference`` is for fields whose boundary values come from a
known reference solution: interior nodes use central stencils and edge nodes
use one-sided second-order stencils.
"""

import json
from dataclasses import asdict, dataclass
from pathlib import Path

import numpy as np

BOUNDARY_MODES = ("dirichlet_reference", "periodic")


@dataclass(frozen=True)
class Grid2D:
    nx: int
    ny: int
    hx: float
    hy: float
    x1_min: float
    x2_min: float
    boundary_mode: str = "dirichlet_reference"

    def __post_init__(self):
        if self.nx < 5 or self.ny < 5:
            raise ValueError(f"grid needs at least 5 nodes per axis, got {self.nx}x{self.ny}")
        if not (self.hx > 0 and self.hy > 0):
            raise ValueError("grid spacing must be positive")
        if self.boundary_mode not in BOUNDARY_MODES:
            raise ValueError(f"unknown boundary mode {self.boundary_mode!r}")

    @classmethod
    def square(cls, half_width, h, boundary_mode="dirichlet_reference"):
        """Grid on ``[-L, L]^2`` with the origin as a node (odd node counts)."""
        m = int(round(half_width / h))
        if not np.isclose(m * h, half_width, rtol=1e-12, atol=0):
            raise ValueError(f"half width {half_width} is not a multiple of h={h}")
        n = 2 * m + 1
        return cls(n, n, h, h, -m * h, -m * h, boundary_mode)

    @classmethod
    def periodic(cls, n, h):
        """``n x n`` periodic grid of period ``n h`` centred on the origin."""
        return cls(n, n, h, h, -(n // 2) * h, -(n // 2) * h, "periodic")

    @property
    def shape(self):
        return (self.nx, self.ny)

    @property
    def h(self):
        return min(self.hx, self.hy)

    @property
    def x1(self):
        return self.x1_min + self.hx * np.arange(self.nx)

    @property
    def x2(self):
        return self.x2_min + self.hy * np.arange(self.ny)

    def mesh(self):
        return np.meshgrid(self.x1, self.x2, indexing="ij")

    def z(self):
        X1, X2 = self.mesh()
        return 0.5 * (X1 + 1j * X2)

    def polar(self):
        """``(rho, theta)`` of every node in ``(x1, x2)``-polar units."""
        X1, X2 = self.mesh()
        return np.hypot(X1, X2), np.arctan2(X2, X1)

    @property
    def origin_index(self):
        i = -self.x1_min / self.hx
        j = -self.x2_min / self.hy
        if not (np.isclose(i, round(i)) and np.isclose(j, round(j))):
            raise ValueError("the origin is not a grid node")
        i, j = int(round(i)), int(round(j))
        if not (0 <= i < self.nx and 0 <= j < self.ny):
            raise ValueError("the origin lies outside the grid")
        return i, j

    def interior(self, margin=1):
        """Index tuple selecting nodes at least ``margin`` away from the edges."""
        return (slice(margin, self.nx - margin), slice(margin, self.ny - margin))

    def metadata(self, **extra):
        meta = asdict(self)
        meta.update(extra)
        return meta


# -- stencils ----------------------------------------------------------------


def _shift(f, k, axis):
    return np.roll(f, -k, axis=axis)


def _diff1(f, h, axis, periodic, order):
    f = np.asarray(f)
    if periodic:
        if order == 4:
            return (
                -_shift(f, 2, axis) + 8 * _shift(f, 1, axis) - 8 * _shift(f, -1, axis)
                + _shift(f, -2, axis)
            ) / (12 * h)
        return (_shift(f, 1, axis) - _shift(f, -1, axis)) / (2 * h)

    f = np.moveaxis(f, axis, 0)
    out = np.empty_like(f)
    out[1:-1] = (f[2:] - f[:-2]) / (2 * h)
    if order == 4:
        out[2:-2] = (-f[4:] + 8 * f[3:-1] - 8 * f[1:-3] + f[:-4]) / (12 * h)
    out[0] = (-3 * f[0] + 4 * f[1] - f[2]) / (2 * h)
    out[-1] = (3 * f[-1] - 4 * f[-2] + f[-3]) / (2 * h)
    return np.moveaxis(out, 0, axis)


def _diff2(f, h, axis, periodic):
    f = np.asarray(f)
    if periodic:
        return (_shift(f, 1, axis) - 2 * f + _shift(f, -1, axis)) / h**2
    f = np.moveaxis(f, axis, 0)
    out = np.empty_like(f)
    out[1:-1] = (f[2:] - 2 * f[1:-1] + f[:-2]) / h**2
    out[0] = (2 * f[0] - 5 * f[1] + 4 * f[2] - f[3]) / h**2
    out[-1] = (2 * f[-1] - 5 * f[-2] + 4 * f[-3] - f[-4]) / h**2
    return np.moveaxis(out, 0, axis)


def d_x1(f, grid, order=2):
    return _diff1(f, grid.hx, 0, grid.boundary_mode == "periodic", order)


def d_x2(f, grid, order=2):
    return _diff1(f, grid.hy, 1, grid.boundary_mode == "periodic", order)


def d_z(f, grid, order=2):
    """``df/dz = df/dx1 - i df/dx2``."""
    return d_x1(f, grid, order) - 1j * d_x2(f, grid, order)


def d_zbar(f, grid, order=2):
    """``df/dzbar = df/dx1 + i df/dx2``."""
    return d_x1(f, grid, order) + 1j * d_x2(f, grid, order)


def laplacian(f, grid):
    """Five-point Laplacian (equal to ``d_z d_zbar`` in the continuum)."""
    periodic = grid.boundary_mode == "periodic"
    return _diff2(f, grid.hx, 0, periodic) + _diff2(f, grid.hy, 1, periodic)


def forward_x1(f, grid):
    """Forward differences along ``x1``; wraps when periodic, else ``nx - 1`` rows."""
    if grid.boundary_mode == "periodic":
        return (_shift(f, 1, 0) - f) / grid.hx
    return (f[1:] - f[:-1]) / grid.hx


def forward_x2(f, grid):
    if grid.boundary_mode == "periodic":
        return (_shift(f, 1, 1) - f) / grid.hy
    return (f[:, 1:] - f[:, :-1]) / grid.hy


def trapezoid_weights(grid):
    """Per-node quadrature weights (area units) for the whole grid."""
    if grid.boundary_mode == "periodic":
        return np.full(grid.shape, grid.hx * grid.hy)
    wx = np.full(grid.nx, grid.hx)
    wx[[0, -1]] *= 0.5
    wy = np.full(grid.ny, grid.hy)
    wy[[0, -1]] *= 0.5
    return np.outer(wx, wy)


def convergence_orders(hs, errors):
    """Observed orders ``log(e_k / e_{k+1}) / log(h_k / h_{k+1})`` along a ladder."""
    hs = np.asarray(hs, dtype=float)
    errors = np.asarray(errors, dtype=float)
    with np.errstate(divide="ignore", invalid="ignore"):
        return np.log(errors[:-1] / errors[1:]) / np.log(hs[:-1] / hs[1:])


# -- radial quadrature -------------------------------------------------------


class ZeroTail:
    """Decay model ``Q = 0`` beyond the outer radius."""

    name = "zero"

    def integral(self, R, Q_R):
        return np.zeros_like(np.abs(np.asarray(Q_R, dtype=complex)))

    def describe(self):
        return {"model": self.name}


@dataclass(frozen=True)
class PowerTail:
    """Decay model ``|Q(rho)|^2 = |Q(R)|^2 (rho / R)**k`` beyond ``R``.

    The tail ``int_R^inf |Q|^2 / tau dtau`` equals ``-|Q(R)|^2 / k``.  For
    ``k < 0`` this is the convergent integral; for ``k > 0`` it is the
    analytically continued value, which fixes the additive constant of the
    nonlocal term for profiles that grow at infinity.
    """

    k: float
    name = "power"

    def __post_init__(self):
        if self.k == 0:
            raise ValueError("power-law tail needs a nonzero exponent")

    def integral(self, R, Q_R):
        return -np.abs(np.asarray(Q_R)) ** 2 / self.k

    def describe(self):
        return {"model": self.name, "k": self.k}


def tail_integrals(Q, rho, tail=None):
    """``int_{rho_k}^inf |Q|^2 / tau dtau`` for every sample ``rho_k``.

    Composite trapezoid over the samples up to ``R = rho[-1]`` plus the
    decay-model tail beyond ``R``.  ``rho`` must be increasing and positive;
    it need not be uniform.
    """
    tail = ZeroTail() if tail is None else tail
    Q = np.asarray(Q)
    rho = np.asarray(rho, dtype=float)
    f = np.abs(Q) ** 2 / rho
    pieces = 0.5 * (f[1:] + f[:-1]) * np.diff(rho)
    out = np.zeros(rho.shape)
    out[:-1] = np.cumsum(pieces[::-1])[::-1]
    return out + tail.integral(rho[-1], Q[-1])


def radial_tail_integral(Q, rho, rho_index, tail=None):
    """Single-index version of :func:`tail_integrals`."""
    n = len(rho)
    if not (-n <= rho_index < n):
        raise IndexError(f"rho index {rho_index} out of range for {n} samples")
    return float(tail_integrals(Q, rho, tail)[rho_index])


# -- snapshot files ----------------------------------------------------------


def write_field(path, grid, values, t=None, **meta):
    """Write one complex scalar field as ``x1,x2,re,im`` CSV plus JSON sidecar."""
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    values = np.asarray(values, dtype=complex)
    if values.shape != grid.shape:
        raise ValueError(f"field shape {values.shape} does not match grid {grid.shape}")
    X1, X2 = grid.mesh()
    table = np.column_stack([X1.ravel(), X2.ravel(), values.real.ravel(), values.imag.ravel()])
    np.savetxt(path, table, delimiter=",", header="x1,x2,re,im", comments="", fmt="%.17g")
    sidecar = grid.metadata(t=t, **meta)
    path.with_suffix(".json").write_text(json.dumps(sidecar, indent=2, default=float))
    return path


def read_field(path):
    """Inverse of :func:`write_field`: returns ``(grid, values, metadata)``."""
    path = Path(path)
    meta = json.loads(path.with_suffix(".json").read_text())
    keys = ("nx", "ny", "hx", "hy", "x1_min", "x2_min", "boundary_mode")
    grid = Grid2D(**{k: meta[k] for k in keys})
    table = np.loadtxt(path, delimiter=",", skiprows=1, ndmin=2)
    values = (table[:, 2] + 1j * table[:, 3]).reshape(grid.shape)
    return grid, values, meta


def write_components(directory, grid, components, t=None, **meta):
    """Write several named fields (``{"p": ..., "q": ...}``) into one directory."""
    directory = Path(directory)
    return [
        write_field(directory / f"{name}.csv", grid, values, t=t, component=name, **meta)
        for name, values in components.items()
    ]

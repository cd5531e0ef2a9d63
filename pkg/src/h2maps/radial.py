"""Radial reduction ``q = exp(-i theta) Q(t, rho)``, ``p = 0``.

Under this ansatz the gauged system reduces to one integro-differential
equation for ``Q``:

    i Q_t + (Q_rr + Q_r / rho - Q / rho**2) - 2 Q (|Q|**2 - 2 int_rho^inf |Q|**2 / tau dtau) = 0.

``rho`` is measured in ``(x1, x2)`` units, so ``rho = 2|z|``.  The linear
part is ``d/drho [(1/rho) d/drho (rho Q)]``, discretized in flux form with the
regularity condition ``Q(0) = 0``.  This keeps second order at the first node
and makes the discrete mass ``sum |Q|**2 rho h`` conserved up to boundary
flux.

Profiles must vanish linearly at the origin.  ``C / rho``, which solves the
homogeneous first-order part of the radial frame system, is singular there
and is rejected:

>>> import numpy as np
>>> from h2maps.grid import Grid2D
>>> rg = RadialGrid(16, 0.1)
>>> embed_radial(RadialState(rg, 1.0 / rg.rho + 0j), Grid2D.square(0.4, 0.1))
Traceback (most recent call last):
    ...
ValueError: profile does not vanish linearly at the origin (extrapolated Q(0) = 15)
"""

import csv
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np
from scipy.interpolate import CubicSpline

from .errors import ConfigError
from .exact import radial_ansatz_fields
from .grid import ZeroTail, tail_integrals
from .gauge import GaugeFields


@dataclass(frozen=True)
class RadialGrid:
    """Nodes ``rho_k = k h`` for ``k = 1..n``; the origin is excluded."""

    n: int
    h: float

    def __post_init__(self):
        if self.n < 8:
            raise ValueError(f"radial grid needs n >= 8, got {self.n}")
        if not self.h > 0:
            raise ValueError("radial spacing must be positive")

    @classmethod
    def covering(cls, R, h):
        return cls(int(np.ceil(R / h - 1e-9)), h)

    @property
    def rho(self):
        return self.h * np.arange(1, self.n + 1)

    @property
    def R(self):
        return self.n * self.h

    def metadata(self):
        return {"n": self.n, "h_rho": self.h, "R": self.R}


@dataclass(frozen=True)
class RadialState:
    grid: RadialGrid
    Q: np.ndarray
    t: float = 0.0

    def __post_init__(self):
        Q = np.asarray(self.Q, dtype=complex)
        if Q.shape != (self.grid.n,):
            raise ValueError(f"Q must have {self.grid.n} samples, got {Q.shape}")
        if not np.all(np.isfinite(Q)):
            raise ValueError("Q contains non-finite values")
        object.__setattr__(self, "Q", Q)

    @classmethod
    def from_profile(cls, grid, profile, t=0.0):
        return cls(grid, profile(t, grid.rho), t)


def radial_operator(Q, h, ghost=None):
    """Flux-form ``Q_rr + Q_r / rho - Q / rho**2`` on nodes ``rho_k = k h``.

    ``ghost`` is the value at ``rho_{n+1}``; by default it is extrapolated
    quadratically.  ``Q(0) = 0`` closes the stencil at the first node.
    """
    Q = np.asarray(Q, dtype=complex)
    n = len(Q)
    if ghost is None:
        ghost = 3 * Q[-1] - 3 * Q[-2] + Q[-3]
    rho = h * np.arange(0, n + 2)
    ext = np.concatenate([[0.0], Q, [ghost]])
    rq = rho * ext
    mid = 0.5 * (rho[1:] + rho[:-1])
    v = (rq[1:] - rq[:-1]) / (h * mid)
    return (v[1:] - v[:-1]) / h


def qq_rhs(state, tail=None, ghost=None):
    """``Q_t = i [L Q - 2 Q (|Q|**2 - 2 int_rho^inf |Q|**2 / tau dtau)]``.

    ``tail`` is the decay model used beyond the outer radius (zero by
    default); the integral is the trapezoid sum over the nodes plus the
    model tail.
    """
    g = state.grid
    Q = state.Q
    u = np.abs(Q) ** 2 - 2 * tail_integrals(Q, g.rho, tail)
    return 1j * (radial_operator(Q, g.h, ghost) - 2 * Q * u)


def radial_mass(state):
    """Discrete ``int |Q|**2 rho drho`` (rectangle rule, exact for the flux form)."""
    g = state.grid
    return float(np.sum(np.abs(state.Q) ** 2 * g.rho) * g.h)


@dataclass
class RadialTrajectory:
    grid: RadialGrid
    times: list = field(default_factory=list)
    profiles: list = field(default_factory=list)
    mass: list = field(default_factory=list)
    status: str = "ok"
    halted_at: float = None

    def record(self, state):
        self.times.append(float(state.t))
        self.profiles.append(state.Q.copy())
        self.mass.append(radial_mass(state))

    @property
    def final(self):
        return RadialState(self.grid, self.profiles[-1], self.times[-1])

    @property
    def mass_drift(self):
        m0 = self.mass[0]
        if m0 == 0:
            return max(abs(m) for m in self.mass)
        return max(abs(m - m0) for m in self.mass) / m0

    def write_csv(self, path):
        """Rows ``t,rho,reQ,imQ`` for every recorded profile."""
        path = Path(path)
        path.parent.mkdir(parents=True, exist_ok=True)
        rho = self.grid.rho
        with path.open("w", newline="") as fh:
            w = csv.writer(fh)
            w.writerow(["t", "rho", "reQ", "imQ"])
            for t, Q in zip(self.times, self.profiles):
                for r, v in zip(rho, Q):
                    w.writerow([repr(t), repr(float(r)), repr(float(v.real)), repr(float(v.imag))])
        return path


def evolve_radial(
    state,
    dt,
    steps,
    *,
    tail=None,
    boundary=None,
    cfl=0.25,
    sample_every=None,
    blowup_threshold=1e6,
):
    """Classical RK4 for the radial equation with the outer node pinned.

    ``boundary(t, rho)`` supplies the pinned value at ``R`` and the ghost
    value at ``R + h``; with ``boundary=None`` both come from the
    decay model (zero for :class:`~h2maps.grid.ZeroTail`).  Every
    ``sample_every`` steps the profile and its mass are recorded.  When
    ``max |Q|`` exceeds ``blowup_threshold`` the run stops with status
    ``"blowup_suspected"`` instead of raising.
    """
    g = state.grid
    tail = ZeroTail() if tail is None else tail
    if not dt > 0:
        raise ConfigError("dt must be positive")
    if dt > cfl * g.h**2:
        raise ConfigError(f"dt={dt:g} violates the stability guard dt <= {cfl * g.h**2:g}")
    every = sample_every or max(steps, 1)
    R_ghost = g.R + g.h

    def edge(t):
        if boundary is None:
            return 0j, 0j
        return complex(boundary(t, g.R)), complex(boundary(t, R_ghost))

    def f(t, Q):
        Qr, Qg = edge(t)
        Q = Q.copy()
        Q[-1] = Qr
        out = qq_rhs(RadialState(g, Q, t), tail, ghost=Qg)
        out[-1] = 0
        return out

    traj = RadialTrajectory(g)
    Q = state.Q.copy()
    t = state.t
    Q[-1] = edge(t)[0]
    traj.record(RadialState(g, Q, t))
    for k in range(steps):
        k1 = f(t, Q)
        k2 = f(t + dt / 2, Q + dt / 2 * k1)
        k3 = f(t + dt / 2, Q + dt / 2 * k2)
        k4 = f(t + dt, Q + dt * k3)
        Q = Q + dt / 6 * (k1 + 2 * k2 + 2 * k3 + k4)
        t = state.t + (k + 1) * dt
        Q[-1] = edge(t)[0]
        bad = not np.all(np.isfinite(Q)) or np.abs(Q).max() > blowup_threshold
        if bad:
            traj.status = "blowup_suspected"
            traj.halted_at = t
            break
        if (k + 1) % every == 0 or k + 1 == steps:
            traj.record(RadialState(g, Q, t))
    return traj


def embed_radial(state, grid2d, tail=None, origin_tol=1e-6):
    """Planar fields ``p = 0``, ``q = exp(-i theta) Q``, ``r = exp(-i theta) conj(Q)``, ``u``.

    ``Q`` is interpolated with a cubic spline through the odd extension
    ``Q(-rho) = -Q(rho)`` (which encodes ``Q(0) = 0``).  Beyond ``R`` the
    decay model supplies ``|Q|`` with the phase frozen at ``R``.  The
    nonlocal part of ``u`` is integrated over the radial nodes.
    """
    g = state.grid
    tail = ZeroTail() if tail is None else tail
    Q = state.Q
    Q0 = 2 * Q[0] - Q[1]
    if abs(Q0) > max(origin_tol, 0.5 * abs(Q[0])):
        raise ValueError(
            f"profile does not vanish linearly at the origin (extrapolated Q(0) = {abs(Q0):.3g})"
        )
    rho = g.rho
    spline = CubicSpline(
        np.concatenate([-rho[::-1], [0.0], rho]),
        np.concatenate([-Q[::-1], [0j], Q]),
    )

    def profile(t, r):
        r = np.asarray(r, dtype=float)
        out = spline(np.minimum(r, g.R))
        beyond = r > g.R
        if np.any(beyond):
            if isinstance(tail, ZeroTail):
                out = np.where(beyond, 0j, out)
            else:
                grow = (np.where(beyond, r, g.R) / g.R) ** (0.5 * tail.k)
                out = np.where(beyond, Q[-1] * grow, out)
        return out

    p, q, r, u = radial_ansatz_fields(profile, state.t, grid2d.z(), rho, tail=tail)
    return GaugeFields(grid2d, p, q, r, u, state.t)

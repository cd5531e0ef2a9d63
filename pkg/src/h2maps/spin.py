"""Direct time stepping of the Schrodinger map flow into H^2.

The flow is ``s_t = sign * s x (laplacian s)`` with ``x`` the pseudo-cross
product.  ``sign = +1`` on the ``s3 > 0`` sheet is the usual form; the
substitution ``s -> -s`` turns it into ``sign = -1`` on the ``s3 < 0`` sheet,
which is the convention of the gauge construction.  In matrix form
``S_t = sign * [S, laplacian S] / 2``.
"""

import csv
import json
from dataclasses import asdict, dataclass, field
from pathlib import Path

import numpy as np

from . import grid as gc
from .errors import ConeExitError, ConfigError
from .minkowski import (
    commutator,
    hyperboloid_violation,
    matrix_to_spin,
    minkowski_norm,
    project_to_hyperboloid,
    pseudo_cross,
    sheet_of,
    spin_to_matrix,
)


@dataclass(frozen=True)
class SpinField:
    """Spin vectors ``(s1, s2, s3)`` on a :class:`~h2maps.grid.Grid2D`."""

    grid: gc.Grid2D
    values: np.ndarray
    sheet: int = field(default=0)

    def __post_init__(self):
        values = np.asarray(self.values, dtype=float)
        if values.shape != self.grid.shape + (3,):
            raise ValueError(f"spin values must have shape {self.grid.shape + (3,)}")
        object.__setattr__(self, "values", values)
        found = sheet_of(values)
        if self.sheet not in (0, found):
            raise ValueError(f"declared sheet {self.sheet} but s3 has sign {found}")
        object.__setattr__(self, "sheet", found)

    @classmethod
    def constant(cls, grid, s=(0.0, 0.0, 1.0)):
        return cls(grid, np.broadcast_to(np.asarray(s, dtype=float), grid.shape + (3,)).copy())

    @property
    def s1(self):
        return self.values[..., 0]

    @property
    def s2(self):
        return self.values[..., 1]

    @property
    def s3(self):
        return self.values[..., 2]

    def flipped(self):
        """``s -> -s``: moves the field to the other sheet."""
        return SpinField(self.grid, -self.values)

    def matrix(self):
        return spin_to_matrix(self.values)

    def max_violation(self):
        return float(hyperboloid_violation(self.values).max())

    def write(self, directory, t=None, **meta):
        return gc.write_components(
            directory,
            self.grid,
            {"s1": self.s1, "s2": self.s2, "s3": self.s3},
            t=t,
            sheet=self.sheet,
            **meta,
        )


@dataclass(frozen=True)
class EvolveConfig:
    dt: float
    steps: int
    sign: int = 1
    renormalize_every: int = 1
    cfl: float = 0.1

    def validate(self, grid):
        if not self.dt > 0:
            raise ConfigError("dt must be positive")
        if self.steps < 0:
            raise ConfigError("steps must be non-negative")
        if self.sign not in (1, -1):
            raise ConfigError("sign must be +1 or -1")
        if self.renormalize_every < 0:
            raise ConfigError("renormalize_every must be >= 0 (0 disables retraction)")
        limit = self.cfl * grid.h**2
        if self.dt > limit:
            raise ConfigError(f"dt={self.dt:g} violates the stability guard dt <= {limit:g}")


def rhs(values, grid, sign=1):
    """Vector form ``sign * s x laplacian(s)`` of the velocity field."""
    return sign * pseudo_cross(values, gc.laplacian(values, grid))


def rhs_matrix_form(values, grid, sign=1):
    """Same velocity via ``sign * [S, laplacian S] / 2`` and back to vectors."""
    S = spin_to_matrix(values)
    dS = 0.5 * sign * commutator(S, gc.laplacian(S, grid))
    return matrix_to_spin(dS)


def _retract(values, step_index):
    try:
        return project_to_hyperboloid(values)
    except ConeExitError as exc:
        raise ConeExitError(str(exc), node=exc.node, step=step_index) from None


def step(S, cfg, step_index=0):
    """One classical RK4 step, then a retraction onto H^2 when the cadence fires.

    Returns the new field and the pre-retraction hyperboloid violation.
    """
    g = S.grid
    s = S.values
    dt = cfg.dt
    k1 = rhs(s, g, cfg.sign)
    k2 = rhs(s + 0.5 * dt * k1, g, cfg.sign)
    k3 = rhs(s + 0.5 * dt * k2, g, cfg.sign)
    k4 = rhs(s + dt * k3, g, cfg.sign)
    new = s + (dt / 6.0) * (k1 + 2 * k2 + 2 * k3 + k4)
    drift = float(hyperboloid_violation(new).max())
    if cfg.renormalize_every and (step_index + 1) % cfg.renormalize_every == 0:
        new = _retract(new, step_index)
    elif np.any(minkowski_norm(new) >= 0):
        _retract(new, step_index)
    if np.any(np.sign(new[..., 2]) != S.sheet):
        raise ConeExitError("spin field crossed to the other sheet", step=step_index)
    return SpinField(g, new, S.sheet), drift


def energy(S):
    """Dirichlet energy ``int |grad s|^2`` in the Minkowski metric.

    Uses forward differences, whose sum is exactly conserved by the
    semi-discrete flow with the five-point Laplacian on periodic grids.
    Chords between points of one sheet are spacelike, so every term is
    non-negative.
    """
    g = S.grid
    d1 = gc.forward_x1(S.values, g)
    d2 = gc.forward_x2(S.values, g)
    e1 = minkowski_norm(d1)
    e2 = minkowski_norm(d2)
    if g.boundary_mode == "periodic":
        return float((e1.sum() + e2.sum()) * g.hx * g.hy)
    wy = np.full(g.ny, g.hy)
    wy[[0, -1]] *= 0.5
    wx = np.full(g.nx, g.hx)
    wx[[0, -1]] *= 0.5
    return float((e1 * wy[None, :]).sum() * g.hx + (e2 * wx[:, None]).sum() * g.hy)


def gradient_modulus(S):
    """Pointwise ``sum_k |d_z s_k| + |d_zbar s_k|`` over the three components."""
    dz = gc.d_z(S.values, S.grid)
    dzb = gc.d_zbar(S.values, S.grid)
    return np.abs(dz).sum(axis=-1) + np.abs(dzb).sum(axis=-1)


def sup_gradient(S, margin=1):
    """Largest interior value of :func:`gradient_modulus`."""
    return float(gradient_modulus(S)[S.grid.interior(margin)].max())


def matrix_equation_residual(prev, mid, nxt, dt, sign=-1):
    """Discrete residual of ``S_t - sign [S, laplacian S] / 2`` at the middle slice.

    Central difference in time, five-point Laplacian in space.  Returns the
    residual matrices and the largest term magnitude (for relative scaling).
    """
    S_prev, S_mid, S_next = (x.matrix() for x in (prev, mid, nxt))
    S_t = (S_next - S_prev) / (2 * dt)
    flow = 0.5 * sign * commutator(S_mid, gc.laplacian(S_mid, mid.grid))
    return S_t - flow, np.maximum(np.abs(S_t), np.abs(flow)).max(axis=(-2, -1))


def bump_initial_data(grid, amplitude=0.3, radius=0.6, center=(0.0, 0.0), sheet=1):
    """Constant map plus a smooth compactly supported bump, exactly on H^2.

    The in-plane components are a mollifier bump ``exp(1 - 1/(1 - (r/R)^2))``
    (zero for ``r >= R``); ``s3`` is recomputed so the field lies on the
    requested sheet.
    """
    X1, X2 = grid.mesh()
    x, y = X1 - center[0], X2 - center[1]
    r2 = (x**2 + y**2) / radius**2
    bump = np.zeros_like(r2)
    inside = r2 < 1
    bump[inside] = np.exp(1.0 - 1.0 / (1.0 - r2[inside]))
    w1 = amplitude * bump
    w2 = amplitude * bump * x / radius
    s3 = sheet * np.sqrt(1.0 + w1**2 + w2**2)
    return SpinField(grid, np.stack([w1, w2, s3], axis=-1))


@dataclass
class Diagnostics:
    t: list = field(default_factory=list)
    energy: list = field(default_factory=list)
    sup_gradient: list = field(default_factory=list)
    max_constraint_violation: list = field(default_factory=list)

    def record(self, t, S, violation):
        self.t.append(float(t))
        self.energy.append(energy(S))
        self.sup_gradient.append(sup_gradient(S))
        self.max_constraint_violation.append(float(violation))

    def write_csv(self, path):
        path = Path(path)
        path.parent.mkdir(parents=True, exist_ok=True)
        with path.open("w", newline="") as fh:
            w = csv.writer(fh)
            w.writerow(["t", "energy", "sup_gradient", "max_constraint_violation"])
            for row in zip(self.t, self.energy, self.sup_gradient, self.max_constraint_violation):
                w.writerow([repr(float(v)) for v in row])

    @property
    def energy_drift(self):
        e0 = self.energy[0]
        scale = abs(e0) if e0 != 0 else 1.0
        return max(abs(e - e0) for e in self.energy) / scale


def evolve(S, cfg, t0=0.0, sample_every=None, out_dir=None):
    """Run ``cfg.steps`` RK4 steps; returns ``(final_field, diagnostics, snapshots)``.

    Diagnostics are sampled every ``sample_every`` steps (default: start and
    end only).  When ``out_dir`` is given each sample is written as a snapshot
    directory ``t_XXXXXX`` and ``diagnostics.csv`` sits next to them.
    """
    cfg.validate(S.grid)
    diag = Diagnostics()
    snapshots = []
    every = sample_every or max(cfg.steps, 1)

    def sample(k, field_, violation):
        t = t0 + k * cfg.dt
        diag.record(t, field_, violation)
        snapshots.append((t, field_))
        if out_dir is not None:
            field_.write(Path(out_dir) / f"t_{k:06d}", t=t)

    sample(0, S, S.max_violation())
    worst = 0.0
    for k in range(cfg.steps):
        S, drift = step(S, cfg, k)
        worst = max(worst, drift)
        if (k + 1) % every == 0 or k + 1 == cfg.steps:
            sample(k + 1, S, worst)
    if out_dir is not None:
        diag.write_csv(Path(out_dir) / "diagnostics.csv")
        (Path(out_dir) / "evolve_config.json").write_text(json.dumps(asdict(cfg), indent=2))
    return S, diag, snapshots

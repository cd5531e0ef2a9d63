"""Gauge transformations between the spin field S and the fields (p, q, r, u).

A frame ``G`` in SU(1,1) relates the two sides through

    S = -i G sigma3 G^-1,      G_z = -G U,      G_zbar = G P,
    G_t = G i((u + Uoff_zbar) sigma3 + H),

with ``U = [[p, q], [r, -p]]``, ``P = [[conj p, -conj r], [-conj q, -conj p]]``
and ``H = [[0, -2 q conj p], [-2 r conj p, 0]]``.  Going from fields to spin
means integrating this linear system for ``G`` (:func:`integrate_frame`) and
conjugating ``sigma3`` (:func:`reconstruct_spin`).  Going back means building
a frame from ``S`` algebraically (:func:`appendix_frame`) and differentiating
it (:func:`decompose_spin`).
"""

from dataclasses import dataclass, field

import numpy as np

from . import grid as gc
from .errors import AdmissibilityError, InvariantError, ProjectionError, SheetError
from .exact import blowup_fields
from .minkowski import (
    SIGMA3,
    commutator,
    group_inverse,
    matrix_to_spin,
    project_to_group,
    spin_to_matrix,
    su11_violation,
)
from .spin import SpinField, gradient_modulus

FRAME_TOL = 1e-8
CONJUGATION_TOL = 1e-10
ADMISSIBILITY_TOL = 5e-2


# -- fields and connection matrices ------------------------------------------


@dataclass(frozen=True)
class GaugeFields:
    """Grid samples of the complex fields ``p, q, r`` and the real field ``u``."""

    grid: gc.Grid2D
    p: np.ndarray
    q: np.ndarray
    r: np.ndarray
    u: np.ndarray
    t: float = None

    def __post_init__(self):
        for name in ("p", "q", "r", "u"):
            arr = np.asarray(getattr(self, name))
            if arr.shape != self.grid.shape:
                raise ValueError(f"{name} has shape {arr.shape}, grid is {self.grid.shape}")
        u = np.asarray(self.u)
        if np.iscomplexobj(u):
            scale = max(1.0, float(np.abs(u).max()))
            if np.abs(u.imag).max() > FRAME_TOL * scale:
                raise InvariantError("u must be real")
            u = u.real
        object.__setattr__(self, "u", u.astype(float))
        for name in ("p", "q", "r"):
            object.__setattr__(self, name, np.asarray(getattr(self, name), dtype=complex))

    @classmethod
    def zeros(cls, grid, t=None):
        z = np.zeros(grid.shape, dtype=complex)
        return cls(grid, z, z, z, z.real, t)

    def components(self):
        return {"p": self.p, "q": self.q, "r": self.r, "u": self.u}

    def write(self, directory, **meta):
        return gc.write_components(directory, self.grid, self.components(), t=self.t, **meta)


def sample_fields(source, grid, t):
    """Evaluate a field source ``source(t, x1, x2) -> (p, q, r, u)`` on the grid."""
    X1, X2 = grid.mesh()
    p, q, r, u = source(t, X1, X2)
    return GaugeFields(grid, p, q, r, u, t)


def closed_form_source(params):
    """Field source for the explicit blow-up family."""

    def source(t, x1, x2):
        return blowup_fields(params, t, 0.5 * (np.asarray(x1) + 1j * np.asarray(x2)))

    return source


def perturbed_source(source, dq):
    """Wrap a source, adding the constant ``dq`` to ``q`` (breaks the constraints)."""

    def wrapped(t, x1, x2):
        p, q, r, u = source(t, x1, x2)
        return p, q + dq, r, u

    return wrapped


@dataclass(frozen=True)
class ConnectionMatrices:
    """``U``, ``P`` and ``H`` at every node, shape ``(nx, ny, 2, 2)``."""

    grid: gc.Grid2D
    U: np.ndarray
    P: np.ndarray
    H: np.ndarray

    @classmethod
    def from_fields(cls, f):
        p, q, r = f.p, f.q, f.r
        U = _mat(p, q, r, -p)
        P = _mat(np.conj(p), -np.conj(r), -np.conj(q), -np.conj(p))
        zero = np.zeros_like(p)
        H = _mat(zero, -2 * q * np.conj(p), -2 * r * np.conj(p), zero)
        return cls(f.grid, U, P, H)

    # x1/x2 form of the z-connection: G_x1 = -G A1, G_x2 = -G A2
    @property
    def psi(self):
        return 0.5 * (self.U[..., 0, 1] + np.conj(self.U[..., 1, 0]))

    @property
    def phi(self):
        return 0.5j * (self.U[..., 0, 1] - np.conj(self.U[..., 1, 0]))

    @property
    def l(self):  # noqa: E743
        return self.U[..., 0, 0].real

    @property
    def s(self):
        return self.U[..., 0, 0].imag


def _mat(a, b, c, d):
    a = np.asarray(a)
    out = np.empty(a.shape + (2, 2), dtype=complex)
    out[..., 0, 0] = a
    out[..., 0, 1] = b
    out[..., 1, 0] = c
    out[..., 1, 1] = d
    return out


# -- residuals ---------------------------------------------------------------


def constraint_residual(f):
    """Residuals of the two compatibility constraints.

    ``res1 = conj(p)_z + p_zbar + |q|^2 - |r|^2`` and
    ``res2 = -conj(r)_z + q_zbar + 2 (p conj(r) + conj(p) q)``.
    """
    g = f.grid
    p, q, r = f.p, f.q, f.r
    res1 = gc.d_z(np.conj(p), g) + gc.d_zbar(p, g) + np.abs(q) ** 2 - np.abs(r) ** 2
    res2 = -gc.d_z(np.conj(r), g) + gc.d_zbar(q, g) + 2 * (p * np.conj(r) + np.conj(p) * q)
    return res1, res2


def constraint_scale(f):
    """Largest magnitude among the individual terms of the constraints."""
    g = f.grid
    p, q, r = f.p, f.q, f.r
    terms = [
        gc.d_z(np.conj(p), g), gc.d_zbar(p, g), np.abs(q) ** 2, np.abs(r) ** 2,
        gc.d_z(np.conj(r), g), gc.d_zbar(q, g), 2 * p * np.conj(r), 2 * np.conj(p) * q,
    ]
    sl = g.interior()
    return max(float(np.abs(t[sl]).max()) for t in terms)


def system_residual(prev, mid, nxt, dt, return_scale=False):
    """Residuals of the three evolution equations at the middle time slice.

        R_q = i q_t + lap q - 2 u q + 2 (conj(p) q)_z - 2 p q_zbar - 4 |p|^2 q
        R_r = i r_t - lap r + 2 u r + 2 (conj(p) r)_z - 2 p r_zbar + 4 |p|^2 r
        R_p = i p_t + (q r)_zbar - u_z

    Time derivatives are central over ``dt``; ``q_{z zbar}`` uses the
    five-point Laplacian.  With ``return_scale=True`` the largest interior
    term magnitude of each equation is returned as well.
    """
    g = mid.grid
    p, q, r, u = mid.p, mid.q, mid.r, mid.u
    pb = np.conj(p)
    p2 = np.abs(p) ** 2
    q_t = (nxt.q - prev.q) / (2 * dt)
    r_t = (nxt.r - prev.r) / (2 * dt)
    p_t = (nxt.p - prev.p) / (2 * dt)

    tq = [1j * q_t, gc.laplacian(q, g), -2 * u * q, 2 * gc.d_z(pb * q, g),
          -2 * p * gc.d_zbar(q, g), -4 * p2 * q]
    tr = [1j * r_t, -gc.laplacian(r, g), 2 * u * r, 2 * gc.d_z(pb * r, g),
          -2 * p * gc.d_zbar(r, g), 4 * p2 * r]
    tp = [1j * p_t, gc.d_zbar(q * r, g), -gc.d_z(u, g)]
    res = tuple(sum(ts) for ts in (tq, tr, tp))
    if not return_scale:
        return res
    sl = g.interior()
    scales = tuple(max(float(np.abs(t[sl]).max()) for t in ts) for ts in (tq, tr, tp))
    return res, scales


def compatibility_residual(m):
    """``P_z + U_zbar + [P, U]`` at every node."""
    g = m.grid
    return gc.d_z(m.P, g) + gc.d_zbar(m.U, g) + commutator(m.P, m.U)


# -- frame integration -------------------------------------------------------


@dataclass
class FrameField:
    """SU(1,1) frames on a grid for one or more time slices.

    ``G`` has shape ``(nt, nx, ny, 2, 2)``; ``G[k, i, j]`` is the frame at
    ``times[k]`` and node ``(i, j)``.
    """

    grid: gc.Grid2D
    times: np.ndarray
    G: np.ndarray
    max_correction: float = 0.0
    meta: dict = field(default_factory=dict)

    def index(self, t):
        k = np.flatnonzero(np.isclose(self.times, t, rtol=0, atol=1e-12))
        if len(k) == 0:
            raise KeyError(f"no frame slice at t={t}")
        return int(k[0])

    def at(self, t):
        return self.G[self.index(t)]

    @property
    def nu(self):
        return self.G[..., 0, 0]

    @property
    def chi(self):
        return self.G[..., 0, 1]

    def su11_violation(self):
        return float(su11_violation(self.G).max())

    def write(self, directory):
        from pathlib import Path

        for k, t in enumerate(self.times):
            gc.write_components(
                Path(directory) / f"frame_{k:03d}", self.grid,
                {"nu": self.nu[k], "chi": self.chi[k]}, t=float(t),
            )


def _rk4_right(G, K, s, h):
    """One RK4 step of ``dG/ds = G K(s)`` for a batch of 2x2 frames."""
    k1 = G @ K(s)
    Kh = K(s + 0.5 * h)
    k2 = (G + 0.5 * h * k1) @ Kh
    k3 = (G + 0.5 * h * k2) @ Kh
    k4 = (G + h * k3) @ K(s + h)
    return G + (h / 6.0) * (k1 + 2 * k2 + 2 * k3 + k4)


class _Generators:
    """Coefficient matrices of the linear system, evaluated from a field source."""

    def __init__(self, source, hx, hy):
        self.source = source
        self.hx = hx
        self.hy = hy

    def x1(self, t, x1, x2):
        p, q, r, _ = self.source(t, x1, x2)
        psi = 0.5 * (q + np.conj(r))
        ip = 1j * np.imag(p)
        return -_mat(ip, psi, np.conj(psi), -ip)

    def x2(self, t, x1, x2):
        p, q, r, _ = self.source(t, x1, x2)
        phi = 0.5j * (q - np.conj(r))
        ip = 1j * np.real(p)
        return -_mat(ip, phi, np.conj(phi), -ip)

    def time(self, t, x1, x2):
        src = self.source
        p, q, r, u = src(t, x1, x2)
        hx, hy = self.hx, self.hy
        _, qa, ra, _ = src(t, x1 + hx, x2)
        _, qb, rb, _ = src(t, x1 - hx, x2)
        _, qc, rc, _ = src(t, x1, x2 + hy)
        _, qd, rd, _ = src(t, x1, x2 - hy)
        q_zb = (qa - qb) / (2 * hx) + 1j * (qc - qd) / (2 * hy)
        r_zb = (ra - rb) / (2 * hx) + 1j * (rc - rd) / (2 * hy)
        pb = np.conj(p)
        u = np.real(u)
        return 1j * _mat(u + 0j, -q_zb - 2 * pb * q, r_zb - 2 * pb * r, -u + 0j)


class _Projector:
    def __init__(self, limit):
        self.limit = limit
        self.worst = 0.0

    def __call__(self, G):
        G, corr = project_to_group(G)
        self.worst = max(self.worst, corr)
        if corr > self.limit:
            raise ProjectionError(
                f"SU(1,1) re-projection needed a relative correction of {corr:.2e} "
                f"(limit {self.limit:g}); reduce the step size"
            )
        return G


def _march(G_start, coords, K, proj):
    """March from ``coords[0]`` through the remaining coordinates."""
    out = [G_start]
    G = G_start
    for s0, s1 in zip(coords[:-1], coords[1:]):
        G = proj(_rk4_right(G, K, s0, s1 - s0))
        out.append(G)
    return out


def _sweep(gen, grid, t, G_origin, path, proj):
    """Frames on the whole grid at time ``t`` from the frame at the origin."""
    i0, j0 = grid.origin_index
    x1, x2 = grid.x1, grid.x2
    G = np.empty(grid.shape + (2, 2), dtype=complex)
    if path == "x1x2":
        fixed = 0.0
        row = np.empty((grid.nx, 2, 2), dtype=complex)
        for idx in (np.arange(i0, grid.nx), np.arange(i0, -1, -1)):
            seg = _march(G_origin, x1[idx], lambda s: gen.x1(t, s, fixed), proj)
            row[idx] = np.array(seg)
        for idx in (np.arange(j0, grid.ny), np.arange(j0, -1, -1)):
            seg = _march(row, x2[idx], lambda s: gen.x2(t, x1, np.full_like(x1, s)), proj)
            G[:, idx] = np.stack(seg, axis=1)
    elif path == "x2x1":
        fixed = 0.0
        col = np.empty((grid.ny, 2, 2), dtype=complex)
        for idx in (np.arange(j0, grid.ny), np.arange(j0, -1, -1)):
            seg = _march(G_origin, x2[idx], lambda s: gen.x2(t, fixed, s), proj)
            col[idx] = np.array(seg)
        for idx in (np.arange(i0, grid.nx), np.arange(i0, -1, -1)):
            seg = _march(col, x1[idx], lambda s: gen.x1(t, np.full_like(x2, s), x2), proj)
            G[idx] = np.stack(seg, axis=0)
    else:
        raise ValueError(f"unknown integration path {path!r}")
    return G


def _time_march(G, K, t_from, t_to, dt_max, proj):
    if t_to == t_from:
        return G
    n = max(1, int(np.ceil(abs(t_to - t_from) / dt_max - 1e-9)))
    ts = np.linspace(t_from, t_to, n + 1)
    return _march(G, ts, K, proj)[-1]


def check_admissible(source, grid, times, tol=ADMISSIBILITY_TOL):
    """Largest relative constraint residual over the given times; raises above ``tol``."""
    worst = 0.0
    sl = grid.interior()
    for t in times:
        f = sample_fields(source, grid, t)
        res1, res2 = constraint_residual(f)
        scale = constraint_scale(f)
        err = max(float(np.abs(res1[sl]).max()), float(np.abs(res2[sl]).max()))
        rel = err / scale if scale > 0 else err
        worst = max(worst, rel)
    if tol is not None and worst > tol:
        raise AdmissibilityError(
            f"constraint residual {worst:.3e} (relative) exceeds {tol:g}; "
            "the frame would depend on the integration path"
        )
    return worst


def integrate_frame(
    source,
    grid,
    times,
    G0=None,
    *,
    t_ref=0.0,
    path="x1x2",
    time_path="origin",
    dt_max=1e-3,
    admissibility_tol=ADMISSIBILITY_TOL,
    max_correction=1e-4,
):
    """Integrate the linear frame system for ``G`` on ``grid`` at each of ``times``.

    ``G`` equals ``G0`` (identity by default) at the origin node at time
    ``t_ref``.  Every step is classical RK4 followed by re-projection onto
    SU(1,1).  Integration order:

    * ``time_path="origin"``: along ``t`` at the origin, then in space per slice;
    * ``time_path="per_node"``: in space at ``t_ref``, then along ``t`` at every node.

    In space, ``path="x1x2"`` runs along the ``x1`` axis and then up and down
    each column; ``"x2x1"`` is the transposed order.  For admissible fields
    all orders agree up to truncation error, which is what
    :func:`path_discrepancy` measures.

    ``source(t, x1, x2) -> (p, q, r, u)`` must accept arbitrary coordinates
    because RK4 samples half steps; the time generator needs ``q_zbar`` and
    ``r_zbar``, taken as central differences of the source with the grid
    spacing.
    """
    times = np.atleast_1d(np.asarray(times, dtype=float))
    if admissibility_tol is not None:
        check_admissible(source, grid, np.unique(np.append(times, t_ref)), admissibility_tol)
    G0 = np.eye(2, dtype=complex) if G0 is None else np.asarray(
        G0.matrix() if hasattr(G0, "matrix") else G0, dtype=complex
    )
    if su11_violation(G0) > FRAME_TOL:
        raise InvariantError("initial frame is not in SU(1,1)")

    gen = _Generators(source, grid.hx, grid.hy)
    proj = _Projector(max_correction)
    out = np.empty((len(times),) + grid.shape + (2, 2), dtype=complex)

    if time_path == "origin":
        Go = G0
        t_cur = t_ref
        order = np.argsort(np.abs(times - t_ref), kind="stable")
        # march outward on each side of t_ref, reusing the previous slice
        cache = {}
        for k in order:
            t = times[k]
            side = np.sign(t - t_ref)
            start_t, start_G = cache.get(side, (t_ref, G0))
            Go = _time_march(start_G, lambda s: gen.time(s, 0.0, 0.0), start_t, t, dt_max, proj)
            cache[side] = (t, Go)
            out[k] = _sweep(gen, grid, t, Go, path, proj)
        del t_cur
    elif time_path == "per_node":
        base = _sweep(gen, grid, t_ref, G0, path, proj)
        X1, X2 = grid.mesh()
        order = np.argsort(np.abs(times - t_ref), kind="stable")
        cache = {}
        for k in order:
            t = times[k]
            side = np.sign(t - t_ref)
            start_t, start_G = cache.get(side, (t_ref, base))
            Gt = _time_march(start_G, lambda s: gen.time(s, X1, X2), start_t, t, dt_max, proj)
            cache[side] = (t, Gt)
            out[k] = Gt
    else:
        raise ValueError(f"unknown time path {time_path!r}")

    return FrameField(
        grid, times, out, proj.worst,
        meta={"path": path, "time_path": time_path, "t_ref": t_ref, "dt_max": dt_max},
    )


def path_discrepancy(source, grid, t, **kwargs):
    """Relative max difference between integration orders at time ``t``.

    Returns ``{"spatial": x1x2 vs x2x1, "temporal": origin vs per_node}``.
    Both vanish (up to truncation) exactly when the fields satisfy the
    constraints and the evolution equations.
    """
    kwargs.setdefault("admissibility_tol", None)
    ref = integrate_frame(source, grid, [t], **kwargs).G[0]
    alt = integrate_frame(source, grid, [t], path="x2x1", **kwargs).G[0]
    per = integrate_frame(source, grid, [t], time_path="per_node", **kwargs).G[0]
    scale = np.abs(ref).max()
    return {
        "spatial": float(np.abs(ref - alt).max() / scale),
        "temporal": float(np.abs(ref - per).max() / scale),
    }


# -- frame <-> spin ----------------------------------------------------------


def reconstruct_spin_values(G):
    """Spin vectors of ``S = -i G sigma3 G^-1`` for frames of any batch shape."""
    G = np.asarray(G, dtype=complex)
    S = -1j * G @ SIGMA3 @ group_inverse(G)
    return matrix_to_spin(S, tol=1e-9)


def reconstruct_spin(frame):
    """One :class:`~h2maps.spin.SpinField` per time slice of ``frame``."""
    if frame.su11_violation() > FRAME_TOL:
        raise InvariantError("frame violates SU(1,1) beyond tolerance")
    return [SpinField(frame.grid, reconstruct_spin_values(G)) for G in frame.G]


def appendix_frame(values, gamma=None):
    """Closed-form SU(1,1) solution of ``sigma3 = i G^-1 S G`` on the ``s3 < 0`` sheet.

    ``G = (S - i sigma3) diag(gamma, conj(gamma)) / sqrt(2 (1 - s3))`` with
    ``|gamma| = 1`` (``gamma = 1`` when omitted).
    """
    values = np.asarray(values, dtype=float)
    s3 = values[..., 2]
    if np.any(s3 >= 0):
        raise SheetError("frame construction needs s3 < 0 at every node")
    S = spin_to_matrix(values)
    G = (S - 1j * SIGMA3) / np.sqrt(2 * (1 - s3))[..., None, None]
    if gamma is not None:
        gamma = np.asarray(gamma, dtype=complex)
        G = G.copy()
        G[..., :, 0] *= gamma[..., None]
        G[..., :, 1] *= np.conj(gamma)[..., None]
    return G


def conjugation_defect(values, G):
    """Max of ``|i G^-1 S G - sigma3|`` relative to ``|G|^2``."""
    S = spin_to_matrix(values)
    M = 1j * group_inverse(G) @ S @ G
    scale = np.maximum(1.0, np.abs(G).max(axis=(-2, -1)) ** 2)
    return float((np.abs(M - SIGMA3).max(axis=(-2, -1)) / scale).max())


def matching_gamma(values, G):
    """Phase ``gamma`` with ``appendix_frame(values, gamma) == G`` for a conjugating frame."""
    D = group_inverse(appendix_frame(values)) @ np.asarray(G, dtype=complex)
    off = np.maximum(np.abs(D[..., 0, 1]), np.abs(D[..., 1, 0]))
    if off.max() > 1e-6 * max(1.0, float(np.abs(D).max())):
        raise InvariantError("frame does not conjugate S to -i sigma3")
    gamma = D[..., 0, 0]
    return gamma / np.abs(gamma)


def diagonal_gauge_phase(S):
    """Phase field ``gamma`` for which the closed-form frame has ``p = 0``.

    With ``a = (G^-1 G_z)_11`` for the ``gamma = 1`` frame, the rotated frame
    has ``p = -(a + i theta_z)``.  Setting it to zero gives
    ``theta_x1 = -Im a`` and ``theta_x2 = -Re a``, integrated by trapezoid
    along the x1 axis from the origin and then along each column.  The two
    equations are compatible exactly when a ``p = 0`` gauge exists, which is
    the case for radial-ansatz fields.
    """
    g = S.grid
    G = appendix_frame(S.values)
    a = (group_inverse(G) @ gc.d_z(G, g))[..., 0, 0]
    t1 = -a.imag
    t2 = -a.real
    i0, j0 = g.origin_index

    def cumulative(f, h, k0):
        out = np.zeros_like(f)
        step = 0.5 * (f[1:] + f[:-1]) * h
        out[k0 + 1:] = np.cumsum(step[k0:], axis=0)
        out[:k0] = -np.cumsum(step[:k0][::-1], axis=0)[::-1]
        return out

    axis = cumulative(t1[:, j0], g.hx, i0)
    theta = axis[:, None] + cumulative(t2.T, g.hy, j0).T
    return np.exp(1j * theta)


def su11_log(Y):
    """Logarithm in su(1,1) of SU(1,1) matrices near the identity.

    For unit-determinant ``Y = c I + M`` (``M`` traceless, ``c = tr Y / 2``)
    the logarithm is ``f(c) M`` with ``f(c) = arccosh(c) / sqrt(c^2 - 1)``,
    continued analytically through ``c = 1``.
    """
    Y = np.asarray(Y, dtype=complex)
    c = 0.5 * (Y[..., 0, 0] + Y[..., 1, 1]).real
    M = Y - c[..., None, None] * np.eye(2)
    d = c - 1.0
    small = np.abs(d) < 1e-6
    with np.errstate(invalid="ignore", divide="ignore"):
        x = np.sqrt(np.abs(c**2 - 1))
        hyper = np.where(c > 1, np.arccosh(np.maximum(c, 1.0)) / x, 0.0)
        ellip = np.where(c < 1, np.arccos(np.clip(c, -1.0, 1.0)) / x, 0.0)
        f = np.where(c > 1, hyper, ellip)
    f = np.where(small, 1.0 - d / 3.0 + 2.0 * d**2 / 15.0, f)
    return f[..., None, None] * M


def decompose_spin(trajectory, dt, gamma="unit", check_tol=CONJUGATION_TOL):
    """Recover ``(p, q, r, u)`` from spin fields at ``t - dt``, ``t``, ``t + dt``.

    Builds the closed-form frame at each slice (``gamma`` is ``"unit"``, a
    phase array for the middle slice, or a sequence of three phase arrays),
    checks ``sigma3 = i G^-1 S G``, and differentiates:

    * ``U = -G^-1 G_z`` with central stencils gives ``p, q, r``;
    * ``G^-1 G_t`` from the su(1,1) logarithms of ``G^-1 G(t +- dt)``
      gives ``u`` as ``-i`` times its (1,1) entry.

    ``u`` is validated to be real to 1e-8 rather than silently truncated.
    Returns ``(FrameField of the middle slice, GaugeFields)``.
    """
    prev, mid, nxt = trajectory
    g = mid.grid
    if isinstance(gamma, str):
        if gamma != "unit":
            raise ValueError(f"unknown gamma mode {gamma!r}")
        gammas = [None, None, None]
    elif isinstance(gamma, (list, tuple)):
        gammas = list(gamma)
    else:
        gammas = [None, gamma, None]
        if gamma is not None:
            raise ValueError("a single gamma array is ambiguous in time; pass one per slice")

    frames = []
    for S, gm in zip((prev, mid, nxt), gammas):
        G = appendix_frame(S.values, gm)
        defect = conjugation_defect(S.values, G)
        if defect > check_tol:
            raise InvariantError(f"sigma3 = i G^-1 S G fails by {defect:.2e}")
        frames.append(G)
    Gm, Gp, Gc = frames[0], frames[2], frames[1]

    Ginv = group_inverse(Gc)
    U = -Ginv @ gc.d_z(Gc, g)
    p, q, r = U[..., 0, 0], U[..., 0, 1], U[..., 1, 0]

    Xt = (su11_log(Ginv @ Gp) - su11_log(Ginv @ Gm)) / (2 * dt)
    u = -1j * Xt[..., 0, 0]
    scale = max(1.0, float(np.abs(u).max()))
    if np.abs(u.imag).max() > FRAME_TOL * scale:
        raise InvariantError(f"extracted u is not real (imag {np.abs(u.imag).max():.2e})")

    frame = FrameField(g, np.array([0.0]), Gc[None], meta={"source": "closed_form"})
    return frame, GaugeFields(g, p, q, r, u.real)


# -- gradient bound ----------------------------------------------------------


@dataclass(frozen=True)
class BoundReport:
    """``min_slack`` is ``min(|grad S| - |q| - |r|)`` before the allowance."""

    holds: bool
    min_slack: float
    violations: int
    allowance: float


def gradient_bound_check(S, f, allowance=None, margin=2):
    """Check ``|q| + |r| <= |grad S| + allowance`` at interior nodes.

    ``|grad S|`` is the six-term sum of :func:`h2maps.spin.gradient_modulus`.
    The default allowance is ``10 h^2`` times a third-difference estimate of
    the spin field, covering the stencil error of the right-hand side.
    """
    g = S.grid
    sl = g.interior(margin)
    lhs = np.abs(f.q) + np.abs(f.r)
    rhs = gradient_modulus(S)
    if allowance is None:
        lap = gc.laplacian(S.values, g)
        third = np.abs(gc.d_x1(lap, g)) + np.abs(gc.d_x2(lap, g))
        allowance = 10 * g.h**2 * float(third[sl].max())
    slack = rhs[sl] - lhs[sl]
    bad = slack + allowance < 0
    return BoundReport(
        holds=not bool(bad.any()),
        min_slack=float(slack.min()),
        violations=int(bad.sum()),
        allowance=float(allowance),
    )

"""Closed-form solutions of the gauged Schrodinger-type system.

The explicit blow-up family, for real ``a, b`` with ``a b < 0`` and
``alpha**2 == b**2 / 16``, is

    p = 0
    q = exp(i b z zbar / (2 T)) alpha zbar / T
    r = exp(-i b z zbar / (2 T)) alpha zbar / T
    u = 2 alpha**2 z zbar / T**2,        T = a + b t,

which blows up as ``t -> -a/b`` everywhere except the origin.  The same
fields are radial-ansatz shaped, ``q = exp(-i theta) Q(t, rho)`` with
``rho = 2|z|`` and

    Q(t, rho) = alpha rho exp(i b rho**2 / (8 T)) / (2 T).
"""

from dataclasses import InitVar, dataclass

import numpy as np

from .errors import AmplitudeError, BlowupTimeError, ParameterSignError
from .grid import ZeroTail, tail_integrals

AMPLITUDE_TOL = 1e-12
BLOWUP_GUARD = 1e-14


def validate_params(a, b, alpha, tol=AMPLITUDE_TOL):
    """Return :class:`BlowupParams` or raise the specific violation."""
    return BlowupParams(a, b, alpha, strict=True, tol=tol)


@dataclass(frozen=True)
class BlowupParams:
    """Parameters ``(a, b, alpha)`` of the explicit blow-up family.

    ``strict=False`` keeps the sign check but skips the amplitude check, so
    the closed form can be evaluated for amplitudes that do not solve the
    system (useful for showing the amplitude condition is necessary).
    """

    a: float
    b: float
    alpha: float
    strict: InitVar[bool] = True
    tol: InitVar[float] = AMPLITUDE_TOL

    def __post_init__(self, strict, tol):
        if not self.a * self.b < 0:
            raise ParameterSignError(f"need a*b < 0, got a={self.a}, b={self.b}")
        if strict and abs(self.alpha**2 - self.b**2 / 16) > tol:
            raise AmplitudeError(
                f"alpha**2={self.alpha**2!r} differs from b**2/16={self.b**2 / 16!r}; "
                "the fields do not solve the system"
            )

    @property
    def blowup_time(self):
        return -self.a / self.b

    @property
    def is_solution(self):
        return abs(self.alpha**2 - self.b**2 / 16) <= AMPLITUDE_TOL

    def as_dict(self):
        return {"a": self.a, "b": self.b, "alpha": self.alpha, "blowup_time": self.blowup_time}


def _time_factor(params, t):
    T = params.a + params.b * t
    if np.any(np.abs(T) < BLOWUP_GUARD):
        raise BlowupTimeError(f"t={t} is the blow-up time {params.blowup_time}")
    if np.any(np.sign(T) != np.sign(params.a)):
        raise BlowupTimeError(f"t={t} lies beyond the blow-up time {params.blowup_time}")
    return T


def blowup_fields(params, t, z):
    """Evaluate ``(p, q, r, u)`` of the explicit family at time ``t`` and points ``z``."""
    T = _time_factor(params, t)
    z = np.asarray(z, dtype=complex)
    zz = (z * np.conj(z)).real
    phase = np.exp(0.5j * params.b * zz / T)
    amp = params.alpha * np.conj(z) / T
    q = phase * amp
    r = np.conj(phase) * amp
    u = 2 * params.alpha**2 * zz / T**2
    return np.zeros_like(q), q, r, u


def blowup_gradient_lower_bound(params, t, z):
    """``|q| + |r| = 2 |alpha| |z| / (a + b t)``, defined before blow-up."""
    T = params.a + params.b * t
    if np.any(T <= 0) or np.any(np.abs(T) < BLOWUP_GUARD):
        raise BlowupTimeError(f"need a + b t > 0, got {T}")
    return 2 * abs(params.alpha) * np.abs(np.asarray(z)) / T


def blowup_residual_limit(params, t, z):
    """Exact first-equation residual of the closed form for arbitrary ``alpha``.

    ``(b**2/4 - 4 alpha**2) z zbar exp(i b z zbar / (2T)) alpha zbar / T**3``;
    zero exactly when the amplitude condition holds.
    """
    T = _time_factor(params, t)
    z = np.asarray(z, dtype=complex)
    zz = (z * np.conj(z)).real
    coeff = params.b**2 / 4 - 4 * params.alpha**2
    return coeff * zz * np.exp(0.5j * params.b * zz / T) * params.alpha * np.conj(z) / T**3


def blowup_profile(params, t, rho):
    """Radial profile ``Q(t, rho)`` of the explicit family."""
    T = _time_factor(params, t)
    rho = np.asarray(rho, dtype=float)
    return params.alpha * rho * np.exp(1j * params.b * rho**2 / (8 * T)) / (2 * T)


def radial_ansatz_fields(profile, t, z, radial_nodes, tail=None, origin_tol=1e-12):
    """Embed a radial profile ``Q(t, rho)`` into planar ``(p, q, r, u)``.

    ``q = exp(-i theta) Q``, ``r = exp(-i theta) conj(Q)``, ``p = 0`` and
    ``u = |Q|^2 - 2 int_rho^inf |Q|^2 / tau dtau``.  The integral runs by
    trapezoid over ``radial_nodes`` (increasing, positive) and the ``tail``
    decay model beyond the last node; each evaluation radius gets its own
    partial first panel so no interpolation is involved.
    """
    tail = ZeroTail() if tail is None else tail
    z = np.asarray(z, dtype=complex)
    rho = 2 * np.abs(z)
    theta = np.angle(z)
    Q = np.asarray(profile(t, rho), dtype=complex)

    at_origin = rho == 0
    if np.any(at_origin):
        Q0 = np.asarray(profile(t, np.zeros(1)), dtype=complex)
        if np.abs(Q0).max() > origin_tol:
            raise ValueError("profile does not vanish at the origin; the angle is undefined there")

    nodes = np.asarray(radial_nodes, dtype=float)
    Qn = np.asarray(profile(t, nodes), dtype=complex)
    cumulative = tail_integrals(Qn, nodes, tail)
    k = np.searchsorted(nodes, rho)  # first node >= rho
    inside = k < len(nodes)
    kk = np.minimum(k, len(nodes) - 1)
    node_rho = nodes[kk]
    with np.errstate(divide="ignore", invalid="ignore"):
        f_here = np.where(rho > 0, np.abs(Q) ** 2 / np.where(rho > 0, rho, 1.0), 0.0)
    f_node = np.abs(Qn[kk]) ** 2 / node_rho
    partial = 0.5 * (f_here + f_node) * (node_rho - rho)
    beyond = np.asarray(tail.integral(rho, Q)) * np.ones_like(rho)
    integral = np.where(inside, partial + cumulative[kk], beyond)

    u = np.abs(Q) ** 2 - 2 * integral
    phase = np.exp(-1j * theta)
    q = phase * Q
    r = phase * np.conj(Q)
    q = np.where(at_origin, 0, q)
    r = np.where(at_origin, 0, r)
    return np.zeros_like(q), q, r, u

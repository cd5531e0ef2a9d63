"""Algebra of Minkowski 3-space, the hyperboloid H^2 and su(1,1) / SU(1,1).

Vectors are numpy arrays whose last axis has length 3, ordered
``(s1, s2, s3)`` with signature ``(+, +, -)``.  Matrices are arrays whose
last two axes are ``(2, 2)``.  Every function broadcasts over leading axes,
so the same code handles a single spin and a whole grid of them.

>>> float(minkowski_norm([3.0, 4.0, 0.0]))
25.0
>>> pseudo_cross([1.0, 0.0, 0.0], [0.0, 1.0, 0.0])
array([ 0.,  0., -1.])
"""

from dataclasses import dataclass

import numpy as np

from .errors import ConeExitError, InvariantError

ALGEBRA_TOL = 1e-10

SIGMA3 = np.array([[1.0, 0.0], [0.0, -1.0]], dtype=complex)
IDENTITY = np.eye(2, dtype=complex)


def pseudo_cross(a, b):
    """Pseudo-cross product ``a x b`` of Minkowski 3-space.

    ``(a2 b3 - a3 b2, a3 b1 - a1 b3, -(a1 b2 - a2 b1))``; the result is
    Minkowski-orthogonal to both arguments.
    """
    a = np.asarray(a)
    b = np.asarray(b)
    a1, a2, a3 = a[..., 0], a[..., 1], a[..., 2]
    b1, b2, b3 = b[..., 0], b[..., 1], b[..., 2]
    return np.stack(
        [a2 * b3 - a3 * b2, a3 * b1 - a1 * b3, -(a1 * b2 - a2 * b1)], axis=-1
    )


def minkowski_inner(a, b):
    """Indefinite inner product ``a1 b1 + a2 b2 - a3 b3``."""
    a = np.asarray(a)
    b = np.asarray(b)
    return a[..., 0] * b[..., 0] + a[..., 1] * b[..., 1] - a[..., 2] * b[..., 2]


def minkowski_norm(a):
    """Squared Minkowski length ``a1**2 + a2**2 - a3**2`` (``-1`` on H^2)."""
    return minkowski_inner(a, a)


def hyperboloid_violation(s):
    """Pointwise ``|minkowski_norm(s) + 1|``."""
    return np.abs(minkowski_norm(s) + 1.0)


def sheet_of(s):
    """Return the common sign of ``s3`` (+1 or -1) or raise if the field mixes sheets."""
    s3 = np.asarray(s)[..., 2]
    if np.all(s3 > 0):
        return 1
    if np.all(s3 < 0):
        return -1
    raise InvariantError("spin field does not lie on a single sheet (sign of s3 varies)")


def spin_to_matrix(s):
    """Map ``s`` to ``S = [[i s3, s1 + i s2], [s1 - i s2, -i s3]]`` in su(1,1).

    The map is linear and satisfies ``[S(a), S(b)] = 2 S(a x b)``; on the
    hyperboloid ``S @ S = -I``.
    """
    s = np.asarray(s, dtype=float)
    s1, s2, s3 = s[..., 0], s[..., 1], s[..., 2]
    out = np.empty(s.shape[:-1] + (2, 2), dtype=complex)
    out[..., 0, 0] = 1j * s3
    out[..., 0, 1] = s1 + 1j * s2
    out[..., 1, 0] = s1 - 1j * s2
    out[..., 1, 1] = -1j * s3
    return out


def su11_defect(S):
    """Largest deviation of ``S`` from the su(1,1) form, per matrix.

    Measures the trace, the real part of entry (1,1), and the mismatch
    between entry (2,1) and the conjugate of entry (1,2).
    """
    S = np.asarray(S, dtype=complex)
    trace = np.abs(S[..., 0, 0] + S[..., 1, 1])
    real_diag = np.abs(S[..., 0, 0].real)
    offdiag = np.abs(S[..., 1, 0] - np.conj(S[..., 0, 1]))
    return np.maximum(np.maximum(trace, real_diag), offdiag)


def matrix_to_spin(S, tol=ALGEBRA_TOL):
    """Inverse of :func:`spin_to_matrix`; rejects matrices outside su(1,1)."""
    S = np.asarray(S, dtype=complex)
    defect = su11_defect(S)
    scale = np.maximum(1.0, np.abs(S).max(axis=(-2, -1)))
    if np.any(defect > tol * scale):
        raise InvariantError(
            f"matrix is not in su(1,1): defect {float(np.max(defect)):.3e} exceeds {tol:g}"
        )
    return np.stack(
        [S[..., 0, 1].real, S[..., 0, 1].imag, S[..., 0, 0].imag], axis=-1
    )


def project_to_hyperboloid(s):
    """Rescale timelike ``s`` onto ``minkowski_norm = -1``, keeping the sheet.

    Raises :class:`ConeExitError` for spacelike or null input; the message
    names the first offending index when ``s`` is an array of spins.
    """
    s = np.asarray(s, dtype=float)
    norm = minkowski_norm(s)
    bad = norm >= 0
    if np.any(bad):
        node = tuple(int(i) for i in np.argwhere(np.atleast_1d(bad))[0]) if s.ndim > 1 else None
        raise ConeExitError(
            f"spin vector left the timelike cone (minkowski norm {float(np.max(norm)):.3e})",
            node=node,
        )
    return s / np.sqrt(-norm)[..., None]


def random_hyperboloid_points(rng, n, sheet=-1, scale=1.0):
    """Sample ``n`` points on one sheet by lifting Gaussian ``(s1, s2)``."""
    w = rng.normal(scale=scale, size=(n, 2))
    s3 = sheet * np.sqrt(1.0 + (w**2).sum(axis=1))
    return np.column_stack([w, s3])


# -- SU(1,1) ---------------------------------------------------------------


@dataclass(frozen=True)
class GroupElement:
    """SU(1,1) element ``[[nu, chi], [conj(chi), conj(nu)]]``."""

    nu: complex
    chi: complex

    def matrix(self):
        return np.array(
            [[self.nu, self.chi], [np.conj(self.chi), np.conj(self.nu)]], dtype=complex
        )

    @property
    def pseudo_det(self):
        return abs(self.nu) ** 2 - abs(self.chi) ** 2

    @classmethod
    def from_matrix(cls, G, tol=1e-8):
        G = np.asarray(G, dtype=complex)
        if group_defect(G) > tol:
            raise InvariantError("matrix is not in SU(1,1)")
        return cls(complex(G[0, 0]), complex(G[0, 1]))

    @classmethod
    def identity(cls):
        return cls(1.0 + 0j, 0j)


def group_defect(G):
    """Max of ``| |nu|^2 - |chi|^2 - 1 |`` and the structural mismatch, per matrix."""
    G = np.asarray(G, dtype=complex)
    det = np.abs(G[..., 0, 0]) ** 2 - np.abs(G[..., 0, 1]) ** 2
    struct = np.maximum(
        np.abs(G[..., 1, 1] - np.conj(G[..., 0, 0])),
        np.abs(G[..., 1, 0] - np.conj(G[..., 0, 1])),
    )
    return np.maximum(np.abs(det - 1.0), struct)


def su11_violation(G):
    """Pointwise ``| |nu|^2 - |chi|^2 - 1 |`` read from the first row."""
    G = np.asarray(G, dtype=complex)
    return np.abs(np.abs(G[..., 0, 0]) ** 2 - np.abs(G[..., 0, 1]) ** 2 - 1.0)


def project_to_group(G):
    """Retract near-SU(1,1) matrices onto SU(1,1).

    Symmetrizes to the ``[[nu, chi], [conj(chi), conj(nu)]]`` pattern and
    rescales by ``1 / sqrt(|nu|^2 - |chi|^2)``.  Returns the projected array
    and the largest relative correction applied.
    """
    G = np.asarray(G, dtype=complex)
    nu = 0.5 * (G[..., 0, 0] + np.conj(G[..., 1, 1]))
    chi = 0.5 * (G[..., 0, 1] + np.conj(G[..., 1, 0]))
    det = np.abs(nu) ** 2 - np.abs(chi) ** 2
    if np.any(det <= 0):
        raise InvariantError("frame left SU(1,1): non-positive pseudo-determinant")
    k = 1.0 / np.sqrt(det)
    nu = nu * k
    chi = chi * k
    out = np.empty_like(G)
    out[..., 0, 0] = nu
    out[..., 0, 1] = chi
    out[..., 1, 0] = np.conj(chi)
    out[..., 1, 1] = np.conj(nu)
    norm = np.abs(G).max(axis=(-2, -1))
    correction = np.abs(out - G).max(axis=(-2, -1)) / norm
    return out, float(correction.max()) if correction.size else 0.0


def group_inverse(G):
    """Inverse of unit-determinant 2x2 matrices via the adjugate."""
    G = np.asarray(G, dtype=complex)
    out = np.empty_like(G)
    out[..., 0, 0] = G[..., 1, 1]
    out[..., 0, 1] = -G[..., 0, 1]
    out[..., 1, 0] = -G[..., 1, 0]
    out[..., 1, 1] = G[..., 0, 0]
    det = G[..., 0, 0] * G[..., 1, 1] - G[..., 0, 1] * G[..., 1, 0]
    return out / det[..., None, None]


def commutator(A, B):
    return A @ B - B @ A

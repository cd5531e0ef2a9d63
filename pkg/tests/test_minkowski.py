import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st
from hypothesis.extra.numpy import arrays

from h2maps.errors import ConeExitError, InvariantError
from h2maps.minkowski import (
    GroupElement,
    commutator,
    group_defect,
    group_inverse,
    hyperboloid_violation,
    matrix_to_spin,
    minkowski_inner,
    minkowski_norm,
    project_to_group,
    project_to_hyperboloid,
    pseudo_cross,
    random_hyperboloid_points,
    sheet_of,
    spin_to_matrix,
    su11_defect,
)

vec3 = arrays(np.float64, (3,), elements=st.floats(-10, 10))


def test_basis_products():
    e1, e2, e3 = np.eye(3)
    assert np.array_equal(pseudo_cross(e1, e2), [0, 0, -1])
    assert np.array_equal(pseudo_cross(e2, e3), [1, 0, 0])
    assert np.array_equal(pseudo_cross(e3, e1), [0, 1, 0])
    assert minkowski_norm(e3) == -1


@given(vec3, vec3)
def test_pseudo_cross_antisymmetric_and_orthogonal(a, b):
    c = pseudo_cross(a, b)
    assert np.allclose(c, -pseudo_cross(b, a), atol=0)
    scale = 1 + np.abs(a).max() ** 2 * np.abs(b).max()
    assert abs(minkowski_inner(c, a)) <= 1e-12 * scale
    assert abs(minkowski_inner(c, b)) <= 1e-12 * scale


@given(vec3, vec3)
def test_commutator_is_twice_the_cross_product(a, b):
    lhs = commutator(spin_to_matrix(a), spin_to_matrix(b))
    rhs = 2 * spin_to_matrix(pseudo_cross(a, b))
    assert np.allclose(lhs, rhs, atol=1e-10 * (1 + np.abs(a).max() * np.abs(b).max()))


@given(vec3)
def test_matrix_roundtrip(a):
    S = spin_to_matrix(a)
    assert su11_defect(S) == 0
    assert np.array_equal(matrix_to_spin(S), a)


def test_square_is_minus_identity_on_hyperboloid(rng):
    s = random_hyperboloid_points(rng, 200, sheet=1, scale=2.0)
    S = spin_to_matrix(s)
    assert np.abs(S @ S + np.eye(2)).max() < 1e-12 * np.abs(s).max() ** 2
    assert hyperboloid_violation(s).max() < 1e-12 * np.abs(s).max() ** 2


def test_matrix_to_spin_rejects_non_algebra():
    with pytest.raises(InvariantError):
        matrix_to_spin(np.eye(2))


def test_sheet_detection():
    assert sheet_of([[0, 0, 1], [1, 0, 2]]) == 1
    assert sheet_of([[0, 0, -1]]) == -1
    with pytest.raises(InvariantError):
        sheet_of([[0, 0, 1], [0, 0, -1]])


def test_projection_keeps_sheet_and_reports_node():
    s = np.array([[0.1, 0.2, -1.3], [0.0, 0.0, 2.0]])
    p = project_to_hyperboloid(s)
    assert np.allclose(minkowski_norm(p), -1)
    assert np.all(np.sign(p[:, 2]) == np.sign(s[:, 2]))
    with pytest.raises(ConeExitError) as exc:
        project_to_hyperboloid(np.array([[0, 0, 1.0], [2.0, 0, 1.0]]))
    assert exc.value.node == (1,)


def test_group_element_and_inverse():
    g = GroupElement(np.cosh(0.4) * np.exp(0.3j), np.sinh(0.4) * np.exp(-1.1j))
    assert abs(g.pseudo_det - 1) < 1e-14
    G = g.matrix()
    assert np.allclose(group_inverse(G) @ G, np.eye(2))
    assert GroupElement.from_matrix(G) == g
    with pytest.raises(InvariantError):
        GroupElement.from_matrix(2 * G)
    assert np.array_equal(GroupElement.identity().matrix(), np.eye(2))


@given(st.floats(-2, 2), st.floats(-3, 3), st.floats(-3, 3), st.floats(1e-6, 1e-3))
def test_group_projection_restores_structure(r, phi, psi, eps):
    G = GroupElement(np.cosh(r) * np.exp(1j * phi), np.sinh(r) * np.exp(1j * psi)).matrix()
    noisy = G * (1 + eps) + eps * np.array([[1j, 0], [0, 0]])
    P, corr = project_to_group(noisy)
    assert group_defect(P) < 1e-12 * np.abs(P).max() ** 2
    assert corr < 10 * eps

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st
from scipy.linalg import expm

from h2maps import gauge
from h2maps.errors import AdmissibilityError, InvariantError, SheetError
from h2maps.exact import BlowupParams
from h2maps.grid import Grid2D
from h2maps.minkowski import SIGMA3, random_hyperboloid_points, spin_to_matrix
from h2maps.spin import SpinField

P = BlowupParams(1.0, -4.0, 1.0)
SOURCE = gauge.closed_form_source(P)


def zero_source(t, x1, x2):
    z = np.zeros(np.broadcast(np.asarray(x1), np.asarray(x2)).shape, dtype=complex)
    return z, z, z, z.real


@pytest.fixture(scope="module")
def small_grid():
    return Grid2D.square(1.0, 0.1)


def test_zero_fields_have_zero_residuals(small_grid):
    f = gauge.GaugeFields.zeros(small_grid)
    for r in gauge.constraint_residual(f) + gauge.system_residual(f, f, f, 1e-3):
        assert np.abs(r).max() == 0


def test_u_must_be_real(small_grid):
    z = np.zeros(small_grid.shape, dtype=complex)
    with pytest.raises(InvariantError):
        gauge.GaugeFields(small_grid, z, z, z, z + 1j)
    with pytest.raises(ValueError):
        gauge.GaugeFields(small_grid, z[:-1], z, z, z.real)


def test_connection_matrix_accessors(small_grid):
    f = gauge.sample_fields(SOURCE, small_grid, 0.05)
    m = gauge.ConnectionMatrices.from_fields(f)
    assert np.allclose(m.psi, 0.5 * (f.q + np.conj(f.r)))
    assert np.allclose(m.phi, 0.5j * (f.q - np.conj(f.r)))
    assert np.allclose(m.P[..., 0, 1], -np.conj(f.r))
    assert np.allclose(m.H[..., 1, 0], -2 * f.r * np.conj(f.p))


@given(st.lists(st.floats(-1, 1), min_size=12, max_size=12))
def test_compatibility_entries_equal_constraints(c):
    g = Grid2D.square(1.0, 0.1)
    X1, X2 = g.mesh()
    p = c[0] * np.sin(X1 + c[1] * X2) + 1j * c[2] * X1 * X2
    q = c[3] * np.exp(c[4] * X1) + 1j * c[5] * X2**2 + c[6]
    r = c[7] * np.cos(X2) + 1j * c[8] * X1 + c[9] * X1 * X2
    f = gauge.GaugeFields(g, p, q, r, c[10] + c[11] * X1)
    K = gauge.compatibility_residual(gauge.ConnectionMatrices.from_fields(f))
    res1, res2 = gauge.constraint_residual(f)
    assert np.allclose(K[..., 0, 0], res1, atol=1e-12)
    assert np.allclose(K[..., 0, 1], res2, atol=1e-12)
    assert np.allclose(K[..., 1, 0], -np.conj(res2), atol=1e-12)
    assert np.allclose(K[..., 1, 1], -res1, atol=1e-12)


def test_zero_fields_give_identity_frame(small_grid):
    fr = gauge.integrate_frame(zero_source, small_grid, [0.0, 0.3])
    assert np.allclose(fr.G, np.eye(2))
    S = gauge.reconstruct_spin(fr)[0]
    assert np.allclose(S.values, [0, 0, -1])


def test_constant_u_rotates_frame_diagonally(small_grid):
    c = 0.7

    def source(t, x1, x2):
        p, q, r, u = zero_source(t, x1, x2)
        return p, q, r, u + c

    fr = gauge.integrate_frame(source, small_grid, [0.4])
    G = fr.G[0]
    expected = np.diag([np.exp(1j * c * 0.4), np.exp(-1j * c * 0.4)])
    assert np.abs(G - expected).max() < 1e-12
    assert np.allclose(gauge.reconstruct_spin(fr)[0].values, [0, 0, -1])


def test_frame_on_explicit_family(small_grid):
    fr = gauge.integrate_frame(SOURCE, small_grid, [-0.01, 0.0, 0.05])
    assert fr.su11_violation() < 1e-10
    assert np.allclose(fr.at(0.0)[small_grid.origin_index], np.eye(2))
    for S in gauge.reconstruct_spin(fr):
        assert S.max_violation() < 1e-10
        assert S.sheet == -1


def test_nonidentity_initial_frame_conjugates_spin(small_grid):
    G0 = np.array([[np.cosh(0.5) * np.exp(0.3j), np.sinh(0.5)],
                   [np.sinh(0.5), np.cosh(0.5) * np.exp(-0.3j)]])
    a = gauge.integrate_frame(SOURCE, small_grid, [0.02])
    b = gauge.integrate_frame(SOURCE, small_grid, [0.02], G0=G0)
    Sa = spin_to_matrix(gauge.reconstruct_spin(a)[0].values)
    Sb = spin_to_matrix(gauge.reconstruct_spin(b)[0].values)
    assert np.abs(G0 @ Sa @ np.linalg.inv(G0) - Sb).max() < 1e-10
    assert gauge.reconstruct_spin(b)[0].max_violation() < 1e-10


def test_path_independence_and_broken_constraint(small_grid):
    clean = gauge.path_discrepancy(SOURCE, small_grid, 0.05)
    broken = gauge.path_discrepancy(gauge.perturbed_source(SOURCE, 0.05), small_grid, 0.05)
    assert clean["spatial"] < 1e-5
    assert broken["spatial"] > 100 * clean["spatial"]
    with pytest.raises(AdmissibilityError):
        gauge.integrate_frame(gauge.perturbed_source(SOURCE, 0.3), small_grid, [0.0])


def test_spatial_path_error_is_fourth_order():
    errs = []
    for h in (0.2, 0.1):
        errs.append(gauge.path_discrepancy(SOURCE, Grid2D.square(1.0, h), 0.0)["spatial"])
    assert np.log2(errs[0] / errs[1]) > 3.5


def test_appendix_frame_examples():
    G = gauge.appendix_frame(np.array([0.0, 0.0, -1.0]))
    assert np.allclose(G, np.diag([-1j, 1j]))
    with pytest.raises(SheetError):
        gauge.appendix_frame(np.array([[0, 0, -1.0], [0, 0, 1.0]]))


def test_appendix_frame_conjugates_with_any_phase(rng):
    s = random_hyperboloid_points(rng, 300, sheet=-1, scale=3.0)
    gamma = np.exp(1j * rng.uniform(0, 2 * np.pi, 300))
    G = gauge.appendix_frame(s, gamma)
    assert gauge.conjugation_defect(s, G) < 1e-12
    assert np.allclose(gauge.matching_gamma(s, G), gamma)


def test_su11_log_against_mpmath(oracles):
    for o in oracles["su11_log"]:
        G = np.array([[complex(*v) for v in row] for row in o["G"]])
        L = np.array([[complex(*v) for v in row] for row in o["log"]])
        assert np.abs(gauge.su11_log(G) - L).max() < 1e-12
        assert np.abs(expm(gauge.su11_log(G)) - G).max() < 1e-12


def test_su11_log_near_identity_series():
    X = np.array([[1e-8j, 2e-8], [2e-8, -1e-8j]])
    assert np.abs(gauge.su11_log(expm(X)) - X).max() < 1e-20


def test_decompose_constant_spin(small_grid):
    S = SpinField.constant(small_grid, (0, 0, -1))
    frame, f = gauge.decompose_spin([S, S, S], 1e-3)
    assert np.allclose(frame.G[0], np.diag([-1j, 1j]))
    for x in (f.p, f.q, f.r, f.u):
        assert np.abs(x).max() == 0


def test_decompose_rejects_wrong_sheet(small_grid):
    S = SpinField.constant(small_grid, (0, 0, 1))
    with pytest.raises(SheetError):
        gauge.decompose_spin([S, S, S], 1e-3)


def test_roundtrip_recovers_moduli():
    g = Grid2D.square(1.0, 0.05)
    dt = 1e-3
    fr = gauge.integrate_frame(SOURCE, g, [-dt, 0.0, dt])
    spins = gauge.reconstruct_spin(fr)
    ex = gauge.sample_fields(SOURCE, g, 0.0)
    sl = g.interior(2)
    for gamma in ("unit", [gauge.matching_gamma(S.values, G) for S, G in zip(spins, fr.G)]):
        _, f = gauge.decompose_spin(spins, dt, gamma=gamma)
        assert np.abs(np.abs(f.q) - np.abs(ex.q))[sl].max() < 5e-3
        assert np.abs(np.abs(f.r) - np.abs(ex.r))[sl].max() < 5e-3
    assert np.abs(f.p)[sl].max() < 5e-3
    assert np.abs(f.u - ex.u)[sl].max() < 1e-2


def test_diagonal_gauge_removes_p():
    g = Grid2D.square(1.0, 0.05)
    dt = 1e-3
    spins = gauge.reconstruct_spin(gauge.integrate_frame(SOURCE, g, [-dt, 0.0, dt]))
    sl = g.interior(2)
    _, unit = gauge.decompose_spin(spins, dt)
    _, diag = gauge.decompose_spin(spins, dt, [gauge.diagonal_gauge_phase(S) for S in spins])
    assert np.abs(unit.p)[sl].max() > 0.05
    assert np.abs(diag.p)[sl].max() < 5e-3


def test_gradient_bound(small_grid):
    S = SpinField.constant(small_grid, (0, 0, -1))
    rep = gauge.gradient_bound_check(S, gauge.GaugeFields.zeros(small_grid))
    assert rep.holds and rep.min_slack == 0 and rep.violations == 0
    fr = gauge.integrate_frame(SOURCE, small_grid, [0.1])
    rep = gauge.gradient_bound_check(gauge.reconstruct_spin(fr)[0],
                                     gauge.sample_fields(SOURCE, small_grid, 0.1))
    assert rep.holds


def test_frame_snapshot_files(tmp_path, small_grid):
    fr = gauge.integrate_frame(SOURCE, small_grid, [0.0])
    fr.write(tmp_path)
    assert (tmp_path / "frame_000" / "nu.csv").exists()
    assert (tmp_path / "frame_000" / "chi.json").exists()
    assert np.isclose(SIGMA3[1, 1], -1)

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from h2maps import spin
from h2maps.errors import ConeExitError, ConfigError, InvariantError
from h2maps.grid import Grid2D
from h2maps.minkowski import minkowski_norm


@pytest.fixture(scope="module")
def pgrid():
    return Grid2D.periodic(32, 0.1)


def test_spin_field_validation(pgrid):
    with pytest.raises(ValueError):
        spin.SpinField(pgrid, np.zeros((3, 3, 3)))
    with pytest.raises(ValueError):
        spin.SpinField(pgrid, np.broadcast_to([0, 0, -1.0], pgrid.shape + (3,)), sheet=1)
    mixed = np.broadcast_to([0, 0, 1.0], pgrid.shape + (3,)).copy()
    mixed[0, 0, 2] = -1
    with pytest.raises(InvariantError):
        spin.SpinField(pgrid, mixed)


def test_bump_data_on_hyperboloid_with_compact_support(pgrid):
    S = spin.bump_initial_data(pgrid, 0.3, 0.6)
    assert S.max_violation() < 1e-14
    rho, _ = pgrid.polar()
    assert np.all(S.values[rho >= 0.6] == [0, 0, 1])
    assert S.flipped().sheet == -1


@given(st.floats(0.05, 0.5), st.floats(0.3, 1.2), st.sampled_from([1, -1]))
def test_vector_and_matrix_forms_agree(amp, radius, sign):
    g = Grid2D.periodic(24, 0.1)
    S = spin.bump_initial_data(g, amp, radius, sheet=sign)
    a = spin.rhs(S.values, g, sign)
    b = spin.rhs_matrix_form(S.values, g, sign)
    assert np.abs(a - b).max() < 1e-10 * (1 + np.abs(a).max())


def test_velocity_is_tangent(pgrid):
    S = spin.bump_initial_data(pgrid, 0.4, 0.8)
    v = spin.rhs(S.values, pgrid)
    from h2maps.minkowski import minkowski_inner

    assert np.abs(minkowski_inner(v, S.values)).max() < 1e-12 * np.abs(v).max()


def test_constant_map_is_stationary(pgrid):
    S = spin.SpinField.constant(pgrid, (0.0, 0.0, 1.0))
    out, _ = spin.step(S, spin.EvolveConfig(dt=1e-4, steps=1))
    assert np.array_equal(out.values, S.values)
    assert spin.energy(S) == 0


def test_config_guards(pgrid):
    with pytest.raises(ConfigError):
        spin.EvolveConfig(dt=1e-2, steps=1).validate(pgrid)
    with pytest.raises(ConfigError):
        spin.EvolveConfig(dt=1e-4, steps=1, sign=2).validate(pgrid)
    with pytest.raises(ConfigError):
        spin.EvolveConfig(dt=-1, steps=1).validate(pgrid)


def test_cone_exit_names_step(pgrid):
    vals = np.broadcast_to([2.0, 0.0, 1.0], pgrid.shape + (3,)).copy()
    with pytest.raises(ConeExitError) as exc:
        spin.step(spin.SpinField(pgrid, vals), spin.EvolveConfig(dt=1e-4, steps=1), 7)
    assert exc.value.step == 7
    assert exc.value.node == (0, 0)


def test_energy_and_constraint_over_short_run(pgrid):
    S = spin.bump_initial_data(pgrid, 0.3, 0.8)
    cfg = spin.EvolveConfig(dt=2e-4, steps=200)
    final, diag, snaps = spin.evolve(S, cfg, sample_every=50)
    assert final.max_violation() < 1e-13
    assert diag.energy_drift < 1e-5
    assert len(snaps) == 5 and diag.t[-1] == pytest.approx(0.04)


def test_without_retraction_drift_is_small_but_nonzero(pgrid):
    S = spin.bump_initial_data(pgrid, 0.3, 0.8)
    cfg = spin.EvolveConfig(dt=2e-4, steps=50, renormalize_every=0)
    final, diag, _ = spin.evolve(S, cfg)
    assert 0 < np.abs(minkowski_norm(final.values) + 1).max() < 1e-6


def test_sign_duality_is_exact(pgrid):
    S = spin.bump_initial_data(pgrid, 0.3, 0.8)
    a, _, _ = spin.evolve(S, spin.EvolveConfig(dt=2e-4, steps=20, sign=1))
    b, _, _ = spin.evolve(S.flipped(), spin.EvolveConfig(dt=2e-4, steps=20, sign=-1))
    assert np.array_equal(a.values, -b.values)


def test_matrix_residual_vanishes_for_static_field(pgrid):
    S = spin.SpinField.constant(pgrid, (0.3, 0.0, np.sqrt(1.09)))
    res, _ = spin.matrix_equation_residual(S, S, S, 1e-3, sign=1)
    assert np.abs(res).max() == 0


def test_gradient_modulus_of_linear_field():
    g = Grid2D.square(1.0, 0.1)
    X1, _ = g.mesh()
    w = 0.2 * X1
    S = spin.SpinField(g, np.stack([w, 0 * w, np.sqrt(1 + w**2)], axis=-1))
    gm = spin.gradient_modulus(S)
    i, j = g.origin_index
    # d_z s1 = d_zbar s1 = 0.2 and s3 is flat at the origin
    assert gm[i, j] == pytest.approx(0.4)


def test_evolve_writes_outputs(tmp_path, pgrid):
    S = spin.bump_initial_data(pgrid, 0.3, 0.8)
    spin.evolve(S, spin.EvolveConfig(dt=2e-4, steps=4), sample_every=2, out_dir=tmp_path)
    assert (tmp_path / "diagnostics.csv").read_text().startswith(
        "t,energy,sup_gradient,max_constraint_violation")
    assert (tmp_path / "t_000004" / "s3.csv").exists()
    assert (tmp_path / "evolve_config.json").exists()

import pytest

from h2maps import experiments
from h2maps.errors import BlowupTimeError, ConfigError


def test_ladder_with_small_time_step_converges_at_second_order():
    """With the temporal error below the spatial one every residual is second order."""
    rep = experiments.explicit_residual_ladder(1.0, -4.0, 1.0, dt=1e-5)
    assert rep["passed"]
    for eq in rep["equations"].values():
        assert eq["exact"] or all(1.8 <= o <= 2.2 for o in eq["orders"])


def test_non_solution_fails_the_ladder():
    rep = experiments.explicit_residual_ladder(1.0, -4.0, 0.9, dt=1e-5)
    assert not rep["passed"]
    assert not rep["equations"]["R_q"]["passed"]
    assert rep["equations"]["R_p"]["passed"]


def test_ladder_validation():
    with pytest.raises(ConfigError):
        experiments.explicit_residual_ladder(1, -4, 1, hs=(0.05, 0.1))
    with pytest.raises(BlowupTimeError):
        experiments.explicit_residual_ladder(1, -4, 1, t=0.25)


def test_blowup_scan_validation():
    with pytest.raises(ConfigError):
        experiments.blowup_scan(1, -4, 1, times=())
    with pytest.raises(BlowupTimeError):
        experiments.blowup_scan(1, -4, 1, times=(0.0, 0.25))


def test_injected_constraint_error_is_flagged():
    rep = experiments.gauge_roundtrip(1, -4, 1, hs=(0.1, 0.05), inject=0.01)
    assert rep["flagged"] and not rep["passed"]


def test_radial_runs():
    rep, _ = experiments.radial_run("zero", h_rho=0.05, R=2.0, t_end=0.01)
    assert rep["passed"] and rep["max_abs_Q"] == 0
    with pytest.raises(ConfigError):
        experiments.radial_run("soliton")

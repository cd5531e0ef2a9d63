import numpy as np
import pytest

from h2maps import grid as gc
from h2maps.grid import Grid2D, PowerTail, ZeroTail


def test_square_grid_has_origin_node():
    g = Grid2D.square(1.0, 0.25)
    assert g.shape == (9, 9)
    i, j = g.origin_index
    assert g.x1[i] == 0 and g.x2[j] == 0


def test_grid_validation():
    with pytest.raises(ValueError):
        Grid2D(4, 9, 0.1, 0.1, 0, 0)
    with pytest.raises(ValueError):
        Grid2D(9, 9, 0.1, 0.1, 0, 0, "neumann")
    with pytest.raises(ValueError):
        Grid2D.square(1.0, 0.3)


def test_wirtinger_derivatives_of_z_and_zbar():
    g = Grid2D.square(1.0, 0.1)
    z = g.z()
    assert np.allclose(gc.d_z(z, g), 1)
    assert np.allclose(gc.d_zbar(z, g), 0)
    assert np.allclose(gc.d_z(np.conj(z), g), 0)
    assert np.allclose(gc.d_zbar(np.conj(z), g), 1)


def test_laplacian_of_quadratic_is_exact_including_edges():
    g = Grid2D.square(1.0, 0.1)
    z = g.z()
    assert np.allclose(gc.laplacian((z * np.conj(z)).real, g), 1.0, atol=1e-10)


@pytest.mark.parametrize("periodic", [False, True])
def test_first_derivative_is_second_order(periodic):
    errs, hs = [], []
    for n in (32, 64, 128):
        if periodic:
            g = Grid2D.periodic(n, 2 * np.pi / n)
        else:
            g = Grid2D(n + 1, 7, 1.0 / n, 0.1, 0.0, 0.0)
        X1, _ = g.mesh()
        f = np.sin(X1)
        errs.append(np.abs(gc.d_x1(f, g) - np.cos(X1)).max())
        hs.append(g.hx)
    orders = gc.convergence_orders(hs, errs)
    assert np.all(np.abs(orders - 2) < 0.15)


def test_fourth_order_periodic_stencil():
    errs, hs = [], []
    for n in (16, 32, 64):
        g = Grid2D.periodic(n, 2 * np.pi / n)
        X1, _ = g.mesh()
        errs.append(np.abs(gc.d_x1(np.sin(X1), g, order=4) - np.cos(X1)).max())
        hs.append(g.hx)
    assert np.all(gc.convergence_orders(hs, errs) > 3.8)


def test_trapezoid_weights_integrate_area():
    g = Grid2D.square(1.0, 0.1)
    assert np.isclose(gc.trapezoid_weights(g).sum(), 4.0)


def test_tail_models():
    assert ZeroTail().integral(1.0, 2.0 + 0j) == 0
    assert PowerTail(2).integral(1.0, 2.0) == -2.0
    with pytest.raises(ValueError):
        PowerTail(0)


def test_tail_integrals_against_oracle(oracles):
    rho = np.linspace(0.01, 6.0, 4000)
    Q = rho * np.exp(-rho**2)
    tails = gc.tail_integrals(Q, rho)
    for o in oracles["radial_gaussian"]:
        k = int(np.argmin(np.abs(rho - o["rho"])))
        exact = np.exp(-2 * rho[k] ** 2) / 4
        assert abs(tails[k] - exact) < 1e-5
        assert abs(np.exp(-2 * o["rho"] ** 2) / 4 - o["tail"]) < 1e-14


def test_power_tail_makes_linear_growth_consistent():
    rho = np.linspace(0.1, 3.0, 30)
    Q = 0.5 * rho
    # |Q|^2 / tau = tau / 4 integrates to (R^2 - rho^2) / 8, tail -R^2 / 8
    assert np.allclose(gc.tail_integrals(Q, rho, PowerTail(2)), -(rho**2) / 8)


def test_radial_tail_integral_index_check():
    rho = np.linspace(0.1, 1, 10)
    with pytest.raises(IndexError):
        gc.radial_tail_integral(rho, rho, 10)
    assert gc.radial_tail_integral(rho, rho, -1) == 0.0


def test_snapshot_roundtrip(tmp_path):
    g = Grid2D.square(0.5, 0.1)
    values = g.z() ** 2
    gc.write_field(tmp_path / "q.csv", g, values, t=0.5, component="q")
    g2, v2, meta = gc.read_field(tmp_path / "q.csv")
    assert g2 == g
    assert np.array_equal(v2, values)
    assert meta["t"] == 0.5 and meta["component"] == "q"
    header = (tmp_path / "q.csv").read_text().splitlines()[0]
    assert header == "x1,x2,re,im"

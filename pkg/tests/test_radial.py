import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from orliczkit.nfunction import NFunctionSpec, build
from orliczkit.radial import (GridFunction, PotentialSpec, holder_pairing, luxemburg_norm,
                              make_grid, modular, modular_convergence_check, radial_gradient,
                              read_csv, sobolev_norm, sphere_area, write_csv)

P2 = build(NFunctionSpec("power", p=2.0))
FAMILIES = [build(s) for s in (NFunctionSpec("power", p=2.5),
                               NFunctionSpec("power_sum", p=2.0, q=3.0),
                               NFunctionSpec("curvature", gamma=1.5),
                               NFunctionSpec("power_log", p=2.6))]


def gauss(grid, a=1.0):
    return GridFunction(grid, np.exp(-a * grid.nodes**2))


def test_sphere_area():
    assert sphere_area(2) == pytest.approx(2 * math.pi)
    assert sphere_area(3) == pytest.approx(4 * math.pi)


@pytest.mark.parametrize("rule", ["finite_volume", "trapezoid", "simpson"])
@pytest.mark.parametrize("N", [2, 3, 4])
def test_weights_integrate_ball_volume(rule, N):
    g = make_grid(N, 2.0, 200, rule=rule)
    vol = g.integrate(np.ones_like(g.nodes))
    assert vol == pytest.approx(sphere_area(N) * 2.0**N / N, rel=1e-12)


def test_zero_function():
    g = make_grid(3, 5.0, 100)
    z = GridFunction(g, np.zeros(101))
    assert modular(P2, z) == 0.0
    assert luxemburg_norm(P2, z) == 0.0
    assert sobolev_norm(P2, z) == 0.0


def test_gaussian_modular_example():
    g = make_grid(3, 8.0, 8000)
    assert modular(P2, gauss(g)) == pytest.approx((math.pi / 2) ** 1.5, rel=1e-6)


def test_quadrature_second_order():
    exact = (math.pi / 2) ** 1.5
    errs = [abs(modular(P2, gauss(make_grid(3, 10.0, M))) - exact) for M in (100, 200, 400)]
    assert errs[0] / errs[1] >= 3.5 and errs[1] / errs[2] >= 3.5


def test_simpson_rule_needs_even_uniform():
    with pytest.raises(ValueError):
        make_grid(3, 1.0, 101, rule="simpson")
    with pytest.raises(ValueError):
        make_grid(3, 1.0, 100, spacing="graded", rule="simpson")


def test_graded_grid():
    g = make_grid(3, 10.0, 2000, spacing="graded")
    assert g.cell_widths[0] < g.cell_widths[-1]
    assert modular(P2, gauss(g)) == pytest.approx((math.pi / 2) ** 1.5, rel=1e-5)


def test_weighted_modular_constant_potential():
    g = make_grid(3, 8.0, 4000)
    u = gauss(g)
    assert modular(P2, u, PotentialSpec.constant(3.0)) == pytest.approx(3 * modular(P2, u))


def test_potential_validation():
    g = make_grid(3, 8.0, 100)
    with pytest.raises(ValueError):
        PotentialSpec.constant(0.0).on(g)
    well = PotentialSpec("formula", formula="gaussian_well", params={"v0": 0.5, "v_inf": 2.0})
    V = well.on(g)
    assert V[0] == pytest.approx(0.5) and V[-1] == pytest.approx(2.0)
    assert well.V0(g) == pytest.approx(0.5)


@pytest.mark.parametrize("p", [1.5, 2.0, 2.5, 3.0])
def test_luxemburg_equals_lp_norm(p):
    g = make_grid(3, 10.0, 4000, rule="simpson")
    A = build(NFunctionSpec("power", p=p))
    exact = (math.pi / p) ** (1.5 / p)
    assert luxemburg_norm(A, gauss(g)) == pytest.approx(exact, rel=1e-8)


def test_sobolev_norm_example():
    g = make_grid(3, 10.0, 4000, rule="simpson")
    expected = math.sqrt(3 * (math.pi / 2) ** 1.5) + math.sqrt((math.pi / 2) ** 1.5)
    assert sobolev_norm(P2, gauss(g)) == pytest.approx(expected, rel=1e-5)


def test_radial_gradient():
    g = make_grid(3, 5.0, 1000)
    du = radial_gradient(gauss(g))
    assert du.values[0] == 0.0
    assert np.allclose(du.values[1:-1], -2 * g.nodes[1:-1] * np.exp(-g.nodes[1:-1] ** 2), atol=1e-4)


@pytest.mark.parametrize("A", FAMILIES, ids=lambda a: a.name)
def test_norm_normalizes_modular(A):
    g = make_grid(3, 10.0, 500)
    rng = np.random.default_rng(1)
    for _ in range(5):
        u = GridFunction(g, rng.uniform(0.1, 50) * np.exp(-rng.uniform(0.2, 3) * g.nodes**2))
        n = luxemburg_norm(A, u)
        assert modular(A, u / n) == pytest.approx(1.0, abs=1e-8)
        lam = rng.uniform(-5, 5)
        assert luxemburg_norm(A, u * lam) == pytest.approx(abs(lam) * n, rel=1e-9)


@settings(max_examples=30, deadline=None)
@given(a=st.floats(0.1, 5), b=st.floats(-5, 5), w1=st.floats(0.2, 3), w2=st.floats(0.2, 3),
       idx=st.integers(0, 3))
def test_triangle_inequality(a, b, w1, w2, idx):
    A = FAMILIES[idx]
    g = make_grid(3, 8.0, 200)
    u = GridFunction(g, a * np.exp(-w1 * g.nodes**2))
    v = GridFunction(g, b * np.exp(-w2 * g.nodes**2) * np.cos(g.nodes))
    assert luxemburg_norm(A, u + v) <= (luxemburg_norm(A, u) + luxemburg_norm(A, v)) * (1 + 1e-9)


@pytest.mark.parametrize("A", FAMILIES, ids=lambda a: a.name)
def test_norm_modular_sandwich(A):
    g = make_grid(3, 10.0, 400)
    rng = np.random.default_rng(7)
    for _ in range(10):
        u = GridFunction(g, rng.uniform(0.01, 100) * np.exp(-rng.uniform(0.2, 3) * g.nodes**2))
        n = luxemburg_norm(A, u)
        mod = modular(A, u)
        assert A.xi0(n) <= mod * (1 + 1e-9)
        assert mod <= A.xi1(n) * (1 + 1e-9)


def test_holder_pairing():
    g = make_grid(3, 8.0, 400)
    z = GridFunction(g, np.zeros(401))
    assert holder_pairing(P2, z, gauss(g)) == (0.0, 0.0)
    A = build(NFunctionSpec("power_sum", p=2.0, q=3.0))
    rng = np.random.default_rng(3)
    for _ in range(20):
        u = GridFunction(g, rng.normal() * np.exp(-rng.uniform(0.3, 3) * g.nodes**2))
        v = GridFunction(g, rng.normal() * np.exp(-rng.uniform(0.3, 3) * (g.nodes - 1) ** 2))
        pairing, bound = holder_pairing(A, u, v)
        assert abs(pairing) <= bound


def test_modular_convergence_check():
    g = make_grid(3, 10.0, 400)
    u = gauss(g)
    assert modular_convergence_check(P2, [u], u)
    seq = [u + gauss(g, 2.0) / n for n in range(1, 40)] + [u]
    assert modular_convergence_check(P2, seq, u)
    moving = [GridFunction(g, np.exp(-(g.nodes - c) ** 2)) for c in (1.0, 3.0, 5.0)]
    zero = GridFunction(g, np.zeros(401))
    assert not modular_convergence_check(P2, moving, zero)


def test_csv_roundtrip(tmp_path):
    g = make_grid(3, 7.0, 300)
    u = GridFunction(g, np.exp(-g.nodes**2) * np.pi)
    path = tmp_path / "u.csv"
    write_csv(u, path)
    assert path.read_text().splitlines()[0] == "r,value"
    back = read_csv(path, 3)
    assert np.array_equal(back.values, u.values)
    assert np.array_equal(back.grid.nodes, g.nodes)


def test_gridfunction_is_read_only():
    g = make_grid(3, 1.0, 16)
    u = gauss(g)
    with pytest.raises(ValueError):
        u.values[0] = 2.0

import math

import numpy as np
import pytest

from juliashapes import equilibrium as eq
from juliashapes import geometry as geo
from juliashapes.errors import InvalidResolution, TooCloseToBoundary

from . import oracles

DISK2 = geo.ShapeSet([geo.circle(0, 2)])
ELLIPSE = geo.ShapeSet([geo.ellipse(0, (2, 1))])
TWO_DISKS = geo.ShapeSet([geo.circle(-1.5, 0.8), geo.circle(1.5, 0.8)])
MIXED = geo.ShapeSet([geo.ellipse(0.2j, (1.2, 0.6), 0.5), geo.circle(3, 0.5)])


@pytest.fixture(scope="module")
def disk_sol():
    return eq.solve(DISK2, 128)


@pytest.fixture(scope="module")
def ellipse_sol():
    return eq.solve(ELLIPSE, 256)


@pytest.fixture(scope="module")
def mixed_sol():
    return eq.solve(MIXED, 256)


def test_joukowski_oracle_is_self_consistent():
    rho, q = oracles.joukowski_parameters(2, 1)
    assert oracles.joukowski_image_error(2, 1) < 1e-12
    # frozen from the oracle: (a + b) / 2 and (a^2 - b^2) / 4
    assert rho == pytest.approx(1.5, abs=1e-12)
    assert q == pytest.approx(0.75, abs=1e-12)


def test_discretize_examples():
    d = eq.discretize(geo.ShapeSet([geo.circle(0, 1)]), 16)
    assert d.nodes[0].points == pytest.approx(np.exp(2j * np.pi * np.arange(16) / 16))
    assert d.nodes[0].speed == pytest.approx(np.ones(16))
    assert eq.discretize(DISK2, 32).nodes[0].speed == pytest.approx(np.full(32, 2.0))
    two = eq.discretize(TWO_DISKS, 64)
    assert two.size == 128
    assert [len(n.t) for n in two.nodes] == [64, 64]


@pytest.mark.parametrize("m", [15, 14, 17, 0])
def test_discretize_rejects_bad_resolution(m):
    with pytest.raises(InvalidResolution):
        eq.discretize(DISK2, m)


def test_kress_weights_integrate_log_kernel():
    # int log(4 sin^2((t-s)/2)) cos(3 s) ds = -(2 pi / 3) cos(3 t)
    m, t = 32, 0.37
    nodes = 2 * np.pi * np.arange(m) / m
    approx = eq.kress_weights(m, t - nodes) @ np.cos(3 * nodes)
    assert approx == pytest.approx(-(2 * np.pi / 3) * np.cos(3 * t), abs=1e-13)


def test_disk_solution(disk_sol):
    assert disk_sol.robin_gamma == pytest.approx(-math.log(2), abs=1e-12)
    assert disk_sol.sigma[0] == pytest.approx(np.full(128, 1 / (4 * np.pi)), rel=1e-12)
    assert eq.capacity(disk_sol) == pytest.approx(2.0, abs=1e-12)


def test_unit_disk_capacity_one():
    sol = eq.solve(geo.ShapeSet([geo.circle(0, 1)]), 64)
    assert sol.robin_gamma == pytest.approx(0.0, abs=1e-13)
    assert eq.capacity(sol) == pytest.approx(1.0, abs=1e-13)


def test_ellipse_capacity(ellipse_sol):
    rho, _ = oracles.joukowski_parameters(2, 1)
    assert ellipse_sol.robin_gamma == pytest.approx(-math.log(rho), abs=1e-10)
    assert eq.capacity(ellipse_sol) == pytest.approx(rho, abs=1e-10)


def test_symmetric_disks_split_mass():
    sol = eq.solve(TWO_DISKS, 128)
    assert sol.per_curve_mass == pytest.approx([0.5, 0.5], abs=1e-12)


def test_log_potential_examples(disk_sol, ellipse_sol):
    assert eq.log_potential(disk_sol, 0.0) == pytest.approx(-math.log(2), abs=1e-12)
    assert eq.log_potential(disk_sol, 4.0) == pytest.approx(-math.log(4), abs=1e-12)
    expected = ellipse_sol.robin_gamma - float(oracles.ellipse_green(2, 1, 10.0))
    assert eq.log_potential(ellipse_sol, 10.0) == pytest.approx(expected, abs=1e-10)
    assert abs(expected + math.log(10)) < 1e-2


def test_green_examples(disk_sol):
    assert eq.green(disk_sol, 4.0) == pytest.approx(math.log(2), abs=1e-12)
    assert eq.green(disk_sol, 0.5 + 0.3j) == 0.0
    theta = np.linspace(0, 2 * np.pi, 7)
    z = 2 * np.exp(1j * theta) * 1.0001
    assert eq.green(disk_sol, z) == pytest.approx(np.full(7, math.log(1.0001)), abs=1e-12)


def test_green_ellipse_matches_joukowski(ellipse_sol):
    rng = np.random.default_rng(3)
    z = (2.05 + 4 * rng.random(30)) * np.exp(2j * np.pi * rng.random(30))
    assert eq.green(ellipse_sol, z) == pytest.approx(oracles.ellipse_green(2, 1, z), abs=1e-9)


def test_too_close_to_boundary(disk_sol):
    with pytest.raises(TooCloseToBoundary):
        eq.log_potential(disk_sol, 2.0 + 1e-9)


def test_probability_mass(mixed_sol):
    assert mixed_sol.total_mass() == pytest.approx(1.0, abs=1e-12)
    assert min(s.min() for s in mixed_sol.sigma) >= -1e-8
    assert mixed_sol.per_curve_mass.sum() == pytest.approx(1.0, abs=1e-12)


def test_cdf_monotone_with_total_mass(mixed_sol):
    t = np.linspace(0, 2 * np.pi, 4001)
    for j, mass in enumerate(mixed_sol.per_curve_mass):
        values = mixed_sol.cdf(j, t)
        assert np.all(np.diff(values) >= -1e-14)
        assert values[0] == pytest.approx(0.0, abs=1e-15)
        assert values[-1] == pytest.approx(mass, abs=1e-13)


def test_boundary_constancy_off_node(mixed_sol):
    rng = np.random.default_rng(11)
    for j in range(len(MIXED.curves)):
        t = rng.random(8) * 2 * np.pi
        values = eq.boundary_log_integral(mixed_sol, j, t)
        assert np.max(np.abs(values + mixed_sol.robin_gamma)) <= 1e-6


def test_far_field(mixed_sol):
    z = 1e4 * np.exp(1j * np.array([0.1, 2.0, 4.0]))
    assert np.max(np.abs(eq.log_potential(mixed_sol, z) + np.log(np.abs(z)))) <= 1e-3


def test_normal_derivative_matches_density(mixed_sol):
    h = 1e-4
    for j, curve in enumerate(MIXED.curves):
        t = np.linspace(0, 2 * np.pi, 12, endpoint=False) + 0.1
        tangent = curve.derivative(t)
        outward = -1j * tangent / np.abs(tangent)
        g = eq.green(mixed_sol, curve.points(t) + h * outward)
        density = mixed_sol.density_at(j, t) / np.abs(tangent)
        assert np.abs(density) == pytest.approx(np.abs(g / h) / (2 * np.pi), rel=1e-2)


def test_spectral_convergence_in_m():
    coarse = eq.solve(MIXED, 128).robin_gamma
    fine = eq.solve(MIXED, 256).robin_gamma
    assert abs(coarse - fine) <= 1e-8


def test_density_csv(tmp_path, disk_sol):
    path = tmp_path / "density.csv"
    eq.write_density_csv(disk_sol, path)
    lines = path.read_text().splitlines()
    assert lines[0] == "curve_index,t,re,im,sigma"
    assert len(lines) == 129
    first = lines[1].split(",")
    assert float(first[2]) == 2.0 and float(first[4]) == pytest.approx(1 / (4 * np.pi))

import numpy as np
import pytest

from juliashapes import equilibrium as eq
from juliashapes import geometry as geo
from juliashapes import sampler
from juliashapes.errors import TooFewRoots

UNIT = geo.ShapeSet([geo.circle(0, 1)])
UNEQUAL = geo.ShapeSet([geo.circle(0, 1.0), geo.circle(3.5, 0.5)])


@pytest.fixture(scope="module")
def unequal_sol():
    return eq.solve(UNEQUAL, 256)


@pytest.mark.parametrize(
    "masses, n, expected",
    [([0.5, 0.5], 10, [5, 5]), ([0.6, 0.4], 5, [3, 2]), ([1.0], 7, [7]), ([0.5, 0.5], 3, [2, 1])],
)
def test_allocate_counts_examples(masses, n, expected):
    assert sampler.allocate_counts(masses, n) == expected


def test_allocate_counts_too_few():
    with pytest.raises(TooFewRoots):
        sampler.allocate_counts([0.5, 0.3, 0.2], 2)


def test_allocate_counts_properties():
    rng = np.random.default_rng(5)
    for _ in range(200):
        masses = rng.dirichlet(np.ones(rng.integers(1, 6)))
        n = int(rng.integers(len(masses) + 10, 500))
        counts = sampler.allocate_counts(masses, n)
        assert sum(counts) == n
        assert np.all(np.abs(np.array(counts) - n * masses) < 1)


def test_unit_disk_roots_of_unity():
    s = sampler.sample_roots(eq.solve(UNIT, 64), 8)
    expected = np.exp(2j * np.pi * np.arange(8) / 8)
    assert s.roots == pytest.approx(expected, abs=1e-12)
    assert s.max_arc_mass_deviation <= 1e-12


def test_radius_two_disk_spacing():
    s = sampler.sample_roots(eq.solve(geo.ShapeSet([geo.circle(0, 2)]), 64), 4)
    assert np.abs(s.roots) == pytest.approx(np.full(4, 2.0))
    gaps = np.diff(np.unwrap(np.angle(s.roots)))
    assert gaps == pytest.approx(np.full(3, np.pi / 2), abs=1e-12)


def test_symmetric_disks_split_roots():
    shape = geo.ShapeSet([geo.circle(-1.5, 0.8), geo.circle(1.5, 0.8)])
    s = sampler.sample_roots(eq.solve(shape, 128), 10)
    assert s.per_curve_counts == (5, 5)


def test_roots_lie_on_curves(unequal_sol):
    s = sampler.sample_roots(unequal_sol, 101)
    assert sum(s.per_curve_counts) == 101
    for j, curve in enumerate(UNEQUAL.curves):
        mask = s.curve_index == j
        assert np.max(np.abs(s.roots[mask] - curve.points(s.t[mask]))) <= 1e-10


def test_arc_masses_within_curve_are_equal(unequal_sol):
    s = sampler.sample_roots(unequal_sol, 137)
    for j, count in enumerate(s.per_curve_counts):
        arcs = s.arc_masses[s.curve_index == j]
        target = unequal_sol.per_curve_mass[j] / count
        assert np.max(np.abs(arcs - target)) <= 1e-6


def test_deviation_bound_and_decay(unequal_sol):
    deviations = []
    for n in (50, 100, 200, 400):
        s = sampler.sample_roots(unequal_sol, n)
        bound = 2 * max(m / c for m, c in zip(unequal_sol.per_curve_mass, s.per_curve_counts)) + 1e-6
        assert s.max_arc_mass_deviation <= bound
        assert s.max_arc_mass_deviation <= 1.0 / n + 1e-9
        deviations.append(s.max_arc_mass_deviation * n)
    # O(1/n): the scaled deviation stays bounded
    assert max(deviations) <= 1.0 + 1e-9


def test_sampling_is_deterministic(unequal_sol):
    a = sampler.sample_roots(unequal_sol, 77)
    b = sampler.sample_roots(unequal_sol, 77)
    assert a.roots.tobytes() == b.roots.tobytes()


def test_roots_csv_round_trip(tmp_path, unequal_sol):
    s = sampler.sample_roots(unequal_sol, 20)
    path = tmp_path / "roots.csv"
    sampler.write_roots_csv(s, path)
    assert path.read_text().splitlines()[0] == "index,curve_index,t,re,im"
    assert np.array_equal(sampler.read_roots_csv(path), s.roots)

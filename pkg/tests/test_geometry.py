import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from juliashapes import geometry as geo
from juliashapes.errors import AmbiguousBoundary, ShapeError

TWO_DISKS = geo.ShapeSet([geo.circle(-1.5, 0.8), geo.circle(1.5, 0.8)])


def test_point_at_examples():
    c = geo.circle(0, 2)
    assert geo.point_at(c, 0.0) == pytest.approx(2 + 0j)
    assert geo.point_at(c, math.pi / 2) == pytest.approx(2j, abs=1e-15)
    assert geo.point_at(geo.ellipse(0, (2, 1)), math.pi) == pytest.approx(-2 + 0j, abs=1e-15)


def test_tangent_at_examples():
    c = geo.circle(0, 2)
    assert geo.tangent_at(c, 0.0) == pytest.approx(2j)
    assert geo.tangent_at(c, math.pi) == pytest.approx(-2j, abs=1e-15)
    assert geo.tangent_at(geo.ellipse(0, (2, 1)), 0.0) == pytest.approx(1j)


def test_ellipse_rotation_and_center():
    e = geo.ellipse(1 + 1j, (2, 1), math.pi / 2)
    assert geo.point_at(e, 0.0) == pytest.approx(1 + 3j)


def test_negative_orientation_is_flipped():
    cw = geo.fourier(0, [1, 0, 0])  # e^{-it}, clockwise
    assert cw.signed_area() > 0
    assert geo.tangent_at(cw, 0.0) == pytest.approx(1j)


def test_fourier_requires_odd_length():
    with pytest.raises(ShapeError):
        geo.fourier(0, [1, 2])


def test_rounded_polygon_is_valid_and_close_to_square():
    square = geo.rounded_polygon([0, 2, 2 + 2j, 2j], 0.3)
    assert square.degree <= geo.POLYGON_MODES
    assert geo.validate(geo.ShapeSet([square])) == []
    assert square.center == pytest.approx(1 + 1j, abs=1e-9)
    assert geo.contains(geo.ShapeSet([square]), 1 + 1j)
    assert not geo.contains(geo.ShapeSet([square]), 2.2 + 1j)


def test_contains_examples():
    disk = geo.ShapeSet([geo.circle(0, 2)])
    assert geo.contains(disk, 0)
    assert not geo.contains(disk, 5)
    assert not geo.contains(TWO_DISKS, 0)
    assert geo.contains(TWO_DISKS, 1.5)


def test_contains_rejects_boundary_points():
    with pytest.raises(AmbiguousBoundary):
        geo.contains(geo.ShapeSet([geo.circle(0, 2)]), 2 + 0j)


def test_validate_examples():
    assert geo.validate(TWO_DISKS) == []
    overlap = geo.validate(geo.ShapeSet([geo.circle(-0.5, 0.8), geo.circle(0.5, 0.8)]))
    assert [v.kind for v in overlap] == ["overlap"]
    assert overlap[0].curves == (0, 1)
    nested = geo.validate(geo.ShapeSet([geo.circle(0, 1), geo.circle(0, 3)]))
    assert [v.kind for v in nested] == ["nesting"]


def test_validate_self_intersection():
    # figure-eight-like curve: c_1 = 1, c_2 = 1.5 winds twice locally
    loop = geo.fourier(0, [0, 0, 0, 1, 1.5])
    kinds = [v.kind for v in geo.validate(geo.ShapeSet([loop]))]
    assert "self_intersection" in kinds


def test_validate_empty():
    assert [v.kind for v in geo.validate(geo.ShapeSet([]))] == ["empty"]


def test_normalize_origin_examples():
    disk = geo.ShapeSet([geo.circle(0, 2)])
    assert geo.normalize_origin(disk) is disk
    moved = geo.normalize_origin(geo.ShapeSet([geo.circle(5, 1)]))
    assert moved.translation_applied == -5
    assert moved.curves[0].center == 0
    pair = geo.normalize_origin(geo.ShapeSet([geo.circle(3, 1), geo.circle(6, 1)]))
    assert pair.translation_applied == -3
    assert [c.center for c in pair.curves] == [0, 3]


def test_normalize_origin_nonconvex_component():
    # C-shaped polygon whose center of mass lies outside it
    c_shape = geo.rounded_polygon([5, 8, 8 + 1j, 6 + 1j, 6 + 3j, 8 + 3j, 8 + 4j, 5 + 4j], 0.1)
    moved = geo.normalize_origin(geo.ShapeSet([c_shape]))
    assert geo.contains(moved, 0)


def test_distance_to_curve_circle():
    c = geo.circle(1j, 2)
    z = np.array([1j + 2.5, 1j + 0.5j, 1j - 2.0001])
    assert geo.distance_to_curve(c, z) == pytest.approx([0.5, 1.5, 1e-4], abs=1e-12)


angles = st.floats(min_value=-20, max_value=20, allow_nan=False)
CURVES = [
    geo.circle(0.3 - 1j, 1.7),
    geo.ellipse(1j, (2, 0.7), 0.4),
    geo.fourier(0.5, [0.05j, 0.02, 0, 1.2, 0.1]),
    geo.rounded_polygon([0, 3, 1 + 2j], 0.4),
]


@settings(max_examples=50, deadline=None)
@given(t=angles, which=st.integers(0, len(CURVES) - 1))
def test_point_at_periodic(t, which):
    c = CURVES[which]
    a = geo.point_at(c, t)
    b = geo.point_at(c, t + 2 * math.pi)
    assert abs(a - b) <= 1e-12 * max(1.0, abs(a))


@settings(max_examples=50, deadline=None)
@given(t=angles, which=st.integers(0, len(CURVES) - 1))
def test_tangent_matches_central_difference(t, which):
    c = CURVES[which]
    h = 1e-4
    fd = (geo.point_at(c, t + h) - geo.point_at(c, t - h)) / (2 * h)
    exact = geo.tangent_at(c, t)
    assert abs(fd - exact) <= 1e-6 * abs(exact) + 1e-7 * c.degree**3


@settings(max_examples=40, deadline=None)
@given(
    shift=st.complex_numbers(max_magnitude=50, allow_nan=False, allow_infinity=False),
    z=st.complex_numbers(max_magnitude=4, allow_nan=False, allow_infinity=False),
)
def test_contains_translation_invariant(shift, z):
    shape = geo.ShapeSet([geo.ellipse(0, (2, 1), 0.3), geo.circle(3.5, 0.5)])
    try:
        base = geo.contains(shape, z, tol=1e-6)
    except AmbiguousBoundary:
        return
    assert geo.contains(shape.translated(shift), z + shift, tol=1e-6) == base


def test_valid_shapes_have_positive_separation():
    shape = geo.ShapeSet([geo.ellipse(0, (2, 1), 0.3), geo.circle(3.5, 0.5), geo.circle(-3j, 0.4)])
    assert geo.validate(shape) == []
    pts = [c.sample(geo.VALIDATE_SAMPLES) for c in shape.curves]
    for i in range(len(pts)):
        for j in range(i + 1, len(pts)):
            assert np.min(np.abs(pts[i][:, None] - pts[j][None, :])) > 0

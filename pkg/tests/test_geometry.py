import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from numpy.testing import assert_allclose

from dlspectra.geometry import (
    GeometryError,
    curve_frame,
    ellipse_semi_axes,
    fourier_decay_curve,
    make_curve,
    make_surface,
    parse_config,
    shape_from_config,
    surface_area,
    surface_frame,
    surface_grid,
)
from oracles import ellipsoid_area

T = np.linspace(0, 2 * np.pi, 97)


def test_circle_frame():
    f = curve_frame(make_curve("circle", R=2.0), T)
    assert_allclose(f.speed, 2.0)
    assert_allclose(f.curvature, 0.5)
    # outward normal equals the position direction
    assert_allclose(f.normal, f.point / 2.0, atol=1e-15)


def test_ellipse_axes_and_curvature():
    e = make_curve("ellipse", c=2.0, R=0.5)
    a, b = ellipse_semi_axes(e)
    assert_allclose((a, b), (math.cosh(0.5), math.sinh(0.5)))
    f = curve_frame(e, T)
    assert_allclose(f.point[:, 0], a * np.cos(T), atol=1e-15)
    assert_allclose(f.point[:, 1], b * np.sin(T), atol=1e-15)
    kappa = a * b / (a**2 * np.sin(T) ** 2 + b**2 * np.cos(T) ** 2) ** 1.5
    assert_allclose(f.curvature, kappa, rtol=1e-13)


def test_total_curvature_is_two_pi():
    for curve in (make_curve("ellipse", c=1.0, R=0.3), make_curve("fourier", coefficients={1: 1, 3: 0.1j})):
        t = np.linspace(0, 2 * np.pi, 512, endpoint=False)
        f = curve_frame(curve, t)
        assert_allclose(np.sum(f.curvature * f.speed) * 2 * np.pi / 512, 2 * np.pi, rtol=1e-12)


def test_derivatives_match_finite_differences():
    c = make_curve("fourier", coefficients={1: 1.0, 2: 0.05, -3: 0.02j})
    h = 1e-6
    assert_allclose(c.dz(T), (c.z(T + h) - c.z(T - h)) / (2 * h), atol=1e-8)
    assert_allclose(c.d2z(T), (c.dz(T + h) - c.dz(T - h)) / (2 * h), atol=1e-8)


def test_zstar_continues_the_conjugate():
    c = make_curve("ellipse", c=2.0, R=0.5)
    assert_allclose(c.zstar(T), np.conj(c.z(T)), atol=1e-15)
    # circle geometry check: |q(s) - q(t)|^2 continued is 4 sin^2((s - t)/2)
    circ = make_curve("circle", R=1.0)
    s, t = 0.7, 2.1 + 0.05j
    val = (circ.z(s) - circ.z(t)) * (circ.zstar(s) - circ.zstar(t))
    assert_allclose(val, 4 * np.sin((s - t) / 2) ** 2, rtol=1e-14)


@pytest.mark.parametrize("kind,params", [
    ("circle", {"R": 0.0}),
    ("circle", {"R": -1.0}),
    ("ellipse", {"c": 2.0, "R": 0.0}),
    ("ellipse", {"c": -1.0, "R": 0.5}),
    ("fourier", {"coefficients": {1: 1.0, 2: 0.6}}),      # self-intersecting loop
    ("fourier", {"coefficients": {-1: 1.0}}),             # clockwise
    ("fourier", {"coefficients": {1: 1.0, 2: 0.5}}),      # cusp, |q'| = 0
    ("fourier", {"coefficients": {}}),
    ("blob", {}),
])
def test_rejects_inadmissible_curves(kind, params):
    with pytest.raises(GeometryError):
        make_curve(kind, **params)


def test_fourier_decay_curve_is_valid_and_small():
    c = fourier_decay_curve()
    assert c.kind == "fourier"
    assert abs(c.diameter() - 2.0) < 0.1


def test_scaling():
    e = make_curve("ellipse", c=2.0, R=0.5)
    assert_allclose(e.scaled(0.5).diameter(), 0.5 * e.diameter())
    with pytest.raises(GeometryError):
        e.scaled(0.0)


@settings(max_examples=25, deadline=None)
@given(st.floats(0.05, 3.0), st.floats(0.1, 5.0))
def test_ellipse_length_is_scale_covariant(R, s):
    e = make_curve("ellipse", c=1.0, R=R)
    assert_allclose(e.scaled(s).length(), s * e.length(), rtol=1e-12)


def test_sphere_frame_and_area():
    s = make_surface("sphere", R=2.0)
    th, ph = np.meshgrid(np.linspace(0.1, 3.0, 7), np.linspace(0, 6, 9))
    f = surface_frame(s, th, ph)
    assert_allclose(f.normal, f.point / 2.0, atol=1e-15)
    assert_allclose(f.area_element, 4 * np.sin(th))
    assert_allclose(surface_area(s, 16, 32), 16 * np.pi, rtol=1e-13)


@pytest.mark.parametrize("axes", [(1, 1.1, 1.2), (1, 1, 2), (1, 1.5, 0.5)])
def test_ellipsoid_area_against_carlson(axes):
    s = make_surface("ellipsoid", a=axes[0], b=axes[1], c=axes[2])
    assert_allclose(surface_area(s, 48, 96), ellipsoid_area(*axes), rtol=1e-8)


def test_ellipsoid_normals_are_outward_unit():
    g = surface_grid(make_surface("ellipsoid", a=1, b=1.5, c=0.7), 8, 16)
    assert_allclose(np.linalg.norm(g.normals, axis=1), 1.0)
    # gradient of x^2/a^2 + ... points outward
    assert np.all(np.einsum("ij,ij->i", g.normals, g.points) > 0)
    assert g.shape == (8, 16) and g.points.shape == (128, 3)


def test_rejects_bad_surfaces():
    with pytest.raises(GeometryError):
        make_surface("ellipsoid", a=1, b=0, c=1)
    with pytest.raises(GeometryError):
        make_surface("torus", R=1)


def test_config_round_trip():
    cfg = parse_config("# comment\nshape = fourier\ncoeffs = 1,0, 0,0, 0,0.1  # k=1..3\n")
    c = shape_from_config(cfg)
    assert_allclose(c.z(T), make_curve("fourier", coefficients={1: 1.0, 3: 0.1j}).z(T))
    c2 = shape_from_config({"shape": "fourier", "coeffs": "1,0,0.05,0", "modes": "1,-2"})
    assert list(c2.modes) == [-2, 1]
    assert shape_from_config({"shape": "ellipsoid", "a": "1", "b": "2", "c": "3"}).axes == (1, 2, 3)
    assert shape_from_config({"shape": "circle", "radius": "3"}).params["R"] == 3.0


@pytest.mark.parametrize("cfg", [
    {"shape": "ellipse", "c": "2"},
    {"shape": "fourier", "coeffs": "1,0,2"},
    {"shape": "fourier", "coeffs": "1,0", "modes": "1,2"},
    {"shape": "circle", "R": "abc"},
    {"shape": "moebius"},
])
def test_bad_configs(cfg):
    with pytest.raises(GeometryError):
        shape_from_config(cfg)


def test_parse_config_rejects_garbage():
    with pytest.raises(GeometryError):
        parse_config("shape ellipse")

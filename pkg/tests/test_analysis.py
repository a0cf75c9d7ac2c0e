import csv
import io
import json
import math

import numpy as np
import pytest
from numpy.testing import assert_allclose

from dlspectra.analysis import (
    WeylViolation,
    fit_decay,
    linfty_l1_constant,
    report_json,
    schatten_sum,
    spectrum_csv,
    sphere_exact_spectrum,
    symmetry_audit,
    trace_report,
    weyl_audit,
    zeta_bound,
)
from dlspectra.geometry import fourier_decay_curve, make_curve
from dlspectra.operators import OperatorMatrix
from dlspectra.spectral import Spectrum, eigenpairs
from conftest import spectrum_of
from oracles import ZETA_P2, ZETA_P2_PRINTED, ZETA_P15


@pytest.mark.parametrize("R", [0.3, 1.0, 4.0])
def test_circle_trace(R):
    r = trace_report(make_curve("circle", R=R), 64)
    assert_allclose(r.trace_K, -1.0, atol=1e-12)
    assert_allclose(r.trace_KstarK_quadrature, 1.0, atol=1e-12)
    assert abs(r.defect) <= 1e-12


def test_ellipse_trace_and_defect(ellipse):
    r = trace_report(ellipse, 256)
    assert_allclose(r.trace_K, -1.0, atol=1e-10)
    assert_allclose(r.trace_KstarK_quadrature, r.trace_KstarK_svd, atol=1e-8)
    # sum |lambda|^2 = 1 + 2 sum_m exp(-4 m R); K is not normal, so tr(K*K) exceeds it
    lam2 = 1 + 2 / (math.exp(2.0) - 1)
    assert_allclose(np.sum(np.abs(spectrum_of("ellipse", 256, c=2.0, R=0.5)[1].values) ** 2), lam2, rtol=1e-12)
    assert r.trace_KstarK_svd > lam2 + 0.05
    assert r.defect > 0
    d = r.to_dict()
    assert d["defect"] == r.defect and d["shape_id"] == "ellipse(c=2,R=0.5)"


def test_defect_decreases_toward_circle():
    defects = [trace_report(make_curve("ellipse", c=2.0, R=R), 128).defect for R in (0.25, 0.5, 1, 2)]
    assert np.all(np.diff(defects) < 0) and defects[-1] > 0


def test_symmetry_audit(ellipse_spectrum, circle_spectrum):
    rep = symmetry_audit(ellipse_spectrum, top=10)
    assert len(rep.pairs) == 10 and rep.worst <= 1e-7
    assert symmetry_audit(circle_spectrum).vacuous


def test_symmetry_perturbed_fourier():
    rep = symmetry_audit(spectrum_of("fourier", 512)[1], top=10)
    assert rep.worst <= 1e-5


def test_weyl_audit(circle_spectrum, ellipse_spectrum):
    lhs, rhs = weyl_audit(circle_spectrum).sums[2]
    assert_allclose((lhs, rhs), (1.0, 1.0), atol=1e-12)
    rep = weyl_audit(ellipse_spectrum)
    assert rep.sums[2][0] < rep.sums[2][1]
    assert rep.index_diagnostic > 0


def test_weyl_violation_raises():
    fake = Spectrum(np.array([2.0 + 0j]), None, None, np.array([1.0]))
    with pytest.raises(WeylViolation):
        weyl_audit(fake)


def test_ellipse_exponential_fit(ellipse_spectrum):
    fit = fit_decay(ellipse_spectrum, "exponential")
    assert fit.ok
    assert abs(fit.rate - 0.5) <= 0.025
    # |lambda_j| is a staircase (pairs share a modulus), which caps r^2 a little below 0.999
    assert fit.r2 > 0.998
    assert fit.window[0] >= 1 and fit.npoints >= 8


def test_sphere_power_fit():
    fit = fit_decay(sphere_exact_spectrum(60), "power")
    assert abs(fit.rate + 0.5) < 0.02


def test_fourier_power_fit():
    fit = fit_decay(spectrum_of_decay(512), "power")
    assert fit.rate <= -(2 * 4 - 3) / 2 + 0.5


def spectrum_of_decay(n, _cache={}):
    if n not in _cache:
        from dlspectra import operators
        _cache[n] = eigenpairs(operators.assemble_dlp_2d(fourier_decay_curve(), n))
    return _cache[n]


def test_fit_needs_points(circle_spectrum):
    fit = fit_decay(circle_spectrum, "exponential")
    assert not fit.ok and "need 8" in fit.message
    with pytest.raises(ValueError):
        fit_decay(np.exp(-np.arange(30.0)), "logistic")


def test_sphere_exact_spectrum():
    assert_allclose(sphere_exact_spectrum(1).values.real, [-1, -1 / 3, -1 / 3, -1 / 3])
    s2 = sphere_exact_spectrum(2).values.real
    assert np.sum(np.isclose(s2, -0.2)) == 5
    for L in (0, 3, 10):
        assert sphere_exact_spectrum(L).values.size == (L + 1) ** 2
    with pytest.raises(ValueError):
        sphere_exact_spectrum(-1)


def test_exact_sphere_schatten_partial_sums_increase():
    sums = [schatten_sum(sphere_exact_spectrum(L).singular_values, 4) for L in (5, 20, 80, 320)]
    assert np.all(np.diff(sums) > 0)
    assert sums[-1] < ZETA_P2
    assert ZETA_P2 - sums[-1] < 1e-5


def test_zeta_bound():
    assert_allclose(zeta_bound(2), ZETA_P2, rtol=0, atol=1e-12)
    assert abs(zeta_bound(2) - ZETA_P2_PRINTED) < 5e-7
    assert_allclose(zeta_bound(1.5), ZETA_P15, rtol=0, atol=1e-12)
    assert_allclose(zeta_bound(40), 1.0, atol=1e-30)
    with pytest.raises(ValueError):
        zeta_bound(1.0)


def test_linfty_l1_circle(circle, circle_spectrum):
    rep = linfty_l1_constant(circle_spectrum, circle, count=1)
    assert_allclose(rep.constant, 1 / (2 * np.pi), rtol=1e-12)


def test_linfty_l1_ellipse_stable_under_refinement(ellipse):
    c1 = linfty_l1_constant(spectrum_of("ellipse", 128, c=2.0, R=0.5)[1], ellipse, count=7).constant
    c2 = linfty_l1_constant(spectrum_of("ellipse", 256, c=2.0, R=0.5)[1], ellipse, count=7).constant
    assert np.isfinite(c1) and abs(c1 / c2 - 1) < 0.05


def test_linfty_l1_depends_on_shape():
    cs = []
    for R in (0.3, 0.5, 1.0):
        e = make_curve("ellipse", c=2.0, R=R)
        cs.append(linfty_l1_constant(spectrum_of("ellipse", 128, c=2.0, R=R)[1], e, count=7).constant)
    assert len(set(np.round(cs, 6))) == 3


def test_csv_and_json(circle_spectrum, circle):
    text = spectrum_csv(circle_spectrum)
    rows = list(csv.DictReader(io.StringIO(text)))
    assert list(rows[0]) == ["index", "re", "im", "alpha", "shape_id", "N"]
    assert len(rows) == 64 and float(rows[0]["re"]) == circle_spectrum.values[0].real
    assert spectrum_csv(circle_spectrum) == text
    d = json.loads(report_json(trace_report(circle, 32)))
    assert d["n"] == 32

import csv
import io
import math

import numpy as np
import pytest
from numpy.testing import assert_allclose

from dlspectra.eigenfunctions import (
    AnnulusError,
    Eigenpair,
    annulus_zero_count,
    eigenpair,
    holomorphic_extension,
    interpolant,
    nodal_bound_report,
    nodal_count,
    nodal_csv,
    nodal_report,
    real_pairs,
    sign_and_orthogonality_check,
    strip_zero_count,
    validate_annulus,
)
from dlspectra.geometry import make_curve
from conftest import spectrum_of
from oracles import ELLIPSE_R

T = np.linspace(0, 2 * np.pi, 64, endpoint=False)


def by_value(spec, curve, target):
    return min(real_pairs(spec, curve, threshold=1e-14), key=lambda p: abs(p.value - target))


@pytest.fixture(scope="module")
def ell_pairs(ellipse, ellipse_spectrum):
    return {(m, s): by_value(ellipse_spectrum, ellipse, s * math.exp(-2 * m * ELLIPSE_R))
            for m in range(1, 6) for s in (1, -1)}


def test_normalization(ell_pairs):
    for p in ell_pairs.values():
        assert_allclose(p.l2_norm, 2 * np.pi, rtol=1e-12)


def test_constant_eigenfunction(circle, circle_spectrum):
    p = eigenpair(circle_spectrum, circle_spectrum.constant_index, circle)
    assert p.constant and p.value == pytest.approx(-1.0)
    assert nodal_count(p) == 0
    t = np.array([0.3 + 0.05j, 2.0 - 0.08j, 5.0])
    ext = holomorphic_extension(p, t)
    assert_allclose(ext / p.samples[0], 1.0, atol=1e-12)
    assert annulus_zero_count(p).count == 0


@pytest.mark.parametrize("k", [1, 2, 5, 11])
def test_trig_density_on_circle(circle, k):
    p = Eigenpair.from_samples(circle, np.cos(k * T), value=0.0)
    assert nodal_count(p) == 2 * k
    with pytest.raises(ValueError):
        holomorphic_extension(p, np.array([0.1]))


def test_zero_samples_rejected(circle):
    with pytest.raises(ValueError):
        Eigenpair.from_samples(circle, np.zeros(32))


def test_near_zero_samples_are_bridged(circle):
    # sin(2t) vanishes exactly at four nodes; the count is still 4
    p = Eigenpair.from_samples(circle, np.sin(2 * T))
    assert nodal_count(p) == 4
    # a double zero (touching) adds no sign change
    q = Eigenpair.from_samples(circle, 1 - np.cos(T))
    assert nodal_count(q) == 0


def test_ellipse_real_zero_counts(ell_pairs, ellipse):
    for (m, s), p in ell_pairs.items():
        assert nodal_count(p) == 2 * m
    fine = spectrum_of("ellipse", 512, c=2.0, R=0.5)[1]
    for m in range(1, 5):
        assert nodal_count(by_value(fine, ellipse, math.exp(-2 * m * ELLIPSE_R))) == 2 * m


def test_extension_matches_interpolant(ell_pairs):
    t = np.linspace(0, 2 * np.pi, 301)
    for key in [(1, 1), (2, -1), (4, 1)]:
        p = ell_pairs[key]
        err = np.abs(holomorphic_extension(p, t) - interpolant(p, t)).max()
        assert err <= 1e-6 * np.abs(p.samples).max()


def test_extension_is_analytic(ell_pairs):
    # Cauchy-Riemann: d/dt along real and imaginary directions agree
    p = ell_pairs[(2, 1)]
    t0, h = 1.234 + 0.01j, 1e-5
    dx = (holomorphic_extension(p, t0 + h) - holomorphic_extension(p, t0 - h)) / (2 * h)
    dy = (holomorphic_extension(p, t0 + 1j * h) - holomorphic_extension(p, t0 - 1j * h)) / (2j * h)
    assert_allclose(dx, dy, rtol=1e-6)


def test_extension_of_exact_ellipse_mode(ell_pairs):
    # the +e^{-2R} eigenfunction is cos(t) or sin(t) in the parameter; its continuation is cos/sin of complex t
    p = ell_pairs[(1, 1)]
    t = np.array([0.4 + 0.07j, 2.5 - 0.03j])
    c = np.cos(T)
    basis = c if abs(np.dot(p.samples[::4], c)) > abs(np.dot(p.samples[::4], np.sin(T))) else np.sin(T)
    f = np.cos if basis is c else np.sin
    amp = interpolant(p, np.array([0.0 if f is np.cos else np.pi / 2]))[0]
    assert_allclose(holomorphic_extension(p, t), amp * f(t), rtol=1e-9)


def test_extension_errors(ell_pairs, circle):
    p = ell_pairs[(1, 1)]
    with pytest.raises(AnnulusError):
        holomorphic_extension(p, np.array([0.2 + 0.5j]), eps=0.1)
    tiny = Eigenpair(1e-9, p.samples, p.curve)
    with pytest.raises(ValueError):
        holomorphic_extension(tiny, np.array([0.1]))


def test_annulus_validation_rejects_wide_strip():
    e = make_curve("ellipse", c=2.0, R=0.5)
    validate_annulus(e, 0.1)
    # z(t) for the ellipse: q' vanishes at Im t = +-R, so a strip of half-width R fails
    with pytest.raises(AnnulusError):
        validate_annulus(e, 0.5)


def test_strip_counts_known_functions():
    assert strip_zero_count(lambda t: np.cos(3 * t), 0.1).count == 6
    assert strip_zero_count(lambda t: np.exp(1j * t) + 0 * t, 0.2).count == 0
    # cos(t) - cosh(0.3): zeros at t = +-0.3 i, inside only for eps/2 > 0.3
    f = lambda t: np.cos(t) - np.cosh(0.3)  # noqa: E731
    assert strip_zero_count(f, 0.4).count == 0
    assert strip_zero_count(f, 0.8).count == 2


def test_strip_count_nudges_eps():
    # zeros at Im t = +-0.05 sit on the contour for eps = 0.1
    f = lambda t: np.cos(t) - np.cosh(0.05)  # noqa: E731
    zc = strip_zero_count(f, 0.1)
    assert zc.eps != 0.1 and zc.count == (2 if zc.eps > 0.1 else 0)


def test_annulus_counts_match_real(ell_pairs):
    for m in range(1, 4):
        for s in (1, -1):
            p = ell_pairs[(m, s)]
            real = nodal_count(p)
            c1 = annulus_zero_count(p, 0.1)
            c2 = annulus_zero_count(p, 0.05)
            assert real == c1.count == c2.count
            assert abs(c1.raw_winding - c1.count) < 1e-6


def test_nodal_bound_on_ellipse(ell_pairs):
    rep = nodal_bound_report(ell_pairs.values())
    ratios = [r[2] for r in rep.rows]
    assert_allclose(ratios, 1 / ELLIPSE_R, rtol=1e-8)
    assert not rep.super_log
    running = [r[3] for r in rep.rows]
    assert np.all(np.diff(running) >= 0) and rep.constant == pytest.approx(2.0)


def test_nodal_bound_needs_three(ell_pairs):
    with pytest.raises(ValueError):
        nodal_bound_report([ell_pairs[(1, 1)], ell_pairs[(1, -1)]])


def test_nodal_bound_perturbed_ellipse():
    curve = make_curve("fourier", coefficients={-1: 0.5 * (math.cosh(0.5) - math.sinh(0.5)),
                                                 1: 0.5 * (math.cosh(0.5) + math.sinh(0.5)), 3: 0.02})
    spec = spectrum_of_curve(curve)
    pairs = real_pairs(spec, curve, count=8, threshold=1e-8)
    rep = nodal_bound_report(pairs)
    assert max(r[2] for r in rep.rows) <= 2 * (1 / ELLIPSE_R)


def spectrum_of_curve(curve):
    from dlspectra import operators
    from dlspectra.spectral import eigenpairs
    return eigenpairs(operators.assemble_dlp_2d(curve, 256))


def test_sign_changes_and_orthogonality(ell_pairs, ellipse, ellipse_spectrum):
    const = eigenpair(ellipse_spectrum, ellipse_spectrum.constant_index, ellipse)
    rep = sign_and_orthogonality_check(const)
    assert rep.exempt and not rep.both_signs
    assert rep.s1_inner > 0
    for p in ell_pairs.values():
        r = sign_and_orthogonality_check(p)
        assert r.both_signs and not r.exempt
        # orthogonality holds against the equilibrium density S^-1 1
        assert abs(r.sinv1_inner) <= 1e-10


def test_s1_orthogonality_is_not_generic(ell_pairs):
    # <e, S1> vanishes for odd-in-angle modes but not for the cos(2t)-type one at -e^{-2}
    r = sign_and_orthogonality_check(ell_pairs[(2, -1)])
    assert abs(r.s1_inner) > 0.1


def test_nodal_report_and_csv(ell_pairs):
    reps = [nodal_report(ell_pairs[(1, 1)]), nodal_report(ell_pairs[(2, 1)], eps=None)]
    assert reps[0].real_zeros == reps[0].annulus_zeros == 2 and reps[0].eps == 0.1
    assert reps[1].annulus_zeros is None and reps[0].real_zeros % 2 == 0
    rows = list(csv.reader(io.StringIO(nodal_csv(reps))))
    assert rows[0] == ["shape_id", "N", "lambda", "real_zeros", "annulus_zeros", "ratio", "epsilon"]
    assert rows[2][4] == "" and float(rows[1][5]) == pytest.approx(2.0)

"""Eigenfunctions on plane curves: nodal counts, analytic continuation, zero counting."""
from __future__ import annotations

import csv
import io
import math
from dataclasses import dataclass

import numpy as np

from .geometry import Curve2D
from .interp import trig_eval, trig_resample
from .operators import nodes_2d, rescale_to_diameter, slp_matrix_2d
from .spectral import Spectrum

REFINE = 16
NEAR_ZERO = 1e-9
DEFAULT_EPS = 0.1


class AnnulusError(ValueError):
    """The requested strip is too wide for the curve's analytic continuation."""


@dataclass(frozen=True, eq=False)
class Eigenpair:
    """A real eigenfunction sampled at the ``n`` equispaced nodes of ``curve``.

    Samples are scaled so that ``||e||_L2(ds) = 2 pi``.
    """

    value: float
    samples: np.ndarray
    curve: Curve2D
    constant: bool = False

    @property
    def n(self) -> int:
        return self.samples.shape[0]

    @property
    def weights(self) -> np.ndarray:
        return (2 * np.pi / self.n) * np.abs(self.curve.dz(nodes_2d(self.n)))

    @property
    def l2_norm(self) -> float:
        return float(np.sqrt(self.weights @ self.samples**2))

    @classmethod
    def from_samples(cls, curve: Curve2D, samples, value: float = 0.0, constant: bool = False) -> "Eigenpair":
        samples = np.asarray(samples, dtype=float)
        w = (2 * np.pi / samples.shape[0]) * np.abs(curve.dz(nodes_2d(samples.shape[0])))
        norm = math.sqrt(w @ samples**2)
        if norm == 0 or not np.isfinite(norm):
            raise ValueError("eigenfunction is numerically zero")
        return cls(float(value), samples * (2 * np.pi / norm), curve, constant)


def eigenpair(spectrum: Spectrum, k: int, curve: Curve2D | None = None) -> Eigenpair:
    """Real, normalized eigenpair ``k`` of a 2D spectrum."""
    curve = curve if curve is not None else spectrum.operator.shape
    if not spectrum.is_real[k]:
        raise ValueError(f"eigenvalue {spectrum.values[k]} is not real")
    return Eigenpair.from_samples(curve, spectrum.real_vector(k), spectrum.values[k].real,
                                  constant=(k == spectrum.constant_index))


def real_pairs(spectrum: Spectrum, curve: Curve2D | None = None, count: int | None = None,
               threshold: float = 1e-10) -> list[Eigenpair]:
    """Non-constant real eigenpairs with ``|lambda| > threshold``, largest first."""
    out = []
    for k in range(len(spectrum.values)):
        if k == spectrum.constant_index or not spectrum.is_real[k] or abs(spectrum.values[k]) <= threshold:
            continue
        out.append(eigenpair(spectrum, k, curve))
        if count is not None and len(out) >= count:
            break
    return out


# ---------------------------------------------------------------------------
# real zeros


def nodal_count(pair: Eigenpair, refine: int = REFINE) -> int:
    """Number of sign changes of the trigonometric interpolant around the curve.

    Runs of samples within ``1e-9 ||e||_inf`` of zero are bridged: they add
    one crossing when the neighbouring signs differ and none otherwise.
    """
    fine = trig_resample(pair.samples, refine * pair.n)
    scale = np.abs(fine).max()
    if scale == 0:
        raise ValueError("eigenfunction is numerically zero")
    signs = np.sign(fine)
    signs[np.abs(fine) <= NEAR_ZERO * scale] = 0
    nz = signs[signs != 0]
    if nz.size == 0:
        raise ValueError("eigenfunction is numerically zero")
    return int(np.count_nonzero(nz != np.roll(nz, -1)))


# ---------------------------------------------------------------------------
# analytic continuation


def validate_annulus(curve: Curve2D, eps: float, samples: int = 256, levels: int = 5) -> None:
    """Check that the continued parametrization stays regular and injective on the strip.

    Both ``q(s) - q(t)`` and its starred twin are compared against
    ``2 sin((s - t)/2)`` for real ``s`` and ``|Im t| <= eps``; a vanishing
    ratio means a spurious pole of the extension integrand.
    """
    s = 2 * np.pi * np.arange(samples) / samples
    scale = np.abs(curve.dz(s)).min()
    for y in np.linspace(-eps, eps, levels):
        t = s + 0.5 * (s[1] - s[0]) + 1j * y
        speed = np.minimum(np.abs(curve.dz(t)), np.abs(curve.dz(s + 1j * y)))
        if speed.min() <= 1e-3 * scale:
            raise AnnulusError(f"q'(t) nearly vanishes at Im t = {y:.3g}")
        denom = np.abs(2 * np.sin((s[:, None] - t[None, :]) / 2))
        for f in (curve.z, curve.zstar):
            ratio = np.abs(f(s)[:, None] - f(t)[None, :]) / denom
            if ratio.min() <= 1e-3 * scale:
                raise AnnulusError(f"continued curve is not injective near Im t = {y:.3g}")


def holomorphic_extension(pair: Eigenpair, t, eps: float = DEFAULT_EPS, validate: bool = True) -> np.ndarray:
    """Continue the eigenfunction to complex parameters ``t`` with ``|Im t| <= eps``.

    Evaluates ``(1/lambda) (K e)(q(t))`` through the Cauchy-type integral

        1/(2 pi i lambda) int e(s) [ conj(q)'(s) / (conj(q)(s) - q*(t))
                                     - q'(s) / (q(s) - q(t)) ] ds

    with the periodic trapezoid rule.  The two poles at ``s = t`` cancel, so
    the integrand is smooth.  At real ``t`` this reproduces ``K e / lambda``.
    """
    if abs(pair.value) < 1e-8:
        raise ValueError("extension needs |lambda| >= 1e-8")
    t = np.asarray(t, dtype=complex)
    if np.any(np.abs(t.imag) > eps * (1 + 1e-12)):
        raise AnnulusError(f"parameter outside the strip |Im t| <= {eps}")
    curve = pair.curve
    if validate:
        validate_annulus(curve, eps)
    n = pair.n
    s = nodes_2d(n)
    q, dq = curve.z(s), curve.dz(s)
    flat = t.ravel()
    qc, qcs = curve.z(flat), curve.zstar(flat)
    d1 = q[None, :] - qc[:, None]
    d2 = np.conj(q)[None, :] - qcs[:, None]
    hit = np.abs(d1) < 1e-13 * np.abs(q).max()
    d1 = np.where(hit, 1.0, d1)
    d2 = np.where(hit, 1.0, d2)
    integrand = np.conj(dq)[None, :] / d2 - dq[None, :] / d1
    # coincident real node: the integrand tends to -i * curvature * speed
    kappa_speed = np.imag(np.conj(dq) * curve.d2z(s)) / np.abs(dq) ** 2
    integrand = np.where(hit, -1j * kappa_speed[None, :], integrand)
    vals = (2 * np.pi / n) * (integrand @ pair.samples) / (2j * np.pi * pair.value)
    return vals.reshape(t.shape)


@dataclass(frozen=True)
class ZeroCount:
    count: int
    eps: float
    evaluations: int
    raw_winding: float


def _line_phase(f, y: float, start: int, max_points: int = 1 << 16):
    """Total phase change of ``f`` along ``Im t = y`` for Re t in [0, 2 pi]."""
    t = np.linspace(0.0, 2 * np.pi, start + 1)
    vals = f(t + 1j * y)
    evaluations = vals.size
    while True:
        mags = np.abs(vals)
        if mags.min() <= 1e-12 * mags.max():
            return math.nan, mags.min(), mags.max(), evaluations
        inc = np.angle(vals[1:] / vals[:-1])
        bad = np.flatnonzero(np.abs(inc) >= np.pi / 2)
        if bad.size == 0 or t.size >= max_points:
            return float(inc.sum()), np.abs(vals).min(), np.abs(vals).max(), evaluations
        mids = 0.5 * (t[bad] + t[bad + 1])
        mvals = f(mids + 1j * y)
        evaluations += mids.size
        t = np.insert(t, bad + 1, mids)
        vals = np.insert(vals, bad + 1, mvals)


def strip_zero_count(f, eps: float, start: int = 512) -> ZeroCount:
    """Zeros of a 2 pi-periodic analytic ``f`` in the strip ``|Im t| < eps/2``.

    Argument principle on the rectangle [0, 2 pi] x [-eps/2, eps/2]; the
    vertical sides cancel by periodicity.  Increments are refined until each
    is below pi/2.  A contour passing too close to a zero nudges ``eps`` by
    10% (up to three retries).
    """
    tried = []
    for factor in (1.0, 1.1, 0.9, 1.2):
        e = eps * factor
        bottom, lo_b, hi_b, n_b = _line_phase(f, -e / 2, start)
        top, lo_t, hi_t, n_t = _line_phase(f, e / 2, start)
        tried.append(e)
        if min(lo_b, lo_t) > 1e-12 * max(hi_b, hi_t):
            winding = (bottom - top) / (2 * np.pi)
            return ZeroCount(int(round(winding)), e, n_b + n_t, winding)
    raise ValueError(f"contour hits a zero for every tried eps {tried}")


def annulus_zero_count(pair: Eigenpair, eps: float = DEFAULT_EPS, start: int | None = None) -> ZeroCount:
    """Zeros of the continued eigenfunction in the parameter strip ``|Im t| < eps/2``."""
    validate_annulus(pair.curve, eps * 1.2)
    f = lambda t: holomorphic_extension(pair, t, eps=eps * 1.2, validate=False)
    return strip_zero_count(f, eps, start or max(4 * pair.n, 512))


# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class NodalReport:
    shape_id: str
    n: int
    value: float
    real_zeros: int
    annulus_zeros: int | None
    eps: float | None

    @property
    def ratio(self) -> float:
        return self.real_zeros / abs(math.log(abs(self.value))) if 0 < abs(self.value) < 1 else math.nan

    @property
    def normalized(self) -> bool:
        return True


def nodal_report(pair: Eigenpair, eps: float | None = DEFAULT_EPS) -> NodalReport:
    zc = annulus_zero_count(pair, eps) if eps is not None and abs(pair.value) >= 1e-8 else None
    return NodalReport(pair.curve.shape_id, pair.n, pair.value, nodal_count(pair),
                       zc.count if zc else None, zc.eps if zc else None)


NODAL_CSV_FIELDS = ["shape_id", "N", "lambda", "real_zeros", "annulus_zeros", "ratio", "epsilon"]


def nodal_csv(reports) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(NODAL_CSV_FIELDS)
    for r in reports:
        w.writerow([r.shape_id, r.n, repr(r.value), r.real_zeros,
                    "" if r.annulus_zeros is None else r.annulus_zeros,
                    repr(r.ratio), "" if r.eps is None else repr(r.eps)])
    return buf.getvalue()


@dataclass(frozen=True)
class NodalBoundReport:
    rows: list  # (lambda, real zeros, ratio, running max)
    constant: float
    super_log: bool


def nodal_bound_report(pairs, min_pairs: int = 3) -> NodalBoundReport:
    """Ratios ``#zeros / |log|lambda||`` in order of decreasing ``|lambda|``.

    ``super_log`` is raised when the ratios over the last third of the
    list average more than 1.5 times those of the first third.
    """
    pairs = sorted((p for p in pairs if 1e-10 < abs(p.value) < 1), key=lambda p: -abs(p.value))
    if len(pairs) < min_pairs:
        raise ValueError(f"need at least {min_pairs} eigenpairs with 1e-10 < |lambda| < 1")
    rows, running = [], 0.0
    for p in pairs:
        count = nodal_count(p)
        ratio = count / abs(math.log(abs(p.value)))
        running = max(running, ratio)
        rows.append((p.value, count, ratio, running))
    ratios = np.array([r[2] for r in rows])
    third = max(1, len(ratios) // 3)
    super_log = bool(ratios[-third:].mean() > 1.5 * ratios[:third].mean())
    return NodalBoundReport(rows, running, super_log)


# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class SignReport:
    value: float
    minimum: float
    maximum: float
    exempt: bool
    s1_inner: float
    sinv1_inner: float

    @property
    def both_signs(self) -> bool:
        return self.minimum < 0 < self.maximum


def sign_and_orthogonality_check(pair: Eigenpair, diameter: float = 0.9) -> SignReport:
    """Sign change and single-layer orthogonality of a non-constant eigenfunction.

    ``s1_inner`` is ``<e, S1> / (||e|| ||S1||)`` and ``sinv1_inner`` the same
    with ``S^-1 1`` (the equilibrium density direction), both on the curve
    rescaled to the given diameter, where ``S`` is positive definite.
    """
    small = rescale_to_diameter(pair.curve, diameter)
    s = slp_matrix_2d(small, pair.n)
    w = (2 * np.pi / pair.n) * np.abs(small.dz(nodes_2d(pair.n)))
    e = pair.samples
    ones = np.ones(pair.n)

    def cosine(g):
        return float((w @ (e * g)) / math.sqrt((w @ e**2) * (w @ g**2)))

    fine = trig_resample(e, REFINE * pair.n)
    exempt = pair.constant or abs(pair.value) < 1e-6
    return SignReport(pair.value, float(fine.min()), float(fine.max()), exempt,
                      cosine(s @ ones), cosine(np.linalg.solve(s, ones)))


def interpolant(pair: Eigenpair, t) -> np.ndarray:
    return trig_eval(pair.samples, t)

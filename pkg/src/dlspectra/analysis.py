"""Traces, symmetry and Weyl audits, decay fits and reference spectra."""
from __future__ import annotations

import csv
import io
import json
import math
from dataclasses import asdict, dataclass, field

import numpy as np

from .geometry import Curve2D
from .interp import trig_resample
from . import operators
from .spectral import Spectrum, eigenpairs, schatten_sum

DECAY_WINDOW = (1e-12, 1e-1)
MIN_FIT_POINTS = 8


@dataclass(frozen=True)
class TraceReport:
    shape_id: str
    n: int
    trace_K: float
    trace_KstarK_quadrature: float
    trace_KstarK_svd: float

    @property
    def defect(self) -> float:
        return self.trace_KstarK_quadrature - 1.0

    def to_dict(self) -> dict:
        return {**asdict(self), "defect": self.defect}


def trace_report(curve: Curve2D, n: int = 256) -> TraceReport:
    """tr(K) from the diagonal and tr(K*K) two ways.

    The Frobenius norm of the symmetrized matrix is the trapezoid value of
    the double integral of the squared kernel; the other route sums the
    squared singular values.
    """
    op = operators.assemble_dlp_2d(curve, n)
    twin = op.symmetrized
    alpha = np.linalg.svd(twin, compute_uv=False)
    return TraceReport(
        curve.shape_id, n,
        float(np.trace(op.matrix)),
        float(np.sum(twin * twin)),
        float(np.sum(alpha**2)),
    )


# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class SymmetryReport:
    pairs: list = field(default_factory=list)  # (lambda, partner, |lambda + partner|)
    worst: float = 0.0

    @property
    def vacuous(self) -> bool:
        return not self.pairs


def symmetry_audit(spectrum: Spectrum, top: int | None = None, threshold: float = 1e-6) -> SymmetryReport:
    """Match each eigenvalue to the partner closest to its negative.

    The constant-eigenvector eigenpair is skipped, as is everything below
    ``threshold`` in modulus.  ``top`` limits the audit to the largest
    remaining eigenvalues.
    """
    vals = spectrum.values
    keep = [k for k in range(len(vals)) if k != spectrum.constant_index and abs(vals[k]) >= threshold]
    if top is not None:
        keep = keep[:top]
    pairs = []
    for k in keep:
        others = np.delete(vals, [k] + ([spectrum.constant_index] if spectrum.constant_index is not None else []))
        j = int(np.argmin(np.abs(vals[k] + others)))
        pairs.append((complex(vals[k]), complex(others[j]), float(abs(vals[k] + others[j]))))
    return SymmetryReport(pairs, max((p[2] for p in pairs), default=0.0))


# ---------------------------------------------------------------------------


class WeylViolation(AssertionError):
    """Eigenvalue power sum exceeds the singular value power sum."""


@dataclass(frozen=True)
class WeylReport:
    sums: dict  # r -> (sum |lambda|^r, sum alpha^r)
    index_diagnostic: float  # max_j j |lambda_j|^2


def weyl_audit(spectrum: Spectrum, rs=(2, 4), rtol: float = 1e-10) -> WeylReport:
    """Check ``sum |lambda_j|^r <= sum alpha_j^r`` for each ``r``; raise on violation."""
    lam = np.abs(spectrum.values)
    sums = {}
    for r in rs:
        lhs, rhs = float(np.sum(lam**r)), schatten_sum(spectrum.singular_values, r)
        sums[r] = (lhs, rhs)
        if lhs > rhs * (1 + rtol) + 1e-14:
            raise WeylViolation(f"r={r}: sum|lambda|^r = {lhs:.16g} > sum alpha^r = {rhs:.16g}")
    j = np.arange(len(lam))
    return WeylReport(sums, float(np.max(j * lam**2)) if len(lam) else 0.0)


# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class DecayFit:
    """Least-squares decay fit.

    ``rate`` is the decay constant ``c`` in ``|lambda_j| ~ exp(-c j)`` for
    the exponential model and the exponent ``a`` in ``|lambda_j| ~ j**a``
    for the power model.  ``window`` holds the first and last index used.
    """

    model: str
    rate: float
    r2: float
    window: tuple[int, int]
    npoints: int
    message: str = ""

    @property
    def ok(self) -> bool:
        return not self.message


def fit_decay(spectrum: Spectrum | np.ndarray, model: str = "exponential",
              window=DECAY_WINDOW) -> DecayFit:
    values = spectrum.values if isinstance(spectrum, Spectrum) else np.asarray(spectrum)
    mags = np.sort(np.abs(values))[::-1]
    j = np.arange(len(mags))
    lo, hi = window
    sel = (mags >= lo) & (mags <= hi) & (j > 0)
    if sel.sum() < MIN_FIT_POINTS:
        return DecayFit(model, math.nan, math.nan, (0, 0), int(sel.sum()),
                        f"only {int(sel.sum())} eigenvalues in [{lo:g}, {hi:g}], need {MIN_FIT_POINTS}")
    if model == "exponential":
        x = j[sel].astype(float)
    elif model == "power":
        x = np.log(j[sel])
    else:
        raise ValueError(f"unknown decay model {model!r}")
    y = np.log(mags[sel])
    slope, intercept = np.polyfit(x, y, 1)
    resid = y - (slope * x + intercept)
    r2 = 1.0 - float(resid @ resid) / float(((y - y.mean()) ** 2).sum())
    rate = -slope if model == "exponential" else slope
    idx = j[sel]
    return DecayFit(model, float(rate), r2, (int(idx[0]), int(idx[-1])), int(sel.sum()))


# ---------------------------------------------------------------------------


def sphere_exact_spectrum(lmax: int) -> Spectrum:
    """Eigenvalues -1/(2l+1), each repeated 2l+1 times, for l = 0..lmax."""
    if lmax < 0:
        raise ValueError("lmax must be >= 0")
    values = np.concatenate([np.full(2 * l + 1, -1.0 / (2 * l + 1)) for l in range(lmax + 1)])
    return Spectrum(values.astype(complex), None, None, np.abs(values),
                    shape_id=f"sphere-exact(lmax={lmax})", grid=(values.size,), constant_index=0)


def zeta_bound(p: float, cutoff: int = 1000) -> float:
    """``(1 - 2**(1-2p)) zeta(2p-1) = sum_l (2l+1)**-(2p-1)`` for ``p > 1``.

    Direct partial sum up to ``cutoff`` plus an Euler-Maclaurin tail.
    """
    if not p > 1:
        raise ValueError(f"series diverges for p <= 1 (got p={p})")
    s = 2.0 * p - 1.0
    L = cutoff
    head = np.sum((2.0 * np.arange(L) + 1.0) ** -s)
    u = 2.0 * L + 1.0
    # tail sum_{l>=L} f(l), f(x) = (2x+1)^-s
    integral = u ** (1 - s) / (2 * (s - 1))
    d1 = -2 * s * u ** (-s - 1)
    d3 = -8 * s * (s + 1) * (s + 2) * u ** (-s - 3)
    tail = integral + 0.5 * u**-s - d1 / 12 + d3 / 720
    # next Euler-Maclaurin term bounds the remainder
    d5 = 32 * s * (s + 1) * (s + 2) * (s + 3) * (s + 4) * u ** (-s - 5)
    assert d5 / 30240 <= 1e-12
    return float(head + tail)


# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class LinftyL1Report:
    ratios: list  # (lambda, |lambda| ||e||_inf / ||e||_L1)
    constant: float


def linfty_l1_constant(spectrum: Spectrum, curve: Curve2D, count: int | None = None,
                       threshold: float = 1e-8, refine: int = 16) -> LinftyL1Report:
    """Largest ``|lambda| ||e||_inf / ||e||_L1`` over eigenpairs with ``|lambda| >= threshold``.

    Norms use the trigonometric interpolant on a ``refine``-times finer grid.
    """
    n = spectrum.vectors.shape[0]
    m = refine * n
    t = 2 * np.pi * np.arange(m) / m
    ds = (2 * np.pi / m) * np.abs(curve.dz(t))
    ratios = []
    for k in range(len(spectrum.values)):
        lam = spectrum.values[k]
        if abs(lam) < threshold:
            continue
        v = spectrum.real_vector(k) if spectrum.is_real[k] else spectrum.vectors[:, k]
        fine = np.abs(trig_resample(v, m))
        ratios.append((complex(lam), float(abs(lam) * fine.max() / (fine @ ds))))
        if count is not None and len(ratios) >= count:
            break
    return LinftyL1Report(ratios, max((r for _, r in ratios), default=math.nan))


# ---------------------------------------------------------------------------


def spectrum_rows(spectrum: Spectrum) -> list[dict]:
    """One row per eigenvalue: index, re, im, alpha, shape-id, N."""
    n = spectrum.grid[0] if len(spectrum.grid) == 1 else "x".join(map(str, spectrum.grid))
    sv = spectrum.singular_values
    return [
        {"index": k, "re": float(v.real), "im": float(v.imag),
         "alpha": float(sv[k]) if k < len(sv) else "", "shape_id": spectrum.shape_id, "N": n}
        for k, v in enumerate(spectrum.values)
    ]


def spectrum_csv(spectrum: Spectrum) -> str:
    buf = io.StringIO()
    writer = csv.DictWriter(buf, fieldnames=["index", "re", "im", "alpha", "shape_id", "N"],
                            lineterminator="\n")
    writer.writeheader()
    for row in spectrum_rows(spectrum):
        writer.writerow({k: (repr(v) if isinstance(v, float) else v) for k, v in row.items()})
    return buf.getvalue()


def report_json(report) -> str:
    payload = report.to_dict() if hasattr(report, "to_dict") else asdict(report)
    return json.dumps(payload, default=lambda o: [o.real, o.imag] if isinstance(o, complex) else str(o))


def spectrum_for(curve: Curve2D, n: int = 256) -> Spectrum:
    return eigenpairs(operators.assemble_dlp_2d(curve, n))

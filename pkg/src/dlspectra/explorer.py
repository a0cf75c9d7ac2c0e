"""Sweeps over curve and ellipsoid families: lambda floors, Schatten sums, cluster sums."""
from __future__ import annotations

import csv
import json
import logging
import math
import os
import warnings
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from itertools import product
from pathlib import Path

import numpy as np

from . import operators
from .analysis import trace_report, zeta_bound
from .geometry import make_curve, make_surface
from .spectral import Spectrum, eigenpairs, harmonic_capture, schatten_sum

log = logging.getLogger(__name__)

SPHERE_FLOOR = -1.0 / 3.0
FLOOR_THRESHOLD = 1e-10
CAPTURE_MIN = 0.5


class ClusterOverlapWarning(UserWarning):
    """Neighbouring eigenvalue clusters are not separated."""


@dataclass(frozen=True)
class Cluster:
    l: int
    total: float
    members: tuple[float, ...]
    separated: bool


def ellipsoid_cluster_sums(spectrum: Spectrum, lmax: int = 2, method: str = "auto") -> list[Cluster]:
    """Sum of the ``2l+1`` eigenvalues of order ``l`` for each ``l <= lmax``.

    ``method="degree"`` groups eigenvectors by harmonic degree: on an
    ellipsoid the double layer eigenfunctions of order ``l`` are traces of
    degree-``l`` polynomials, so exactly ``2l+1`` of them are captured by
    harmonics of degree ``<= l`` but not ``<= l-1``.  ``method="proximity"``
    takes the ``2l+1`` unused eigenvalues nearest ``-1/(2l+1)``, lowest
    order first; it needs no eigenvectors but mis-assigns members once
    clusters of neighbouring orders overlap.  ``auto`` uses degree grouping
    whenever a 3D operator and eigenvectors are attached.

    A :class:`ClusterOverlapWarning` flags proximity clusters whose spread
    exceeds the gap to the nearest unused eigenvalue, and degree clusters
    of the wrong size.
    """
    if method == "auto":
        has_vectors = spectrum.vectors is not None and spectrum.operator is not None
        method = "degree" if has_vectors and spectrum.operator.dim == 3 else "proximity"
    if method == "degree":
        return _clusters_by_degree(spectrum, lmax)
    if method != "proximity":
        raise ValueError(f"unknown cluster method {method!r}")
    vals = spectrum.values.real.copy()
    free = np.ones(vals.size, bool)
    if spectrum.constant_index is not None:
        free[spectrum.constant_index] = False
    out = []
    for l in range(lmax + 1):
        size = 2 * l + 1
        if l == 0 and spectrum.constant_index is not None:
            pick = np.array([spectrum.constant_index])
        else:
            cand = np.flatnonzero(free)
            if cand.size < size:
                warnings.warn(f"not enough eigenvalues for l={l}", ClusterOverlapWarning, stacklevel=2)
                break
            pick = cand[np.argsort(np.abs(vals[cand] + 1.0 / size), kind="stable")[:size]]
            free[pick] = False
        members = np.sort(vals[pick])
        spread = members[-1] - members[0]
        rest = vals[free]
        gap = float(np.min(np.abs(rest[:, None] - members[None, :]))) if rest.size else math.inf
        # a tight cluster next to another eigenvalue is fine; ambiguity needs gap < spread
        separated = bool(gap >= spread)
        if not separated:
            warnings.warn(f"l={l} cluster spread {spread:.3g} exceeds gap {gap:.3g}",
                          ClusterOverlapWarning, stacklevel=3)
        out.append(Cluster(l, float(members.sum()), tuple(float(m) for m in members), separated))
    return out


def _clusters_by_degree(spectrum: Spectrum, lmax: int, level: float = 0.9) -> list[Cluster]:
    op = spectrum.operator
    caps = [harmonic_capture(op, spectrum.vectors, d) for d in range(lmax + 1)]
    out = []
    for l in range(lmax + 1):
        size = 2 * l + 1
        gain = caps[l] - (caps[l - 1] if l else 0.0)
        pick = np.flatnonzero((caps[l] >= level) & ((caps[l - 1] < level) if l else True))
        exact = pick.size == size
        if not exact:
            warnings.warn(f"l={l}: {pick.size} eigenvectors of degree {l}, expected {size}",
                          ClusterOverlapWarning, stacklevel=3)
            pick = np.argsort(-gain, kind="stable")[:size]
        members = np.sort(spectrum.values.real[pick])
        out.append(Cluster(l, float(members.sum()), tuple(float(m) for m in members), exact))
    return out


def lambda_floor(spectrum: Spectrum, threshold: float = FLOOR_THRESHOLD) -> float | None:
    """Smallest real eigenvalue other than the constant-eigenvector one.

    ``None`` when nothing but the constant mode exceeds ``threshold`` in
    modulus (the circle).
    """
    if spectrum.constant_index is None:
        raise ValueError(f"{spectrum.shape_id}: constant eigenvector not found; grid too coarse?")
    mask = spectrum.is_real & (np.abs(spectrum.values) > threshold)
    mask[spectrum.constant_index] = False
    return float(spectrum.values.real[mask].min()) if mask.any() else None


def lambda_ceiling(spectrum: Spectrum, resolved: np.ndarray | None = None) -> float | None:
    """Largest real eigenvalue, restricted to ``resolved`` eigenpairs when given."""
    mask = spectrum.is_real.copy()
    if spectrum.constant_index is not None:
        mask[spectrum.constant_index] = False
    if resolved is not None:
        mask &= resolved
    return float(spectrum.values.real[mask].max()) if mask.any() else None


# ---------------------------------------------------------------------------
# families


@dataclass(frozen=True)
class EllipsoidFamily:
    """Ellipsoids with axes ``(1, b, c)`` over the product grid ``bs x cs``."""

    bs: tuple[float, ...] = (1.0, 1.1, 1.25, 1.5)
    cs: tuple[float, ...] = (1.0, 1.1, 1.25, 1.5)
    n_theta: int = 32
    n_phi: int = 64
    dim: int = field(default=3, init=False)

    def points(self) -> list[dict]:
        return [{"a": 1.0, "b": float(b), "c": float(c)} for b, c in product(self.bs, self.cs)]

    @property
    def grid(self) -> tuple[int, int]:
        return (self.n_theta, self.n_phi)


@dataclass(frozen=True)
class CurveFamily:
    """Explicit list of curve parameter sets of one kind, e.g. ellipses over ``R``."""

    kind: str = "ellipse"
    params: tuple[dict, ...] = tuple({"c": 2.0, "R": r} for r in (0.25, 0.5, 1.0, 2.0))
    n: int = 256
    dim: int = field(default=2, init=False)

    def points(self) -> list[dict]:
        return [dict(p) for p in self.params]

    @property
    def grid(self) -> tuple[int]:
        return (self.n,)


def is_sphere_point(params: dict) -> bool:
    axes = [params[k] for k in ("a", "b", "c") if k in params]
    return len(axes) == 3 and max(axes) - min(axes) < 1e-12


@dataclass(frozen=True)
class SweepRow:
    key: str
    params: dict
    grid: tuple[int, ...]
    lambda_floor: float | None = None
    lambda_ceiling: float | None = None
    defect: float | None = None
    schatten: float | None = None
    cluster_sums: tuple[float, ...] = ()
    status: str = "ok"
    message: str = ""


def row_key(params: dict, grid) -> str:
    return ";".join(f"{k}={params[k]!r}" for k in sorted(params)) + "|" + "x".join(map(str, grid))


def evaluate_point(family, params: dict, p: float = 2.0) -> SweepRow:
    """Compute one sweep row; any failure is recorded in the row, not raised."""
    key = row_key(params, family.grid)
    try:
        if family.dim == 3:
            surface = make_surface("ellipsoid", **params)
            op = operators.assemble_dlp_3d(surface, *family.grid)
            spec = eigenpairs(op)
            resolved = harmonic_capture(op, spec.vectors) >= CAPTURE_MIN
            with warnings.catch_warnings():
                warnings.simplefilter("ignore", ClusterOverlapWarning)
                clusters = ellipsoid_cluster_sums(spec, 2)
            return SweepRow(key, params, family.grid, lambda_floor(spec), lambda_ceiling(spec, resolved),
                            schatten=schatten_sum(spec.singular_values, 2 * p),
                            cluster_sums=tuple(c.total for c in clusters))
        curve = make_curve(family.kind, **params)
        spec = eigenpairs(operators.assemble_dlp_2d(curve, family.n))
        return SweepRow(key, params, family.grid, lambda_floor(spec), lambda_ceiling(spec),
                        defect=trace_report(curve, family.n).defect,
                        schatten=schatten_sum(spec.singular_values, 2 * p))
    except Exception as exc:  # noqa: BLE001 - recorded per row, sweep continues
        log.warning("sweep point %s failed: %s", key, exc)
        return SweepRow(key, params, family.grid, status="error", message=f"{type(exc).__name__}: {exc}")


# ---------------------------------------------------------------------------
# ledger


LEDGER_FIELDS = ["key", "params", "grid", "lambda_floor", "lambda_ceiling", "defect", "schatten",
                 "cluster_sums", "status", "message"]


def _fmt(x) -> str:
    return "" if x is None else repr(float(x))


def _parse(x: str):
    return None if x == "" else float(x)


def row_to_record(row: SweepRow) -> dict:
    return {
        "key": row.key,
        "params": json.dumps(row.params, sort_keys=True),
        "grid": "x".join(map(str, row.grid)),
        "lambda_floor": _fmt(row.lambda_floor),
        "lambda_ceiling": _fmt(row.lambda_ceiling),
        "defect": _fmt(row.defect),
        "schatten": _fmt(row.schatten),
        "cluster_sums": " ".join(repr(s) for s in row.cluster_sums),
        "status": row.status,
        "message": row.message,
    }


def record_to_row(rec: dict) -> SweepRow:
    return SweepRow(
        rec["key"], json.loads(rec["params"]), tuple(int(g) for g in rec["grid"].split("x")),
        _parse(rec["lambda_floor"]), _parse(rec["lambda_ceiling"]), _parse(rec["defect"]),
        _parse(rec["schatten"]), tuple(float(s) for s in rec["cluster_sums"].split()),
        rec["status"], rec["message"],
    )


def read_ledger(path) -> dict[str, SweepRow]:
    path = Path(path)
    if not path.exists():
        return {}
    with path.open(newline="") as fh:
        return {rec["key"]: record_to_row(rec) for rec in csv.DictReader(fh)}


def _append(path: Path, row: SweepRow) -> None:
    path.parent.mkdir(parents=True, exist_ok=True)
    new = not path.exists() or path.stat().st_size == 0
    with path.open("a", newline="") as fh:
        w = csv.DictWriter(fh, fieldnames=LEDGER_FIELDS, lineterminator="\n")
        if new:
            w.writeheader()
        w.writerow(row_to_record(row))
        fh.flush()
        os.fsync(fh.fileno())


def write_table(rows, path) -> None:
    """Write ``rows`` as a ledger in one atomic replace."""
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    tmp = path.with_name(path.name + ".tmp")
    with tmp.open("w", newline="") as fh:
        w = csv.DictWriter(fh, fieldnames=LEDGER_FIELDS, lineterminator="\n")
        w.writeheader()
        for r in rows:
            w.writerow(row_to_record(r))
    os.replace(tmp, path)


# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class SweepResult:
    rows: list
    summary: dict


def sweep(family, p: float = 2.0, ledger=None, workers: int = 1) -> SweepResult:
    """Evaluate every shape of ``family``; resumable through a CSV ``ledger``.

    Rows already present in the ledger (same parameters and grid) are reused.
    New rows are appended as they finish; at the end the ledger is rewritten
    in family order so that reruns give identical files.
    """
    if not p > 1:
        raise ValueError(f"Schatten exponent p must exceed 1, got {p}")
    points = family.points()
    done = read_ledger(ledger) if ledger else {}
    todo = [pt for pt in points if row_key(pt, family.grid) not in done]
    path = Path(ledger) if ledger else None
    if workers > 1 and len(todo) > 1:
        with ProcessPoolExecutor(max_workers=workers) as pool:
            futures = [pool.submit(evaluate_point, family, pt, p) for pt in todo]
            for fut in futures:
                row = fut.result()
                done[row.key] = row
                if path:
                    _append(path, row)
    else:
        for pt in todo:
            row = evaluate_point(family, pt, p)
            done[row.key] = row
            if path:
                _append(path, row)
    rows = [done[row_key(pt, family.grid)] for pt in points]
    if path:
        write_table(rows, path)
    return SweepResult(rows, summarize(rows, family, p))


def summarize(rows, family, p: float = 2.0) -> dict:
    ok = [r for r in rows if r.status == "ok"]
    summary: dict = {"zeta_target": zeta_bound(p) if family.dim == 3 else None,
                     "failed": [r.key for r in rows if r.status != "ok"]}
    floors = [r for r in ok if r.lambda_floor is not None]
    best = max(floors, key=lambda r: r.lambda_floor, default=None)
    low = min((r for r in ok if r.schatten is not None), key=lambda r: r.schatten, default=None)
    summary["argmax_lambda_floor"] = {"params": best.params, "value": best.lambda_floor} if best else None
    summary["min_schatten"] = {"params": low.params, "value": low.schatten} if low else None
    flags = {}
    if family.dim == 3:
        sphere = [r for r in ok if is_sphere_point(r.params)]
        flags["argmax_floor_at_sphere"] = bool(best and is_sphere_point(best.params))
        flags["min_schatten_at_sphere"] = bool(low and is_sphere_point(low.params))
        flags["min_schatten_within_5pct"] = bool(low and abs(low.schatten / summary["zeta_target"] - 1) <= 0.05)
        flags["sphere_floor_within_2e-2"] = bool(sphere and abs(sphere[0].lambda_floor - SPHERE_FLOOR) <= 2e-2)
        flags["non_sphere_below_third"] = all(r.lambda_floor < SPHERE_FLOOR for r in floors
                                              if not is_sphere_point(r.params))
    else:
        defects = [r.defect for r in ok]
        flags["defect_strictly_decreasing"] = bool(len(defects) > 1 and np.all(np.diff(defects) < 0))
        flags["defect_nonnegative"] = all(d >= -1e-9 for d in defects)
    summary["pass_flags"] = flags
    return summary


def write_summary(summary: dict, path) -> None:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    tmp = path.with_name(path.name + ".tmp")
    tmp.write_text(json.dumps(summary, indent=2, sort_keys=True) + "\n")
    os.replace(tmp, path)


# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class PositiveSearch:
    """Resolved eigenvalues above the threshold on one spheroid.

    ``reliable`` is false when some resolved eigenvalue other than the
    constant mode has modulus above 1, which the operator cannot have; the
    grid is then too coarse for the shape and ``values`` are not evidence.
    """

    axes: tuple[float, float, float]
    grid: tuple[int, int]
    values: tuple[float, ...]
    reliable: bool


def positive_eigenvalue_search(cs=(0.1, 0.2, 0.3, 0.5, 0.7), n_theta: int = 32, n_phi: int = 64,
                               threshold: float = 1e-3, axes=None) -> list[PositiveSearch]:
    """Eigenvalues above ``threshold`` on spheroids ``(1, 1, c)``.

    Only eigenvectors resolved by the grid (harmonic capture at least 0.5)
    count; unresolved modes of the product rule carry small positive
    eigenvalues of no geometric meaning.  ``axes`` overrides the spheroid
    family with explicit axis triples.
    """
    shapes = axes if axes is not None else [(1.0, 1.0, c) for c in cs]
    out = []
    for a, b, c in shapes:
        op = operators.assemble_dlp_3d(make_surface("ellipsoid", a=a, b=b, c=c), n_theta, n_phi)
        spec = eigenpairs(op, with_singular_values=False)
        resolved = harmonic_capture(op, spec.vectors) >= CAPTURE_MIN
        if spec.constant_index is not None:
            resolved[spec.constant_index] = False
        vals = spec.values[resolved]
        pos = np.sort(vals.real[(np.abs(vals.imag) <= 1e-8) & (vals.real > threshold)])[::-1]
        reliable = bool(np.all(np.abs(vals) <= 1 + 1e-6))
        out.append(PositiveSearch((float(a), float(b), float(c)), (n_theta, n_phi),
                                  tuple(float(v) for v in pos), reliable))
    return out


def hilbert_schmidt_growth(surface, grids=((16, 32), (24, 48), (32, 64))) -> list[tuple[tuple[int, int], float]]:
    """``sum alpha_j**2`` of the 3D matrix across grids; it keeps growing with resolution."""
    out = []
    for g in grids:
        op = operators.assemble_dlp_3d(surface, *g)
        out.append((tuple(g), float(np.sum(op.symmetrized**2))))
    return out

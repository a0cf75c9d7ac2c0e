"""Closed parametrized curves in the plane and ellipsoidal surfaces in space.

Curves are stored as complex-valued 2*pi-periodic maps ``z(t) = x(t) + i y(t)``
with closed-form first and second derivatives.  The same formulas accept
complex ``t``, which gives the analytic continuation used by the
eigenfunction tools.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Mapping, NamedTuple

import numpy as np
import shapely

VALIDATION_POINTS = 4096


class GeometryError(ValueError):
    """Raised when shape parameters do not describe an admissible boundary."""


class Frame(NamedTuple):
    point: np.ndarray
    normal: np.ndarray
    speed: np.ndarray
    curvature: np.ndarray


class SurfaceFrame(NamedTuple):
    point: np.ndarray
    normal: np.ndarray
    area_element: np.ndarray


@dataclass(frozen=True, eq=False)
class Curve2D:
    """A regular, simple, counterclockwise closed curve.

    ``kind`` is one of ``circle``, ``ellipse`` or ``fourier``.  Internally
    every shape is a finite Fourier sum ``sum_k a_k exp(i k t)``; the circle
    and ellipse keep their tags so that callers can report them by name.
    """

    kind: str
    params: Mapping[str, object]
    modes: np.ndarray = field(repr=False)
    coeffs: np.ndarray = field(repr=False)

    # analytic continuation (complex t is allowed everywhere below)
    def z(self, t) -> np.ndarray:
        t = np.asarray(t)
        return np.exp(1j * np.multiply.outer(t, self.modes)) @ self.coeffs

    def dz(self, t) -> np.ndarray:
        t = np.asarray(t)
        return np.exp(1j * np.multiply.outer(t, self.modes)) @ (1j * self.modes * self.coeffs)

    def d2z(self, t) -> np.ndarray:
        t = np.asarray(t)
        return np.exp(1j * np.multiply.outer(t, self.modes)) @ (-(self.modes**2) * self.coeffs)

    def zstar(self, t) -> np.ndarray:
        """Continuation of ``conj(z(t))`` from the real axis."""
        t = np.asarray(t)
        return np.exp(-1j * np.multiply.outer(t, self.modes)) @ np.conj(self.coeffs)

    def dzstar(self, t) -> np.ndarray:
        t = np.asarray(t)
        return np.exp(-1j * np.multiply.outer(t, self.modes)) @ (-1j * self.modes * np.conj(self.coeffs))

    @property
    def shape_id(self) -> str:
        if self.kind == "circle":
            return f"circle(R={self.params['R']:g})"
        if self.kind == "ellipse":
            return f"ellipse(c={self.params['c']:g},R={self.params['R']:g})"
        return f"fourier({len(self.modes)} modes)"

    def scaled(self, factor: float) -> "Curve2D":
        if factor <= 0:
            raise GeometryError(f"scale factor must be positive, got {factor}")
        if self.kind == "circle":
            return make_curve("circle", R=self.params["R"] * factor)
        if self.kind == "ellipse":
            return make_curve("ellipse", c=self.params["c"] * factor, R=self.params["R"])
        return make_curve("fourier", coefficients=dict(zip(self.modes.tolist(), self.coeffs * factor)))

    def diameter(self, n: int = 512) -> float:
        p = self.z(2 * np.pi * np.arange(n) / n)
        return float(np.abs(p[:, None] - p[None, :]).max())

    def length(self, n: int = 512) -> float:
        return float(2 * np.pi / n * np.abs(self.dz(2 * np.pi * np.arange(n) / n)).sum())


def _fourier_from_mapping(coefficients) -> tuple[np.ndarray, np.ndarray]:
    if isinstance(coefficients, Mapping):
        items = sorted((int(k), complex(v)) for k, v in coefficients.items())
    else:
        items = [(k + 1, complex(v)) for k, v in enumerate(coefficients)]
    items = [(k, v) for k, v in items if v != 0]
    if not items:
        raise GeometryError("fourier curve needs at least one nonzero coefficient")
    modes = np.array([k for k, _ in items], dtype=float)
    coeffs = np.array([v for _, v in items], dtype=complex)
    return modes, coeffs


def _validate(curve: Curve2D) -> None:
    t = 2 * np.pi * np.arange(VALIDATION_POINTS) / VALIDATION_POINTS
    speed = np.abs(curve.dz(t))
    scale = np.abs(curve.z(t)).max()
    k = int(np.argmin(speed))
    if speed[k] <= 1e-10 * max(scale, 1e-300):
        raise GeometryError(f"curve is not regular: |q'(t)| = {speed[k]:.3e} at t = {t[k]:.6f}")
    p = curve.z(t)
    area = 0.5 * np.sum(p.real * np.roll(p.imag, -1) - np.roll(p.real, -1) * p.imag)
    if area <= 0:
        raise GeometryError(f"curve is not counterclockwise: signed area {area:.6g}")
    ring = shapely.LinearRing(np.column_stack([p.real, p.imag]))
    if not ring.is_simple:
        raise GeometryError(f"curve self-intersects (parameters {dict(curve.params)})")


def make_curve(kind: str, **params) -> Curve2D:
    """Build a validated curve.

    ``make_curve("circle", R=1.0)``,
    ``make_curve("ellipse", c=2.0, R=0.5)`` for
    ``x = c/2 cosh R cos t``, ``y = c/2 sinh R sin t``,
    ``make_curve("fourier", coefficients={1: 1.0, 3: 0.1j})``.
    """
    if kind == "circle":
        R = float(params["R"])
        if not R > 0:
            raise GeometryError(f"circle radius must be positive, got R={R}")
        modes, coeffs = np.array([1.0]), np.array([R + 0j])
        stored = {"R": R}
    elif kind == "ellipse":
        c, R = float(params["c"]), float(params["R"])
        if not c > 0:
            raise GeometryError(f"ellipse focal parameter must be positive, got c={c}")
        if not R > 0:
            raise GeometryError(f"ellipse parameter must be positive, got R={R}")
        # a cos t + i b sin t = (a+b)/2 e^{it} + (a-b)/2 e^{-it}
        a, b = 0.5 * c * math.cosh(R), 0.5 * c * math.sinh(R)
        modes = np.array([-1.0, 1.0])
        coeffs = np.array([0.5 * (a - b), 0.5 * (a + b)], dtype=complex)
        stored = {"c": c, "R": R}
    elif kind == "fourier":
        modes, coeffs = _fourier_from_mapping(params["coefficients"])
        stored = {"coefficients": dict(zip(modes.astype(int).tolist(), coeffs.tolist()))}
    else:
        raise GeometryError(f"unknown curve kind {kind!r}")
    curve = Curve2D(kind, stored, modes, coeffs)
    if kind == "fourier":
        _validate(curve)
    return curve


def ellipse_semi_axes(curve: Curve2D) -> tuple[float, float]:
    if curve.kind != "ellipse":
        raise GeometryError("not an ellipse")
    c, R = curve.params["c"], curve.params["R"]
    return 0.5 * c * math.cosh(R), 0.5 * c * math.sinh(R)


def fourier_decay_curve(order: int = 4, amplitude: float = 0.2, kmax: int = 255) -> Curve2D:
    """Unit circle perturbed by modes ``+-k`` (2 <= k <= kmax) of size ``k**-(order+1)``.

    The negative modes alternate in sign so the perturbation is not
    one-sided.  Used as a finite-smoothness stand-in when probing how
    boundary regularity controls eigenvalue decay.
    """
    ks = np.arange(2, kmax + 1)
    mag = amplitude * ks ** -(order + 1.0)
    coeffs = {1: 1.0}
    coeffs.update(dict(zip(ks.tolist(), mag)))
    coeffs.update(dict(zip((-ks).tolist(), mag * (-1.0) ** ks)))
    return make_curve("fourier", coefficients=coeffs)


def curve_frame(curve: Curve2D, t) -> Frame:
    """Point, outward unit normal, speed |q'| and signed curvature at ``t``."""
    t = np.asarray(t, dtype=float)
    p, d1, d2 = curve.z(t), curve.dz(t), curve.d2z(t)
    speed = np.abs(d1)
    normal = -1j * d1 / speed
    curvature = np.imag(np.conj(d1) * d2) / speed**3
    return Frame(
        np.stack([p.real, p.imag], axis=-1),
        np.stack([normal.real, normal.imag], axis=-1),
        speed,
        curvature,
    )


# ---------------------------------------------------------------------------
# surfaces


@dataclass(frozen=True)
class Surface3D:
    kind: str
    axes: tuple[float, float, float]

    @property
    def shape_id(self) -> str:
        a, b, c = self.axes
        return f"{self.kind}({a:g},{b:g},{c:g})"


def make_surface(kind: str, **params) -> Surface3D:
    """``make_surface("sphere", R=1)`` or ``make_surface("ellipsoid", a=1, b=1.1, c=1.2)``."""
    if kind == "sphere":
        axes = (float(params["R"]),) * 3
    elif kind == "ellipsoid":
        axes = (float(params["a"]), float(params["b"]), float(params["c"]))
    else:
        raise GeometryError(f"unknown surface kind {kind!r}")
    for name, v in zip("abc", axes):
        if not v > 0:
            raise GeometryError(f"semi-axis {name} must be positive, got {v}")
    return Surface3D(kind, axes)


def surface_frame(surface: Surface3D, theta, phi) -> SurfaceFrame:
    """Point, outward unit normal and area element ``|r_theta x r_phi|``."""
    a, b, c = surface.axes
    theta, phi = np.broadcast_arrays(np.asarray(theta, float), np.asarray(phi, float))
    st, ct = np.sin(theta), np.cos(theta)
    cp, sp = np.cos(phi), np.sin(phi)
    point = np.stack([a * st * cp, b * st * sp, c * ct], axis=-1)
    grad = np.stack([st * cp / a, st * sp / b, ct / c], axis=-1)
    normal = grad / np.linalg.norm(grad, axis=-1, keepdims=True)
    return SurfaceFrame(point, normal, st * _area_factor(surface, st, ct, cp, sp))


def _area_factor(surface, st, ct, cp, sp):
    # |r_theta x r_phi| / sin(theta), smooth up to the poles
    a, b, c = surface.axes
    return np.sqrt((b * c * st * cp) ** 2 + (a * c * st * sp) ** 2 + (a * b * ct) ** 2)


class SurfaceGrid(NamedTuple):
    theta: np.ndarray
    phi: np.ndarray
    points: np.ndarray
    normals: np.ndarray
    weights: np.ndarray
    shape: tuple[int, int]


def surface_grid(surface: Surface3D, n_theta: int, n_phi: int) -> SurfaceGrid:
    """Gauss-Legendre nodes in cos(theta) times uniform nodes in phi, flattened theta-major."""
    x, wx = np.polynomial.legendre.leggauss(n_theta)
    x, wx = x[::-1], wx[::-1]  # north pole first
    theta = np.arccos(x)
    phi = 2 * np.pi * np.arange(n_phi) / n_phi
    TH, PH = np.meshgrid(theta, phi, indexing="ij")
    frame = surface_frame(surface, TH, PH)
    factor = _area_factor(surface, np.sin(TH), np.cos(TH), np.cos(PH), np.sin(PH))
    weights = wx[:, None] * (2 * np.pi / n_phi) * factor
    return SurfaceGrid(
        TH.ravel(), PH.ravel(),
        frame.point.reshape(-1, 3), frame.normal.reshape(-1, 3),
        weights.ravel(), (n_theta, n_phi),
    )


def surface_area(surface: Surface3D, n_theta: int = 32, n_phi: int = 64) -> float:
    return float(surface_grid(surface, n_theta, n_phi).weights.sum())


# ---------------------------------------------------------------------------
# key=value shape configs


def parse_config(text: str) -> dict[str, str]:
    """Parse flat ``key=value`` lines; ``#`` starts a comment."""
    out = {}
    for lineno, raw in enumerate(text.splitlines(), 1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise GeometryError(f"line {lineno}: expected key=value, got {raw!r}")
        key, value = line.split("=", 1)
        out[key.strip()] = value.strip()
    return out


def shape_from_config(cfg: Mapping[str, str]) -> Curve2D | Surface3D:
    """Build a curve or surface from parsed config values.

    Fourier curves take ``coeffs=re,im,re,im,...`` and an optional
    ``modes=k1,k2,...`` (default 1, 2, ...).
    """
    kind = cfg.get("shape")
    try:
        if kind == "circle":
            return make_curve("circle", R=float(cfg.get("R", cfg.get("radius", 1.0))))
        if kind == "ellipse":
            return make_curve("ellipse", c=float(cfg["c"]), R=float(cfg["R"]))
        if kind == "fourier":
            nums = [float(v) for v in cfg["coeffs"].split(",") if v.strip()]
            if len(nums) % 2:
                raise GeometryError("fourier coeffs must be re,im pairs")
            values = [complex(nums[i], nums[i + 1]) for i in range(0, len(nums), 2)]
            if "modes" in cfg:
                modes = [int(v) for v in cfg["modes"].split(",")]
                if len(modes) != len(values):
                    raise GeometryError("modes and coeffs lengths differ")
            else:
                modes = list(range(1, len(values) + 1))
            return make_curve("fourier", coefficients=dict(zip(modes, values)))
        if kind == "sphere":
            return make_surface("sphere", R=float(cfg.get("R", cfg.get("radius", 1.0))))
        if kind == "ellipsoid":
            return make_surface("ellipsoid", a=float(cfg["a"]), b=float(cfg["b"]), c=float(cfg["c"]))
    except KeyError as exc:
        raise GeometryError(f"shape {kind!r} is missing parameter {exc.args[0]}") from None
    except ValueError as exc:
        if isinstance(exc, GeometryError):
            raise
        raise GeometryError(str(exc)) from None
    raise GeometryError(f"unknown shape {kind!r}")

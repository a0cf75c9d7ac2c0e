"""Nystrom discretizations of the Laplace double layer operator.

Kernel conventions (with ``nu_y`` the outward normal at the integration point)::

    2D:  (K psi)(x) = 1/pi     int psi(y) d/dnu_y log(1/|x-y|) ds_y
    3D:  (K psi)(x) = 1/(2 pi) int psi(y) d/dnu_y 1/|x-y|      dS_y

With this normalization ``K 1 = -1`` on any closed boundary.
"""
from __future__ import annotations

import warnings
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from .geometry import Curve2D, Surface3D, surface_grid


class DiameterWarning(UserWarning):
    """Single layer applied on a curve of diameter >= 1, where S1 > 0 can fail."""


@dataclass(frozen=True, eq=False)
class OperatorMatrix:
    """Dense Nystrom matrix ``A`` acting on nodal values.

    ``weights`` are the quadrature weights (``h |q'(t_j)|`` in 2D).  The
    symmetrized twin ``D^1/2 A D^-1/2`` represents the operator isometrically
    in L2 of the boundary and is what singular values are taken from.
    """

    matrix: np.ndarray
    nodes: np.ndarray
    weights: np.ndarray
    dim: int
    shape: Curve2D | Surface3D | None = None
    grid: tuple[int, ...] = ()
    meta: dict = field(default_factory=dict)

    @property
    def n(self) -> int:
        return self.matrix.shape[0]

    @property
    def symmetrized(self) -> np.ndarray:
        s = np.sqrt(self.weights)
        return s[:, None] * self.matrix / s[None, :]

    @property
    def shape_id(self) -> str:
        return self.shape.shape_id if self.shape is not None else "matrix"

    @classmethod
    def from_array(cls, a, weights=None) -> "OperatorMatrix":
        """Wrap a plain square array (unit weights unless given)."""
        a = np.asarray(a, dtype=float)
        if a.ndim != 2 or a.shape[0] != a.shape[1]:
            raise ValueError(f"expected a square matrix, got shape {a.shape}")
        w = np.ones(a.shape[0]) if weights is None else np.asarray(weights, float)
        return cls(a, np.arange(a.shape[0], dtype=float), w, dim=0, grid=(a.shape[0],))


def nodes_2d(n: int) -> np.ndarray:
    return 2 * np.pi * np.arange(n) / n


def dlp_kernel_2d(curve: Curve2D, s, t) -> np.ndarray:
    """Kernel value per unit arc length for target ``q(s)`` and source ``q(t)``.

    Off the diagonal this is ``Im(q'(t) / (q(s) - q(t))) / (pi |q'(t)|)``;
    at ``s == t`` it is the limit ``-curvature(t) / (2 pi)``.
    """
    s, t = np.broadcast_arrays(np.asarray(s, float), np.asarray(t, float))
    zs, zt, dt = curve.z(s), curve.z(t), curve.dz(t)
    speed = np.abs(dt)
    diff = zs - zt
    same = np.isclose(np.mod(s - t + np.pi, 2 * np.pi) - np.pi, 0.0, rtol=0, atol=1e-14)
    diff = np.where(same, 1.0, diff)
    value = np.imag(dt / diff) / (np.pi * speed)
    kappa = np.imag(np.conj(dt) * curve.d2z(t)) / speed**3
    return np.where(same, -kappa / (2 * np.pi), value)


def assemble_dlp_2d(curve: Curve2D, n: int) -> OperatorMatrix:
    """Trapezoid-rule Nystrom matrix on ``n`` equispaced parameter nodes.

    The kernel is smooth for smooth curves, so the plain periodic trapezoid
    rule already converges spectrally.
    """
    if n < 16 or n % 2:
        raise ValueError(f"node count must be even and >= 16, got {n}")
    t = nodes_2d(n)
    h = 2 * np.pi / n
    z, dz, d2z = curve.z(t), curve.dz(t), curve.d2z(t)
    diff = z[:, None] - z[None, :]
    np.fill_diagonal(diff, 1.0)
    a = (h / np.pi) * np.imag(dz[None, :] / diff)
    # curvature * speed = Im(conj(q') q'') / |q'|^2
    np.fill_diagonal(a, -(h / (2 * np.pi)) * np.imag(np.conj(dz) * d2z) / np.abs(dz) ** 2)
    return OperatorMatrix(a, t, h * np.abs(dz), dim=2, shape=curve, grid=(n,))


def kress_log_weights(n: int) -> np.ndarray:
    """Matrix ``R[i, j]`` with ``sum_j R[i, j] f(t_j) ~ int_0^2pi log(4 sin^2((t_i - t)/2)) f(t) dt``.

    Exact for trigonometric polynomials of degree < n/2 (with the Nyquist
    mode split evenly), hence spectrally accurate for smooth ``f``.
    """
    t = nodes_2d(n)
    half = n // 2
    m = np.arange(1, half)
    col = -(4 * np.pi / n) * (np.cos(np.outer(t, m)) @ (1.0 / m)) - (4 * np.pi / n**2) * np.cos(half * t)
    idx = (np.arange(n)[:, None] - np.arange(n)[None, :]) % n
    return col[idx]


def slp_matrix_2d(curve: Curve2D, n: int) -> np.ndarray:
    """Nystrom matrix of ``(S psi)(x) = 1/pi int log(1/|x-y|) psi(y) ds_y``.

    Uses the splitting ``log|q(s)-q(t)| = 1/2 log(4 sin^2((s-t)/2)) + smooth``.
    """
    t = nodes_2d(n)
    h = 2 * np.pi / n
    z, dz = curve.z(t), curve.dz(t)
    speed = np.abs(dz)
    tau = t[:, None] - t[None, :]
    s2 = 4 * np.sin(tau / 2) ** 2
    d2 = np.abs(z[:, None] - z[None, :]) ** 2
    np.fill_diagonal(s2, 1.0)
    np.fill_diagonal(d2, 1.0)
    smooth = -0.5 * np.log(d2 / s2)
    np.fill_diagonal(smooth, -np.log(speed))
    return (-0.5 * kress_log_weights(n) + h * smooth) * speed[None, :] / np.pi


def apply_slp_2d(curve: Curve2D, density) -> np.ndarray:
    """Single layer potential of nodal ``density`` evaluated at the nodes."""
    density = np.asarray(density)
    if curve.diameter() >= 1:
        warnings.warn(
            f"curve diameter {curve.diameter():.3f} >= 1; S1 > 0 is not guaranteed",
            DiameterWarning, stacklevel=2,
        )
    return slp_matrix_2d(curve, density.shape[0]) @ density


def rescale_to_diameter(curve: Curve2D, diameter: float = 0.9) -> Curve2D:
    return curve.scaled(diameter / curve.diameter())


def assemble_dlp_3d(surface: Surface3D, n_theta: int, n_phi: int) -> OperatorMatrix:
    """Product-rule Nystrom matrix with a row-sum (Gauss identity) diagonal.

    Off-diagonal entries are ``w_j (x_i - y_j).n_j / (2 pi |x_i - y_j|^3)``;
    the diagonal makes every row sum exactly ``-1``.
    """
    if n_theta < 16 or n_phi < 16:
        raise ValueError(f"grid {n_theta}x{n_phi} is too small (need n_theta, n_phi >= 16)")
    if n_phi < 2 * n_theta:
        warnings.warn(f"n_phi={n_phi} < 2*n_theta under-resolves the azimuth", stacklevel=2)
    grid = surface_grid(surface, n_theta, n_phi)
    if np.any(grid.weights <= 0):
        raise ValueError("degenerate quadrature weights")
    p, nrm, w = grid.points, grid.normals, grid.weights
    n = p.shape[0]
    a = np.empty((n, n))
    # row blocks keep the (block, n, 3) temporary small
    step = 512
    for start in range(0, n, step):
        stop = min(start + step, n)
        d = p[start:stop, None, :] - p[None, :, :]
        r2 = np.einsum("ijk,ijk->ij", d, d)
        dn = np.einsum("ijk,jk->ij", d, nrm)
        rows = np.arange(start, stop)
        r2[rows - start, rows] = 1.0
        blk = dn / (r2 * np.sqrt(r2)) * (w[None, :] / (2 * np.pi))
        blk[rows - start, rows] = 0.0
        a[start:stop] = blk
    a[np.diag_indices(n)] = -1.0 - a.sum(axis=1)
    nodes = np.column_stack([grid.theta, grid.phi])
    return OperatorMatrix(a, nodes, w, dim=3, shape=surface, grid=(n_theta, n_phi))


# ---------------------------------------------------------------------------
# export


def save_matrix_binary(op: OperatorMatrix | np.ndarray, path) -> None:
    """Write ``N`` as one int64 followed by the row-major float64 entries."""
    a = op.matrix if isinstance(op, OperatorMatrix) else np.asarray(op)
    with open(path, "wb") as fh:
        np.array([a.shape[0]], dtype="<i8").tofile(fh)
        np.ascontiguousarray(a, dtype="<f8").tofile(fh)


def load_matrix_binary(path) -> np.ndarray:
    with open(path, "rb") as fh:
        n = int(np.fromfile(fh, dtype="<i8", count=1)[0])
        data = np.fromfile(fh, dtype="<f8")
    if data.size != n * n:
        raise ValueError(f"{path}: expected {n * n} entries, found {data.size}")
    return data.reshape(n, n)


def save_matrix_csv(op: OperatorMatrix | np.ndarray, path) -> None:
    a = op.matrix if isinstance(op, OperatorMatrix) else np.asarray(op)
    np.savetxt(Path(path), a, delimiter=",", fmt="%.17g")

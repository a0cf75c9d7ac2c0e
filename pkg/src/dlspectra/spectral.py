"""Dense eigen- and singular value computations with explicit residual checks."""
from __future__ import annotations

import json
import logging
from dataclasses import dataclass, field

import numpy as np
import scipy.linalg
import scipy.special

from .operators import OperatorMatrix

log = logging.getLogger(__name__)

RESIDUAL_TOL = 1e-10
REAL_TOL = 1e-8
CONSTANT_CV_TOL = 1e-6


@dataclass(frozen=True, eq=False)
class Spectrum:
    """Eigenvalues ordered by decreasing modulus, plus singular values.

    ``vectors[:, k]`` is the unit-norm right eigenvector of ``values[k]``.
    ``constant_index`` marks the eigenpair whose eigenvector is constant
    (the eigenvalue -1 of closed boundaries), or ``None``.
    """

    values: np.ndarray
    vectors: np.ndarray | None
    residuals: np.ndarray | None
    singular_values: np.ndarray
    shape_id: str = "matrix"
    grid: tuple[int, ...] = ()
    constant_index: int | None = None
    converged: bool = True
    operator: OperatorMatrix | None = field(default=None, repr=False)

    @property
    def is_real(self) -> np.ndarray:
        return np.abs(self.values.imag) <= REAL_TOL * np.maximum(1.0, np.abs(self.values))

    @property
    def residual_max(self) -> float:
        return float(np.max(self.residuals)) if self.residuals is not None else 0.0

    def real_vector(self, k: int) -> np.ndarray:
        """Eigenvector ``k`` rotated to be real, with its largest entry positive."""
        v = self.vectors[:, k]
        j = int(np.argmax(np.abs(v)))
        v = v * (abs(v[j]) / v[j])
        v = v.real
        return v / np.linalg.norm(v)

    def to_json(self) -> str:
        return json.dumps({
            "shape": self.shape_id,
            "N": list(self.grid) if len(self.grid) > 1 else (self.grid[0] if self.grid else len(self.values)),
            "eigenvalues": [[float(v.real), float(v.imag)] for v in self.values],
            "singular_values": [float(a) for a in self.singular_values],
            "residual_max": self.residual_max,
        })


def order_by_modulus(values: np.ndarray) -> np.ndarray:
    """Indices sorting by decreasing |lambda|, ties broken by real then imaginary part."""
    # modulus is rounded so that +-pairs equal to rounding tie deterministically
    mod = np.round(np.abs(values), 13)
    return np.lexsort((-values.imag, -values.real, -mod))


def constant_mode(vectors: np.ndarray) -> int | None:
    """Index of the eigenvector whose coefficient of variation is <= 1e-6."""
    best, best_cv = None, np.inf
    for k in range(vectors.shape[1]):
        v = vectors[:, k]
        mean = v.mean()
        if abs(mean) < 1e-14:
            continue
        cv = np.linalg.norm(v / mean - 1.0) / np.sqrt(v.size)
        if cv < best_cv:
            best, best_cv = k, cv
    return best if best_cv <= CONSTANT_CV_TOL else None


def eigenpairs(op: OperatorMatrix, with_singular_values: bool = True) -> Spectrum:
    """All eigenpairs of ``op.matrix`` with residuals ``|Av - lv| / |A|_F``."""
    a = op.matrix
    if not np.all(np.isfinite(a)):
        raise ValueError("matrix has non-finite entries")
    try:
        values, vectors = scipy.linalg.eig(a)
    except scipy.linalg.LinAlgError as exc:
        log.error("eigensolver failed on %s: %s", op.shape_id, exc)
        return Spectrum(np.array([], complex), None, None, np.array([]),
                        op.shape_id, op.grid, None, converged=False, operator=op)
    order = order_by_modulus(values)
    values, vectors = values[order], vectors[:, order]
    vectors = vectors / np.linalg.norm(vectors, axis=0)
    residuals = residual_norms(a, values, vectors)
    bad = np.flatnonzero(residuals > RESIDUAL_TOL)
    if bad.size:
        repaired = _null_vectors(a, values[bad])
        vectors[:, bad] = repaired.real if np.isrealobj(vectors) else repaired
        residuals[bad] = residual_norms(a, values[bad], vectors[:, bad])
    sv = singular_values(op) if with_singular_values else np.array([])
    converged = bool(np.all(residuals <= RESIDUAL_TOL))
    if not converged:
        log.warning("%s: residual %.2e exceeds %.0e", op.shape_id, residuals.max(), RESIDUAL_TOL)
    return Spectrum(values, vectors, residuals, sv, op.shape_id, op.grid,
                    constant_mode(vectors), converged, op)


def _null_vectors(a: np.ndarray, values: np.ndarray) -> np.ndarray:
    """Right singular vectors of ``A - lambda I`` for the smallest singular value.

    Repairs eigenvectors that the QR algorithm returns inaccurately, which
    happens after balancing matrices with entries many orders apart.
    """
    eye = np.eye(a.shape[0])
    cols = [scipy.linalg.svd(a - lam * eye)[2][-1].conj() for lam in values]
    return np.column_stack(cols)


def residual_norms(a: np.ndarray, values: np.ndarray, vectors: np.ndarray) -> np.ndarray:
    fro = np.linalg.norm(a)
    if fro == 0:
        fro = 1.0
    return np.linalg.norm(a @ vectors - vectors * values[None, :], axis=0) / fro


def singular_values(op: OperatorMatrix) -> np.ndarray:
    """Singular values of the symmetrized twin, nonincreasing."""
    return scipy.linalg.svdvals(op.symmetrized)


def schatten_sum(values, r: float) -> float:
    """``sum_j alpha_j**r`` over all given singular values."""
    if r < 1:
        raise ValueError(f"Schatten exponent must be >= 1, got {r}")
    return float(np.sum(np.abs(np.asarray(values, float)) ** r))


def conjugate_pairing_defect(values: np.ndarray) -> float:
    """Largest distance from a non-real eigenvalue to the nearest conjugate of another."""
    mask = np.abs(values.imag) > REAL_TOL * np.maximum(1.0, np.abs(values))
    worst = 0.0
    for k in np.flatnonzero(mask):
        others = np.delete(values, k)
        worst = max(worst, float(np.min(np.abs(others - np.conj(values[k])))))
    return worst


def harmonic_capture(op: OperatorMatrix, vectors: np.ndarray, degree: int | None = None) -> np.ndarray:
    """Fraction of each 3D eigenvector's energy carried by spherical harmonics.

    Harmonics of degree <= ``degree`` (default ``n_theta // 2``) are taken in
    the parameter angles.  Eigenvectors the grid cannot resolve score near
    zero; the default cap leaves room for the kernel's own angular content,
    so near-grid-scale modes with badly wrong eigenvalues are rejected too.
    """
    if op.dim != 3:
        raise ValueError("harmonic capture needs a 3D operator")
    n_theta, n_phi = op.grid
    degree = n_theta // 2 if degree is None else degree
    theta = op.nodes[::n_phi, 0]
    _, wx = np.polynomial.legendre.leggauss(n_theta)
    wx = wx[::-1]
    v = vectors.reshape(n_theta, n_phi, -1)
    # azimuthal transform, then normalized associated Legendre projection per m
    vm = np.fft.fft(v, axis=1) * (2 * np.pi / n_phi)
    energy = np.zeros(vectors.shape[1])
    for m in range(-min(degree, n_phi // 2), min(degree, n_phi // 2) + 1):
        ls = np.arange(abs(m), degree + 1)
        p_lm = scipy.special.sph_harm_y(ls[:, None], m, theta[None, :], 0.0).real
        coeff = (p_lm * wx[None, :]) @ vm[:, m % n_phi, :]
        energy += np.sum(np.abs(coeff) ** 2, axis=0)
    total = np.repeat(wx, n_phi) * (2 * np.pi / n_phi) @ np.abs(vectors) ** 2
    return energy / total


def block_circulant_eigenvalues(op: OperatorMatrix, check: float = 1e-12) -> np.ndarray:
    """All eigenvalues of a 3D matrix on a surface of revolution about the z axis.

    With ``a == b`` and a uniform azimuthal grid the entry for nodes
    ``(i, p)`` and ``(j, q)`` depends on ``q - p`` only, so a discrete
    Fourier transform in ``phi`` splits the matrix into ``n_phi`` blocks of
    size ``n_theta``.  The structure is verified before use.  Values are
    ordered by decreasing modulus.
    """
    if op.dim != 3:
        raise ValueError("block-circulant solver needs a 3D operator")
    nt, nph = op.grid
    a = op.matrix.reshape(nt, nph, nt, nph)
    first = a[:, 0, :, :]  # C[i, j, d] = A[(i, 0), (j, d)]
    shifted = np.stack([np.roll(first, p, axis=2) for p in range(nph)], axis=1)
    if np.abs(shifted - a).max() > check * np.abs(a).max():
        raise ValueError(f"{op.shape_id}: matrix is not block circulant in phi")
    blocks = np.fft.fft(first, axis=2)  # block m: sum_d C[:, :, d] exp(-2 pi i m d / nph)
    vals = np.concatenate([scipy.linalg.eigvals(blocks[:, :, m]) for m in range(nph)])
    return vals[order_by_modulus(vals)]

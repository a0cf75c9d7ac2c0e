"""Spectra of the Laplace double layer operator on curves and ellipsoids."""

__version__ = "0.1.0"

from .geometry import (  # noqa: E402
    Curve2D,
    GeometryError,
    Surface3D,
    curve_frame,
    fourier_decay_curve,
    make_curve,
    make_surface,
    surface_frame,
)
from .operators import OperatorMatrix, assemble_dlp_2d, assemble_dlp_3d, slp_matrix_2d  # noqa: E402
from .spectral import Spectrum, eigenpairs, schatten_sum, singular_values  # noqa: E402
from .analysis import (  # noqa: E402
    fit_decay,
    linfty_l1_constant,
    sphere_exact_spectrum,
    symmetry_audit,
    trace_report,
    weyl_audit,
    zeta_bound,
)
from .eigenfunctions import (  # noqa: E402
    Eigenpair,
    annulus_zero_count,
    eigenpair,
    holomorphic_extension,
    nodal_bound_report,
    nodal_count,
    sign_and_orthogonality_check,
)
from .explorer import (  # noqa: E402
    ellipsoid_cluster_sums,
    lambda_floor,
    positive_eigenvalue_search,
    sweep,
)

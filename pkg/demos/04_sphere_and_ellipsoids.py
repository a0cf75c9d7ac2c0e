"""The double layer operator on the sphere and on nearby ellipsoids.

On the unit sphere the spherical harmonics of degree l are eigenfunctions
with eigenvalue -1/(2l+1).  On a triaxial ellipsoid each such cluster
splits into 2l+1 simple eigenvalues whose sum stays -1.  Clusters are
identified by the harmonic degree of their eigenvectors.
"""
import numpy as np

from dlspectra import assemble_dlp_3d, eigenpairs, ellipsoid_cluster_sums, lambda_floor, make_surface

grid = (24, 48)
sphere = eigenpairs(assemble_dlp_3d(make_surface("sphere", R=1.0), *grid), with_singular_values=False)
print(f"sphere on a {grid[0]}x{grid[1]} grid")
for c in ellipsoid_cluster_sums(sphere, 2):
    print(f"  l={c.l}: members {np.round(c.members, 5).tolist()}  (exact {-1 / (2 * c.l + 1):.5f})")

for axes in [(1.0, 1.1, 1.2), (1.0, 1.05, 1.1), (1.0, 1.5, 1.5)]:
    surf = make_surface("ellipsoid", a=axes[0], b=axes[1], c=axes[2])
    spec = eigenpairs(assemble_dlp_3d(surf, *grid), with_singular_values=False)
    clusters = ellipsoid_cluster_sums(spec, 2)
    print(f"\nellipsoid {axes}")
    for c in clusters[1:]:
        print(f"  l={c.l}: sum {c.total:+.6f}  members {np.round(c.members, 4).tolist()}")
    print(f"  smallest eigenvalue above -1: {lambda_floor(spec):.5f} (sphere: -1/3)")

"""Zeros of double layer eigenfunctions on the ellipse.

The eigenfunction for lambda = +-exp(-2mR) is a multiple of cos(mt) or
sin(mt) in the elliptic angle, so it has 2m real zeros and the ratio
#zeros / |log lambda| equals 1/R.  Complex zeros near the curve are
counted with the argument principle on a thin strip around the real
parameter axis after extending the eigenfunction holomorphically; for
the ellipse none appear off the axis.
"""
from dlspectra import assemble_dlp_2d, eigenpairs, make_curve, nodal_bound_report
from dlspectra.eigenfunctions import nodal_report, real_pairs

R = 0.5
curve = make_curve("ellipse", c=2.0, R=R)
spec = eigenpairs(assemble_dlp_2d(curve, 256))
pairs = real_pairs(spec, curve, count=8, threshold=1e-8)

print("   lambda       real zeros  strip zeros  ratio (1/R = 2)")
for pair in pairs:
    r = nodal_report(pair, eps=0.1)
    print(f"{r.value: .6f}  {r.real_zeros:8d}  {r.annulus_zeros:10d}     {r.ratio:.6f}")

bound = nodal_bound_report(pairs)
print(f"\nlargest ratio {bound.constant:.4f}; grows faster than log: {bound.super_log}")

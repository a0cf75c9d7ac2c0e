"""tr K, tr K*K and the isoperimetric defect along a family of ellipses.

The trace of K is -1 on every smooth curve.  tr(K*K) - 1 is non-negative
and vanishes only for the circle.  It is computed twice here: as the
Frobenius norm of the symmetrized Nystrom matrix and as the sum of squared
singular values.  As R grows the ellipse rounds out and the defect shrinks.
"""
from dlspectra import make_curve, trace_report

print("    R      tr K        tr K*K (quad)     tr K*K (svd)      defect")
for R in (0.25, 0.5, 1.0, 2.0, 4.0):
    r = trace_report(make_curve("ellipse", c=2.0, R=R), 256)
    print(f"{R:5.2f}  {r.trace_K: .10f}  {r.trace_KstarK_quadrature:.12f}  "
          f"{r.trace_KstarK_svd:.12f}  {r.defect:.3e}")

r = trace_report(make_curve("circle", R=3.0), 64)
print(f"\ncircle of radius 3: tr K = {r.trace_K:.15f}, defect = {r.defect:.1e}")

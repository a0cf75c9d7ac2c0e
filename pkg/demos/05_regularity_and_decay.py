"""Smoothness of the boundary controls how fast the eigenvalues decay.

Curves are built from Fourier coefficients falling off like k^-(order+1),
so the curve has about order-1 continuous derivatives.  Smoother curves
give faster power-law decay of |lambda_j|.
A real-analytic curve such as an ellipse decays exponentially instead.
"""
from dlspectra import assemble_dlp_2d, eigenpairs, fit_decay, fourier_decay_curve

print("order  |a_k| decay  fitted exponent  r2")
for order in (3, 4, 5, 6):
    curve = fourier_decay_curve(order=order)
    fit = fit_decay(eigenpairs(assemble_dlp_2d(curve, 512), with_singular_values=False), "power")
    print(f"{order:5d}  k^-{order + 1:<9d}  {fit.rate:15.3f}  {fit.r2:.3f}")

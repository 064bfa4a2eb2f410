#!/usr/bin/env python3
# From a conformal factor lam on the circle to a closed planar curve.
#
# Usage:
#   python demos/02_factor_to_curve.py [outdir]
#
# lam determines Phi' = exp(lam + i H lam) on the disk; Phi(S^1) is a closed
# immersed curve of length int exp(lam) whose curvature at Phi(e^{it}) is
# ((-Delta)^{1/2} lam + 1) exp(-lam).  The curvature mass is always 2 pi.
import sys
from pathlib import Path

import numpy as np

from halfliouville import curves as cv
from halfliouville import spectral as sp

out = Path(sys.argv[1] if len(sys.argv) > 1 else "demo_out")
out.mkdir(exist_ok=True)

th = sp.grid(512)
lam = 0.6 * np.cos(2 * th) + 0.3 * np.sin(3 * th)
phi = cv.immersion_from_factor(lam)
curve = cv.trace_curve(phi)
kappa = cv.curvature_from_factor(lam)

print(f"length       {curve.length:.12f}  (int exp(lam) = {sp.integrate_circle(np.exp(lam)):.12f})")
print(f"degree       {cv.degree(phi)}")
print(f"mass         {sp.integrate_circle(kappa * np.exp(lam)):.12f}  (2 pi = {2 * np.pi:.12f})")
gap = np.max(np.abs(curve.curvature - sp.trig_eval(kappa, curve.theta)))
print(f"geometric vs factor curvature: {gap:.2e}")
print(f"total turning {cv.total_turning(curve):.6f}  (> pi for every closed curve)")
print(f"half-harmonic residual of the trace: {cv.half_harmonic_residual(phi(np.exp(1j * th))):.1e}")

# Moebius maps act on factors without changing the curve's shape
m = cv.MoebiusMap(0.5 + 0.2j)
moved = cv.moebius_pullback(lam, m, n=2048)
c2 = cv.trace_curve(cv.immersion_from_factor(moved))
print(f"after a Moebius pullback the length is still {c2.length:.12f}")

cv.curve_to_csv(curve, out / "flower.csv")
cv.curve_to_svg(curve, out / "flower.svg")
print(f"wrote {out / 'flower.csv'} and {out / 'flower.svg'}")

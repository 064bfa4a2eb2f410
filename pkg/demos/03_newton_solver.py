#!/usr/bin/env python3
# Prescribing the curvature: Newton's method for (-Delta)^{1/2} lam = kappa e^lam - 1.
#
# Usage:
#   python demos/03_newton_solver.py
#
# Three cases: a curvature that some factor realises (fast convergence), the
# constant curvature 1 (a two-dimensional Moebius family of solutions) and
# kappa = 1 + 0.1 cos t, which no factor realises.
import numpy as np

from halfliouville import curves as cv
from halfliouville import solver as sv
from halfliouville import spectral as sp

n = 256
th = sp.grid(n)

# 1. attainable: manufacture kappa from a known factor
lam0 = 0.3 * np.cos(th) - 0.2 * np.sin(2 * th)
kappa = cv.curvature_from_factor(lam0)
rep = sv.solve(kappa)
print("attainable curvature")
print(f"  residual history {[f'{r:.1e}' for r in rep.history]}")
print(f"  distance to the manufacturing factor {np.max(np.abs(rep.solution.lam - lam0)):.1e}")

# 2. constant curvature: the answer is log|f_a'| for some a
rep = sv.solve(np.ones(n), init=0.1 * np.cos(th) + 0.05 * np.sin(3 * th))
fit = cv.fit_moebius(cv.immersion_from_factor(rep.solution))
print("unit curvature")
print(f"  {rep.iterations} steps, near-kernel dimension {rep.near_kernel_dim}")
print(f"  converged to the Moebius factor with a = {fit.map.a:.6f} (fit error {fit.sup_error:.1e})")

# 3. the obstruction: any solution has int kappa' e^{it} e^lam = 0, but here
# the imaginary part is -0.1 int sin^2 e^lam < 0
kappa = 1 + 0.1 * np.cos(th)
try:
    sv.solve(kappa)
except sv.SolverError as exc:
    lam = exc.report.solution.lam
    print("kappa = 1 + 0.1 cos t")
    print(f"  {exc}")
    print(f"  balance moment {sv.balance_moment(lam, kappa):.4f}"
          f" vs -0.1 int sin^2 e^lam = {-0.1 * sp.integrate_circle(np.sin(th) ** 2 * np.exp(lam)):.4f}")

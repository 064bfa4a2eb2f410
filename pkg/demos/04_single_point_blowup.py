#!/usr/bin/env python3
# One blow-up point: Moebius pullbacks of the round circle with a = t, t -> 1.
#
# Usage:
#   python demos/04_single_point_blowup.py
#
# The whole curvature mass 2 pi collects near theta = 0 and, after removing
# the mean, lam approaches v(theta) = -log(2 - 2 cos theta).
import numpy as np

from halfliouville import blowup as bl

sched = (0.9, 0.99, 0.999)
fam = bl.generate_family(bl.FamilySpec("moebius_pullback", sched))
print(f"{'t':>6} {'N':>7} {'mean lam':>10} {'mass(|th|<0.3)':>15} {'profile err':>12}")
masses = []
for m in fam:
    mass = bl.mass_profile(m.lam, m.kappa, [0.0], 0.3).arcs[0].mass
    masses.append(mass)
    err = bl.limit_profile_error(m.lam, "i", [0.0], 0.3)
    print(f"{m.param:6.3f} {m.lam.n:7d} {m.lam.mean:10.4f} {mass:15.10f} {err:12.2e}")
print(f"extrapolated mass {bl.richardson(sched, masses, limit=1.0):.8f}  (2 pi = {2 * np.pi:.8f})")

#!/usr/bin/env python3
# Two blow-up points and a pinched pair: Phi' = c / (z^2 + (1 + delta)^2).
#
# Usage:
#   python demos/05_two_pole_pinching.py
#
# Mass pi gathers at each of +i and -i while the two long sides of the curve
# approach each other.  The conformal distance between Phi(1) and Phi(-1),
# computed by Dijkstra on a triangulated disk, equals 2 c / R arctan(1/R)
# and so decays only like 1 / log(1/delta).
import numpy as np

from halfliouville import blowup as bl

sched = (0.3, 0.1, 0.03, 0.01)
poles = [np.pi / 2, -np.pi / 2]
fam = bl.generate_family(bl.FamilySpec("two_pole", sched))
mesh, _ = bl.disk_mesh(5).with_boundary_points([0.0, np.pi])
print(f"{'delta':>6} {'mass at +i':>11} {'profile err':>12} {'D(1,-1)':>9} {'closed form':>12}")
masses = []
for m in fam:
    mass = bl.mass_profile(m.lam, m.kappa, poles, 0.3).arcs[0].mass
    masses.append(mass)
    R = 1 + m.param
    exact = 2 * bl.two_pole_constant(m.param) / R * np.arctan(1 / R)
    d = bl.geodesic_distance(m.immersion, mesh, 1.0, -1.0)
    err = bl.limit_profile_error(m.lam, "ii", poles, 0.3)
    print(f"{m.param:6.2f} {mass:11.6f} {err:12.2e} {d:9.5f} {exact:12.5f}")
print(f"extrapolated mass per pole {bl.richardson(sched, masses):.6f}  (pi = {np.pi:.6f})")

for p in bl.detect_pinched(fam, level=5):
    print(f"pinched pair at s = {p.s:g}, {p.s_dual:g} of the length; tangent angle {p.angle:.6f}")

# the limit: a Schwarz-Christoffel strip with straight sides
sc = bl.SCProfile(np.pi)
t = sc.boundary_tangent(np.linspace(-1.5, 1.5, 5))
print(f"limit profile tangents on the right arc: {np.round(t, 12)}")

#!/usr/bin/env python3
# Moser-Trudinger behaviour of the Green potential of unit-mass densities.
#
# Usage:
#   python demos/07_moser_trudinger.py
#
# For densities f with int |f| = 1 concentrating at a point, the subcritical
# functional eps int exp((pi - eps)|G * f|) rises towards the finite value of
# a point mass, while the supercritical exponent pi + eps grows without bound.
import numpy as np

from halfliouville import cli
from halfliouville import line as ln
from halfliouville import spectral as sp

eps = [0.2, 0.05]
widths = [0.2, 0.1, 0.05, 0.02, 0.01]
rows = cli.mt_sweep(eps, widths)
for dom, limit in (("circle", sp.mt_point_mass_limit), ("interval", ln.interval_mt_point_mass_limit)):
    print(dom)
    for e in eps:
        sub = [r for r in rows if r[0] == dom and r[1] == e]
        print(f"  eps={e}: point-mass limit {limit(e):.4f}")
        for _, _, w, v, p in sub:
            print(f"    width {w:5.2f}: pi - eps {v:8.4f}   pi + eps {p:8.4f}")

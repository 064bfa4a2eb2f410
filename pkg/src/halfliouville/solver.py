"""
Newton solver for (-Delta)^{1/2} lam = kappa exp(lam) - 1 on the circle.

Solutions of the constant-curvature problem come in a Moebius family, so the
Jacobian has a two-dimensional near-kernel there; linear steps are computed
by Tikhonov-regularised least squares to stay well defined.

Any solution also satisfies the balancing identity

    int kappa'(theta) exp(i theta) exp(lam(theta)) dtheta = 0,

obtained by testing the equation against the infinitesimal Moebius
deformations.  It gives an a priori obstruction: for kappa = 1 + eps cos
the imaginary part equals -eps int sin^2 exp(lam) < 0, so no solution
exists.  ``balance_moment`` evaluates the left-hand side.
"""
from __future__ import annotations

import warnings
from dataclasses import dataclass
from typing import Optional

import numpy as np
from scipy import linalg

from . import spectral as sp
from .curves import ConformalFactor, MoebiusMap, _lam
from .spectral import TWO_PI


class SolverError(RuntimeError):
    """Newton failure; ``report`` holds the last iterate."""

    def __init__(self, msg, report=None):
        super().__init__(msg)
        self.report = report


@dataclass(frozen=True)
class PrescribedCurvature:
    kappa: np.ndarray

    def __post_init__(self):
        k = np.asarray(self.kappa, dtype=float)
        sp.check_grid_size(k.size)
        if not np.all(np.isfinite(k)):
            raise ValueError("curvature must be bounded")
        object.__setattr__(self, "kappa", k)

    @property
    def n(self):
        return self.kappa.size

    @classmethod
    def constant(cls, c: float, n: int = sp.DEFAULT_N):
        return cls(np.full(n, float(c)))

    @classmethod
    def trig(cls, a0: float, cos=(), sin=(), n: int = sp.DEFAULT_N):
        """a0 + sum_k cos[k-1] cos(k t) + sin[k-1] sin(k t)."""
        th = sp.grid(n)
        k = a0 + np.zeros(n)
        for j, c in enumerate(cos, 1):
            k += c * np.cos(j * th)
        for j, s in enumerate(sin, 1):
            k += s * np.sin(j * th)
        return cls(k)


@dataclass
class SolveReport:
    solution: ConformalFactor
    residual_sup: float
    iterations: int
    constraint_gap: float
    converged: bool = True
    near_kernel_dim: int = 0
    history: tuple = ()

    def to_dict(self) -> dict:
        return {
            "residual_sup": self.residual_sup,
            "iterations": self.iterations,
            "constraint_gap": self.constraint_gap,
            "converged": self.converged,
            "near_kernel_dim": self.near_kernel_dim,
            "history": list(self.history),
            "lam": self.solution.lam.tolist(),
        }


def _kappa(kappa) -> np.ndarray:
    return kappa.kappa if isinstance(kappa, PrescribedCurvature) else np.asarray(kappa, dtype=float)


def residual(lam, kappa) -> np.ndarray:
    lam, kappa = _lam(lam), _kappa(kappa)
    if lam.size != kappa.size:
        raise ValueError(f"grid mismatch: {lam.size} vs {kappa.size}")
    return sp.half_laplacian(lam, on_alias="ignore") - kappa * np.exp(lam) + 1.0


def balance_moment(lam, kappa) -> complex:
    """int kappa' exp(i theta) exp(lam) dtheta; vanishes for every solution."""
    lam, kappa = _lam(lam), _kappa(kappa)
    th = sp.grid(lam.size)
    return complex(sp.integrate_circle(sp.derivative(kappa) * np.exp(1j * th + lam)))


def half_laplacian_matrix(n: int) -> np.ndarray:
    col = np.fft.ifft(np.abs(sp.wavenumbers(n))).real
    return linalg.circulant(col)


def default_init(kappa) -> np.ndarray:
    kappa = _kappa(kappa)
    kp = np.maximum(kappa, 1e-6)
    return np.full(kappa.size, np.log(TWO_PI / sp.integrate_circle(kp)))


def solve(kappa, init=None, tol: float = 1e-10, max_iter: int = 40,
          tikhonov: float = 1e-12) -> SolveReport:
    """Damped Newton iteration; raises SolverError when it does not converge."""
    kappa = _kappa(kappa)
    n = kappa.size
    if np.mean(kappa) <= 0:
        warnings.warn("curvature has nonpositive mean; a solution is not expected", RuntimeWarning)
    lam = default_init(kappa) if init is None else _lam(init).copy()
    if lam.size != n:
        raise ValueError("init and kappa live on different grids")
    mass = sp.integrate_circle(kappa * np.exp(lam))
    if abs(mass - TWO_PI) > 0.5 * TWO_PI:
        warnings.warn(f"initial mass {mass:.4g} is far from 2*pi", RuntimeWarning)

    A = half_laplacian_matrix(n)
    F = residual(lam, kappa)
    res = float(np.max(np.abs(F)))
    history = [res]
    it = 0
    stalled = False
    while res > tol and it < max_iter:
        J = A - np.diag(kappa * np.exp(lam))
        JT = J.T
        M = JT @ J
        M[np.diag_indices(n)] += tikhonov * np.trace(M) / n
        step = linalg.solve(M, -(JT @ F), assume_a="pos")
        t = 1.0
        while True:
            cand = lam + t * step
            Fc = residual(cand, kappa)
            rc = float(np.max(np.abs(Fc)))
            if rc < res or t < 1e-6:
                break
            t *= 0.5
        it += 1
        if rc >= res:
            stalled = True
            break
        lam, F, res = cand, Fc, rc
        history.append(res)

    gap = abs(float(sp.integrate_circle(kappa * np.exp(lam))) - TWO_PI)
    J = A - np.diag(kappa * np.exp(lam))
    sv = linalg.svdvals(J)
    kdim = int(np.sum(sv < 1e-8 * sv[0]))
    report = SolveReport(ConformalFactor(lam), res, it, gap, res <= tol, kdim, tuple(history))
    if res > tol:
        moment = balance_moment(lam, kappa)
        if stalled and kdim > 0:
            msg = "solution-family degeneracy"
        else:
            msg = "Newton iteration did not converge"
        raise SolverError(
            f"{msg}: residual {res:.3e} after {it} steps "
            f"(balance moment {abs(moment):.3e}, near-kernel dimension {kdim})", report)
    return report


def moebius_solution(a: complex, c0: float = 1.0, n: Optional[int] = None) -> ConformalFactor:
    """lam = log|f_a'| - log c0, an exact solution for the constant curvature c0.

    The grid is refined until log|f_a'| is resolved to rounding level.
    """
    if not c0 > 0:
        raise ValueError("c0 must be positive")
    m = MoebiusMap(complex(a))
    n = max(n or sp.DEFAULT_N, m.resolution())
    return ConformalFactor(m.log_abs_derivative(sp.grid(n)) - np.log(c0))


def rotate(u, shift: int) -> np.ndarray:
    """Rotate grid samples by ``shift`` nodes."""
    return np.roll(np.asarray(u), shift)

"""
The real-line equation (-Delta)^{1/2} u = K exp(u) and its transfer to the circle.

Stereographic projection Pi(xi + i eta) = xi / (1 + eta) identifies
S^1 minus {-i} with the line, and 1 + sin(theta) = 2 / (1 + x^2) at
x = Pi(exp(i theta)).  Factors correspond through

    lam(theta) = u(Pi(theta)) - log(1 + sin theta),
    u(x)       = lam(Pi^{-1}(x)) + log(2 / (1 + x^2)).

On the line the half-Laplacian is the principal value
(1/pi) PV int (u(x) - u(y)) / (x - y)^2 dy.  Line fields are truncated to
[-R, R]; outside, each side follows a fitted tail
c1 log|y| + c2 + c3/|y| + c4/|y|^2 that is integrated in closed form.
"""
from __future__ import annotations

import json
from dataclasses import dataclass, field
from typing import Callable, Optional

import numpy as np
from scipy import integrate, optimize
from scipy.interpolate import CubicSpline, make_interp_spline

from . import spectral as sp
from .curves import ConformalFactor, _lam
from .spectral import TWO_PI

DEFAULT_R = 100.0
DEFAULT_M = 2 ** 14 + 1
_GL_T, _GL_W = np.polynomial.legendre.leggauss(48)
_GL_T = 0.5 * (_GL_T + 1.0)
_GL_W = 0.5 * _GL_W


class LineError(ValueError):
    pass


def simpson_weights(m: int, h: float) -> np.ndarray:
    if m % 2 == 0:
        raise LineError("Simpson weights need an odd number of nodes")
    w = np.ones(m)
    w[1:-1:2] = 4.0
    w[2:-1:2] = 2.0
    return w * h / 3.0


def fit_tail(y: np.ndarray, u: np.ndarray) -> np.ndarray:
    """Least-squares coefficients of c1 log y + c2 + c3/y + c4/y^2, y > 0."""
    A = np.column_stack([np.log(y), np.ones_like(y), 1.0 / y, 1.0 / y ** 2])
    return np.linalg.lstsq(A, u, rcond=None)[0]


def tail_value(c: np.ndarray, y):
    y = np.abs(np.asarray(y, dtype=float))
    return c[0] * np.log(y) + c[1] + c[2] / y + c[3] / y ** 2


@dataclass
class LineField:
    """u on the symmetric grid [-R, R] with fitted tails on both sides.

    ``func``, when present, is an exact evaluator used in place of the
    spline/tail reconstruction (e.g. for closed-form bubbles).
    """

    x: np.ndarray
    u: np.ndarray
    tail_right: np.ndarray
    tail_left: np.ndarray
    func: Optional[Callable] = field(default=None, repr=False)

    def __post_init__(self):
        self.x = np.asarray(self.x, dtype=float)
        self.u = np.asarray(self.u, dtype=float)
        if self.x.size != self.u.size:
            raise LineError("grid and samples differ in size")
        if not np.allclose(self.x, -self.x[::-1]):
            raise LineError("grid must be symmetric about 0")
        self._spline = None
        w = 1.0 / (1.0 + self.x ** 2)
        if not np.isfinite(np.sum(np.abs(self.u) * w)):
            raise LineError("field is not in the weighted L1 space")

    @property
    def R(self) -> float:
        return float(self.x[-1])

    @property
    def h(self) -> float:
        return float(self.x[1] - self.x[0])

    @property
    def tail(self) -> tuple:
        """(c1, c2) of the right tail."""
        return float(self.tail_right[0]), float(self.tail_right[1])

    @classmethod
    def from_samples(cls, x, u, func=None) -> "LineField":
        x = np.asarray(x, dtype=float)
        u = np.asarray(u, dtype=float)
        R = x[-1]
        right = (x >= R / 2)
        left = (x <= -R / 2)
        tr = fit_tail(x[right], u[right])
        tl = fit_tail(-x[left], u[left])
        return cls(x, u, tr, tl, func)

    @classmethod
    def from_function(cls, func: Callable, R: float = DEFAULT_R, m: int = DEFAULT_M) -> "LineField":
        x = np.linspace(-R, R, m)
        return cls.from_samples(x, func(x), func)

    def tail_mismatch(self) -> float:
        """Max relative gap between the tail model and the samples near +-R."""
        sel = np.abs(self.x) >= 0.9 * self.R
        xs = self.x[sel]
        model = np.where(xs > 0, tail_value(self.tail_right, xs), tail_value(self.tail_left, xs))
        scale = np.maximum(np.abs(self.u[sel]), 1.0)
        return float(np.max(np.abs(model - self.u[sel]) / scale))

    def __call__(self, y):
        y = np.asarray(y, dtype=float)
        if self.func is not None:
            return self.func(y)
        if self._spline is None:
            self._spline = make_interp_spline(self.x, self.u, k=7)
        out = np.empty(y.shape)
        inside = np.abs(y) <= self.R
        out[inside] = self._spline(y[inside])
        out[y > self.R] = tail_value(self.tail_right, y[y > self.R])
        out[y < -self.R] = tail_value(self.tail_left, y[y < -self.R])
        return out

    def to_json(self) -> str:
        return json.dumps({
            "R": self.R, "m": int(self.x.size), "samples": self.u.tolist(),
            "tail_right": self.tail_right.tolist(), "tail_left": self.tail_left.tolist(),
        })

    @classmethod
    def from_json(cls, text: str) -> "LineField":
        d = json.loads(text)
        x = np.linspace(-d["R"], d["R"], d["m"])
        return cls(x, np.asarray(d["samples"]), np.asarray(d["tail_right"]),
                   np.asarray(d["tail_left"]))


@dataclass(frozen=True)
class ExplicitBubble:
    """u(x) = log(2 mu / (1 + mu^2 (x - x0)^2))."""

    mu: float
    x0: float = 0.0

    def __post_init__(self):
        if not self.mu > 0:
            raise LineError("mu must be positive")

    def __call__(self, x):
        x = np.asarray(x, dtype=float)
        return np.log(2.0 * self.mu) - np.log1p((self.mu * (x - self.x0)) ** 2)

    def field(self, R: float = DEFAULT_R, m: int = DEFAULT_M) -> LineField:
        return LineField.from_function(self, R, m)

    def moebius_parameter(self) -> complex:
        """a in the disk with stereo_to_circle(u) = log|f_a'|, f_a(z) = (z - a)/(1 - conj(a) z)."""
        mu, x0 = self.mu, self.x0
        # q = |a|^2 and D = mu (1 - q) satisfy (x0 D)^2 + (D - 1 - q)^2 = 4 q;
        # q = 1 is one root of this quadratic, the product of roots gives the other
        p = (x0 * mu) ** 2
        q = (p + (mu - 1.0) ** 2) / (p + (mu + 1.0) ** 2)
        D = mu * (1.0 - q)
        return complex(x0 * D / 2.0, (D - 1.0 - q) / 2.0)

    @classmethod
    def from_moebius(cls, a: complex) -> "ExplicitBubble":
        a = complex(a)
        al = abs(a)
        if al == 0.0:
            return cls(1.0, 0.0)
        t, s = (a / al).real, (a / al).imag
        den = 1.0 + 2.0 * al * s + al * al
        return cls(den / (1.0 - al * al), 2.0 * al * t / den)


def stereo(theta) -> np.ndarray:
    """Pi(exp(i theta)) = cos(theta)/(1 + sin(theta)) = cot(theta/2 + pi/4)."""
    phi = np.asarray(theta, dtype=float) / 2.0 + np.pi / 4.0
    return np.cos(phi) / np.sin(phi)


def inverse_stereo(x) -> np.ndarray:
    """Angle of Pi^{-1}(x) = (2x + i(1 - x^2)) / (1 + x^2)."""
    x = np.asarray(x, dtype=float)
    return np.angle((2.0 * x + 1j * (1.0 - x * x)) / (1.0 + x * x))


def log_one_plus_sin(theta) -> np.ndarray:
    phi = np.asarray(theta, dtype=float) / 2.0 + np.pi / 4.0
    return np.log(2.0 * np.sin(phi) ** 2)


@dataclass
class ExcisedFactor:
    """Circle factor obtained from a line field; ``retained`` masks out the arc near -i."""

    lam: np.ndarray
    retained: np.ndarray
    excision: float

    @property
    def theta(self):
        return sp.grid(self.lam.size)

    def factor(self) -> ConformalFactor:
        return ConformalFactor(self.lam)


def stereo_to_circle(u: LineField, n: int = sp.DEFAULT_N, excision: float = 0.1) -> ExcisedFactor:
    """lam(theta) = u(Pi(theta)) - log(1 + sin theta) on the n-point grid."""
    if u.func is None and u.tail_mismatch() > 0.05:
        raise LineError(f"tail model misfits the samples by {u.tail_mismatch():.1%}")
    th = sp.grid(n)
    phi = th / 2.0 + np.pi / 4.0
    pole = np.abs(np.sin(phi)) < 1e-12
    lam = np.empty(n)
    x = stereo(th[~pole])
    lam[~pole] = u(x) - log_one_plus_sin(th[~pole])
    if np.any(pole):
        big = np.array([-1e12, 1e12])
        vals = u(big) + np.log1p(big ** 2) - np.log(2.0)
        lam[pole] = np.mean(vals)
    dist = np.abs(np.angle(np.exp(1j * (th + np.pi / 2))))
    if abs(far_field_slope(u) + 2.0) > 1e-3:
        # lam is singular at -i; only the retained arcs are meaningful
        lam[pole] = np.nan
    return ExcisedFactor(lam, dist >= excision, excision)


def circle_to_stereo(lam, R: float = DEFAULT_R, m: int = DEFAULT_M) -> LineField:
    """u(x) = lam(Pi^{-1}(x)) + log(2/(1 + x^2)), backed by trigonometric interpolation."""
    lam = _lam(lam)

    def func(x, lam=lam):
        x = np.asarray(x, dtype=float)
        return sp.trig_eval(lam, inverse_stereo(x)) + np.log(2.0) - np.log1p(x * x)

    x = np.linspace(-R, R, m)
    return LineField.from_samples(x, func(x), func)


@dataclass(frozen=True)
class BubbleFit:
    mu: float
    x0: float
    sup_error: float

    def to_json(self) -> str:
        return json.dumps({"mu": self.mu, "x0": self.x0, "sup_error": self.sup_error})


def fit_bubble(u: LineField, window: Optional[float] = None) -> BubbleFit:
    """Least-squares fit of log(2 mu / (1 + mu^2 (x - x0)^2)) on [-window, window]."""
    window = window or u.R / 2
    sel = np.abs(u.x) <= window
    x, v = u.x[sel], u.u[sel]
    j = int(np.argmax(v))
    x0 = np.array([np.log(np.exp(v[j]) / 2.0), x[j]])

    def resid(p):
        return ExplicitBubble(np.exp(p[0]), p[1])(x) - v

    sol = optimize.least_squares(resid, x0, xtol=1e-15, ftol=1e-15, gtol=1e-15)
    err = float(np.max(np.abs(resid(sol.x))))
    return BubbleFit(float(np.exp(sol.x[0])), float(sol.x[1]), err)


def _fd_derivatives(u: np.ndarray, i: np.ndarray, h: float):
    # eighth-order centred differences
    c1 = np.array([1 / 280, -4 / 105, 1 / 5, -4 / 5, 0, 4 / 5, -1 / 5, 4 / 105, -1 / 280])
    c2 = np.array([-1 / 560, 8 / 315, -1 / 5, 8 / 5, -205 / 72, 8 / 5, -1 / 5, 8 / 315, -1 / 560])
    off = np.arange(-4, 5)
    st = u[i[:, None] + off[None, :]]
    return st @ c1 / h, st @ c2 / h ** 2


def _log_weight(a):
    # int_0^1 log(t) / (1 - a t)^2 dt = log(1 - a)/a, continuous at a = 0
    a = np.asarray(a, dtype=float)
    small = np.abs(a) < 1e-6
    aa = np.where(small, 0.5, a)
    return np.where(small, -1.0 - a / 2.0, np.log1p(-aa) / aa)


def _tail_term(ux, x, c, R):
    """(1/pi) int_R^inf (u(x) - m(y)) / (x - y)^2 dy for the tail m with coefficients c."""
    t = _GL_T[None, :]
    xx = np.asarray(x, dtype=float)[:, None]
    smooth = (ux[:, None] - c[0] * np.log(R) - c[1] - c[2] * t / R - c[3] * t * t / R ** 2)
    ker = R / (R - xx * t) ** 2
    part = (smooth * ker) @ _GL_W
    return (part + c[0] / R * _log_weight(np.asarray(x) / R)) / np.pi


def half_laplacian_line(u: LineField, x, chunk: int = 128) -> np.ndarray:
    """PV quadrature of (-Delta)^{1/2} u at grid nodes x with |x| <= R/2."""
    x = np.atleast_1d(np.asarray(x, dtype=float))
    R, h = u.R, u.h
    if np.any(np.abs(x) > R / 2 + 1e-9):
        raise LineError("evaluation points must satisfy |x| <= R/2")
    idx = np.rint((x - u.x[0]) / h).astype(int)
    if np.any(np.abs(u.x[idx] - x) > 1e-9 * max(1.0, R)):
        raise LineError("evaluation points must be grid nodes")
    d1, d2 = _fd_derivatives(u.u, idx, h)
    w = simpson_weights(u.x.size, h)
    out = np.empty(x.size)
    y = u.x
    for s in range(0, x.size, chunk):
        ii = idx[s:s + chunk]
        xs = y[ii][:, None]
        dy = y[None, :] - xs
        with np.errstate(divide="ignore", invalid="ignore"):
            g = (u.u[ii][:, None] - u.u[None, :] + d1[s:s + chunk, None] * dy) / dy ** 2
        rows = np.arange(ii.size)
        g[rows, ii] = -0.5 * d2[s:s + chunk]
        pv = g @ w - d1[s:s + chunk] * np.log((R - y[ii]) / (R + y[ii]))
        out[s:s + chunk] = pv / np.pi
    ux = u.u[idx]
    out += _tail_term(ux, x, u.tail_right, R) + _tail_term(ux, -x, u.tail_left, R)
    return out


def _tail_mass(c, R):
    if c[0] >= -1.0:
        raise LineError(f"tail exponent {c[0]:.3f} is not integrable (need c1 < -1)")

    def f(t):
        return np.exp(c[0] * (np.log(R) - np.log(t)) + c[1] + c[2] * t / R + c[3] * t * t / R ** 2) * R / t ** 2
    return integrate.quad(f, 0.0, 1.0, epsabs=1e-14, epsrel=1e-13, limit=200)[0]


def pohozaev_mass(u: LineField) -> float:
    """int exp(u) over the line: Simpson on [-R, R] plus the two tail integrals."""
    core = float(simpson_weights(u.x.size, u.h) @ np.exp(u.u))
    return core + _tail_mass(u.tail_right, u.R) + _tail_mass(u.tail_left, u.R)


def green_repr_line(f: np.ndarray, grid: np.ndarray, x, tail: Optional[Callable] = None) -> np.ndarray:
    """(1/pi) int log((1 + |y|)/|x - y|) f(y) dy for a density sampled on ``grid``.

    ``tail`` optionally evaluates the density for |y| > R.  The logarithmic
    singularity is handled by subtracting f(x).
    """
    f = np.asarray(f, dtype=float)
    grid = np.asarray(grid, dtype=float)
    x = np.atleast_1d(np.asarray(x, dtype=float))
    R = grid[-1]
    h = grid[1] - grid[0]
    w = simpson_weights(grid.size, h)
    fx = CubicSpline(grid, f)(x)
    base = w @ (np.log1p(np.abs(grid)) * f)
    out = np.empty(x.size)
    for s in range(0, x.size, 128):
        xs = x[s:s + 128, None]
        d = np.abs(grid[None, :] - xs)
        with np.errstate(divide="ignore", invalid="ignore"):
            lg = np.where(d > 0, np.log(d), 0.0)
        fxs = fx[s:s + 128]
        sing = (f[None, :] - fxs[:, None]) * lg @ w
        xr = x[s:s + 128]
        exact = (R - xr) * np.log(R - xr) + (R + xr) * np.log(R + xr) - 2.0 * R
        out[s:s + 128] = base - sing - fxs * exact
    out /= np.pi
    if tail is not None:
        t = _GL_T
        for sign in (1.0, -1.0):
            y = sign * R / t
            dens = tail(y) * R / t ** 2
            k = np.log((1.0 + R / t)[None, :] / np.abs(x[:, None] - y[None, :]))
            out += (k * dens[None, :]) @ _GL_W / np.pi
    return out


def interval_green(x, y) -> np.ndarray:
    """Green function of the half-Laplacian on (-1, 1) with exterior Dirichlet data."""
    x = np.asarray(x, dtype=float)
    y = np.asarray(y, dtype=float)
    if np.any(np.abs(x) >= 1) or np.any(np.abs(y) >= 1):
        raise LineError("points must lie in (-1, 1)")
    d2 = (x - y) ** 2
    if np.any(d2 == 0):
        raise LineError("interval Green function is singular at x = y")
    r0 = (1.0 - x * x) * (1.0 - y * y) / d2
    return np.log(np.sqrt(r0) + np.sqrt(r0 + 1.0)) / np.pi


def interval_potential(f: Callable, m: int = 2048) -> tuple:
    """Midpoint nodes and u(x) = int_I G(x, y) f(y) dy.

    Uses int_I G(x, y) dy = sqrt(1 - x^2) to subtract the logarithmic singularity.
    """
    h = 2.0 / m
    xs = -1.0 + h * (np.arange(m) + 0.5)
    fv = np.asarray(f(xs), dtype=float)
    X, Y = np.meshgrid(xs, xs, indexing="ij")
    eye = np.eye(m, dtype=bool)
    d2 = np.where(eye, 1.0, (X - Y) ** 2)
    r0 = (1.0 - X * X) * (1.0 - Y * Y) / d2
    G = np.log(np.sqrt(r0) + np.sqrt(r0 + 1.0)) / np.pi
    diff = fv[None, :] - fv[:, None]
    u = h * np.sum(np.where(eye, 0.0, G * diff), axis=1) + fv * np.sqrt(1.0 - xs ** 2)
    return xs, u


def interval_mt_functional(f: Callable, eps: float, m: int = 2048, exponent: Optional[float] = None) -> float:
    """(eps/|I|) int_I exp(c |u|) with u the interval potential of f and c = pi - eps by default."""
    if exponent is None:
        if not 0.0 < eps < np.pi:
            raise LineError("eps must lie in (0, pi)")
        exponent = np.pi - eps
    xs, u = interval_potential(f, m)
    h = 2.0 / m
    return float(eps / 2.0 * h * np.sum(np.exp(exponent * np.abs(u))))


def interval_mt_probe(f: Callable, eps: float, m: int = 2048) -> float:
    return interval_mt_functional(f, eps, m, exponent=np.pi + eps)


def interval_mt_point_mass_limit(eps: float) -> float:
    """(eps/2) int_I exp((pi - eps) G(x, 0)) dx, the interval functional of a unit point mass at 0."""
    if not 0.0 < eps < np.pi:
        raise LineError("eps must lie in (0, pi)")
    c = np.pi - eps
    val = integrate.quad(lambda x: np.exp(c * interval_green(x, 0.0)), 0.0, 1.0,
                         limit=400, epsabs=1e-12, epsrel=1e-12)[0]
    return float(eps * val)


def transfer_rhs_coefficient(u: LineField, stride: int = 8) -> float:
    """2 pi - int (-Delta)^{1/2} u dx, the weight of the Dirac mass at -i after transfer.

    The core integral uses the PV values on [-R/2, R/2]; beyond that the
    values are fitted by A / x^2 on each side and integrated exactly.
    """
    sel = np.flatnonzero(np.abs(u.x) <= u.R / 2)[::stride]
    xs = u.x[sel]
    vals = half_laplacian_line(u, xs)
    total = integrate.simpson(vals, x=xs)
    for side in (xs >= u.R / 4, xs <= -u.R / 4):
        A = np.sum(vals[side] / xs[side] ** 2) / np.sum(xs[side] ** -4.0)
        total += 2.0 * A / u.R
    return float(TWO_PI - total)


def flux_coefficient(u: LineField) -> float:
    """2 pi + pi c1, the same weight predicted from the logarithmic tail alone."""
    return float(TWO_PI + np.pi * far_field_slope(u))


def far_field_slope(u: LineField) -> float:
    """Average of the two logarithmic tail slopes; exact far-field values are used when available."""
    if u.func is not None:
        X, Y = 1e14, 1e10
        v = u.func(np.array([-X, -Y, Y, X]))
        return float(0.5 * ((v[0] - v[1]) + (v[3] - v[2])) / np.log(X / Y))
    return float(0.5 * (u.tail_right[0] + u.tail_left[0]))


def circle_half_laplacian_of_pullback(u: LineField, n: int = 4096, theta=None) -> tuple:
    """(-Delta)^{1/2}(u o Pi) on the circle, computed spectrally.

    The logarithmic part beta log(1 + sin theta), beta = -c1/2, is removed
    before the FFT; its half-Laplacian is the constant beta away from -i.
    Returns (theta, values); values at -i are NaN.  With ``theta`` given,
    the smooth part is evaluated there by trigonometric interpolation.
    """
    th = sp.grid(n)
    beta = -0.5 * far_field_slope(u)
    phi = th / 2.0 + np.pi / 4.0
    pole = np.abs(np.sin(phi)) < 1e-12
    reg = np.empty(n)
    reg[~pole] = u(stereo(th[~pole])) - beta * log_one_plus_sin(th[~pole])
    if np.any(pole):
        big = np.array([-1e12, 1e12])
        reg[pole] = np.mean(u(big) - beta * (np.log(2.0) - np.log1p(big ** 2)))
    smooth = sp.half_laplacian(reg, on_alias="ignore")
    if theta is None:
        vals = smooth + beta
        vals[pole] = np.nan
        return th, vals
    theta = np.asarray(theta, dtype=float)
    vals = sp.trig_eval(smooth, theta) + beta
    at_pole = np.abs(np.angle(np.exp(1j * (theta + np.pi / 2)))) < 1e-12
    return theta, np.where(at_pole, np.nan, vals)

"""
From conformal factors to planar curves.

A real factor lam on the circle determines a holomorphic immersion Phi of
the disk with |Phi'| = exp(lam) on the boundary: with rho = H(lam) the
boundary values of Phi' are exp(lam + i rho).  The image Phi(S^1) is a
closed curve of length int exp(lam) whose curvature, read in the variable
theta, is

    kappa = ((-Delta)^{1/2} lam + 1) exp(-lam).
"""
from __future__ import annotations

import json
from dataclasses import dataclass, field
from typing import Callable, Optional

import numpy as np
from scipy import optimize

from . import spectral as sp
from .spectral import TWO_PI, AliasingError, SpectralError


class GeometryError(ValueError):
    pass


@dataclass(frozen=True)
class ConformalFactor:
    """Real log-speed lam on the circle grid."""

    lam: np.ndarray

    def __post_init__(self):
        lam = np.asarray(self.lam, dtype=float)
        sp.check_grid_size(lam.size)
        if not np.all(np.isfinite(lam)):
            raise GeometryError("conformal factor must be finite")
        object.__setattr__(self, "lam", lam)

    @property
    def n(self) -> int:
        return self.lam.size

    @property
    def theta(self) -> np.ndarray:
        return sp.grid(self.n)

    @property
    def length(self) -> float:
        return float(sp.integrate_circle(np.exp(self.lam)))

    @property
    def mean(self) -> float:
        return float(np.mean(self.lam))

    def __array__(self, dtype=None, copy=None):
        return np.asarray(self.lam, dtype=dtype)

    def to_json(self) -> str:
        return json.dumps({"n": self.n, "samples_re": self.lam.tolist(),
                           "samples_im": [0.0] * self.n})

    @classmethod
    def from_json(cls, text: str) -> "ConformalFactor":
        return cls(np.real(sp.GridField.from_json(text).samples))


def _lam(lam) -> np.ndarray:
    return np.asarray(lam.lam if isinstance(lam, ConformalFactor) else lam, dtype=float)


def curvature_from_factor(lam, on_alias: str = "warn") -> np.ndarray:
    lam = _lam(lam)
    return (sp.half_laplacian(lam, on_alias=on_alias) + 1.0) * np.exp(-lam)


@dataclass(frozen=True)
class MoebiusMap:
    """f(z) = exp(i theta0) (z - a) / (1 - conj(a) z)."""

    a: complex
    theta0: float = 0.0

    def __post_init__(self):
        if abs(self.a) >= 1.0 - 1e-12:
            raise GeometryError(f"|a| = {abs(self.a)} is not inside the disk")
        object.__setattr__(self, "a", complex(self.a))

    def __call__(self, z):
        z = np.asarray(z)
        return np.exp(1j * self.theta0) * (z - self.a) / (1.0 - np.conj(self.a) * z)

    def derivative(self, z):
        z = np.asarray(z)
        return np.exp(1j * self.theta0) * (1.0 - abs(self.a) ** 2) / (1.0 - np.conj(self.a) * z) ** 2

    def boundary_angle(self, theta):
        """Angle of f(exp(i theta)), continuous and increasing in theta."""
        theta = np.asarray(theta, dtype=float)
        z = np.exp(1j * theta)
        # f(z) = exp(i theta0) z (1 - a conj(z)) / (1 - conj(a) z) on the circle
        w = (1.0 - self.a * np.conj(z)) / (1.0 - np.conj(self.a) * z)
        return theta + self.theta0 + np.angle(w)

    def log_abs_derivative(self, theta):
        z = np.exp(1j * np.asarray(theta, dtype=float))
        return np.log1p(-abs(self.a) ** 2) - 2.0 * np.log(np.abs(1.0 - np.conj(self.a) * z))

    def inverse(self) -> "MoebiusMap":
        # z = exp(-i theta0) (w + b)/(1 + conj(b) w) with b = a exp(i theta0)
        b = self.a * np.exp(1j * self.theta0)
        return MoebiusMap(-b, -self.theta0)

    def resolution(self, tol: float = 1e-15, n_min: int = 8) -> int:
        """Smallest power-of-two grid resolving log|f'| to ``tol``."""
        r = abs(self.a)
        if r == 0.0:
            return max(n_min, 8)
        need = 2 * int(np.ceil(np.log(tol) / np.log(r))) + 2
        n = max(n_min, 8)
        while n < need:
            n *= 2
        return n


@dataclass(frozen=True)
class DiskImmersion:
    """Phi(z) = base + sum_n dcoeffs[n] z^(n+1)/(n+1), so Phi'(z) = sum_n dcoeffs[n] z^n.

    ``exact`` optionally holds a closed form for Phi', used for fast
    evaluation away from the power series; ``primitive`` likewise for Phi.
    """

    base: complex
    dcoeffs: np.ndarray
    exact: Optional[Callable] = field(default=None, compare=False)
    leakage: float = 0.0
    primitive: Optional[Callable] = field(default=None, compare=False)

    def derivative(self, z):
        z = np.asarray(z, dtype=complex)
        if self.exact is not None:
            return self.exact(z)
        return np.polyval(self.dcoeffs[::-1], z)

    def _need_coeffs(self):
        if self.dcoeffs.size == 0:
            raise GeometryError("this immersion only carries a closed-form derivative")

    def second_derivative(self, z):
        self._need_coeffs()
        z = np.asarray(z, dtype=complex)
        n = np.arange(1, self.dcoeffs.size)
        return np.polyval((n * self.dcoeffs[1:])[::-1], z)

    def __call__(self, z):
        z = np.asarray(z, dtype=complex)
        if self.primitive is not None:
            return self.primitive(z)
        self._need_coeffs()
        n = np.arange(self.dcoeffs.size)
        c = np.concatenate([[self.base], self.dcoeffs / (n + 1)])
        return np.polyval(c[::-1], z)

    def boundary_derivative(self, m: int) -> np.ndarray:
        """Phi'(exp(i theta_j)) on the m-point grid."""
        sp.check_grid_size(m)
        if self.exact is not None:
            return self.exact(np.exp(1j * sp.grid(m)))
        if self.dcoeffs.size > m:
            raise GeometryError("grid too coarse for the stored coefficients")
        c = np.zeros(m, dtype=complex)
        c[:self.dcoeffs.size] = self.dcoeffs
        return np.fft.ifft(c) * m

    @classmethod
    def from_derivative(cls, func: Callable, n_coeffs: int, exact: bool = True) -> "DiskImmersion":
        """Taylor coefficients of a Phi' holomorphic on a neighbourhood of the closed disk."""
        m = 2 * n_coeffs
        sp.check_grid_size(m)
        vals = func(np.exp(1j * sp.grid(m)))
        c = np.fft.fft(vals) / m
        b = c[:n_coeffs]
        base = -np.sum(b / (np.arange(n_coeffs) + 1.0))
        leak = float(np.sqrt(np.sum(np.abs(c[n_coeffs:]) ** 2) / np.sum(np.abs(c) ** 2)))
        return cls(complex(base), b, func if exact else None, leak)


def immersion_from_factor(lam, rho_shift: float = 0.0, leak_tol: float = 1e-10) -> DiskImmersion:
    """Holomorphic immersion of the disk with |Phi'| = exp(lam) on the circle.

    Gauge: Phi(1) = 0 and Phi'(0) > 0.  ``rho_shift`` adds a constant to the
    harmonic conjugate before exponentiating; the gauge removes it again.
    """
    lam = _lam(lam)
    n = lam.size
    rho = sp.hilbert_transform(lam)
    m = 2 * n
    vals = np.exp(sp.resample(lam, m) + 1j * (sp.resample(rho, m) + rho_shift))
    c = np.fft.fft(vals) / m
    keep = n // 2 + 1
    b = c[:keep].copy()
    total = np.sum(np.abs(c) ** 2)
    leak = float(np.sqrt(np.sum(np.abs(c[keep:]) ** 2) / total))
    if leak > leak_tol:
        raise AliasingError(
            f"boundary derivative is not resolved (relative leakage {leak:.2e}); "
            f"increase N beyond {n}")
    b *= np.conj(b[0]) / abs(b[0])
    base = -np.sum(b / (np.arange(keep) + 1.0))
    return DiskImmersion(complex(base), b, None, leak)


def _fine_size(phi: DiskImmersion, minimum: int = 1024, maximum: int = 2 ** 20) -> int:
    m = minimum
    while m < 4 * phi.dcoeffs.size:
        m *= 2
    if phi.exact is not None:
        # closed-form derivatives: refine until log|Phi'| is resolved
        while m < maximum:
            lam = np.log(np.abs(phi.boundary_derivative(m)))
            if sp.tail_energy_fraction(lam) <= 1e-16:
                break
            m *= 2
    return m


def degree(phi: DiskImmersion, m: Optional[int] = None, tol: float = 0.1) -> int:
    """Winding number of the tangent of Phi(S^1)."""
    m = m or _fine_size(phi)
    z = np.exp(1j * sp.grid(m))
    d1 = 1j * z * phi.derivative(z)
    if phi.exact is None:
        d2 = -z * phi.derivative(z) - z ** 2 * phi.second_derivative(z)
    else:
        # differentiate the sampled tangent spectrally
        d2 = sp.derivative(d1)
    integrand = np.imag(np.conj(d1) * d2) / np.abs(d1) ** 2
    deg = float(np.mean(integrand))
    k = int(round(deg))
    if abs(deg - k) > tol:
        raise GeometryError(f"degree {deg:.4f} is not close to an integer")
    return k


@dataclass
class PlanarCurve:
    """Arc-length samples of a closed curve: s_j = j L / M."""

    points: np.ndarray
    tangent: np.ndarray
    curvature: np.ndarray
    length: float
    theta: np.ndarray
    closed: bool = True
    closure_defect: float = 0.0

    @property
    def s(self) -> np.ndarray:
        return self.length * np.arange(self.points.size) / self.points.size

    @property
    def x(self):
        return self.points.real

    @property
    def y(self):
        return self.points.imag


_GL_X, _GL_W = np.polynomial.legendre.leggauss(10)


def arc_length_inverse(lam, s_targets, tol: float = 1e-12, maxiter: int = 60,
                       speed: Optional[Callable] = None) -> np.ndarray:
    """Angles theta with int_0^theta exp(lam) = s, by bracketing plus Newton.

    ``speed`` optionally evaluates exp(lam) exactly; partial integrals are
    then taken by Gauss-Legendre within one grid cell instead of by
    trigonometric interpolation.
    """
    lam = _lam(lam)
    n = lam.size
    e = np.exp(lam)
    th_grid = sp.grid(n)
    s_nodes = np.append(sp.cumulative_grid(e), sp.integrate_circle(e))
    nodes = np.append(th_grid, TWO_PI)
    s_targets = np.asarray(s_targets, dtype=float)
    idx = np.clip(np.searchsorted(s_nodes, s_targets, side="right") - 1, 0, n - 1)
    lo, hi = nodes[idx].copy(), nodes[idx + 1].copy()
    frac = (s_targets - s_nodes[idx]) / (s_nodes[idx + 1] - s_nodes[idx])
    th = lo + frac * (hi - lo)
    left, s_left = nodes[idx], s_nodes[idx]

    if speed is None:
        def cum(t):
            return sp.cumulative_integral(e, t)

        def rate(t):
            return sp.trig_eval(e, t)
    else:
        def cum(t):
            half = 0.5 * (t - left)
            pts = left[:, None] + half[:, None] * (_GL_X[None, :] + 1.0)
            return s_left + half * (speed(pts) @ _GL_W)
        rate = speed

    scale = max(1.0, float(s_nodes[-1]))
    for _ in range(maxiter):
        f = cum(th) - s_targets
        if np.max(np.abs(f)) <= tol * scale:
            break
        lo = np.where(f < 0, th, lo)
        hi = np.where(f > 0, th, hi)
        new = th - f / rate(th)
        bad = (new <= lo) | (new >= hi)
        new = np.where(bad, 0.5 * (lo + hi), new)
        done = np.max(np.abs(new - th)) < tol
        th = new
        if done:
            break
    return th


def trace_curve(phi: DiskImmersion, m: Optional[int] = None, n: Optional[int] = None) -> PlanarCurve:
    """Sample Phi(S^1) at m points equally spaced in arc length."""
    n = n or _fine_size(phi)
    m = m or n
    bd = phi.boundary_derivative(n)
    lam = np.log(np.abs(bd))
    L = float(sp.integrate_circle(np.exp(lam)))
    s = L * np.arange(m) / m
    def speed(t):
        return np.abs(phi.derivative(np.exp(1j * t)))
    th = arc_length_inverse(lam, s, speed=speed)
    z = np.exp(1j * th)
    dphi = phi.derivative(z)
    tau = 1j * z * dphi / np.abs(dphi)
    pts = phi(z)
    h = L / m
    # unwrap the tangent angle, remove its winding, differentiate spectrally in s
    step = np.angle(np.roll(tau, -1) / tau)
    winding = np.sum(step) / TWO_PI
    psi = np.concatenate([[0.0], np.cumsum(step[:-1])])
    periodic = psi - TWO_PI * winding * np.arange(m) / m
    kappa = (TWO_PI / L) * (winding + sp.derivative(periodic))
    defect = float(abs(h * np.sum(tau)))
    return PlanarCurve(pts, tau, kappa, L, th, defect <= 1e-8 * L, defect)


def total_turning(obj) -> float:
    """int |kappa| ds for a PlanarCurve or, spectrally, for a conformal factor."""
    if isinstance(obj, PlanarCurve):
        return float(np.sum(np.abs(obj.curvature)) * obj.length / obj.points.size)
    lam = _lam(obj)
    return float(sp.integrate_circle(np.abs(sp.half_laplacian(lam, on_alias="ignore") + 1.0)))


def parametric_turning(points) -> float:
    """int |kappa| ds of a closed curve sampled uniformly in a periodic parameter.

    Uses spectral derivatives: |kappa| ds = |Im(conj(z') z'')| / |z'|^2 dt.
    Raises if the sampled curve is not immersed.
    """
    z = np.asarray(points, dtype=complex)
    d1 = sp.derivative(z)
    d2 = sp.derivative(z, order=2)
    speed2 = np.abs(d1) ** 2
    if np.min(speed2) <= 1e-20 * np.max(speed2):
        raise GeometryError("curve is not immersed")
    return float(sp.integrate_circle(np.abs(np.imag(np.conj(d1) * d2)) / speed2))


def polyline_turning(points, closed: bool = False) -> float:
    """Sum of absolute exterior angles of a polygonal curve."""
    p = np.asarray(points, dtype=complex)
    if closed:
        p = np.append(p, p[:2])
    e = np.diff(p)
    return float(np.sum(np.abs(np.angle(e[1:] / e[:-1]))))


def moebius_pullback(lam, m: MoebiusMap, n: Optional[int] = None, on_alias: str = "raise") -> np.ndarray:
    """lam o f + log|f'| on the n-point grid (n escalated from m.resolution if omitted)."""
    lam = _lam(lam)
    if n is None:
        n = max(lam.size, m.resolution())
    th = sp.grid(n)
    out = compose(lam, m, n) + m.log_abs_derivative(th)
    frac = sp.tail_energy_fraction(out)
    if frac > 1e-16 and on_alias != "ignore":
        msg = (f"pulled-back factor is under-resolved at N={n} "
               f"(tail fraction {frac:.1e}); try N={2 * max(n, m.resolution())}")
        if on_alias == "raise":
            raise AliasingError(msg)
        import warnings
        warnings.warn(msg, sp.AliasingWarning, stacklevel=2)
    return out


def compose(u, m: MoebiusMap, n: Optional[int] = None) -> np.ndarray:
    """u o f restricted to the circle, sampled on the n-point grid."""
    u = np.asarray(u)
    n = n or u.size
    ang = m.boundary_angle(sp.grid(n))
    c = np.fft.fft(u) / u.size
    if np.allclose(c[1:], 0.0, atol=1e-15 * max(1.0, abs(c[0]))):
        return np.full(n, c[0].real if np.isrealobj(u) else c[0])
    return sp.trig_eval(u, ang)


def half_harmonic_residual(phi_samples) -> float:
    """sup |d_theta phi . (-Delta)^{1/2} phi| for a complex boundary trace."""
    phi = np.asarray(phi_samples, dtype=complex)
    d = sp.derivative(phi)
    h = sp.half_laplacian(phi, on_alias="ignore")
    return float(np.max(np.abs(np.real(np.conj(d) * h))))


@dataclass(frozen=True)
class MoebiusFit:
    map: MoebiusMap
    scale: float
    shift: complex
    sup_error: float

    def __call__(self, z):
        return self.shift + self.scale * self.map(z)


def fit_moebius(phi: DiskImmersion, m: int = 256) -> MoebiusFit:
    """Least-squares fit Phi ~ shift + scale exp(i theta0)(z - a)/(1 - conj(a) z)."""
    z = np.exp(1j * sp.grid(m))
    target = phi(z)
    b0 = phi.derivative(0.0)
    b1 = phi.second_derivative(0.0) if phi.exact is None else (
        phi.derivative(1e-4) - phi.derivative(-1e-4)) / 2e-4
    a0 = np.conj(b1 / (2.0 * b0))
    if abs(a0) >= 0.99:
        a0 = 0.99 * a0 / abs(a0)
    S = b0 / (1.0 - abs(a0) ** 2)
    c0 = phi(0.0) + S * a0
    x0 = np.array([a0.real, a0.imag, np.log(abs(S)), np.angle(S), c0.real, c0.imag])

    def model(x):
        a = x[0] + 1j * x[1]
        return x[4] + 1j * x[5] + np.exp(x[2] + 1j * x[3]) * (z - a) / (1.0 - np.conj(a) * z)

    def resid(x):
        r = model(x) - target
        return np.concatenate([r.real, r.imag])

    sol = optimize.least_squares(resid, x0, xtol=1e-15, ftol=1e-15, gtol=1e-15)
    x = sol.x
    a = x[0] + 1j * x[1]
    if abs(a) >= 1.0 - 1e-12:
        raise GeometryError("fitted Moebius parameter left the disk")
    err = float(np.max(np.abs(model(x) - target)))
    return MoebiusFit(MoebiusMap(a, float(x[3])), float(np.exp(x[2])), complex(x[4] + 1j * x[5]), err)


def curve_to_csv(curve: PlanarCurve, path) -> None:
    rows = np.column_stack([curve.s, curve.x, curve.y, curve.tangent.real,
                            curve.tangent.imag, curve.curvature])
    with open(path, "w") as fh:
        fh.write("s,x,y,tx,ty,kappa\n")
        for r in rows:
            fh.write(",".join(f"{v:.17g}" for v in r) + "\n")


def curve_to_svg(curve: PlanarCurve, path, half_width: float = 4.0) -> None:
    """Polyline SVG; one length unit is 100 px and the viewbox is fixed."""
    scale = 100.0
    w = 2 * half_width * scale
    pts = " ".join(f"{scale * p.real:.6f},{-scale * p.imag:.6f}" for p in curve.points)
    vb = f"{-half_width * scale:g} {-half_width * scale:g} {w:g} {w:g}"
    svg = (f'<svg xmlns="http://www.w3.org/2000/svg" viewBox="{vb}" width="{w:g}" height="{w:g}">\n'
           f'<polygon points="{pts}" fill="none" stroke="black" stroke-width="1"/>\n</svg>\n')
    with open(path, "w") as fh:
        fh.write(svg)

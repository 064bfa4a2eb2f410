"""
Fourier tools for periodic fields on the unit circle.

Fields are sampled on the uniform grid theta_j = 2*pi*j/N with N a power of
two.  Fourier coefficients follow the normalisation

    u_hat(n) = (1/2pi) int_0^{2pi} u(theta) exp(-i n theta) dtheta,

so that ``analyze`` is ``np.fft.fft(u) / N``.  The half-Laplacian acts as the
multiplier |n| and the Hilbert transform as -i sign(n), hence
H(cos n.) = sin n. and (-Delta)^{1/2} = H d/dtheta.
"""
from __future__ import annotations

import json
import warnings
from dataclasses import dataclass
from typing import Callable

import numpy as np
from scipy import integrate

TWO_PI = 2.0 * np.pi
DEFAULT_N = 1024


class SpectralError(ValueError):
    """Raised for invalid grids or arguments."""


class AliasingWarning(UserWarning):
    pass


class AliasingError(SpectralError):
    pass


def check_grid_size(n: int) -> int:
    n = int(n)
    if n < 8 or n & (n - 1):
        raise SpectralError(f"grid size must be a power of two >= 8, got {n}")
    return n


def grid(n: int = DEFAULT_N) -> np.ndarray:
    """Uniform nodes 2*pi*j/n, j = 0..n-1."""
    n = check_grid_size(n)
    return TWO_PI * np.arange(n) / n


def wavenumbers(n: int) -> np.ndarray:
    # integer frequencies in FFT order; the Nyquist mode is reported as -n/2
    return np.fft.fftfreq(n, d=1.0 / n)


@dataclass(frozen=True)
class GridField:
    """Samples of a (real or complex) field on the uniform circle grid."""

    samples: np.ndarray

    def __post_init__(self):
        s = np.asarray(self.samples)
        if s.ndim != 1:
            raise SpectralError("samples must be one-dimensional")
        check_grid_size(s.size)
        object.__setattr__(self, "samples", s)

    @property
    def n(self) -> int:
        return self.samples.size

    @property
    def theta(self) -> np.ndarray:
        return grid(self.n)

    def __array__(self, dtype=None, copy=None):
        return np.asarray(self.samples, dtype=dtype)

    @classmethod
    def from_function(cls, func: Callable, n: int = DEFAULT_N) -> "GridField":
        return cls(np.asarray(func(grid(n))))

    def to_json(self) -> str:
        s = np.asarray(self.samples)
        return json.dumps({
            "n": self.n,
            "samples_re": np.real(s).tolist(),
            "samples_im": np.imag(s).tolist(),
        })

    @classmethod
    def from_json(cls, text: str) -> "GridField":
        d = json.loads(text)
        re = np.asarray(d["samples_re"], dtype=float)
        im = np.asarray(d["samples_im"], dtype=float)
        if re.size != d["n"] or im.size != d["n"]:
            raise SpectralError("sample count does not match n")
        vals = re if not np.any(im) else re + 1j * im
        return cls(vals)


@dataclass(frozen=True)
class SpectralField:
    """Fourier coefficients in FFT order, with the 1/(2pi) normalisation."""

    coeffs: np.ndarray
    real: bool = True

    @property
    def n(self) -> int:
        return self.coeffs.size

    @property
    def k(self) -> np.ndarray:
        return wavenumbers(self.n)


def _samples(u) -> np.ndarray:
    u = np.asarray(u)
    check_grid_size(u.size)
    return u


def analyze(u) -> SpectralField:
    u = _samples(u)
    return SpectralField(np.fft.fft(u) / u.size, real=bool(np.isrealobj(u)))


def synthesize(f: SpectralField) -> GridField:
    vals = np.fft.ifft(f.coeffs) * f.n
    return GridField(vals.real if f.real else vals)


def tail_energy_fraction(u) -> float:
    """Fraction of spectral energy carried by the top quarter of frequencies."""
    u = _samples(u)
    c = np.abs(np.fft.fft(u)) ** 2
    k = np.abs(wavenumbers(u.size))
    total = c.sum()
    if total == 0.0:
        return 0.0
    return float(c[k > 3 * u.size / 8].sum() / total)


def _alias_check(u, tol: float, on_alias: str) -> None:
    if on_alias == "ignore":
        return
    frac = tail_energy_fraction(u)
    if frac > tol:
        msg = (f"spectral tail energy fraction {frac:.3e} exceeds {tol:.1e}; "
               f"the field is not resolved at N={np.size(u)}")
        if on_alias == "raise":
            raise AliasingError(msg)
        warnings.warn(msg, AliasingWarning, stacklevel=3)


def _apply_multiplier(u, mult: np.ndarray) -> np.ndarray:
    u = _samples(u)
    out = np.fft.ifft(np.fft.fft(u) * mult)
    return out.real if np.isrealobj(u) else out


def half_laplacian(u, alias_tol: float = 1e-16, on_alias: str = "warn") -> np.ndarray:
    """(-Delta)^{1/2} u via the multiplier |n|.

    ``on_alias`` is one of 'warn', 'raise' or 'ignore' and controls the
    reaction when more than ``alias_tol`` of the spectral energy sits in the
    top quarter of the spectrum.
    """
    u = _samples(u)
    _alias_check(u, alias_tol, on_alias)
    return _apply_multiplier(u, np.abs(wavenumbers(u.size)))


def hilbert_transform(u) -> np.ndarray:
    u = _samples(u)
    k = wavenumbers(u.size)
    mult = -1j * np.sign(k)
    # the Nyquist mode has no partner, so it is dropped
    mult[u.size // 2] = 0.0
    return _apply_multiplier(u, mult)


def derivative(u, order: int = 1) -> np.ndarray:
    u = _samples(u)
    k = wavenumbers(u.size)
    mult = (1j * k) ** order
    if order % 2:
        mult[u.size // 2] = 0.0
    return _apply_multiplier(u, mult)


def resample(u, m: int) -> np.ndarray:
    """Band-limited interpolation of u onto the uniform grid with m points."""
    u = _samples(u)
    m = check_grid_size(m)
    n = u.size
    c = np.fft.fft(u) / n
    out = np.zeros(m, dtype=complex)
    if m >= n:
        half = n // 2
        out[:half] = c[:half]
        out[-half + 1:] = c[-half + 1:]
        # split the Nyquist coefficient symmetrically
        out[half] += 0.5 * c[half]
        out[-half] += 0.5 * c[half]
    else:
        half = m // 2
        out[:half] = c[:half]
        out[-half + 1:] = c[-half + 1:]
        out[half] = c[half] + c[-half]
    vals = np.fft.ifft(out) * m
    return vals.real if np.isrealobj(u) else vals


def dealiased_product(u, v) -> np.ndarray:
    """Pointwise product computed on a twice oversampled grid."""
    u, v = _samples(u), _samples(v)
    n = u.size
    w = resample(u, 2 * n) * resample(v, 2 * n)
    return resample(w, n)


def _symmetric_coeffs(u):
    # coefficients and integer frequencies with the Nyquist term split in two
    u = _samples(u)
    n = u.size
    c = np.fft.fft(u) / n
    k = wavenumbers(n).astype(float)
    c = np.append(c, 0.5 * c[n // 2])
    c[n // 2] *= 0.5
    k = np.append(k, n / 2)
    return c, k


def trig_eval(u, theta, chunk: int = 4096) -> np.ndarray:
    """Evaluate the trigonometric interpolant of u at arbitrary angles."""
    c, k = _symmetric_coeffs(u)
    theta = np.asarray(theta, dtype=float)
    flat = theta.ravel()
    out = np.empty(flat.size, dtype=complex)
    for s in range(0, flat.size, chunk):
        t = flat[s:s + chunk]
        out[s:s + chunk] = np.exp(1j * np.outer(t, k)) @ c
    out = out.reshape(theta.shape)
    return out.real if np.isrealobj(u) else out


def cumulative_integral(u, theta) -> np.ndarray:
    """int_0^theta u for the trigonometric interpolant of u."""
    c, k = _symmetric_coeffs(u)
    theta = np.asarray(theta, dtype=float)
    nz = k != 0
    mean = c[~nz].sum()
    w = np.zeros_like(c)
    w[nz] = c[nz] / (1j * k[nz])
    # integral of exp(ik t) from 0 to theta is (exp(ik theta) - 1)/(ik)
    osc = trig_eval_coeffs(w, k, theta) - w.sum()
    out = mean * theta + osc
    return out.real if np.isrealobj(u) else out


def cumulative_grid(u) -> np.ndarray:
    """cumulative_integral at the grid nodes, by FFT."""
    u = np.asarray(u)
    n = u.size
    c = np.fft.fft(u) / n
    k = wavenumbers(n)
    w = np.zeros_like(c, dtype=complex)
    nz = (k != 0) & (np.abs(k) != n // 2)
    w[nz] = c[nz] / (1j * k[nz])
    # the split Nyquist mode integrates to zero at the nodes
    out = c[0] * grid(n) + np.fft.ifft(w) * n - w.sum()
    return out.real if np.isrealobj(u) else out


def trig_eval_coeffs(c, k, theta, chunk: int = 4096) -> np.ndarray:
    theta = np.asarray(theta, dtype=float)
    flat = theta.ravel()
    out = np.empty(flat.size, dtype=complex)
    for s in range(0, flat.size, chunk):
        out[s:s + chunk] = np.exp(1j * np.outer(flat[s:s + chunk], k)) @ c
    return out.reshape(theta.shape)


def arc_integral(u, center, half_width) -> np.ndarray:
    """Integral of u over the arc [center - half_width, center + half_width]."""
    c, k = _symmetric_coeffs(u)
    center = np.atleast_1d(np.asarray(center, dtype=float))
    nz = k != 0
    wts = np.where(nz, 2.0 * np.sin(k * half_width) / np.where(nz, k, 1.0), 2.0 * half_width)
    out = trig_eval_coeffs(c * wts, k, center)
    return out.real if np.isrealobj(u) else out


def mean(u) -> float:
    return float(np.mean(np.real(_samples(u))))


def integrate_circle(u) -> float:
    """Trapezoid (spectrally accurate) integral over the circle."""
    u = _samples(u)
    return TWO_PI * np.mean(u)


def harmonic_extension(u, r, theta) -> np.ndarray:
    """Evaluate sum_n u_hat(n) r^|n| exp(i n theta) for 0 <= r < 1."""
    r = np.asarray(r, dtype=float)
    if np.any(r >= 1.0) or np.any(r < 0.0):
        raise SpectralError("harmonic extension needs 0 <= r < 1; boundary values are the samples")
    c, k = _symmetric_coeffs(u)
    r, theta = np.broadcast_arrays(r, np.asarray(theta, dtype=float))
    flat_r, flat_t = r.ravel(), theta.ravel()
    out = np.empty(flat_r.size, dtype=complex)
    ak = np.abs(k)
    for s in range(0, flat_r.size, 2048):
        rr = flat_r[s:s + 2048, None]
        tt = flat_t[s:s + 2048, None]
        with np.errstate(under="ignore"):
            out[s:s + 2048] = (rr ** ak * np.exp(1j * tt * k)) @ c
    out = out.reshape(r.shape)
    return out.real if np.isrealobj(u) else out


def green_solve(f, mean_tol: float = 1e-8) -> np.ndarray:
    """Mean-zero solution of (-Delta)^{1/2} u = f.

    The mean of f is projected out; a warning is raised when it exceeds
    ``mean_tol``.
    """
    f = _samples(f)
    c = np.fft.fft(f) / f.size
    if abs(c[0]) > mean_tol:
        warnings.warn(f"right-hand side has mean {abs(c[0]):.3e}; projecting it out",
                      RuntimeWarning, stacklevel=2)
    k = np.abs(wavenumbers(f.size))
    mult = np.zeros(f.size)
    mult[1:] = 1.0 / k[1:]
    return _apply_multiplier(f, mult)


def green_convolve(f) -> np.ndarray:
    """(G * f)(theta) = int G(theta - t) f(t) dt, G the fundamental solution."""
    f = _samples(f)
    k = np.abs(wavenumbers(f.size))
    mult = np.zeros(f.size)
    mult[1:] = 1.0 / k[1:]
    return _apply_multiplier(f, mult)


class FundamentalSolution:
    """Closed forms for G(theta) = -(1/2pi) log(2 - 2 cos theta).

    ``singular`` is F = (1/pi) log(pi/|theta|) on [-pi, pi] and ``regular``
    the continuous remainder G - F.
    """

    @staticmethod
    def _wrap(theta):
        return np.angle(np.exp(1j * np.asarray(theta, dtype=float)))

    def __call__(self, theta):
        theta = np.asarray(theta, dtype=float)
        return -np.log(4.0 * np.sin(theta / 2.0) ** 2) / TWO_PI

    def singular(self, theta):
        t = np.abs(self._wrap(theta))
        return np.log(np.pi / t) / np.pi

    def regular(self, theta):
        t = np.abs(self._wrap(theta))
        small = t < 1e-6
        ts = np.where(small, 1.0, t)
        val = self(ts) - self.singular(ts)
        # series of -(1/2pi) log(sinc^2(t/2)) - (1/pi) log(pi) near zero
        lim = -np.log(np.pi) / np.pi + t ** 2 / (24.0 * np.pi)
        return np.where(small, lim, val)

    def coefficients(self, n: int) -> np.ndarray:
        # G_hat(k) = 1/(2 pi |k|), zero mean
        k = np.abs(wavenumbers(n))
        c = np.zeros(n)
        c[1:] = 1.0 / (TWO_PI * k[1:])
        return c


def mt_functional(f, eps: float, exponent: float | None = None) -> float:
    """eps * int exp(c |G * f|) dtheta with c = pi - eps unless ``exponent`` is given.

    f is sampled on the grid; the caller is responsible for the L1
    normalisation int |f| <= 1.
    """
    if exponent is None:
        if not 0.0 < eps < np.pi:
            raise SpectralError("eps must lie in (0, pi)")
        exponent = np.pi - eps
    u = green_convolve(f)
    return float(eps * integrate_circle(np.exp(exponent * np.abs(u))))


def mt_probe(f, eps: float) -> float:
    """Same functional with the supercritical exponent pi + eps."""
    return mt_functional(f, eps, exponent=np.pi + eps)


def mt_point_mass_limit(eps: float) -> float:
    """The subcritical functional of the unit point mass: eps int exp((pi - eps)|G|).

    Concentrating bumps approach this value from below; it is finite for
    every eps in (0, pi) because |G| ~ (1/pi) log(1/|theta|).
    """
    if not 0.0 < eps < np.pi:
        raise SpectralError("eps must lie in (0, pi)")
    G = FundamentalSolution()
    c = np.pi - eps
    val = integrate.quad(lambda t: np.exp(c * np.abs(G(t))), 0.0, np.pi,
                         limit=400, epsabs=1e-12, epsrel=1e-12)[0]
    return float(2.0 * eps * val)


def pv_half_laplacian(func: Callable, theta, excl: float = 1e-3) -> np.ndarray:
    """Principal-value quadrature of (1/pi) PV int (u(theta) - u(t)) / (2 - 2cos(theta - t)) dt.

    The symmetric pairing t = theta +- s removes the odd singular part; the
    remaining even integrand is integrated by adaptive quadrature on
    [excl, pi] and by the midpoint value on [0, excl], which is the
    quadratic Taylor correction.
    """
    theta = np.atleast_1d(np.asarray(theta, dtype=float))
    out = np.empty(theta.size)
    for i, th in enumerate(theta):
        u0 = func(th)

        def F(s, th=th, u0=u0):
            return (2.0 * u0 - func(th + s) - func(th - s)) / (2.0 - 2.0 * np.cos(s))

        val, _ = integrate.quad(F, excl, np.pi, limit=400, epsabs=1e-13, epsrel=1e-12)
        out[i] = (val + excl * F(0.5 * excl)) / np.pi
    return out


def compact_bump(x, width: float) -> np.ndarray:
    """(1 - (x/w)^2)^3 on |x| < w, scaled to unit integral over the line."""
    t = np.clip(1.0 - (np.asarray(x, dtype=float) / width) ** 2, 0.0, None)
    return t ** 3 / (width * 32.0 / 35.0)

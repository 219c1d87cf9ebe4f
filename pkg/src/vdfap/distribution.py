"""First-arrival-position (FAP) densities and the vertically drifted sub-family.

A molecule released at height ``lambda`` above an absorbing plane diffuses
with unit diffusion scale and normalized drift ``u`` (drift / sigma^2). The
VDFAP family has no parallel drift and ``u < 0`` (drift towards the
receiver). Points are arrays whose last axis has length ``d`` (for ``d = 1``
a bare scalar or a 1-D array of positions is also accepted).
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np
from scipy import integrate

from . import specfun
from .errors import DimensionError, DomainError, MismatchError, ParameterError

_LOG_2PI = math.log(2.0 * math.pi)

#: Smallest admissible |u|; the zero-drift (Cauchy) limit has no covariance.
MIN_ABS_DRIFT = 1e-12


@dataclass(frozen=True)
class VdfapParams:
    """Parameters of VDFAP^(d)(u, lambda)."""

    d: int
    u: float
    lam: float

    def __post_init__(self):
        if self.d not in (1, 2):
            raise DimensionError(f"d must be 1 or 2, got {self.d!r}")
        u, lam = float(self.u), float(self.lam)
        if not (math.isfinite(u) and u < 0):
            raise ParameterError(f"drift u must be negative and finite, got {self.u!r}")
        if abs(u) < MIN_ABS_DRIFT:
            raise ParameterError(f"|u| = {abs(u):g} is below {MIN_ABS_DRIFT:g}")
        if not (math.isfinite(lam) and lam > 0):
            raise ParameterError(f"lambda must be positive and finite, got {self.lam!r}")
        if not math.isfinite(abs(u) * lam):
            raise ParameterError("|u| * lambda overflows")
        object.__setattr__(self, "u", u)
        object.__setattr__(self, "lam", lam)

    @property
    def s(self) -> float:
        """Dimensionless product |u| * lambda."""
        return abs(self.u) * self.lam


@dataclass(frozen=True)
class FapParams:
    """General FAP parameters with a parallel drift component."""

    d: int
    u_par: tuple
    u_d: float
    lam: float

    def __post_init__(self):
        if self.d not in (1, 2):
            raise DimensionError(f"d must be 1 or 2, got {self.d!r}")
        u_par = tuple(float(v) for v in np.atleast_1d(self.u_par))
        if len(u_par) != self.d or not all(math.isfinite(v) for v in u_par):
            raise ParameterError(f"u_par must be a finite {self.d}-vector")
        if not (math.isfinite(self.u_d) and self.u_d < 0):
            raise ParameterError("u_D must be negative")
        if not (math.isfinite(self.lam) and self.lam > 0):
            raise ParameterError("lambda must be positive")
        object.__setattr__(self, "u_par", u_par)
        object.__setattr__(self, "u_d", float(self.u_d))
        object.__setattr__(self, "lam", float(self.lam))

    @property
    def u_norm(self) -> float:
        return math.sqrt(sum(v * v for v in self.u_par) + self.u_d**2)


def _points(n, d: int) -> np.ndarray:
    arr = np.asarray(n, dtype=float)
    if d == 1 and (arr.ndim == 0 or arr.shape[-1] != 1):
        arr = arr[..., None]
    if arr.shape[-1] != d:
        raise DimensionError(f"expected points with last axis {d}, got shape {arr.shape}")
    if not np.all(np.isfinite(arr)):
        raise DomainError("points must be finite")
    return arr


def _out(values: np.ndarray):
    return float(values) if values.ndim == 0 else values


def _log_kernel(d: int, unorm: float, lam: float, r2: np.ndarray) -> np.ndarray:
    # log[ K_nu(rho) / rho^nu ] with rho = |u| sqrt(r^2 + lambda^2), nu = (d+1)/2
    nu = specfun.BesselOrder.for_dimension(d)
    rho = unorm * np.sqrt(r2 + lam * lam)
    return specfun.log_bessel_k(nu, rho) - float(nu) * np.log(rho)


def fap_logpdf(p: FapParams, n):
    """Log-density of the general FAP law (parallel drift allowed)."""
    x = _points(n, p.d)
    r2 = np.sum(x * x, axis=-1)
    unorm = p.u_norm
    log_norm = math.log(2.0 * p.lam) + (p.d + 1) * (math.log(unorm) - 0.5 * _LOG_2PI)
    drift = x @ np.asarray(p.u_par) - p.u_d * p.lam
    return _out(log_norm + drift + _log_kernel(p.d, unorm, p.lam, np.asarray(r2)))


def fap_pdf(p: FapParams, n):
    """Density of the general FAP law; strictly positive for finite ``n``."""
    return _out(np.exp(np.asarray(fap_logpdf(p, n))))


def vdfap_logpdf(p: VdfapParams, n):
    """Log-density of VDFAP^(d)(u, lambda); depends on ``n`` only via its norm."""
    x = _points(n, p.d)
    return _radial_logpdf(p, np.sum(x * x, axis=-1))


def _radial_logpdf(p: VdfapParams, r2):
    au = abs(p.u)
    log_norm = math.log(2.0 * p.lam) + (p.d + 1) * (math.log(au) - 0.5 * _LOG_2PI) + p.s
    return _out(log_norm + _log_kernel(p.d, au, p.lam, np.asarray(r2, dtype=float)))


def vdfap_pdf(p: VdfapParams, n):
    """Density of VDFAP^(d)(u, lambda)."""
    return _out(np.exp(np.asarray(vdfap_logpdf(p, n))))


def radial_pdf(p: VdfapParams, r):
    """Density as a function of the radius ``|n|`` (not the radial law of |N|)."""
    r = np.asarray(r, dtype=float)
    return _out(np.exp(np.asarray(_radial_logpdf(p, r * r))))


def _omega_norm2(p: VdfapParams, omega) -> np.ndarray:
    w = _points(omega, p.d)
    return np.sum(w * w, axis=-1)


def _cf_exponent(lam: float, au: float, w2: np.ndarray) -> np.ndarray:
    # sqrt(w^2 + u^2) - |u| written without cancellation at small w
    root = np.sqrt(w2 + au * au)
    return -lam * w2 / (root + au)


def vdfap_cf(p: VdfapParams, omega):
    """Characteristic function exp(-lambda (sqrt(|w|^2 + u^2) - |u|)), real valued."""
    w2 = _omega_norm2(p, omega)
    return _out(np.exp(_cf_exponent(p.lam, abs(p.u), w2)))


def cf_gradient(p: VdfapParams, omega) -> np.ndarray:
    """Gradient of the CF; shape ``(..., d)``."""
    w = _points(omega, p.d)
    w2 = np.sum(w * w, axis=-1)
    root = np.sqrt(w2 + p.u * p.u)
    phi = np.exp(_cf_exponent(p.lam, abs(p.u), w2))
    return (-p.lam * phi / root)[..., None] * w


def cf_hessian(p: VdfapParams, omega) -> np.ndarray:
    """Hessian of the CF; shape ``(..., d, d)``."""
    w = _points(omega, p.d)
    w2 = np.sum(w * w, axis=-1)
    root = np.sqrt(w2 + p.u * p.u)
    phi = np.exp(_cf_exponent(p.lam, abs(p.u), w2))
    eye = np.eye(p.d)
    diag = (-(p.lam * phi) / root)[..., None, None] * eye
    outer = w[..., :, None] * w[..., None, :]
    coef = p.lam * phi * (1.0 + p.lam * root) / root**3
    return diag + coef[..., None, None] * outer


def mean(p: VdfapParams) -> np.ndarray:
    return np.zeros(p.d)


def covariance(p: VdfapParams) -> np.ndarray:
    """E[N N^T] = (lambda/|u|) I_d."""
    return (p.lam / abs(p.u)) * np.eye(p.d)


def stable_sum(p1: VdfapParams, p2: VdfapParams) -> VdfapParams:
    """Law of N1 + N2 for independent VDFAP vectors sharing d and u.

    The family is closed under convolution at fixed drift, with the
    distances adding.
    """
    if p1.d != p2.d:
        raise MismatchError(f"dimension mismatch: {p1.d} vs {p2.d}")
    if p1.u != p2.u:
        raise MismatchError(f"drift mismatch: {p1.u!r} vs {p2.u!r}")
    return VdfapParams(p1.d, p1.u, p1.lam + p2.lam)


def entropy_core(s):
    """g(s) = s e^s (e Ei(-1-s) - 3 Ei(-s)), evaluated without overflow."""
    arr = np.asarray(s, dtype=float)
    if not np.all(arr > 0):
        raise DomainError("s must be > 0")
    val = -arr * specfun.e1_scaled(arr + 1.0) + 3.0 * arr * specfun.e1_scaled(arr)
    return _out(np.asarray(val))


def differential_entropy(p: VdfapParams) -> float:
    """Differential entropy in nats.

    Closed form for d = 2; adaptive quadrature of -int f log f for d = 1.
    """
    if p.d == 2:
        s = p.s
        return (
            _LOG_2PI + 3.0 + 2.0 * math.log(p.lam) - math.log1p(s) - entropy_core(s)
        )
    return _entropy_1d_quadrature(p)


def _entropy_1d_quadrature(p: VdfapParams, rtol: float = 1e-8) -> float:
    def integrand(x):
        logf = _radial_logpdf(p, x * x)
        return -math.exp(logf) * logf

    # the density decays like exp(-|u| x); stop where it drops below 1e-300
    upper = p.lam
    while _radial_logpdf(p, upper * upper) > math.log(1e-300):
        upper *= 2.0
    breaks = [b for b in (p.lam, 10.0 * p.lam, 1.0 / abs(p.u), 10.0 / abs(p.u)) if b < upper]
    val, _ = integrate.quad(
        integrand, 0.0, upper, points=sorted(breaks), epsabs=0.0, epsrel=rtol, limit=500
    )
    return 2.0 * val

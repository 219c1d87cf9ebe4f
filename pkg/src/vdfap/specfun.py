"""Modified Bessel functions K_nu (nu in {1/2, 1, 3/2}) and Ei on x < 0.

All routines accept scalars or numpy arrays and return the same shape
(a Python float for scalar input). Evaluation is done in log space where
the result would otherwise over- or underflow, so ``log_bessel_k`` stays
finite far beyond the point where ``bessel_k`` rounds to zero.

K_1 uses the ascending series (with its logarithmic term) for x < 2 and
Steed's continued fraction for x >= 2. Ei(-s) = -E1(s) uses the power
series for s < 1 and a modified-Lentz continued fraction for s >= 1; the
continued fraction directly yields the scaled value e^s E1(s), which is
what the entropy and bound formulas need.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction

import numpy as np

from .errors import DomainError

EULER_GAMMA = 0.57721566490153286061
_LOG_HALF_PI = math.log(math.pi / 2.0)
_EPS = 1e-17
_MAX_ITER = 5000

K1_SWITCH = 2.0
EI_SWITCH = 1.0

__all__ = [
    "BesselOrder",
    "bessel_k",
    "log_bessel_k",
    "expint_ei",
    "expint_ei_scaled",
    "e1_scaled",
]


@dataclass(frozen=True)
class BesselOrder:
    """Order of K_nu; only 1/2, 1 and 3/2 are constructible."""

    value: Fraction

    def __post_init__(self):
        v = Fraction(self.value).limit_denominator(2)
        if v not in (Fraction(1, 2), Fraction(1), Fraction(3, 2)) or v != self.value:
            raise DomainError(f"unsupported Bessel order {self.value!r}")
        object.__setattr__(self, "value", v)

    @classmethod
    def for_dimension(cls, d: int) -> "BesselOrder":
        """Order (d + 1)/2 used by the d-dimensional arrival density."""
        return cls(Fraction(d + 1, 2))

    def __float__(self):
        return float(self.value)


def _order(order) -> BesselOrder:
    if isinstance(order, BesselOrder):
        return order
    if isinstance(order, float):
        order = Fraction(order)
    return BesselOrder(Fraction(order))


def _wrap(values: np.ndarray, scalar: bool):
    return float(values) if scalar else values


def _positive(x, name: str = "x") -> tuple[np.ndarray, bool]:
    arr = np.asarray(x, dtype=float)
    if not (np.all(arr > 0) and np.all(np.isfinite(arr))):
        raise DomainError(f"{name} must be finite and > 0")
    return arr, arr.ndim == 0


def _k1_series(x: np.ndarray) -> np.ndarray:
    # K1(x) = 1/x + ln(x/2) I1(x) - (x/4) sum_k [psi(k+1)+psi(k+2)] (x^2/4)^k / (k!(k+1)!)
    y = 0.25 * x * x
    term = np.ones_like(x)
    i1_sum = np.zeros_like(x)
    psi_sum = np.zeros_like(x)
    h_k, h_k1 = 0.0, 1.0
    for k in range(1, _MAX_ITER):
        i1_sum += term
        psi_sum += (h_k + h_k1 - 2.0 * EULER_GAMMA) * term
        term = term * y / (k * (k + 1))
        h_k += 1.0 / k
        h_k1 += 1.0 / (k + 1)
        if np.all(term < _EPS * i1_sum):
            break
    return 1.0 / x + np.log(0.5 * x) * (0.5 * x * i1_sum) - 0.25 * x * psi_sum


def _log_k01_steed(x: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    """log K_0 and log K_1 for x >= 2 via Steed's method (Temme's CF2)."""
    b = 2.0 * (1.0 + x)
    d = 1.0 / b
    h = d.copy()
    delh = d.copy()
    q1 = np.zeros_like(x)
    q2 = np.ones_like(x)
    a1 = 0.25
    q = np.full_like(x, a1)
    c = a1
    a = -a1
    s = 1.0 + q * delh
    for i in range(2, _MAX_ITER):
        a -= 2.0 * (i - 1)
        c = -a * c / i
        qnew = (q1 - b * q2) / a
        q1, q2 = q2, qnew
        q = q + c * qnew
        b = b + 2.0
        d = 1.0 / (b + a * d)
        delh = (b * d - 1.0) * delh
        h = h + delh
        dels = q * delh
        s = s + dels
        if np.all(np.abs(dels) < _EPS * np.abs(s)):
            break
    h = a1 * h
    log_k0 = -x + 0.5 * (_LOG_HALF_PI - np.log(x)) - np.log(s)
    log_k1 = log_k0 + np.log((x + 0.5 - h) / x)
    return log_k0, log_k1


def _log_k1(x: np.ndarray) -> np.ndarray:
    out = np.empty_like(x)
    small = x < K1_SWITCH
    if np.any(small):
        out[small] = np.log(_k1_series(x[small]))
    if np.any(~small):
        out[~small] = _log_k01_steed(x[~small])[1]
    return out


def log_bessel_k(order, x):
    """Natural log of K_nu(x) for nu in {1/2, 1, 3/2} and x > 0."""
    nu = _order(order).value
    arr, scalar = _positive(x)
    flat = np.atleast_1d(arr).astype(float)
    if nu == 1:
        out = _log_k1(flat)
    else:
        out = 0.5 * (_LOG_HALF_PI - np.log(flat)) - flat
        if nu == Fraction(3, 2):
            out = out + np.log1p(1.0 / flat)
    return _wrap(out.reshape(arr.shape), scalar)


def bessel_k(order, x):
    """K_nu(x) for nu in {1/2, 1, 3/2}; underflows gracefully to 0 for large x.

    Half-integer orders use the elementary closed forms
    K_{1/2}(x) = sqrt(pi/(2x)) e^{-x} and K_{3/2}(x) = K_{1/2}(x)(1 + 1/x).
    """
    nu = _order(order).value
    arr, scalar = _positive(x)
    flat = np.atleast_1d(arr).astype(float)
    if nu == 1:
        out = np.empty_like(flat)
        small = flat < K1_SWITCH
        if np.any(small):
            out[small] = _k1_series(flat[small])
        if np.any(~small):
            out[~small] = np.exp(_log_k01_steed(flat[~small])[1])
    else:
        out = np.sqrt(np.pi / (2.0 * flat)) * np.exp(-flat)
        if nu == Fraction(3, 2):
            out = out * (1.0 + 1.0 / flat)
    return _wrap(out.reshape(arr.shape), scalar)


def _e1_scaled_one(x: float) -> float:
    # same algorithm as _e1_scaled on a Python float; avoids per-iteration
    # numpy overhead for the scalar calls made by the bound formulas
    if x < EI_SWITCH:
        term, acc = 1.0, 0.0
        for k in range(1, _MAX_ITER):
            term = -term * x / k
            acc += term / k
            if abs(term) < _EPS * k * abs(acc):
                break
        return math.exp(x) * (-EULER_GAMMA - math.log(x) - acc)
    b = x + 1.0
    c, d = 1e300, 1.0 / b
    h = d
    for i in range(1, _MAX_ITER):
        a = -float(i * i)
        b += 2.0
        d = 1.0 / (a * d + b)
        c = b + a / c
        delta = c * d
        h *= delta
        if abs(delta - 1.0) < 1e-16:
            break
    return h


def _e1_scaled(s: np.ndarray) -> np.ndarray:
    if s.size <= 4:
        return np.array([_e1_scaled_one(float(v)) for v in s])
    out = np.empty_like(s)
    small = s < EI_SWITCH
    if np.any(small):
        xs = s[small]
        term = np.ones_like(xs)
        acc = np.zeros_like(xs)
        for k in range(1, _MAX_ITER):
            term = -term * xs / k
            acc += term / k
            if np.all(np.abs(term) < _EPS * k * np.abs(acc)):
                break
        out[small] = np.exp(xs) * (-EULER_GAMMA - np.log(xs) - acc)
    if np.any(~small):
        # converged lanes are frozen: iterating past convergence lets the
        # Lentz ratios drift by an ulp per step
        xl = s[~small]
        b = xl + 1.0
        c = np.full_like(xl, 1e300)
        d = 1.0 / b
        h = d.copy()
        act = np.arange(xl.size)
        for i in range(1, _MAX_ITER):
            a = -float(i * i)
            b[act] += 2.0
            d[act] = 1.0 / (a * d[act] + b[act])
            c[act] = b[act] + a / c[act]
            delta = c[act] * d[act]
            h[act] *= delta
            act = act[np.abs(delta - 1.0) >= 1e-16]
            if act.size == 0:
                break
        out[~small] = h
    return out


def e1_scaled(s):
    """e^s E1(s) for s > 0, with E1(s) = int_s^inf e^{-t}/t dt."""
    arr, scalar = _positive(s, "s")
    flat = np.atleast_1d(arr).astype(float)
    return _wrap(_e1_scaled(flat).reshape(arr.shape), scalar)


def _negative(x) -> tuple[np.ndarray, bool]:
    arr = np.asarray(x, dtype=float)
    if not (np.all(arr < 0) and np.all(np.isfinite(arr))):
        raise DomainError("Ei is only defined here for finite x < 0")
    return arr, arr.ndim == 0


def expint_ei_scaled(x):
    """e^{-x} Ei(x) for x < 0; bounded in (-1/|x|, 0) so never overflows."""
    arr, scalar = _negative(x)
    flat = np.atleast_1d(-arr)
    return _wrap(-_e1_scaled(flat).reshape(arr.shape), scalar)


def expint_ei(x):
    """Ei(x) = -int_{-x}^inf e^{-t}/t dt for x < 0 (strictly negative)."""
    arr, scalar = _negative(x)
    flat = np.atleast_1d(-arr)
    out = -_e1_scaled(flat) * np.exp(-flat)
    return _wrap(out.reshape(arr.shape), scalar)

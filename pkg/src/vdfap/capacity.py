"""Capacity bounds for the 3D VDFAP channel under E[XX^T] <= Sigma.

Everything is expressed through the dimensionless product s = |u| lambda.
The lower bound uses a VDFAP input with lambda' = |u| sigma_min, which
turns the output into VDFAP(u, lambda + lambda'); the upper bound replaces
the output entropy by that of a Gaussian with covariance
Sigma + (lambda/|u|) I. All values are in nats.
"""

from __future__ import annotations

import itertools
import logging
import math
from dataclasses import dataclass

import numpy as np

from .distribution import entropy_core
from .errors import DimensionError, DomainError, ParameterError

log = logging.getLogger(__name__)

#: relative tolerance below which lower > upper is reported, not raised
ORDERING_SLACK = 1e-12

SYMMETRY_RTOL = 1e-9


@dataclass(frozen=True)
class CovarianceConstraint:
    """Symmetric positive-definite 2x2 input covariance cap."""

    sigma: np.ndarray

    def __post_init__(self):
        m = np.array(self.sigma, dtype=float)
        if m.shape != (2, 2) or not np.all(np.isfinite(m)):
            raise ParameterError("Sigma must be a finite 2x2 matrix")
        scale = np.max(np.abs(m))
        if abs(m[0, 1] - m[1, 0]) > SYMMETRY_RTOL * scale:
            raise ParameterError("Sigma is not symmetric")
        off = 0.5 * (m[0, 1] + m[1, 0])
        m[0, 1] = m[1, 0] = off
        m.setflags(write=False)
        object.__setattr__(self, "sigma", m)
        if not self.sigma_min > 0:
            raise ParameterError("Sigma must be positive definite")

    @classmethod
    def from_entries(cls, entries) -> "CovarianceConstraint":
        """Build from four row-major entries ``a, b, c, d``."""
        vals = [float(v) for v in entries]
        if len(vals) != 4:
            raise ParameterError("Sigma needs four row-major entries")
        return cls(np.reshape(vals, (2, 2)))

    @property
    def eigenvalues(self) -> tuple[float, float]:
        a, b, d = self.sigma[0, 0], self.sigma[0, 1], self.sigma[1, 1]
        hi = 0.5 * (a + d) + math.hypot(0.5 * (a - d), b)
        det = a * d - b * b
        # det/hi avoids cancellation in mean - radius
        lo = det / hi if hi > 0 else 0.5 * (a + d) - math.hypot(0.5 * (a - d), b)
        return float(lo), float(hi)

    @property
    def sigma_min(self) -> float:
        return self.eigenvalues[0]

    def scaled(self, k: float) -> "CovarianceConstraint":
        return CovarianceConstraint(self.sigma * k)


def sigma_min(c: CovarianceConstraint) -> float:
    """Smallest eigenvalue of Sigma."""
    return c.sigma_min


@dataclass(frozen=True)
class CapacityBounds:
    lower: float
    upper: float
    u: float
    lam: float
    sigma_min: float

    def __post_init__(self):
        if not self.lower > 0:
            raise DomainError(f"lower bound {self.lower!r} is not positive")
        if self.lower > self.upper:
            gap = self.lower - self.upper
            if gap > ORDERING_SLACK * max(abs(self.upper), 1.0):
                raise DomainError(f"lower bound exceeds upper bound by {gap:.3g}")
            log.warning("lower exceeds upper by %.3g at u=%g lambda=%g", gap, self.u, self.lam)


def _positive_s(s):
    arr = np.asarray(s, dtype=float)
    if not np.all(arr > 0):
        raise DomainError("s must be > 0")
    return arr


def g(s):
    """s e^{s+1} Ei(-(s+1)) - 3 s e^s Ei(-s); always below 2."""
    return entropy_core(_positive_s(s))


def g_prime(s):
    """Derivative of g: ((s+1)/s) g(s) + s/(s+1) - 3."""
    s = _positive_s(s)
    val = (s + 1.0) / s * g(s) + s / (s + 1.0) - 3.0
    return float(val) if np.ndim(val) == 0 else val


def h0(s):
    """2 log s - log(1+s) - g(s); the VDFAP(2) entropy up to a shift, increasing."""
    s = _positive_s(s)
    val = 2.0 * np.log(s) - np.log1p(s) - g(s)
    return float(val) if np.ndim(val) == 0 else val


def h0_prime(s):
    """((s+1)/s)(2 - g(s)), positive for all s > 0."""
    s = _positive_s(s)
    val = (s + 1.0) / s * (2.0 - g(s))
    return float(val) if np.ndim(val) == 0 else val


def _validate(u: float, lam: float, c, d: int) -> CovarianceConstraint:
    if d != 2:
        raise DimensionError(f"capacity bounds are only available for d = 2, got d = {d}")
    if not (math.isfinite(u) and u < 0):
        raise ParameterError(f"u must be negative, got {u!r}")
    if not (math.isfinite(lam) and lam > 0):
        raise ParameterError(f"lambda must be positive, got {lam!r}")
    if not isinstance(c, CovarianceConstraint):
        c = CovarianceConstraint(np.asarray(c))
    return c


def capacity_lower_bound(u: float, lam: float, c, d: int = 2) -> float:
    """h0(|u|(lambda + |u| sigma_min)) - h0(|u| lambda)."""
    c = _validate(u, lam, c, d)
    au = abs(u)
    s = au * lam
    return h0(s + au * au * c.sigma_min) - h0(s)


def capacity_upper_bound(u: float, lam: float, c, d: int = 2) -> float:
    """Gaussian maximum-entropy upper bound."""
    c = _validate(u, lam, c, d)
    au = abs(u)
    s = au * lam
    inv_l2 = 1.0 / (lam * lam)
    t = 1.0 / s
    (a, b), (_, dd) = c.sigma
    det = (a * inv_l2 + t) * (dd * inv_l2 + t) - (b * inv_l2) ** 2
    return 0.5 * math.log(det) + math.log1p(s) + g(s) - 2.0


def bounds(u: float, lam: float, c, d: int = 2) -> CapacityBounds:
    c = _validate(u, lam, c, d)
    return CapacityBounds(
        capacity_lower_bound(u, lam, c), capacity_upper_bound(u, lam, c), u, lam, c.sigma_min
    )


def bounds_sweep(u_grid, lambda_grid, c) -> list[CapacityBounds]:
    """Both bounds over the Cartesian product, ordered by (u, lambda)."""
    u_grid, lambda_grid = list(u_grid), list(lambda_grid)
    if not u_grid or not lambda_grid:
        raise ParameterError("grids must be nonempty")
    c = _validate(-1.0, 1.0, c, 2)
    rows = []
    for (i, u), (j, lam) in itertools.product(enumerate(u_grid), enumerate(lambda_grid)):
        try:
            rows.append(bounds(float(u), float(lam), c))
        except (ParameterError, DomainError) as exc:
            raise type(exc)(f"grid point (i={i}, j={j}, u={u!r}, lambda={lam!r}): {exc}") from exc
    rows.sort(key=lambda r: (r.u, r.lam))
    return rows


CSV_HEADER = "u,lambda,sigma_min,lower_nats,upper_nats"


def format_bounds_csv(rows, units: str = "nats") -> str:
    """CSV text; ``units='bits'`` divides the bound columns by log 2 and
    renames them ``lower_bits,upper_bits``."""
    if units not in ("nats", "bits"):
        raise ParameterError(f"unknown units {units!r}")
    scale = 1.0 if units == "nats" else 1.0 / math.log(2.0)
    lines = [CSV_HEADER if units == "nats" else CSV_HEADER.replace("_nats", "_bits")]
    for r in rows:
        vals = (r.u, r.lam, r.sigma_min, r.lower * scale, r.upper * scale)
        lines.append(",".join(f"{v:.17g}" for v in vals))
    return "\n".join(lines) + "\n"

"""Exact VDFAP sampling and the SampleBatch CSV/JSON format.

Under purely vertical drift the parallel displacement at the first-passage
time T is N(0, T I_d) given T, and T is inverse Gaussian. With sigma = 1 and
vertical velocity u, T ~ IG(mean = lambda/|u|, shape = lambda^2).
"""

from __future__ import annotations

import enum
import json
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from .distribution import VdfapParams
from .errors import ParameterError


class SamplingMethod(str, enum.Enum):
    EXACT_MIXTURE = "ExactMixture"
    EULER_MARUYAMA = "EulerMaruyama"


@dataclass
class SampleBatch:
    """``count`` draws of a ``dim``-dimensional arrival position."""

    positions: np.ndarray
    seed: int
    method: SamplingMethod
    u: float
    lam: float
    metadata: dict = field(default_factory=dict)

    def __post_init__(self):
        pos = np.asarray(self.positions, dtype=float)
        if pos.ndim == 1:
            pos = pos[:, None]
        if pos.ndim != 2 or pos.shape[0] < 1:
            raise ParameterError("positions must be a nonempty (count, dim) matrix")
        if not np.all(np.isfinite(pos)):
            raise ParameterError("positions must be finite")
        self.positions = pos
        self.method = SamplingMethod(self.method)

    @property
    def dim(self) -> int:
        return self.positions.shape[1]

    @property
    def count(self) -> int:
        return self.positions.shape[0]

    def sidecar(self) -> dict:
        meta = {
            "d": self.dim,
            "u": self.u,
            "lambda": self.lam,
            "seed": self.seed,
            "count": self.count,
            "method": self.method.value,
        }
        meta.update(self.metadata)
        return meta


def inverse_gaussian(rng: np.random.Generator, mean: float, shape: float, size: int) -> np.ndarray:
    """Michael-Schucany-Haas transformation sampler for IG(mean, shape)."""
    y = rng.standard_normal(size) ** 2
    a = mean * y / (2.0 * shape)
    # smaller root of the quadratic, mean*(1 + a - sqrt(a^2 + 2a)) in stable form
    x = mean / (1.0 + a + np.sqrt(a * a + 2.0 * a))
    z = rng.random(size)
    return np.where(z <= mean / (mean + x), x, mean * mean / x)


def sample_exact(p: VdfapParams, seed: int, count: int) -> SampleBatch:
    """Draw ``count`` exact VDFAP^(d)(u, lambda) samples; bit-reproducible per seed."""
    if int(count) != count or count < 1:
        raise ParameterError(f"count must be a positive integer, got {count!r}")
    if seed < 0:
        raise ParameterError("seed must be unsigned")
    rng = np.random.default_rng(seed)
    t = inverse_gaussian(rng, p.lam / abs(p.u), p.lam * p.lam, int(count))
    pos = np.sqrt(t)[:, None] * rng.standard_normal((int(count), p.d))
    return SampleBatch(pos, seed, SamplingMethod.EXACT_MIXTURE, p.u, p.lam)


def write_batch(batch: SampleBatch, path) -> tuple[Path, Path]:
    """Write ``path`` (CSV, 17 significant digits) and a ``.json`` sidecar."""
    path = Path(path)
    header = ",".join(f"x{i + 1}" for i in range(batch.dim))
    np.savetxt(path, batch.positions, fmt="%.17g", delimiter=",", header=header, comments="")
    sidecar = path.with_suffix(".json")
    sidecar.write_text(json.dumps(batch.sidecar(), indent=2, sort_keys=True) + "\n")
    return path, sidecar


def read_batch(path) -> SampleBatch:
    path = Path(path)
    meta = json.loads(path.with_suffix(".json").read_text())
    pos = np.loadtxt(path, delimiter=",", skiprows=1, ndmin=2)
    if pos.shape != (meta["count"], meta["d"]):
        raise ParameterError(f"{path}: shape {pos.shape} disagrees with sidecar")
    extra = {k: v for k, v in meta.items() if k not in {"d", "u", "lambda", "seed", "count", "method"}}
    return SampleBatch(pos, meta["seed"], meta["method"], meta["u"], meta["lambda"], extra)

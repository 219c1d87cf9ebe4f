"""Independent stochastic and numerical oracles for the VDFAP model.

* a particle-level Euler-Maruyama simulator of drifted Brownian motion
  absorbed at the receiver plane,
* the empirical characteristic function of a sample batch,
* Kozachenko-Leonenko k-NN entropy and the derived mutual-information
  estimate for a VDFAP input,
* a tabulated-density convolution check of the weak stability property.
"""

from __future__ import annotations

import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass

import numpy as np
from scipy import signal, special, stats
from scipy.spatial import cKDTree

from .distribution import VdfapParams, differential_entropy, radial_pdf, stable_sum
from .errors import ConfigurationError, DegenerateSampleError, MismatchError, ParameterError
from .sampling import SampleBatch, SamplingMethod, sample_exact

#: particles per RNG stream; results depend on this, never on worker count
CHUNK_SIZE = 8192
#: dt must satisfy dt * |v| <= DT_FRACTION * lambda
DT_FRACTION = 1e-2
#: default max_steps leaves at most this much first-passage-time mass untracked
TAIL_MASS = 1e-6
MAX_DISCARD_FRACTION = 0.01


def _first_passage(lam: float, v: float, sigma: float):
    """Frozen scipy IG law of the first-passage time (for tail sizing only)."""
    mean = lam / abs(v)
    shape = lam * lam / (sigma * sigma)
    return stats.invgauss(mean / shape, scale=shape)


@dataclass(frozen=True)
class SimulationConfig:
    d: int
    v_vertical: float
    sigma: float
    lam: float
    dt: float
    max_steps: int | None = None
    seed: int = 0
    bridge: bool = False

    def __post_init__(self):
        if self.d not in (1, 2):
            raise ParameterError("d must be 1 or 2")
        if not self.v_vertical < 0:
            raise ParameterError("v_vertical must be negative")
        if not (self.sigma > 0 and self.lam > 0 and self.dt > 0):
            raise ParameterError("sigma, lambda and dt must be positive")
        if self.dt * abs(self.v_vertical) > DT_FRACTION * self.lam * (1 + 1e-12):
            raise ConfigurationError(
                f"dt={self.dt:g} too coarse: need dt <= {DT_FRACTION:g} * lambda / |v|"
            )
        if self.seed < 0:
            raise ParameterError("seed must be unsigned")
        fpt = _first_passage(self.lam, self.v_vertical, self.sigma)
        if self.max_steps is None:
            object.__setattr__(self, "max_steps", int(math.ceil(fpt.isf(TAIL_MASS) / self.dt)))
        if fpt.sf(self.max_steps * self.dt) > MAX_DISCARD_FRACTION:
            raise ConfigurationError(
                f"max_steps={self.max_steps} would discard more than "
                f"{MAX_DISCARD_FRACTION:.0%} of particles"
            )

    @property
    def u(self) -> float:
        """Normalized drift v / sigma^2."""
        return self.v_vertical / self.sigma**2

    def matches(self, p: VdfapParams) -> bool:
        return p.d == self.d and abs(self.u - p.u) <= 1e-12 * abs(p.u) and self.lam == p.lam


def _simulate_chunk(cfg: SimulationConfig, chunk: int, size: int, factors=(1,)):
    """Simulate one chunk on nested time grids driven by the same Brownian path.

    Level ``l`` steps with ``factors[l] * cfg.dt`` using the sum of the
    corresponding fine increments, so coarse and fine arrivals are coupled.
    """
    rng = np.random.Generator(np.random.PCG64(np.random.SeedSequence([cfg.seed, chunk])))
    d = cfg.d
    sd = cfg.sigma * math.sqrt(cfg.dt)
    n_lev = len(factors)
    idx = np.arange(size)
    z = np.full((n_lev, size), cfg.lam)
    par = np.zeros((n_lev, size, d))
    acc = np.zeros((n_lev, size, d + 1))
    alive = np.ones((n_lev, size), dtype=bool)
    out = np.empty((n_lev, size, d))
    done = np.zeros((n_lev, size), dtype=bool)
    for step in range(1, cfg.max_steps + 1):
        if idx.size == 0:
            break
        acc += sd * rng.standard_normal((idx.size, d + 1))
        for lev, fac in enumerate(factors):
            if step % fac:
                continue
            live = alive[lev]
            h = fac * cfg.dt
            z0, p0 = z[lev], par[lev]
            z1 = z0 + cfg.v_vertical * h + acc[lev, :, 0]
            p1 = p0 + acc[lev, :, 1:]
            hit = live & (z1 <= 0.0)
            frac = np.where(hit, z0 / np.where(hit, z0 - z1, 1.0), 0.0)
            if cfg.bridge:
                # crossing inside the step although both endpoints are above the plane
                p_cross = np.exp(-2.0 * z0 * np.maximum(z1, 0.0) / (cfg.sigma**2 * h))
                inside = live & ~hit & (rng.random(idx.size) < p_cross)
                frac = np.where(inside, 0.5, frac)
                hit = hit | inside
            if np.any(hit):
                f = frac[hit][:, None]
                pos = p0[hit] + f * (p1[hit] - p0[hit])
                if cfg.bridge:
                    noise = rng.standard_normal(pos.shape)
                    pos = pos + cfg.sigma * np.sqrt(h * f * (1.0 - f)) * noise
                out[lev, idx[hit]] = pos
                done[lev, idx[hit]] = True
                alive[lev] &= ~hit
            z[lev], par[lev] = z1, p1
            acc[lev] = 0.0
        keep = alive.any(axis=0)
        if not keep.all():
            idx, z, par, acc, alive = idx[keep], z[:, keep], par[:, keep], acc[:, keep], alive[:, keep]
    return [(out[lev][done[lev]], int(size - done[lev].sum())) for lev in range(n_lev)]


def _run_chunks(cfg: SimulationConfig, count: int, factors, workers: int):
    if count < 1:
        raise ParameterError("count must be positive")
    sizes = [min(CHUNK_SIZE, count - s) for s in range(0, count, CHUNK_SIZE)]
    jobs = list(enumerate(sizes))
    if workers > 1:
        with ThreadPoolExecutor(workers) as pool:
            results = list(pool.map(lambda j: _simulate_chunk(cfg, *j, factors), jobs))
    else:
        results = [_simulate_chunk(cfg, *j, factors) for j in jobs]
    batches = []
    for lev, fac in enumerate(factors):
        positions = np.concatenate([r[lev][0] for r in results])
        meta = {
            "discarded": sum(r[lev][1] for r in results),
            "dt": fac * cfg.dt,
            "sigma": cfg.sigma,
            "v_vertical": cfg.v_vertical,
            "max_steps": cfg.max_steps,
            "bridge": cfg.bridge,
        }
        batches.append(
            SampleBatch(positions, cfg.seed, SamplingMethod.EULER_MARUYAMA, cfg.u, cfg.lam, meta)
        )
    return batches


def simulate_first_arrival(cfg: SimulationConfig, count: int, workers: int = 1) -> SampleBatch:
    """Euler-Maruyama first-arrival positions of ``count`` released particles.

    Each particle starts at height ``lambda`` and is absorbed when the
    vertical coordinate first reaches 0; the parallel coordinates are
    linearly interpolated to the crossing instant. With ``cfg.bridge`` a
    Brownian-bridge test also catches crossings between grid times.
    Particles still in flight after ``max_steps`` are discarded and counted
    in ``batch.metadata['discarded']``. Output is independent of ``workers``.
    """
    return _run_chunks(cfg, count, (1,), workers)[0]


def simulate_refinement(
    cfg: SimulationConfig, count: int, factors=(16, 4, 1), workers: int = 1
) -> list[SampleBatch]:
    """Coupled simulations at step sizes ``f * cfg.dt`` for each ``f`` in ``factors``.

    All levels share one Brownian path per particle, so differences between
    levels reflect discretization error rather than sampling noise.
    ``cfg.max_steps`` counts fine steps, so every level has the same horizon.
    """
    if any(int(f) != f or f < 1 for f in factors):
        raise ParameterError("factors must be positive integers")
    # the coarsest level must satisfy the dt contract too
    SimulationConfig(cfg.d, cfg.v_vertical, cfg.sigma, cfg.lam, max(factors) * cfg.dt, seed=cfg.seed)
    return _run_chunks(cfg, count, tuple(int(f) for f in factors), workers)


def empirical_cf(batch: SampleBatch, omega) -> complex:
    """(1/n) sum_j exp(i omega^T x_j)."""
    if batch.count == 0:
        raise ParameterError("empty batch")
    w = np.atleast_1d(np.asarray(omega, dtype=float))
    if w.shape != (batch.dim,):
        raise ParameterError(f"omega must be a {batch.dim}-vector")
    phase = batch.positions @ w
    return complex(np.mean(np.cos(phase)), np.mean(np.sin(phase)))


@dataclass(frozen=True)
class EntropyEstimate:
    value: float
    std_error: float
    k: int
    n: int

    def __post_init__(self):
        if not 1 <= self.k < self.n:
            raise ParameterError("need 1 <= k < n")
        if self.std_error < 0:
            raise ParameterError("std_error must be nonnegative")


def _log_unit_ball_volume(d: int) -> float:
    return 0.5 * d * math.log(math.pi) - special.gammaln(0.5 * d + 1.0)


def knn_entropy(batch: SampleBatch, k: int = 4, boxsize=None) -> EntropyEstimate:
    """Kozachenko-Leonenko differential entropy estimate (nats).

    H = psi(n) - psi(k) + log V_d + (d/n) sum_i log eps_i, with eps_i the
    Euclidean distance to the k-th neighbour (periodic when ``boxsize`` is
    given, as for a reference sample on a torus). The standard error is the
    delete-one jackknife of the mean of the per-point terms, holding the
    neighbour distances fixed. Coincident points raise
    :class:`DegenerateSampleError`; jitter the batch before retrying.
    """
    x = batch.positions
    n, d = x.shape
    if n < 100:
        raise ParameterError("knn_entropy needs at least 100 samples")
    if not 1 <= k < n:
        raise ParameterError("need 1 <= k < n")
    dist, _ = cKDTree(x, boxsize=boxsize).query(x, k=k + 1, workers=-1)
    if np.any(dist[:, 1] == 0.0):
        raise DegenerateSampleError("batch contains coincident points")
    terms = d * np.log(dist[:, k])
    const = special.digamma(n) - special.digamma(k) + _log_unit_ball_volume(d)
    value = const + terms.mean()
    se = terms.std(ddof=1) / math.sqrt(n)
    return EntropyEstimate(float(value), float(se), k, n)


def estimate_mi_vdfap_input(
    u: float, lam: float, lambda_in: float, n: int, k: int = 4, seed: int = 0
) -> EntropyEstimate:
    """I(X; X + N) for X ~ VDFAP(2)(u, lambda_in), N ~ VDFAP(2)(u, lambda).

    Only h(Y) is estimated; h(N) is the closed form.
    """
    noise_p = VdfapParams(2, u, lam)
    input_p = VdfapParams(2, u, lambda_in)
    ss = np.random.SeedSequence(seed)
    seed_x, seed_n = (int(s.generate_state(1)[0]) for s in ss.spawn(2))
    x = sample_exact(input_p, seed_x, n).positions
    noise = sample_exact(noise_p, seed_n, n).positions
    y = SampleBatch(x + noise, seed, SamplingMethod.EXACT_MIXTURE, u, lam + lambda_in)
    hy = knn_entropy(y, k)
    return EntropyEstimate(hy.value - differential_entropy(noise_p), hy.std_error, k, n)


def _grid(half_width: float, resolution: int, d: int):
    # resolution cells per axis -> resolution + 1 symmetric nodes, one at 0
    x = np.linspace(-half_width, half_width, resolution + 1)
    h = x[1] - x[0]
    if d == 1:
        return x * x, h
    xx, yy = np.meshgrid(x, x, indexing="ij")
    return xx * xx + yy * yy, h * h


def grid_convolution_check(
    p1: VdfapParams, p2: VdfapParams, half_width: float, resolution: int
) -> float:
    """L1 distance between the tabulated f1 * f2 and the tabulated stable_sum density.

    The grid must span at least 8 standard deviations of the sum.
    """
    if resolution < 64:
        raise ParameterError("resolution must be >= 64")
    if p1.d != p2.d or p1.u != p2.u:
        raise MismatchError("convolution check needs equal d and u")
    target = stable_sum(p1, p2)
    if half_width < 8.0 * math.sqrt(target.lam / abs(target.u)):
        raise ParameterError("grid does not cover 8 standard deviations of the sum")
    r2, cell = _grid(half_width, resolution, p1.d)
    f1 = radial_pdf(p1, np.sqrt(r2))
    f2 = radial_pdf(p2, np.sqrt(r2))
    conv = signal.fftconvolve(f1, f2, mode="same") * cell
    f3 = radial_pdf(target, np.sqrt(r2))
    return float(np.sum(np.abs(conv - f3)) * cell)


def ks_against_exact(batch: SampleBatch, p: VdfapParams, seed: int, count: int | None = None):
    """Two-sample KS between a batch and fresh exact samples.

    Signed positions are compared in d = 1, radii in d = 2.
    """
    ref = sample_exact(p, seed, count or batch.count).positions

    def stat(x):
        return x[:, 0] if x.shape[1] == 1 else np.linalg.norm(x, axis=1)

    return stats.ks_2samp(stat(batch.positions), stat(ref))


def report(test: str, statistic: float, threshold: float, passed: bool) -> dict:
    """JSON-ready validation record."""
    return {"test": test, "statistic": float(statistic), "threshold": float(threshold), "pass": bool(passed)}

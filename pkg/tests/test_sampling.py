import json

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st
from scipy import integrate, interpolate, stats

from vdfap.distribution import VdfapParams, radial_pdf
from vdfap.errors import ParameterError
from vdfap.sampling import (
    SampleBatch,
    SamplingMethod,
    inverse_gaussian,
    read_batch,
    sample_exact,
    write_batch,
)


def radial_cdf(p: VdfapParams):
    """CDF of |N| by cumulative quadrature of the density (no sampler involved)."""
    r = np.concatenate([[0.0], np.geomspace(1e-4, 400 * max(p.lam, 1 / abs(p.u)), 4000)])
    jac = 2.0 if p.d == 1 else 2 * np.pi * r
    dens = jac * radial_pdf(p, r)
    cdf = integrate.cumulative_simpson(dens, x=r, initial=0.0)
    return interpolate.interp1d(r, cdf / cdf[-1], bounds_error=False, fill_value=(0.0, 1.0))


class TestInverseGaussian:
    @pytest.mark.parametrize("mean, shape", [(1.0, 1.0), (0.1, 5.0), (20.0, 0.5), (1e3, 1e-2)])
    def test_ks_against_scipy(self, mean, shape):
        x = inverse_gaussian(np.random.default_rng(3), mean, shape, 20_000)
        ref = stats.invgauss(mean / shape, scale=shape)
        assert stats.kstest(x, ref.cdf).pvalue > 1e-3

    def test_moments(self):
        mean, shape = 2.0, 3.0
        x = inverse_gaussian(np.random.default_rng(0), mean, shape, 400_000)
        assert x.mean() == pytest.approx(mean, rel=5e-3)
        assert x.var() == pytest.approx(mean**3 / shape, rel=3e-2)

    @given(st.floats(min_value=1e-4, max_value=1e4), st.floats(min_value=1e-4, max_value=1e4))
    def test_positive_and_finite(self, mean, shape):
        x = inverse_gaussian(np.random.default_rng(0), mean, shape, 256)
        assert np.all(np.isfinite(x)) and np.all(x > 0)


class TestExactSampler:
    def test_reproducible(self):
        p = VdfapParams(2, -1.0, 1.0)
        a, b = sample_exact(p, 42, 1000), sample_exact(p, 42, 1000)
        assert np.array_equal(a.positions, b.positions)
        assert not np.array_equal(a.positions, sample_exact(p, 43, 1000).positions)

    @pytest.mark.parametrize("d", [1, 2])
    def test_batch_fields(self, d):
        b = sample_exact(VdfapParams(d, -2.0, 0.5), 1, 17)
        assert b.positions.shape == (17, d)
        assert (b.dim, b.count, b.seed, b.u, b.lam) == (d, 17, 1, -2.0, 0.5)
        assert b.method is SamplingMethod.EXACT_MIXTURE

    @pytest.mark.parametrize("count", [0, -3, 2.5])
    def test_bad_count(self, count):
        with pytest.raises(ParameterError):
            sample_exact(VdfapParams(1, -1.0, 1.0), 0, count)

    def test_bad_seed(self):
        with pytest.raises(ParameterError):
            sample_exact(VdfapParams(1, -1.0, 1.0), -1, 10)

    @pytest.mark.parametrize("d", [1, 2])
    @pytest.mark.parametrize("u, lam", [(-1.0, 1.0), (-0.2, 3.0), (-6.0, 0.4)])
    def test_ks_against_density(self, d, u, lam):
        p = VdfapParams(d, u, lam)
        x = sample_exact(p, 11, 50_000).positions
        r = np.linalg.norm(x, axis=1)
        assert stats.kstest(r, radial_cdf(p)).pvalue > 1e-3

    def test_isotropic(self):
        x = sample_exact(VdfapParams(2, -1.0, 1.0), 5, 100_000).positions
        angle = np.arctan2(x[:, 1], x[:, 0])
        assert stats.kstest(angle, stats.uniform(-np.pi, 2 * np.pi).cdf).pvalue > 1e-3


class TestBatchIO:
    @pytest.mark.parametrize("d", [1, 2])
    def test_round_trip_is_lossless(self, tmp_csv, d):
        b = sample_exact(VdfapParams(d, -0.7, 1.3), 9, 257)
        csv, side = write_batch(b, tmp_csv)
        back = read_batch(csv)
        assert np.array_equal(back.positions, b.positions)
        assert (back.seed, back.method, back.u, back.lam) == (b.seed, b.method, b.u, b.lam)
        meta = json.loads(side.read_text())
        assert meta == {"d": d, "u": -0.7, "lambda": 1.3, "seed": 9, "count": 257, "method": "ExactMixture"}
        header = csv.read_text().splitlines()[0]
        assert header == ("x1" if d == 1 else "x1,x2")

    def test_metadata_survives(self, tmp_csv):
        b = SampleBatch(np.ones((3, 2)), 0, "EulerMaruyama", -1.0, 1.0, {"dt": 0.01, "discarded": 0})
        write_batch(b, tmp_csv)
        assert read_batch(tmp_csv).metadata == {"dt": 0.01, "discarded": 0}

    def test_sidecar_mismatch(self, tmp_csv):
        write_batch(sample_exact(VdfapParams(2, -1.0, 1.0), 0, 5), tmp_csv)
        meta = json.loads(tmp_csv.with_suffix(".json").read_text())
        meta["count"] = 6
        tmp_csv.with_suffix(".json").write_text(json.dumps(meta))
        with pytest.raises(ParameterError):
            read_batch(tmp_csv)

    @pytest.mark.parametrize("pos", [np.empty((0, 2)), np.array([[np.nan, 0.0]]), np.zeros((2, 2, 2))])
    def test_invalid_positions(self, pos):
        with pytest.raises(ParameterError):
            SampleBatch(pos, 0, SamplingMethod.EXACT_MIXTURE, -1.0, 1.0)

    def test_unknown_method(self):
        with pytest.raises(ValueError):
            SampleBatch(np.zeros((1, 1)), 0, "Gibbs", -1.0, 1.0)

import math

import numpy as np
import pytest

from fraclab.analysis import autocorrelation
from fraclab.fbm import (
    FbmPath,
    Hurst,
    alpha_from_hurst,
    epsilon_fdt,
    fgn_from_fbm,
    financial_noise,
    generate_fbm,
    hurst_from_alpha,
    theory_covariance,
    theory_msd_fbm,
    volterra_kernel,
    _volterra_weights,
)
from fraclab.models import MarketParams
from fraclab.specfn import gamma

from _oracles import hyp2f1_mp


class TestKernel:
    def test_memoryless_kernel_is_one(self):
        assert volterra_kernel(Hurst(0.5), 0.7, 0.2) == 1.0

    def test_vanishing_at_diagonal_for_persistent(self):
        assert volterra_kernel(Hurst(0.75), 1.0, 1.0) == 0.0

    def test_against_series_oracle(self):
        h, t, s = 0.25, 1.0, 0.5
        want = (
            (t - s) ** (h - 0.5)
            * hyp2f1_mp(h - 0.5, 0.5 - h, h + 0.5, 1.0 - t / s)
            / gamma(h + 0.5)
        )
        assert volterra_kernel(Hurst(h), t, s) == pytest.approx(want, rel=1e-10)
        assert volterra_kernel(Hurst(h), t, s) > 0.0

    def test_domain(self):
        with pytest.raises(ValueError):
            volterra_kernel(Hurst(0.75), 1.0, 0.0)
        with pytest.raises(ValueError):
            volterra_kernel(Hurst(0.75), 1.0, 1.5)


class TestWeightMatrix:
    @pytest.mark.parametrize("hh", [0.1, 0.25, 0.5, 0.75, 0.9])
    def test_variance_matches_theory(self, hh):
        n = 200
        w = _volterra_weights(hh, n, 1.0)
        dt = 1.0 / n
        for j in (n // 2, n):
            var = float(np.sum(w[j - 1] ** 2) * dt)
            theo = theory_msd_fbm(Hurst(hh), j * dt)
            assert var == pytest.approx(theo, rel=0.01)

    def test_covariance_matches_theory(self):
        n = 200
        hh = 0.73
        w = _volterra_weights(hh, n, 1.0)
        dt = 1.0 / n
        got = float(np.sum(w[-1] * w[n // 2 - 1]) * dt)
        want = theory_covariance(Hurst(hh), 1.0, 0.5)
        assert got == pytest.approx(want, rel=0.01)


class TestGeneration:
    def test_memoryless_is_cumsum(self):
        p = generate_fbm(Hurst(0.5), 100, 1.0, seed=7)
        assert np.abs(p.path.values[1:] - np.cumsum(p.driving_increments)).max() <= 1e-10

    def test_determinism(self):
        a = generate_fbm(Hurst(0.75), 64, 2.0, seed=123)
        b = generate_fbm(Hurst(0.75), 64, 2.0, seed=123)
        assert np.array_equal(a.path.values, b.path.values)
        assert np.array_equal(a.driving_increments, b.driving_increments)
        c = generate_fbm(Hurst(0.75), 64, 2.0, seed=124)
        assert not np.array_equal(a.path.values, c.path.values)

    def test_starts_at_zero_with_matching_increments(self):
        p = generate_fbm(Hurst(0.3), 50, 1.0, seed=5)
        assert p.path.values[0] == 0.0
        assert p.driving_increments.size == 50

    def test_self_similarity_exact_for_fixed_seed(self):
        # same seed, horizon scaled by c: values scale by c^H exactly up to fp
        h = 0.75
        a = generate_fbm(Hurst(h), 128, 1.0, seed=9).path.values
        b = generate_fbm(Hurst(h), 128, 4.0, seed=9).path.values
        assert np.allclose(b, 4.0**h * a, rtol=1e-10, atol=1e-14)

    def test_antipersistent_more_volatile(self):
        rough = generate_fbm(Hurst(0.25), 256, 1.0, seed=11)
        smooth = generate_fbm(Hurst(0.75), 256, 1.0, seed=11)
        assert np.std(np.diff(rough.path.values)) > np.std(np.diff(smooth.path.values))

    def test_validation(self):
        with pytest.raises(ValueError):
            generate_fbm(Hurst(0.5), 1, 1.0, seed=0)
        with pytest.raises(ValueError):
            generate_fbm(Hurst(0.5), 10, 0.0, seed=0)


class TestFgn:
    def test_constant_path_gives_zero(self):
        from fraclab.fraccalc import SampledPath

        flat = SampledPath(0.0, 0.1, np.full(11, 2.5))
        assert np.all(fgn_from_fbm(flat).values == 0.0)

    def test_white_noise_uncorrelated(self):
        p = generate_fbm(Hurst(0.5), 2000, 1.0, seed=21)
        xi = fgn_from_fbm(p).values
        xi = xi - xi.mean()
        rho1 = float(np.dot(xi[:-1], xi[1:]) / np.dot(xi, xi))
        assert abs(rho1) < 3.0 / math.sqrt(xi.size)
        # variance 1/dt
        assert np.var(xi) == pytest.approx(2000.0, rel=0.15)

    def test_increment_autocorrelation_signs(self):
        paths_hi = [generate_fbm(Hurst(0.75), 200, 1.0, seed=100 + i).path for i in range(100)]
        paths_lo = [generate_fbm(Hurst(0.25), 200, 1.0, seed=300 + i).path for i in range(100)]
        paths_bm = [generate_fbm(Hurst(0.5), 200, 1.0, seed=500 + i).path for i in range(100)]
        rho_hi = autocorrelation(paths_hi, 5)
        rho_lo = autocorrelation(paths_lo, 5)
        rho_bm = autocorrelation(paths_bm, 1)
        assert rho_hi[1] > 0.0 and rho_hi[1] > rho_hi[4] > 0.0
        assert rho_lo[1] < 0.0
        assert abs(rho_bm[1]) < 3.0 / math.sqrt(100 * 199)


class TestTheoryFormulas:
    def test_msd_anchors(self):
        assert theory_msd_fbm(Hurst(0.5), 1.0) == pytest.approx(1.0, rel=1e-14)
        # Gamma(1/2) / (1.5 Gamma(3/4) Gamma(5/4)), frozen from the mpmath oracle
        assert theory_msd_fbm(Hurst(0.75), 1.0) == pytest.approx(1.0638460810704871, rel=1e-12)
        assert theory_msd_fbm(Hurst(0.3), 0.0) == 0.0

    def test_covariance_anchors(self):
        assert theory_covariance(Hurst(0.73), 2.0, 0.0) == 0.0
        h = Hurst(0.61)
        assert theory_covariance(h, 1.3, 1.3) == pytest.approx(
            theory_msd_fbm(h, 1.3), rel=1e-13
        )

    def test_alpha_hurst_bridge(self):
        assert alpha_from_hurst(Hurst(0.5)) == 1.0
        assert alpha_from_hurst(Hurst(0.75)) == 0.5
        assert hurst_from_alpha(0.2).h == pytest.approx(0.9, rel=1e-15)
        # dyadic round trips are exact; generic ones within an ulp
        for h in (0.25, 0.5, 0.75):
            assert hurst_from_alpha(alpha_from_hurst(Hurst(h))).h == h
        for alpha in (0.2, 0.3, 0.7):
            back = alpha_from_hurst(hurst_from_alpha(alpha))
            assert back == pytest.approx(alpha, abs=1e-15)
        with pytest.raises(ValueError):
            hurst_from_alpha(2.0)
        with pytest.raises(ValueError):
            Hurst(1.0)

    def test_epsilon_fdt(self):
        assert epsilon_fdt(1.0, 1.0, Hurst(0.5)) == pytest.approx(math.sqrt(2.0), rel=1e-14)
        want = math.sqrt(
            2.0 * gamma(0.75) * gamma(1.25) / (gamma(1.5) * gamma(0.5))
        )
        assert epsilon_fdt(1.0, 1.0, Hurst(0.75)) == pytest.approx(want, rel=1e-13)
        base = epsilon_fdt(1.0, 1.0, Hurst(0.65))
        assert epsilon_fdt(1.0, 2.0, Hurst(0.65)) == pytest.approx(
            math.sqrt(2.0) * base, rel=1e-14
        )
        with pytest.raises(ValueError):
            epsilon_fdt(0.0, 1.0, Hurst(0.6))


class TestFinancialNoise:
    def test_fdt_scales(self):
        params = MarketParams(lam=500.0, beta=1.0, a=1.0, kbt=1.0, alpha=0.5)
        pair = financial_noise(params, 64, 1.0, 1, 2)
        assert pair.scale_white**2 == pytest.approx(1000.0, rel=1e-13)
        assert pair.scale_colored**2 == pytest.approx(math.sqrt(2.0), rel=1e-12)

    def test_memoryless_limit_of_colored_scale(self):
        params = MarketParams(lam=2.0, beta=1.0, a=1.0, kbt=1.0, alpha=0.999)
        pair = financial_noise(params, 16, 1.0, 1, 2)
        assert pair.scale_colored**2 == pytest.approx(2.0, rel=5e-3)

    def test_streams_share_grid_and_are_independent(self):
        params = MarketParams(lam=100.0, beta=1.0, a=1.0, kbt=1.0, alpha=0.4)
        pair = financial_noise(params, 256, 2.0, 11, 12)
        assert len(pair.white) == len(pair.colored) == 256
        assert pair.white.dt == pair.colored.dt
        w = pair.white.values / pair.scale_white
        c = pair.colored.values / pair.scale_colored
        corr = float(np.corrcoef(w, c)[0, 1])
        assert abs(corr) < 3.0 / math.sqrt(256)

    def test_white_sample_variance(self):
        params = MarketParams(lam=500.0, beta=1.0, a=1.0, kbt=1.0, alpha=0.5)
        pair = financial_noise(params, 4000, 4.0, 3, 4)
        # unit-rate white noise has per-sample variance 1/dt, scaled by b_W
        want = pair.scale_white**2 / pair.white.dt
        assert np.var(pair.white.values) == pytest.approx(want, rel=0.1)


def test_fbm_path_invariant_validation():
    p = generate_fbm(Hurst(0.6), 32, 1.0, seed=0)
    with pytest.raises(ValueError):
        FbmPath(
            hurst=p.hurst,
            path=p.path,
            driving_increments=p.driving_increments[:-1],
            seed=0,
        )

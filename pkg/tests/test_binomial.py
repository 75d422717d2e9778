"""Binomial proportion: quantile preimages, fiducial sampling, post-data output.

Frozen reference numbers come from the standalone scripts in tests/oracles,
which integrate the defining formulas directly; the quadrature helper here
recomputes the fiducial density live so the sampler is always checked against
an integration route that never touches the sampling code.
"""

import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st
from scipy import integrate, special as sp, stats

from sharpfid import (
    BetaOnInterval,
    FLAT,
    IntervalHypothesis,
    SmoothedGpd,
    ValidationError,
    ZeroMass,
)
from sharpfid.binomial import (
    BinomialCount,
    analyze,
    phi_binomial,
    preimage_interval,
    sample_fS,
    step_cdf,
)
from sharpfid.numerics import RngStream

# (gamma, x, n) -> (lo, hi)
PREIMAGE_ORACLE = {
    (0.3, 5, 16): (0.346274561541, 0.409905090706),
    (0.8, 5, 16): (0.199414397742, 0.253865963055),
    (0.5, 0, 16): (0.0, 0.042396719301),
    (0.5, 16, 16): (0.957603280699, 1.0),
    (0.25, 1, 4): (0.292893218813, 0.543678285419),
}

# (gamma, pi, n) -> count
PHI_ORACLE = {
    (0.3, 0.3125, 16): 4,
    (0.999, 0.5, 16): 14,
    (0.001, 0.5, 16): 2,
    (0.5, 0.5, 4): 2,
}

# (pi, x, n) -> fiducial density
FS_ORACLE = {
    (0.3, 5, 16): 3.5663494063,
    (0.5, 5, 16): 1.0070475513,
    (0.2, 5, 16): 2.3070758808,
    (0.31, 4, 16): 3.0825575851,
    (0.25, 3, 16): 3.1804408652,
}

# x -> p_in by deterministic quadrature, n=16, interval (0.49, 0.51), prior 0.3
QUAD_FLAT = {5: 0.157940, 4: 0.068833, 3: 0.020384}
QUAD_SMOOTH = {5: 0.157451, 4: 0.068382, 3: 0.020158}
QUAD_TAU = {5: 0.161714, 4: 0.169626, 3: 0.179286}

HYP = IntervalHypothesis(0.49, 0.51, 0.3)


def quad_fs(pi: float, x: int, n: int) -> float:
    """Fiducial density by direct integration over the uniform level.

    Averages the conditioned beta density over every level whose preimage
    contains ``pi``; independent of the sampling implementation.
    """
    a, b = x + 1.0, n - x + 1.0
    g_lo = float(step_cdf(x - 1, pi, n))
    g_hi = float(step_cdf(x, pi, n))
    log_beta_pdf = (
        (a - 1.0) * math.log(pi) + (b - 1.0) * math.log1p(-pi) - sp.betaln(a, b)
    )

    if g_hi - g_lo < 1e-14:
        return 0.0

    def inv_mass(g):
        lo = 0.0 if x == 0 else 1.0 - sp.betaincinv(n - x + 1.0, x, g)
        hi = 1.0 if x == n else 1.0 - sp.betaincinv(n - x, x + 1.0, g)
        mass = sp.betainc(a, b, hi) - sp.betainc(a, b, lo)
        return 1.0 / mass if mass > 0.0 else 0.0

    val, _ = integrate.quad(inv_mass, g_lo, g_hi, epsabs=1e-11, epsrel=1e-9, limit=200)
    return math.exp(log_beta_pdf) * val


class TestStepCdf:
    def test_matches_reference_cdf(self):
        pis = np.linspace(0.02, 0.98, 25)
        for n in (4, 16, 30):
            for y in range(-1, n + 2):
                np.testing.assert_allclose(
                    step_cdf(y, pis, n), stats.binom.cdf(y, n, pis), rtol=1e-12, atol=1e-14
                )

    def test_degenerate_counts(self):
        assert step_cdf(-1, 0.3, 16) == 0.0
        assert step_cdf(16, 0.3, 16) == 1.0
        assert step_cdf(25, 0.3, 16) == 1.0

    def test_scalar_in_scalar_out(self):
        assert isinstance(step_cdf(5, 0.3, 16), float)


class TestPhi:
    @pytest.mark.parametrize("key, want", sorted(PHI_ORACLE.items()))
    def test_frozen_examples(self, key, want):
        gamma, pi, n = key
        assert phi_binomial(gamma, pi, n) == want

    def test_boundary_proportions(self):
        assert phi_binomial(0.5, 0.0, 16) == 0
        assert phi_binomial(0.5, 1.0, 16) == 16

    def test_tiny_level_gives_zero(self):
        assert phi_binomial(1e-12, 0.5, 16) == 0

    def test_is_left_continuous_quantile(self):
        # smallest count with cdf strictly above the level
        gamma, pi, n = 0.3, 0.3125, 16
        y = phi_binomial(gamma, pi, n)
        assert step_cdf(y, pi, n) > gamma
        assert step_cdf(y - 1, pi, n) <= gamma

    def test_rejects_bad_inputs(self):
        with pytest.raises(ValidationError):
            phi_binomial(0.0, 0.5, 16)
        with pytest.raises(ValidationError):
            phi_binomial(0.5, 1.5, 16)
        with pytest.raises(ValidationError):
            phi_binomial(0.5, 0.5, 0)


class TestPreimage:
    @pytest.mark.parametrize("key, want", sorted(PREIMAGE_ORACLE.items()))
    def test_frozen_examples(self, key, want):
        gamma, x, n = key
        got = preimage_interval(gamma, x, n)
        assert got.lo == pytest.approx(want[0], abs=1e-9)
        assert got.hi == pytest.approx(want[1], abs=1e-9)

    @pytest.mark.parametrize("gamma", [0.1, 0.37, 0.5, 0.8, 0.97])
    def test_counts_tile_the_unit_interval(self, gamma):
        n = 16
        cells = [preimage_interval(gamma, x, n) for x in range(n + 1)]
        assert cells[0].lo == 0.0
        assert cells[-1].hi == 1.0
        for left, right in zip(cells, cells[1:]):
            assert left.hi == right.lo  # shared betaincinv expression, exact

    def test_reflection_maps_counts(self):
        # swapping successes and failures mirrors the preimage through 1/2
        for gamma, x, n in [(0.3, 5, 16), (0.8, 2, 16), (0.25, 1, 4)]:
            direct = preimage_interval(gamma, x, n)
            mirror = preimage_interval(1.0 - gamma, n - x, n)
            assert direct.lo == pytest.approx(1.0 - mirror.hi, abs=1e-12)
            assert direct.hi == pytest.approx(1.0 - mirror.lo, abs=1e-12)

    def test_members_map_back_to_count(self):
        gamma, x, n = 0.3, 5, 16
        cell = preimage_interval(gamma, x, n)
        mid = 0.5 * (cell.lo + cell.hi)
        assert phi_binomial(gamma, mid, n) == x
        assert phi_binomial(gamma, cell.lo - 1e-9, n) != x

    def test_rejects_bad_inputs(self):
        with pytest.raises(ValidationError):
            preimage_interval(0.0, 5, 16)
        with pytest.raises(ValidationError):
            preimage_interval(0.5, 17, 16)

    @settings(max_examples=60, deadline=None)
    @given(
        gamma=st.floats(0.001, 0.999),
        n=st.integers(1, 40),
        data=st.data(),
    )
    def test_quantile_constant_on_preimage(self, gamma, n, data):
        x = data.draw(st.integers(0, n))
        cell = preimage_interval(gamma, x, n)
        t = data.draw(st.floats(0.01, 0.99))
        pi = cell.lo + t * (cell.hi - cell.lo)
        if cell.lo < pi < cell.hi:
            assert phi_binomial(gamma, pi, n) == x


class TestFiducialDensity:
    @pytest.mark.parametrize("key, want", sorted(FS_ORACLE.items()))
    def test_frozen_values_reproduce(self, key, want):
        pi, x, n = key
        assert quad_fs(pi, x, n) == pytest.approx(want, abs=5e-6)

    def test_sampler_matches_quadrature_cdf(self):
        # same law two ways: inverse-transform draws vs integrated density
        x, n = 5, 16
        draws = sample_fS(BinomialCount(x, n), 150_000, RngStream(11)).values
        grid = np.linspace(0.02, 0.85, 482)
        dens = np.array([quad_fs(p, x, n) for p in grid])
        cdf = integrate.cumulative_trapezoid(dens, grid, initial=0.0)
        assert 0.993 < cdf[-1] < 1.0 + 1e-6
        assert float(np.mean(draws < 0.02)) < 1e-4
        for t in (0.25, 0.30, 0.35, 0.40, 0.45, 0.85):
            emp = float(np.mean(draws <= t))
            val = float(np.interp(t, grid, cdf))
            assert emp == pytest.approx(val, abs=0.006)


class TestSampler:
    def test_reproducible_given_stream(self):
        a = sample_fS(BinomialCount(5, 16), 1000, RngStream(3)).values
        b = sample_fS(BinomialCount(5, 16), 1000, RngStream(3)).values
        np.testing.assert_array_equal(a, b)

    def test_draws_stay_in_unit_interval(self):
        vals = sample_fS(BinomialCount(0, 16), 20_000, RngStream(5)).values
        assert np.all((vals >= 0.0) & (vals <= 1.0))

    def test_centered_count_has_centered_mean(self):
        vals = sample_fS(BinomialCount(8, 16), 100_000, RngStream(7)).values
        assert float(vals.mean()) == pytest.approx(0.5, abs=3e-3)

    def test_swapping_successes_mirrors_the_law(self):
        a = sample_fS(BinomialCount(5, 16), 50_000, RngStream(1)).values
        b = sample_fS(BinomialCount(11, 16), 50_000, RngStream(2)).values
        qs = np.linspace(0.1, 0.9, 9)
        np.testing.assert_allclose(
            np.quantile(a, qs), 1.0 - np.quantile(b, 1.0 - qs), atol=0.01
        )
        assert float(a.mean() + b.mean()) == pytest.approx(1.0, abs=5e-3)

    def test_single_success_in_single_trial_skews_high(self):
        vals = sample_fS(BinomialCount(1, 1), 50_000, RngStream(9)).values
        assert float(vals.mean()) > 0.5

    def test_rejects_empty_request(self):
        with pytest.raises(ValidationError):
            sample_fS(BinomialCount(5, 16), 0, RngStream(0))


class TestAnalyze:
    def test_flat_matches_quadrature(self):
        res = analyze(
            BinomialCount(5, 16), HYP, gpd=FLAT, n_samples=400_000, rng=RngStream(21)
        )
        assert res.p_in == pytest.approx(QUAD_FLAT[5], abs=2e-3)
        assert res.tau_used is None
        assert res.mc_stderr is not None and 0.0 < res.mc_stderr < 5e-3
        assert res.ess is not None and res.ess > 1e3

    def test_smoothed_matches_quadrature(self):
        res = analyze(
            BinomialCount(5, 16),
            HYP,
            gpd=SmoothedGpd(BetaOnInterval()),
            n_samples=400_000,
            rng=RngStream(22),
        )
        assert res.p_in == pytest.approx(QUAD_SMOOTH[5], abs=2e-3)
        assert res.tau_used == pytest.approx(QUAD_TAU[5], rel=0.05)

    @pytest.mark.parametrize("x", [4, 3])
    def test_other_counts_match_quadrature(self, x):
        res = analyze(
            BinomialCount(x, 16),
            HYP,
            gpd=SmoothedGpd(BetaOnInterval()),
            n_samples=400_000,
            rng=RngStream(30 + x),
        )
        assert res.p_in == pytest.approx(QUAD_SMOOTH[x], abs=2e-3)
        # few draws land inside for off-center counts, so tau is noisier
        assert res.tau_used == pytest.approx(QUAD_TAU[x], rel=0.15)

    def test_p_in_decays_away_from_center(self):
        vals = []
        for x in (8, 7, 6, 5, 4, 3):
            res = analyze(
                BinomialCount(x, 16), HYP, n_samples=200_000, rng=RngStream(40 + x)
            )
            vals.append(res.p_in)
        assert all(a > b for a, b in zip(vals, vals[1:]))

    def test_reflected_data_gives_same_answer(self):
        # interval symmetric around 1/2, so swapping successes changes nothing
        a = analyze(BinomialCount(5, 16), HYP, n_samples=200_000, rng=RngStream(51))
        b = analyze(BinomialCount(11, 16), HYP, n_samples=200_000, rng=RngStream(52))
        assert a.p_in == pytest.approx(b.p_in, abs=3e-3)

    def test_component_laws_are_proper_and_split_mass(self):
        res = analyze(BinomialCount(5, 16), HYP, n_samples=300_000, rng=RngStream(60))
        res.density_in.validate()
        res.density_out.validate()
        assert res.density_in.support[0][0] >= HYP.lo - 1e-12
        assert res.density_in.support[-1][1] <= HYP.hi + 1e-12
        for lo, hi in res.density_out.support:
            assert hi <= HYP.lo + 1e-12 or lo >= HYP.hi - 1e-12
        mix = res.mixture()
        assert mix.mass(HYP.lo, HYP.hi) == pytest.approx(res.p_in, abs=1e-9)

    def test_smoothed_mixture_is_continuous_at_endpoints(self):
        res = analyze(
            BinomialCount(5, 16),
            HYP,
            gpd=SmoothedGpd(BetaOnInterval()),
            n_samples=800_000,
            rng=RngStream(61),
        )
        mix = res.mixture()
        for edge in (HYP.lo, HYP.hi):
            below = mix.pdf(edge - 2e-4)
            above = mix.pdf(edge + 2e-4)
            assert above == pytest.approx(below, rel=0.15)

    def test_explicit_weight_scale_is_honored(self):
        res = analyze(
            BinomialCount(5, 16),
            HYP,
            gpd=SmoothedGpd(BetaOnInterval(), tau=0.3),
            n_samples=100_000,
            rng=RngStream(62),
        )
        assert res.tau_used == 0.3

    def test_far_interval_with_few_draws_raises(self):
        with pytest.raises(ZeroMass):
            analyze(
                BinomialCount(5, 16),
                IntervalHypothesis(0.98, 0.99, 0.3),
                n_samples=2000,
                rng=RngStream(63),
            )

    def test_rejects_point_and_boundary_hypotheses(self):
        with pytest.raises(ValidationError):
            analyze(BinomialCount(5, 16), IntervalHypothesis.sharp(0.5, 0.3))
        with pytest.raises(ValidationError):
            analyze(BinomialCount(5, 16), IntervalHypothesis(0.0, 0.1, 0.3))

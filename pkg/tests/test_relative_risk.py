"""Two-arm relative-risk analysis against a deterministic quadrature oracle.

Frozen values come from tests/oracles/oracle_relative_risk.py, which
integrates the exact product fiducial law on a strip grid following the
ratio interval: no Monte Carlo on the oracle side.
"""

import numpy as np
import pytest

from sharpfid.binomial import BinomialCount, sample_fS
from sharpfid.core import FLAT, LogScaleBetaOnRatio, SmoothedGpd
from sharpfid.errors import ValidationError, ZeroMass
from sharpfid.numerics import RngStream
from sharpfid.relative_risk import (
    DEFAULT_GPD,
    RatioHypothesis,
    TwoArmCounts,
    analyze,
    jeffreys_approx,
    sample_joint_fS,
)

COUNTS = TwoArmCounts(5, 20, 18, 30)
HYP = RatioHypothesis(0.045, 0.4)

# quadrature oracle at n_t=20, e_c=18, n_c=30, eps=0.045, p0=0.4; grid
# accuracy ~1e-4 on the probabilities (bounded by the arm-swap residual)
ORACLE = {
    ("fiducial", 5): dict(z0=0.00525316, tau=0.65534020, p_flat=0.04360375, p_smooth=0.04235646),
    ("fiducial", 6): dict(z0=0.01294472, tau=0.60371312, p_flat=0.09492711, p_smooth=0.09295539),
    ("fiducial", 7): dict(z0=0.02710309, tau=0.55273742, p_flat=0.17046358, p_smooth=0.16815731),
    ("jeffreys", 5): dict(z0=0.00550638, tau=0.62368142, p_flat=0.04375726, p_smooth=0.04252624),
    ("jeffreys", 6): dict(z0=0.01333910, tau=0.58522475, p_flat=0.09520546, p_smooth=0.09325761),
    ("jeffreys", 7): dict(z0=0.02758324, tau=0.54324576, p_flat=0.17089874, p_smooth=0.16861952),
}
# mixture moments for the fiducial smoothed case at e_t=5
MIX_MEANS = dict(pi_t=0.26939981, pi_c=0.59209034, rho=0.46890358)

N_TEST = 400_000


def handle_mean(handle, grid):
    pdf = np.array([handle.pdf(x) for x in grid])
    return float(np.trapezoid(grid * pdf, grid))


@pytest.fixture(scope="module")
def smooth_results():
    return {
        e_t: analyze(
            TwoArmCounts(e_t, 20, 18, 30), HYP, n_samples=N_TEST, rng=RngStream(e_t)
        )
        for e_t in (5, 6, 7)
    }


class TestTwoArmCounts:
    def test_arm_views(self):
        assert COUNTS.treatment == BinomialCount(5, 20)
        assert COUNTS.control == BinomialCount(18, 30)
        assert COUNTS.swapped() == TwoArmCounts(18, 30, 5, 20)

    def test_validation(self):
        with pytest.raises(ValidationError):
            TwoArmCounts(21, 20, 18, 30)
        with pytest.raises(ValidationError):
            TwoArmCounts(5, 20, -1, 30)
        with pytest.raises(ValidationError):
            TwoArmCounts(5, 20, 18, 0)


class TestRatioHypothesis:
    def test_interval_is_log_symmetric_around_one(self):
        assert HYP.lo == pytest.approx(1.0 / 1.045, rel=1e-15)
        assert HYP.hi == 1.045
        assert HYP.lo * HYP.hi == pytest.approx(1.0, rel=1e-15)
        assert HYP.lo < 1.0 < HYP.hi

    def test_zero_eps_degenerates_to_the_point_one(self):
        sharp = RatioHypothesis(0.0, 0.5)
        assert sharp.is_sharp
        assert sharp.lo == sharp.hi == 1.0

    def test_validation(self):
        with pytest.raises(ValidationError):
            RatioHypothesis(-0.1, 0.4)
        with pytest.raises(ValidationError):
            RatioHypothesis(0.045, 1.2)


class TestSampleJoint:
    def test_pairs_reproduce_the_single_arm_streams(self):
        rng = RngStream(7)
        pairs = sample_joint_fS(COUNTS, 5000, rng)
        assert pairs.values.shape == (5000, 2)
        assert np.all(pairs.weights == 1.0)
        t = sample_fS(COUNTS.treatment, 5000, RngStream(7).child(0))
        c = sample_fS(COUNTS.control, 5000, RngStream(7).child(1))
        assert np.array_equal(pairs.values[:, 0], t.values)
        assert np.array_equal(pairs.values[:, 1], c.values)

    def test_arms_are_uncorrelated(self):
        pairs = sample_joint_fS(COUNTS, 200_000, RngStream(9))
        corr = np.corrcoef(pairs.values[:, 0], pairs.values[:, 1])[0, 1]
        assert abs(corr) < 3.0 / np.sqrt(200_000)

    def test_zero_count_arm_stays_below_its_level_bound(self):
        # for x=0 the preimage is [0, 1 - gamma^(1/n)], so each draw is
        # bounded by a function of its own level, reconstructed from the stream
        counts = TwoArmCounts(0, 20, 18, 30)
        rng = RngStream(13)
        pairs = sample_joint_fS(counts, 20_000, rng)
        gam = RngStream(13).child(0).uniform(20_000)
        bound = 1.0 - gam ** (1.0 / 20.0)
        assert np.all(pairs.values[:, 0] <= bound + 1e-12)

    def test_single_pair(self):
        pairs = sample_joint_fS(COUNTS, 1, RngStream(0))
        assert pairs.values.shape == (1, 2)

    def test_validation(self):
        with pytest.raises(ValidationError):
            sample_joint_fS(COUNTS, 0, RngStream(0))


class TestAnalyze:
    def test_smoothed_matches_the_quadrature_oracle(self, smooth_results):
        for e_t, res in smooth_results.items():
            want = ORACLE[("fiducial", e_t)]
            assert res.p_in == pytest.approx(want["p_smooth"], abs=2.5e-3)
            assert res.tau_used == pytest.approx(want["tau"], rel=0.05)

    def test_flat_matches_the_quadrature_oracle(self):
        res = analyze(COUNTS, HYP, FLAT, n_samples=N_TEST, rng=RngStream(5))
        assert res.p_in == pytest.approx(ORACLE[("fiducial", 5)]["p_flat"], abs=2.5e-3)
        assert res.tau_used is None

    def test_probability_stays_below_the_prior(self, smooth_results):
        for res in smooth_results.values():
            assert res.p_in < 0.4

    def test_probability_grows_toward_the_balanced_ratio(self, smooth_results):
        # control proportion is 0.6; e_t in {5,6,7} walks toward it
        ps = [smooth_results[e].p_in for e in (5, 6, 7)]
        assert ps[0] < ps[1] < ps[2]

    def test_swapping_the_arms_leaves_the_probability(self, smooth_results):
        swapped = analyze(
            COUNTS.swapped(), HYP, n_samples=N_TEST, rng=RngStream(77)
        )
        assert swapped.p_in == pytest.approx(smooth_results[5].p_in, abs=4e-3)

    def test_mixture_arm_means_match_the_oracle(self, smooth_results):
        res = smooth_results[5]
        grid = np.linspace(1e-6, 1.0 - 1e-6, 8001)
        assert handle_mean(res.treatment, grid) == pytest.approx(
            MIX_MEANS["pi_t"], abs=3e-3
        )
        assert handle_mean(res.control, grid) == pytest.approx(
            MIX_MEANS["pi_c"], abs=3e-3
        )
        mix = res.ratio_mixture()
        lo_r, hi_r = mix.support[0][0], mix.support[-1][1]
        rgrid = np.linspace(max(lo_r, 1e-6), hi_r, 8001)
        assert handle_mean(mix, rgrid) == pytest.approx(MIX_MEANS["rho"], abs=5e-3)

    def test_component_laws_are_normalized(self, smooth_results):
        res = smooth_results[5]
        assert res.post.density_in.mass() == pytest.approx(1.0, abs=1e-9)
        assert res.post.density_out.mass() == pytest.approx(1.0, abs=1e-9)
        assert res.treatment.mass() == pytest.approx(1.0, abs=1e-9)
        assert res.control.mass() == pytest.approx(1.0, abs=1e-9)
        mix = res.ratio_mixture()
        assert mix.mass() == pytest.approx(1.0, abs=1e-9)
        assert mix.mass(HYP.lo, HYP.hi) == pytest.approx(res.p_in, abs=1e-9)

    def test_ratio_marginal_is_continuous_at_the_endpoints(self):
        res = analyze(COUNTS, HYP, n_samples=1_600_000, rng=RngStream(3))
        mix = res.ratio_mixture()
        w = HYP.eps / 10.0
        for edge in (HYP.lo, HYP.hi):
            left = mix.mass(edge - w, edge) / w
            right = mix.mass(edge, edge + w) / w
            assert abs(left - right) / max(left, right) < 0.10

    def test_flat_ratio_marginal_jumps_at_the_endpoints(self):
        res = analyze(COUNTS, HYP, FLAT, n_samples=1_600_000, rng=RngStream(3))
        mix = res.ratio_mixture()
        w = HYP.eps / 10.0
        edge = HYP.hi
        left = mix.mass(edge - w, edge) / w
        right = mix.mass(edge, edge + w) / w
        assert abs(left - right) / max(left, right) > 0.2

    def test_reports_error_diagnostics(self, smooth_results):
        res = smooth_results[5]
        assert res.mc_stderr is not None and 0.0 < res.mc_stderr < 2e-3
        assert res.ess is not None and res.ess > 500

    def test_explicit_weight_is_honored(self):
        gpd = SmoothedGpd(LogScaleBetaOnRatio(), tau=0.5)
        res = analyze(COUNTS, HYP, gpd, n_samples=50_000, rng=RngStream(1))
        assert res.tau_used == 0.5

    def test_empty_interval_raises_with_diagnostics(self):
        with pytest.raises(ZeroMass, match="ESS"):
            analyze(COUNTS, RatioHypothesis(1e-9, 0.4), n_samples=2000,
                    rng=RngStream(1))
        with pytest.raises(ZeroMass):
            analyze(COUNTS, RatioHypothesis(0.0, 0.4), n_samples=2000,
                    rng=RngStream(1))

    def test_unknown_weighting_spec(self):
        with pytest.raises(ValidationError):
            analyze(COUNTS, HYP, gpd="smooth", n_samples=1000, rng=RngStream(0))

    def test_reproducible(self):
        a = analyze(COUNTS, HYP, n_samples=50_000, rng=RngStream(21))
        b = analyze(COUNTS, HYP, n_samples=50_000, rng=RngStream(21))
        c = analyze(COUNTS, HYP, n_samples=50_000, rng=RngStream(22))
        assert a.p_in == b.p_in
        assert a.p_in != c.p_in


class TestJeffreysApprox:
    def test_matches_its_own_oracle(self):
        res = jeffreys_approx(COUNTS, HYP, n_samples=N_TEST, rng=RngStream(41))
        want = ORACLE[("jeffreys", 5)]
        assert res.p_in == pytest.approx(want["p_smooth"], abs=2.5e-3)
        assert res.tau_used == pytest.approx(want["tau"], rel=0.05)

    def test_tracks_the_fiducial_route(self, smooth_results):
        res = jeffreys_approx(COUNTS, HYP, n_samples=N_TEST, rng=RngStream(42))
        assert res.p_in == pytest.approx(smooth_results[5].p_in, abs=0.01)

    def test_saturated_arm_runs(self):
        res = jeffreys_approx(
            TwoArmCounts(20, 20, 18, 30), HYP, n_samples=20_000, rng=RngStream(2)
        )
        assert 0.0 <= res.p_in <= 1.0

    def test_deterministic(self):
        a = jeffreys_approx(COUNTS, HYP, n_samples=20_000, rng=RngStream(6))
        b = jeffreys_approx(COUNTS, HYP, n_samples=20_000, rng=RngStream(6))
        assert a.p_in == b.p_in

"""Known-variance normal backend against independently computed constants.

The frozen numbers below come from tests/oracles/oracle_normal_known.py,
which evaluates the defining integrals directly with scipy quadrature and
brentq and shares no code with the package.
"""

import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from sharpfid.core import FLAT, BetaOnInterval, IntervalHypothesis, SmoothedGpd
from sharpfid.errors import ValidationError, ZeroMass
from sharpfid.normal_known import (
    NormalKnownSummary,
    analyze,
    berger_sellke_lower_bound,
    crossover_z,
    fiducial_components,
    post_prob_sharp,
    predictive_evidence,
)
from sharpfid.numerics import RngStream, ks_statistic

# (z, prior) -> post-data probability of the point hypothesis
SHARP_ORACLE = {
    (1.96, 0.5): 0.171614718037,
    (1.96, 0.3): 0.081546020479,
    (2.5758, 0.5): 0.048762637481,
    (2.5758, 0.3): 0.021497281283,
    (3.2905, 0.5): 0.006261081788,
    (3.2905, 0.3): 0.002692955517,
}

CROSSOVER_ORACLE = 0.832554611157698

# (xbar, se, eps, prior, smoothed) -> (p_in, tau)
INTERVAL_ORACLE = {
    (2.1, 1.0, 0.1, 0.3, False): (0.063385141629, None),
    (1.0, 1.0, 0.5, 0.5, False): (0.473476990767, None),
    (1.05, 0.5, 0.1, 0.3, False): (0.066437184513, None),
    (1.7, 1.0, 0.1, 0.3, True): (0.124228066568, 1.2778239474),
    (2.1, 1.0, 0.1, 0.3, True): (0.062700569457, 1.3038457139),
    (2.5, 1.0, 0.1, 0.3, True): (0.026169610369, 1.3220836344),
    (1.0, 1.0, 0.5, 0.5, True): (0.466287696723, 1.7390980758),
    (2.1, 1.0, 0.25, 0.5, True): (0.138928447193, 3.0312177238),
}


def _case(xbar, se, eps, prior, smoothed):
    summary = NormalKnownSummary.from_se(xbar, se)
    hyp = IntervalHypothesis.symmetric(eps, prior)
    gpd = SmoothedGpd() if smoothed else FLAT
    return summary, hyp, gpd


class TestSharpCase:
    @pytest.mark.parametrize("key,expected", sorted(SHARP_ORACLE.items()))
    def test_matches_oracle(self, key, expected):
        z, prior = key
        assert post_prob_sharp(z, prior) == pytest.approx(expected, abs=1e-10)

    @pytest.mark.parametrize("key,expected", sorted(SHARP_ORACLE.items()))
    def test_analyze_agrees_with_formula(self, key, expected):
        z, prior = key
        summary = NormalKnownSummary.from_se(z, 1.0)
        result = analyze(summary, IntervalHypothesis.sharp(0.0, prior))
        assert result.p_in == pytest.approx(expected, abs=1e-10)
        assert result.density_in.atom_mass == 1.0
        assert result.tau_used is None

    def test_crossover(self):
        """Below the crossover the point hypothesis gains probability, above
        it loses; the location is the same for every prior."""
        z_star = crossover_z()
        assert z_star == pytest.approx(CROSSOVER_ORACLE, abs=1e-10)
        assert z_star == pytest.approx(math.sqrt(math.log(2.0)), abs=1e-10)
        for p0 in (0.2, 0.5, 0.8):
            assert post_prob_sharp(z_star - 0.05, p0) > p0
            assert post_prob_sharp(z_star + 0.05, p0) < p0

    def test_exceeds_classical_lower_bound(self):
        for z in (1.0, 1.96, 2.5758, 3.2905, 5.0):
            assert post_prob_sharp(z, 0.5) > berger_sellke_lower_bound(z, 0.5)

    def test_extreme_z_saturates(self):
        assert post_prob_sharp(60.0, 0.5) < 1e-300
        assert post_prob_sharp(0.0, 0.5) == pytest.approx(
            1.0 / (1.0 + 1.0 / math.sqrt(2.0)), rel=1e-12
        )

    def test_evidence_ratio_closed_form(self):
        summary = NormalKnownSummary.from_se(1.96, 1.0)
        m_in, m_out = predictive_evidence(summary, IntervalHypothesis.sharp(0.0, 0.5))
        assert m_in / m_out == pytest.approx(
            math.sqrt(2.0) * math.exp(-0.5 * 1.96**2), rel=1e-12
        )


class TestIntervalCase:
    @pytest.mark.parametrize("key,expected", sorted(INTERVAL_ORACLE.items()))
    def test_p_in_and_tau_match_oracle(self, key, expected):
        summary, hyp, gpd = _case(*key)
        result = analyze(summary, hyp, gpd)
        p_exp, tau_exp = expected
        assert result.p_in == pytest.approx(p_exp, abs=1e-9)
        if tau_exp is None:
            assert result.tau_used is None
        else:
            assert result.tau_used == pytest.approx(tau_exp, rel=1e-7)

    def test_component_laws_are_proper(self):
        summary, hyp, gpd = _case(2.1, 1.0, 0.1, 0.3, True)
        result = analyze(summary, hyp, gpd)
        result.density_in.validate()
        result.density_out.validate()
        mix = result.mixture()
        assert mix.mass(hyp.lo, hyp.hi) == pytest.approx(result.p_in, abs=1e-9)

    def test_smoothed_mixture_continuous_at_endpoints(self):
        """The solved weight removes the density jump at both ends."""
        for key in ((1.7, 1.0, 0.1, 0.3, True), (2.1, 1.0, 0.25, 0.5, True)):
            summary, hyp, gpd = _case(*key)
            result = analyze(summary, hyp, gpd)
            mix = result.mixture()
            for edge in (hyp.lo, hyp.hi):
                inner = result.p_in * float(result.density_in.pdf(edge))
                outer = result.p_out * float(result.density_out.pdf(edge))
                assert inner == pytest.approx(outer, rel=1e-8)
                # and the assembled mixture shows no jump across the edge
                just_in = float(mix.pdf(edge - math.copysign(1e-9, edge)))
                just_out = float(mix.pdf(edge + math.copysign(1e-9, edge)))
                assert just_in == pytest.approx(just_out, rel=1e-5)

    def test_flat_mixture_jumps_at_endpoints(self):
        summary, hyp, _ = _case(2.1, 1.0, 0.1, 0.3, False)
        result = analyze(summary, hyp, FLAT)
        inner = result.p_in * float(result.density_in.pdf(hyp.hi))
        outer = result.p_out * float(result.density_out.pdf(hyp.hi))
        assert abs(inner - outer) > 0.1 * outer

    def test_explicit_tau_is_honored(self):
        summary, hyp, _ = _case(2.1, 1.0, 0.1, 0.3, True)
        result = analyze(summary, hyp, SmoothedGpd(tau=0.7))
        assert result.tau_used == 0.7
        m_in, m_out = predictive_evidence(summary, hyp, SmoothedGpd(tau=0.7))
        from sharpfid.core import post_data_probability

        assert result.p_in == pytest.approx(
            post_data_probability(hyp.prior_prob, m_in, m_out), rel=1e-12
        )

    def test_narrow_interval_approaches_sharp(self):
        """Shrinking the interval reproduces the point-hypothesis answer."""
        summary = NormalKnownSummary.from_se(1.96, 1.0)
        sharp = post_prob_sharp(1.96, 0.5)
        narrow = analyze(summary, IntervalHypothesis.symmetric(1e-6, 0.5))
        assert narrow.p_in == pytest.approx(sharp, abs=1e-5)

    def test_location_scale_invariance(self):
        """Standardized data determine the answer; units do not."""
        base = analyze(*_case(2.1, 1.0, 0.1, 0.3, True)[:2], SmoothedGpd())
        scaled_summary = NormalKnownSummary.from_se(2.1 * 3.7, 3.7)
        scaled_hyp = IntervalHypothesis.symmetric(0.1 * 3.7, 0.3)
        scaled = analyze(scaled_summary, scaled_hyp, SmoothedGpd())
        assert scaled.p_in == pytest.approx(base.p_in, rel=1e-9)

    def test_sample_size_folds_into_standard_error(self):
        a = analyze(NormalKnownSummary(4, 1.05, 1.0), IntervalHypothesis.symmetric(0.1, 0.3))
        b = analyze(NormalKnownSummary(1, 1.05, 0.5), IntervalHypothesis.symmetric(0.1, 0.3))
        assert a.p_in == pytest.approx(b.p_in, rel=1e-12)
        assert a.p_in == pytest.approx(INTERVAL_ORACLE[(1.05, 0.5, 0.1, 0.3, False)][0], abs=1e-9)

    @given(
        st.floats(min_value=0.0, max_value=4.0),
        st.floats(min_value=0.02, max_value=0.6),
        st.floats(min_value=0.05, max_value=0.95),
    )
    @settings(max_examples=30, deadline=None)
    def test_probability_in_unit_range_and_prior_monotone(self, xbar, eps, p0):
        summary = NormalKnownSummary.from_se(xbar, 1.0)
        lo_res = analyze(summary, IntervalHypothesis.symmetric(eps, p0))
        assert 0.0 <= lo_res.p_in <= 1.0
        hi_res = analyze(summary, IntervalHypothesis.symmetric(eps, min(p0 + 0.04, 1.0)))
        assert hi_res.p_in >= lo_res.p_in - 1e-12


class TestFiducialComponents:
    def test_masses_and_supports(self):
        summary = NormalKnownSummary.from_se(2.1, 1.0)
        hyp = IntervalHypothesis.symmetric(0.2, 0.3)
        inside, outside = fiducial_components(summary, hyp)
        inside.validate()
        outside.validate()
        assert inside.support == ((-0.2, 0.2),)
        assert outside.pdf(0.0) == 0.0

    def test_sampler_distribution(self):
        summary = NormalKnownSummary.from_se(1.0, 0.8)
        hyp = IntervalHypothesis.symmetric(0.4, 0.5)
        inside, outside = fiducial_components(summary, hyp)
        for handle in (inside, outside):
            draws = handle.draw(RngStream(21), 3000)
            assert ks_statistic(handle.cdf, draws) < 0.04

    def test_far_interval_raises_zero_mass(self):
        summary = NormalKnownSummary.from_se(45.0, 1.0)
        hyp = IntervalHypothesis.symmetric(0.1, 0.5)
        with pytest.raises(ZeroMass):
            analyze(summary, hyp)

    def test_summary_validation(self):
        with pytest.raises(ValidationError):
            NormalKnownSummary(0, 1.0, 1.0)
        with pytest.raises(ValidationError):
            NormalKnownSummary(5, 1.0, 0.0)

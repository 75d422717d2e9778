"""Post-data analysis of a normal mean when the variance is known.

The fiducial law of the mean given the observed average is normal around it
with the standard error as scale.  Evidence integrals reduce to normal
probabilities through the product identity
``N(xbar; mu, se^2) N(mu; xbar, se^2) = N(mu; xbar, se^2/2) / (2 se sqrt(pi))``,
so the flat-weighting analysis is closed form; only the bump-weighted pieces
need quadrature.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .core import (
    FLAT,
    DensityHandle,
    FlatGpd,
    GpdSpec,
    IntervalHypothesis,
    PostDataResult,
    SmoothedGpd,
    atom_handle,
    grid_density_handle,
    post_data_probability,
    post_data_probability_log,
    truncated_family_handle,
)
from .errors import ValidationError, ZeroMass
from .numerics import (
    DEFAULT_QUADRATURE,
    NormalFamily,
    QuadratureSpec,
    TauModel,
    TauSolveReport,
    bisect,
    integrate,
    solve_tau,
)

__all__ = [
    "NormalKnownSummary",
    "fiducial_components",
    "predictive_evidence",
    "post_prob_sharp",
    "berger_sellke_lower_bound",
    "crossover_z",
    "analyze",
]

_SQRT2 = math.sqrt(2.0)


@dataclass(frozen=True)
class NormalKnownSummary:
    """Sufficient summary: sample size, observed mean, known noise scale."""

    n: int
    xbar: float
    sigma: float

    def __post_init__(self):
        if self.n < 1:
            raise ValidationError(f"sample size must be at least 1, got {self.n}")
        if not (self.sigma > 0.0 and math.isfinite(self.sigma)):
            raise ValidationError(f"sigma must be positive and finite, got {self.sigma}")
        if not math.isfinite(self.xbar):
            raise ValidationError("observed mean must be finite")

    @classmethod
    def from_se(cls, xbar: float, se: float) -> "NormalKnownSummary":
        """Summary specified directly by the standard error of the mean."""
        return cls(1, xbar, se)

    @property
    def std_error(self) -> float:
        return self.sigma / math.sqrt(self.n)


def _z_of(summary: NormalKnownSummary, center: float) -> float:
    return (summary.xbar - center) / summary.std_error


def post_prob_sharp(z: float, prior_prob: float) -> float:
    """Post-data probability of a point hypothesis at standardized distance z.

    The evidence ratio of the point against its complement is
    ``sqrt(2) exp(-z^2 / 2)``; extreme z values saturate at 0 or 1 instead of
    overflowing.
    """
    z = float(z)
    if not math.isfinite(z):
        raise ValidationError("z must be finite")
    log_in = -0.5 * z * z
    log_out = -0.5 * math.log(2.0)
    return post_data_probability_log(prior_prob, log_in, log_out)


def berger_sellke_lower_bound(z: float, prior_prob: float) -> float:
    """Classical lower envelope over all symmetric alternatives, for comparison."""
    z = float(z)
    p0 = float(prior_prob)
    if not 0.0 < p0 < 1.0:
        raise ValidationError("the bound needs a prior strictly inside (0, 1)")
    return post_data_probability_log(p0, -0.5 * z * z, 0.0)


def crossover_z(rel_tol: float = 1e-13) -> float:
    """Standardized distance where the point hypothesis neither gains nor loses.

    Root of ``post_prob_sharp(z, p0) == p0``; the answer does not depend on
    the prior, so it is solved at one half.
    """
    return bisect(lambda z: post_prob_sharp(z, 0.5) - 0.5, 0.3, 1.5, rel_tol=rel_tol)


def fiducial_components(
    summary: NormalKnownSummary, hypothesis: IntervalHypothesis
) -> tuple[DensityHandle, DensityHandle]:
    """Fiducial law of the mean conditioned inside and outside the hypothesis.

    The sharp case returns a point mass inside and the unconditioned fiducial
    law outside.
    """
    family = NormalFamily(summary.xbar, summary.std_error)
    lo, hi = hypothesis.lo, hypothesis.hi
    outside = truncated_family_handle(family, [(-math.inf, lo), (hi, math.inf)])
    if hypothesis.is_sharp:
        return atom_handle(lo), outside
    inside = truncated_family_handle(family, [(lo, hi)])
    return inside, outside


def _evidence_parts(summary, hypothesis, quadrature):
    """Closed-form and quadrature ingredients of the evidence integrals.

    Returns mass inside ``z0``, bump mass ``zh`` (None for later fill),
    unnormalized inside evidence ``a``, total evidence ``full``, and the
    normalized outside evidence.
    """
    se = summary.std_error
    fam = NormalFamily(summary.xbar, se)
    half_fam = NormalFamily(summary.xbar, se / _SQRT2)
    lo, hi = hypothesis.lo, hypothesis.hi
    z0 = float(fam.cdf(hi) - fam.cdf(lo))
    full = 1.0 / (2.0 * se * math.sqrt(math.pi))
    a = full * float(half_fam.cdf(hi) - half_fam.cdf(lo))
    z_out = 1.0 - z0
    if not z_out > 0.0:
        raise ZeroMass("the outside region carries no fiducial mass")
    m_out = full * (1.0 - float(half_fam.cdf(hi) - half_fam.cdf(lo))) / z_out
    return fam, z0, a, z_out, m_out


def _bump_parts(summary, hypothesis, bump, quadrature):
    """Quadrature of the bump against the base and evidence-weighted base."""
    se = summary.std_error
    fam = NormalFamily(summary.xbar, se)
    half_fam = NormalFamily(summary.xbar, se / _SQRT2)
    full = 1.0 / (2.0 * se * math.sqrt(math.pi))
    lo, hi = hypothesis.lo, hypothesis.hi
    zh = integrate(
        lambda m: float(bump.density(m, lo, hi) * fam.pdf(m)), lo, hi, quadrature
    )
    b = full * integrate(
        lambda m: float(bump.density(m, lo, hi) * half_fam.pdf(m)), lo, hi, quadrature
    )
    return zh, b


def predictive_evidence(
    summary: NormalKnownSummary,
    hypothesis: IntervalHypothesis,
    gpd: GpdSpec = FLAT,
    quadrature: QuadratureSpec = DEFAULT_QUADRATURE,
) -> tuple[float, float]:
    """Predictive evidence (m_in, m_out) of the two components at the data.

    Each component's evidence is the density of a hypothetical replicate mean,
    evaluated at the observed mean, under that component's fiducial law pushed
    through the sampling model.  Smoothed weighting requires an explicit tau.
    """
    if hypothesis.is_sharp:
        se = summary.std_error
        z = _z_of(summary, hypothesis.lo)
        m_in = math.exp(-0.5 * z * z) / (se * math.sqrt(2.0 * math.pi))
        m_out = 1.0 / (2.0 * se * math.sqrt(math.pi))
        return m_in, m_out
    _, z0, a, z_out, m_out = _evidence_parts(summary, hypothesis, quadrature)
    if not z0 > 0.0:
        raise ZeroMass("the hypothesis interval carries no fiducial mass")
    if isinstance(gpd, FlatGpd):
        return a / z0, m_out
    if not isinstance(gpd, SmoothedGpd):
        raise ValidationError(f"unknown weighting spec {gpd!r}")
    if gpd.tau is None:
        raise ValidationError("predictive_evidence needs an explicit tau; analyze solves it")
    zh, b = _bump_parts(summary, hypothesis, gpd.bump, quadrature)
    tau = float(gpd.tau)
    return (a + tau * b) / (z0 + tau * zh), m_out


def analyze(
    summary: NormalKnownSummary,
    hypothesis: IntervalHypothesis,
    gpd: GpdSpec = FLAT,
    quadrature: QuadratureSpec = DEFAULT_QUADRATURE,
) -> PostDataResult:
    """Full post-data analysis: probability of the hypothesis plus both
    component laws.

    For smoothed weighting with ``tau`` unset, the weight is solved so the
    mixture density is continuous at the interval endpoints.
    """
    p0 = hypothesis.prior_prob
    if hypothesis.is_sharp:
        z = _z_of(summary, hypothesis.lo)
        p_in = post_data_probability_log(p0, -0.5 * z * z, -0.5 * math.log(2.0))
        density_in, density_out = fiducial_components(summary, hypothesis)
        return PostDataResult(p_in, density_in, density_out)

    fam, z0, a, z_out, m_out = _evidence_parts(summary, hypothesis, quadrature)
    if not z0 > 0.0:
        raise ZeroMass("the hypothesis interval carries no fiducial mass")
    lo, hi = hypothesis.lo, hypothesis.hi
    inside_flat = truncated_family_handle(fam, [(lo, hi)])
    outside = truncated_family_handle(fam, [(-math.inf, lo), (hi, math.inf)])

    if isinstance(gpd, FlatGpd):
        p_in = post_data_probability(p0, a / z0, m_out)
        return PostDataResult(p_in, inside_flat, outside)
    if not isinstance(gpd, SmoothedGpd):
        raise ValidationError(f"unknown weighting spec {gpd!r}")

    zh, b = _bump_parts(summary, hypothesis, gpd.bump, quadrature)
    if gpd.tau is None:
        model = TauModel(
            prior_prob=p0,
            evidence_out=m_out,
            mass_out=z_out,
            mass_in=lambda t: z0 + t * zh,
            evidence_in=lambda t: (a + t * b) / (z0 + t * zh),
        )
        tau = solve_tau(model).tau
    else:
        tau = float(gpd.tau)
    m_in = (a + tau * b) / (z0 + tau * zh)
    p_in = post_data_probability(p0, m_in, m_out)
    bump = gpd.bump

    def weighted(x):
        return (1.0 + tau * bump.density(x, lo, hi)) * fam.pdf(x)

    density_in = grid_density_handle(weighted, lo, hi, quadrature=quadrature)
    return PostDataResult(p_in, density_in, outside, tau_used=tau)

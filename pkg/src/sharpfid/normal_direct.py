"""Post-data analysis of a normal mean with unknown variance, no Gibbs.

The joint fiducial law of the mean and the variance factorizes as a Student t
marginal for the mean times an inverse-gamma conditional for the variance.
The variance integrates out of every evidence integral in closed form: the
expected likelihood given the mean is proportional to ``A(mu)^(-n/2)`` with
``A(mu) = (n-1)s^2 + n(xbar-mu)^2``, so all post-data quantities reduce to
one-dimensional work in the mean.  Smoothing, when requested, applies to the
marginal of the mean; the variance conditional is left untouched and the
joint post-data law is the smoothed marginal times that conditional.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy import special as sp

from .core import (
    FLAT,
    DensityHandle,
    FlatGpd,
    GpdSpec,
    IntervalHypothesis,
    PostDataResult,
    SmoothedGpd,
    SmoothingLevel,
    atom_handle,
    grid_density_handle,
    post_data_probability,
    post_data_probability_log,
    truncated_family_handle,
)
from .errors import ValidationError, ZeroMass
from .numerics import (
    DEFAULT_QUADRATURE,
    InverseGammaFamily,
    QuadratureSpec,
    RngStream,
    StudentTFamily,
    TauModel,
    integrate,
    solve_tau,
)

__all__ = [
    "NormalSummary",
    "JointFiducialNormal",
    "JointPostDensity",
    "analyze",
    "marginal_post_density",
    "joint_post_density",
]


@dataclass(frozen=True)
class NormalSummary:
    """Sufficient summary when the noise scale is unknown.

    ``s`` is the sample standard deviation with divisor ``n - 1``.
    """

    n: int
    xbar: float
    s: float

    def __post_init__(self):
        if not (isinstance(self.n, (int, np.integer)) and self.n >= 2):
            raise ValidationError(f"need an integer sample size of at least 2, got {self.n}")
        if not (self.s > 0.0 and math.isfinite(self.s)):
            raise ValidationError(f"sample deviation must be positive and finite, got {self.s}")
        if not math.isfinite(self.xbar):
            raise ValidationError("observed mean must be finite")

    @property
    def df(self) -> int:
        return self.n - 1

    @property
    def std_error(self) -> float:
        return self.s / math.sqrt(self.n)

    def sum_of_squares(self, mu) -> np.ndarray:
        """Total squared deviation ``(n-1)s^2 + n(xbar-mu)^2`` around ``mu``."""
        mu = np.asarray(mu, float)
        return self.df * self.s**2 + self.n * (self.xbar - mu) ** 2


@dataclass(frozen=True)
class JointFiducialNormal:
    """Joint fiducial law of (mean, variance) given the observed summary.

    Density over (mu, sigma2) proportional to
    ``(1/sigma2)^(n/2 + 1) exp(-A(mu) / (2 sigma2))``; equivalently a Student
    t marginal for the mean times an inverse-gamma conditional for the
    variance.
    """

    summary: NormalSummary

    def mu_marginal(self) -> StudentTFamily:
        s = self.summary
        return StudentTFamily(s.df, s.xbar, s.std_error)

    def sigma2_marginal(self) -> InverseGammaFamily:
        s = self.summary
        return InverseGammaFamily(s.df / 2.0, s.df * s.s**2 / 2.0)

    def sigma2_conditional(self, mu: float) -> InverseGammaFamily:
        s = self.summary
        return InverseGammaFamily(s.n / 2.0, float(s.sum_of_squares(mu)) / 2.0)

    def pdf(self, mu, sigma2):
        mu = np.asarray(mu, float)
        sigma2 = np.asarray(sigma2, float)
        s = self.summary
        half_n = s.n / 2.0
        aa = s.sum_of_squares(mu)
        with np.errstate(divide="ignore", invalid="ignore", over="ignore"):
            log_cond = (
                half_n * np.log(aa / 2.0)
                - sp.gammaln(half_n)
                - (half_n + 1.0) * np.log(sigma2)
                - aa / (2.0 * sigma2)
            )
        cond = np.where(sigma2 > 0.0, np.exp(log_cond), 0.0)
        return self.mu_marginal().pdf(mu) * cond

    def draw(self, n_draws: int, rng: RngStream) -> tuple[np.ndarray, np.ndarray]:
        """Inverse-transform draws: variance from its marginal, then the mean."""
        if n_draws < 1:
            raise ValidationError("need at least one draw")
        s = self.summary
        sigma2 = np.atleast_1d(self.sigma2_marginal().ppf(rng.uniform(int(n_draws))))
        z = sp.ndtri(np.atleast_1d(rng.uniform(int(n_draws))))
        mu = s.xbar + np.sqrt(sigma2 / s.n) * z
        return mu, sigma2


def _log_norm_const(summary: NormalSummary) -> float:
    # log of (4 pi)^(-n/2) Gamma(n) / Gamma(n/2)
    n = summary.n
    return -(n / 2.0) * math.log(4.0 * math.pi) + sp.gammaln(n) - sp.gammaln(n / 2.0)


def _log_mean_evidence(summary: NormalSummary, mu) -> np.ndarray:
    """Log expected likelihood given the mean, variance integrated out."""
    return _log_norm_const(summary) - (summary.n / 2.0) * np.log(
        summary.sum_of_squares(mu)
    )


def _log_total_evidence(summary: NormalSummary) -> float:
    """Log expected likelihood under the full joint fiducial law."""
    n, df = summary.n, summary.df
    return (
        _log_norm_const(summary)
        - (n / 2.0) * math.log(df * summary.s**2)
        + sp.gammaln(n / 2.0)
        + sp.gammaln(n - 0.5)
        - sp.gammaln(df / 2.0)
        - sp.gammaln(n)
    )


def analyze(
    summary: NormalSummary,
    hypothesis: IntervalHypothesis,
    gpd: GpdSpec = FLAT,
    quadrature: QuadratureSpec = DEFAULT_QUADRATURE,
) -> PostDataResult:
    """Post-data probability and mean-component laws, variance marginalized.

    The sharp case is fully closed form.  Interval evidences are adaptive
    quadratures of the variance-averaged likelihood against the t marginal,
    carried out relative to the likelihood peak so nothing overflows at large
    sample sizes.
    """
    p0 = hypothesis.prior_prob
    fam = JointFiducialNormal(summary).mu_marginal()
    lo, hi = hypothesis.lo, hypothesis.hi
    outside = truncated_family_handle(fam, [(-math.inf, lo), (hi, math.inf)])
    level = SmoothingLevel.MARGINAL if isinstance(gpd, SmoothedGpd) else None

    if hypothesis.is_sharp:
        log_in = float(_log_mean_evidence(summary, lo))
        log_out = _log_total_evidence(summary)
        p_in = post_data_probability_log(p0, log_in, log_out)
        return PostDataResult(p_in, atom_handle(lo), outside, smoothing_level=level)

    z0 = float(fam.cdf(hi) - fam.cdf(lo))
    z_out = 1.0 - z0
    if not z0 > 0.0:
        raise ZeroMass("the hypothesis interval carries no fiducial mass")
    if not z_out > 0.0:
        raise ZeroMass("the outside region carries no fiducial mass")

    peak = float(_log_mean_evidence(summary, summary.xbar))

    def scaled_evidence(mu):
        return np.exp(_log_mean_evidence(summary, mu) - peak)

    a = integrate(lambda m: float(scaled_evidence(m) * fam.pdf(m)), lo, hi, quadrature)
    left = integrate(
        lambda m: float(scaled_evidence(m) * fam.pdf(m)), -math.inf, lo, quadrature
    )
    right = integrate(
        lambda m: float(scaled_evidence(m) * fam.pdf(m)), hi, math.inf, quadrature
    )
    m_out = (left + right) / z_out
    inside_flat = truncated_family_handle(fam, [(lo, hi)])

    if isinstance(gpd, FlatGpd):
        p_in = post_data_probability(p0, a / z0, m_out)
        return PostDataResult(p_in, inside_flat, outside, smoothing_level=level)
    if not isinstance(gpd, SmoothedGpd):
        raise ValidationError(f"unknown weighting spec {gpd!r}")

    bump = gpd.bump
    zh = integrate(
        lambda m: float(bump.density(m, lo, hi) * fam.pdf(m)), lo, hi, quadrature
    )
    b = integrate(
        lambda m: float(scaled_evidence(m) * bump.density(m, lo, hi) * fam.pdf(m)),
        lo,
        hi,
        quadrature,
    )
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

    def weighted(x):
        return (1.0 + tau * bump.density(x, lo, hi)) * fam.pdf(x)

    density_in = grid_density_handle(weighted, lo, hi, quadrature=quadrature)
    return PostDataResult(
        p_in, density_in, outside, tau_used=tau, smoothing_level=level
    )


def marginal_post_density(
    summary: NormalSummary,
    hypothesis: IntervalHypothesis,
    gpd: GpdSpec = FLAT,
    quadrature: QuadratureSpec = DEFAULT_QUADRATURE,
) -> DensityHandle:
    """Full post-data law of the mean: the two-component mixture in one handle."""
    return analyze(summary, hypothesis, gpd, quadrature).mixture()


@dataclass(frozen=True)
class JointPostDensity:
    """Post-data law of (mean, variance): smoothed marginal times conditional.

    The continuous part of the density is ``marginal.pdf(mu) *
    f(sigma2 | mu)``; a sharp hypothesis contributes an atom line whose
    variance section is the conditional at the hypothesized mean.
    """

    summary: NormalSummary
    marginal: DensityHandle

    def pdf(self, mu, sigma2):
        mu = np.asarray(mu, float)
        s = self.summary
        half_n = s.n / 2.0
        aa = s.sum_of_squares(mu)
        sigma2 = np.asarray(sigma2, float)
        with np.errstate(divide="ignore", invalid="ignore", over="ignore"):
            log_cond = (
                half_n * np.log(aa / 2.0)
                - sp.gammaln(half_n)
                - (half_n + 1.0) * np.log(sigma2)
                - aa / (2.0 * sigma2)
            )
        cond = np.where(sigma2 > 0.0, np.exp(log_cond), 0.0)
        return self.marginal.pdf(mu) * cond

    def draw(self, n_draws: int, rng: RngStream) -> tuple[np.ndarray, np.ndarray]:
        """Mean from the mixture marginal, then variance from its conditional."""
        mu = np.atleast_1d(self.marginal.draw(rng.child(0), int(n_draws)))
        u = np.atleast_1d(rng.child(1).uniform(int(n_draws)))
        half_a = self.summary.sum_of_squares(mu) / 2.0
        sigma2 = half_a / sp.gammainccinv(self.summary.n / 2.0, u)
        return mu, sigma2

    def sigma_pdf(self, sigma) -> np.ndarray:
        """Marginal density of the standard deviation, mean integrated out.

        Trapezoid over a mean grid spanning every support piece of the
        marginal plus its atoms; dominates quadrature error far below the
        plotting tolerances this serves.
        """
        sigma = np.atleast_1d(np.asarray(sigma, float))
        if np.any(sigma <= 0.0):
            raise ValidationError("sigma grid must be positive")
        s = self.summary
        half_n = s.n / 2.0
        out = np.zeros(sigma.shape)

        def section(mu_vals):
            aa = s.sum_of_squares(mu_vals)[:, None]
            sig2 = (sigma**2)[None, :]
            log_cond = (
                half_n * np.log(aa / 2.0)
                - sp.gammaln(half_n)
                - (half_n + 1.0) * np.log(sig2)
                - aa / sig2 / 2.0
            )
            return 2.0 * sigma[None, :] * np.exp(log_cond)

        span = 14.0 * s.std_error
        for piece_lo, piece_hi in self.marginal.support:
            g_lo = max(piece_lo, s.xbar - span)
            g_hi = min(piece_hi, s.xbar + span)
            if not g_hi > g_lo:
                continue
            grid = np.linspace(g_lo, g_hi, 1501)
            dens = self.marginal.pdf(grid)
            out += np.trapezoid(dens[:, None] * section(grid), grid, axis=0)
        for point, mass in self.marginal.atoms:
            out += mass * section(np.asarray([point]))[0]
        return out


def joint_post_density(
    summary: NormalSummary,
    hypothesis: IntervalHypothesis,
    gpd: GpdSpec = FLAT,
    quadrature: QuadratureSpec = DEFAULT_QUADRATURE,
) -> JointPostDensity:
    """Joint post-data law of (mean, variance) for the given hypothesis."""
    marginal = marginal_post_density(summary, hypothesis, gpd, quadrature)
    return JointPostDensity(summary, marginal)

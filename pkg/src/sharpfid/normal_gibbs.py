"""Joint post-data law of a normal mean and deviation by Gibbs sampling.

The two full conditionals are the known-variance mean analysis at the current
deviation (so the hypothesis weighting is re-solved conditionally, every
sweep) and an inverse-gamma law for the variance given the mean.  These
conditionals are not guaranteed to cohere into one joint law; the machinery
here runs the chain under a chosen scanning order and ships diagnostics that
measure how much the order matters and how far the chain sits from its own
conditionals.

Every random draw is a single inverse transform of one uniform, so a chain is
a pure function of its seed.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy import special as sp

from . import normal_known
from .core import (
    FLAT,
    DensityHandle,
    FlatGpd,
    GpdSpec,
    IntervalHypothesis,
    SmoothedGpd,
    post_data_probability,
    post_data_probability_log,
    truncated_family_handle,
)
from .errors import (
    DegenerateChains,
    InsufficientSlicePopulation,
    NoRoot,
    ValidationError,
)
from .normal_direct import NormalSummary
from .normal_known import NormalKnownSummary
from .numerics import (
    DEFAULT_QUADRATURE,
    InverseGammaFamily,
    NormalFamily,
    QuadratureSpec,
    RngStream,
    gelman_rubin,
    ks_statistic,
)

__all__ = [
    "FixedScan",
    "UniformRandomScan",
    "ScanOrder",
    "MU_THEN_SIGMA",
    "SIGMA_THEN_MU",
    "ChainOutput",
    "conditional_sigma2",
    "conditional_mu",
    "gibbs_run",
    "scan_order_diagnostic",
    "conditional_discrepancy",
    "gelman_rubin_study",
    "ScanOrderReport",
    "SliceDiagnostic",
    "ConditionalDiscrepancyReport",
    "GelmanRubinStudy",
]

DEFAULT_SAMPLES = 500_000
DEFAULT_BURN_IN = 1000

_MU, _SIGMA = 0, 1


@dataclass(frozen=True)
class FixedScan:
    """Deterministic sweep: every conditional once, in the given order.

    The state is recorded only after the whole sweep; intermediate values are
    not part of the output.
    """

    order: tuple[int, ...] = (_MU, _SIGMA)

    def __post_init__(self):
        if sorted(self.order) != [_MU, _SIGMA]:
            raise ValidationError(
                f"scan order must be a permutation of (0, 1), got {self.order}"
            )


@dataclass(frozen=True)
class UniformRandomScan:
    """One transition updates a single conditional picked uniformly at random."""


ScanOrder = FixedScan | UniformRandomScan

MU_THEN_SIGMA = FixedScan((_MU, _SIGMA))
SIGMA_THEN_MU = FixedScan((_SIGMA, _MU))


@dataclass(frozen=True, eq=False)
class ChainOutput:
    """Post-burn-in Gibbs states, one (mean, deviation) pair per transition."""

    mu: np.ndarray
    sigma: np.ndarray
    burn_in: int
    scan: ScanOrder
    seed: int

    def __post_init__(self):
        if self.mu.shape != self.sigma.shape or self.mu.ndim != 1:
            raise ValidationError("chain columns must be matching 1-D arrays")

    def __len__(self) -> int:
        return self.mu.size

    @property
    def samples(self) -> np.ndarray:
        return np.column_stack((self.mu, self.sigma))

    def interval_mass(self, lo: float, hi: float) -> float:
        """Fraction of recorded means inside [lo, hi]."""
        if len(self) == 0:
            raise ValidationError("empty chain has no interval mass")
        return float(np.mean((self.mu >= lo) & (self.mu <= hi)))


def conditional_sigma2(mu: float, summary: NormalSummary) -> DensityHandle:
    """Full conditional law of the variance given the mean."""
    fam = InverseGammaFamily(summary.n / 2.0, float(summary.sum_of_squares(mu)) / 2.0)
    return truncated_family_handle(fam, [(0.0, math.inf)])


def conditional_mu(
    sigma: float,
    summary: NormalSummary,
    hypothesis: IntervalHypothesis | None = None,
    gpd: GpdSpec = FLAT,
    quadrature: QuadratureSpec = DEFAULT_QUADRATURE,
) -> DensityHandle:
    """Full conditional law of the mean given the deviation.

    With a hypothesis this is the known-variance post-data mixture at this
    ``sigma``; without one it is the plain fiducial normal.  When the
    conditional continuity weight has no root (possible for extreme
    deviations), the weighting falls back to flat for that deviation.
    """
    if not sigma > 0.0:
        raise ValidationError(f"sigma must be positive, got {sigma}")
    if hypothesis is None:
        fam = NormalFamily(summary.xbar, sigma / math.sqrt(summary.n))
        return truncated_family_handle(fam, [(-math.inf, math.inf)])
    known = NormalKnownSummary(summary.n, summary.xbar, float(sigma))
    try:
        return normal_known.analyze(known, hypothesis, gpd, quadrature).mixture()
    except NoRoot:
        return normal_known.analyze(known, hypothesis, FLAT, quadrature).mixture()


class _MuUpdater:
    """Single-uniform inverse-transform draw of the mean given the deviation.

    Closed normal forms give the component masses and evidences; the bump
    moments come from a fixed Gauss-Legendre rule and the continuity weight
    from the exact quadratic it satisfies, so one update costs microseconds
    instead of an adaptive-quadrature solve.
    """

    _GRID = 193

    def __init__(
        self,
        summary: NormalSummary,
        hypothesis: IntervalHypothesis | None,
        gpd: GpdSpec,
    ):
        self.xbar = summary.xbar
        self.sqrt_n = math.sqrt(summary.n)
        self.hyp = hypothesis
        if hypothesis is None:
            return
        self.lo, self.hi = hypothesis.lo, hypothesis.hi
        self.p0 = hypothesis.prior_prob
        self.smoothed = isinstance(gpd, SmoothedGpd) and not hypothesis.is_sharp
        if isinstance(gpd, SmoothedGpd) and gpd.tau is not None:
            raise ValidationError(
                "conditional smoothing solves tau per deviation; leave tau unset"
            )
        if not isinstance(gpd, (FlatGpd, SmoothedGpd)):
            raise ValidationError(f"unknown weighting spec {gpd!r}")
        if self.smoothed:
            nodes, weights = np.polynomial.legendre.leggauss(64)
            half = 0.5 * (self.hi - self.lo)
            self.gl_x = self.lo + half * (nodes + 1.0)
            self.gl_wh = half * weights * gpd.bump.density(self.gl_x, self.lo, self.hi)
            self.grid_x = np.linspace(self.lo, self.hi, self._GRID)
            self.grid_h = gpd.bump.density(self.grid_x, self.lo, self.hi)

    @staticmethod
    def _phi(z):
        return 0.5 * math.erfc(-z / math.sqrt(2.0))

    def _solve_tau(self, z0, zh, a_ev, b_ev, z_out, m_out):
        # continuity of the mixture at the endpoints:
        #   p0 (a + tau b) z_out = (1 - p0) m_out (z0 + tau zh)^2
        # only a nonnegative weight is admissible; no such root means this
        # deviation falls back to flat, matching conditional_mu
        big_c = (1.0 - self.p0) * m_out
        p = self.p0 * z_out
        c2 = big_c * zh * zh
        c1 = 2.0 * big_c * z0 * zh - p * b_ev
        c0 = big_c * z0 * z0 - p * a_ev
        if c2 <= 0.0:
            root = -c0 / c1 if c1 != 0.0 else 0.0
            return root if root > 0.0 else 0.0
        disc = c1 * c1 - 4.0 * c2 * c0
        if disc < 0.0:
            return 0.0
        hi_root = (-c1 + math.sqrt(disc)) / (2.0 * c2)
        return hi_root if hi_root > 0.0 else 0.0

    def draw(self, sigma: float, u: float) -> float:
        se = sigma / self.sqrt_n
        if self.hyp is None:
            return self.xbar + se * float(sp.ndtri(u))
        if self.hyp.is_sharp:
            z = (self.xbar - self.lo) / se
            p_in = post_data_probability_log(
                self.p0, -0.5 * z * z, -0.5 * math.log(2.0)
            )
            if u < p_in:
                return self.lo
            v = (u - p_in) / (1.0 - p_in)
            return self.xbar + se * float(sp.ndtri(v))

        al = self._phi((self.lo - self.xbar) / se)
        ah = self._phi((self.hi - self.xbar) / se)
        z0 = ah - al
        z_out = 1.0 - z0
        se_h = se / math.sqrt(2.0)
        bl = self._phi((self.lo - self.xbar) / se_h)
        bh = self._phi((self.hi - self.xbar) / se_h)
        full = 1.0 / (2.0 * se * math.sqrt(math.pi))
        a_ev = full * (bh - bl)
        m_out = full * (1.0 - (bh - bl)) / z_out

        tau = 0.0
        zh = b_ev = 0.0
        if self.smoothed and z0 > 0.0:
            d = (self.gl_x - self.xbar) / se
            pdf = np.exp(-0.5 * d * d) / (se * math.sqrt(2.0 * math.pi))
            dh = (self.gl_x - self.xbar) / se_h
            pdf_h = np.exp(-0.5 * dh * dh) / (se_h * math.sqrt(2.0 * math.pi))
            zh = float(self.gl_wh @ pdf)
            b_ev = full * float(self.gl_wh @ pdf_h)
            tau = self._solve_tau(z0, zh, a_ev, b_ev, z_out, m_out)

        m_in = (a_ev + tau * b_ev) / (z0 + tau * zh) if z0 > 0.0 else 0.0
        p_in = post_data_probability(self.p0, m_in, m_out)

        left = (1.0 - p_in) * al / z_out
        if u < left:
            q = (u / left) * al
            return self.xbar + se * float(sp.ndtri(q))
        if u < left + p_in:
            v = (u - left) / p_in
            if not self.smoothed or tau == 0.0:
                return self.xbar + se * float(sp.ndtri(al + v * z0))
            d = (self.grid_x - self.xbar) / se
            w = (1.0 + tau * self.grid_h) * np.exp(-0.5 * d * d)
            cum = np.concatenate(([0.0], np.cumsum((w[1:] + w[:-1]))))
            cum /= cum[-1]
            k = int(np.searchsorted(cum, v, side="right")) - 1
            k = min(max(k, 0), cum.size - 2)
            frac = (v - cum[k]) / (cum[k + 1] - cum[k])
            return float(self.grid_x[k] + frac * (self.grid_x[k + 1] - self.grid_x[k]))
        v = (u - left - p_in) / max(1.0 - left - p_in, 1e-300)
        q = ah + v * (1.0 - ah)
        return self.xbar + se * float(sp.ndtri(min(q, 1.0 - 1e-16)))


def _sigma2_draw(summary: NormalSummary, mu: float, u: float) -> float:
    half_a = float(summary.sum_of_squares(mu)) / 2.0
    return half_a / float(sp.gammainccinv(summary.n / 2.0, u))


def gibbs_run(
    summary: NormalSummary,
    hypothesis: IntervalHypothesis | None = None,
    gpd: GpdSpec = FLAT,
    scan: ScanOrder = MU_THEN_SIGMA,
    n_samples: int = DEFAULT_SAMPLES,
    burn_in: int = DEFAULT_BURN_IN,
    rng: RngStream | None = None,
    start: tuple[float, float] | None = None,
) -> ChainOutput:
    """Run one Gibbs chain and return its post-burn-in states.

    A fixed scan applies every conditional per transition and records the
    state once the sweep completes; the uniform random scan applies a single
    randomly chosen conditional per transition.  ``start`` defaults to the
    observed ``(xbar, s)``.
    """
    if n_samples < 0 or burn_in < 0:
        raise ValidationError("sample and burn-in counts must be nonnegative")
    if rng is None:
        rng = RngStream(0)
    mu, sigma = start if start is not None else (summary.xbar, summary.s)
    if not sigma > 0.0:
        raise ValidationError("starting deviation must be positive")
    mu, sigma = float(mu), float(sigma)

    updater = _MuUpdater(summary, hypothesis, gpd)
    total = burn_in + n_samples
    out_mu = np.empty(n_samples)
    out_sigma = np.empty(n_samples)
    uniforms = rng.uniform((total, 2)) if total else np.empty((0, 2))

    if isinstance(scan, FixedScan):
        for t in range(total):
            u = uniforms[t]
            for j, idx in enumerate(scan.order):
                if idx == _MU:
                    mu = updater.draw(sigma, u[j])
                else:
                    sigma = math.sqrt(_sigma2_draw(summary, mu, u[j]))
            if t >= burn_in:
                out_mu[t - burn_in] = mu
                out_sigma[t - burn_in] = sigma
    elif isinstance(scan, UniformRandomScan):
        for t in range(total):
            coin, u = uniforms[t]
            if coin < 0.5:
                mu = updater.draw(sigma, u)
            else:
                sigma = math.sqrt(_sigma2_draw(summary, mu, u))
            if t >= burn_in:
                out_mu[t - burn_in] = mu
                out_sigma[t - burn_in] = sigma
    else:
        raise ValidationError(f"unknown scan order {scan!r}")

    return ChainOutput(out_mu, out_sigma, burn_in, scan, rng.seed)


@dataclass(frozen=True)
class ScanOrderReport:
    """Mean-deviation correlations under the two fixed sweep orders.

    ``correlations`` holds the per-replicate Pearson correlations, one tuple
    per order; the test statistic is a two-sample comparison of their Fisher
    transforms with replicate scatter as the noise estimate.
    """

    orders: tuple[FixedScan, FixedScan]
    correlations: tuple[tuple[float, ...], tuple[float, ...]]
    mean_correlation: tuple[float, float]
    difference: float
    t_stat: float
    dof: float
    p_value: float

    def significant(self, alpha: float = 0.01) -> bool:
        return self.p_value < alpha


def scan_order_diagnostic(
    summary: NormalSummary,
    hypothesis: IntervalHypothesis | None,
    gpd: GpdSpec = FLAT,
    n_samples: int = DEFAULT_SAMPLES,
    rng: RngStream | None = None,
    replicates: int = 4,
    burn_in: int = DEFAULT_BURN_IN,
) -> ScanOrderReport:
    """Compare the two fixed sweep orders through replicate chain correlations.

    Incompatible conditionals leave a fingerprint: the limiting law, and with
    it the mean-deviation correlation, depends on the order in which the
    conditionals fire.
    """
    if n_samples < 4:
        raise ValidationError("need at least four samples per chain")
    if replicates < 2:
        raise ValidationError("need at least two replicates per order")
    if rng is None:
        rng = RngStream(0)
    orders = (MU_THEN_SIGMA, SIGMA_THEN_MU)
    corrs = []
    for oi, order in enumerate(orders):
        row = []
        for r in range(replicates):
            chain = gibbs_run(
                summary,
                hypothesis,
                gpd,
                scan=order,
                n_samples=n_samples,
                burn_in=burn_in,
                rng=rng.child(oi).child(r),
            )
            row.append(float(np.corrcoef(chain.mu, chain.sigma)[0, 1]))
        corrs.append(tuple(row))
    z = [np.arctanh(np.asarray(row)) for row in corrs]
    v = [float(np.var(zi, ddof=1)) / replicates for zi in z]
    diff_z = float(z[0].mean() - z[1].mean())
    denom = math.sqrt(v[0] + v[1])
    if denom > 0.0:
        t_stat = diff_z / denom
    elif diff_z == 0.0:
        t_stat = 0.0
    else:
        t_stat = math.copysign(math.inf, diff_z)
    if v[0] > 0.0 or v[1] > 0.0:
        dof = (v[0] + v[1]) ** 2 / (
            (v[0] ** 2 + v[1] ** 2) / max(replicates - 1, 1)
        )
    else:
        dof = float(2 * (replicates - 1))
    p = 2.0 * float(sp.stdtr(dof, -abs(t_stat))) if math.isfinite(t_stat) else 0.0
    means = tuple(float(np.mean(row)) for row in corrs)
    return ScanOrderReport(
        orders=orders,
        correlations=tuple(tuple(row) for row in corrs),
        mean_correlation=means,
        difference=means[0] - means[1],
        t_stat=t_stat,
        dof=dof,
        p_value=p,
    )


@dataclass(frozen=True)
class SliceDiagnostic:
    lo: float
    hi: float
    count: int
    sigma_ref: float
    ks_distance: float


@dataclass(frozen=True)
class ConditionalDiscrepancyReport:
    """Per-deviation-slice distance between the chain and its own conditional."""

    slices: tuple[SliceDiagnostic, ...]

    @property
    def max_ks(self) -> float:
        return max(s.ks_distance for s in self.slices)


def conditional_discrepancy(
    chain: ChainOutput,
    summary: NormalSummary,
    hypothesis: IntervalHypothesis | None = None,
    gpd: GpdSpec = FLAT,
    sigma_slices: int | np.ndarray = 8,
    min_count: int = 500,
) -> ConditionalDiscrepancyReport:
    """How well the chain's mean draws follow the conditional at each deviation.

    The deviation axis is cut into slices (quantile-spaced when an integer is
    given) and the empirical law of the means in each slice is compared, by
    KS distance, to the exact conditional at the slice midpoint.  Purely
    diagnostic: incompatible conditionals show drifting distances, compatible
    ones stay at sampling-noise level.  In wide slices, the tails especially,
    the midpoint stops being representative and inflates the distance; read
    those entries qualitatively or pass narrower explicit edges.
    """
    if len(chain) == 0:
        raise ValidationError("cannot diagnose an empty chain")
    if isinstance(sigma_slices, (int, np.integer)):
        if sigma_slices < 1:
            raise ValidationError("need at least one slice")
        qs = np.linspace(0.0, 1.0, int(sigma_slices) + 1)
        edges = np.quantile(chain.sigma, qs)
    else:
        edges = np.sort(np.asarray(sigma_slices, float))
        if edges.size < 2:
            raise ValidationError("slice edges must contain at least one interval")
    rows = []
    for k in range(edges.size - 1):
        lo, hi = float(edges[k]), float(edges[k + 1])
        mask = (chain.sigma >= lo) & (
            (chain.sigma <= hi) if k == edges.size - 2 else (chain.sigma < hi)
        )
        count = int(mask.sum())
        if count < min_count:
            raise InsufficientSlicePopulation(
                f"slice [{lo:.4g}, {hi:.4g}] holds {count} < {min_count} points"
            )
        mid = 0.5 * (lo + hi)
        handle = conditional_mu(mid, summary, hypothesis, gpd)
        ks = ks_statistic(handle.cdf, chain.mu[mask])
        rows.append(SliceDiagnostic(lo, hi, count, mid, ks))
    return ConditionalDiscrepancyReport(tuple(rows))


@dataclass(frozen=True)
class GelmanRubinStudy:
    r_hat_mu: float
    r_hat_sigma: float
    n_chains: int
    n_samples: int


def gelman_rubin_study(
    summary: NormalSummary,
    hypothesis: IntervalHypothesis | None = None,
    gpd: GpdSpec = FLAT,
    n_chains: int = 4,
    n_samples: int = 100_000,
    burn_in: int = DEFAULT_BURN_IN,
    rng: RngStream | None = None,
    starts: tuple[tuple[float, float], ...] | None = None,
    rngs: tuple[RngStream, ...] | None = None,
) -> GelmanRubinStudy:
    """Potential scale reduction from chains launched at overdispersed starts.

    Chains reusing a seed are rejected rather than averaged into a
    misleadingly perfect factor.
    """
    if n_chains < 2:
        raise ValidationError("need at least two chains")
    if rng is None:
        rng = RngStream(0)
    if starts is None:
        se = summary.std_error
        mu_offsets = [-4.0, 4.0, -2.0, 2.0, -1.0, 1.0]
        sig_factors = [0.25, 4.0, 0.5, 2.0, 0.75, 1.5]
        starts = tuple(
            (
                summary.xbar + mu_offsets[i % len(mu_offsets)] * se,
                summary.s * sig_factors[i % len(sig_factors)],
            )
            for i in range(n_chains)
        )
    if len(starts) != n_chains:
        raise ValidationError("one start per chain required")
    if rngs is None:
        rngs = tuple(rng.child(i) for i in range(n_chains))
    if len(rngs) != n_chains:
        raise ValidationError("one stream per chain required")
    chains = [
        gibbs_run(
            summary,
            hypothesis,
            gpd,
            n_samples=n_samples,
            burn_in=burn_in,
            rng=rngs[i],
            start=starts[i],
        )
        for i in range(n_chains)
    ]
    for i in range(n_chains):
        for j in range(i + 1, n_chains):
            if np.array_equal(chains[i].mu, chains[j].mu):
                raise DegenerateChains(
                    f"chains {i} and {j} are identical; check their seeds"
                )
    mu_mat = np.stack([c.mu for c in chains])
    sig_mat = np.stack([c.sigma for c in chains])
    return GelmanRubinStudy(
        gelman_rubin(mu_mat), gelman_rubin(sig_mat), n_chains, n_samples
    )

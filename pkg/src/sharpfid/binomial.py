"""Post-data analysis of a binomial proportion by fiducial importance sampling.

The primary random variable is the step-function quantile of the binomial
law.  Fixing the observed count turns each uniform level into an interval of
proportions (the preimage), and the fiducial density of the proportion is the
level-average of a beta density truncated to that interval.  Sampling is a
two-uniform inverse transform: one uniform picks the level, the other picks
the proportion inside the preimage.  Post-data quantities then come from
self-normalized importance estimates with the binomial mass function at the
observed count as evidence factor.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy import special as sp

from .core import (
    FLAT,
    FlatGpd,
    GpdSpec,
    IntervalHypothesis,
    PostDataResult,
    SmoothedGpd,
    WeightedSample,
    post_data_probability,
    weighted_sample_handle,
)
from .errors import ValidationError, ZeroMass, ZeroRegionMass
from .numerics import RngStream, TauModel, ess as _ess, solve_tau

__all__ = [
    "BinomialCount",
    "PreimageInterval",
    "step_cdf",
    "phi_binomial",
    "preimage_interval",
    "sample_fS",
    "analyze",
]

DEFAULT_SAMPLES = 2_000_000


@dataclass(frozen=True)
class BinomialCount:
    """Observed successes out of a fixed number of trials."""

    x: int
    n: int

    def __post_init__(self):
        if self.n < 1:
            raise ValidationError(f"need at least one trial, got {self.n}")
        if not 0 <= self.x <= self.n:
            raise ValidationError(f"count {self.x} outside 0..{self.n}")


@dataclass(frozen=True)
class PreimageInterval:
    """Proportions mapped to one observed count at a fixed uniform level."""

    gamma: float
    lo: float
    hi: float

    def __post_init__(self):
        if not 0.0 < self.gamma < 1.0:
            raise ValidationError(f"level {self.gamma} outside (0, 1)")
        if not 0.0 <= self.lo < self.hi <= 1.0:
            raise ValidationError(f"degenerate preimage ({self.lo}, {self.hi})")


def step_cdf(y: int, pi, n: int):
    """Binomial distribution function in regularized incomplete beta form.

    Vectorized over ``pi``; ``y`` below 0 gives 0 and ``y`` of ``n`` or more
    gives 1.
    """
    pi = np.asarray(pi, float)
    if y < 0:
        return np.zeros_like(pi) if pi.ndim else 0.0
    if y >= n:
        return np.ones_like(pi) if pi.ndim else 1.0
    out = sp.betainc(n - y, y + 1, 1.0 - pi)
    return float(out) if pi.ndim == 0 else out


def phi_binomial(gamma: float, pi: float, n: int) -> int:
    """Smallest count whose distribution function exceeds the level ``gamma``.

    This is the step-function quantile driving the data generating algorithm.
    """
    gamma = float(gamma)
    pi = float(pi)
    if not 0.0 < gamma < 1.0:
        raise ValidationError(f"level {gamma} outside (0, 1)")
    if not 0.0 <= pi <= 1.0:
        raise ValidationError(f"proportion {pi} outside [0, 1]")
    if n < 1:
        raise ValidationError("need at least one trial")
    lo, hi = 0, n
    while lo < hi:
        mid = (lo + hi) // 2
        if step_cdf(mid, pi, n) > gamma:
            hi = mid
        else:
            lo = mid + 1
    return lo


def _preimage_lo(gamma, x: int, n: int):
    # root in pi of F(x-1; pi) = gamma; F is decreasing in pi
    if x == 0:
        return np.zeros_like(np.asarray(gamma, float))
    return 1.0 - sp.betaincinv(n - x + 1, x, np.asarray(gamma, float))


def _preimage_hi(gamma, x: int, n: int):
    # root in pi of F(x; pi) = gamma
    if x == n:
        return np.ones_like(np.asarray(gamma, float))
    return 1.0 - sp.betaincinv(n - x, x + 1, np.asarray(gamma, float))


def preimage_interval(gamma: float, x: int, n: int) -> PreimageInterval:
    """Interval of proportions whose quantile at level ``gamma`` is exactly ``x``.

    The endpoints solve ``F(x-1; lo) = gamma`` and ``F(x; hi) = gamma``; at
    the boundary counts they pin to 0 and 1.  Consecutive counts tile (0, 1):
    the upper endpoint for ``x`` equals the lower endpoint for ``x + 1``.
    """
    count = BinomialCount(x, n)
    if not 0.0 < gamma < 1.0:
        raise ValidationError(f"level {gamma} outside (0, 1)")
    lo = float(_preimage_lo(gamma, count.x, count.n))
    hi = float(_preimage_hi(gamma, count.x, count.n))
    return PreimageInterval(gamma, lo, hi)


def sample_fS(count: BinomialCount, n_samples: int, rng: RngStream) -> WeightedSample:
    """Independent draws from the fiducial law of the proportion.

    Each draw takes one uniform level, forms its preimage interval, and
    inverts the beta law truncated to that interval with a second uniform.
    Unit weights: the sample is unweighted by construction.
    """
    if n_samples < 1:
        raise ValidationError("need at least one draw")
    a, b = count.x + 1.0, count.n - count.x + 1.0
    gam = np.atleast_1d(rng.uniform(int(n_samples)))
    u = np.atleast_1d(rng.uniform(int(n_samples)))
    lo = _preimage_lo(gam, count.x, count.n)
    hi = _preimage_hi(gam, count.x, count.n)
    i_lo = sp.betainc(a, b, lo)
    i_hi = sp.betainc(a, b, hi)
    width = i_hi - i_lo
    if np.any(width <= 0.0):
        # every preimage carries positive beta mass; a zero here is a numerics bug
        raise ZeroRegionMass("a preimage interval lost all beta mass")
    pi = sp.betaincinv(a, b, i_lo + u * width)
    np.clip(pi, lo, hi, out=pi)
    return WeightedSample(pi, np.ones(pi.size))


def _log_pmf(x: int, n: int, pi: np.ndarray) -> np.ndarray:
    log_coeff = sp.gammaln(n + 1.0) - sp.gammaln(x + 1.0) - sp.gammaln(n - x + 1.0)
    with np.errstate(divide="ignore", invalid="ignore"):
        out = log_coeff + x * np.log(pi) + (n - x) * np.log1p(-pi)
    if x == 0:
        out = np.where(pi == 0.0, log_coeff, out)
    if x == n:
        out = np.where(pi == 1.0, log_coeff, out)
    return out


def analyze(
    count: BinomialCount,
    hypothesis: IntervalHypothesis,
    gpd: GpdSpec = FLAT,
    n_samples: int = DEFAULT_SAMPLES,
    rng: RngStream | None = None,
    n_blocks: int = 32,
) -> PostDataResult:
    """Post-data probability and component densities for the proportion.

    Self-normalized importance estimates over one fiducial sample: the
    evidence of each component is the binomial mass at the observed count
    averaged over the component's (optionally bump-reweighted) draws.  The
    reported standard error splits the sample into contiguous blocks, and the
    effective sample size refers to the inside-component evidence weights,
    the accuracy bottleneck.
    """
    if hypothesis.is_sharp:
        raise ValidationError(
            "a point hypothesis carries no fiducial mass here; use a short interval"
        )
    if not (0.0 < hypothesis.lo and hypothesis.hi < 1.0):
        raise ValidationError("the hypothesis interval must sit strictly inside (0, 1)")
    if rng is None:
        rng = RngStream(0)
    lo, hi = hypothesis.lo, hypothesis.hi
    p0 = hypothesis.prior_prob

    sample = sample_fS(count, n_samples, rng)
    pi = sample.values
    inside = (pi >= lo) & (pi <= hi)
    if not np.any(inside):
        raise ZeroMass(
            "no fiducial draws landed inside the interval; increase n_samples"
        )
    lik = np.exp(_log_pmf(count.x, count.n, pi))

    if isinstance(gpd, SmoothedGpd):
        h = gpd.bump.density(pi, lo, hi)
    elif isinstance(gpd, FlatGpd):
        h = None
    else:
        raise ValidationError(f"unknown weighting spec {gpd!r}")

    def moments(sl: slice):
        ins = inside[sl]
        lk = lik[sl]
        z0 = float(ins.mean())
        a_m = float(np.mean(lk * ins))
        z_out = 1.0 - z0
        if z_out <= 0.0:
            raise ZeroMass("no fiducial draws outside the interval")
        m_out = float(np.mean(lk * ~ins)) / z_out
        if h is None:
            zh = b_m = 0.0
        else:
            hs = h[sl]
            zh = float(np.mean(hs * ins))
            b_m = float(np.mean(lk * hs * ins))
        return z0, zh, a_m, b_m, z_out, m_out

    z0, zh, a_m, b_m, z_out, m_out = moments(slice(None))

    tau = None
    if isinstance(gpd, SmoothedGpd):
        if gpd.tau is not None:
            tau = float(gpd.tau)
        else:
            model = TauModel(
                prior_prob=p0,
                evidence_out=m_out,
                mass_out=z_out,
                mass_in=lambda t: z0 + t * zh,
                evidence_in=lambda t: (a_m + t * b_m) / (z0 + t * zh),
            )
            tau = solve_tau(model).tau
    t_eff = 0.0 if tau is None else tau

    m_in = (a_m + t_eff * b_m) / (z0 + t_eff * zh)
    p_in = post_data_probability(p0, m_in, m_out)

    # block-resampled standard error of p_in at the solved weight
    block = n_samples // n_blocks
    block_ps = []
    if block >= 1:
        for k in range(n_blocks):
            sl = slice(k * block, (k + 1) * block)
            if not np.any(inside[sl]) or np.all(inside[sl]):
                continue
            bz0, bzh, ba, bb, bz_out, bm_out = moments(sl)
            bm_in = (ba + t_eff * bb) / (bz0 + t_eff * bzh)
            block_ps.append(post_data_probability(p0, bm_in, bm_out))
    mc_stderr = (
        float(np.std(block_ps, ddof=1) / math.sqrt(len(block_ps)))
        if len(block_ps) >= 2
        else None
    )

    w_inside = np.ones(int(inside.sum())) if h is None else 1.0 + t_eff * h[inside]
    density_in = weighted_sample_handle(pi[inside], w_inside, [(lo, hi)])
    density_out = weighted_sample_handle(
        pi[~inside], np.ones(int((~inside).sum())), [(0.0, lo), (hi, 1.0)]
    )
    ess_in = _ess(lik[inside] * w_inside)
    return PostDataResult(
        p_in,
        density_in,
        density_out,
        tau_used=tau,
        mc_stderr=mc_stderr,
        ess=ess_in,
    )

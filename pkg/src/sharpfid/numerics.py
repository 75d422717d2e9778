"""Numerical infrastructure: deterministic random streams, adaptive quadrature,
root bracketing, truncated scalar families, weighted-sample summaries, and the
continuity-matching solver for the smoothing weight.

Every sampler in the package draws standard uniforms from an explicit
:class:`RngStream` and pushes them through inverse distribution functions.
There is no rejection step anywhere, so a run is reproducible bit for bit from
(seed, stream id, draw order) alone.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable, Sequence

import numpy as np
from scipy import integrate as _quadpack
from scipy import special as sp

from .errors import (
    BadBracket,
    EmptySample,
    NonConvergence,
    NoRoot,
    ValidationError,
    ZeroRegionMass,
)

__all__ = [
    "RngStream",
    "QuadratureSpec",
    "DEFAULT_QUADRATURE",
    "integrate",
    "bisect",
    "NormalFamily",
    "StudentTFamily",
    "BetaFamily",
    "InverseGammaFamily",
    "region_masses",
    "truncated_ppf",
    "truncated_draw",
    "ess",
    "weighted_quantile",
    "freedman_diaconis_edges",
    "weighted_histogram",
    "ks_statistic",
    "gelman_rubin",
    "TauModel",
    "TauSolveReport",
    "continuity_gap",
    "solve_tau",
]

_TINY_MASS = 1e-300


class RngStream:
    """Deterministic uniform stream keyed by a seed and a stream id.

    Distinct stream ids give statistically independent streams for the same
    seed, which is how parallel chains and paired samplers stay uncorrelated
    without sharing state.

    Parameters
    ----------
    seed : int
        Session-level entropy, typically from the command line.
    stream_id : int, optional
        Substream selector, default 0.
    """

    def __init__(self, seed: int, stream_id: int = 0, _path: tuple[int, ...] = ()):
        self.seed = int(seed)
        self.stream_id = int(stream_id)
        self._path = tuple(int(k) for k in _path)
        key = (self.stream_id,) + self._path
        self._gen = np.random.Generator(
            np.random.PCG64(np.random.SeedSequence(entropy=self.seed, spawn_key=key))
        )

    def uniform(self, size: int | tuple[int, ...] | None = None):
        """Standard uniform draws; a Python float when ``size`` is None."""
        if size is None:
            return float(self._gen.random())
        return self._gen.random(size)

    def child(self, k: int) -> "RngStream":
        """Derived independent stream; ``child(k)`` is stable across runs."""
        return RngStream(self.seed, self.stream_id, self._path + (int(k),))

    def __repr__(self) -> str:  # pragma: no cover - cosmetic
        return f"RngStream(seed={self.seed}, stream_id={self.stream_id}, path={self._path})"


@dataclass(frozen=True)
class QuadratureSpec:
    """Tolerance budget for adaptive quadrature."""

    abs_tol: float = 1e-10
    rel_tol: float = 1e-8
    max_subdivisions: int = 2**14


DEFAULT_QUADRATURE = QuadratureSpec()


def integrate(
    fn: Callable[[float], float],
    lo: float,
    hi: float,
    spec: QuadratureSpec = DEFAULT_QUADRATURE,
) -> float:
    """Adaptive quadrature of ``fn`` over [lo, hi]; endpoints may be infinite.

    Raises
    ------
    NonConvergence
        If the integrator reports that the tolerance budget was not met.
    """
    out = _quadpack.quad(
        fn,
        lo,
        hi,
        epsabs=spec.abs_tol,
        epsrel=spec.rel_tol,
        limit=spec.max_subdivisions,
        full_output=1,
    )
    if len(out) > 3:
        raise NonConvergence(f"quadrature on [{lo}, {hi}]: {out[3]}")
    value = out[0]
    if not math.isfinite(value):
        raise NonConvergence(f"quadrature on [{lo}, {hi}] returned {value}")
    return value


def bisect(
    fn: Callable[[float], float],
    lo: float,
    hi: float,
    rel_tol: float = 1e-12,
    abs_tol: float = 0.0,
    max_iter: int = 256,
) -> float:
    """Root of ``fn`` by sign-change bisection on [lo, hi].

    The endpoints must bracket a sign change (an exact zero at an endpoint is
    returned as is).  Deterministic: no derivative estimates, no damping.
    """
    lo = float(lo)
    hi = float(hi)
    if not (math.isfinite(lo) and math.isfinite(hi)) or lo >= hi:
        raise ValidationError(f"bad bisection interval [{lo}, {hi}]")
    f_lo = fn(lo)
    f_hi = fn(hi)
    if f_lo == 0.0:
        return lo
    if f_hi == 0.0:
        return hi
    if math.copysign(1.0, f_lo) == math.copysign(1.0, f_hi):
        raise BadBracket(f"no sign change on [{lo}, {hi}]: f(lo)={f_lo}, f(hi)={f_hi}")
    for _ in range(max_iter):
        mid = 0.5 * (lo + hi)
        if hi - lo <= abs_tol + rel_tol * max(abs(lo), abs(hi)):
            return mid
        f_mid = fn(mid)
        if f_mid == 0.0:
            return mid
        if math.copysign(1.0, f_mid) == math.copysign(1.0, f_lo):
            lo, f_lo = mid, f_mid
        else:
            hi, f_hi = mid, f_mid
    raise NonConvergence(f"bisection did not reach tolerance after {max_iter} iterations")


# ---------------------------------------------------------------------------
# Scalar families with exact pdf/cdf/ppf, used by every truncated sampler.


@dataclass(frozen=True)
class NormalFamily:
    loc: float = 0.0
    scale: float = 1.0

    support = (-math.inf, math.inf)

    def __post_init__(self):
        if not (self.scale > 0.0 and math.isfinite(self.scale)):
            raise ValidationError(f"normal scale must be positive, got {self.scale}")

    def pdf(self, x):
        z = (np.asarray(x, float) - self.loc) / self.scale
        return np.exp(-0.5 * z * z) / (self.scale * math.sqrt(2.0 * math.pi))

    def cdf(self, x):
        return sp.ndtr((np.asarray(x, float) - self.loc) / self.scale)

    def ppf(self, p):
        return self.loc + self.scale * sp.ndtri(np.asarray(p, float))


@dataclass(frozen=True)
class StudentTFamily:
    df: float
    loc: float = 0.0
    scale: float = 1.0

    support = (-math.inf, math.inf)

    def __post_init__(self):
        if not (self.df > 0.0 and self.scale > 0.0):
            raise ValidationError("degrees of freedom and scale must be positive")

    def pdf(self, x):
        z = (np.asarray(x, float) - self.loc) / self.scale
        v = self.df
        log_norm = sp.gammaln(0.5 * (v + 1.0)) - sp.gammaln(0.5 * v) - 0.5 * math.log(v * math.pi)
        return np.exp(log_norm - 0.5 * (v + 1.0) * np.log1p(z * z / v)) / self.scale

    def cdf(self, x):
        z = (np.asarray(x, float) - self.loc) / self.scale
        return sp.stdtr(self.df, z)

    def ppf(self, p):
        return self.loc + self.scale * sp.stdtrit(self.df, np.asarray(p, float))


@dataclass(frozen=True)
class BetaFamily:
    a: float
    b: float

    support = (0.0, 1.0)

    def __post_init__(self):
        if not (self.a > 0.0 and self.b > 0.0):
            raise ValidationError("beta shape parameters must be positive")

    def pdf(self, x):
        x = np.asarray(x, float)
        with np.errstate(divide="ignore", invalid="ignore"):
            logpdf = (
                (self.a - 1.0) * np.log(x)
                + (self.b - 1.0) * np.log1p(-x)
                - sp.betaln(self.a, self.b)
            )
        out = np.where((x < 0.0) | (x > 1.0), -np.inf, logpdf)
        return np.exp(out)

    def cdf(self, x):
        return sp.betainc(self.a, self.b, np.clip(np.asarray(x, float), 0.0, 1.0))

    def ppf(self, p):
        return sp.betaincinv(self.a, self.b, np.asarray(p, float))


@dataclass(frozen=True)
class InverseGammaFamily:
    """Law of ``scale`` divided by a unit-rate gamma draw with shape ``shape``.

    Used for variance parameters: if the precision is gamma distributed, the
    variance follows this family.
    """

    shape: float
    scale: float

    support = (0.0, math.inf)

    def __post_init__(self):
        if not (self.shape > 0.0 and self.scale > 0.0):
            raise ValidationError("inverse gamma shape and scale must be positive")

    def pdf(self, x):
        x = np.asarray(x, float)
        with np.errstate(divide="ignore", invalid="ignore", over="ignore"):
            logpdf = (
                self.shape * math.log(self.scale)
                - sp.gammaln(self.shape)
                - (self.shape + 1.0) * np.log(x)
                - self.scale / x
            )
        return np.where(x > 0.0, np.exp(logpdf), 0.0)

    def cdf(self, x):
        x = np.asarray(x, float)
        with np.errstate(divide="ignore"):
            return np.where(x > 0.0, sp.gammaincc(self.shape, self.scale / x), 0.0)

    def ppf(self, p):
        return self.scale / sp.gammainccinv(self.shape, np.asarray(p, float))


def _as_regions(regions) -> list[tuple[float, float]]:
    out = []
    for lo, hi in regions:
        lo = float(lo)
        hi = float(hi)
        if math.isnan(lo) or math.isnan(hi) or lo > hi:
            raise ValidationError(f"bad truncation region ({lo}, {hi})")
        out.append((lo, hi))
    if not out:
        raise ValidationError("at least one truncation region is required")
    for (a_lo, a_hi), (b_lo, b_hi) in zip(out, out[1:]):
        if b_lo < a_hi:
            raise ValidationError("truncation regions must be disjoint and ascending")
    return out


def region_masses(family, regions) -> np.ndarray:
    """Probability mass the family assigns to each region."""
    regs = _as_regions(regions)
    masses = np.array(
        [max(float(family.cdf(hi) - family.cdf(lo)), 0.0) for lo, hi in regs]
    )
    return masses


def truncated_ppf(family, regions, u):
    """Inverse distribution function of ``family`` conditioned on the regions.

    Parameters
    ----------
    family : scalar family
        Must expose ``cdf`` and ``ppf``.
    regions : sequence of (lo, hi)
        Disjoint ascending intervals; the conditioning event is their union.
    u : array_like
        Probabilities in [0, 1].

    Raises
    ------
    ZeroRegionMass
        If the union carries essentially no mass under the family.
    """
    regs = _as_regions(regions)
    masses = region_masses(family, regs)
    total = float(masses.sum())
    if total < _TINY_MASS:
        raise ZeroRegionMass(
            f"truncation region mass {total:g} is below the usable floor"
        )
    u = np.asarray(u, float)
    scalar = u.ndim == 0
    target = np.atleast_1d(u) * total
    cum = np.concatenate(([0.0], np.cumsum(masses)))
    idx = np.clip(np.searchsorted(cum[1:], target, side="left"), 0, len(regs) - 1)
    lows = np.array([family.cdf(r[0]) for r in regs], float)
    p = lows[idx] + (target - cum[idx])
    x = family.ppf(np.clip(p, 0.0, 1.0))
    lo_arr = np.array([r[0] for r in regs])
    hi_arr = np.array([r[1] for r in regs])
    x = np.clip(x, lo_arr[idx], hi_arr[idx])
    return float(x[0]) if scalar else x


def truncated_draw(rng: RngStream, family, regions, size=None):
    """Inverse-transform draws from the family conditioned on the regions."""
    return truncated_ppf(family, regions, rng.uniform(size))


# ---------------------------------------------------------------------------
# Weighted-sample summaries.


def _checked_weights(weights) -> np.ndarray:
    w = np.asarray(weights, float)
    if w.size == 0:
        raise EmptySample("weight vector is empty")
    if not np.all(np.isfinite(w)):
        raise ValidationError("weights must be finite")
    if np.any(w < 0.0):
        raise ValidationError("weights must be nonnegative")
    if float(w.sum()) <= 0.0:
        raise EmptySample("weights sum to zero")
    return w


def ess(weights) -> float:
    """Kish effective sample size, (sum w)^2 / sum w^2."""
    w = _checked_weights(weights)
    s = float(w.sum())
    return s * s / float(np.dot(w, w))


def weighted_quantile(values, weights, q):
    """Quantiles of a weighted sample, inverse-step convention.

    Doubling a weight is exactly equivalent to duplicating its point.
    """
    v = np.asarray(values, float)
    w = _checked_weights(weights)
    if v.shape != w.shape:
        raise ValidationError("values and weights must have matching shapes")
    order = np.argsort(v, kind="stable")
    v = v[order]
    cum = np.cumsum(w[order])
    targets = np.asarray(q, float) * cum[-1]
    idx = np.clip(np.searchsorted(cum, targets, side="left"), 0, v.size - 1)
    return v[idx]


def freedman_diaconis_edges(values, weights=None, support=None, max_bins=4096):
    """Histogram bin edges by the Freedman-Diaconis rule on a weighted sample.

    The effective sample size replaces the raw count, so heavily weighted
    samples do not get spuriously narrow bins.  ``support`` pins the range
    when the underlying law lives on a known interval.
    """
    v = np.asarray(values, float)
    if v.size == 0:
        raise EmptySample("cannot bin an empty sample")
    w = np.ones_like(v) if weights is None else _checked_weights(weights)
    lo, hi = (float(v.min()), float(v.max())) if support is None else map(float, support)
    if not hi > lo:
        hi = lo + max(1e-12, abs(lo) * 1e-12)
    n_eff = ess(w)
    iqr = float(np.diff(weighted_quantile(v, w, [0.25, 0.75]))[0])
    width = 2.0 * iqr / n_eff ** (1.0 / 3.0)
    if width <= 0.0:
        n_bins = max(1, int(math.ceil(math.log2(n_eff) + 1.0)))
    else:
        n_bins = int(np.clip(math.ceil((hi - lo) / width), 1, max_bins))
    return np.linspace(lo, hi, n_bins + 1)


def weighted_histogram(values, weights=None, edges=None, support=None):
    """Normalized density histogram of a weighted sample.

    Returns
    -------
    edges : ndarray, shape (k + 1,)
    heights : ndarray, shape (k,)
        Piecewise-constant density integrating to one over the edges.
    """
    v = np.asarray(values, float)
    w = np.ones_like(v) if weights is None else _checked_weights(weights)
    if edges is None:
        edges = freedman_diaconis_edges(v, w, support=support)
    counts, edges = np.histogram(v, bins=edges, weights=w)
    total = float(counts.sum())
    if total <= 0.0:
        raise EmptySample("no weight falls inside the histogram range")
    heights = counts / (total * np.diff(edges))
    return edges, heights


def ks_statistic(cdf: Callable, values) -> float:
    """Kolmogorov-Smirnov distance between a sample and a distribution function."""
    v = np.sort(np.asarray(values, float))
    if v.size == 0:
        raise EmptySample("cannot compare an empty sample")
    f = np.asarray(cdf(v), float)
    grid = np.arange(1, v.size + 1) / v.size
    return float(np.max(np.maximum(np.abs(f - grid), np.abs(f - (grid - 1.0 / v.size)))))


def gelman_rubin(chains) -> float:
    """Split-chain potential scale reduction factor.

    Each chain is halved, the within-half variance ``W`` and between-half
    variance ``B`` are combined into the pooled estimate, and the factor is
    sqrt(V / W).  Identical constant chains return exactly 1.0; constant but
    unequal chains return +inf rather than failing.
    """
    arr = np.asarray(chains, float)
    if arr.ndim != 2:
        raise ValidationError("chains must form a 2-D array (chain, draw)")
    m, n = arr.shape
    if m < 1 or n < 4:
        raise ValidationError("need at least one chain with four draws")
    half = n // 2
    splits = np.vstack([arr[:, :half], arr[:, n - half:]])
    means = splits.mean(axis=1)
    within = splits.var(axis=1, ddof=1)
    m_s = splits.shape[0]
    w = float(within.mean())
    b = half * float(means.var(ddof=1))
    if w == 0.0:
        return 1.0 if b == 0.0 else math.inf
    v = w * (half - 1.0) / half + b * (m_s + 1.0) / (m_s * half)
    return math.sqrt(v / w)


# ---------------------------------------------------------------------------
# Continuity matching for the smoothing weight.


@dataclass(frozen=True)
class TauModel:
    """Ingredients of the endpoint-continuity equation for the smoothing weight.

    The mixture density is continuous at the hypothesis endpoints exactly when
    the inside plateau ``p_in / mass_in`` equals the outside plateau
    ``p_out / mass_out``, both multiplied by the same base density value.
    Writing the post-data odds as prior odds times the evidence ratio turns
    that into a single scalar equation in the weight ``tau``.

    Attributes
    ----------
    prior_prob : float
        Prior probability assigned to the hypothesis interval.
    evidence_out : float
        Predictive evidence of the outside component (tau-free).
    mass_out : float
        Base-density mass outside the interval.
    mass_in : callable
        tau -> base-plus-bump mass inside the interval.
    evidence_in : callable
        tau -> predictive evidence of the reweighted inside component.
    """

    prior_prob: float
    evidence_out: float
    mass_out: float
    mass_in: Callable[[float], float]
    evidence_in: Callable[[float], float]

    def __post_init__(self):
        if not 0.0 < self.prior_prob < 1.0:
            raise ValidationError("continuity matching needs a prior strictly inside (0, 1)")
        if not (self.evidence_out >= 0.0 and self.mass_out > 0.0):
            raise ValidationError("outside evidence must be nonnegative with positive mass")


@dataclass(frozen=True)
class TauSolveReport:
    """Outcome of the continuity solve."""

    tau: float
    residual: float
    iterations: int
    bracket: tuple[float, float]
    gap_at_zero: float


def continuity_gap(model: TauModel, tau: float) -> float:
    """Signed plateau mismatch at the interval endpoints for a given weight.

    Positive when the inside component overshoots the outside one.
    """
    p0 = model.prior_prob
    return (
        p0 * model.evidence_in(tau) * model.mass_out
        - (1.0 - p0) * model.evidence_out * model.mass_in(tau)
    )


def solve_tau(
    model: TauModel,
    tau_max: float = 1e8,
    rel_tol: float = 1e-10,
    max_iter: int = 400,
) -> TauSolveReport:
    """Smallest nonnegative weight making the mixture continuous at both ends.

    Brackets from [0, 1] by doubling, then bisects to a relative width of
    ``rel_tol``.  Raises :class:`NoRoot` with the gap values at both bracket
    ends when no sign change exists below ``tau_max``.
    """
    g0 = continuity_gap(model, 0.0)
    if g0 == 0.0:
        return TauSolveReport(0.0, 0.0, 0, (0.0, 0.0), 0.0)
    s0 = math.copysign(1.0, g0)
    lo, hi = 0.0, 1.0
    g_hi = continuity_gap(model, hi)
    iters = 0
    while g_hi != 0.0 and math.copysign(1.0, g_hi) == s0 and hi < tau_max:
        lo = hi
        hi = min(2.0 * hi, tau_max)
        g_hi = continuity_gap(model, hi)
        iters += 1
    if g_hi != 0.0 and math.copysign(1.0, g_hi) == s0:
        raise NoRoot(
            f"no continuity weight in [0, {tau_max:g}]",
            gap_at_zero=g0,
            gap_at_max=g_hi,
        )
    bracket = (lo, hi)
    while hi - lo > rel_tol * max(hi, 1e-30) and iters < max_iter:
        mid = 0.5 * (lo + hi)
        g_mid = continuity_gap(model, mid)
        iters += 1
        if g_mid == 0.0:
            lo = hi = mid
            break
        if math.copysign(1.0, g_mid) == s0:
            lo = mid
        else:
            hi = mid
    tau = 0.5 * (lo + hi)
    return TauSolveReport(tau, continuity_gap(model, tau), iters, bracket, g0)

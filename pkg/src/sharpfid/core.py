"""Core objects shared by every model backend.

The central quantity is the post-data probability of an interval (possibly
degenerate) hypothesis, obtained by combining the prior probability of the
interval with the predictive evidence of the two fiducial components
conditioned inside and outside it.  The resulting law is a two-component
mixture over disjoint regions, optionally with a point mass when the
hypothesis is sharp.
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass, field
from typing import Callable, Sequence, Union

import numpy as np
from scipy import special as sp

from .errors import (
    EmptySample,
    IndeterminateEvidence,
    SupportOverlap,
    ValidationError,
    ZeroMass,
)
from .numerics import (
    DEFAULT_QUADRATURE,
    QuadratureSpec,
    RngStream,
    ess as _ess,
    freedman_diaconis_edges,
    integrate,
    region_masses,
    truncated_draw,
)

__all__ = [
    "IntervalHypothesis",
    "BetaOnInterval",
    "LogScaleBetaOnRatio",
    "BumpDensity",
    "FlatGpd",
    "SmoothedGpd",
    "GpdSpec",
    "FLAT",
    "SmoothingLevel",
    "DensityHandle",
    "atom_handle",
    "truncated_family_handle",
    "grid_density_handle",
    "histogram_handle",
    "weighted_sample_handle",
    "WeightedSample",
    "post_data_probability",
    "post_data_probability_log",
    "mixture_post_density",
    "apply_gpd_weight",
    "PostDataResult",
]

_TINY_MASS = 1e-300
# math.exp overflows just above this; beyond it the probability underflows anyway
_MAX_LOG_RATIO = 709.0


@dataclass(frozen=True)
class IntervalHypothesis:
    """Hypothesis that the parameter lies in the closed interval [lo, hi].

    A degenerate interval (``lo == hi``) is the sharp case and is carried as a
    point mass through every downstream computation.

    Parameters
    ----------
    lo, hi : float
        Interval endpoints, ``lo <= hi``.
    prior_prob : float
        Probability attached to the interval before seeing the data.
    """

    lo: float
    hi: float
    prior_prob: float

    def __post_init__(self):
        if not (math.isfinite(self.lo) and math.isfinite(self.hi)):
            raise ValidationError("hypothesis endpoints must be finite")
        if self.lo > self.hi:
            raise ValidationError(f"empty interval [{self.lo}, {self.hi}]")
        if not 0.0 <= self.prior_prob <= 1.0:
            raise ValidationError(f"prior probability {self.prior_prob} outside [0, 1]")

    @classmethod
    def sharp(cls, at: float, prior_prob: float) -> "IntervalHypothesis":
        """Point hypothesis at a single value."""
        return cls(at, at, prior_prob)

    @classmethod
    def symmetric(cls, half_width: float, prior_prob: float, center: float = 0.0) -> "IntervalHypothesis":
        """Interval of the given half width centered at ``center``."""
        if half_width < 0.0:
            raise ValidationError("half width must be nonnegative")
        return cls(center - half_width, center + half_width, prior_prob)

    @property
    def is_sharp(self) -> bool:
        return self.lo == self.hi

    @property
    def width(self) -> float:
        return self.hi - self.lo

    @property
    def center(self) -> float:
        return 0.5 * (self.lo + self.hi)


# ---------------------------------------------------------------------------
# Bump densities and weighting specifications.


@dataclass(frozen=True)
class BetaOnInterval:
    """Polynomial bump on a bounded interval, vanishing at both endpoints.

    The shape is a beta density rescaled to the interval; both exponents must
    exceed one so the bump really does vanish at the ends, which is what the
    endpoint-continuity argument relies on.
    """

    a: float = 4.0
    b: float = 4.0

    def __post_init__(self):
        if not (self.a > 1.0 and self.b > 1.0):
            raise ValidationError("bump exponents must exceed 1 for vanishing endpoints")

    def density(self, x, lo: float, hi: float):
        """Bump values at ``x`` for the interval [lo, hi]; unit integral over it."""
        if not hi > lo:
            raise ValidationError("bump interval must have positive width")
        x = np.asarray(x, float)
        t = (x - lo) / (hi - lo)
        with np.errstate(divide="ignore", invalid="ignore"):
            logpdf = (
                (self.a - 1.0) * np.log(t)
                + (self.b - 1.0) * np.log1p(-t)
                - sp.betaln(self.a, self.b)
            )
        inside = (t > 0.0) & (t < 1.0)
        return np.where(inside, np.exp(np.where(inside, logpdf, -np.inf)), 0.0) / (hi - lo)


@dataclass(frozen=True)
class LogScaleBetaOnRatio:
    """Bump for a ratio parameter, shaped as a beta density in the log ratio.

    Vanishes at both interval endpoints; the 1/x factor makes it a proper
    density in the ratio itself.
    """

    a: float = 4.0
    b: float = 4.0

    def __post_init__(self):
        if not (self.a > 1.0 and self.b > 1.0):
            raise ValidationError("bump exponents must exceed 1 for vanishing endpoints")

    def density(self, x, lo: float, hi: float):
        if not (lo > 0.0 and hi > lo):
            raise ValidationError("ratio bump needs 0 < lo < hi")
        x = np.asarray(x, float)
        span = math.log(hi) - math.log(lo)
        with np.errstate(divide="ignore", invalid="ignore"):
            t = (np.log(x) - math.log(lo)) / span
            logpdf = (
                (self.a - 1.0) * np.log(t)
                + (self.b - 1.0) * np.log1p(-t)
                - sp.betaln(self.a, self.b)
            )
        inside = (x > lo) & (x < hi)
        vals = np.where(inside, np.exp(np.where(inside, logpdf, -np.inf)), 0.0)
        return np.where(inside, vals / (x * span), 0.0)


BumpDensity = Union[BetaOnInterval, LogScaleBetaOnRatio]


@dataclass(frozen=True)
class FlatGpd:
    """Uniform weighting: each component is the plain renormalized restriction."""


@dataclass(frozen=True)
class SmoothedGpd:
    """Inside-component weighting ``1 + tau * bump`` on the hypothesis interval.

    With ``tau`` left as None, analysis routines choose it so the mixture
    density is continuous at the interval endpoints; an explicit value is used
    as given.
    """

    bump: BumpDensity = field(default_factory=BetaOnInterval)
    tau: float | None = None

    def __post_init__(self):
        if self.tau is not None and not (self.tau >= 0.0 and math.isfinite(self.tau)):
            raise ValidationError(f"tau must be a finite nonnegative number, got {self.tau}")


GpdSpec = Union[FlatGpd, SmoothedGpd]
FLAT = FlatGpd()


class SmoothingLevel(enum.Enum):
    """Where the continuity weighting is applied in a multiparameter model."""

    CONDITIONAL = "conditional"
    MARGINAL = "marginal"


# ---------------------------------------------------------------------------
# Density handles.


class DensityHandle:
    """Probability law on the line: continuous part on disjoint intervals plus
    optional point masses.

    Parameters
    ----------
    pdf, cdf : callable
        Vectorized density of the continuous part and full distribution
        function (point masses included, right continuous).
    support : sequence of (float, float)
        Intervals carrying the continuous part, ascending with disjoint
        interiors; endpoints may be infinite.
    atoms : sequence of (float, float), optional
        (location, mass) pairs.
    sampler : callable, optional
        ``sampler(rng, size)`` drawing from the full law by inverse transforms.
    """

    def __init__(self, pdf, cdf, support, atoms=(), sampler=None):
        self._pdf = pdf
        self._cdf = cdf
        self.support = tuple((float(a), float(b)) for a, b in support)
        for (a, b) in self.support:
            if math.isnan(a) or math.isnan(b) or a > b:
                raise ValidationError(f"bad support interval ({a}, {b})")
        for (_, a_hi), (b_lo, _) in zip(self.support, self.support[1:]):
            if b_lo < a_hi:
                raise ValidationError("support intervals must be ascending and disjoint")
        self.atoms = tuple((float(x), float(m)) for x, m in atoms)
        total_atom = 0.0
        for x, m in self.atoms:
            if not (math.isfinite(x) and 0.0 <= m <= 1.0 + 1e-12):
                raise ValidationError(f"bad atom ({x}, {m})")
            total_atom += m
        if total_atom > 1.0 + 1e-9:
            raise ValidationError(f"atom masses sum to {total_atom} > 1")
        self._sampler = sampler

    @property
    def atom_mass(self) -> float:
        return sum(m for _, m in self.atoms)

    @property
    def continuous_mass(self) -> float:
        return 1.0 - self.atom_mass

    def pdf(self, x):
        """Continuous-part density at ``x``."""
        return np.asarray(self._pdf(np.asarray(x, float)), float)

    def cdf(self, x):
        """Distribution function at ``x``, point masses included."""
        return np.asarray(self._cdf(np.asarray(x, float)), float)

    def mass(self, lo: float = -math.inf, hi: float = math.inf) -> float:
        """Probability of the closed interval [lo, hi]."""
        if lo > hi:
            return 0.0
        total = float(self.cdf(hi) - self.cdf(lo))
        total += sum(m for x, m in self.atoms if x == lo)
        return min(max(total, 0.0), 1.0)

    def draw(self, rng: RngStream, size=None):
        """Sample from the law; raises if no sampler is attached."""
        if self._sampler is None:
            raise ValidationError("this density handle has no sampler attached")
        return self._sampler(rng, size)

    def validate(self, rel_tol: float = 1e-6, quadrature: QuadratureSpec = DEFAULT_QUADRATURE):
        """Check nonnegativity and normalization; raises on violation.

        Intended for tests and debugging, not hot paths: integrates the
        continuous part piece by piece.
        """
        total = self.atom_mass
        for (a, b) in self.support:
            piece = integrate(lambda t: float(self.pdf(t)), a, b, quadrature)
            if piece < -rel_tol:
                raise ValidationError(f"negative mass {piece} on ({a}, {b})")
            total += piece
        probes = []
        for (a, b) in self.support:
            a_f = a if math.isfinite(a) else min(b, 0.0) - 50.0
            b_f = b if math.isfinite(b) else max(a, 0.0) + 50.0
            if b_f > a_f:
                probes.append(np.linspace(a_f, b_f, 257))
        if probes and float(np.min(self.pdf(np.concatenate(probes)))) < -1e-12:
            raise ValidationError("density is negative somewhere on its support")
        if abs(total - 1.0) > max(rel_tol, 100.0 * quadrature.rel_tol):
            raise ValidationError(f"total mass {total} differs from 1")


def atom_handle(location: float) -> DensityHandle:
    """Unit point mass at ``location``."""
    loc = float(location)

    def pdf(x):
        return np.zeros_like(np.asarray(x, float))

    def cdf(x):
        return (np.asarray(x, float) >= loc).astype(float)

    def sampler(rng: RngStream, size=None):
        rng.uniform(size)  # burn draws so sequence alignment matches other handles
        if size is None:
            return loc
        return np.full(size, loc)

    return DensityHandle(pdf, cdf, support=(), atoms=((loc, 1.0),), sampler=sampler)


def truncated_family_handle(family, regions) -> DensityHandle:
    """Law of a scalar family conditioned on a union of disjoint intervals.

    The density, distribution function, and inverse-transform sampler are all
    exact in terms of the family's own cdf/ppf pair.
    """
    regs = tuple((float(a), float(b)) for a, b in regions)
    masses = region_masses(family, regs)
    total = float(masses.sum())
    if total < _TINY_MASS:
        raise ZeroMass(f"conditioning regions carry mass {total:g}")
    lows = np.array([float(family.cdf(a)) for a, _ in regs])

    def pdf(x):
        x = np.asarray(x, float)
        dens = family.pdf(x) / total
        inside = np.zeros(x.shape, bool)
        for (a, b) in regs:
            inside |= (x >= a) & (x <= b)
        return np.where(inside, dens, 0.0)

    def cdf(x):
        x = np.asarray(x, float)
        acc = np.zeros(x.shape, float)
        for (a, b), low, m in zip(regs, lows, masses):
            acc += np.clip(family.cdf(np.clip(x, a, b)) - low, 0.0, m)
        return acc / total

    def sampler(rng: RngStream, size=None):
        return truncated_draw(rng, family, regs, size)

    return DensityHandle(pdf, cdf, support=regs, sampler=sampler)


def grid_density_handle(
    fn: Callable[[np.ndarray], np.ndarray],
    lo: float,
    hi: float,
    n_grid: int = 2049,
    quadrature: QuadratureSpec = DEFAULT_QUADRATURE,
) -> DensityHandle:
    """Normalized law proportional to ``fn`` on [lo, hi].

    The density is evaluated exactly (``fn`` over the adaptive-quadrature
    normalizer); the distribution function and sampler interpolate a dense
    grid, so ``fn`` must be vectorized, nonnegative, and smooth at the grid
    scale.
    """
    lo = float(lo)
    hi = float(hi)
    if not (math.isfinite(lo) and math.isfinite(hi) and hi > lo):
        raise ValidationError(f"grid density needs a bounded interval, got [{lo}, {hi}]")
    norm = integrate(lambda t: float(fn(np.array([t]))[0]), lo, hi, quadrature)
    if not norm > _TINY_MASS:
        raise ZeroMass(f"density normalizer {norm:g} is not positive")
    xs = np.linspace(lo, hi, int(n_grid))
    fx = np.asarray(fn(xs), float)
    if np.any(fx < -1e-12 * max(1.0, float(np.max(np.abs(fx))))):
        raise ValidationError("grid density function takes negative values")
    fx = np.clip(fx, 0.0, None)
    steps = np.diff(xs)
    cum = np.concatenate(([0.0], np.cumsum(0.5 * (fx[1:] + fx[:-1]) * steps)))
    if cum[-1] <= 0.0:
        raise ZeroMass("grid mass vanished")
    cum /= cum[-1]
    keep = np.concatenate(([True], np.diff(cum) > 0.0))
    cum_inc = cum[keep]
    xs_inc = xs[keep]

    def pdf(x):
        x = np.asarray(x, float)
        vals = np.asarray(fn(x), float) / norm
        return np.where((x >= lo) & (x <= hi), vals, 0.0)

    def cdf(x):
        return np.interp(np.asarray(x, float), xs, cum)

    def sampler(rng: RngStream, size=None):
        u = rng.uniform(size)
        out = np.interp(u, cum_inc, xs_inc)
        return float(out) if size is None else out

    return DensityHandle(pdf, cdf, support=((lo, hi),), sampler=sampler)


def histogram_handle(edges, heights) -> DensityHandle:
    """Piecewise-constant law from normalized histogram heights."""
    edges = np.asarray(edges, float)
    heights = np.asarray(heights, float)
    if edges.ndim != 1 or edges.size < 2 or heights.shape != (edges.size - 1,):
        raise ValidationError("need k+1 edges and k heights")
    if np.any(np.diff(edges) <= 0.0):
        raise ValidationError("edges must be strictly increasing")
    if np.any(heights < 0.0):
        raise ValidationError("histogram heights must be nonnegative")
    probs = heights * np.diff(edges)
    total = float(probs.sum())
    if abs(total - 1.0) > 1e-8:
        raise ValidationError(f"histogram mass {total} differs from 1")
    cum = np.concatenate(([0.0], np.cumsum(probs))) / total
    keep = np.concatenate(([True], np.diff(cum) > 0.0))
    cum_inc = cum[keep]
    edges_inc = edges[keep]

    def pdf(x):
        x = np.asarray(x, float)
        idx = np.clip(np.searchsorted(edges, x, side="right") - 1, 0, heights.size - 1)
        inside = (x >= edges[0]) & (x <= edges[-1])
        return np.where(inside, heights[idx] / total, 0.0)

    def cdf(x):
        return np.interp(np.asarray(x, float), edges, cum)

    def sampler(rng: RngStream, size=None):
        u = rng.uniform(size)
        out = np.interp(u, cum_inc, edges_inc)
        return float(out) if size is None else out

    return DensityHandle(pdf, cdf, support=((float(edges[0]), float(edges[-1])),), sampler=sampler)


def weighted_sample_handle(values, weights, regions, max_bins: int = 4096) -> DensityHandle:
    """Piecewise histogram law of a weighted sample over known disjoint regions.

    Edges follow the Freedman-Diaconis rule region by region, pinned to the
    region boundaries so adjacent components abut exactly; regions holding no
    sample weight drop out of the support.
    """
    v = np.asarray(values, float)
    w = np.asarray(weights, float)
    if v.shape != w.shape:
        raise ValidationError("values and weights must have matching shapes")
    pieces = []
    for (a, b) in regions:
        a = float(a)
        b = float(b)
        if not b > a:
            raise ValidationError(f"bad histogram region ({a}, {b})")
        mask = (v >= a) & (v <= b) & (w > 0.0)
        if not np.any(mask):
            continue
        edges = freedman_diaconis_edges(v[mask], w[mask], support=(a, b), max_bins=max_bins)
        counts, _ = np.histogram(v[mask], bins=edges, weights=w[mask])
        pieces.append((edges, counts))
    if not pieces:
        raise EmptySample("no sample weight falls in any region")
    total = float(sum(c.sum() for _, c in pieces))
    heights = [c / (total * np.diff(e)) for e, c in pieces]
    offsets = np.concatenate(([0.0], np.cumsum([c.sum() / total for _, c in pieces])))

    def pdf(x):
        x = np.asarray(x, float)
        out = np.zeros(x.shape, float)
        for (e, _), h in zip(pieces, heights):
            idx = np.clip(np.searchsorted(e, x, side="right") - 1, 0, h.size - 1)
            inside = (x >= e[0]) & (x <= e[-1])
            out = np.where(inside, h[idx], out)
        return out

    def cdf(x):
        x = np.asarray(x, float)
        acc = np.zeros(x.shape, float)
        for (e, c), base in zip(pieces, offsets[:-1]):
            cum = base + np.concatenate(([0.0], np.cumsum(c))) / total
            acc = np.maximum(acc, np.interp(x, e, cum, left=0.0, right=cum[-1]))
        return np.maximum(acc, 0.0)

    all_cum = [
        base + np.concatenate(([0.0], np.cumsum(c))) / total
        for (_, c), base in zip(pieces, offsets[:-1])
    ]

    def sampler(rng: RngStream, size=None):
        u = rng.uniform(size)
        u_arr = np.atleast_1d(np.asarray(u, float))
        out = np.empty(u_arr.shape, float)
        for (e, _), cum, base, top in zip(pieces, all_cum, offsets[:-1], offsets[1:]):
            sel = (u_arr >= base) & (u_arr <= top)
            if np.any(sel):
                keep = np.concatenate(([True], np.diff(cum) > 0.0))
                out[sel] = np.interp(u_arr[sel], cum[keep], e[keep])
        return float(out[0]) if size is None else out

    support = tuple((float(e[0]), float(e[-1])) for e, _ in pieces)
    return DensityHandle(pdf, cdf, support, sampler=sampler)


@dataclass(frozen=True)
class WeightedSample:
    """Sample points with nonnegative importance weights.

    ``values`` may be one-dimensional or (n, k) for joint draws; ``weights``
    is always one-dimensional with matching leading length.
    """

    values: np.ndarray
    weights: np.ndarray

    def __post_init__(self):
        values = np.asarray(self.values, float)
        weights = np.asarray(self.weights, float)
        if values.shape[:1] != weights.shape:
            raise ValidationError("values and weights must agree on the leading axis")
        _ess(weights)  # validates emptiness, sign, finiteness
        if not np.all(np.isfinite(values)):
            raise ValidationError("sample values must be finite")
        object.__setattr__(self, "values", values)
        object.__setattr__(self, "weights", weights)

    @property
    def size(self) -> int:
        return self.weights.size

    def ess(self) -> float:
        """Effective sample size of the weights."""
        return _ess(self.weights)


# ---------------------------------------------------------------------------
# Post-data probability and mixture assembly.


def post_data_probability(prior_prob: float, evidence_in: float, evidence_out: float) -> float:
    """Post-data probability of the hypothesis from prior mass and evidences.

    Combines the prior odds with the ratio of the predictive evidences of the
    inside and outside components.  Invariant under common rescaling of the
    two evidences, and safe against overflow: the computation always divides
    the smaller evidence by the larger one.

    Raises
    ------
    IndeterminateEvidence
        When the combination degenerates to 0/0, for example when both
        evidences vanish, or the prior is certain about a side whose evidence
        is zero.
    """
    p0 = float(prior_prob)
    m_in = float(evidence_in)
    m_out = float(evidence_out)
    if not 0.0 <= p0 <= 1.0:
        raise ValidationError(f"prior probability {p0} outside [0, 1]")
    if math.isnan(m_in) or math.isnan(m_out):
        raise IndeterminateEvidence("evidence is NaN")
    if m_in < 0.0 or m_out < 0.0:
        raise ValidationError("evidence must be nonnegative")
    if m_in == 0.0 and m_out == 0.0:
        raise IndeterminateEvidence("both evidences vanish")
    if math.isinf(m_in) and math.isinf(m_out):
        raise IndeterminateEvidence("both evidences are infinite")
    q0 = 1.0 - p0
    if m_in <= m_out:
        ratio = m_in / m_out
        numer = p0 * ratio
        denom = numer + q0
    else:
        ratio = m_out / m_in
        numer = p0
        denom = p0 + q0 * ratio
    if denom == 0.0:
        raise IndeterminateEvidence(
            f"prior {p0} concentrates on a side with zero evidence"
        )
    return numer / denom


def post_data_probability_log(prior_prob: float, log_evidence_in: float, log_evidence_out: float) -> float:
    """Same combination rule with evidences on the log scale.

    Useful when an evidence underflows as a plain float; only the difference
    of the two log evidences enters.
    """
    p0 = float(prior_prob)
    if not 0.0 <= p0 <= 1.0:
        raise ValidationError(f"prior probability {p0} outside [0, 1]")
    li = float(log_evidence_in)
    lo = float(log_evidence_out)
    if math.isnan(li) or math.isnan(lo):
        raise IndeterminateEvidence("log evidence is NaN")
    in_dead = li == -math.inf
    out_dead = lo == -math.inf
    if in_dead and out_dead:
        raise IndeterminateEvidence("both evidences vanish")
    if in_dead or p0 == 0.0:
        if p0 == 1.0 or out_dead:
            raise IndeterminateEvidence("prior concentrates on a side with zero evidence")
        return 0.0
    if out_dead or p0 == 1.0:
        return 1.0
    d = min(lo - li, _MAX_LOG_RATIO)
    return p0 / (p0 + (1.0 - p0) * math.exp(d))


def _interval_overlap(sup_a, sup_b) -> float:
    total = 0.0
    for (a1, b1) in sup_a:
        for (a2, b2) in sup_b:
            total += max(0.0, min(b1, b2) - max(a1, a2))
    return total


def _atom_in_interior(atoms, support) -> bool:
    return any(a < x < b for x, _ in atoms for (a, b) in support)


def mixture_post_density(
    density_in: DensityHandle,
    density_out: DensityHandle,
    p_in: float,
) -> DensityHandle:
    """Two-component mixture with the inside component carrying mass ``p_in``.

    The components must occupy regions with disjoint interiors (shared
    endpoints are fine); anything else raises :class:`SupportOverlap`.
    """
    p_in = float(p_in)
    if not 0.0 <= p_in <= 1.0:
        raise ValidationError(f"mixture weight {p_in} outside [0, 1]")
    overlap = _interval_overlap(density_in.support, density_out.support)
    if overlap > 0.0:
        raise SupportOverlap(f"component supports overlap with measure {overlap:g}")
    if _atom_in_interior(density_in.atoms, density_out.support) or _atom_in_interior(
        density_out.atoms, density_in.support
    ):
        raise SupportOverlap("a point mass lies strictly inside the other component")
    p_out = 1.0 - p_in

    def pdf(x):
        return p_in * density_in.pdf(x) + p_out * density_out.pdf(x)

    def cdf(x):
        return p_in * density_in.cdf(x) + p_out * density_out.cdf(x)

    atoms = tuple((x, m * p_in) for x, m in density_in.atoms if p_in > 0.0) + tuple(
        (x, m * p_out) for x, m in density_out.atoms if p_out > 0.0
    )

    def sampler(rng: RngStream, size=None):
        if size is None:
            pick_in = rng.uniform() < p_in
            return density_in.draw(rng) if pick_in else density_out.draw(rng)
        u = rng.uniform(size)
        take_in = u < p_in
        out = np.empty(int(size), float)
        n_in = int(take_in.sum())
        if n_in:
            out[take_in] = np.asarray(density_in.draw(rng, n_in), float)
        if n_in < out.size:
            out[~take_in] = np.asarray(density_out.draw(rng, out.size - n_in), float)
        return out

    support = tuple(sorted(density_in.support + density_out.support))
    can_sample = density_in._sampler is not None and density_out._sampler is not None
    return DensityHandle(pdf, cdf, support, atoms=atoms, sampler=sampler if can_sample else None)


def apply_gpd_weight(handle: DensityHandle, gpd: GpdSpec) -> DensityHandle:
    """Reweight a density by the chosen prior-weighting specification.

    Flat weighting returns the handle unchanged.  Smoothed weighting
    multiplies by ``1 + tau * bump`` on the handle's (single, bounded) support
    interval and renormalizes; it requires an explicit ``tau``.
    """
    if isinstance(gpd, FlatGpd):
        return handle
    if not isinstance(gpd, SmoothedGpd):
        raise ValidationError(f"unknown weighting spec {gpd!r}")
    if gpd.tau is None:
        raise ValidationError("direct reweighting needs an explicit tau")
    if len(handle.support) != 1:
        raise ValidationError("smoothed weighting expects a single support interval")
    lo, hi = handle.support[0]
    if not (math.isfinite(lo) and math.isfinite(hi)):
        raise ValidationError("smoothed weighting expects a bounded support interval")
    if handle.atoms:
        raise ValidationError("cannot reweight a law with point masses")
    tau = float(gpd.tau)
    bump = gpd.bump

    def weighted(x):
        return (1.0 + tau * bump.density(x, lo, hi)) * handle.pdf(x)

    return grid_density_handle(weighted, lo, hi)


@dataclass(frozen=True)
class PostDataResult:
    """Outcome of a post-data analysis of one interval hypothesis.

    ``density_in`` and ``density_out`` are the normalized component laws
    conditioned on the hypothesis region and its complement; the full law is
    their mixture with weights ``p_in`` and ``p_out``.
    """

    p_in: float
    density_in: DensityHandle
    density_out: DensityHandle
    tau_used: float | None = None
    mc_stderr: float | None = None
    ess: float | None = None
    smoothing_level: SmoothingLevel | None = None

    def __post_init__(self):
        if not 0.0 <= self.p_in <= 1.0:
            raise ValidationError(f"p_in {self.p_in} outside [0, 1]")

    @property
    def p_out(self) -> float:
        return 1.0 - self.p_in

    def mixture(self) -> DensityHandle:
        """Full post-data law as a single mixture handle."""
        return mixture_post_density(self.density_in, self.density_out, self.p_in)

"""Numerical tables behind the nine bundled example figures.

Each figure is reduced to a list of :class:`FigureTable` records, one per
plotted curve or histogram, ready to be serialized as CSV and drawn by any
plotting frontend.  Curve tables carry a regular grid and the value on it;
histogram tables carry bin bounds and normalized bar heights.

Figures backed by Monte Carlo runs (4, 6 and 9) default to a reduced sample
count so everything regenerates in well under ten minutes; ``full_scale``
restores the full published run lengths.  The remaining figures are exact
quadrature sweeps and ignore the sampling controls.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from . import binomial, normal_direct, normal_gibbs, normal_known, relative_risk
from .binomial import BinomialCount
from .core import FLAT, IntervalHypothesis, SmoothedGpd
from .errors import ValidationError
from .normal_direct import NormalSummary
from .normal_gibbs import UniformRandomScan
from .normal_known import NormalKnownSummary
from .numerics import BetaFamily, InverseGammaFamily, RngStream, StudentTFamily
from .relative_risk import RatioHypothesis, TwoArmCounts

# Observed-mean sweep shared by the probability-versus-mean figures.
XBAR_GRID = np.linspace(0.0, 5.0, 201)

# Plotting grids for the density figures; chosen wide enough that the
# truncated tail mass is negligible at every setting used below.
_MU_GRID_KNOWN = np.linspace(-1.0, 5.0, 2401)
_MU_GRID_T = np.linspace(-2.0, 7.0, 901)
_MU_EDGES_T = np.linspace(-2.0, 7.0, 181)
_SIGMA_GRID = np.linspace(0.0, 12.0, 1201)[1:]
_SIGMA_EDGES = np.linspace(0.0, 12.0, 241)
_PI_EDGES = np.linspace(0.0, 1.0, 201)
_PI_GRID = np.linspace(0.001, 0.999, 500)
_RHO_EDGES = np.linspace(0.0, 2.0, 201)
_RHO_GRID = np.linspace(0.005, 2.0, 400)

_DESK_SAMPLES = {4: 200_000, 6: 500_000, 9: 400_000}
_FULL_SAMPLES = {4: 2_000_000, 6: 5_000_000, 9: 4_000_000}

FIGURE_IDS = tuple(range(1, 10))


@dataclass(frozen=True)
class FigureTable:
    """One CSV-ready table: column names, numeric columns, constant label.

    ``header`` names every output column including the trailing ``label``
    column, which repeats ``label`` on each row.
    """

    filename: str
    header: tuple[str, ...]
    columns: tuple[np.ndarray, ...]
    label: str

    def __post_init__(self):
        if len(self.header) != len(self.columns) + 1 or self.header[-1] != "label":
            raise ValidationError("header must name every column plus a trailing label")
        sizes = {c.size for c in self.columns}
        if len(sizes) != 1:
            raise ValidationError("all columns must have equal length")

    @property
    def n_rows(self) -> int:
        return self.columns[0].size

    def rows(self):
        """Row tuples with the label appended, ready for a CSV writer."""
        for values in zip(*self.columns):
            yield (*values, self.label)


def _curve(filename, x_name, y_name, x, y, label) -> FigureTable:
    return FigureTable(
        filename,
        (x_name, y_name, "label"),
        (np.asarray(x, float), np.asarray(y, float)),
        label,
    )


def _hist(filename, x_name, edges, heights, label) -> FigureTable:
    edges = np.asarray(edges, float)
    return FigureTable(
        filename,
        (f"{x_name}_left", f"{x_name}_right", "density", "label"),
        (edges[:-1], edges[1:], np.asarray(heights, float)),
        label,
    )


def _handle_heights(handle, edges) -> np.ndarray:
    """Average density over each bin, point masses included."""
    cum = handle.cdf(edges)
    return np.diff(cum) / np.diff(edges)


def _chain_heights(draws, edges) -> np.ndarray:
    counts, _ = np.histogram(draws, bins=edges)
    return counts / (draws.size * np.diff(edges))


def _sigma_density(summary: NormalSummary):
    """Marginal fiducial law of the deviation, as a density over sigma."""
    fam = InverseGammaFamily(summary.df / 2.0, summary.df * summary.s**2 / 2.0)

    def density(sigma):
        sigma = np.asarray(sigma, float)
        return 2.0 * sigma * fam.pdf(sigma**2)

    return density


# ---------------------------------------------------------------------------
# Known noise scale: probability sweeps and mean densities.


def _fig1() -> list[FigureTable]:
    tables = []
    for prior in (0.5, 0.3):
        for eps in (0.0, 0.25, 0.5):
            hyp = IntervalHypothesis.symmetric(eps, prior)
            probs = [
                normal_known.analyze(NormalKnownSummary.from_se(x, 1.0), hyp, FLAT).p_in
                for x in XBAR_GRID
            ]
            tables.append(
                _curve(
                    f"fig1_eps{eps:g}_prior{prior:g}_curve.csv",
                    "xbar",
                    "probability",
                    XBAR_GRID,
                    probs,
                    f"eps={eps:g}, prior={prior:g}",
                )
            )
    return tables


def _mean_density_tables(fig: int, eps: float, prior: float, gpd) -> list[FigureTable]:
    tables = []
    hyp = IntervalHypothesis.symmetric(eps, prior)
    for xbar in (1.7, 2.1, 2.5):
        res = normal_known.analyze(NormalKnownSummary.from_se(xbar, 1.0), hyp, gpd)
        tables.append(
            _curve(
                f"fig{fig}_xbar{xbar:g}_curve.csv",
                "mu",
                "density",
                _MU_GRID_KNOWN,
                res.mixture().pdf(_MU_GRID_KNOWN),
                f"xbar={xbar:g}",
            )
        )
    return tables


def _fig2() -> list[FigureTable]:
    return _mean_density_tables(2, 0.1, 0.3, FLAT)


def _fig3() -> list[FigureTable]:
    tables = []
    for prior in (0.5, 0.3):
        for eps in (0.0, 0.1, 0.2):
            hyp = IntervalHypothesis.symmetric(eps, prior)
            probs = [
                normal_known.analyze(NormalKnownSummary.from_se(x, 1.0), hyp, FLAT)
                .mixture()
                .mass(-0.2, 0.2)
                for x in XBAR_GRID
            ]
            tables.append(
                _curve(
                    f"fig3_eps{eps:g}_prior{prior:g}_curve.csv",
                    "xbar",
                    "probability",
                    XBAR_GRID,
                    probs,
                    f"eps={eps:g}, prior={prior:g}",
                )
            )
    return tables


def _fig5() -> list[FigureTable]:
    return _mean_density_tables(5, 0.2, 0.33, SmoothedGpd())


# ---------------------------------------------------------------------------
# Binomial proportion histograms.


def _fig4(n_samples: int, seed: int) -> list[FigureTable]:
    tables = []
    hyp = IntervalHypothesis.symmetric(0.01, 0.3, center=0.5)
    rng = RngStream(seed)
    for k, x in enumerate((5, 4, 3)):
        res = binomial.analyze(
            BinomialCount(x, 16), hyp, FLAT, n_samples=n_samples, rng=rng.child(k)
        )
        tables.append(
            _hist(
                f"fig4_x{x}_hist.csv",
                "pi",
                _PI_EDGES,
                _handle_heights(res.mixture(), _PI_EDGES),
                f"x={x}",
            )
        )
    return tables


# ---------------------------------------------------------------------------
# Unknown noise scale: Gibbs histograms and direct-method sweeps.


def _fig6(n_samples: int, burn_in: int, seed: int) -> list[FigureTable]:
    summary = NormalSummary(9, 2.1, 3.0)
    chain = normal_gibbs.gibbs_run(
        summary,
        IntervalHypothesis.symmetric(0.2, 0.33),
        SmoothedGpd(),
        scan=UniformRandomScan(),
        n_samples=n_samples,
        burn_in=burn_in,
        rng=RngStream(seed),
    )
    mu_marginal = StudentTFamily(summary.df, summary.xbar, summary.std_error)
    sigma_marginal = _sigma_density(summary)
    return [
        _hist(
            "fig6_mu_hist.csv",
            "mu",
            _MU_EDGES_T,
            _chain_heights(chain.mu, _MU_EDGES_T),
            "mu, Gibbs sample",
        ),
        _curve(
            "fig6_mu_fiducial_curve.csv",
            "mu",
            "density",
            _MU_GRID_T,
            mu_marginal.pdf(_MU_GRID_T),
            "mu, fiducial marginal",
        ),
        _hist(
            "fig6_sigma_hist.csv",
            "sigma",
            _SIGMA_EDGES,
            _chain_heights(chain.sigma, _SIGMA_EDGES),
            "sigma, Gibbs sample",
        ),
        _curve(
            "fig6_sigma_fiducial_curve.csv",
            "sigma",
            "density",
            _SIGMA_GRID,
            sigma_marginal(_SIGMA_GRID),
            "sigma, fiducial marginal",
        ),
    ]


def _fig7() -> list[FigureTable]:
    tables = []
    for prior in (0.5, 0.3):
        for eps in (0.0, 0.25, 0.5):
            hyp = IntervalHypothesis.symmetric(eps, prior)
            probs = [
                normal_direct.analyze(NormalSummary(9, x, 3.0), hyp, FLAT).p_in
                for x in XBAR_GRID
            ]
            tables.append(
                _curve(
                    f"fig7_eps{eps:g}_prior{prior:g}_curve.csv",
                    "xbar",
                    "probability",
                    XBAR_GRID,
                    probs,
                    f"eps={eps:g}, prior={prior:g}",
                )
            )
    return tables


def _fig8() -> list[FigureTable]:
    hyp = IntervalHypothesis.symmetric(0.2, 0.33)
    gpd = SmoothedGpd()
    tables = []
    for xbar in (1.7, 2.1, 2.5):
        dens = normal_direct.marginal_post_density(NormalSummary(9, xbar, 3.0), hyp, gpd)
        tables.append(
            _curve(
                f"fig8_mu_xbar{xbar:g}_curve.csv",
                "mu",
                "density",
                _MU_GRID_T,
                dens.pdf(_MU_GRID_T),
                f"mu, xbar={xbar:g}",
            )
        )
    summary = NormalSummary(9, 2.1, 3.0)
    joint = normal_direct.joint_post_density(summary, hyp, gpd)
    # chunked so the mean-by-sigma quadrature grid stays small in memory
    post = np.concatenate(
        [joint.sigma_pdf(part) for part in np.array_split(_SIGMA_GRID, 4)]
    )
    tables.append(
        _curve(
            "fig8_sigma_post_curve.csv",
            "sigma",
            "density",
            _SIGMA_GRID,
            post,
            "sigma, post-data marginal (xbar=2.1)",
        )
    )
    tables.append(
        _curve(
            "fig8_sigma_fiducial_curve.csv",
            "sigma",
            "density",
            _SIGMA_GRID,
            _sigma_density(summary)(_SIGMA_GRID),
            "sigma, fiducial marginal",
        )
    )
    return tables


# ---------------------------------------------------------------------------
# Relative risk: fiducial histograms with beta-posterior overlay curves.


def _row_means(fn, grid, chunk: int = 8) -> np.ndarray:
    out = np.empty(grid.size)
    for start in range(0, grid.size, chunk):
        block = grid[start : start + chunk][:, None]
        out[start : start + chunk] = fn(block).mean(axis=1)
    return out


def _jeffreys_curves(
    counts: TwoArmCounts, hyp: RatioHypothesis, gpd, n_samples: int, rng: RngStream
) -> dict[str, np.ndarray]:
    """Smooth marginal densities under the beta-posterior stand-in.

    The mixture reweighting factor depends on the pair only through the
    ratio, so each marginal is the one-arm posterior density times the
    factor averaged over fresh draws of the other arm.
    """
    approx = relative_risk.jeffreys_approx(
        counts, hyp, gpd, n_samples=n_samples, rng=rng.child(0)
    )
    tau = approx.tau_used if approx.tau_used is not None else 0.0
    p_in = approx.p_in
    fam_t = BetaFamily(counts.e_t + 0.5, counts.n_t - counts.e_t + 0.5)
    fam_c = BetaFamily(counts.e_c + 0.5, counts.n_c - counts.e_c + 0.5)
    pi_t = fam_t.ppf(np.atleast_1d(rng.child(1).uniform(n_samples)))
    pi_c = fam_c.ppf(np.atleast_1d(rng.child(2).uniform(n_samples)))
    lo, hi = hyp.lo, hyp.hi
    ratio = pi_t / pi_c
    inside = (ratio >= lo) & (ratio <= hi)
    bump = gpd.bump
    z_in = float(np.sum(1.0 + tau * bump.density(ratio[inside], lo, hi))) / n_samples
    z_out = float(np.mean(~inside))
    c_in = p_in / z_in
    c_out = (1.0 - p_in) / z_out

    def mix_factor(r):
        r = np.asarray(r, float)
        inside_r = (r >= lo) & (r <= hi)
        return np.where(
            inside_r, c_in * (1.0 + tau * bump.density(r, lo, hi)), c_out
        )

    pit_curve = fam_t.pdf(_PI_GRID) * _row_means(
        lambda v: mix_factor(v / pi_c[None, :]), _PI_GRID
    )
    pic_curve = fam_c.pdf(_PI_GRID) * _row_means(
        lambda v: mix_factor(pi_t[None, :] / v), _PI_GRID
    )
    rho_curve = mix_factor(_RHO_GRID) * _row_means(
        lambda r: pi_c[None, :] * fam_t.pdf(r * pi_c[None, :]), _RHO_GRID
    )
    return {"pit": pit_curve, "pic": pic_curve, "rho": rho_curve}


def _fig9(n_samples: int, seed: int) -> list[FigureTable]:
    hyp = RatioHypothesis(0.045, 0.4)
    gpd = relative_risk.DEFAULT_GPD
    rng = RngStream(seed)
    base = relative_risk.analyze(
        TwoArmCounts(6, 20, 18, 30), hyp, gpd, n_samples=n_samples, rng=rng.child(0)
    )
    tables = [
        _hist(
            "fig9_pit_hist.csv",
            "pi_t",
            _PI_EDGES,
            _handle_heights(base.treatment, _PI_EDGES),
            "pi_t, fiducial sample (e_t=6)",
        ),
        _hist(
            "fig9_pic_hist.csv",
            "pi_c",
            _PI_EDGES,
            _handle_heights(base.control, _PI_EDGES),
            "pi_c, fiducial sample (e_t=6)",
        ),
        _hist(
            "fig9_rho_hist.csv",
            "rho",
            _RHO_EDGES,
            _handle_heights(base.ratio_mixture(), _RHO_EDGES),
            "rho, fiducial sample (e_t=6)",
        ),
    ]
    for j, e_t in enumerate((5, 6, 7)):
        curves = _jeffreys_curves(
            TwoArmCounts(e_t, 20, 18, 30), hyp, gpd, n_samples, rng.child(j + 1)
        )
        for key, x_name, grid in (
            ("pit", "pi_t", _PI_GRID),
            ("pic", "pi_c", _PI_GRID),
            ("rho", "rho", _RHO_GRID),
        ):
            tables.append(
                _curve(
                    f"fig9_{key}_jeffreys_et{e_t}_curve.csv",
                    x_name,
                    "density",
                    grid,
                    curves[key],
                    f"{x_name}, Jeffreys approximation (e_t={e_t})",
                )
            )
    return tables


# ---------------------------------------------------------------------------
# Dispatch.


def figure_tables(
    fig_id: int,
    n_samples: int | None = None,
    seed: int = 0,
    burn_in: int = normal_gibbs.DEFAULT_BURN_IN,
    full_scale: bool = False,
) -> list[FigureTable]:
    """All tables for one figure.

    ``n_samples``, ``seed`` and ``burn_in`` only affect the Monte Carlo
    figures (4, 6 and 9); ``full_scale`` switches their default sample count
    from the quick desk setting to the full published run length.
    """
    if fig_id not in FIGURE_IDS:
        raise ValidationError(f"figure id must be 1..9, got {fig_id}")
    if n_samples is None:
        source = _FULL_SAMPLES if full_scale else _DESK_SAMPLES
        n_samples = source.get(fig_id, 0)
    elif n_samples < 1:
        raise ValidationError(f"need at least one sample, got {n_samples}")
    if fig_id == 1:
        return _fig1()
    if fig_id == 2:
        return _fig2()
    if fig_id == 3:
        return _fig3()
    if fig_id == 4:
        return _fig4(n_samples, seed)
    if fig_id == 5:
        return _fig5()
    if fig_id == 6:
        return _fig6(n_samples, burn_in, seed)
    if fig_id == 7:
        return _fig7()
    if fig_id == 8:
        return _fig8()
    return _fig9(n_samples, seed)

"""Post-data probabilities for sharp and almost-sharp hypotheses.

The package combines a prior probability attached to a short interval (or a
single point) with fiducial predictive evidence to produce the post-data
probability of the hypothesis, together with the full post-data law of the
parameter as a mixture over the inside and outside regions.  Model backends
cover a normal mean with known or unknown variance, a binomial proportion,
and the ratio of two binomial proportions.
"""

from .core import (
    FLAT,
    BetaOnInterval,
    BumpDensity,
    DensityHandle,
    FlatGpd,
    GpdSpec,
    IntervalHypothesis,
    LogScaleBetaOnRatio,
    PostDataResult,
    SmoothedGpd,
    SmoothingLevel,
    WeightedSample,
    apply_gpd_weight,
    mixture_post_density,
    post_data_probability,
    post_data_probability_log,
)
from .errors import (
    BadBracket,
    DegenerateChains,
    EmptySample,
    IndeterminateEvidence,
    InsufficientSlicePopulation,
    NonConvergence,
    NoRoot,
    NumericalError,
    SharpFidError,
    SupportOverlap,
    ValidationError,
    ZeroMass,
    ZeroRegionMass,
)
from .numerics import (
    DEFAULT_QUADRATURE,
    QuadratureSpec,
    RngStream,
    TauModel,
    TauSolveReport,
    solve_tau,
)

__version__ = "0.1.0"

__all__ = [
    "FLAT",
    "BetaOnInterval",
    "BumpDensity",
    "DensityHandle",
    "FlatGpd",
    "GpdSpec",
    "IntervalHypothesis",
    "LogScaleBetaOnRatio",
    "PostDataResult",
    "SmoothedGpd",
    "SmoothingLevel",
    "WeightedSample",
    "apply_gpd_weight",
    "mixture_post_density",
    "post_data_probability",
    "post_data_probability_log",
    "BadBracket",
    "DegenerateChains",
    "EmptySample",
    "IndeterminateEvidence",
    "InsufficientSlicePopulation",
    "NonConvergence",
    "NoRoot",
    "NumericalError",
    "SharpFidError",
    "SupportOverlap",
    "ValidationError",
    "ZeroMass",
    "ZeroRegionMass",
    "DEFAULT_QUADRATURE",
    "QuadratureSpec",
    "RngStream",
    "TauModel",
    "TauSolveReport",
    "solve_tau",
    "__version__",
]

"""Bridge sampling estimates of normalizing constants.

Typical use::

    from warpbridge import BridgeConfig, ParameterSpec, SampleSet, bridge_sampler

    result = bridge_sampler(samples, log_posterior, spec, BridgeConfig(method="warp3"))
    result.log_ml
"""

from .compare import BayesFactor, PosteriorProbMatrix, bayes_factor, post_prob
from .density import vectorized
from .errors import (
    AllZeroRatios,
    BoundViolation,
    BridgeError,
    DimensionMismatch,
    DimensionTooHigh,
    EmptyChain,
    InputError,
    InvalidPrior,
    NonFiniteDensity,
    NumericalError,
    SingularCovariance,
    TooFewRepetitions,
    TooFewSamples,
    UnsupportedMethod,
)
from .estimator import (
    BridgeConfig,
    BridgeResult,
    LogRatioVectors,
    bridge_sampler,
    compute_log_ratios,
    run_iterative_scheme,
)
from .kernels import BACKEND
from .paramspace import (
    ParameterBound,
    ParameterSpec,
    from_unconstrained,
    log_jacobian,
    to_unconstrained,
    transformed_log_density,
)
from .proposal import GaussianProposal, SampleSet, fit_proposal, split_halves
from .uncertainty import (
    ApproxError,
    RepetitionSummary,
    approx_error_normal,
    error_measures,
    repetition_summary,
)
from .warp import WarpSpec, fit_warp, warp_samples, warped_log_density

__version__ = "0.1.0"

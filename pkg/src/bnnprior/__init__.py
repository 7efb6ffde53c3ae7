"""Exact single-input priors of finite deep linear and ReLU networks."""

__version__ = "0.1.0"

from .asymptotics import (
    WidthScaledSpec,
    edgeworth_coefficient,
    edgeworth_density,
    fourth_cumulant_cross,
    fourth_cumulant_linear,
    gaussian_limit_density,
)
from .errors import (
    AccuracyError,
    ConfigurationError,
    DegenerateHistogramError,
    DivergenceError,
    DomainError,
    IntegrabilityError,
    PoleError,
    PriorError,
    ResourceError,
)
from .linear_prior import (
    charfun_linear,
    density_linear,
    density_two_layer,
    diverges_at_origin,
    log_density_linear,
    log_moment_norm_linear,
    marginal_density_1d,
    moment_norm_linear,
    prior_constants,
    radius_grid,
)
from .mc_oracle import (
    compare_density,
    empirical_density,
    empirical_moment,
    sample_outputs,
)
from .network import NetworkSpec
from .relu_prior import (
    ReLUMixture,
    atom_mass,
    charfun_relu,
    density_relu,
    enumerate_terms,
    log_moment_norm_relu,
    moment_norm_relu,
)
from .tails import (
    estimate_tail_parameter,
    relu_moment_bounds_check,
    root_moment_curve,
)
from .validation import run_validation

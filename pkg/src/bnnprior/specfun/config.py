"""Numerical configuration records shared by the integration kernels."""

from dataclasses import dataclass
from typing import Optional

from ..errors import ConfigurationError

CUTOFF_POLICIES = ("moment-bound", "fixed-radius")


@dataclass(frozen=True)
class ContourConfig:
    """Parameters of the vertical-line Mellin-Barnes trapezoid rule.

    ``abscissa`` fixes the real part of the contour for every argument.  When
    it is ``None`` the abscissa is placed at the saddle point of the
    integrand on the real axis (clipped to keep a margin from the poles).

    ``step`` and ``truncation`` are the *initial* trapezoid spacing and
    half-length, measured in units of the Gaussian width of the integrand at
    the abscissa.  Both are refined adaptively: the truncation is doubled
    until the tail is negligible and the step halved until two successive
    estimates agree to ``target_rel_tol``.
    """

    abscissa: Optional[float] = None
    truncation: float = 8.0
    step: float = 0.5
    target_rel_tol: float = 1e-12
    pole_margin: float = 0.25
    max_refinements: int = 10

    def __post_init__(self):
        if not self.truncation > 0:
            raise ConfigurationError("truncation must be positive")
        if not self.step > 0:
            raise ConfigurationError("step must be positive")
        if not 0 < self.target_rel_tol < 1:
            raise ConfigurationError("target_rel_tol must lie in (0, 1)")
        if not self.pole_margin > 0:
            raise ConfigurationError("pole_margin must be positive")
        if self.max_refinements < 1:
            raise ConfigurationError("max_refinements must be >= 1")


@dataclass(frozen=True)
class QuadratureConfig:
    """Tolerances for real-line quadrature (oracles, transforms, moments)."""

    rel_tol: float = 1e-10
    abs_tol: float = 0.0
    max_subdivisions: int = 200
    domain_cutoff_policy: str = "moment-bound"
    cutoff_radius: Optional[float] = None

    def __post_init__(self):
        if not 0 < self.rel_tol < 1:
            raise ConfigurationError("rel_tol must lie in (0, 1)")
        if self.abs_tol < 0:
            raise ConfigurationError("abs_tol must be non-negative")
        if self.max_subdivisions < 1:
            raise ConfigurationError("max_subdivisions must be >= 1")
        if self.domain_cutoff_policy not in CUTOFF_POLICIES:
            raise ConfigurationError(
                f"domain_cutoff_policy must be one of {CUTOFF_POLICIES}"
            )
        if self.domain_cutoff_policy == "fixed-radius" and not (
            self.cutoff_radius and self.cutoff_radius > 0
        ):
            raise ConfigurationError("fixed-radius policy needs cutoff_radius > 0")


DEFAULT_CONTOUR = ContourConfig()
DEFAULT_QUADRATURE = QuadratureConfig()

"""Large-width references: Gaussian limit and first Edgeworth correction."""

import math
from dataclasses import dataclass

import numpy as np

from .errors import ConfigurationError, DomainError
from .network import NetworkSpec


@dataclass(frozen=True)
class WidthScaledSpec:
    """A network together with its width-independent scale.

    ``varkappa`` is defined by kappa = varkappa / sqrt(n_1 ... n_{d-1}), so
    that the output variance per unit stays finite as hidden widths grow.
    """

    base: NetworkSpec
    varkappa: float

    def __post_init__(self):
        if not self.varkappa > 0:
            raise ConfigurationError("varkappa must be positive")
        implied = self.varkappa * math.exp(-0.5 * _log_hidden_product(self.base))
        if abs(implied / self.base.kappa - 1) > 1e-12:
            raise ConfigurationError(
                f"varkappa {self.varkappa} implies kappa {implied}, spec has {self.base.kappa}"
            )

    @classmethod
    def from_spec(cls, spec: NetworkSpec):
        return cls(spec, math.exp(spec.log_kappa + 0.5 * _log_hidden_product(spec)))

    @classmethod
    def from_varkappa(cls, widths, varkappa=1.0, activation="linear"):
        widths = tuple(widths)
        log_prod = sum(math.log(n) for n in widths[1:-1])
        spec = NetworkSpec.from_kappa(widths, varkappa * math.exp(-0.5 * log_prod), activation)
        return cls(spec, varkappa)

    @property
    def variance(self):
        """Per-unit output variance: varkappa^2, times 2^(1-d) for ReLU."""
        v = self.varkappa**2
        if self.base.activation == "relu":
            v *= 2.0 ** (1 - self.base.depth)
        return v


def _log_hidden_product(spec):
    return sum(math.log(n) for n in spec.hidden_widths)


def _radii(r):
    arr = np.asarray(r, dtype=float)
    if np.any(~(arr >= 0)) or np.any(~np.isfinite(arr)):
        raise DomainError("radii must be finite and >= 0")
    return arr


def gaussian_limit_density(ws: WidthScaledSpec, r):
    """Infinite-width density (2 pi v)^(-n_d/2) exp(-r^2 / 2v) at output radius r."""
    r = _radii(r)
    v = ws.variance
    nd = ws.base.out_width
    return (2 * math.pi * v) ** (-nd / 2) * np.exp(-(r**2) / (2 * v))


def fourth_cumulant_linear(ws: WidthScaledSpec) -> float:
    """Fourth cumulant of one output unit, 3 varkappa^4 (prod (n+2)/n - 1)."""
    if ws.base.activation != "linear":
        raise ConfigurationError("fourth_cumulant_linear needs a linear network")
    log_ratio = math.fsum(math.log1p(2 / n) for n in ws.base.hidden_widths)
    return 3 * ws.varkappa**4 * math.expm1(log_ratio)


def fourth_cumulant_cross(ws: WidthScaledSpec) -> float:
    """Mixed cumulant of two distinct output units, one third of the diagonal one."""
    return fourth_cumulant_linear(ws) / 3


# Published ReLU factor.  The exact ReLU fourth moment has excess kurtosis
# 5 sum 1/n (vs 2 sum 1/n for linear nets), which a factor of 5/8 matches.
RELU_FACTOR = 1.25
RELU_FACTOR_CUMULANT_MATCHED = 0.625


def edgeworth_coefficient(spec: NetworkSpec, relu_factor=RELU_FACTOR) -> float:
    """c * sum_l 1/n_l, with c = 1/4 for linear and ``relu_factor`` for ReLU networks."""
    c = 0.25 if spec.activation == "linear" else relu_factor
    return c * math.fsum(1 / n for n in spec.hidden_widths)


def edgeworth_density(ws: WidthScaledSpec, r, full_output=False, relu_factor=RELU_FACTOR):
    """First-order Edgeworth approximation to the output density.

    Gaussian envelope times 1 + a (u^2 - 2 (n_d + 2) u + n_d (n_d + 2)) with
    u = r^2 / v and ``a`` from :func:`edgeworth_coefficient`.  The
    correction integrates to zero, but the result can go negative for large
    r; values are returned unclipped.  With ``full_output`` a boolean mask
    of negative values is returned as well.  ``relu_factor`` replaces the
    published ReLU factor 5/4, e.g. by RELU_FACTOR_CUMULANT_MATCHED.
    """
    r = _radii(r)
    v = ws.variance
    nd = ws.base.out_width
    u = r**2 / v
    a = edgeworth_coefficient(ws.base, relu_factor)
    poly = u**2 - 2 * (nd + 2) * u + nd * (nd + 2)
    out = gaussian_limit_density(ws, r) * (1 + a * poly)
    if full_output:
        return out, np.asarray(out < 0)
    return out

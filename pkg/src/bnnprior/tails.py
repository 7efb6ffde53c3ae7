"""Tail heaviness from the growth of exact norm moments.

A variable is sub-Weibull with parameter theta when its root moments grow
like m^theta.  For depth-d networks theta = d/2, which is estimated here by
a log-log fit of (E|h|^m)^(1/m) against m.
"""

import math
from dataclasses import dataclass, field
from typing import Dict, Tuple

import numpy as np
from scipy import special

from .errors import ConfigurationError, DomainError
from .linear_prior import log_moment_norm_linear
from .network import NetworkSpec
from .relu_prior import log_layer_bracket, log_moment_norm_relu


@dataclass(frozen=True)
class TailEstimate:
    theta_hat: float
    fit_range: Tuple[int, int]
    residual: float
    n_points: int


def _log_moment(spec, m):
    if spec.activation == "relu":
        return log_moment_norm_relu(spec, m)
    return log_moment_norm_linear(spec, m)


def root_moment_curve(spec: NetworkSpec, orders):
    """Rows (m, (E|h|^m)^(1/m)) computed in log space."""
    orders = np.atleast_1d(np.asarray(orders, dtype=float))
    if np.any(~(orders > 0)):
        raise DomainError("moment orders must be positive")
    roots = np.array([math.exp(_log_moment(spec, m) / m) for m in orders])
    return np.column_stack((orders, roots))


def estimate_tail_parameter(spec: NetworkSpec, m_max: int = 400) -> TailEstimate:
    """Least-squares slope of ln root-moment vs ln m over orders m_max/2..m_max."""
    m_max = int(m_max)
    m_lo = max(1, int(math.ceil(m_max / 2)))
    orders = np.arange(m_lo, m_max + 1)
    if orders.size < 5:
        raise ConfigurationError(f"fit needs at least 5 orders, m_max={m_max} gives {orders.size}")
    log_m = np.log(orders)
    log_root = np.array([_log_moment(spec, m) / m for m in orders])
    coef, res, *_ = np.polyfit(log_m, log_root, 1, full=True)
    rms = math.sqrt(res[0] / orders.size) if res.size else 0.0
    return TailEstimate(
        theta_hat=float(coef[0]),
        fit_range=(int(orders[0]), int(orders[-1])),
        residual=rms,
        n_points=int(orders.size),
    )


@dataclass
class BoundsReport:
    """Per (layer index, order) outcome of the ReLU moment sandwich."""

    passed: bool
    results: Dict[Tuple[int, float], bool] = field(default_factory=dict)
    margins: Dict[Tuple[int, float], Tuple[float, float]] = field(default_factory=dict)


def relu_moment_bounds_check(spec: NetworkSpec, orders, bracket=None, rel_slack=1e-12):
    """Check the per-layer ReLU moment factor against its elementary bounds.

    For each hidden width n and order m,

        (1/2) (G((1+m)/2) / G(1/2))^(1/m) <= B(n, m)^(1/m) <= (G((n+m)/2) / G(n/2))^(1/m)

    where B(n, m) = 2^(-n) sum_k C(n, k) (k/2)^(rising m/2).  ``bracket`` may
    replace ln B by any callable (n, m) -> float, e.g. for negative controls.
    Comparisons are made in log space with relative slack ``rel_slack``.
    The lower bound fails for m < 1, so such orders raise DomainError.
    """
    if spec.activation != "relu":
        raise ConfigurationError("bounds check applies to ReLU networks")
    bracket = bracket or log_layer_bracket
    report = BoundsReport(passed=True)
    for layer, n in enumerate(spec.hidden_widths, start=1):
        for m in orders:
            m = float(m)
            if not m >= 1:
                raise DomainError("the lower bound needs orders m >= 1")
            log_b = bracket(n, m) / m
            lower = -math.log(2) + (special.gammaln((1 + m) / 2) - special.gammaln(0.5)) / m
            upper = (special.gammaln((n + m) / 2) - special.gammaln(n / 2)) / m
            slack = rel_slack * max(1.0, abs(log_b))
            ok = bool(lower - slack <= log_b <= upper + slack)
            report.results[(layer, m)] = ok
            report.margins[(layer, m)] = (float(log_b - lower), float(upper - log_b))
            report.passed &= ok
    return report

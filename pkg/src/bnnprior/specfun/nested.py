"""Real-space oracle for the density-family G-function.

    f_q(z; nu_1..nu_q) = int prod_j t_j^(nu_j - 1) e^(-t_j) dt_j  exp(-z / (t_1 ... t_q))

evaluated by the one-dimensional recursion

    f_0(z) = exp(-z),   f_k(z) = int_0^inf t^(nu_k - 1) e^(-t) f_{k-1}(z / t) dt.

With t = e^v every step is a convolution in log-space.  All levels are
tabulated on one uniform grid v = i*h, so the inner function is needed only
at grid nodes (memoised, no interpolation) and the whole nest costs O(q N^2)
for N nodes.  The trapezoid rule in v converges like exp(-pi^2 / h) because
the integrands are entire and decay double-exponentially; the step is halved
until two successive results agree.

Only exp is used, no Gamma functions, which keeps this independent of the
Mellin-Barnes evaluator it is meant to check.
"""

import math

import numpy as np

from ..errors import AccuracyError, DivergenceError, DomainError
from .config import DEFAULT_QUADRATURE

# exp(-745) underflows to zero in double precision
_LOG_UNDERFLOW = math.log(745.0)
_LOG_DROP = 50.0


def _factor_range(nu, right_extra=4.5):
    """Support of w(v) = exp(nu v - e^v) outside which it is < peak * e^-50."""
    hi = math.log(abs(nu) + 1.0) + right_extra
    if nu > 0:
        peak = nu * math.log(nu) - nu
        lo = (min(peak, 0.0) - _LOG_DROP) / nu
    else:
        lo = -math.inf
    return lo, hi


def _log_weight_table(nus, z_min, h):
    """Convolved log-grid weights; returns (index offset, scaled weights, log scale)."""
    ranges = [_factor_range(nu) for nu in nus]
    hi_total = sum(r[1] for r in ranges)
    if z_min > 0:
        x_lo = math.log(z_min) - _LOG_UNDERFLOW - 1.0
    else:
        x_lo = -math.inf
    table = np.ones(1)
    offset = 0
    log_scale = 0.0
    for nu, (lo, hi) in zip(nus, ranges):
        lo = max(lo, x_lo - (hi_total - hi))
        if not math.isfinite(lo):
            raise DivergenceError("f_q diverges at z = 0 when some nu <= 0", point=0.0)
        i_lo = math.floor(lo / h)
        i_hi = math.ceil(hi / h)
        v = h * np.arange(i_lo, i_hi + 1)
        logw = nu * v - np.exp(v)
        peak = logw.max()
        table = np.convolve(table, np.exp(logw - peak))
        offset += i_lo
        log_scale += peak
        # renormalise to keep the running product O(1)
        top = table.max()
        table /= top
        log_scale += math.log(top)
    return offset, table, log_scale


def _evaluate(z, nus, h):
    z_pos = z[z > 0]
    z_min = z_pos.min() if z_pos.size else 0.0
    if np.any(z == 0):
        z_min = 0.0
    offset, table, log_scale = _log_weight_table(nus, z_min, h)
    x = h * (offset + np.arange(table.size))
    # f(z) = h^q e^{log_scale} sum_s W_s exp(-z e^{-x_s})
    kernel = np.exp(-np.outer(z, np.exp(-x)))
    vals = kernel @ table
    log_vals = np.log(vals) + log_scale + len(nus) * math.log(h)
    return log_vals


def log_f_q_nested(z, nus, cfg=None, full_output=False):
    """ln f_q(z; nu).  See :func:`f_q_nested`."""
    cfg = cfg or DEFAULT_QUADRATURE
    nus = tuple(float(n) for n in nus)
    z_arr = np.asarray(z, dtype=float)
    if np.any(~(z_arr >= 0)) or np.any(~np.isfinite(z_arr)):
        raise DomainError("f_q_nested needs finite z >= 0")
    flat = np.atleast_1d(z_arr).ravel()
    if np.any(flat == 0) and any(nu <= 0 for nu in nus):
        raise DivergenceError("f_q diverges at z = 0 when some nu <= 0", point=0.0)
    if not nus:
        out = -flat
        err = np.zeros_like(flat)
    else:
        h = 0.4
        prev = _evaluate(flat, nus, h)
        for _ in range(6):
            h /= 2
            out = _evaluate(flat, nus, h)
            err = np.abs(np.expm1(out - prev))
            if np.all(err <= cfg.rel_tol):
                break
            prev = out
        else:
            raise AccuracyError(
                "nested quadrature did not converge",
                best_estimate=np.exp(out),
                error_estimate=err,
            )
    out = out.reshape(z_arr.shape)
    value = out if z_arr.ndim else float(out)
    if full_output:
        return value, err.reshape(z_arr.shape)
    return value


def f_q_nested(z, nus, cfg=None, full_output=False):
    """f_q(z; nu_1..nu_q) = G^{q+1,0}_{0,q+1}(z | - ; 0, nu_1..nu_q) by nested quadrature.

    ``q = len(nus)``; ``q = 0`` gives exp(-z).  At z = 0 the value is
    prod Gamma(nu_j), finite only when every nu_j > 0 (otherwise
    :class:`DivergenceError`).  ``full_output`` adds the relative change
    between the last two refinements.
    """
    res = log_f_q_nested(z, nus, cfg, full_output)
    if full_output:
        lv, err = res
        return np.exp(lv), err
    return np.exp(res)

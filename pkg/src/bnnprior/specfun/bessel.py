"""Modified Bessel function of the second kind, K_nu(x)."""

import math

import numpy as np
from scipy import integrate, special

from ..errors import DomainError


def _log_k_integral(nu, x):
    """ln K_nu(x) from K_nu(x) = int_0^inf exp(-x cosh t) cosh(nu t) dt.

    Used where the scaled library routine over- or underflows.  The
    integrand is evaluated relative to its peak so no overflow can occur.
    """
    nu = abs(nu)
    # peak of -x cosh t + nu t (large-nu regime); t = 0 when nu <= x
    t_star = math.asinh(nu / x) if nu > 0 else 0.0

    def log_f(t):
        # log cosh(nu t) = nu t + log1p(exp(-2 nu t)) - log 2
        return -x * math.cosh(t) + nu * t + math.log1p(math.exp(-2 * nu * t)) - math.log(2)

    peak = log_f(t_star)
    width = 1.0 / math.sqrt(x * math.cosh(t_star) + 1e-300)
    upper = t_star + 40 * width + 1.0
    val, _ = integrate.quad(
        lambda t: math.exp(log_f(t) - peak),
        0.0,
        upper,
        points=[t_star] if 0 < t_star < upper else None,
        epsabs=0.0,
        epsrel=1e-13,
        limit=400,
    )
    return peak + math.log(val)


def log_bessel_k(nu, x):
    """ln K_nu(x) for x > 0, finite even where K itself over/underflows."""
    nu_arr, x_arr = np.broadcast_arrays(np.abs(np.asarray(nu, float)), np.asarray(x, float))
    if np.any(~(x_arr > 0)):
        raise DomainError("bessel_k requires x > 0")
    with np.errstate(divide="ignore", over="ignore"):
        scaled = special.kve(nu_arr, x_arr)
        out = np.log(scaled) - x_arr
    bad = ~np.isfinite(out) | ~(scaled > np.finfo(float).tiny)
    if np.any(bad):
        out = np.array(out, dtype=float)
        for idx in zip(*np.nonzero(bad)) if out.ndim else [()]:
            out[idx] = _log_k_integral(float(nu_arr[idx]), float(x_arr[idx]))
    return float(out) if np.ndim(out) == 0 else out


def bessel_k(nu, x, full_output=False):
    """K_nu(x) for real order and x > 0.

    K is even in the order.  For very large x the value underflows to 0.0;
    with ``full_output=True`` a second return value flags where that (or
    overflow to inf at tiny x and large order) happened.  Use
    :func:`log_bessel_k` when the magnitude itself is needed.
    """
    nu_arr, x_arr = np.broadcast_arrays(np.abs(np.asarray(nu, float)), np.asarray(x, float))
    if np.any(~(x_arr > 0)):
        raise DomainError("bessel_k requires x > 0")
    with np.errstate(over="ignore", under="ignore"):
        val = special.kve(nu_arr, x_arr) * np.exp(-x_arr)
    flag = (val == 0) | ~np.isfinite(val)
    if np.ndim(val) == 0:
        val, flag = float(val), bool(flag)
    return (val, flag) if full_output else val

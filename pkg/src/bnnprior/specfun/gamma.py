"""Real and complex log-gamma."""

import numpy as np
from scipy import special

from ..errors import DomainError, PoleError


def log_gamma(x):
    """ln Γ(x) for x > 0 (scalar or array)."""
    arr = np.asarray(x, dtype=float)
    if np.any(~(arr > 0)):
        raise DomainError("log_gamma is defined here for x > 0 only")
    out = special.gammaln(arr)
    return float(out) if out.ndim == 0 else out


def log_gamma_complex(z):
    """Principal branch of ln Γ(z) for complex z off the poles.

    The reflection formula is applied internally for Re z < 0.5, so the
    result is accurate far into the left half-plane.
    """
    arr = np.asarray(z, dtype=complex)
    on_pole = (arr.imag == 0) & (arr.real <= 0) & (arr.real == np.round(arr.real))
    if np.any(on_pole):
        raise PoleError("log_gamma_complex evaluated on a pole of Gamma")
    out = special.loggamma(arr)
    return complex(out) if out.ndim == 0 else out


def log_rising_factorial(a, b):
    """ln of the rising factorial a^(b) = Γ(a + b) / Γ(a), for a > 0, a + b > 0."""
    return special.gammaln(np.add(a, b)) - special.gammaln(a)

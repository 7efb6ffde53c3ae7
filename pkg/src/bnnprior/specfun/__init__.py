"""Special functions and integration kernels used by the prior evaluators."""

from .bessel import bessel_k, log_bessel_k
from .config import (
    DEFAULT_CONTOUR,
    DEFAULT_QUADRATURE,
    ContourConfig,
    QuadratureConfig,
)
from .gamma import log_gamma, log_gamma_complex, log_rising_factorial
from .hankel import bessel_j_zeros, hankel_radial, wynn_epsilon
from .meijer import (
    ContourResult,
    MellinSpectrum,
    log_meijer_g_1q,
    log_meijer_g_q0,
    meijer_g_1q,
    meijer_g_q0,
)
from .nested import f_q_nested, log_f_q_nested
from .quadrature import radial_integral, sphere_area, vquad

__all__ = [
    "ContourConfig",
    "ContourResult",
    "DEFAULT_CONTOUR",
    "DEFAULT_QUADRATURE",
    "MellinSpectrum",
    "QuadratureConfig",
    "bessel_j_zeros",
    "bessel_k",
    "f_q_nested",
    "hankel_radial",
    "log_bessel_k",
    "log_f_q_nested",
    "log_gamma",
    "log_gamma_complex",
    "log_meijer_g_1q",
    "log_meijer_g_q0",
    "log_rising_factorial",
    "meijer_g_1q",
    "meijer_g_q0",
    "radial_integral",
    "sphere_area",
    "vquad",
    "wynn_epsilon",
]

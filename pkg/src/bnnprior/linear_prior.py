"""Exact output prior of a deep linear network for a single input.

For widths n_1..n_d, overall scale kappa = sigma_1...sigma_d |x| and
nu_l = (n_l - n_d)/2 the output h in R^{n_d} has radial density

    p(r) = g (2^d pi kappa^2)^(-n_d/2) G^{d,0}_{0,d}(r^2 / (2^d kappa^2) | 0, nu_1..nu_{d-1})

with g = prod_{l<d} 1/Gamma(n_l/2), and characteristic function

    phi(q) = g G^{1,d-1}_{d-1,1}(2^(d-2) kappa^2 q^2 | 1 - n_1/2, ..., 1 - n_{d-1}/2 ; 0).

Depth one is Gaussian and depth two reduces to a Bessel-K density.
"""

import math
from dataclasses import dataclass
from fractions import Fraction

import numpy as np
from scipy import special

from .errors import ConfigurationError, DivergenceError, DomainError
from .network import NetworkSpec
from .specfun import (
    MellinSpectrum,
    log_bessel_k,
    log_meijer_g_1q,
    log_meijer_g_q0,
)

_LOG2 = math.log(2.0)
_LOGPI = math.log(math.pi)
# even orders up to this use exact rational arithmetic
_EXACT_MAX_ORDER = 200


@dataclass(frozen=True)
class PriorConstants:
    kappa: float
    log_gamma_norm: float

    @property
    def gamma_norm(self):
        return math.exp(self.log_gamma_norm)


def prior_constants(spec: NetworkSpec) -> PriorConstants:
    """Overall scale kappa and ln of g = prod_{l<d} 1/Gamma(n_l/2)."""
    log_g = -math.fsum(math.lgamma(n / 2) for n in spec.hidden_widths)
    return PriorConstants(kappa=spec.kappa, log_gamma_norm=log_g)


def diverges_at_origin(spec: NetworkSpec) -> bool:
    """True when the density is infinite at r = 0 (some hidden width <= n_d)."""
    return bool(spec.hidden_widths) and min(spec.hidden_widths) <= spec.out_width


def _require(spec, activation="linear"):
    if spec.activation != activation:
        raise ConfigurationError(f"expected a {activation} network, got {spec.activation}")


def _radii(r):
    arr = np.asarray(r, dtype=float)
    if np.any(~(arr >= 0)) or np.any(~np.isfinite(arr)):
        raise DomainError("radii must be finite and >= 0")
    return arr


def _finish(arr_like, shape):
    out = np.asarray(arr_like, dtype=float).reshape(shape)
    return out if out.ndim else float(out)


def _log_density_two_layer(n1, n2, log_kappa, r):
    nu = (n1 - n2) / 2
    kappa = math.exp(log_kappa)
    out = np.empty_like(r)
    const = -(n2 / 2) * (math.log(4 * math.pi) + 2 * log_kappa) - math.lgamma(n1 / 2)
    pos = r > 0
    if np.any(~pos):
        if nu <= 0:
            raise DivergenceError("density diverges at the origin", point=0.0)
        # (x/2)^nu K_nu(x) -> Gamma(nu)/2
        out[~pos] = const + math.lgamma(nu)
    x = r[pos] / kappa
    out[pos] = const + _LOG2 + nu * np.log(x / 2) + log_bessel_k(nu, x)
    return out


def log_density_linear(spec: NetworkSpec, r, cfg=None, method="auto"):
    """ln p(r) of the output radius.  See :func:`density_linear`."""
    _require(spec)
    if method not in ("auto", "contour"):
        raise ConfigurationError("method must be 'auto' or 'contour'")
    r_arr = _radii(r)
    flat = np.atleast_1d(r_arr).ravel()
    d, nd = spec.depth, spec.out_width
    lk = spec.log_kappa
    if method == "contour" and d <= 2:
        # skip the closed forms; used to cross-check the contour evaluator
        d_branch = 3
    else:
        d_branch = d
    if d_branch == 1:
        out = -(nd / 2) * (_LOG2 + _LOGPI + 2 * lk) - flat**2 / (2 * math.exp(2 * lk))
    elif d_branch == 2:
        out = _log_density_two_layer(spec.hidden_widths[0], nd, lk, flat)
    else:
        if np.any(flat == 0) and diverges_at_origin(spec):
            raise DivergenceError("density diverges at the origin", point=0.0)
        consts = prior_constants(spec)
        spectrum = MellinSpectrum.density(spec.hidden_widths, nd)
        with np.errstate(divide="ignore"):
            z = np.exp(2 * np.log(flat) - d * _LOG2 - 2 * lk)
        logg = np.atleast_1d(log_meijer_g_q0(z, spectrum, cfg))
        out = consts.log_gamma_norm - (nd / 2) * (d * _LOG2 + _LOGPI + 2 * lk) + logg
    return _finish(out, r_arr.shape)


def density_linear(spec: NetworkSpec, r, cfg=None, method="auto"):
    """Radial density of the output preactivations of a linear network.

    ``r`` is the Euclidean norm of the n_d-dimensional output; the value is
    the joint density p(h) at any h with |h| = r (not the density of |h|).

    Raises :class:`DivergenceError` if r = 0 is requested and some hidden
    width is <= the output width; :func:`diverges_at_origin` tells in advance.
    ``method="contour"`` bypasses the depth-one and depth-two closed forms.
    """
    return np.exp(log_density_linear(spec, r, cfg, method))


def density_two_layer(spec: NetworkSpec, r):
    """Bessel-K closed form of the depth-two density.

    (4 pi k^2)^(-n2/2) (2 / Gamma(n1/2)) (r / 2k)^nu K_nu(r/k), nu = (n1 - n2)/2.
    """
    _require(spec)
    if spec.depth != 2:
        raise ConfigurationError("density_two_layer needs a depth-two network")
    r_arr = _radii(r)
    out = _log_density_two_layer(
        spec.hidden_widths[0], spec.out_width, spec.log_kappa, np.atleast_1d(r_arr).ravel()
    )
    return np.exp(_finish(out, r_arr.shape))


def charfun_linear(spec: NetworkSpec, q, cfg=None):
    """Radial characteristic function E exp(i q.h) as a function of |q|.

    Equals 1 at q = 0 and decreases monotonically.  Depth one gives
    exp(-k^2 q^2 / 2), depth two (1 + k^2 q^2)^(-n_1/2).
    """
    _require(spec)
    q_arr = _radii(q)
    flat = np.atleast_1d(q_arr).ravel()
    d = spec.depth
    lk = spec.log_kappa
    if d == 1:
        out = np.exp(-0.5 * (math.exp(lk) * flat) ** 2)
    elif d == 2:
        out = np.exp(-(spec.hidden_widths[0] / 2) * np.log1p((math.exp(lk) * flat) ** 2))
    else:
        consts = prior_constants(spec)
        spectrum = MellinSpectrum.charfun(spec.hidden_widths)
        with np.errstate(divide="ignore"):
            z = np.exp((d - 2) * _LOG2 + 2 * lk + 2 * np.log(flat))
        logg = np.atleast_1d(log_meijer_g_1q(z, spectrum, cfg))
        out = np.exp(np.minimum(consts.log_gamma_norm + logg, 0.0))
        out[flat == 0] = 1.0
    return _finish(out, q_arr.shape)


def _exact_order(m):
    return float(m).is_integer() and m % 2 == 0 and 0 <= m <= _EXACT_MAX_ORDER


def _even_rising(n, k):
    """prod_{j<k} (n + 2j) = 2^k (n/2)^(rising k), an integer."""
    return math.prod(n + 2 * j for j in range(k))


def _scaled_moment(factor: Fraction, log_factor: float, m, log_kappa):
    """factor * kappa^m, exactly rounded when possible."""
    if log_factor < 700 and log_factor > -700:
        kappa_m = math.exp(m * log_kappa) if log_kappa else 1.0
        val = float(factor) * kappa_m
        if val != 0 and math.isfinite(val):
            return val
    return math.exp(log_factor + m * log_kappa)


def _check_order(m):
    if not (m >= 0 and math.isfinite(m)):
        raise DomainError("moment order must be finite and >= 0")


def log_moment_norm_linear(spec: NetworkSpec, m) -> float:
    """ln E|h|^m for a linear network."""
    _require(spec)
    _check_order(m)
    d = spec.depth
    widths = spec.widths[1:]
    return (d * m / 2) * _LOG2 + m * spec.log_kappa + math.fsum(
        special.gammaln(n / 2 + m / 2) - special.gammaln(n / 2) for n in widths
    )


def moment_norm_linear(spec: NetworkSpec, m) -> float:
    """E|h|^m = 2^(dm/2) kappa^m prod_{l=1}^{d} (n_l/2)^(rising m/2).

    Even integer orders are computed with exact integer arithmetic, so for
    instance the second moment is kappa^2 n_1 ... n_d to the last bit.
    """
    _require(spec)
    _check_order(m)
    if m == 0:
        return 1.0
    if _exact_order(m):
        k = int(m) // 2
        factor = Fraction(math.prod(_even_rising(n, k) for n in spec.widths[1:]))
        log_factor = math.log(factor.numerator) - math.log(factor.denominator)
        return _scaled_moment(factor, log_factor, m, spec.log_kappa)
    return math.exp(log_moment_norm_linear(spec, m))


def marginal_density_1d(spec: NetworkSpec, h, cfg=None):
    """Density of a single output coordinate, symmetric in h.

    Any subset of outputs of a network has the prior of the same network
    with the output layer narrowed, so this is the n_d = 1 radial density at |h|.
    """
    h = np.asarray(h, dtype=float)
    return density_linear(spec.with_out_width(1), np.abs(h), cfg)


def radius_grid(spec: NetworkSpec, num=200, r_min=1e-3, moment_fn=None):
    """Geometric radius grid on [r_min, r_max] for plotting.

    r_max = sqrt(E r^2 + 10 sd(r^2)) from the second and fourth moments.
    """
    moment_fn = moment_fn or moment_norm_linear
    m2 = moment_fn(spec, 2)
    m4 = moment_fn(spec, 4)
    sd = math.sqrt(max(m4 - m2 * m2, 0.0))
    r_max = math.sqrt(m2 + 10 * sd)
    return np.geomspace(r_min, max(r_max, 10 * r_min), num)

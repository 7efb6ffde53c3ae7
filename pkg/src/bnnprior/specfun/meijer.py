"""Mellin-Barnes evaluation of the two Meijer G families used by the priors.

Density family::

    G^{q,0}_{0,q}(z | - ; b_1..b_q)
        = 1/(2 pi i) int_{c - i inf}^{c + i inf} z^s prod_j Gamma(b_j - s) ds,   c < min b

Characteristic-function family::

    G^{1,q}_{q,1}(z | a_1..a_q ; 0)
        = 1/(2 pi i) int z^s Gamma(-s) prod_k Gamma(1 - a_k + s) ds,   -min(1 - a) < c < 0

Both integrals are taken along a straight vertical line with the trapezoid
rule.  Gamma products are summed in log space and the value of the
integrand at the abscissa (its maximum modulus on the line) is factored out,
so parameters of size ~500 do not overflow.  The abscissa defaults to the
real saddle point of the integrand, which removes the cancellation that
would otherwise destroy relative accuracy in the far tails.
"""

from dataclasses import dataclass, field
from typing import Tuple

import numpy as np
from scipy import special

from ..errors import AccuracyError, ConfigurationError, DivergenceError, DomainError
from .config import DEFAULT_CONTOUR, ContourConfig

_EPS = np.finfo(float).eps
# closest approach to a pole is this over |ln z|: nearer costs nodes, farther costs cancellation
_POLE_FLOOR = 2.5


@dataclass(frozen=True)
class MellinSpectrum:
    """Gamma-function shifts of a G-function.

    ``lower_params`` are the b_j, ``upper_params`` the a_k.  The density family
    has no upper parameters; the characteristic-function family has
    ``lower_params == (0,)``.
    """

    lower_params: Tuple[float, ...]
    upper_params: Tuple[float, ...] = field(default=())

    def __post_init__(self):
        object.__setattr__(self, "lower_params", tuple(float(b) for b in self.lower_params))
        object.__setattr__(self, "upper_params", tuple(float(a) for a in self.upper_params))
        if not self.lower_params:
            raise ConfigurationError("a spectrum needs at least one lower parameter")

    @classmethod
    def density(cls, hidden_widths, out_width):
        """b = (0, (n_1 - n_d)/2, ..., (n_{d-1} - n_d)/2)."""
        return cls((0.0,) + tuple((n - out_width) / 2 for n in hidden_widths))

    @classmethod
    def charfun(cls, hidden_widths):
        """a = (1 - n_1/2, ..., 1 - n_{d-1}/2), b = (0,)."""
        return cls((0.0,), tuple(1 - n / 2 for n in hidden_widths))

    @property
    def is_density_family(self):
        return not self.upper_params

    @property
    def is_charfun_family(self):
        return bool(self.upper_params) and self.lower_params == (0.0,)


@dataclass(frozen=True)
class ContourResult:
    """Value of a contour integral with its diagnostics.

    ``log_value`` is finite even when ``value`` over- or underflows.
    """

    value: np.ndarray
    log_value: np.ndarray
    error_estimate: np.ndarray
    abscissa: np.ndarray
    width: np.ndarray
    step: float
    truncation: float
    n_points: int


# ---------------------------------------------------------------------------
# integrand pieces; s may be complex, arrays broadcast against each other


def _density_log_gamma(b, s):
    out = 0
    for bj in b:
        out = out + special.loggamma(bj - s)
    return out


def _density_dlog(b, c):
    return -sum(special.digamma(bj - c) for bj in b)


def _density_d2log(b, c):
    return sum(special.polygamma(1, bj - c) for bj in b)


def _charfun_log_gamma(alpha, s):
    out = special.loggamma(-s)
    for ak in alpha:
        out = out + special.loggamma(ak + s)
    return out


def _charfun_dlog(alpha, c):
    return -special.digamma(-c) + sum(special.digamma(ak + c) for ak in alpha)


def _charfun_d2log(alpha, c):
    return special.polygamma(1, -c) + sum(special.polygamma(1, ak + c) for ak in alpha)


def _bisect(fun, lo, hi, iters=80):
    """Vectorised bisection for an increasing function with fun(lo) < 0 < fun(hi)."""
    lo = np.array(lo, dtype=float)
    hi = np.array(hi, dtype=float)
    for _ in range(iters):
        mid = 0.5 * (lo + hi)
        pos = fun(mid) > 0
        hi = np.where(pos, mid, hi)
        lo = np.where(pos, lo, mid)
    return 0.5 * (lo + hi)


def _density_abscissa(b, logz, margin):
    """Saddle of c ln z + sum ln Gamma(b_j - c) for c < min b, kept at least min(margin, _POLE_FLOOR/|ln z|) left of it."""
    bmin = min(b)

    # in y = bmin - c > 0 the derivative sum psi(b_j - c) - ln z increases
    def slope_for(lz):
        return lambda log_y: sum(special.digamma(bj - bmin + np.exp(log_y)) for bj in b) - lz

    # for tiny z the saddle approaches the pole like (multiplicity) / |ln z|
    y = np.minimum(margin, _POLE_FLOOR / np.maximum(np.abs(logz), 1.0))
    need = slope_for(logz)(np.log(y)) < 0
    if np.any(need):
        lz = logz[need]
        lo = np.log(y[need])
        hi = lo.copy()
        slope = slope_for(lz)
        while True:
            hi = np.where(slope(hi) > 0, hi, hi + 2.0)
            if np.all(slope(hi) > 0):
                break
        y[need] = np.exp(_bisect(slope, lo, hi))
    return bmin - y


def _charfun_abscissa(alpha, logz, margin):
    amin = min(alpha)
    # as with the density family, the saddle nears a pole like 1/|ln z|
    m = np.minimum(min(margin, amin / 4), _POLE_FLOOR / np.maximum(np.abs(logz), 1.0))
    lo = -amin + m
    hi = -m

    def slope(c):
        return logz + _charfun_dlog(alpha, c)

    c = _bisect(slope, lo, hi)
    # the bisection converges to an endpoint when the saddle is outside the window
    return np.clip(c, -amin + m, -m)


def _trapezoid(log_gamma_part, logz, c, width, cfg):
    """Adaptive trapezoid rule along s = c + i*width*tau, refined per argument.

    Arguments whose integrand is so large in magnitude that the log-gamma
    sums lose all precision are only accepted when the value provably
    underflows double precision; they are then returned as exact zeros.
    """
    logz = np.asarray(logz, float)
    L0 = c * logz + np.real(log_gamma_part(c + 0j))
    # absolute rounding error of the log-integrand, from cancellation
    log_noise = 16 * _EPS * (np.abs(L0) + np.abs(c * logz) + 1.0)
    log_tol = np.log(cfg.target_rel_tol)
    n_z = logz.size
    log_value = np.empty(n_z)
    err_out = np.zeros(n_z)

    lost = log_noise > 1e-3
    underflow = lost & (L0 + np.log(width) < -2000)
    if np.any(lost & ~underflow):
        raise AccuracyError(
            "argument too extreme for double-precision contour evaluation",
            best_estimate=np.where(lost, np.nan, 0.0),
        )
    log_value[underflow] = -np.inf

    def log_integrand(idx, tau):
        t = width[idx, None] * tau[None, :]
        s = c[idx, None] + 1j * t
        return s * logz[idx, None] + log_gamma_part(s) - L0[idx, None]

    T_max = 0.0
    h_min = np.inf
    npts = 0
    groups = {}
    active = np.nonzero(~underflow)[0]
    # truncation per argument: the modulus decreases monotonically along the line
    T = np.full(active.size, float(cfg.truncation))
    for _ in range(40):
        short = np.zeros(active.size, bool)
        if active.size:
            t = width[active] * T
            s_end = c[active] + 1j * t
            tail = np.real(s_end * logz[active] + log_gamma_part(s_end)) - L0[active]
            short = tail >= log_tol - 6
        if not np.any(short):
            break
        T = np.where(short, 2 * T, T)
    else:
        raise AccuracyError("integrand does not decay along the contour")

    def tail_ok(T_try):
        s_end = c[active] + 1j * width[active] * T_try
        return np.real(s_end * logz[active] + log_gamma_part(s_end)) - L0[active] < log_tol - 6

    # doubling can overshoot by 2x; pull T back on a coarse grid
    if active.size:
        lo = np.where(T > cfg.truncation, T / 2, T)
        for _ in range(3):
            mid = 0.5 * (lo + T)
            ok = tail_ok(mid)
            T = np.where(ok, mid, T)
            lo = np.where(ok, lo, mid)
    for Ti in np.unique(T):
        groups[float(Ti)] = active[T == Ti]

    for Ti, members in sorted(groups.items()):
        T_max = max(T_max, Ti)
        pending = np.asarray(members)

        def partial(idx, h, odd_only):
            n = int(np.ceil(Ti / h))
            k = np.arange(1, n + 1, 2) if odd_only else np.arange(1, n + 1)
            vals = np.exp(log_integrand(idx, k * h))
            return vals.real.sum(axis=1), np.abs(vals).sum(axis=1), len(k)

        h = float(cfg.step)
        body, mag, n_new = partial(pending, h, False)
        npts += n_new
        total = 0.5 + body  # the tau = 0 node is exactly 1 after scaling
        mags = 0.5 + mag
        estimate = h * total
        for _ in range(cfg.max_refinements):
            h /= 2
            body, mag, n_new = partial(pending, h, True)
            npts += n_new
            total = total + body
            mags = mags + mag
            new = h * total
            noise = (64 * _EPS + log_noise[pending]) * h * mags
            err = np.abs(new - estimate)
            estimate = new
            # halving h squares the relative error of an analytic strip integrand,
            # so the difference to the coarser estimate bounds the finer one
            predicted = (err / np.abs(new)) ** 2
            done = (err <= cfg.target_rel_tol * np.abs(new) + noise) | (
                predicted <= 1e-2 * cfg.target_rel_tol
            )
            bad_sign = done & ~(new > 0)
            if np.any(bad_sign):
                raise AccuracyError(
                    "Mellin-Barnes trapezoid produced a non-positive value",
                    best_estimate=np.exp(L0[pending]) * new * width[pending] / np.pi,
                )
            cancelled = done & (64 * _EPS * mags > 1e-6 * np.abs(new))
            if np.any(cancelled):
                raise AccuracyError(
                    "cancellation along the contour exceeds 1e-6 relative",
                    best_estimate=np.exp(L0[pending]) * new * width[pending] / np.pi,
                )
            if np.any(done):
                ids = pending[done]
                scale = width[ids] / np.pi
                log_value[ids] = L0[ids] + np.log(new[done] * scale)
                reported = np.minimum(err, predicted * np.abs(new) + noise)[done]
                err_out[ids] = np.exp(L0[ids]) * reported * scale
                keep = ~done
                pending, total, mags, estimate = (
                    pending[keep], total[keep], mags[keep], estimate[keep]
                )
            h_min = min(h_min, h)
            if not pending.size:
                break
        else:
            scale = width[pending] / np.pi
            raise AccuracyError(
                "Mellin-Barnes trapezoid did not reach the target tolerance",
                best_estimate=np.exp(L0[pending]) * estimate * scale,
                error_estimate=np.exp(L0[pending]) * err[~done] * scale,
            )
    return log_value, err_out, T_max, h_min, npts


def _check_z(z):
    z = np.asarray(z, dtype=float)
    if np.any(~(z >= 0)) or np.any(~np.isfinite(z)):
        raise DomainError("G-function argument must be finite and >= 0")
    return z


def _density_at_zero(b):
    """Limit z -> 0+ of G^{q,0}_{0,q}(z | b)."""
    bmin = min(b)
    if bmin > 0:
        return -np.inf
    ties = sum(1 for bj in b if bj == bmin)
    if bmin < 0 or ties > 1:
        raise DivergenceError("G^{q,0}_{0,q} diverges at z = 0 for these parameters", point=0.0)
    return float(sum(special.gammaln(bj) for bj in b if bj != bmin))


def log_meijer_g_q0(z, spectrum, cfg=None, full_output=False):
    """ln G^{q,0}_{0,q}(z | - ; b) for z >= 0.  See :func:`meijer_g_q0`."""
    cfg = cfg or DEFAULT_CONTOUR
    if not spectrum.is_density_family:
        raise ConfigurationError("meijer_g_q0 needs a spectrum without upper parameters")
    b = spectrum.lower_params
    z = _check_z(z)
    flat = np.atleast_1d(z).ravel()
    out = np.empty_like(flat)
    pos = flat > 0
    if np.any(~pos):
        out[~pos] = _density_at_zero(b)
    result = None
    if np.any(pos):
        logz = np.log(flat[pos])
        if cfg.abscissa is None:
            c = _density_abscissa(b, logz, cfg.pole_margin)
        else:
            if not cfg.abscissa < min(b):
                raise ConfigurationError(
                    f"abscissa {cfg.abscissa} must lie left of every pole (min b = {min(b)})"
                )
            c = np.full_like(logz, cfg.abscissa)
        width = 1.0 / np.sqrt(_density_d2log(b, c))
        lv, err, T, h, npts = _trapezoid(lambda s: _density_log_gamma(b, s), logz, c, width, cfg)
        out[pos] = lv
        result = (err, c, width, T, h, npts)
    out = out.reshape(np.shape(z))
    value = out if np.ndim(z) else float(out)
    if not full_output:
        return value
    return value, _diagnostics(z, out, pos, result)


def _diagnostics(z, log_out, pos, result):
    shape = np.shape(z)
    err = np.zeros(pos.shape)
    c = np.full(pos.shape, np.nan)
    width = np.full(pos.shape, np.nan)
    T = h = np.nan
    npts = 0
    if result is not None:
        e, cc, w, T, h, npts = result
        err[pos], c[pos], width[pos] = e, cc, w
    return ContourResult(
        value=np.exp(log_out),
        log_value=log_out,
        error_estimate=err.reshape(shape),
        abscissa=c.reshape(shape),
        width=width.reshape(shape),
        step=h,
        truncation=T,
        n_points=npts,
    )


def meijer_g_q0(z, spectrum, cfg=None, full_output=False):
    """G^{q,0}_{0,q}(z | - ; b_1..b_q) by vertical-contour trapezoid integration.

    Parameters
    ----------
    z : float or array_like
        Argument(s), z >= 0.  At z = 0 the finite limit is returned, or
        :class:`DivergenceError` raised when the smallest b is negative or
        repeated.
    spectrum : MellinSpectrum
        Density-family spectrum (no upper parameters).
    cfg : ContourConfig, optional
    full_output : bool
        Also return a :class:`ContourResult` with error estimates.

    Raises
    ------
    ConfigurationError
        A fixed abscissa that does not separate the poles.
    AccuracyError
        Target tolerance not met; carries the best estimate.
    """
    res = log_meijer_g_q0(z, spectrum, cfg, full_output)
    if full_output:
        lv, diag = res
        return np.exp(lv), diag
    return np.exp(res)


def log_meijer_g_1q(z, spectrum, cfg=None, full_output=False):
    """ln G^{1,q}_{q,1}(z | a ; 0) for z >= 0.  See :func:`meijer_g_1q`."""
    cfg = cfg or DEFAULT_CONTOUR
    if not spectrum.is_charfun_family:
        raise ConfigurationError("meijer_g_1q needs lower_params == (0,) and upper params")
    alpha = tuple(1 - a for a in spectrum.upper_params)
    if min(alpha) <= 0:
        raise ConfigurationError("upper parameters must satisfy a_k < 1 to separate the poles")
    z = _check_z(z)
    flat = np.atleast_1d(z).ravel()
    out = np.empty_like(flat)
    pos = flat > 0
    out[~pos] = sum(special.gammaln(ak) for ak in alpha)
    result = None
    if np.any(pos):
        logz = np.log(flat[pos])
        if cfg.abscissa is None:
            c = _charfun_abscissa(alpha, logz, cfg.pole_margin)
        else:
            if not -min(alpha) < cfg.abscissa < 0:
                raise ConfigurationError(
                    f"abscissa {cfg.abscissa} must lie in ({-min(alpha)}, 0)"
                )
            c = np.full_like(logz, cfg.abscissa)
        width = 1.0 / np.sqrt(_charfun_d2log(alpha, c))
        lv, err, T, h, npts = _trapezoid(lambda s: _charfun_log_gamma(alpha, s), logz, c, width, cfg)
        out[pos] = lv
        result = (err, c, width, T, h, npts)
    out = out.reshape(np.shape(z))
    value = out if np.ndim(z) else float(out)
    if not full_output:
        return value
    return value, _diagnostics(z, out, pos, result)


def meijer_g_1q(z, spectrum, cfg=None, full_output=False):
    """G^{1,q}_{q,1}(z | a_1..a_q ; 0) by vertical-contour trapezoid integration.

    The contour runs between the poles of Gamma(-s) (s = 0, 1, ...) and those
    of Gamma(1 - a_k + s).  At z = 0 the value is prod_k Gamma(1 - a_k).
    """
    res = log_meijer_g_1q(z, spectrum, cfg, full_output)
    if full_output:
        lv, diag = res
        return np.exp(lv), diag
    return np.exp(res)

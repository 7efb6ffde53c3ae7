"""Vectorised adaptive Gauss-Legendre quadrature and radial integrals."""

import math

import numpy as np
from scipy import special

from ..errors import AccuracyError, IntegrabilityError
from .config import DEFAULT_QUADRATURE

_GL_X, _GL_W = np.polynomial.legendre.leggauss(20)


def _gl(f, a, b, p):
    mid = 0.5 * (a + b)
    half = 0.5 * (b - a)
    x = mid[:, None] + half[:, None] * _GL_X[None, :]
    vals = f(x, np.broadcast_to(p[:, None], x.shape))
    return half * (vals @ _GL_W)


def vquad(f, a, b, params=None, rel_tol=1e-10, abs_tol=0.0, max_depth=60):
    """Integrate many intervals at once by adaptive bisection.

    ``f(x, p)`` must accept equally shaped arrays of nodes and per-interval
    parameters.  Each round evaluates a 20-point Gauss-Legendre rule on every
    unfinished interval and on its two halves; an interval is accepted when
    the two estimates agree to ``max(rel_tol * |I|, abs_tol)``.

    Returns (integrals, error_estimates), one entry per input interval.
    """
    a = np.asarray(a, float).ravel()
    b = np.asarray(b, float).ravel()
    params = np.zeros_like(a) if params is None else np.asarray(params, float).ravel()
    abs_tol = np.broadcast_to(np.asarray(abs_tol, float), a.shape)
    out = np.zeros_like(a)
    err_out = np.zeros_like(a)
    owner = np.arange(a.size)
    lo, hi, p, tol_abs = a, b, params, abs_tol
    whole = _gl(f, lo, hi, p)
    for _ in range(max_depth):
        mid = 0.5 * (lo + hi)
        left = _gl(f, lo, mid, p)
        right = _gl(f, mid, hi, p)
        refined = left + right
        err = np.abs(refined - whole)
        ok = err <= np.maximum(rel_tol * np.abs(refined), tol_abs)
        np.add.at(out, owner[ok], refined[ok])
        np.add.at(err_out, owner[ok], err[ok])
        keep = ~ok
        if not np.any(keep):
            return out, err_out
        owner = np.concatenate([owner[keep], owner[keep]])
        lo, hi = np.concatenate([lo[keep], mid[keep]]), np.concatenate([mid[keep], hi[keep]])
        p = np.concatenate([p[keep], p[keep]])
        tol_abs = np.concatenate([tol_abs[keep], tol_abs[keep]])
        whole = np.concatenate([left[keep], right[keep]])
    raise AccuracyError("vquad: maximum bisection depth reached", best_estimate=out)


def sphere_area(n):
    """Surface area of the unit sphere S^{n-1} in R^n."""
    return 2 * math.pi ** (n / 2) / math.gamma(n / 2)


def radial_integral(fn, dims, order=0.0, cfg=None, scan=(-60.0, 60.0)):
    """S_{n-1} int_0^inf r^(n - 1 + order) fn(r) dr for a radial function fn.

    With ``order = 0`` this is the total mass of a radial density on R^n, with
    ``order = m`` the m-th moment of the norm.  The integral is taken in
    u = ln r.  Under the ``moment-bound`` policy the domain is cut where the
    moment-weighted integrand has fallen below 1e-18 of its peak on both
    sides; ``fixed-radius`` integrates r in (0, cfg.cutoff_radius].

    Raises IntegrabilityError when the integrand has not decayed at the scan
    limits.
    """
    cfg = cfg or DEFAULT_QUADRATURE
    power = dims + order

    def integrand(u, _p=None):
        r = np.exp(u)
        with np.errstate(under="ignore"):
            return np.asarray(fn(r.ravel()), float).reshape(r.shape) * np.exp(power * u)

    u_grid = np.arange(scan[0], scan[1] + 0.25, 0.25)
    if cfg.domain_cutoff_policy == "fixed-radius":
        u_grid = u_grid[u_grid < math.log(cfg.cutoff_radius)]
        u_grid = np.append(u_grid, math.log(cfg.cutoff_radius))
    vals = np.abs(integrand(u_grid))
    if not np.all(np.isfinite(vals)):
        raise IntegrabilityError("radial integrand is not finite on the scan grid")
    peak = vals.max()
    if peak == 0:
        return 0.0
    significant = np.nonzero(vals > 1e-18 * peak)[0]
    i0, i1 = significant[0], significant[-1]
    if i0 == 0 or (cfg.domain_cutoff_policy == "moment-bound" and i1 == len(u_grid) - 1):
        raise IntegrabilityError("radial integrand does not decay inside the scan window")
    i0 = max(i0 - 1, 0)
    i1 = min(i1 + 1, len(u_grid) - 1)
    edges = u_grid[i0 : i1 + 1]
    # the scan is fine enough to find the support; integrate on coarser panels
    edges = np.append(edges[:-1:4], edges[-1])
    scale = peak * (edges[-1] - edges[0])
    pieces, _ = vquad(
        lambda x, p: integrand(x),
        edges[:-1],
        edges[1:],
        rel_tol=cfg.rel_tol,
        abs_tol=max(cfg.abs_tol, 1e-3 * cfg.rel_tol * scale / len(edges)),
    )
    return sphere_area(dims) * math.fsum(pieces)


def log_sphere_area(n):
    return math.log(2) + (n / 2) * math.log(math.pi) - special.gammaln(n / 2)

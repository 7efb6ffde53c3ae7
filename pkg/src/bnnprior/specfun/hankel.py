"""Radial (Hankel) Fourier transform on R^n.

For a radial function f(r) on R^n the n-dimensional Fourier transform is
radial as well:

    forward:  F(q) = (2 pi)^(n/2) q^(1 - n/2) int_0^inf r^(n/2) J_(n/2 - 1)(q r) f(r) dr
    inverse:  f(r) = (2 pi)^(-n/2) r^(1 - n/2) int_0^inf q^(n/2) J_(n/2 - 1)(q r) F(q) dq

The oscillatory integral is split at the zeros of J, each piece is done by
adaptive Gauss-Legendre, and the alternating partial sums are accelerated
with Wynn's epsilon algorithm.
"""

import math

import numpy as np
from scipy import special

from ..errors import ConfigurationError, IntegrabilityError
from .config import DEFAULT_QUADRATURE
from .quadrature import radial_integral, vquad

_FIRST_BATCH = 24
_MAX_SEGMENTS = 3000


def bessel_j_zeros(nu, count):
    """First ``count`` positive zeros of J_nu for nu > -1 (McMahon + Newton)."""
    j = np.arange(1, count + 1, dtype=float)
    mu = 4 * nu * nu
    beta = (j + nu / 2 - 0.25) * np.pi
    x = beta - (mu - 1) / (8 * beta) - 4 * (mu - 1) * (7 * mu - 31) / (3 * (8 * beta) ** 3)
    guess = x.copy()
    for _ in range(8):
        x = x - special.jv(nu, x) / special.jvp(nu, x)
    bad = ~np.isfinite(x) | (np.abs(x - guess) > 1.0) | (x <= 0)
    if np.any(np.diff(x) <= 0) or np.any(bad):
        # fall back to a sign-change scan for the troublesome low zeros
        grid = np.linspace(1e-6, guess[-1] + np.pi, 64 * count + 64)
        vals = special.jv(nu, grid)
        idx = np.nonzero(np.sign(vals[:-1]) * np.sign(vals[1:]) < 0)[0][:count]
        lo, hi = grid[idx], grid[idx + 1]
        for _ in range(60):
            mid = 0.5 * (lo + hi)
            left = np.sign(special.jv(nu, lo)) == np.sign(special.jv(nu, mid))
            lo, hi = np.where(left, mid, lo), np.where(left, hi, mid)
        x = 0.5 * (lo + hi)
    return x


def wynn_epsilon(partial_sums):
    """Wynn epsilon extrapolation; returns the last even-column estimate."""
    s = np.asarray(partial_sums, float)
    n = s.size
    if n < 3:
        return float(s[-1])
    prev = np.zeros(n + 1)
    cur = s.copy()
    best = float(s[-1])
    for k in range(1, n):
        diff = cur[1:] - cur[:-1]
        with np.errstate(divide="ignore", invalid="ignore"):
            nxt = prev[1 : cur.size] + 1.0 / diff
        if not np.all(np.isfinite(nxt)):
            break
        prev, cur = cur, nxt
        if k % 2 == 0:
            best = float(cur[-1])
        if cur.size < 2:
            break
    return best


def _transform_one_sided(fn, n, ks, cfg):
    """int_0^inf r^(n/2) J_nu(k r) f(r) dr for each k > 0."""
    nu = n / 2 - 1
    power = n / 2
    results = np.empty(ks.size)
    count = _FIRST_BATCH
    zeros = bessel_j_zeros(nu, count)

    def piece(r, k):
        with np.errstate(under="ignore"):
            return r**power * np.asarray(fn(r.ravel()), float).reshape(r.shape) * special.jv(nu, k * r)

    def first_piece(y, k):
        # r = r1 y^4 tames integrable singularities of f at the origin
        r1 = zeros[0] / k
        r = r1 * y**4
        return piece(r, k) * 4 * r1 * y**3

    pending = np.arange(ks.size)
    sums = {i: [] for i in pending}
    done_segments = 0
    while pending.size:
        if count > done_segments and count > zeros.size:
            zeros = bessel_j_zeros(nu, count)
        k_p = ks[pending]
        a_list, b_list, p_list = [], [], []
        seg_lo = done_segments if done_segments else 1
        for seg in range(seg_lo, count):
            a_list.append(zeros[seg - 1] / k_p)
            b_list.append(zeros[seg] / k_p)
            p_list.append(k_p)
        pieces_parts = []
        if done_segments == 0:
            first, _ = vquad(first_piece, np.zeros(k_p.size), np.ones(k_p.size), k_p,
                             rel_tol=cfg.rel_tol * 1e-2, max_depth=80,
                             abs_tol=cfg.abs_tol)
            pieces_parts.append(first[None, :])
        if a_list:
            a = np.stack(a_list)
            b = np.stack(b_list)
            p = np.stack(p_list)
            vals, _ = vquad(piece, a.ravel(), b.ravel(), p.ravel(),
                            rel_tol=cfg.rel_tol * 1e-2, max_depth=80, abs_tol=cfg.abs_tol)
            pieces_parts.append(vals.reshape(a.shape))
        block = np.concatenate(pieces_parts, axis=0)
        still = []
        for col, idx in enumerate(pending):
            sums[idx].extend(block[:, col].tolist())
            terms = np.array(sums[idx])
            partial = np.cumsum(terms)
            total = partial[-1]
            scale = np.abs(terms).max()
            tail = np.abs(terms[-3:]).max()
            if tail <= cfg.rel_tol * 1e-3 * max(abs(total), 1e-300) or tail <= cfg.abs_tol:
                results[idx] = math.fsum(terms)
                continue
            e1 = wynn_epsilon(partial[-20:])
            e2 = wynn_epsilon(partial[-21:-1])
            tol = max(cfg.rel_tol * abs(e1), cfg.abs_tol, 1e-15 * scale)
            if abs(e1 - e2) <= tol:
                results[idx] = e1
                continue
            still.append(idx)
        done_segments = count
        pending = np.array(still, dtype=int)
        if pending.size:
            count = 2 * count
            if count > _MAX_SEGMENTS:
                raise IntegrabilityError(
                    "Hankel integral did not converge",
                    best_estimate=results,
                )
    return results


def hankel_radial(fn, n, direction="forward", grid=None, cfg=None):
    """Radial Fourier transform of a radial function on R^n.

    Parameters
    ----------
    fn : callable
        Vectorised radial profile, fn(r_array) -> values.
    n : int
        Ambient dimension.
    direction : {"forward", "inverse"}
        ``forward`` maps a density to its characteristic function; ``inverse``
        maps a characteristic function back to a density.
    grid : array_like
        Points (q for forward, r for inverse) at which to evaluate.

    Returns
    -------
    ndarray of shape (len(grid), 2) holding (grid point, transformed value)
    rows.  With these conventions ``inverse(forward(f)) == f``, while two
    inverse transforms in a row give f / (2 pi)^n.
    """
    if direction not in ("forward", "inverse"):
        raise ConfigurationError("direction must be 'forward' or 'inverse'")
    if int(n) != n or n < 1:
        raise ConfigurationError("dimension must be a positive integer")
    cfg = cfg or DEFAULT_QUADRATURE
    grid = np.atleast_1d(np.asarray(grid, float))
    if np.any(grid < 0) or not np.all(np.isfinite(grid)):
        raise ConfigurationError("transform grid must be finite and non-negative")
    prefactor = (2 * math.pi) ** (n / 2 if direction == "forward" else -n / 2)
    nu = n / 2 - 1
    out = np.empty(grid.size)
    zero = grid == 0
    if np.any(zero):
        # J_nu(kr) ~ (kr/2)^nu / Gamma(nu + 1) as k -> 0
        mass = radial_integral(fn, n, 0.0, cfg) / (2 * math.pi ** (n / 2) / math.gamma(n / 2))
        out[zero] = prefactor * mass / (2**nu * math.gamma(nu + 1))
    pos = ~zero
    if np.any(pos):
        ks = grid[pos]
        raw = _transform_one_sided(fn, n, ks, cfg)
        out[pos] = prefactor * ks ** (-nu) * raw
    return np.column_stack((grid, out))

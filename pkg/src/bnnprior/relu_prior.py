"""Exact output prior of a deep ReLU network.

The prior is an atom at the origin plus a mixture of linear-network priors,
one per configuration (k_1..k_{d-1}) of active hidden units, weighted by
prod_l 2^(-n_l) C(n_l, k_l).
"""

import math
from dataclasses import dataclass
from fractions import Fraction
from typing import Tuple

import numpy as np
from scipy import special

from .errors import ConfigurationError, DomainError, ResourceError
from .linear_prior import (
    _EXACT_MAX_ORDER,
    _check_order,
    _even_rising,
    _exact_order,
    _scaled_moment,
    charfun_linear,
    log_density_linear,
)
from .network import NetworkSpec

TRUNCATION_MODES = ("none", "per-factor", "product")
DEFAULT_THRESHOLD = 2.0**-52
DEFAULT_MAX_TERMS = 10_000_000
_LOG2 = math.log(2.0)


@dataclass(frozen=True)
class MixtureTerm:
    active_counts: Tuple[int, ...]
    log_weight: float

    @property
    def weight(self):
        return math.exp(self.log_weight)


@dataclass(frozen=True, eq=False)
class ReLUMixture:
    """Atom mass plus the retained mixture terms, stored as arrays.

    ``counts[i]`` are the active-unit counts of term i and ``log_weights[i]``
    its log mixture weight; terms are sorted by decreasing weight, ties
    broken lexicographically by counts.
    """

    atom_mass: float
    counts: np.ndarray
    log_weights: np.ndarray
    truncation_mode: str
    truncation_threshold: float
    discarded_mass: float

    def __len__(self):
        return len(self.log_weights)

    @property
    def terms(self):
        return [
            MixtureTerm(tuple(int(k) for k in row), float(lw))
            for row, lw in zip(self.counts, self.log_weights)
        ]

    @property
    def continuous_mass(self):
        return math.fsum(np.exp(self.log_weights))


def _require_relu(spec):
    if spec.activation != "relu":
        raise ConfigurationError(f"expected a relu network, got {spec.activation}")


def atom_mass(spec: NetworkSpec) -> float:
    """Probability that the output is exactly zero: 1 - prod_l (1 - 2^(-n_l))."""
    _require_relu(spec)
    return -math.expm1(math.fsum(math.log1p(-(2.0**-n)) for n in spec.hidden_widths))


def layer_log_weights(n):
    """ln(2^(-n) C(n, k)) for k = 1..n."""
    k = np.arange(1, n + 1)
    return (
        special.gammaln(n + 1) - special.gammaln(k + 1) - special.gammaln(n - k + 1) - n * _LOG2
    )


def enumerate_terms(
    spec: NetworkSpec,
    mode: str = "product",
    threshold: float = DEFAULT_THRESHOLD,
    max_terms: int = DEFAULT_MAX_TERMS,
) -> ReLUMixture:
    """List the mixture terms of a ReLU prior, optionally truncated.

    mode="none" keeps every term; "per-factor" drops a count k_l whose
    single-layer weight 2^(-n_l) C(n_l, k_l) is below ``threshold`` before
    forming tuples; "product" drops tuples whose total weight is below
    ``threshold``.  At n = 100 and threshold 2^-52 the product rule leaves
    77, 4537 and 208243 terms for depths 2, 3 and 4.

    Raises ResourceError if more than ``max_terms`` tuples would be held.
    """
    _require_relu(spec)
    if mode not in TRUNCATION_MODES:
        raise ConfigurationError(f"truncation mode must be one of {TRUNCATION_MODES}")
    if not threshold > 0 and mode != "none":
        raise ConfigurationError("truncation threshold must be positive")
    hidden = spec.hidden_widths
    atom = atom_mass(spec)
    if not hidden:
        raise ConfigurationError("a depth-one network has no hidden layer to mix over")
    log_thr = math.log(threshold) if mode != "none" else -math.inf

    per_layer = []
    for n in hidden:
        k = np.arange(1, n + 1)
        lw = layer_log_weights(n)
        if mode == "per-factor":
            keep = lw >= log_thr
            k, lw = k[keep], lw[keep]
        per_layer.append((k, lw))

    if mode != "product":
        total = math.prod(len(k) for k, _ in per_layer)
        if total > max_terms:
            raise ResourceError(
                f"{total} mixture terms exceed max_terms={max_terms}; use truncation"
            )

    # build tuples layer by layer; log weights are <= 0, so a partial product
    # already below the threshold can only shrink further
    counts = per_layer[0][0][:, None]
    logw = per_layer[0][1]
    if mode == "product":
        keep = logw >= log_thr
        counts, logw = counts[keep], logw[keep]
    for k, lw in per_layer[1:]:
        cand = logw[:, None] + lw[None, :]
        if mode == "product":
            i, j = np.nonzero(cand >= log_thr)
        else:
            i, j = np.indices(cand.shape).reshape(2, -1)
        if i.size > max_terms:
            raise ResourceError(
                f"{i.size} mixture terms exceed max_terms={max_terms}; use truncation"
            )
        counts = np.column_stack([counts[i], k[j]])
        logw = cand[i, j]

    keys = [counts[:, c] for c in range(counts.shape[1] - 1, -1, -1)] + [-logw]
    order = np.lexsort(keys)
    counts, logw = counts[order], logw[order]
    continuous_full = math.exp(math.fsum(math.log1p(-(2.0**-n)) for n in hidden))
    discarded = max(continuous_full - math.fsum(np.exp(logw)), 0.0) if mode != "none" else 0.0
    return ReLUMixture(
        atom_mass=atom,
        counts=counts.astype(np.int64),
        log_weights=logw,
        truncation_mode=mode,
        truncation_threshold=threshold if mode != "none" else 0.0,
        discarded_mass=discarded,
    )


def _grouped_terms(mixture):
    """Merge terms whose width tuples are permutations of each other.

    The linear prior depends on the hidden widths only as a multiset, so one
    evaluation serves every permutation.  Returns (sorted tuples, weights)
    ordered by decreasing group weight.
    """
    groups = {}
    for row, lw in zip(mixture.counts, mixture.log_weights):
        key = tuple(sorted(int(k) for k in row))
        groups.setdefault(key, []).append(math.exp(lw))
    items = [(key, math.fsum(ws)) for key, ws in groups.items()]
    items.sort(key=lambda kv: (-kv[1], kv[0]))
    return items


def _compensated_sum(rows):
    """Neumaier summation of a sequence of equal-length arrays, in order."""
    total = None
    comp = None
    for row in rows:
        if total is None:
            total = np.array(row, dtype=float)
            comp = np.zeros_like(total)
            continue
        t = total + row
        big = np.abs(total) >= np.abs(row)
        comp += np.where(big, (total - t) + row, (row - t) + total)
        total = t
    return total + comp


def density_relu(spec: NetworkSpec, r, mixture=None, cfg=None):
    """Continuous part of the ReLU prior at output radius r > 0.

    The atom at the origin is not included (see :func:`atom_mass`).  Terms
    are accumulated in decreasing-weight order with compensated summation.
    """
    _require_relu(spec)
    r_arr = np.asarray(r, dtype=float)
    if np.any(~(r_arr > 0)) or np.any(~np.isfinite(r_arr)):
        raise DomainError("ReLU density is evaluated at r > 0; the atom sits at r = 0")
    mixture = mixture if mixture is not None else enumerate_terms(spec)
    flat = np.atleast_1d(r_arr).ravel()
    linear = spec.with_activation("linear")

    def contributions():
        for widths, weight in _grouped_terms(mixture):
            logp = log_density_linear(linear.with_widths(hidden=widths), flat, cfg)
            yield np.exp(np.log(weight) + np.atleast_1d(logp))

    out = _compensated_sum(contributions())
    if out is None:
        out = np.zeros_like(flat)
    out = out.reshape(r_arr.shape)
    return out if out.ndim else float(out)


def charfun_relu(spec: NetworkSpec, q, mixture=None, cfg=None):
    """Radial characteristic function: atom mass plus the weighted linear ones."""
    _require_relu(spec)
    q_arr = np.asarray(q, dtype=float)
    if np.any(~(q_arr >= 0)) or np.any(~np.isfinite(q_arr)):
        raise DomainError("q must be finite and >= 0")
    mixture = mixture if mixture is not None else enumerate_terms(spec)
    flat = np.atleast_1d(q_arr).ravel()
    linear = spec.with_activation("linear")

    def contributions():
        yield np.full_like(flat, mixture.atom_mass)
        for widths, weight in _grouped_terms(mixture):
            yield weight * np.atleast_1d(charfun_linear(linear.with_widths(hidden=widths), flat, cfg))

    out = _compensated_sum(contributions()).reshape(q_arr.shape)
    return out if out.ndim else float(out)


def log_layer_bracket(n, m):
    """ln[2^(-n) sum_{k=1}^{n} C(n, k) (k/2)^(rising m/2)]."""
    k = np.arange(1, n + 1)
    terms = layer_log_weights(n) + special.gammaln(k / 2 + m / 2) - special.gammaln(k / 2)
    return float(special.logsumexp(terms))


def _exact_layer_bracket(n, half_m):
    """2^(m/2) times the layer bracket, as an exact fraction."""
    total = sum(math.comb(n, k) * _even_rising(k, half_m) for k in range(1, n + 1))
    return Fraction(total, 2**n)


def log_moment_norm_relu(spec: NetworkSpec, m) -> float:
    """ln E|h|^m for a ReLU network (m > 0; the atom contributes nothing)."""
    _require_relu(spec)
    _check_order(m)
    if m == 0:
        return 0.0
    nd = spec.out_width
    return (
        (spec.depth * m / 2) * _LOG2
        + m * spec.log_kappa
        + float(special.gammaln(nd / 2 + m / 2) - special.gammaln(nd / 2))
        + math.fsum(log_layer_bracket(n, m) for n in spec.hidden_widths)
    )


def moment_norm_relu(spec: NetworkSpec, m) -> float:
    """E|h|^m = 2^(dm/2) k^m (n_d/2)^(rising m/2) prod_l [2^(-n) sum_k C(n,k) (k/2)^(rising m/2)].

    m = 0 gives 1.  Even integer orders use exact rational arithmetic, so
    the second moment is exactly 2^(1-d) times the linear one.
    """
    _require_relu(spec)
    _check_order(m)
    if m == 0:
        return 1.0
    if _exact_order(m) and m <= _EXACT_MAX_ORDER and max(spec.hidden_widths, default=0) <= 2000:
        k = int(m) // 2
        factor = Fraction(_even_rising(spec.out_width, k))
        for n in spec.hidden_widths:
            factor *= _exact_layer_bracket(n, k)
        log_factor = (
            math.log(factor.numerator) - math.log(factor.denominator)
        )
        return _scaled_moment(factor, log_factor, m, spec.log_kappa)
    return math.exp(log_moment_norm_relu(spec, m))

"""Monte Carlo ground truth for the exact priors.

Networks are sampled literally: every weight matrix is drawn, the input is
pushed through, and the output recorded.  Chunk ``i`` of a run draws from a
Philox generator keyed by (master_seed, i), so the samples do not depend on
how chunks are distributed over workers.
"""

import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from typing import Optional

import numpy as np

from .errors import ConfigurationError, DegenerateHistogramError
from .network import NetworkSpec

_CHUNK_WEIGHTS = 4_000_000  # weight entries drawn per chunk, bounds memory
_MAX_CHUNK = 1 << 16
_STREAM_ORDERS = np.arange(0, 9)


@dataclass
class SampleBatch:
    """Output samples of one network spec.

    ``outputs`` has shape (count, n_d) unless the run was too large to keep,
    in which case it is None and only the streaming summaries are filled:
    per-chunk sums of |h|^m for m = 0..8 and a histogram of component 0.
    """

    spec: NetworkSpec
    master_seed: int
    count: int
    chunk_size: int
    zero_count: int
    outputs: Optional[np.ndarray] = None
    chunk_power_sums: Optional[np.ndarray] = None
    chunk_counts: Optional[np.ndarray] = None
    stream_hist: Optional["HistogramDensity"] = None

    @property
    def zero_fraction(self):
        return self.zero_count / self.count

    @property
    def streaming(self):
        return self.outputs is None


@dataclass
class HistogramDensity:
    bin_edges: np.ndarray
    densities: np.ndarray
    counts: np.ndarray
    total: int
    excluded: int = 0
    out_of_range: int = 0
    radial: bool = False
    component: Optional[int] = 0
    meta: dict = field(default_factory=dict)

    @property
    def centers(self):
        return 0.5 * (self.bin_edges[1:] + self.bin_edges[:-1])

    @property
    def widths(self):
        return np.diff(self.bin_edges)


def chunk_size_for(spec: NetworkSpec) -> int:
    widest = max(a * b for a, b in zip(spec.widths[1:], spec.widths[2:])) if spec.depth > 1 else 1
    widest = max(widest, spec.widths[1])
    return int(max(1, min(_MAX_CHUNK, _CHUNK_WEIGHTS // widest)))


def chunk_generator(master_seed: int, chunk_index: int) -> np.random.Generator:
    seq = np.random.SeedSequence(int(master_seed), spawn_key=(int(chunk_index),))
    return np.random.Generator(np.random.Philox(seq))


def forward_chunk(spec: NetworkSpec, rng: np.random.Generator, size: int, weight_std=None):
    """Draw ``size`` networks and return their outputs, shape (size, n_d).

    The input is |x| e_1, so only the first column of W_1 matters; drawing
    the whole first matrix would not change the output distribution.
    ``weight_std`` overrides the spec's stds (zeros allowed here).
    """
    stds = spec.weight_std if weight_std is None else tuple(weight_std)
    relu = spec.activation == "relu"
    n1 = spec.widths[1]
    h = stds[0] * spec.input_norm * rng.standard_normal((size, n1))
    for layer in range(1, spec.depth):
        a = np.maximum(h, 0.0) if relu else h
        n_out, n_in = spec.widths[layer + 1], spec.widths[layer]
        w = rng.standard_normal((size, n_out, n_in))
        h = stds[layer] * np.einsum("bij,bj->bi", w, a)
    return h


def sample_outputs(
    spec: NetworkSpec,
    master_seed: int,
    count: int,
    workers: int = 1,
    max_stored: int = 50_000_000,
    weight_std=None,
) -> SampleBatch:
    """Sample ``count`` network outputs.

    Results depend only on (spec, master_seed, count).  When storing all
    outputs would exceed ``max_stored`` floats, a streaming summary is kept
    instead (see :class:`SampleBatch`).
    """
    if int(count) != count or count < 1:
        raise ConfigurationError("count must be a positive integer")
    count = int(count)
    csize = chunk_size_for(spec)
    n_chunks = -(-count // csize)
    sizes = [min(csize, count - i * csize) for i in range(n_chunks)]
    streaming = count * spec.out_width > max_stored

    def run(i):
        return forward_chunk(spec, chunk_generator(master_seed, i), sizes[i], weight_std)

    if not streaming:
        if workers > 1:
            with ThreadPoolExecutor(workers) as pool:
                parts = list(pool.map(run, range(n_chunks)))
        else:
            parts = [run(i) for i in range(n_chunks)]
        out = np.concatenate(parts, axis=0)
        zeros = int(np.count_nonzero(np.all(out == 0, axis=1)))
        return SampleBatch(spec, int(master_seed), count, csize, zeros, outputs=out)

    sums = np.zeros((n_chunks, _STREAM_ORDERS.size))
    zeros = 0
    hist = None
    for i in range(n_chunks):
        h = run(i)
        is_zero = np.all(h == 0, axis=1)
        zeros += int(np.count_nonzero(is_zero))
        norms = np.linalg.norm(h, axis=1)
        sums[i] = [np.sum(norms**m) for m in _STREAM_ORDERS]
        comp = h[~is_zero, 0]
        if hist is None:
            half = 1.5 * float(np.quantile(np.abs(comp), 0.9995)) if comp.size else 1.0
            edges = np.linspace(-half, half, 101)
            hist = np.zeros(100, dtype=np.int64)
        hist += np.histogram(comp, edges)[0]
    inside = int(hist.sum())
    stream_hist = HistogramDensity(
        bin_edges=edges,
        densities=hist / (count * np.diff(edges)),
        counts=hist,
        total=count,
        excluded=zeros,
        out_of_range=count - zeros - inside,
    )
    return SampleBatch(
        spec,
        int(master_seed),
        count,
        csize,
        zeros,
        chunk_power_sums=sums,
        chunk_counts=np.array(sizes),
        stream_hist=stream_hist,
    )


def empirical_density(batch: SampleBatch, component=0, bins=100, coverage=0.9995):
    """Histogram density of one output component (or of |h| with component=None).

    Exact zero outputs (the ReLU atom) are left out of the histogram but
    count towards the total, so the histogram integrates to the continuous
    mass that fell inside the range.  The component range is symmetric
    about 0 and reaches the ``coverage`` quantile of |h_i|; with an even
    number of bins 0 is a bin edge.
    """
    if batch.streaming:
        if component != 0:
            raise ConfigurationError("streaming batches only keep a component-0 histogram")
        return batch.stream_hist
    if int(bins) != bins or bins < 2:
        raise ConfigurationError("need at least 2 bins")
    out = batch.outputs
    nonzero = ~np.all(out == 0, axis=1)
    if component is None:
        vals = np.linalg.norm(out[nonzero], axis=1)
    else:
        if not 0 <= component < out.shape[1]:
            raise ConfigurationError("component index out of range")
        vals = out[nonzero, component]
    if vals.size == 0:
        raise DegenerateHistogramError("no non-zero samples to histogram")
    top = float(np.quantile(np.abs(vals), coverage))
    if not top > 0:
        raise DegenerateHistogramError("all retained samples are zero")
    lo = 0.0 if component is None else -top
    edges = np.linspace(lo, top, int(bins) + 1)
    counts = np.histogram(vals, edges)[0]
    inside = int(counts.sum())
    return HistogramDensity(
        bin_edges=edges,
        densities=counts / (batch.count * np.diff(edges)),
        counts=counts,
        total=batch.count,
        excluded=batch.count - int(vals.size),
        out_of_range=int(vals.size) - inside,
        radial=component is None,
        component=component,
    )


def empirical_moment(batch: SampleBatch, m, n_batches=100):
    """Sample mean of |h|^m and its batch-means standard error."""
    if not m >= 0:
        raise ConfigurationError("moment order must be >= 0")
    if m == 0:
        return 1.0, 0.0
    if batch.streaming:
        idx = np.nonzero(_STREAM_ORDERS == m)[0]
        if not idx.size:
            raise ConfigurationError("streaming batches keep integer orders 1..8 only")
        sums = batch.chunk_power_sums[:, idx[0]]
        means = sums / batch.chunk_counts
        est = math.fsum(sums) / batch.count
        w = batch.chunk_counts / batch.count
        if means.size < 2:
            return est, float("nan")
        var = np.sum(w * (means - est) ** 2) / (means.size - 1)
        return est, math.sqrt(var)
    vals = np.linalg.norm(batch.outputs, axis=1) ** m
    est = math.fsum(vals) / vals.size
    g = min(int(n_batches), vals.size)
    if g < 2:
        return est, float("nan")
    groups = np.array_split(vals, g)
    means = np.array([grp.mean() for grp in groups])
    return est, float(np.std(means, ddof=1) / math.sqrt(g))


def empirical_raw_moment(batch: SampleBatch, m, component=0, n_batches=100):
    """Sample mean of h_i^m for one output component, with batch-means error."""
    vals = batch.outputs[:, component] ** m
    est = float(np.mean(vals))
    groups = np.array_split(vals, n_batches)
    means = np.array([grp.mean() for grp in groups])
    return est, float(np.std(means, ddof=1) / math.sqrt(n_batches))


_GL_X, _GL_W = np.polynomial.legendre.leggauss(24)


def bin_probabilities(density, edges):
    """Integral of ``density`` over each bin by Gauss-Legendre.

    Bins with an edge at 0 use x = edge * y^4 so integrable singularities
    of the density at the origin are handled.
    """
    edges = np.asarray(edges, float)
    a, b = edges[:-1], edges[1:]
    y = 0.5 * (_GL_X + 1)
    wy = 0.5 * _GL_W
    # regular bins
    x = a[:, None] + (b - a)[:, None] * y[None, :]
    jac = np.broadcast_to((b - a)[:, None], x.shape)
    at_zero_left = a == 0
    at_zero_right = b == 0
    # map [0, b] and [a, 0] onto y^4 grids
    for mask, end in ((at_zero_left, b), (at_zero_right, a)):
        if np.any(mask):
            x = np.where(mask[:, None], end[:, None] * y[None, :] ** 4, x)
            jac = np.where(mask[:, None], np.abs(end)[:, None] * 4 * y[None, :] ** 3, jac)
    vals = np.asarray(density(x.ravel()), float).reshape(x.shape)
    return np.sum(vals * jac * wy[None, :], axis=1)


@dataclass(frozen=True)
class DensityComparison:
    max_abs_deviation: float
    max_z: float
    bins_tested: int
    passed: bool
    z_scores: np.ndarray


def compare_density(exact, hist: HistogramDensity, min_count=1000, z_limit=4.0, centers=None):
    """Bin-wise binomial z-scores of a histogram against an exact density.

    ``exact`` is either a vectorised density of the histogrammed variable
    (integrated over every bin) or an array of density values at the bin
    centres; then ``centers`` may be given and must match the histogram's
    centres.  Bins with fewer than ``min_count`` samples are not tested.
    """
    widths = hist.widths
    if callable(exact):
        probs = bin_probabilities(exact, hist.bin_edges)
    else:
        vals = np.asarray(exact, float).ravel()
        if vals.size != hist.counts.size:
            raise ConfigurationError("exact values do not match the number of bins")
        if centers is not None:
            centers = np.asarray(centers, float).ravel()
            if centers.size != vals.size or not np.allclose(
                centers, hist.centers, rtol=1e-12, atol=1e-12 * np.max(np.abs(hist.bin_edges))
            ):
                raise ConfigurationError("exact grid is not aligned with the bin centres")
        probs = vals * widths
    n = hist.total
    expected = n * probs
    tested = hist.counts >= min_count
    var = n * probs * (1 - probs)
    with np.errstate(divide="ignore", invalid="ignore"):
        z = np.where(tested, np.abs(hist.counts - expected) / np.sqrt(var), 0.0)
    z = np.where(tested & ~np.isfinite(z), np.inf, z)
    dev = np.abs(hist.densities - probs / widths)
    n_tested = int(np.count_nonzero(tested))
    max_z = float(np.max(z[tested])) if n_tested else 0.0
    return DensityComparison(
        max_abs_deviation=float(np.max(dev[tested])) if n_tested else 0.0,
        max_z=max_z,
        bins_tested=n_tested,
        passed=bool(n_tested > 0 and max_z <= z_limit),
        z_scores=z,
    )

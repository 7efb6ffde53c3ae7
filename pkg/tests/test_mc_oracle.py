import math

import numpy as np
import pytest

from bnnprior.errors import ConfigurationError, DegenerateHistogramError
from bnnprior.linear_prior import density_linear, marginal_density_1d, moment_norm_linear
from bnnprior.mc_oracle import (
    bin_probabilities,
    chunk_generator,
    chunk_size_for,
    compare_density,
    empirical_density,
    empirical_moment,
    empirical_raw_moment,
    forward_chunk,
    sample_outputs,
)
from bnnprior.network import NetworkSpec
from bnnprior.relu_prior import atom_mass, density_relu, moment_norm_relu

LIN = NetworkSpec.from_kappa((1, 3, 2, 1), 0.7)
RELU = NetworkSpec.from_kappa((1, 3, 2, 1), 0.7, "relu")


def test_seed_determinism():
    a = sample_outputs(LIN, 42, 20000)
    b = sample_outputs(LIN, 42, 20000)
    c = sample_outputs(LIN, 43, 20000)
    assert np.array_equal(a.outputs, b.outputs)
    assert not np.array_equal(a.outputs, c.outputs)


def test_workers_do_not_change_samples():
    spec = NetworkSpec.from_kappa((1, 200, 200, 1))
    assert chunk_size_for(spec) == 100
    one = sample_outputs(spec, 5, 1000, workers=1)
    many = sample_outputs(spec, 5, 1000, workers=3)
    assert np.array_equal(one.outputs, many.outputs)


def test_chunk_streams_are_distinct():
    a = chunk_generator(1, 0).standard_normal(4)
    b = chunk_generator(1, 1).standard_normal(4)
    assert not np.array_equal(a, b)


def test_streaming_matches_stored():
    stored = sample_outputs(LIN, 9, 30000)
    streamed = sample_outputs(LIN, 9, 30000, max_stored=100)
    assert streamed.streaming and streamed.outputs is None
    for m in (2, 4):
        assert empirical_moment(streamed, m)[0] == pytest.approx(empirical_moment(stored, m)[0], rel=1e-12)
    assert empirical_density(streamed).counts.sum() > 0
    with pytest.raises(ConfigurationError):
        empirical_density(streamed, component=None)


def test_second_moment_and_covariance():
    spec = NetworkSpec.from_kappa((1, 4, 3, 3), 0.5)
    batch = sample_outputs(spec, 3, 200000)
    est, se = empirical_moment(batch, 2)
    assert abs(est - moment_norm_linear(spec, 2)) < 4 * se
    cov = np.cov(batch.outputs.T)
    per_unit = moment_norm_linear(spec, 2) / 3
    assert np.allclose(np.diag(cov), per_unit, rtol=0.03)
    assert np.max(np.abs(cov - np.diag(np.diag(cov)))) < 0.03 * per_unit


def test_sign_symmetry():
    batch = sample_outputs(RELU, 4, 200000)
    mean, se = empirical_raw_moment(batch, 1)
    assert abs(mean) < 4 * se
    third, se3 = empirical_raw_moment(batch, 3)
    assert abs(third) < 4 * se3


def test_relu_zero_fraction():
    spec = NetworkSpec.from_kappa((1, 1, 1, 1), activation="relu")
    batch = sample_outputs(spec, 11, 100000)
    p = atom_mass(spec)
    assert p == 0.75
    assert abs(batch.zero_fraction - p) < 3 * math.sqrt(p * (1 - p) / batch.count)


def test_relu_moment():
    batch = sample_outputs(RELU, 8, 200000)
    est, se = empirical_moment(batch, 2)
    assert abs(est - moment_norm_relu(RELU, 2)) < 4 * se


def test_histogram_bookkeeping():
    batch = sample_outputs(RELU, 2, 50000)
    hist = empirical_density(batch, bins=40)
    assert hist.counts.sum() + hist.excluded + hist.out_of_range == batch.count
    assert hist.excluded == batch.zero_count
    assert hist.bin_edges[20] == 0.0
    radial = empirical_density(batch, component=None, bins=40)
    assert radial.radial and radial.bin_edges[0] == 0.0


def test_exact_density_passes_and_wrong_one_fails():
    batch = sample_outputs(LIN, 21, 10**6)
    hist = empirical_density(batch)
    good = compare_density(lambda h: marginal_density_1d(LIN, h), hist)
    assert good.passed and good.bins_tested > 40
    wider = LIN.with_widths(hidden=(4, 2))
    bad = compare_density(lambda h: marginal_density_1d(wider, h), hist)
    assert not bad.passed


def test_relu_histogram_against_mixture():
    batch = sample_outputs(RELU, 22, 10**6)
    hist = empirical_density(batch)
    cmp = compare_density(lambda h: density_relu(RELU, np.abs(h)), hist)
    assert cmp.passed


def test_radial_histogram_against_norm_density():
    spec = NetworkSpec.from_kappa((1, 3, 4, 2), 0.6)
    batch = sample_outputs(spec, 23, 10**6)
    hist = empirical_density(batch, component=None)
    # density of |h| in two dimensions is 2 pi r p(r)
    cmp = compare_density(lambda r: 2 * np.pi * r * density_linear(spec, r), hist)
    assert cmp.passed


def test_array_input_alignment():
    batch = sample_outputs(LIN, 5, 100000)
    hist = empirical_density(batch, bins=20)
    vals = marginal_density_1d(LIN, hist.centers)
    compare_density(vals, hist, centers=hist.centers)
    with pytest.raises(ConfigurationError):
        compare_density(vals, hist, centers=hist.centers + 0.01)
    with pytest.raises(ConfigurationError):
        compare_density(vals[:-1], hist)


def test_bin_probabilities_handles_origin_singularity():
    edges = np.array([-1.0, 0.0, 1.0])
    probs = bin_probabilities(lambda x: 0.25 / np.sqrt(np.abs(x)), edges)
    assert np.allclose(probs, [0.5, 0.5], rtol=1e-12)


def test_all_zero_outputs():
    spec = NetworkSpec.from_kappa((1, 2, 1))
    batch = sample_outputs(spec, 1, 100, weight_std=(1.0, 0.0))
    assert batch.zero_fraction == 1.0
    with pytest.raises(DegenerateHistogramError):
        empirical_density(batch)


def test_forward_chunk_shape():
    out = forward_chunk(NetworkSpec.from_kappa((1, 3, 4, 5)), chunk_generator(0, 0), 7)
    assert out.shape == (7, 5)


@pytest.mark.parametrize("count", [0, -5, 2.5])
def test_bad_count(count):
    with pytest.raises(ConfigurationError):
        sample_outputs(LIN, 0, count)

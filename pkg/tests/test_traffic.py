import math

import numpy as np
import pytest
from scipy.integrate import quad as scipy_quad

from d2drange.traffic import (
    ContentClass,
    TrafficMix,
    cumulative,
    intensity,
    invert_cdf,
    sample_request_time,
    thinned_density,
)


@pytest.fixture(scope="module")
def profile():
    return ContentClass(popularity=0.2, scale_s=900.0, shape=5.0)


def erlang_cdf(t, shape, scale):
    """Independent oracle for integer shapes: 1 - exp(-x) * sum x^k / k!."""
    x = t / scale
    return 1.0 - math.exp(-x) * sum(x**k / math.factorial(k) for k in range(int(shape)))


def test_intensity_peaks_at_one_hour(profile):
    t = np.linspace(0.0, 20000.0, 20001)
    f = intensity(t, profile)
    assert t[np.argmax(f)] == pytest.approx(3600.0, abs=1.0)


def test_intensity_zero_at_origin_for_shape_above_one(profile):
    assert intensity(0.0, profile) == 0.0


def test_intensity_integrates_to_one(profile):
    total = 0.0
    for a, b in [(0.0, 3600.0), (3600.0, 20000.0)]:
        val, _ = scipy_quad(lambda t: intensity(t, profile), a, b, limit=200)
        total += val
    assert total == pytest.approx(1.0, abs=1e-9)


def test_intensity_zero_beyond_truncation(profile):
    assert intensity(20000.1, profile) == 0.0
    assert intensity(1e9, profile) == 0.0


def test_cumulative_against_erlang_series():
    # effectively untruncated profile so the raw CDF is exposed
    raw = ContentClass(popularity=0.2, scale_s=900.0, shape=5.0, truncation_s=1e9)
    expected = erlang_cdf(3600.0, 5, 900.0)
    assert expected == pytest.approx(0.3712, abs=2e-4)  # sanity on the oracle itself
    assert cumulative(3600.0, raw) == pytest.approx(expected, rel=1e-10)


def test_cumulative_99_percent_within_174_minutes():
    raw = ContentClass(popularity=0.2, scale_s=900.0, shape=5.0, truncation_s=1e9)
    assert cumulative(174.0 * 60.0, raw) == pytest.approx(0.990, abs=2e-3)


def test_cumulative_saturates_at_truncation(profile):
    assert cumulative(profile.truncation_s, profile) == 1.0
    assert cumulative(1e9, profile) == 1.0
    t = np.linspace(0.0, 25000.0, 500)
    c = cumulative(t, profile)
    assert np.all(np.diff(c) >= 0)
    assert cumulative(0.0, profile) == 0.0


def test_intensity_is_derivative_of_cumulative(profile):
    t = np.linspace(10.0, 19990.0, 1000)
    h = 0.05
    fd = (cumulative(t + h, profile) - cumulative(t - h, profile)) / (2 * h)
    f = intensity(t, profile)
    assert np.max(np.abs(fd - f)) <= 1e-6 * np.max(f)


def test_invert_cdf_endpoints(profile):
    from scipy.special import gammaincinv

    assert invert_cdf(0.0, profile) == 0.0
    assert invert_cdf(1.0, profile) <= profile.truncation_s
    # independent inverse via scipy, within the bisection tolerance
    # of 1e-6 * truncation horizon = 0.02 s
    for u in (0.1, 0.5, 0.9):
        expected = gammaincinv(profile.shape, u * profile.truncation_mass) * profile.scale_s
        assert invert_cdf(u, profile) == pytest.approx(expected, abs=0.02)


def test_sampling_matches_cdf_by_ks(profile):
    rng = np.random.default_rng(1234)
    samples = sample_request_time(profile, rng, size=100_000)
    samples = np.sort(samples)
    grid_cdf = cumulative(samples, profile)
    n = len(samples)
    ecdf_hi = np.arange(1, n + 1) / n
    ecdf_lo = np.arange(0, n) / n
    ks = max(np.max(np.abs(ecdf_hi - grid_cdf)), np.max(np.abs(grid_cdf - ecdf_lo)))
    assert ks < 0.006


def test_sampling_mean_matches_profile_mean(profile):
    rng = np.random.default_rng(99)
    samples = sample_request_time(profile, rng, size=100_000)
    expected, _ = scipy_quad(lambda t: t * intensity(t, profile), 0.0, 20000.0, limit=200)
    stderr = samples.std(ddof=1) / math.sqrt(len(samples))
    assert abs(samples.mean() - expected) < 3 * stderr


def test_sampling_is_deterministic(profile):
    a = sample_request_time(profile, np.random.default_rng(7), size=1000)
    b = sample_request_time(profile, np.random.default_rng(7), size=1000)
    assert np.array_equal(a, b)


def test_thinned_density_basics(profile):
    rho = 1.1e-3
    assert thinned_density(0.0, profile, rho) == 0.0
    assert thinned_density(1e9, profile, rho) == pytest.approx(rho * 0.2, rel=1e-12)
    zero_pop = ContentClass(popularity=0.0, scale_s=900.0, shape=5.0)
    t = np.linspace(0, 20000, 50)
    assert np.all(thinned_density(t, zero_pop, rho) == 0.0)
    assert np.all(thinned_density(t, profile, rho) <= rho)
    # plain product check
    mid = invert_cdf(0.5, profile)
    assert thinned_density(mid, profile, rho) == pytest.approx(
        rho * 0.2 * 0.5, rel=1e-5
    )


def test_content_class_validation():
    with pytest.raises(ValueError):
        ContentClass(popularity=1.5, scale_s=900.0, shape=5.0)
    with pytest.raises(ValueError):
        ContentClass(popularity=0.2, scale_s=0.0, shape=5.0)
    with pytest.raises(ValueError):
        ContentClass(popularity=0.2, scale_s=900.0, shape=-1.0)
    with pytest.raises(ValueError):
        ContentClass(popularity=0.2, scale_s=900.0, shape=5.0, timeout_s=-1.0)
    with pytest.raises(ValueError):
        ContentClass(popularity=0.2, scale_s=900.0, shape=5.0, truncation_s=0.0)


def test_traffic_mix_validation():
    cls = ContentClass(popularity=0.2, scale_s=900.0, shape=5.0)
    TrafficMix(entries=((cls, 0.4), (cls, 0.6)))
    with pytest.raises(ValueError):
        TrafficMix(entries=())
    with pytest.raises(ValueError):
        TrafficMix(entries=((cls, 0.4), (cls, 0.5)))
    with pytest.raises(ValueError):
        TrafficMix(entries=((cls, -0.1), (cls, 1.1)))

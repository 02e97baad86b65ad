import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from ergodesc.dfa import (
    InsufficientScalesError,
    fluctuation,
    hurst,
    integrate_profile,
    scale_grid,
)
from ergodesc.errors import InvalidArgumentError, UndefinedDescriptorError
from ergodesc.noise import gen_pink, gen_white, shuffle, unsign


def test_profile_examples():
    assert integrate_profile([1, 1, 1]).tolist() == [0, 0, 0]
    assert integrate_profile([1, -1, 1, -1]).tolist() == [1, 0, 1, 0]


def test_profile_of_offset_alternation():
    # grand mean 0.5 is removed before summing
    assert np.allclose(integrate_profile([1, 0, 1, 0]), [0.5, 0, 0.5, 0])


@given(st.lists(st.floats(-1e3, 1e3), min_size=2, max_size=300))
def test_profile_ends_at_zero(xs):
    assert abs(integrate_profile(xs)[-1]) <= 1e-10 * max(1.0, np.abs(xs).sum())


def test_profile_too_short():
    with pytest.raises(InvalidArgumentError):
        integrate_profile([1.0])


def test_scale_grid_250():
    g = scale_grid(250)
    assert g[0] == 4 and g[-1] == 62
    assert np.all(np.diff(g) > 0)


@pytest.mark.parametrize("n", [16, 250, 1000, 10_000])
def test_scale_grid_bounds(n):
    g = scale_grid(n)
    assert g.min() >= 4 and g.max() <= n // 4
    assert len(g) <= 15


def test_linear_profile_zero_fluctuation():
    y = 3.0 * np.arange(400) - 7.0
    for n in (4, 10, 100):
        assert fluctuation(y, n) == pytest.approx(0, abs=1e-9)


def test_fluctuation_linear_in_amplitude(rng):
    y = np.cumsum(rng.standard_normal(1000))
    for n in (4, 16, 250):
        assert fluctuation(2 * y, n) == pytest.approx(2 * fluctuation(y, n), rel=1e-12)


def test_fluctuation_white_growth(white_50k):
    prof = integrate_profile(white_50k.values)
    ns = np.array([16, 64, 256, 1024])
    f = [fluctuation(prof, n) for n in ns]
    assert np.polyfit(np.log(ns), np.log(f), 1)[0] == pytest.approx(0.5, abs=0.05)


@pytest.mark.parametrize("n", [3, 251])
def test_fluctuation_scale_out_of_range(n):
    with pytest.raises(InvalidArgumentError):
        fluctuation(np.zeros(1000), n)


def test_white_50k(white_50k):
    res = hurst(white_50k.values)
    assert res.hurst == pytest.approx(0.50, abs=0.03)
    assert not res.low_fit_quality


def test_shuffled_unsigned_pink(pink_50k):
    assert hurst(shuffle(unsign(pink_50k), 1).values).hurst == pytest.approx(0.50, abs=0.04)


def test_result_invariants(white_50k):
    res = hurst(white_50k.values[:1000])
    assert np.all(np.diff(res.scales) > 0)
    assert res.scales.min() >= 4 and res.scales.max() <= 250
    assert np.all(res.fluctuations > 0)
    slope = np.polyfit(np.log(res.scales), np.log(res.fluctuations), 1)[0]
    assert res.hurst == pytest.approx(slope, abs=1e-12)
    assert 0 <= res.fit_r2 <= 1


@given(st.integers(0, 10_000), st.floats(0.01, 100) | st.floats(-100, -0.01), st.floats(-1e3, 1e3))
@settings(max_examples=30, deadline=None)
def test_affine_invariance(seed, a, b):
    x = gen_white(512, seed).values
    assert hurst(a * x + b).hurst == pytest.approx(hurst(x).hurst, abs=1e-8)


def test_white_10k_distribution():
    hs = np.array([hurst(gen_white(10_000, s).values).hurst for s in range(100)])
    assert np.mean((hs >= 0.45) & (hs <= 0.55)) >= 0.95


@pytest.mark.parametrize("seed", range(5))
def test_shuffle_moves_toward_half(seed):
    x = unsign(gen_pink(10_000, seed))
    h0 = hurst(x.values).hurst
    h1 = hurst(shuffle(x, seed + 100).values).hurst
    assert abs(h1 - 0.5) < abs(h0 - 0.5) + 0.05


def test_constant_is_undefined():
    with pytest.raises(UndefinedDescriptorError):
        hurst(np.ones(100))


def test_too_short():
    with pytest.raises(InvalidArgumentError):
        hurst(np.arange(15.0))


def test_insufficient_scales():
    with pytest.raises(InsufficientScalesError):
        hurst(gen_white(100, 0).values, scales=[4, 5])


def test_low_fit_flag():
    # a sinusoid with period inside the scale range bends the log-log curve
    t = np.arange(2000)
    res = hurst(np.sin(2 * np.pi * t / 40))
    assert res.fit_r2 < 0.9 and res.low_fit_quality

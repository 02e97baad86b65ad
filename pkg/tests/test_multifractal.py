import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from hypothesis.extra.numpy import arrays

from ergodesc import multifractal as mf
from ergodesc.errors import (
    DegenerateInputError,
    ExtremeQError,
    InvalidArgumentError,
    UndefinedDescriptorError,
)
from ergodesc.noise import gen_pink, gen_white, shuffle, unsign

# analytic cascade spectrum, alpha(q) = -(p^q log2 p + (1-p)^q log2(1-p)) / (p^q + (1-p)^q),
# evaluated with p = 0.6 (frozen from an independent closed-form computation)
CASCADE_ALPHA = {5.0: 0.8050339578864862, -5.0: 1.253859731167082, 1.0: 0.9709505944546686}
CASCADE_F = {5.0: 0.5188171234076411, -5.0: 0.5188171234076412, 1.0: 0.9709505944546686}
CASCADE_WIDTH_Q5 = 0.4488257732805958
CASCADE_WIDTH_LIMIT = np.log2(0.6 / 0.4)  # q -> +-inf, 0.585

positive = arrays(np.float64, st.integers(128, 512), elements=st.floats(1e-3, 1e3))


class TestProportions:
    def test_uniform(self):
        assert np.allclose(mf.bin_proportions(np.ones(100), 10), 0.1, rtol=0, atol=1e-15)

    def test_example(self):
        assert mf.bin_proportions([1, 0, 0, 1], 2).tolist() == [0.5, 0.5]

    @given(positive, st.sampled_from([1, 2, 4, 8, 16]))
    def test_sum_to_one(self, x, L):
        x = x[: x.size // L * L]
        assert mf.bin_proportions(x, L).sum() == pytest.approx(1, abs=1e-12)

    def test_tail_dropped(self):
        assert mf.bin_proportions([1, 1, 1, 1, 4], 2).sum() == pytest.approx(0.5)

    def test_errors(self):
        with pytest.raises(DegenerateInputError):
            mf.bin_proportions(np.zeros(8), 2)
        with pytest.raises(InvalidArgumentError):
            mf.bin_proportions([1, -1, 2, 3], 2)
        with pytest.raises(InvalidArgumentError):
            mf.bin_proportions([1, 2], 3)


class TestMasses:
    P = np.array([0.1, 0.2, 0.3, 0.4])

    def test_q0_uniform(self):
        assert np.allclose(mf.masses(self.P, 0), 0.25)

    def test_q1_identity(self):
        assert np.allclose(mf.masses(self.P, 1), self.P, rtol=1e-15)

    @given(st.floats(-20, 20))
    def test_normalized(self, q):
        assert mf.masses(self.P, q).sum() == pytest.approx(1, abs=1e-12)

    def test_zero_proportion_rejected(self):
        with pytest.raises(InvalidArgumentError):
            mf.masses([0.0, 1.0], 2)

    def test_overflow(self):
        with pytest.raises(ExtremeQError):
            mf.masses([1e-300, 1.0], -5)

    def test_batch_softmax_survives_extreme_q(self, cascade):
        a, f, ra, rf = mf.spectrum_batch(cascade[None, :], [-200.0, 200.0])
        assert np.all(np.isfinite(a)) and np.all(np.isfinite(f))


class TestCascade:
    @pytest.mark.parametrize("q", [5.0, -5.0, 1.0])
    def test_alpha_f_exact(self, cascade, q):
        a, f, ra, rf = mf.alpha_f_for_q(cascade, q)
        assert a == pytest.approx(CASCADE_ALPHA[q], abs=1e-10)
        assert f == pytest.approx(CASCADE_F[q], abs=1e-10)
        assert ra == pytest.approx(1) and rf == pytest.approx(1)

    @pytest.mark.parametrize("q, limit", [(5.0, -np.log2(0.6)), (-5.0, -np.log2(0.4))])
    def test_alpha_near_limit(self, cascade, q, limit):
        assert mf.alpha_f_for_q(cascade, q)[0] == pytest.approx(limit, rel=0.10)

    def test_width_default_grid_exact(self, cascade):
        assert mf.spectrum(cascade).delta_alpha == pytest.approx(CASCADE_WIDTH_Q5, abs=1e-10)

    def test_width_default_grid_vs_limit(self, cascade):
        # q restricted to [-5, 5]; the analytic width at those q is 0.449, not the
        # q -> infinity limit 0.585 this example expects
        assert mf.spectrum(cascade).delta_alpha == pytest.approx(CASCADE_WIDTH_LIMIT, rel=0.10)

    def test_width_wide_grid(self, cascade):
        s = mf.spectrum(cascade, np.arange(-10, 10.001, 0.25))
        assert s.delta_alpha == pytest.approx(CASCADE_WIDTH_LIMIT, rel=0.10)


def test_uniform_series():
    u = np.ones(2048)
    for q in (-5.0, 0.0, 2.5, 5.0):
        a, f, _, _ = mf.alpha_f_for_q(u, q)
        assert a == pytest.approx(1, abs=1e-6) and f == pytest.approx(1, abs=1e-6)
    assert mf.spectrum(u).delta_alpha < 0.02


@given(positive)
@settings(max_examples=40, deadline=None)
def test_tangency_at_q1(x):
    a, f, _, _ = mf.alpha_f_for_q(x, 1.0)
    assert f <= a + 1e-6


@given(positive, st.floats(1e-3, 1e3))
@settings(max_examples=30, deadline=None)
def test_scale_invariance(x, c):
    a, f, ra, rf = mf.spectrum_batch(x[None, :])
    b = mf.spectrum_batch(c * x[None, :])
    for u, v in zip((a, f, ra, rf), b):
        assert np.allclose(u, v, atol=1e-8, equal_nan=True)


@pytest.mark.parametrize("seed", range(6))
def test_spectrum_invariants(seed):
    s = mf.spectrum(unsign(gen_pink(1000, seed)).values)
    acc = s.alpha[s.accepted]
    assert s.delta_alpha == pytest.approx(acc.max() - acc.min())
    assert s.delta_alpha >= 0
    assert np.all(s.r_alpha[s.accepted] > 0.995) and np.all(s.r_f[s.accepted] > 0.995)
    assert s.monotone_warning == bool(np.any(np.diff(acc) > mf.MONOTONE_SLACK))


def test_zero_bins_dropped():
    x = np.abs(gen_white(1024, 1).values)
    x[:8] = 0.0
    s = mf.spectrum(x)
    assert np.isfinite(s.delta_alpha)


def test_default_scales():
    assert mf.default_scales(1000).tolist() == [4, 8, 16, 32, 64]


def test_white_epoch_width_small_and_shuffle_in_band():
    x = unsign(gen_white(1000, 3))
    da = mf.spectrum(x.values).delta_alpha
    sur = [mf.spectrum(shuffle(x, s).values).delta_alpha for s in range(32)]
    assert da < 0.5
    assert abs(da - np.mean(sur)) < 2 * np.std(sur, ddof=1)


def test_pink_wider_than_white():
    pink = [mf.spectrum(unsign(gen_pink(1000, s)).values).delta_alpha for s in range(20)]
    white = [mf.spectrum(unsign(gen_white(1000, s)).values).delta_alpha for s in range(20)]
    assert np.mean(pink) > np.mean(white)


def test_undefined_when_gate_fails():
    with pytest.raises(UndefinedDescriptorError):
        mf.spectrum(np.abs(gen_white(256, 0).values), r_threshold=0.999999999)


def test_bad_threshold():
    with pytest.raises(InvalidArgumentError):
        mf.spectrum(np.ones(64), r_threshold=1.5)

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from conftest import binomial_cascade
from ergodesc import surrogate as sg
from ergodesc.errors import InvalidArgumentError, UndefinedDescriptorError
from ergodesc.noise import TimeSeries, gen_pink, gen_white, unsign


def _lag1(x):
    x = x - x.mean()
    return np.dot(x[1:], x[:-1]) / np.dot(x, x)


@given(st.integers(0, 2**31), st.integers(8, 300))
@settings(max_examples=40, deadline=None)
def test_multiset_exact(seed, n):
    x = np.random.default_rng(seed).standard_normal(n) ** 3
    y = sg.iaaft(x, seed)
    assert np.array_equal(np.sort(y), np.sort(x))


def test_mean_and_variance_preserved(unsigned_pink_1000):
    x = unsigned_pink_1000.values
    y = sg.iaaft(unsigned_pink_1000, 4).values
    assert y.mean() == pytest.approx(x.mean(), rel=1e-14)
    assert y.var() == pytest.approx(x.var(), rel=1e-14)


def test_constant_unchanged():
    x = np.full(50, 2.5)
    assert np.array_equal(sg.iaaft(x, 0), x)
    ens = sg.iaaft_ensemble(x, 3, 0)
    assert all(np.array_equal(s, x) for s in ens.surrogates)


def test_too_short():
    with pytest.raises(InvalidArgumentError):
        sg.iaaft(np.arange(7.0), 0)


@pytest.mark.parametrize("n", [999, 1000])
def test_odd_even_lengths(n):
    x = unsign(gen_pink(n, 1)).values
    y = sg.iaaft(x, 2)
    assert y.size == n and np.array_equal(np.sort(y), np.sort(x))
    start = np.random.default_rng(2).permutation(x)
    assert sg.spectral_mismatch(y, x) < 0.2 * sg.spectral_mismatch(start, x)


@pytest.mark.parametrize("seed", range(5))
def test_lag1_autocorrelation_preserved(seed):
    x = unsign(gen_pink(1000, seed)).values
    assert abs(_lag1(sg.iaaft(x, seed)) - _lag1(x)) < 0.05


def test_timeseries_tag(unsigned_pink_1000):
    y = sg.iaaft(unsigned_pink_1000, 1)
    assert isinstance(y, TimeSeries) and y.meta.tags[-1] == "iaaft"


def test_ensemble_seeds_and_determinism(unsigned_pink_1000):
    ens = sg.iaaft_ensemble(unsigned_pink_1000, 4, 9)
    again = sg.iaaft_ensemble(unsigned_pink_1000, 4, 9)
    assert all(np.array_equal(a.values, b.values) for a, b in zip(ens.surrogates, again.surrogates))
    single = sg.iaaft(unsigned_pink_1000, sg.derive_seed(9, 2))
    assert np.array_equal(ens.surrogates[2].values, single.values)
    assert len({s.values.tobytes() for s in ens.surrogates}) == 4


def test_ensemble_errors_converged_or_flagged(unsigned_pink_1000):
    ens = sg.iaaft_ensemble(unsigned_pink_1000, 8, 3)
    ok = (ens.spectral_errors <= sg.TOL) | (ens.iterations_used == ens.max_iter)
    assert np.all(ok)


def test_iterations_bounded():
    ens = sg.iaaft_ensemble(gen_white(256, 0).values, 4, 1, max_iter=3)
    assert np.all(ens.iterations_used <= 3)
    assert np.all(ens.unconverged == (ens.iterations_used >= 3))


def test_spectral_mismatch_identity(rng):
    x = rng.standard_normal(100)
    assert sg.spectral_mismatch(x, x) == 0
    assert sg.spectral_mismatch(x[::-1], x) == pytest.approx(0, abs=1e-14)


class TestTmf:
    def test_t_zero_when_equal_to_mean(self):
        t, used, flags = sg._t_from(0.5, np.array([0.4, 0.6, 0.5]))
        assert t == 0 and used == 3 and flags == ()

    def test_formula(self):
        sur = np.array([0.1, 0.2, 0.3, np.nan])
        t, used, _ = sg._t_from(0.5, sur)
        assert used == 3
        assert t == pytest.approx((0.5 - 0.2) / (0.1 / np.sqrt(3)), rel=1e-12)

    def test_zero_sd(self):
        t, _, flags = sg._t_from(0.5, np.array([0.2, 0.2]))
        assert t == np.inf and flags == ("zero-surrogate-sd",)

    def test_too_few_surrogates(self):
        with pytest.raises(UndefinedDescriptorError):
            sg._t_from(0.5, np.array([0.2, np.nan]))

    def test_scale_invariant(self, unsigned_pink_1000):
        x = unsigned_pink_1000.values
        assert sg.t_mf(3.7 * x, 8, 1) == pytest.approx(sg.t_mf(x, 8, 1), abs=1e-8)

    def test_deterministic(self, unsigned_pink_1000):
        a = sg.t_mf_detail(unsigned_pink_1000, 8, 5)
        b = sg.t_mf_detail(unsigned_pink_1000, 8, 5)
        assert a.t == b.t and np.array_equal(a.surrogate_delta_alpha, b.surrogate_delta_alpha)

    def test_pink_below_cascade(self):
        pink = [abs(sg.t_mf(unsign(gen_pink(1024, s)).values, 16, s)) for s in range(4)]
        casc = abs(sg.t_mf(binomial_cascade(0.6, 10), 16, 0))
        assert np.mean(pink) < casc

    def test_pink_above_white(self):
        pink = [sg.t_mf(unsign(gen_pink(1000, s)).values, 16, s) for s in range(8)]
        white = [sg.t_mf(unsign(gen_white(1000, s)).values, 16, s) for s in range(8)]
        assert np.mean(pink) > np.mean(white)

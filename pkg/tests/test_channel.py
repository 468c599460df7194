import math

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st
from scipy import integrate

from bicmlab.channel import (
    ChannelModel,
    Observation,
    db_to_linear,
    linear_to_db,
    log_transition_density,
    sample,
    transition_density,
)

from oracles import mp_log_density

finite = st.floats(-50, 50, allow_nan=False)


class TestChannelModel:
    @pytest.mark.parametrize("snr", [0.0, -1.0, float("inf"), float("nan")])
    def test_rejects_bad_snr(self, snr):
        with pytest.raises(ValueError):
            ChannelModel("awgn", snr)

    def test_rejects_unknown_kind(self):
        with pytest.raises(ValueError):
            ChannelModel("rician", 1.0)

    @given(st.floats(-60, 60))
    def test_db_roundtrip(self, db):
        assert abs(float(linear_to_db(db_to_linear(db))) - db) < 1e-12
        assert ChannelModel.from_db("awgn", db).snr_db == pytest.approx(db, abs=1e-12)


class TestDensity:
    def test_peak_value(self):
        ch = ChannelModel("awgn", 4.0)
        x = (1 + 1j) / math.sqrt(2)
        assert transition_density(ch, Observation(2 * x), x) == pytest.approx(1 / math.pi)
        assert log_transition_density(ch, Observation(2 * x), x) == pytest.approx(-math.log(math.pi))

    def test_vanishing_snr_forgets_input(self):
        ch = ChannelModel("awgn", 1e-300)
        obs = Observation(0.3 - 0.2j)
        assert transition_density(ch, obs, 1.0) == pytest.approx(transition_density(ch, obs, -1.0), rel=1e-12)

    @given(finite, finite, finite, finite, st.floats(1e-3, 100))
    def test_log_matches_log_of_density(self, yr, yi, hr, hi, snr):
        ch = ChannelModel("rayleigh", snr)
        obs = Observation(yr + 1j * yi, hr + 1j * hi)
        p = transition_density(ch, obs, 1j)
        lp = log_transition_density(ch, obs, 1j)
        if p > 1e-300:
            assert abs(math.log(p) - lp) < 1e-12 * max(1.0, abs(lp))

    def test_deep_tail_stays_finite(self):
        ch = ChannelModel("awgn", 1.0)
        y = 60.0 + 0j
        assert transition_density(ch, Observation(y), -1.0) == 0.0
        lp = log_transition_density(ch, Observation(y), -1.0)
        assert lp == pytest.approx(mp_log_density(y, 1.0, 1.0, -1.0), rel=1e-14)

    @pytest.mark.parametrize("h", [1.0, 0.3 - 0.8j])
    def test_integrates_to_one(self, h):
        ch = ChannelModel("rayleigh", 2.0)
        x = np.exp(0.4j)
        c = h * ch.amplitude * x
        f = lambda yi, yr: float(transition_density(ch, Observation(yr + 1j * yi, h), x))
        val, _ = integrate.dblquad(f, c.real - 8, c.real + 8, c.imag - 8, c.imag + 8)
        assert abs(val - 1.0) < 1e-3


class TestSampler:
    N = 1_000_000

    def test_noise_power(self, rng):
        ch = ChannelModel("awgn", 3.0)
        x = np.exp(2j * np.pi * rng.integers(0, 8, self.N) / 8)
        obs = sample(ch, x, rng)
        r2 = np.abs(obs.y - obs.h * ch.amplitude * x) ** 2
        assert abs(r2.mean() - 1.0) < 0.01
        np.testing.assert_array_equal(obs.h, 1.0)

    def test_rayleigh_fading_power(self, rng):
        ch = ChannelModel("rayleigh", 3.0)
        obs = sample(ch, np.ones(self.N), rng)
        h2 = np.abs(obs.h) ** 2
        assert abs(h2.mean() - 1.0) < 0.01
        # independence of h and z: residual power unchanged by conditioning on |h|
        r2 = np.abs(obs.y - obs.h * ch.amplitude) ** 2
        big = h2 > 1
        se = r2.std() * math.sqrt(1 / big.sum() + 1 / (~big).sum())
        assert abs(r2[big].mean() - r2[~big].mean()) < 4 * se

    def test_moments_within_standard_errors(self, rng):
        ch = ChannelModel("awgn", 1.0)
        obs = sample(ch, np.zeros(self.N), rng)
        for comp in (obs.y.real, obs.y.imag):
            se = comp.std() / math.sqrt(self.N)
            assert abs(comp.mean()) < 3 * se
            assert abs(comp.var() - 0.5) < 3 * 0.5 * math.sqrt(2 / self.N)

    def test_seeded_stream_repeats(self):
        ch = ChannelModel("rayleigh", 1.0)
        a = sample(ch, np.ones(100), np.random.default_rng(5))
        b = sample(ch, np.ones(100), np.random.default_rng(5))
        np.testing.assert_array_equal(a.y, b.y)
        np.testing.assert_array_equal(a.h, b.h)

    def test_observation_indexing(self):
        obs = Observation(np.arange(4) + 0j)
        sub = obs[1:3]
        np.testing.assert_array_equal(sub.y, [1, 2])
        np.testing.assert_array_equal(sub.h, [1, 1])
        assert len(obs) == 4

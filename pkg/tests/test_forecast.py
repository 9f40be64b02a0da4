"""Preprocessing, period and change-point detection, and the ensemble forecast."""

import dataclasses

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from abase_lite.forecast import (ForecastConfig, MetricSeries, SeriesError, denoise, detect_changepoint,
                                 detect_period, forecast, mape, read_series_csv, write_series_csv)
from abase_lite.synthetic import diurnal_growth_series

HOURS_30D = 30 * 24


def sine(days=30, base=100.0, amp=10.0, period=24, noise=0.0, seed=0):
    t = np.arange(days * 24)
    x = base + amp * np.sin(2 * np.pi * t / period)
    if noise:
        x = x * (1 + noise * np.random.default_rng(seed).standard_normal(len(t)))
    return x


class TestDenoise:
    def test_simultaneous_spike_replaced(self):
        u, q = sine(), np.full(HOURS_30D, 1000.0)
        u[300] *= 10
        q[300] *= 10
        out = denoise(u, q)
        assert out[300] == pytest.approx(np.median(u[288:313]), rel=0.05)

    def test_recurring_usage_only_spike_retained(self):
        u, q = sine(), np.full(HOURS_30D, 1000.0)
        for h in (300, 324, 348):
            u[h] = 1000.0
        q[348] = 10_000.0  # the last one coincides with a quota spike
        out = denoise(u, q)
        assert out[300] == out[324] == 1000.0
        assert out[348] < 200

    def test_one_off_peak_removed(self):
        u = sine()
        u[400] = 2000.0
        assert denoise(u)[400] < 200

    def test_untouched_without_spikes(self):
        u = sine(noise=0.05)
        assert np.array_equal(denoise(u), u)

    def test_misaligned_grids(self):
        with pytest.raises(SeriesError):
            denoise(np.ones(10), np.ones(11))
        with pytest.raises(SeriesError):
            denoise(MetricSeries(np.ones(10), start=0), MetricSeries(np.ones(10), start=3600, kind="quota"))


class TestChangepoint:
    def test_step_located(self):
        x = np.where(np.arange(HOURS_30D) < 15 * 24, 100.0, 200.0)
        x = x + np.random.default_rng(1).normal(0, 3, len(x))
        cp = detect_changepoint(x)
        assert cp is not None and abs(cp - 15 * 24) <= 24

    def test_stationary(self):
        assert detect_changepoint(sine(noise=0.02)) is None

    def test_ramp_is_not_a_step(self):
        assert detect_changepoint(np.linspace(100, 400, HOURS_30D)) is None

    def test_short_series(self):
        assert detect_changepoint(np.ones(100)) is None


class TestPeriod:
    def test_daily_sine_with_noise(self):
        assert detect_period(sine(noise=0.05, seed=3)) == 24

    def test_three_and_a_half_day_square_wave(self):
        t = np.arange(HOURS_30D)
        x = np.where((t % 84) < 42, 150.0, 50.0)
        assert detect_period(x) == 84

    def test_white_noise(self):
        x = np.random.default_rng(5).normal(100, 10, HOURS_30D)
        assert detect_period(x) is None

    def test_constant(self):
        assert detect_period(np.full(HOURS_30D, 7.0)) is None


class TestForecast:
    def test_sine_mape(self):
        hist = sine(days=37)
        res = forecast(hist[:HOURS_30D])
        assert res.horizon == 168
        assert mape(hist[HOURS_30D:], res.forecast) <= 0.02

    def test_constant_series(self):
        res = forecast(np.full(HOURS_30D, 42.0))
        assert np.allclose(res.forecast, 42.0) and res.u_max == pytest.approx(42.0)

    def test_random_hour_daily_bursts_trigger_guard(self):
        rng = np.random.default_rng(9)
        x = np.full(HOURS_30D, 100.0)
        for day in range(30):
            x[day * 24 + rng.integers(24)] = 500.0
        res = forecast(x)
        assert res.burst_guard_applied and res.u_max >= 450

    def test_short_history_falls_back(self):
        res = forecast(sine(days=5))
        assert res.fallback and res.weights == {"seasonal_trend": 0.0, "historical_average": 1.0}

    def test_empty_series(self):
        res = forecast(np.array([]))
        assert res.u_max == 0.0 and res.fallback

    def test_growth_tracked(self):
        full = diurnal_growth_series(37, 400, 0.3, 0.03)
        res = forecast(full[:HOURS_30D])
        assert mape(full[HOURS_30D:], res.forecast) <= 0.10
        assert res.u_max == pytest.approx(full[HOURS_30D:].max(), rel=0.05)

    def test_weights_sum_to_one(self):
        res = forecast(sine(noise=0.05, seed=2))
        assert sum(res.weights.values()) == pytest.approx(1.0)

    @pytest.mark.parametrize("only", ["seasonal_trend", "historical_average"])
    def test_single_component_equals_that_component(self, only):
        x = sine(noise=0.05, seed=4)
        cfg = ForecastConfig(use_seasonal_trend=only == "seasonal_trend",
                             use_historical_average=only == "historical_average", guard_margin=0.99)
        res = forecast(x, cfg=cfg)
        assert res.weights[only] == 1.0
        both = forecast(x, cfg=dataclasses.replace(cfg, use_seasonal_trend=True, use_historical_average=True))
        assert not np.array_equal(res.forecast, both.forecast)

    def test_no_components(self):
        with pytest.raises(ValueError):
            forecast(sine(), cfg=ForecastConfig(use_seasonal_trend=False, use_historical_average=False))

    @settings(max_examples=25, deadline=None)
    @given(st.integers(0, 10_000), st.floats(0, 3), st.floats(-0.05, 0.05))
    def test_guard_never_lowers_and_output_non_negative(self, seed, amp, growth):
        rng = np.random.default_rng(seed)
        x = diurnal_growth_series(20, 100, min(amp, 0.9), growth, 0.2, seed)
        x[rng.integers(len(x), size=5)] *= rng.uniform(1, 8)
        with_guard = forecast(x)
        without = forecast(x, cfg=ForecastConfig(guard_margin=1.0))
        assert with_guard.u_max >= without.u_max
        assert np.all(with_guard.forecast >= 0)

    def test_deterministic(self):
        x = sine(noise=0.1, seed=8)
        a, b = forecast(x), forecast(x)
        assert a.to_dict() == b.to_dict()


class TestSeriesIO:
    def test_roundtrip(self, tmp_path):
        s = MetricSeries(sine(days=2), start=1_700_000_000)
        write_series_csv(tmp_path / "s.csv", s)
        back = read_series_csv(tmp_path / "s.csv")
        assert back.start == s.start and np.array_equal(back.values, s.values)

    def test_iso_timestamps(self, tmp_path):
        p = tmp_path / "s.csv"
        p.write_text("timestamp,value\n2024-01-01T00:00:00Z,1\n2024-01-01T01:00:00Z,2\n")
        assert list(read_series_csv(p).values) == [1.0, 2.0]

    def test_broken_grid(self, tmp_path):
        p = tmp_path / "s.csv"
        p.write_text("0,1\n3600,2\n9000,3\n")
        with pytest.raises(SeriesError, match="row 3"):
            read_series_csv(p)

    def test_bad_value(self, tmp_path):
        p = tmp_path / "s.csv"
        p.write_text("0,1\n3600,abc\n")
        with pytest.raises(SeriesError, match=":2:"):
            read_series_csv(p)

    def test_negative_rejected(self):
        with pytest.raises(SeriesError):
            MetricSeries(np.array([1.0, -1.0]))

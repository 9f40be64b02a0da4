"""Workload forecasting for the autoscaler.

Pipeline: denoise (simultaneous usage/quota spikes, one-off peaks), focus on
data after the latest level shift, detect the period from the power
spectrum, then blend a trend+seasonal least-squares fit with a per-phase
historical average. A burst guard falls back to the most recent period's
history when the blend undershoots recent peaks.
"""

from __future__ import annotations

import csv
import math
from dataclasses import asdict, dataclass, field
from datetime import datetime, timezone
from pathlib import Path

import numpy as np
from scipy.ndimage import median_filter

HOUR = 3600.0


class SeriesError(ValueError):
    pass


@dataclass
class MetricSeries:
    values: np.ndarray
    start: float = 0.0  # epoch seconds of the first point
    kind: str = "usage"
    step: float = HOUR

    def __post_init__(self):
        self.values = np.asarray(self.values, dtype=float)
        if self.values.ndim != 1:
            raise SeriesError("series must be one-dimensional")
        if np.any(self.values < 0) or not np.all(np.isfinite(self.values)):
            raise SeriesError("series values must be finite and non-negative")

    def __len__(self):
        return len(self.values)

    def with_values(self, values) -> "MetricSeries":
        return MetricSeries(np.asarray(values, dtype=float), self.start, self.kind, self.step)


@dataclass(frozen=True)
class ForecastConfig:
    horizon: int = 168
    spike_factor: float = 5.0
    median_window: int = 24
    sporadic_window: int = 240
    sporadic_similarity: float = 0.5
    changepoint_window: int = 72
    changepoint_effect: float = 0.25
    psd_ratio: float = 4.0
    psd_alpha: float = 0.01
    min_period: int = 4
    ha_periods: int = 2
    mae_window: int = 72
    guard_margin: float = 0.3
    fallback_period: int = 168
    min_history: int = 14 * 24
    use_seasonal_trend: bool = True
    use_historical_average: bool = True


@dataclass
class ForecastResult:
    forecast: np.ndarray
    u_max: float
    detected_period: int | None
    weights: dict
    burst_guard_applied: bool
    changepoint: int | None = None
    fallback: str | None = None
    horizon: int = field(init=False)

    def __post_init__(self):
        self.horizon = len(self.forecast)

    def to_dict(self) -> dict:
        d = asdict(self)
        d["forecast"] = [float(v) for v in self.forecast]
        d["u_max"] = float(self.u_max)
        return d


def _values(series) -> np.ndarray:
    if isinstance(series, MetricSeries):
        return series.values
    return np.asarray(series, dtype=float)


def rolling_median(x: np.ndarray, window: int = 24) -> np.ndarray:
    size = window + 1 if window % 2 == 0 else window
    return median_filter(x, size=size, mode="nearest")


def denoise(usage, quota=None, cfg: ForecastConfig = ForecastConfig()):
    """Drop simultaneous usage+quota spikes and peaks that never recur.

    A point is a spike when it exceeds ``spike_factor`` times its 24-hour
    rolling median. Spikes present in both series at the same hour are
    metric noise. A remaining usage spike with no comparable spike (at least
    half its height) within ``sporadic_window`` hours either side is a
    one-off. Both kinds are replaced by the rolling median.
    """
    u = _values(usage).copy()
    if quota is not None:
        q = _values(quota)
        if len(q) != len(u):
            raise SeriesError(f"usage has {len(u)} points but quota has {len(q)}")
        if isinstance(usage, MetricSeries) and isinstance(quota, MetricSeries):
            if usage.start != quota.start or usage.step != quota.step:
                raise SeriesError("usage and quota grids are not aligned")
        med_q = rolling_median(q, cfg.median_window)
        q_spike = q > cfg.spike_factor * med_q
    else:
        q_spike = np.zeros(len(u), dtype=bool)
    med_u = rolling_median(u, cfg.median_window)
    u_spike = u > cfg.spike_factor * med_u
    both = u_spike & q_spike
    u[both] = med_u[both]

    peaks = np.flatnonzero(u_spike & ~both)
    lone = []
    for h in peaks:
        near = peaks[np.abs(peaks - h) <= cfg.sporadic_window]
        similar = near[u[near] >= cfg.sporadic_similarity * u[h]]
        if len(similar) == 1:
            lone.append(h)
    if lone:
        lone = np.asarray(lone)
        u[lone] = med_u[lone]
    if isinstance(usage, MetricSeries):
        return usage.with_values(u)
    return u


def _window_means(x: np.ndarray, w: int):
    c = np.concatenate([[0.0], np.cumsum(x)])
    idx = np.arange(w, len(x) - w + 1)
    left = (c[idx] - c[idx - w]) / w
    right = (c[idx + w] - c[idx]) / w
    return idx, left, right


def _linear_sse(y: np.ndarray) -> float:
    t = np.arange(len(y), dtype=float)
    A = np.column_stack([np.ones_like(t), t])
    coef, *_ = np.linalg.lstsq(A, y, rcond=None)
    r = y - A @ coef
    return float(r @ r)


def detect_changepoint(series, cfg: ForecastConfig = ForecastConfig()) -> int | None:
    """Most recent level shift, or None.

    Candidates are indices where the means of the adjoining windows differ
    by at least ``changepoint_effect`` (relative to the earlier window) and
    where a two-level fit explains the surrounding data better than a
    straight line, which separates steps from ramps.
    """
    x = _values(series)
    w = cfg.changepoint_window
    if len(x) < 7 * 24 or len(x) < 2 * w:
        return None
    idx, left, right = _window_means(x, w)
    rel = np.abs(right - left) / np.maximum(np.abs(left), 1e-12)
    cand = idx[rel >= cfg.changepoint_effect]
    accepted = []
    for i in cand:
        seg_l, seg_r = x[i - w:i], x[i:i + w]
        sse_step = float(((seg_l - seg_l.mean()) ** 2).sum() + ((seg_r - seg_r.mean()) ** 2).sum())
        if sse_step < _linear_sse(x[i - w:i + w]):
            accepted.append(int(i))
    if not accepted:
        return None
    # last contiguous run of accepted indices
    run = [accepted[-1]]
    for i in reversed(accepted[:-1]):
        if run[-1] - i > 1:
            break
        run.append(i)
    diff = {i: abs(right[i - w] - left[i - w]) for i in run}
    return max(sorted(run), key=lambda i: diff[i])


def _fold_sse(x: np.ndarray, p: int) -> float:
    phases = np.arange(len(x)) % p
    sums = np.bincount(phases, weights=x, minlength=p)
    counts = np.bincount(phases, minlength=p)
    means = sums / np.maximum(counts, 1)
    r = x - means[phases]
    return float(r @ r)


def detect_period(series, cfg: ForecastConfig = ForecastConfig()) -> int | None:
    """Dominant period in hours from the periodogram, or None.

    The peak must hold ``psd_ratio`` times the median spectral power and
    pass Fisher's g-test at ``psd_alpha``. The integer period is then chosen
    among neighbours of the spectral estimate by the best phase-folded fit.
    """
    x = _values(series).astype(float)
    n = len(x)
    if n < 3 * cfg.min_period:
        return None
    t = np.arange(n, dtype=float)
    slope, intercept = np.polyfit(t, x, 1)
    r = x - (slope * t + intercept)
    if not np.any(r):
        return None
    power = np.abs(np.fft.rfft(r)) ** 2
    freqs = np.fft.rfftfreq(n)
    spec = power[1:]
    f = freqs[1:]
    band = (f >= 3.0 / n) & (f <= 1.0 / cfg.min_period)
    if not band.any():
        return None
    k = int(np.argmax(np.where(band, spec, -1.0)))
    peak = spec[k]
    median = float(np.median(spec))
    if median > 0 and peak < cfg.psd_ratio * median:
        return None
    m = len(spec)
    g = peak / spec.sum()
    p_value = min(1.0, m * (1.0 - g) ** (m - 1))
    if p_value >= cfg.psd_alpha:
        return None
    # refine on a zero-padded spectrum, then snap to an integer period
    pad = 16 * n
    fine = np.abs(np.fft.rfft(r, pad)) ** 2
    ff = np.fft.rfftfreq(pad)
    lo, hi = f[max(k - 1, 0)], f[min(k + 1, m - 1)]
    sel = (ff >= lo) & (ff <= hi) & (ff > 0)
    f_peak = ff[sel][np.argmax(fine[sel])] if sel.any() else f[k]
    est = 1.0 / f_peak
    lo_p = max(cfg.min_period, int(math.floor(est * 0.85)))
    hi_p = min(n // 3, int(math.ceil(est * 1.15)))
    if hi_p < lo_p:
        return None
    best, best_score = None, math.inf
    for p in range(lo_p, hi_p + 1):
        score = _fold_sse(r, p) / max(n - p - 2, 1)
        if score < best_score:
            best, best_score = p, score
    return best


def _seasonal_trend(x: np.ndarray, period: int | None, horizon: int):
    """Least-squares linear trend plus phase means; returns (fitted, forecast)."""
    n = len(x)
    t = np.arange(n + horizon, dtype=float)
    cols = [np.ones_like(t), t / max(n, 1)]
    if period and period > 1:
        phases = np.arange(n + horizon) % period
        for p in range(1, period):
            cols.append((phases == p).astype(float))
    A = np.column_stack(cols)
    coef, *_ = np.linalg.lstsq(A[:n], x, rcond=None)
    y = A @ coef
    return y[:n], y[n:]


def _historical_average(x: np.ndarray, period: int | None, horizon: int, periods: int):
    """Per-phase mean of the last ``periods`` periods, tiled forward.

    Also returns the same predictor replayed in-sample (each point predicted
    from the ``periods`` periods before it) for error weighting.
    """
    n = len(x)
    p = period or 24
    if n < p:
        level = float(x.mean()) if n else 0.0
        return np.full(n, level), np.full(horizon, level)
    use = min(periods, n // p)
    tail = x[n - use * p:]
    profile = tail.reshape(use, p).mean(axis=0)
    future_phase = (np.arange(n, n + horizon) - (n - use * p)) % p
    fc = profile[future_phase]
    fitted = np.full(n, np.nan)
    for i in range(use * p, n):
        fitted[i] = np.mean([x[i - j * p] for j in range(1, use + 1)])
    return fitted, fc


def _mae(actual: np.ndarray, fitted: np.ndarray, window: int) -> float:
    a, f = actual[-window:], fitted[-window:]
    ok = np.isfinite(f)
    if not ok.any():
        return math.inf
    return float(np.mean(np.abs(a[ok] - f[ok])))


def forecast(usage, quota=None, horizon: int | None = None,
             cfg: ForecastConfig = ForecastConfig()) -> ForecastResult:
    h = cfg.horizon if horizon is None else horizon
    raw = _values(usage)
    x = _values(denoise(raw, None if quota is None else _values(quota), cfg))
    n = len(x)
    if n == 0:
        return ForecastResult(np.zeros(h), 0.0, None, {"seasonal_trend": 0.0, "historical_average": 1.0},
                              False, fallback="empty series")

    fallback = None
    cp = detect_changepoint(x, cfg)
    fit = x[cp:] if cp is not None else x
    period = detect_period(fit if len(fit) >= 7 * 24 else x, cfg)
    if period is not None and len(fit) < 2 * period:
        period = None

    use_st = cfg.use_seasonal_trend
    use_ha = cfg.use_historical_average
    if n < cfg.min_history:
        fallback = f"only {n} hourly points (< {cfg.min_history}); historical average only"
        use_st, use_ha = False, True
    if not (use_st or use_ha):
        raise ValueError("at least one forecasting component must be enabled")

    comps, maes = {}, {}
    if use_st:
        fitted, fc = _seasonal_trend(fit, period, h)
        comps["seasonal_trend"] = fc
        maes["seasonal_trend"] = _mae(fit, fitted, cfg.mae_window)
    if use_ha:
        fitted, fc = _historical_average(fit, period, h, cfg.ha_periods)
        comps["historical_average"] = fc
        maes["historical_average"] = _mae(fit, fitted, cfg.mae_window)

    weights = _inverse_error_weights(maes)
    out = np.zeros(h)
    for name, w in weights.items():
        if w:
            out = out + w * comps[name]
    out = np.maximum(out, 0.0)
    weights = {"seasonal_trend": weights.get("seasonal_trend", 0.0),
               "historical_average": weights.get("historical_average", 0.0)}

    guard = False
    gp = period or cfg.fallback_period
    recent = x[-gp:]
    if len(recent) and out.max(initial=0.0) < (1.0 - cfg.guard_margin) * recent.max():
        reps = int(math.ceil(h / len(recent)))
        out = np.tile(recent, reps)[:h].astype(float)
        guard = True
    return ForecastResult(out, float(out.max(initial=0.0)), period, weights, guard, cp, fallback)


def _inverse_error_weights(maes: dict) -> dict:
    if len(maes) == 1:
        return {k: 1.0 for k in maes}
    exact = [k for k, v in maes.items() if v == 0]
    if exact:
        return {k: (1.0 / len(exact) if k in exact else 0.0) for k in maes}
    finite = {k: v for k, v in maes.items() if math.isfinite(v)}
    if not finite:
        return {k: 1.0 / len(maes) for k in maes}
    inv = {k: 1.0 / v for k, v in finite.items()}
    s = sum(inv.values())
    return {k: inv.get(k, 0.0) / s for k in maes}


def mape(actual, predicted) -> float:
    a = np.asarray(actual, dtype=float)
    p = np.asarray(predicted, dtype=float)
    return float(np.mean(np.abs(a - p) / np.maximum(np.abs(a), 1e-12)))


# ---- CSV interchange ---------------------------------------------------

def _parse_ts(text: str) -> float:
    text = text.strip()
    try:
        return float(text)
    except ValueError:
        dt = datetime.fromisoformat(text.replace("Z", "+00:00"))
        if dt.tzinfo is None:
            dt = dt.replace(tzinfo=timezone.utc)
        return dt.timestamp()


def read_series_csv(path, kind: str = "usage") -> MetricSeries:
    """Read ``timestamp,value`` rows on an hourly grid (header optional)."""
    stamps, values = [], []
    with open(path, newline="") as fh:
        for lineno, row in enumerate(csv.reader(fh), start=1):
            if not row or row[0].startswith("#"):
                continue
            if lineno == 1 and row[0].strip().lower() in ("timestamp", "time", "ts"):
                continue
            if len(row) < 2:
                raise SeriesError(f"{path}:{lineno}: expected timestamp,value")
            try:
                stamps.append(_parse_ts(row[0]))
                values.append(float(row[1]))
            except ValueError as exc:
                raise SeriesError(f"{path}:{lineno}: {exc}") from None
    if not values:
        raise SeriesError(f"{path}: no data rows")
    steps = np.diff(stamps)
    if len(steps) and not np.allclose(steps, HOUR):
        bad = int(np.flatnonzero(~np.isclose(steps, HOUR))[0]) + 2
        raise SeriesError(f"{path}: row {bad} breaks the 1-hour grid")
    return MetricSeries(np.asarray(values), stamps[0], kind)


def write_series_csv(path, series: MetricSeries) -> None:
    path = Path(path)
    with path.open("w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(["timestamp", "value"])
        for i, v in enumerate(series.values):
            w.writerow([int(series.start + i * series.step), repr(float(v))])

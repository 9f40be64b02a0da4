"""Seeded synthetic inputs: hourly usage series and replica load vectors."""

from __future__ import annotations

import numpy as np

from .domain import HOURS


def diurnal_growth_series(days: int = 30, base: float = 1000.0, amplitude: float = 0.3,
                          growth_per_day: float = 0.0, noise: float = 0.0, seed: int = 0,
                          period: int = 24, start: int = 0, seasonality: str = "additive") -> np.ndarray:
    """Hourly diurnal series with linear growth.

    Additive: ``base * (1 + g*t/24 + amplitude*sin(2*pi*t/period))``.
    Multiplicative: ``base * (1 + g*t/24) * (1 + amplitude*sin(2*pi*t/period))``.
    ``noise`` is a multiplicative Gaussian relative standard deviation.
    ``start`` shifts the time origin, so ``start=days*24`` continues a
    series generated with the same parameters.
    """
    t = np.arange(start, start + days * 24, dtype=float)
    trend = 1.0 + growth_per_day * t / 24.0
    season = amplitude * np.sin(2 * np.pi * t / period)
    if seasonality == "additive":
        x = base * (trend + season)
    elif seasonality == "multiplicative":
        x = base * trend * (1.0 + season)
    else:
        raise ValueError(f"unknown seasonality {seasonality!r}")
    if noise:
        x = x * (1.0 + noise * np.random.Generator(np.random.PCG64(seed)).standard_normal(len(x)))
    return np.clip(x, 0.0, None)


def seed_replica_loads(world, seed: int = 0, sigma: float = 1.0, ru_mean: float = 100.0,
                       storage_mean: float = 1e9) -> None:
    """Give every replica lognormal RU and storage loads.

    Tenant-level scales differ independently in the two dimensions and RU
    follows a tenant-specific diurnal shape; replicas of one partition share
    their partition's load.
    """
    rng = np.random.Generator(np.random.PCG64(seed))
    hours = np.arange(HOURS)
    for tid in sorted(world.tenants):
        ru_scale = ru_mean * rng.lognormal(0.0, sigma)
        sto_scale = storage_mean * rng.lognormal(0.0, sigma)
        phase = rng.uniform(0, HOURS)
        shape = 1.0 + 0.4 * np.cos(2 * np.pi * (hours - phase) / HOURS)
        for part in world.tenant_partitions(tid):
            f = rng.lognormal(0.0, 0.5)
            for rid in part.replica_ids:
                rep = world.replicas[rid]
                rep.ru_load_vector = ru_scale * f * shape
                rep.storage_load_vector = np.full(HOURS, sto_scale * f)

"""Stream alignment and multi-stream fusion.

Alignment puts irregular streams onto a common tick grid using linear
interpolation between bracketing samples.  Fusion collapses one or more
aligned streams into a single estimate with a scalar random-walk Kalman
filter (state transition 1, observation 1): slow ambient quantities do not
need a richer motion model, and the filter avoids the window-size dilemma of
moving-average smoothers.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Mapping, Sequence

import numpy as np

from .model import DataPoint, SensorStream

__all__ = [
    "KalmanConfig",
    "AlignedGrid",
    "FusedStream",
    "interpolate",
    "align",
    "kalman_fuse",
    "kalman_fuse_streams",
]


@dataclass(frozen=True)
class KalmanConfig:
    """Scalar Kalman filter parameters.

    ``measurement_noise`` applies to every source unless overridden per
    sensor id in ``per_source_noise``.  ``initial_state`` is either
    ``"first_measurement"`` or ``"mean"``.
    """

    process_noise: float = 1e-3
    measurement_noise: float = 0.1
    initial_variance: float = 1.0
    initial_state: str = "first_measurement"
    per_source_noise: Mapping[str, float] | None = None

    def __post_init__(self) -> None:
        if self.process_noise <= 0 or self.measurement_noise <= 0 or self.initial_variance <= 0:
            raise ValueError("process_noise, measurement_noise and initial_variance must be > 0")
        if self.initial_state not in ("first_measurement", "mean"):
            raise ValueError("initial_state must be 'first_measurement' or 'mean'")
        if self.per_source_noise is not None:
            bad = {k: v for k, v in self.per_source_noise.items() if v <= 0}
            if bad:
                raise ValueError(f"per-source noise must be > 0: {bad}")

    def noise_for(self, sensor_id: str) -> float:
        if self.per_source_noise and sensor_id in self.per_source_noise:
            return float(self.per_source_noise[sensor_id])
        return self.measurement_noise


@dataclass(frozen=True)
class AlignedGrid:
    """Streams resampled onto a shared tick grid; NaN marks a missing value.

    ``values`` has shape (len(sensor_ids), len(ticks_ms)).
    """

    ticks_ms: tuple[int, ...]
    sensor_ids: tuple[str, ...]
    values: np.ndarray

    def column(self, tick_index: int) -> list[tuple[str, float]]:
        """Available (sensor_id, value) pairs at one tick, id-ascending."""
        out = []
        for row, sid in enumerate(self.sensor_ids):
            v = self.values[row, tick_index]
            if not math.isnan(v):
                out.append((sid, float(v)))
        return out


@dataclass(frozen=True)
class FusedStream:
    """Single fused stream produced from several source streams."""

    points: tuple[DataPoint, ...]
    source_ids: tuple[str, ...]

    def values(self) -> list[float]:
        return [p.value for p in self.points]

    def timestamps(self) -> list[int]:
        return [p.timestamp_ms for p in self.points]


def interpolate(before: DataPoint, after: DataPoint, at_ms: int) -> DataPoint:
    """Linear interpolant between two known points of one stream.

    The target instant must lie inside ``[before, after]``; extrapolation is
    refused.  Endpoints reproduce the endpoint values exactly.
    """
    if before.sensor_id != after.sensor_id:
        raise ValueError("interpolation requires points from the same sensor")
    if before.timestamp_ms >= after.timestamp_ms:
        raise ValueError("'before' must precede 'after'")
    if not before.timestamp_ms <= at_ms <= after.timestamp_ms:
        raise ValueError(
            f"interpolation instant {at_ms} outside "
            f"[{before.timestamp_ms}, {after.timestamp_ms}] (no extrapolation)"
        )
    slope = (before.value - after.value) / (before.timestamp_ms - after.timestamp_ms)
    value = slope * (at_ms - after.timestamp_ms) + after.value
    return DataPoint(timestamp_ms=at_ms, value=value, sensor_id=before.sensor_id)


def align(
    streams: Sequence[SensorStream],
    ticks_ms: Sequence[int],
    delta_t_s: float,
    max_gap_s: float,
) -> AlignedGrid:
    """Resample streams onto ``ticks_ms``.

    Per tick and stream: take the nearest real sample within half a tick
    spacing; otherwise interpolate between the bracketing samples when both
    sit within ``max_gap_s`` of the tick; otherwise mark the cell missing.
    """
    if delta_t_s <= 0:
        raise ValueError("delta_t_s must be positive")
    if max_gap_s < 0:
        raise ValueError("max_gap_s must be >= 0")
    ordered = sorted(streams, key=lambda s: s.sensor_id)
    ticks = tuple(int(t) for t in ticks_ms)
    half_ms = delta_t_s * 1000.0 / 2.0
    gap_ms = max_gap_s * 1000.0
    values = np.full((len(ordered), len(ticks)), np.nan)
    for row, stream in enumerate(ordered):
        ts = stream.timestamps()
        for col, tick in enumerate(ticks):
            idx = _bisect(ts, tick)
            # nearest sample within half a tick spacing wins
            best = None
            for j in (idx - 1, idx):
                if 0 <= j < len(ts):
                    d = abs(ts[j] - tick)
                    if d <= half_ms and (best is None or d < best[0]):
                        best = (d, j)
            if best is not None:
                values[row, col] = stream.points[best[1]].value
                continue
            prev_j, next_j = idx - 1, idx
            if 0 <= prev_j and next_j < len(ts):
                if tick - ts[prev_j] <= gap_ms and ts[next_j] - tick <= gap_ms:
                    values[row, col] = interpolate(
                        stream.points[prev_j], stream.points[next_j], tick
                    ).value
    return AlignedGrid(
        ticks_ms=ticks,
        sensor_ids=tuple(s.sensor_id for s in ordered),
        values=values,
    )


def _bisect(ts: list[int], tick: int) -> int:
    """Index of the first timestamp >= tick."""
    lo, hi = 0, len(ts)
    while lo < hi:
        mid = (lo + hi) // 2
        if ts[mid] < tick:
            lo = mid + 1
        else:
            hi = mid
    return lo


class _ScalarKalman:
    """Random-walk scalar Kalman filter (single-owner mutable state)."""

    def __init__(self, cfg: KalmanConfig, initial_value: float):
        self.cfg = cfg
        self.state = float(initial_value)
        self.variance = cfg.initial_variance

    def predict(self) -> None:
        self.variance += self.cfg.process_noise

    def update(self, measurement: float, noise: float | None = None) -> None:
        r = self.cfg.measurement_noise if noise is None else noise
        gain = self.variance / (self.variance + r)
        self.state += gain * (measurement - self.state)
        self.variance *= 1.0 - gain


def kalman_fuse(measurements: Sequence[float], cfg: KalmanConfig | None = None) -> float:
    """Fuse a measurement sequence into one scalar estimate.

    Runs one predict/update pair per measurement, in the given order, so the
    result is deterministic for a fixed config.  Callers that need
    order-independence must canonicalize the sequence themselves.
    """
    cfg = cfg or KalmanConfig()
    values = [float(v) for v in measurements]
    if not values:
        raise ValueError("kalman_fuse requires at least one measurement")
    start = values[0] if cfg.initial_state == "first_measurement" else sum(values) / len(values)
    kf = _ScalarKalman(cfg, start)
    for v in values:
        kf.predict()
        kf.update(v)
    return kf.state


def kalman_fuse_streams(grid: AlignedGrid, cfg: KalmanConfig | None = None) -> FusedStream:
    """Fuse an aligned grid into a single stream.

    One predict step per tick, then one update per available source at that
    tick in ascending sensor-id order; ticks with no data are skipped.
    """
    cfg = cfg or KalmanConfig()
    fused_id = "fused:" + "+".join(grid.sensor_ids)
    points: list[DataPoint] = []
    kf: _ScalarKalman | None = None
    for col, tick in enumerate(grid.ticks_ms):
        available = grid.column(col)
        if not available:
            continue
        if kf is None:
            if cfg.initial_state == "first_measurement":
                start = available[0][1]
            else:
                start = sum(v for _, v in available) / len(available)
            kf = _ScalarKalman(cfg, start)
        kf.predict()
        for sid, value in available:
            kf.update(value, cfg.noise_for(sid))
        points.append(DataPoint(timestamp_ms=tick, value=kf.state, sensor_id=fused_id))
    return FusedStream(points=tuple(points), source_ids=grid.sensor_ids)

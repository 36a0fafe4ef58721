"""Multi-criteria sensor ranking against a per-service utopia vector.

Each sensor is a five-attribute vector in [0, 1]; a service declares an
ideal (utopia) vector plus attribute weights.  Sensors are ordered by a
direction-aware distance that combines a weighted Euclidean magnitude term
with a weighted cosine angular term, each rescaled by the inverse cohort
mean so neither dominates.  A conventional TOPSIS ranking over the same
attribute matrix is provided as a static baseline.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Sequence

import numpy as np

from .model import (
    ATTRIBUTE_NAMES,
    ConfigError,
    Direction,
    QosProfile,
    SensorSpec,
    SensorStateVector,
    UtopiaVector,
)

__all__ = [
    "SensorDistance",
    "RankingResult",
    "static_score",
    "static_profile",
    "euclidean_component",
    "cosine_component",
    "scaling_coefficients",
    "direction_aware_distance",
    "rank_and_select",
    "topsis_select",
]


@dataclass(frozen=True)
class SensorDistance:
    """Distance record for one sensor.

    For the direction-aware ranking, ``d_m``/``d_a`` are the magnitude and
    angular components and ``d_ma`` their scaled combination.  For the
    TOPSIS baseline, ``d_m``/``d_a`` are the distances to the ideal and
    anti-ideal rows and ``d_ma`` is ``1 - closeness`` (so ascending ``d_ma``
    is descending closeness in both schemes).
    """

    sensor_id: str
    d_m: float
    d_a: float
    d_ma: float


@dataclass(frozen=True)
class RankingResult:
    """Full cohort ordering plus the selected prefix."""

    records: tuple[SensorDistance, ...]
    xi_m: float
    xi_a: float
    order: tuple[str, ...]
    selected: tuple[str, ...]

    def record_for(self, sensor_id: str) -> SensorDistance:
        for rec in self.records:
            if rec.sensor_id == sensor_id:
                return rec
        raise KeyError(sensor_id)


def static_score(raw_theta: float, direction: Direction) -> float:
    """Map a documented raw attribute value into (0, 1], 1 being ideal.

    Cost attributes decay directly: ``exp(-raw)``.  Benefit attributes are
    first inverted to the cost ``1 / (1 + raw)`` so that larger raw values
    approach the ideal.
    """
    raw = float(raw_theta)
    if not math.isfinite(raw) or raw < 0:
        raise ValueError(f"raw attribute value must be finite and >= 0, got {raw!r}")
    if direction is Direction.BENEFIT:
        raw = 1.0 / (1.0 + raw)
    return math.exp(-raw)


def static_profile(spec: SensorSpec) -> tuple[float, float, float]:
    """(resolution, response_time, range) scores for one sensor spec."""
    out = []
    for name in ("resolution", "response_time", "range"):
        attr = spec.static_attrs.get(name)
        if attr is None:
            raise ConfigError(f"sensor {spec.sensor_id!r} lacks static attribute {name!r}")
        out.append(static_score(attr.value, attr.direction))
    return tuple(out)


def _as_vector(u) -> np.ndarray:
    if isinstance(u, SensorStateVector):
        return np.array(u.as_tuple(), dtype=float)
    if isinstance(u, UtopiaVector):
        return np.array(u.as_tuple(), dtype=float)
    arr = np.asarray(u, dtype=float)
    if arr.ndim != 1:
        raise ValueError("attribute vector must be one-dimensional")
    return arr


def _weights(w, m: int) -> np.ndarray:
    arr = np.asarray(w, dtype=float)
    if arr.shape != (m,):
        raise ConfigError(f"weights must have {m} entries")
    if np.any(~np.isfinite(arr)) or np.any(arr < 0):
        raise ConfigError("weights must be finite and >= 0")
    return arr


def euclidean_component(u, v, w=None) -> float:
    """Weighted Euclidean distance ``sqrt(sum(w * (a - b)^2))``."""
    a, b = _as_vector(u), _as_vector(v)
    if a.shape != b.shape:
        raise ValueError("vectors must share dimensionality")
    wt = np.ones(len(a)) if w is None else _weights(w, len(a))
    return float(np.sqrt(np.sum(wt * (a - b) ** 2)))


def cosine_component(u, v, w=None) -> float:
    """Angular dissimilarity of the weighted vectors, in [0, 1].

    ``1 - sum(|w a| |w b|) / sqrt(sum((w a)^2) sum((w b)^2))``; a zero-norm
    weighted vector is maximally dissimilar by convention (distance 1).
    """
    a, b = _as_vector(u), _as_vector(v)
    if a.shape != b.shape:
        raise ValueError("vectors must share dimensionality")
    wt = np.ones(len(a)) if w is None else _weights(w, len(a))
    wa, wb = wt * a, wt * b
    denom = math.sqrt(float(np.sum(wa**2)) * float(np.sum(wb**2)))
    if denom == 0.0:
        return 1.0
    similarity = float(np.sum(np.abs(wa) * np.abs(wb))) / denom
    return min(max(1.0 - similarity, 0.0), 1.0)


def scaling_coefficients(d_ms: Sequence[float], d_as: Sequence[float]) -> tuple[float, float]:
    """Inverse cohort means of the two components (1 for an all-zero sum)."""
    if len(d_ms) != len(d_as) or not d_ms:
        raise ValueError("component sequences must be non-empty and parallel")
    count = len(d_ms)
    sum_m = float(sum(d_ms))
    sum_a = float(sum(d_as))
    xi_m = count / sum_m if sum_m > 0 else 1.0
    xi_a = count / sum_a if sum_a > 0 else 1.0
    return xi_m, xi_a


def direction_aware_distance(d_m: float, d_a: float, xi_m: float = 1.0, xi_a: float = 1.0) -> float:
    """Combined distance ``sqrt(xi_m^2 d_m^2 + xi_a^2 d_a^2)``."""
    if min(d_m, d_a, xi_m, xi_a) < 0:
        raise ValueError("distance components and coefficients must be >= 0")
    return math.hypot(xi_m * d_m, xi_a * d_a)


def rank_and_select(
    cohort: Sequence[SensorStateVector],
    qos: QosProfile,
    count: int | None = None,
) -> RankingResult:
    """Order a cohort by direction-aware distance to the service utopia.

    Ties break by ascending sensor id; ``selected`` is the leading ``count``
    ids (default: the profile's select_count).
    """
    if not cohort:
        raise ValueError("cohort must be non-empty")
    count = qos.select_count if count is None else count
    if not 1 <= count <= len(cohort):
        raise ConfigError(f"count={count} out of range for cohort of {len(cohort)}")
    ordered = sorted(cohort, key=lambda s: s.sensor_id)
    w = qos.weights
    v = qos.utopia
    d_ms = [euclidean_component(u, v, w) for u in ordered]
    d_as = [cosine_component(u, v, w) for u in ordered]
    xi_m, xi_a = scaling_coefficients(d_ms, d_as)
    records = tuple(
        SensorDistance(
            sensor_id=u.sensor_id,
            d_m=d_m,
            d_a=d_a,
            d_ma=direction_aware_distance(d_m, d_a, xi_m, xi_a),
        )
        for u, d_m, d_a in zip(ordered, d_ms, d_as)
    )
    by_distance = sorted(records, key=lambda r: (r.d_ma, r.sensor_id))
    order = tuple(r.sensor_id for r in by_distance)
    return RankingResult(
        records=records,
        xi_m=xi_m,
        xi_a=xi_a,
        order=order,
        selected=order[:count],
    )


def topsis_select(
    cohort: Sequence[SensorStateVector],
    qos: QosProfile,
    count: int | None = None,
) -> RankingResult:
    """Conventional TOPSIS ordering of the same attribute matrix.

    Vector (root-sum-square) column normalization, weighting, ideal and
    anti-ideal rows, closeness coefficient ``d- / (d+ + d-)``; the order is
    descending closeness.  All five attributes are benefit criteria here
    (ideal = column max).  The method sees only the attribute snapshot it is
    given; it has no notion of per-interval updates, which is exactly what
    makes it a static baseline.
    """
    if not cohort:
        raise ValueError("cohort must be non-empty")
    count = qos.select_count if count is None else count
    if not 1 <= count <= len(cohort):
        raise ConfigError(f"count={count} out of range for cohort of {len(cohort)}")
    ordered = sorted(cohort, key=lambda s: s.sensor_id)
    matrix = np.array([u.as_tuple() for u in ordered], dtype=float)
    w = _weights(qos.weights, len(ATTRIBUTE_NAMES))

    norms = np.sqrt((matrix**2).sum(axis=0))
    normalized = np.divide(matrix, norms, out=np.zeros_like(matrix), where=norms > 0)
    weighted = normalized * w
    ideal = weighted.max(axis=0)
    anti = weighted.min(axis=0)
    d_plus = np.sqrt(((weighted - ideal) ** 2).sum(axis=1))
    d_minus = np.sqrt(((weighted - anti) ** 2).sum(axis=1))
    closeness = np.ones(len(ordered))
    span = d_plus + d_minus
    np.divide(d_minus, span, out=closeness, where=span > 0)

    records = tuple(
        SensorDistance(
            sensor_id=u.sensor_id,
            d_m=float(dp),
            d_a=float(dm),
            d_ma=float(1.0 - c),
        )
        for u, dp, dm, c in zip(ordered, d_plus, d_minus, closeness)
    )
    by_distance = sorted(records, key=lambda r: (r.d_ma, r.sensor_id))
    order = tuple(r.sensor_id for r in by_distance)
    return RankingResult(
        records=records,
        xi_m=1.0,
        xi_a=1.0,
        order=order,
        selected=order[:count],
    )

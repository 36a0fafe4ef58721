"""Core domain types shared by every other module.

Streams, sensor descriptions, dynamic sensor state vectors and service QoS
profiles.  All types are immutable value objects after construction and can
be shared freely across threads.

Conventions used throughout the package:

* timestamps are integer epoch-milliseconds, so window arithmetic is exact;
* durations and sampling intervals are float seconds;
* attribute vectors hold exactly five components, in the fixed order
  (accuracy, reliability, resolution, response_time, range), each in [0, 1].
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass, field
from typing import Iterable, Mapping

__all__ = [
    "ATTRIBUTE_NAMES",
    "STATIC_ATTRIBUTE_NAMES",
    "ConfigError",
    "Modality",
    "Direction",
    "DataPoint",
    "SensorStream",
    "StaticAttr",
    "SensorSpec",
    "SensorStateVector",
    "UtopiaVector",
    "QosProfile",
    "ValidationReport",
    "validate_spec",
    "merge_streams",
]

#: Fixed order of the five sensor attributes used by ranking and QoS weights.
ATTRIBUTE_NAMES = ("accuracy", "reliability", "resolution", "response_time", "range")

#: The three statically documented attributes (the other two are dynamic).
STATIC_ATTRIBUTE_NAMES = ("resolution", "response_time", "range")


class ConfigError(ValueError):
    """Raised for invalid configuration values (weights, periods, ids...)."""


class Modality(enum.Enum):
    """Physical quantity a sensor measures.

    The canonical set is closed; anything else is carried as ``OTHER`` with a
    free-form tag (see :meth:`parse`).
    """

    TEMPERATURE = "temperature"
    HUMIDITY = "humidity"
    CO2 = "co2"
    MOTION = "motion"
    OTHER = "other"

    @classmethod
    def parse(cls, label: str) -> tuple["Modality", str]:
        """Map a free-form label to ``(modality, tag)``.

        Known labels map to their enum member with an empty tag; unknown
        labels map to ``(OTHER, label)``.
        """
        norm = label.strip().lower()
        for member in cls:
            if member is not cls.OTHER and member.value == norm:
                return member, ""
        return cls.OTHER, norm


def modality_label(modality: Modality, tag: str = "") -> str:
    """Canonical string key for a modality (the tag for ``OTHER``)."""
    if modality is Modality.OTHER:
        return tag or "other"
    return modality.value


class Direction(enum.Enum):
    """Whether a lower (cost) or higher (benefit) raw value is preferable."""

    COST = "cost"
    BENEFIT = "benefit"


def _check_finite(name: str, value: float) -> float:
    value = float(value)
    if not math.isfinite(value):
        raise ValueError(f"{name} must be finite, got {value!r}")
    return value


@dataclass(frozen=True, order=True)
class DataPoint:
    """One timestamped measurement from one sensor."""

    timestamp_ms: int
    value: float
    sensor_id: str

    def __post_init__(self) -> None:
        if not isinstance(self.timestamp_ms, int) or isinstance(self.timestamp_ms, bool):
            raise ValueError("timestamp_ms must be an integer (epoch milliseconds)")
        if self.timestamp_ms < 0:
            raise ValueError("timestamp_ms must be >= 0")
        _check_finite("value", self.value)
        if not self.sensor_id:
            raise ValueError("sensor_id must be non-empty")


@dataclass(frozen=True)
class SensorStream:
    """A time-ordered sequence of points from a single sensor.

    Points must be strictly increasing by timestamp; duplicate timestamps are
    rejected at construction.
    """

    sensor_id: str
    modality: Modality
    points: tuple[DataPoint, ...]
    modality_tag: str = ""
    period_hint_s: float | None = None

    def __post_init__(self) -> None:
        object.__setattr__(self, "points", tuple(self.points))
        prev = None
        for p in self.points:
            if p.sensor_id != self.sensor_id:
                raise ValueError(
                    f"point sensor_id {p.sensor_id!r} does not match stream {self.sensor_id!r}"
                )
            if prev is not None and p.timestamp_ms <= prev:
                raise ValueError(
                    f"timestamps must be strictly increasing; "
                    f"{p.timestamp_ms} follows {prev} for sensor {self.sensor_id!r}"
                )
            prev = p.timestamp_ms
        if self.period_hint_s is not None and self.period_hint_s <= 0:
            raise ValueError("period_hint_s must be positive when given")

    def __len__(self) -> int:
        return len(self.points)

    @property
    def modality_key(self) -> str:
        return modality_label(self.modality, self.modality_tag)

    def timestamps(self) -> list[int]:
        return [p.timestamp_ms for p in self.points]

    def values(self) -> list[float]:
        return [p.value for p in self.points]

    def points_in(self, start_ms: int, end_ms: int) -> tuple[DataPoint, ...]:
        """Points within the half-open interval ``]start_ms, end_ms]``."""
        return tuple(p for p in self.points if start_ms < p.timestamp_ms <= end_ms)

    def latest_in(self, start_ms: int, end_ms: int) -> DataPoint | None:
        """Most recent point within ``]start_ms, end_ms]``, if any."""
        hit = None
        for p in self.points:
            if p.timestamp_ms > end_ms:
                break
            if p.timestamp_ms > start_ms:
                hit = p
        return hit


def merge_streams(a: SensorStream, b: SensorStream) -> SensorStream:
    """Merge two streams of the same sensor into one ordered stream.

    Fails if the sensors differ or the union would violate the
    strictly-increasing timestamp invariant (duplicate timestamps).
    """
    if a.sensor_id != b.sensor_id:
        raise ValueError(f"cannot merge streams of {a.sensor_id!r} and {b.sensor_id!r}")
    if a.modality_key != b.modality_key:
        raise ValueError("cannot merge streams with different modalities")
    merged = sorted(a.points + b.points, key=lambda p: p.timestamp_ms)
    return SensorStream(
        sensor_id=a.sensor_id,
        modality=a.modality,
        points=tuple(merged),
        modality_tag=a.modality_tag,
        period_hint_s=a.period_hint_s or b.period_hint_s,
    )


@dataclass(frozen=True)
class StaticAttr:
    """Documented raw value of a static sensor attribute plus its direction."""

    value: float
    direction: Direction = Direction.COST


@dataclass(frozen=True)
class SensorSpec:
    """Static description of one deployed sensor."""

    sensor_id: str
    modality: Modality
    zone: str
    static_attrs: Mapping[str, StaticAttr] = field(default_factory=dict)
    modality_tag: str = ""

    def __post_init__(self) -> None:
        object.__setattr__(self, "static_attrs", dict(self.static_attrs))

    @property
    def modality_key(self) -> str:
        return modality_label(self.modality, self.modality_tag)


@dataclass(frozen=True)
class ValidationReport:
    """Report-style validation result: empty violations means valid."""

    violations: tuple[str, ...] = ()

    @property
    def ok(self) -> bool:
        return not self.violations


def validate_spec(spec: SensorSpec) -> ValidationReport:
    """Check a sensor spec against the model invariants without mutating it."""
    problems: list[str] = []
    if not spec.sensor_id:
        problems.append("sensor_id is empty")
    if spec.modality is Modality.OTHER and not spec.modality_tag:
        problems.append("modality tag is required for non-canonical modalities")
    if not spec.zone:
        problems.append("zone tag is empty")
    for name in STATIC_ATTRIBUTE_NAMES:
        attr = spec.static_attrs.get(name)
        if attr is None:
            problems.append(f"static attribute {name!r} is missing")
            continue
        if not math.isfinite(attr.value):
            problems.append(f"static attribute {name!r} is not finite")
        elif attr.value < 0:
            problems.append(f"static attribute {name!r} is negative ({attr.value})")
    for name in spec.static_attrs:
        if name not in STATIC_ATTRIBUTE_NAMES:
            problems.append(f"unknown static attribute {name!r}")
    return ValidationReport(tuple(problems))


def _check_unit(name: str, value: float) -> float:
    value = _check_finite(name, value)
    if not 0.0 <= value <= 1.0:
        raise ValueError(f"{name} must lie in [0, 1], got {value}")
    return value


@dataclass(frozen=True)
class SensorStateVector:
    """Dynamic five-attribute state of one sensor at one instant.

    ``alpha`` (accuracy) and ``beta`` (reliability) are refreshed from live
    data; the remaining three are normalized static scores.  All five lie in
    [0, 1].
    """

    sensor_id: str
    t_ms: int
    alpha: float
    beta: float
    gamma: float
    epsilon: float
    kappa: float

    def __post_init__(self) -> None:
        for name in ("alpha", "beta", "gamma", "epsilon", "kappa"):
            _check_unit(name, getattr(self, name))

    def as_tuple(self) -> tuple[float, float, float, float, float]:
        return (self.alpha, self.beta, self.gamma, self.epsilon, self.kappa)


@dataclass(frozen=True)
class UtopiaVector:
    """Ideal attribute targets a service ranks real sensors against."""

    components: tuple[float, float, float, float, float] = (1.0, 1.0, 1.0, 1.0, 1.0)

    def __post_init__(self) -> None:
        comps = tuple(float(c) for c in self.components)
        if len(comps) != len(ATTRIBUTE_NAMES):
            raise ValueError(f"utopia vector needs {len(ATTRIBUTE_NAMES)} components")
        for c in comps:
            _check_unit("utopia component", c)
        object.__setattr__(self, "components", comps)

    def as_tuple(self) -> tuple[float, float, float, float, float]:
        return self.components


@dataclass(frozen=True)
class QosProfile:
    """Per-service quality-of-service declaration.

    ``weights`` follow the attribute order of :data:`ATTRIBUTE_NAMES`;
    ``granularity_s`` is the expected inter-sample interval of the data the
    service consumes; ``beta_source`` chooses between the latest-interval and
    the cumulative reliability score.
    """

    service_id: str
    utopia: UtopiaVector = UtopiaVector()
    weights: tuple[float, float, float, float, float] = (1.0, 1.0, 1.0, 1.0, 1.0)
    modality_needs: tuple[str, ...] = ()
    granularity_s: float = 1.0
    select_count: int = 1
    beta_source: str = "interval"

    def __post_init__(self) -> None:
        if not self.service_id:
            raise ConfigError("service_id must be non-empty")
        weights = tuple(float(w) for w in self.weights)
        if len(weights) != len(ATTRIBUTE_NAMES):
            raise ConfigError(f"weights need {len(ATTRIBUTE_NAMES)} entries")
        if any(not math.isfinite(w) or w < 0 for w in weights):
            raise ConfigError("weights must be finite and >= 0")
        if sum(weights) <= 0:
            raise ConfigError("weights must not all be zero")
        object.__setattr__(self, "weights", weights)
        object.__setattr__(
            self, "modality_needs", tuple(sorted(set(self.modality_needs)))
        )
        if self.granularity_s <= 0:
            raise ConfigError("granularity_s must be positive")
        if self.select_count < 1:
            raise ConfigError("select_count must be >= 1")
        if self.beta_source not in ("interval", "cumulative"):
            raise ConfigError("beta_source must be 'interval' or 'cumulative'")


def seconds_to_ms(seconds: float) -> int:
    """Convert a duration in seconds to exact integer milliseconds."""
    ms = round(float(seconds) * 1000.0)
    if abs(ms - float(seconds) * 1000.0) > 1e-6:
        raise ConfigError(f"duration {seconds}s is not representable in whole milliseconds")
    if ms <= 0:
        raise ConfigError(f"duration must be positive, got {seconds}s")
    return int(ms)


def build_streams(points: Iterable[DataPoint], specs: Mapping[str, SensorSpec] | None = None,
                  modalities: Mapping[str, str] | None = None) -> dict[str, SensorStream]:
    """Group loose points into per-sensor streams, sorted and validated.

    Modalities are resolved from ``specs`` when given, otherwise from the
    ``modalities`` label map, otherwise default to ``OTHER``.
    """
    buckets: dict[str, list[DataPoint]] = {}
    for p in points:
        buckets.setdefault(p.sensor_id, []).append(p)
    streams: dict[str, SensorStream] = {}
    for sid in sorted(buckets):
        pts = sorted(buckets[sid], key=lambda p: p.timestamp_ms)
        if specs is not None and sid in specs:
            modality, tag = specs[sid].modality, specs[sid].modality_tag
        elif modalities is not None and sid in modalities:
            modality, tag = Modality.parse(modalities[sid])
        else:
            modality, tag = Modality.OTHER, ""
        streams[sid] = SensorStream(sensor_id=sid, modality=modality,
                                    points=tuple(pts), modality_tag=tag)
    return streams

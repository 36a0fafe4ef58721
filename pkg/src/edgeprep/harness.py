"""Scenario harness: data generation, fault injection, CSV I/O, runs.

A scenario bundles sensors, streams (CSV or seeded synthetic generators),
services, faults and pipeline configuration; running one executes the
pipeline cycle loop over the horizon in a chosen mode and produces
deterministic artifacts: a selection trace CSV, one newline-delimited JSON
feature file per service, and a plain-text report.  All randomness flows
from the single scenario seed, so identical configs yield byte-identical
outputs.  Wall-clock timings are measured and reported via stdout only;
they never enter the output files.
"""

from __future__ import annotations

import csv
import enum
import json
import math
import time
import zlib
from dataclasses import dataclass, field, replace
from pathlib import Path
from typing import Mapping, Sequence

import numpy as np
import yaml

from .fusion import KalmanConfig
from .model import (
    ATTRIBUTE_NAMES,
    ConfigError,
    DataPoint,
    Direction,
    Modality,
    QosProfile,
    SensorSpec,
    SensorStream,
    StaticAttr,
    UtopiaVector,
    seconds_to_ms,
)
from .pipeline import FeatureVector, Mode, Pipeline, ServiceSpec, TraceRow
from .voting import VotingConfig

__all__ = [
    "CSV_HEADER",
    "FaultKind",
    "FaultSpec",
    "GeneratorSpec",
    "ScenarioConfig",
    "ScenarioReport",
    "ComparisonReport",
    "ingest_csv",
    "write_streams_csv",
    "inject_faults",
    "generate_synthetic",
    "load_scenario",
    "parse_scenario",
    "run_scenario",
    "compare_modes",
    "render_report",
    "build_fault_scenario",
    "build_shared_service_scenario",
    "occupancy_quality_trial",
]

CSV_HEADER = ("timestamp_ms", "sensor_id", "modality", "value")

TRACE_HEADER = ("t_ms", "service_id", "sensor_id", "d_M", "d_A", "d_MA", "rank", "selected")


# ---------------------------------------------------------------------------
# CSV ingestion / serialization
# ---------------------------------------------------------------------------

def ingest_csv(path: str | Path) -> dict[str, SensorStream]:
    """Read streams from CSV, grouped by sensor, ordered and validated."""
    path = Path(path)
    with path.open(newline="", encoding="utf-8") as fh:
        reader = csv.reader(fh)
        try:
            header = next(reader)
        except StopIteration:
            raise ValueError(f"{path}: empty file, expected header "
                             f"{','.join(CSV_HEADER)}") from None
        if tuple(h.strip() for h in header) != CSV_HEADER:
            raise ValueError(f"{path}: bad header {header!r}, expected {list(CSV_HEADER)}")
        rows: dict[str, list[tuple[int, float, int]]] = {}
        modalities: dict[str, str] = {}
        for lineno, row in enumerate(reader, start=2):
            if not row:
                continue
            if len(row) != 4:
                raise ValueError(f"{path}:{lineno}: expected 4 fields, got {len(row)}")
            ts_raw, sid, modality, val_raw = (c.strip() for c in row)
            try:
                ts = int(ts_raw)
                value = float(val_raw)
            except ValueError:
                raise ValueError(f"{path}:{lineno}: malformed row {row!r}") from None
            if not math.isfinite(value):
                raise ValueError(f"{path}:{lineno}: non-finite value {val_raw!r}")
            if ts < 0:
                raise ValueError(f"{path}:{lineno}: negative timestamp {ts}")
            known = modalities.setdefault(sid, modality)
            if known != modality:
                raise ValueError(
                    f"{path}:{lineno}: sensor {sid!r} switches modality "
                    f"{known!r} -> {modality!r}"
                )
            rows.setdefault(sid, []).append((ts, value, lineno))
    streams: dict[str, SensorStream] = {}
    for sid in sorted(rows):
        recs = rows[sid]
        prev_ts, prev_line = None, None
        for ts, _, lineno in sorted(recs, key=lambda r: (r[0], r[2])):
            if prev_ts is not None and ts <= prev_ts:
                raise ValueError(
                    f"{path}:{lineno}: duplicate or non-increasing timestamp {ts} "
                    f"for sensor {sid!r} (previous at line {prev_line})"
                )
            prev_ts, prev_line = ts, lineno
        modality, tag = Modality.parse(modalities[sid])
        points = tuple(
            DataPoint(timestamp_ms=ts, value=value, sensor_id=sid)
            for ts, value, _ in sorted(recs, key=lambda r: r[0])
        )
        streams[sid] = SensorStream(sensor_id=sid, modality=modality,
                                    points=points, modality_tag=tag)
    return streams


def write_streams_csv(streams: Mapping[str, SensorStream], path: str | Path) -> None:
    """Write streams as one merged CSV, ordered by (timestamp, sensor id).

    Values are written with ``repr`` so a read-back reproduces them bit for
    bit.
    """
    path = Path(path)
    records = []
    for sid in sorted(streams):
        stream = streams[sid]
        for p in stream.points:
            records.append((p.timestamp_ms, sid, stream.modality_key, p.value))
    records.sort(key=lambda r: (r[0], r[1]))
    with path.open("w", newline="", encoding="utf-8") as fh:
        writer = csv.writer(fh)
        writer.writerow(CSV_HEADER)
        for ts, sid, modality, value in records:
            writer.writerow([ts, sid, modality, repr(value)])


# ---------------------------------------------------------------------------
# Synthetic streams and fault injection
# ---------------------------------------------------------------------------

class FaultKind(enum.Enum):
    STUCK_AT = "stuck_at"
    DRIFT = "drift"
    SPIKE = "spike"
    DROPOUT = "dropout"


@dataclass(frozen=True)
class FaultSpec:
    """One fault active over the half-open interval ``]start, end]``."""

    sensor_id: str
    kind: FaultKind
    start_ms: int
    end_ms: int
    value: float = 0.0       # stuck_at level
    slope_per_s: float = 0.0  # drift rate
    magnitude: float = 0.0    # spike amplitude
    rate: float = 0.0         # spike probability per sample
    probability: float = 0.0  # dropout probability per sample

    def __post_init__(self) -> None:
        if self.end_ms <= self.start_ms:
            raise ConfigError("fault interval must satisfy end > start")
        for name in ("rate", "probability"):
            v = getattr(self, name)
            if not 0.0 <= v <= 1.0:
                raise ConfigError(f"fault {name} must lie in [0, 1], got {v}")

    def active(self, t_ms: int) -> bool:
        return self.start_ms < t_ms <= self.end_ms


def inject_faults(
    streams: Mapping[str, SensorStream],
    faults: Sequence[FaultSpec],
    seed: int,
) -> dict[str, SensorStream]:
    """Apply faults in list order; deterministic under the seed."""
    out = dict(streams)
    for idx, fault in enumerate(faults):
        stream = out.get(fault.sensor_id)
        if stream is None:
            raise ConfigError(f"fault references unknown sensor {fault.sensor_id!r}")
        rng = np.random.default_rng([seed, idx])
        points: list[DataPoint] = []
        for p in stream.points:
            if not fault.active(p.timestamp_ms):
                points.append(p)
                continue
            if fault.kind is FaultKind.STUCK_AT:
                points.append(replace(p, value=fault.value))
            elif fault.kind is FaultKind.DRIFT:
                offset = fault.slope_per_s * (p.timestamp_ms - fault.start_ms) / 1000.0
                points.append(replace(p, value=p.value + offset))
            elif fault.kind is FaultKind.SPIKE:
                value = p.value
                if rng.random() < fault.rate:
                    sign = 1.0 if rng.random() < 0.5 else -1.0
                    value += sign * fault.magnitude
                points.append(replace(p, value=value))
            elif fault.kind is FaultKind.DROPOUT:
                if rng.random() >= fault.probability:
                    points.append(p)
        out[fault.sensor_id] = replace(stream, points=tuple(points))
    return out


@dataclass(frozen=True)
class GeneratorSpec:
    """Seeded synthetic stream: a base signal plus Gaussian noise.

    ``period_s`` is the sampling interval; samples land at
    ``start + period, ..., start + duration``.
    """

    sensor_id: str
    modality: str = "other"
    base: str = "constant"  # constant | sinusoid | ramp
    level: float = 0.0
    amplitude: float = 0.0
    wavelength_s: float = 60.0
    slope_per_s: float = 0.0
    noise_std: float = 0.0
    period_s: float = 1.0
    start_s: float = 0.0
    duration_s: float = 60.0

    def __post_init__(self) -> None:
        if self.period_s <= 0:
            raise ConfigError("generator period_s must be positive")
        if self.duration_s <= 0:
            raise ConfigError("generator duration_s must be positive")
        if self.base not in ("constant", "sinusoid", "ramp"):
            raise ConfigError(f"unknown base signal {self.base!r}")
        if self.noise_std < 0:
            raise ConfigError("noise_std must be >= 0")
        if self.wavelength_s <= 0:
            raise ConfigError("wavelength_s must be positive")


def generate_synthetic(specs: Sequence[GeneratorSpec], seed: int) -> dict[str, SensorStream]:
    """Materialize generator specs into streams; deterministic under seed."""
    streams: dict[str, SensorStream] = {}
    for spec in specs:
        if spec.sensor_id in streams:
            raise ConfigError(f"duplicate generator for sensor {spec.sensor_id!r}")
        rng = np.random.default_rng([seed, zlib.crc32(spec.sensor_id.encode())])
        period_ms = seconds_to_ms(spec.period_s)
        start_ms = round(spec.start_s * 1000)
        count = int(spec.duration_s * 1000) // period_ms
        points = []
        for k in range(1, count + 1):
            t_ms = start_ms + k * period_ms
            elapsed_s = (t_ms - start_ms) / 1000.0
            if spec.base == "constant":
                value = spec.level
            elif spec.base == "sinusoid":
                value = spec.level + spec.amplitude * math.sin(
                    2.0 * math.pi * elapsed_s / spec.wavelength_s
                )
            else:  # ramp
                value = spec.level + spec.slope_per_s * elapsed_s
            if spec.noise_std > 0:
                value += spec.noise_std * rng.standard_normal()
            points.append(DataPoint(timestamp_ms=t_ms, value=float(value),
                                    sensor_id=spec.sensor_id))
        modality, tag = Modality.parse(spec.modality)
        streams[spec.sensor_id] = SensorStream(
            sensor_id=spec.sensor_id, modality=modality,
            points=tuple(points), modality_tag=tag,
            period_hint_s=spec.period_s,
        )
    return streams


# ---------------------------------------------------------------------------
# Scenario configuration
# ---------------------------------------------------------------------------

@dataclass
class ScenarioConfig:
    sensors: list[SensorSpec]
    services: list[ServiceSpec]
    duration_s: float
    seed: int = 0
    mode: Mode = Mode.UNIFIED
    generators: list[GeneratorSpec] = field(default_factory=list)
    csv_path: str | None = None
    faults: list[FaultSpec] = field(default_factory=list)
    voting: VotingConfig = field(default_factory=VotingConfig)
    kalman: KalmanConfig = field(default_factory=KalmanConfig)
    reliability_interval_s: float = 10.0
    cache_horizon_s: float = 600.0
    presence_threshold: float = 0.4

    def __post_init__(self) -> None:
        if self.duration_s <= 0:
            raise ConfigError("duration_s must be positive")
        if not self.generators and self.csv_path is None:
            raise ConfigError("scenario needs synthetic generators or a csv path")
        ids = {s.sensor_id for s in self.sensors}
        for fault in self.faults:
            if fault.sensor_id not in ids:
                raise ConfigError(f"fault references unknown sensor {fault.sensor_id!r}")
            if fault.end_ms > seconds_to_ms(self.duration_s):
                raise ConfigError(
                    f"fault on {fault.sensor_id!r} ends after the scenario horizon"
                )


def _parse_weights(raw) -> tuple[float, ...]:
    if raw is None:
        return (1.0,) * len(ATTRIBUTE_NAMES)
    if isinstance(raw, Mapping):
        unknown = set(raw) - set(ATTRIBUTE_NAMES)
        if unknown:
            raise ConfigError(f"unknown weight attributes: {sorted(unknown)}")
        return tuple(float(raw.get(name, 0.0)) for name in ATTRIBUTE_NAMES)
    values = [float(v) for v in raw]
    if len(values) != len(ATTRIBUTE_NAMES):
        raise ConfigError(f"weights must have {len(ATTRIBUTE_NAMES)} entries")
    return tuple(values)


def _parse_sensor(raw: Mapping) -> SensorSpec:
    modality, tag = Modality.parse(str(raw["modality"]))
    attrs = {}
    for name, entry in (raw.get("static_attrs") or {}).items():
        if isinstance(entry, Mapping):
            direction = Direction(str(entry.get("direction", "cost")))
            attrs[name] = StaticAttr(value=float(entry["value"]), direction=direction)
        else:
            attrs[name] = StaticAttr(value=float(entry))
    return SensorSpec(
        sensor_id=str(raw["sensor_id"]),
        modality=modality,
        modality_tag=tag,
        zone=str(raw.get("zone", "default")),
        static_attrs=attrs,
    )


def _parse_service(raw: Mapping) -> ServiceSpec:
    window = raw.get("window")
    if not isinstance(window, Mapping) or not {"k_l", "k_r", "delta_t_s"} <= set(window):
        raise ConfigError(
            f"service {raw.get('service_id')!r}: window requires explicit "
            "k_l, k_r and delta_t_s"
        )
    utopia = raw.get("utopia")
    qos = QosProfile(
        service_id=str(raw["service_id"]),
        utopia=UtopiaVector(tuple(float(v) for v in utopia)) if utopia else UtopiaVector(),
        weights=_parse_weights(raw.get("weights")),
        modality_needs=tuple(str(m) for m in raw.get("modalities", ())),
        granularity_s=float(raw.get("granularity_s", 1.0)),
        select_count=int(raw.get("select_count", 1)),
        beta_source=str(raw.get("beta_source", "interval")),
    )
    return ServiceSpec(
        qos=qos,
        period_s=float(raw["period_s"]),
        k_l=int(window["k_l"]),
        k_r=int(window["k_r"]),
        delta_t_s=float(window["delta_t_s"]),
        features=tuple(str(f) for f in raw.get("features", ())),
        max_gap_s=float(raw["max_gap_s"]) if "max_gap_s" in raw else None,
        zone=str(raw["zone"]) if "zone" in raw else None,
    )


def _instant_ms(seconds: float) -> int:
    ms = round(float(seconds) * 1000.0)
    if abs(ms - float(seconds) * 1000.0) > 1e-6 or ms < 0:
        raise ConfigError(f"instant {seconds}s must be a nonnegative whole millisecond")
    return int(ms)


def _parse_fault(raw: Mapping) -> FaultSpec:
    return FaultSpec(
        sensor_id=str(raw["sensor_id"]),
        kind=FaultKind(str(raw["kind"])),
        start_ms=_instant_ms(float(raw["start_s"])),
        end_ms=_instant_ms(float(raw["end_s"])),
        value=float(raw.get("value", 0.0)),
        slope_per_s=float(raw.get("slope_per_s", 0.0)),
        magnitude=float(raw.get("magnitude", 0.0)),
        rate=float(raw.get("rate", 0.0)),
        probability=float(raw.get("probability", 0.0)),
    )


def _parse_generator(raw: Mapping, default_duration_s: float) -> GeneratorSpec:
    return GeneratorSpec(
        sensor_id=str(raw["sensor_id"]),
        modality=str(raw.get("modality", "other")),
        base=str(raw.get("base", "constant")),
        level=float(raw.get("level", 0.0)),
        amplitude=float(raw.get("amplitude", 0.0)),
        wavelength_s=float(raw.get("wavelength_s", 60.0)),
        slope_per_s=float(raw.get("slope_per_s", 0.0)),
        noise_std=float(raw.get("noise_std", 0.0)),
        period_s=float(raw.get("period_s", 1.0)),
        start_s=float(raw.get("start_s", 0.0)),
        duration_s=float(raw.get("duration_s", default_duration_s)),
    )


def parse_scenario(raw: Mapping, base_dir: Path | None = None) -> ScenarioConfig:
    """Build a scenario from a parsed config document."""
    duration_s = float(raw["duration_s"])
    sensors = [_parse_sensor(s) for s in raw.get("sensors", ())]
    services = [_parse_service(s) for s in raw.get("services", ())]
    streams_raw = raw.get("streams") or {}
    generators = [
        _parse_generator(g, duration_s) for g in streams_raw.get("synthetic", ())
    ]
    csv_path = streams_raw.get("csv")
    if csv_path is not None and base_dir is not None:
        csv_path = str((base_dir / csv_path).resolve())
    voting_raw = raw.get("voting") or {}
    kalman_raw = raw.get("kalman") or {}
    return ScenarioConfig(
        sensors=sensors,
        services=services,
        duration_s=duration_s,
        seed=int(raw.get("seed", 0)),
        mode=Mode(str(raw.get("mode", "unified"))),
        generators=generators,
        csv_path=csv_path,
        faults=[_parse_fault(f) for f in raw.get("faults", ())],
        voting=VotingConfig(
            p=int(voting_raw.get("p", 2)),
            c=float(voting_raw.get("c", 2.0)),
            k=int(voting_raw["k"]) if voting_raw.get("k") is not None else None,
        ),
        kalman=KalmanConfig(
            process_noise=float(kalman_raw.get("process_noise", 1e-3)),
            measurement_noise=float(kalman_raw.get("measurement_noise", 0.1)),
            initial_variance=float(kalman_raw.get("initial_variance", 1.0)),
            initial_state=str(kalman_raw.get("initial_state", "first_measurement")),
        ),
        reliability_interval_s=float(raw.get("reliability_interval_s", 10.0)),
        cache_horizon_s=float(raw.get("cache_horizon_s", 600.0)),
        presence_threshold=float(raw.get("presence_threshold", 0.4)),
    )


def load_scenario(path: str | Path) -> ScenarioConfig:
    """Load a YAML scenario config."""
    path = Path(path)
    with path.open(encoding="utf-8") as fh:
        raw = yaml.safe_load(fh)
    if not isinstance(raw, Mapping):
        raise ConfigError(f"{path}: config must be a mapping")
    return parse_scenario(raw, base_dir=path.parent)


# ---------------------------------------------------------------------------
# Scenario execution
# ---------------------------------------------------------------------------

@dataclass
class ScenarioReport:
    """Exact-count summary of one scenario run (timings are wall clock)."""

    mode: Mode
    seed: int
    cycles: int
    votes: int
    activations: int
    feature_invocations: int
    cache_hits: int
    cache_misses: int
    distinct_feature_keys: int
    points_processed: int
    selection_counts: dict[str, int]
    fault_avoidance: dict[str, tuple[int, int]]  # sensor -> (avoided, total)
    errors: list[tuple[int, str, str]]
    features: list[FeatureVector]
    trace: list[TraceRow]
    wall_clock_s: float
    feature_paths: dict[str, str] = field(default_factory=dict)

    def avoidance_rate(self, sensor_id: str) -> float | None:
        pair = self.fault_avoidance.get(sensor_id)
        if pair is None or pair[1] == 0:
            return None
        return pair[0] / pair[1]


def _feature_line(fv: FeatureVector) -> str:
    return json.dumps(
        {
            "t_ms": fv.t_ms,
            "service_id": fv.service_id,
            "components": {k: fv.components[k] for k in sorted(fv.components)},
            "provenance": list(fv.provenance),
            "missing": list(fv.missing),
        },
        sort_keys=True,
    )


def _trace_line(row: TraceRow) -> list:
    return [
        row.t_ms,
        row.service_id,
        row.sensor_id,
        repr(row.d_m),
        repr(row.d_a),
        repr(row.d_ma),
        row.rank,
        int(row.selected),
    ]


def build_streams_for(cfg: ScenarioConfig, seed: int) -> dict[str, SensorStream]:
    """Materialize and fault-inject the scenario's streams."""
    if cfg.csv_path is not None:
        streams = ingest_csv(cfg.csv_path)
    else:
        streams = generate_synthetic(cfg.generators, seed)
    return inject_faults(streams, cfg.faults, seed)


def run_scenario(
    cfg: ScenarioConfig,
    out_dir: str | Path | None = None,
    mode: Mode | None = None,
    seed: int | None = None,
) -> ScenarioReport:
    """Execute the pipeline over the scenario horizon in one mode."""
    mode = cfg.mode if mode is None else mode
    seed = cfg.seed if seed is None else seed
    streams = build_streams_for(cfg, seed)
    pipeline = Pipeline(
        cfg.sensors,
        cfg.services,
        streams,
        voting=cfg.voting,
        kalman=cfg.kalman,
        mode=mode,
        reliability_interval_s=cfg.reliability_interval_s,
        cache_horizon_s=cfg.cache_horizon_s,
        presence_threshold=cfg.presence_threshold,
    )
    horizon_ms = seconds_to_ms(cfg.duration_s)
    features: list[FeatureVector] = []
    trace: list[TraceRow] = []
    errors: list[tuple[int, str, str]] = []
    started = time.perf_counter()
    for t_ms in range(pipeline.tick_ms, horizon_ms + 1, pipeline.tick_ms):
        result = pipeline.run_cycle(t_ms)
        for service_id in sorted(result.features):
            features.append(result.features[service_id])
        trace.extend(result.trace)
        for service_id in sorted(result.errors):
            errors.append((t_ms, service_id, result.errors[service_id]))
    wall = time.perf_counter() - started

    selection_counts: dict[str, int] = {}
    for row in trace:
        if row.selected:
            selection_counts[row.sensor_id] = selection_counts.get(row.sensor_id, 0) + 1
    fault_avoidance: dict[str, tuple[int, int]] = {}
    for fault in cfg.faults:
        rows = [r for r in trace if r.sensor_id == fault.sensor_id and fault.active(r.t_ms)]
        avoided = sum(1 for r in rows if not r.selected)
        prev = fault_avoidance.get(fault.sensor_id, (0, 0))
        fault_avoidance[fault.sensor_id] = (prev[0] + avoided, prev[1] + len(rows))

    report = ScenarioReport(
        mode=mode,
        seed=seed,
        cycles=pipeline.counters.cycles,
        votes=pipeline.counters.votes,
        activations=len(features),
        feature_invocations=pipeline.feature_invocations,
        cache_hits=pipeline.cache_hits,
        cache_misses=pipeline.feature_invocations,
        distinct_feature_keys=pipeline.distinct_feature_keys,
        points_processed=pipeline.counters.points_processed,
        selection_counts=selection_counts,
        fault_avoidance=fault_avoidance,
        errors=errors,
        features=features,
        trace=trace,
        wall_clock_s=wall,
    )
    if out_dir is not None:
        _write_outputs(report, Path(out_dir))
    return report


def _write_outputs(report: ScenarioReport, out_dir: Path) -> None:
    out_dir.mkdir(parents=True, exist_ok=True)
    trace_path = out_dir / "selection_trace.csv"
    with trace_path.open("w", newline="", encoding="utf-8") as fh:
        writer = csv.writer(fh)
        writer.writerow(TRACE_HEADER)
        for row in report.trace:
            writer.writerow(_trace_line(row))
    by_service: dict[str, list[FeatureVector]] = {}
    for fv in report.features:
        by_service.setdefault(fv.service_id, []).append(fv)
    for service_id in sorted(by_service):
        path = out_dir / f"features_{service_id}.ndjson"
        with path.open("w", encoding="utf-8") as fh:
            for fv in by_service[service_id]:
                fh.write(_feature_line(fv) + "\n")
        report.feature_paths[service_id] = str(path)
    (out_dir / "report.txt").write_text(render_report(report), encoding="utf-8")


def render_report(report: ScenarioReport) -> str:
    """Human-readable run summary; deterministic (no wall-clock content)."""
    lines = [
        "scenario report",
        f"mode: {report.mode.value}",
        f"seed: {report.seed}",
        f"cycles: {report.cycles}",
        f"votes: {report.votes}",
        f"service activations: {report.activations}",
        f"feature function invocations: {report.feature_invocations}",
        f"feature cache hits: {report.cache_hits}",
        f"distinct feature keys: {report.distinct_feature_keys}",
        f"data points processed: {report.points_processed}",
        "per-sensor selection counts:",
    ]
    if report.selection_counts:
        for sid in sorted(report.selection_counts):
            lines.append(f"  {sid}: {report.selection_counts[sid]}")
    else:
        lines.append("  (none)")
    if report.fault_avoidance:
        lines.append("fault-window avoidance:")
        for sid in sorted(report.fault_avoidance):
            avoided, total = report.fault_avoidance[sid]
            rate = f"{avoided / total:.4f}" if total else "n/a"
            lines.append(f"  {sid}: {rate} ({avoided}/{total})")
    if report.errors:
        lines.append("per-service errors:")
        for t_ms, service_id, message in report.errors:
            lines.append(f"  t={t_ms} {service_id}: {message}")
    else:
        lines.append("per-service errors: none")
    return "\n".join(lines) + "\n"


@dataclass
class ComparisonReport:
    """Side-by-side counts for several modes on identical inputs."""

    reports: dict[str, ScenarioReport]
    failures: dict[str, str]
    features_identical: bool | None  # unified vs per_service, when both ran

    def summary(self) -> str:
        lines = ["mode comparison"]
        for name in sorted(self.reports):
            rep = self.reports[name]
            lines.append(
                f"{name}: activations={rep.activations} "
                f"feature_invocations={rep.feature_invocations} "
                f"cache_hits={rep.cache_hits} "
                f"points_processed={rep.points_processed}"
            )
        for name in sorted(self.failures):
            lines.append(f"{name}: FAILED ({self.failures[name]})")
        if self.features_identical is not None:
            verdict = "identical" if self.features_identical else "DIFFERENT"
            lines.append(f"unified vs per_service feature vectors: {verdict}")
        return "\n".join(lines) + "\n"


def compare_modes(
    cfg: ScenarioConfig,
    out_dir: str | Path | None = None,
    modes: Sequence[Mode] = (
        Mode.UNIFIED,
        Mode.PER_SERVICE,
        Mode.TOPSIS_BASELINE,
        Mode.NO_SELECTION_FUSED,
    ),
) -> ComparisonReport:
    """Run each mode on identical inputs and seed; collect exact counts."""
    out_dir = Path(out_dir) if out_dir is not None else None
    reports: dict[str, ScenarioReport] = {}
    failures: dict[str, str] = {}
    for mode in modes:
        sub = out_dir / mode.value if out_dir is not None else None
        try:
            reports[mode.value] = run_scenario(cfg, out_dir=sub, mode=mode)
        except Exception as exc:  # partial comparison is still useful
            failures[mode.value] = f"{type(exc).__name__}: {exc}"
    identical: bool | None = None
    uni = reports.get(Mode.UNIFIED.value)
    per = reports.get(Mode.PER_SERVICE.value)
    if uni is not None and per is not None:
        identical = [_feature_line(fv) for fv in uni.features] == [
            _feature_line(fv) for fv in per.features
        ]
    comparison = ComparisonReport(
        reports=reports, failures=failures, features_identical=identical
    )
    if out_dir is not None:
        out_dir.mkdir(parents=True, exist_ok=True)
        (out_dir / "comparison.txt").write_text(comparison.summary(), encoding="utf-8")
    return comparison


# ---------------------------------------------------------------------------
# Canned scenarios
# ---------------------------------------------------------------------------

def _default_static_attrs(resolution: float = 0.5, response: float = 1.0,
                          sensing_range: float = 50.0) -> dict[str, StaticAttr]:
    return {
        "resolution": StaticAttr(resolution, Direction.COST),
        "response_time": StaticAttr(response, Direction.COST),
        "range": StaticAttr(sensing_range, Direction.BENEFIT),
    }


def build_fault_scenario(
    priority: str = "accuracy",
    mode: Mode = Mode.UNIFIED,
    seed: int = 7,
    duration_s: float = 240.0,
) -> ScenarioConfig:
    """Seven redundant temperature sensors, two of them faulty.

    Sensor 3 sticks at a far-off constant and sensor 7 drifts away inside
    their fault windows; one monitoring service keeps selecting the best
    sensor under either accuracy-priority or reliability-priority weights.
    """
    if priority == "accuracy":
        weights = (1.0, 0.0, 0.02, 0.02, 0.02)
    elif priority == "reliability":
        weights = (0.0, 1.0, 0.02, 0.02, 0.02)
    else:
        raise ConfigError(f"unknown priority {priority!r}")
    sensors = [
        SensorSpec(
            sensor_id=f"t{i}",
            modality=Modality.TEMPERATURE,
            zone="room",
            static_attrs=_default_static_attrs(resolution=0.5, response=1.0 + 0.1 * i,
                                               sensing_range=50.0),
        )
        for i in range(1, 8)
    ]
    generators = [
        GeneratorSpec(
            sensor_id=f"t{i}",
            modality="temperature",
            base="sinusoid",
            level=22.0,
            amplitude=0.8,
            wavelength_s=duration_s,
            noise_std=0.05,
            period_s=1.0,
            duration_s=duration_s,
        )
        for i in range(1, 8)
    ]
    faults = [
        FaultSpec(sensor_id="t3", kind=FaultKind.STUCK_AT, value=30.0,
                  start_ms=60_000, end_ms=180_000),
        FaultSpec(sensor_id="t7", kind=FaultKind.DRIFT, slope_per_s=0.5,
                  start_ms=90_000, end_ms=210_000),
    ]
    service = ServiceSpec(
        qos=QosProfile(
            service_id="climate",
            weights=weights,
            modality_needs=("temperature",),
            granularity_s=1.0,
            select_count=1,
            beta_source="interval",
        ),
        period_s=1.0,
        k_l=5,
        k_r=0,
        delta_t_s=1.0,
        features=("temperature_mean",),
    )
    return ScenarioConfig(
        sensors=sensors,
        services=[service],
        duration_s=duration_s,
        seed=seed,
        mode=mode,
        generators=generators,
        faults=faults,
        reliability_interval_s=2.0,
    )


def build_shared_service_scenario(seed: int = 7, duration_s: float = 60.0) -> ScenarioConfig:
    """Two services with 5 s and 1 s periods sharing sensors and features.

    Both consume the shared presence inference and temperature statistics on
    identical window shapes, so unified preprocessing can serve one result
    to both.
    """
    sensors = (
        [
            SensorSpec(f"m{i}", Modality.MOTION, "room",
                       _default_static_attrs(0.1, 0.2, 8.0))
            for i in (1, 2, 3)
        ]
        + [
            SensorSpec(f"t{i}", Modality.TEMPERATURE, "room",
                       _default_static_attrs(0.5, 1.0, 60.0))
            for i in (1, 2)
        ]
        + [
            SensorSpec(f"c{i}", Modality.CO2, "room",
                       _default_static_attrs(5.0, 20.0, 5000.0))
            for i in (1, 2)
        ]
    )
    generators = (
        [
            GeneratorSpec(sensor_id=f"m{i}", modality="motion", base="constant",
                          level=0.6, noise_std=0.08, period_s=1.0,
                          duration_s=duration_s)
            for i in (1, 2, 3)
        ]
        + [
            GeneratorSpec(sensor_id=f"t{i}", modality="temperature", base="sinusoid",
                          level=22.0, amplitude=0.5, wavelength_s=duration_s,
                          noise_std=0.05, period_s=1.0, duration_s=duration_s)
            for i in (1, 2)
        ]
        + [
            GeneratorSpec(sensor_id=f"c{i}", modality="co2", base="constant",
                          level=520.0, noise_std=8.0, period_s=1.0,
                          duration_s=duration_s)
            for i in (1, 2)
        ]
    )
    occupancy = ServiceSpec(
        qos=QosProfile(
            service_id="occupancy",
            modality_needs=("motion", "temperature"),
            granularity_s=1.0,
            select_count=1,
        ),
        period_s=5.0,
        k_l=5,
        k_r=0,
        delta_t_s=1.0,
        features=("motion_mean", "temperature_mean", "presence"),
    )
    airquality = ServiceSpec(
        qos=QosProfile(
            service_id="airquality",
            modality_needs=("co2", "motion", "temperature"),
            granularity_s=1.0,
            select_count=1,
        ),
        period_s=1.0,
        k_l=5,
        k_r=0,
        delta_t_s=1.0,
        features=("co2_mean", "temperature_mean", "presence"),
    )
    return ScenarioConfig(
        sensors=sensors,
        services=[occupancy, airquality],
        duration_s=duration_s,
        seed=seed,
        generators=generators,
        reliability_interval_s=5.0,
    )


def _occupied(t_ms: int, block_s: float = 30.0) -> bool:
    return (t_ms // seconds_to_ms(block_s)) % 2 == 1


def _labelled_streams(seed: int, duration_s: float) -> dict[str, SensorStream]:
    """Synthetic occupancy-driven motion and CO2 streams (1 Hz)."""
    levels = {
        "motion": (0.05, 0.8, 0.05),  # empty level, occupied level, noise
        "co2": (420.0, 800.0, 15.0),
    }
    sensor_ids = {"motion": ("m1", "m2", "m3"), "co2": ("c1", "c2", "c3")}
    points: dict[str, list[DataPoint]] = {}
    horizon_ms = seconds_to_ms(duration_s)
    for modality, ids in sensor_ids.items():
        empty, busy, noise = levels[modality]
        for sid in ids:
            rng = np.random.default_rng([seed, zlib.crc32(sid.encode())])
            pts = []
            for t_ms in range(1000, horizon_ms + 1, 1000):
                level = busy if _occupied(t_ms) else empty
                pts.append(DataPoint(t_ms, float(level + noise * rng.standard_normal()), sid))
            points[sid] = pts
    streams = {}
    for modality, ids in sensor_ids.items():
        m, tag = Modality.parse(modality)
        for sid in ids:
            streams[sid] = SensorStream(sensor_id=sid, modality=m,
                                        points=tuple(points[sid]), modality_tag=tag,
                                        period_hint_s=1.0)
    return streams


def occupancy_quality_trial(
    seed: int,
    duration_s: float = 180.0,
    motion_threshold: float = 0.4,
    co2_threshold: float = 600.0,
) -> tuple[float, float]:
    """Downstream-quality probe: selection-fused vs all-sensor naive fusion.

    Builds labelled occupancy data with one CO2 sensor stuck at a high
    value, runs the pipeline in unified (selection) mode and in
    no-selection mode, and classifies each activation with a fixed
    two-threshold rule (motion level OR CO2 level).  Returns
    ``(selected_accuracy, naive_accuracy)`` against the ground-truth labels.
    """
    sensors = [
        SensorSpec(f"m{i}", Modality.MOTION, "room", _default_static_attrs(0.1, 0.2, 8.0))
        for i in (1, 2, 3)
    ] + [
        SensorSpec(f"c{i}", Modality.CO2, "room", _default_static_attrs(5.0, 20.0, 5000.0))
        for i in (1, 2, 3)
    ]
    service = ServiceSpec(
        qos=QosProfile(
            service_id="occupancy",
            weights=(1.0, 0.2, 0.02, 0.02, 0.02),
            modality_needs=("co2", "motion"),
            granularity_s=1.0,
            select_count=1,
        ),
        period_s=1.0,
        k_l=3,
        k_r=0,
        delta_t_s=1.0,
        features=("motion_mean", "co2_mean"),
    )
    faults = [
        FaultSpec(sensor_id="c3", kind=FaultKind.STUCK_AT, value=1200.0,
                  start_ms=0, end_ms=seconds_to_ms(duration_s)),
    ]
    base_streams = _labelled_streams(seed, duration_s)

    def run(mode: Mode) -> float:
        streams = inject_faults(base_streams, faults, seed)
        pipeline = Pipeline(sensors, [service], streams, mode=mode,
                            reliability_interval_s=2.0)
        horizon_ms = seconds_to_ms(duration_s)
        hits = total = 0
        for t_ms in range(pipeline.tick_ms, horizon_ms + 1, pipeline.tick_ms):
            result = pipeline.run_cycle(t_ms)
            fv = result.features.get("occupancy")
            if fv is None or fv.missing:
                continue
            predicted = (
                fv.components["motion_mean"] > motion_threshold
                or fv.components["co2_mean"] > co2_threshold
            )
            hits += int(predicted == _occupied(t_ms))
            total += 1
        return hits / total if total else 0.0

    return run(Mode.UNIFIED), run(Mode.NO_SELECTION_FUSED)

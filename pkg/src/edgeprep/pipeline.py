"""Unified preprocessing orchestrator.

One pipeline instance owns the whole cycle loop for a set of services
sharing a sensor pool: per-cohort fuzzy voting keeps accuracy weights fresh,
reliability intervals close on a fixed cadence, and each service activation
ranks its cohorts, fuses the selected streams over the service window and
emits a feature vector.  Shared intermediate features (including low-level
inferences such as presence detection) are memoized by
``(function, window bounds, contributing sensors)`` so that collocated
services never trigger the same computation twice.

Operating modes:

* ``unified`` - selection on, one feature cache shared by all services;
* ``per_service`` - selection on, one private feature cache per service
  (every service recomputes shared features, counts show the overhead);
* ``topsis_baseline`` - selection fixed once from the static attribute
  snapshot by TOPSIS, dynamic scoring off;
* ``no_selection_fused`` - selection off, every live sensor of a needed
  modality is fused.
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass, field, replace
from typing import Callable, Mapping, Sequence

import numpy as np

from .fusion import KalmanConfig, align, kalman_fuse_streams
from .model import (
    ConfigError,
    DataPoint,
    QosProfile,
    SensorSpec,
    SensorStateVector,
    SensorStream,
    seconds_to_ms,
)
from .ranking import RankingResult, rank_and_select, static_profile, topsis_select
from .reliability import ReliabilityState, close_interval, record_observation
from .voting import (
    VotingConfig,
    assign_accuracy,
    cumulative_scores,
    membership_matrix,
    normalize,
    select_optimal,
)

__all__ = [
    "Mode",
    "WindowSpec",
    "form_window",
    "window_ticks",
    "AssociationPredicate",
    "associate",
    "WindowSeries",
    "FeatureFunction",
    "FeatureCache",
    "compute_feature",
    "build_feature_registry",
    "FeatureVector",
    "TraceRow",
    "CycleResult",
    "ServiceSpec",
    "Pipeline",
]


class Mode(enum.Enum):
    UNIFIED = "unified"
    PER_SERVICE = "per_service"
    TOPSIS_BASELINE = "topsis_baseline"
    NO_SELECTION_FUSED = "no_selection_fused"


# ---------------------------------------------------------------------------
# Windows and association
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class WindowSpec:
    """Half-open data window ``]t_a, t_b]`` anchored at ``t_i``.

    ``k_l``/``k_r`` count intervals of ``delta_t_s`` to the left and right of
    the anchor.  Bounds are exact integer milliseconds.
    """

    t_i_ms: int
    k_l: int
    k_r: int
    delta_t_s: float
    t_a_ms: int = field(init=False)
    t_b_ms: int = field(init=False)

    def __post_init__(self) -> None:
        if self.k_l < 0 or self.k_r < 0:
            raise ValueError("k_l and k_r must be >= 0")
        if self.k_l == 0 and self.k_r == 0:
            raise ValueError("degenerate window: k_l and k_r are both 0")
        delta_ms = seconds_to_ms(self.delta_t_s)
        object.__setattr__(self, "t_a_ms", self.t_i_ms - self.k_l * delta_ms)
        object.__setattr__(self, "t_b_ms", self.t_i_ms + self.k_r * delta_ms)

    @property
    def width_ms(self) -> int:
        return self.t_b_ms - self.t_a_ms

    def contains(self, timestamp_ms: int, tolerance_ms: float = 0.0) -> bool:
        return self.t_a_ms - tolerance_ms < timestamp_ms <= self.t_b_ms + tolerance_ms


def form_window(t_i_ms: int, k_l: int, k_r: int, delta_t_s: float) -> WindowSpec:
    """Anchor a window at ``t_i`` with the given shape."""
    return WindowSpec(t_i_ms=t_i_ms, k_l=k_l, k_r=k_r, delta_t_s=delta_t_s)


def window_ticks(window: WindowSpec) -> tuple[int, ...]:
    """Grid ticks inside the half-open window: ``t_a + d, ..., t_b``."""
    delta_ms = seconds_to_ms(window.delta_t_s)
    count = window.k_l + window.k_r
    return tuple(window.t_a_ms + delta_ms * (i + 1) for i in range(count))


@dataclass(frozen=True)
class AssociationPredicate:
    """Binary temporal + spatial correlation rules for data points.

    ``zone_of`` must be total: it maps any sensor id to a zone tag (empty
    for unknown sensors).  The temporal rule is window containment with a
    tolerance; the spatial rule is zone-tag equality.
    """

    zone_of: Callable[[str], str]
    temporal_tolerance_s: float = 0.0


def associate(
    points: Sequence[DataPoint],
    pred: AssociationPredicate,
    window: WindowSpec,
    zone: str,
) -> tuple[bool, tuple[DataPoint, ...]]:
    """Points satisfying both rules, plus a flag (1 iff any survive)."""
    tol_ms = pred.temporal_tolerance_s * 1000.0
    subset = tuple(
        p
        for p in points
        if window.contains(p.timestamp_ms, tol_ms) and pred.zone_of(p.sensor_id) == zone
    )
    return bool(subset), subset


# ---------------------------------------------------------------------------
# Features
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class WindowSeries:
    """Fused values of one modality on the window grid, with provenance."""

    values: np.ndarray
    source_ids: tuple[str, ...]


@dataclass(frozen=True)
class FeatureFunction:
    """A pure mapping from windowed modality data to a real vector.

    Purity is a contract: identical inputs must produce identical outputs,
    which is what makes cross-service memoization sound.
    """

    fid: str
    modalities: tuple[str, ...]
    kind: str  # "raw_stat" | "low_level_inference"
    compute: Callable[[Mapping[str, "WindowSeries"]], np.ndarray]
    outputs: tuple[str, ...] = ()

    def __post_init__(self) -> None:
        if self.kind not in ("raw_stat", "low_level_inference"):
            raise ConfigError(f"unknown feature kind {self.kind!r}")
        if not self.outputs:
            object.__setattr__(self, "outputs", (self.fid,))


class FeatureCache:
    """Memo table keyed by (feature id, window bounds, contributing sensors).

    Tracks hits, misses and every key ever computed; windows whose right
    edge falls behind the eviction cutoff are dropped to bound memory.
    """

    def __init__(self) -> None:
        self._store: dict[tuple, np.ndarray] = {}
        self.hits = 0
        self.misses = 0
        self.keys_seen: set[tuple] = set()

    def lookup(self, key: tuple) -> np.ndarray | None:
        value = self._store.get(key)
        if value is not None:
            self.hits += 1
        return value

    def insert(self, key: tuple, value: np.ndarray) -> np.ndarray:
        value = np.asarray(value, dtype=float).copy()
        value.setflags(write=False)
        self._store[key] = value
        self.misses += 1
        self.keys_seen.add(key)
        return value

    def evict_before(self, cutoff_ms: int) -> int:
        stale = [k for k in self._store if k[2] < cutoff_ms]
        for k in stale:
            del self._store[k]
        return len(stale)

    def __len__(self) -> int:
        return len(self._store)


def compute_feature(
    fn: FeatureFunction,
    window: WindowSpec,
    data: Mapping[str, WindowSeries],
    cache: FeatureCache,
) -> np.ndarray | None:
    """Evaluate a feature over a window, memoized.

    Returns ``None`` (a missing-feature marker) when a required modality has
    no usable data in the window; consumers decide whether to drop or fill.
    A cache hit performs no recomputation.
    """
    for mk in fn.modalities:
        series = data.get(mk)
        if series is None or series.values.size == 0:
            return None
    contributing: list[str] = []
    for mk in fn.modalities:
        contributing.extend(data[mk].source_ids)
    key = (fn.fid, window.t_a_ms, window.t_b_ms, tuple(sorted(set(contributing))))
    cached = cache.lookup(key)
    if cached is not None:
        return cached
    result = np.atleast_1d(np.asarray(fn.compute(data), dtype=float))
    if len(result) != len(fn.outputs):
        raise ConfigError(
            f"feature {fn.fid!r} produced {len(result)} values for "
            f"{len(fn.outputs)} declared outputs"
        )
    return cache.insert(key, result)


_STATS: dict[str, Callable[[np.ndarray], float]] = {
    "mean": lambda v: float(np.mean(v)),
    "std": lambda v: float(np.std(v)),
    "min": lambda v: float(np.min(v)),
    "max": lambda v: float(np.max(v)),
    "median": lambda v: float(np.median(v)),
    "range": lambda v: float(np.max(v) - np.min(v)),
    "last": lambda v: float(v[-1]),
    "count": lambda v: float(v.size),
}


def _stat_feature(fid: str, modality: str, stat: str) -> FeatureFunction:
    stat_fn = _STATS[stat]

    def compute(data: Mapping[str, WindowSeries]) -> np.ndarray:
        return np.array([stat_fn(data[modality].values)])

    return FeatureFunction(fid=fid, modalities=(modality,), kind="raw_stat", compute=compute)


def _presence_feature(threshold: float, modality: str = "motion") -> FeatureFunction:
    """Presence detection stand-in: thresholded mean fused motion level.

    Illustrative heuristic only, not a calibrated detector; it exists to
    give collocated services a shared low-level inference to reuse.
    """

    def compute(data: Mapping[str, WindowSeries]) -> np.ndarray:
        level = float(np.mean(data[modality].values))
        return np.array([1.0 if level > threshold else 0.0])

    return FeatureFunction(
        fid="presence",
        modalities=(modality,),
        kind="low_level_inference",
        compute=compute,
    )


def build_feature_registry(
    feature_ids: Sequence[str],
    presence_threshold: float = 0.4,
    presence_modality: str = "motion",
) -> dict[str, FeatureFunction]:
    """Resolve feature ids like ``temperature_mean`` or ``presence``.

    Stat features follow the pattern ``<modality>_<stat>`` with stats drawn
    from mean/std/min/max/median/range/last/count.
    """
    registry: dict[str, FeatureFunction] = {}
    for fid in feature_ids:
        if fid in registry:
            continue
        if fid == "presence":
            registry[fid] = _presence_feature(presence_threshold, presence_modality)
            continue
        modality, _, stat = fid.rpartition("_")
        if not modality or stat not in _STATS:
            raise ConfigError(f"cannot resolve feature id {fid!r}")
        registry[fid] = _stat_feature(fid, modality, stat)
    return registry


# ---------------------------------------------------------------------------
# Services and results
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class ServiceSpec:
    """A service's QoS profile plus its scheduling and window shape."""

    qos: QosProfile
    period_s: float
    k_l: int
    k_r: int
    delta_t_s: float
    features: tuple[str, ...]
    max_gap_s: float | None = None
    zone: str | None = None

    def __post_init__(self) -> None:
        if self.period_s <= 0:
            raise ConfigError("service period must be positive")
        if not self.features:
            raise ConfigError("service must declare at least one feature")
        if self.k_l < 0 or self.k_r < 0 or (self.k_l == 0 and self.k_r == 0):
            raise ConfigError("window needs k_l, k_r >= 0 and not both zero")
        object.__setattr__(self, "features", tuple(self.features))

    @property
    def service_id(self) -> str:
        return self.qos.service_id

    @property
    def gap_s(self) -> float:
        return self.max_gap_s if self.max_gap_s is not None else 2.0 * self.delta_t_s


@dataclass(frozen=True)
class FeatureVector:
    """Per-service feature output for one activation."""

    service_id: str
    t_ms: int
    components: Mapping[str, float]
    provenance: tuple[str, ...]
    missing: tuple[str, ...] = ()


@dataclass(frozen=True)
class TraceRow:
    """One sensor's ranking outcome within one service activation."""

    t_ms: int
    service_id: str
    sensor_id: str
    d_m: float
    d_a: float
    d_ma: float
    rank: int
    selected: bool


@dataclass
class CycleResult:
    features: dict[str, FeatureVector] = field(default_factory=dict)
    trace: list[TraceRow] = field(default_factory=list)
    errors: dict[str, str] = field(default_factory=dict)


@dataclass
class Counters:
    cycles: int = 0
    votes: int = 0
    points_processed: int = 0


class ServiceDataError(RuntimeError):
    """A service could not be served this cycle; other services proceed."""


class _SensorDyn:
    """Mutable per-sensor dynamic state, owned by the pipeline."""

    __slots__ = ("alpha", "alpha_t_ms", "rel")

    def __init__(self, sensor_id: str, n_expected: int, start_ms: int):
        self.alpha = 1.0
        self.alpha_t_ms = start_ms
        self.rel = ReliabilityState(
            sensor_id=sensor_id, n_expected=n_expected, interval_start_ms=start_ms
        )


# ---------------------------------------------------------------------------
# Pipeline
# ---------------------------------------------------------------------------

class Pipeline:
    """Single-writer cycle orchestrator over a fixed sensor pool.

    Construct one instance per scenario run; call :meth:`run_cycle` at every
    tick (see :attr:`tick_ms`).  Feature computations are pure, so only the
    cycle loop itself mutates state.
    """

    def __init__(
        self,
        sensors: Sequence[SensorSpec],
        services: Sequence[ServiceSpec],
        streams: Mapping[str, SensorStream],
        *,
        voting: VotingConfig | None = None,
        kalman: KalmanConfig | None = None,
        mode: Mode = Mode.UNIFIED,
        reliability_interval_s: float = 10.0,
        cache_horizon_s: float = 600.0,
        presence_threshold: float = 0.4,
        registry: Mapping[str, FeatureFunction] | None = None,
        start_ms: int = 0,
    ):
        self.mode = mode
        self.voting = voting or VotingConfig()
        self.kalman = kalman or KalmanConfig()
        self.start_ms = start_ms
        self.reliability_interval_ms = seconds_to_ms(reliability_interval_s)
        self.cache_horizon_ms = seconds_to_ms(cache_horizon_s)
        self.counters = Counters()

        self.specs: dict[str, SensorSpec] = {}
        for spec in sensors:
            if spec.sensor_id in self.specs:
                raise ConfigError(f"duplicate sensor id {spec.sensor_id!r}")
            self.specs[spec.sensor_id] = spec
        for sid in streams:
            if sid not in self.specs:
                raise ConfigError(f"stream for unknown sensor {sid!r}")
        self.streams = dict(streams)

        self.services = sorted(services, key=lambda s: s.service_id)
        seen = set()
        for svc in self.services:
            if svc.service_id in seen:
                raise ConfigError(f"duplicate service id {svc.service_id!r}")
            seen.add(svc.service_id)

        if registry is None:
            all_features = [fid for svc in self.services for fid in svc.features]
            registry = build_feature_registry(all_features, presence_threshold)
        self.registry = dict(registry)
        for svc in self.services:
            for fid in svc.features:
                fn = self.registry.get(fid)
                if fn is None:
                    raise ConfigError(f"service {svc.service_id!r}: unknown feature {fid!r}")
                for mk in fn.modalities:
                    if mk not in svc.qos.modality_needs:
                        raise ConfigError(
                            f"service {svc.service_id!r}: feature {fid!r} needs "
                            f"modality {mk!r} outside the declared needs"
                        )

        # cohorts: modality key -> specs, restricted to modalities in use
        needed = {mk for svc in self.services for mk in svc.qos.modality_needs}
        self._cohorts: dict[str, list[SensorSpec]] = {}
        for spec in sorted(self.specs.values(), key=lambda s: s.sensor_id):
            if spec.modality_key in needed:
                self._cohorts.setdefault(spec.modality_key, []).append(spec)

        self._granularity_ms: dict[str, int] = {}
        for mk in sorted(self._cohorts):
            gran = min(
                svc.qos.granularity_s
                for svc in self.services
                if mk in svc.qos.modality_needs
            )
            self._granularity_ms[mk] = seconds_to_ms(gran)

        self._static: dict[str, tuple[float, float, float]] = {
            sid: static_profile(spec) for sid, spec in self.specs.items()
        }
        self._dyn: dict[str, _SensorDyn] = {}
        self._sensor_granularity_s: dict[str, float] = {}
        for mk, cohort in self._cohorts.items():
            n_expected = max(
                1, self.reliability_interval_ms // self._granularity_ms[mk]
            )
            for spec in cohort:
                self._dyn[spec.sensor_id] = _SensorDyn(
                    spec.sensor_id, int(n_expected), start_ms
                )
                self._sensor_granularity_s[spec.sensor_id] = (
                    self._granularity_ms[mk] / 1000.0
                )

        self._pred = AssociationPredicate(
            zone_of=lambda sid: self.specs[sid].zone if sid in self.specs else "",
        )

        self._shared_cache = FeatureCache()
        self._service_caches: dict[str, FeatureCache] = {
            svc.service_id: FeatureCache() for svc in self.services
        }

        self._topsis: dict[tuple[str, str], RankingResult] = {}
        if mode is Mode.TOPSIS_BASELINE:
            for svc in self.services:
                for mk in svc.qos.modality_needs:
                    live = self._live_cohort(svc, mk)
                    if not live:
                        continue
                    vectors = [
                        self._state_vector(spec.sensor_id, start_ms, "interval")
                        for spec in live
                    ]
                    count = min(svc.qos.select_count, len(vectors))
                    self._topsis[(svc.service_id, mk)] = topsis_select(
                        vectors, svc.qos, count
                    )

        periods = [seconds_to_ms(svc.period_s) for svc in self.services]
        steps = periods + list(self._granularity_ms.values()) + [self.reliability_interval_ms]
        self.tick_ms = math.gcd(*steps) if steps else 1000

    # -- state assembly ----------------------------------------------------

    def _state_vector(self, sensor_id: str, t_ms: int, beta_source: str) -> SensorStateVector:
        dyn = self._dyn[sensor_id]
        gamma, epsilon, kappa = self._static[sensor_id]
        beta = dyn.rel.beta if beta_source == "interval" else dyn.rel.beta_cumulative
        return SensorStateVector(
            sensor_id=sensor_id,
            t_ms=t_ms,
            alpha=dyn.alpha,
            beta=beta,
            gamma=gamma,
            epsilon=epsilon,
            kappa=kappa,
        )

    def _live_cohort(self, svc: ServiceSpec, mk: str) -> list[SensorSpec]:
        cohort = self._cohorts.get(mk, [])
        live = [
            spec
            for spec in cohort
            if spec.sensor_id in self.streams and len(self.streams[spec.sensor_id]) > 0
        ]
        if svc.zone is not None:
            live = [spec for spec in live if spec.zone == svc.zone]
        return live

    def _cache_for(self, svc: ServiceSpec) -> FeatureCache:
        if self.mode is Mode.PER_SERVICE:
            return self._service_caches[svc.service_id]
        return self._shared_cache

    def caches(self) -> list[FeatureCache]:
        if self.mode is Mode.PER_SERVICE:
            return [self._service_caches[s.service_id] for s in self.services]
        return [self._shared_cache]

    @property
    def feature_invocations(self) -> int:
        return sum(c.misses for c in self.caches())

    @property
    def cache_hits(self) -> int:
        return sum(c.hits for c in self.caches())

    @property
    def distinct_feature_keys(self) -> int:
        keys: set[tuple] = set()
        for c in self.caches():
            keys.update(c.keys_seen)
        return len(keys)

    # -- cohort maintenance --------------------------------------------------

    def _due(self, t_ms: int, step_ms: int) -> bool:
        return t_ms > self.start_ms and (t_ms - self.start_ms) % step_ms == 0

    def _vote(self, mk: str, t_ms: int) -> None:
        cohort = self._cohorts[mk]
        gran = self._granularity_ms[mk]
        present: list[tuple[str, float]] = []
        for spec in cohort:
            stream = self.streams.get(spec.sensor_id)
            point = stream.latest_in(t_ms - gran, t_ms) if stream else None
            if point is not None:
                present.append((spec.sensor_id, point.value))
        self.counters.votes += 1
        in_optimal: set[str] = set()
        if len(present) == 1:
            # voting formulas are undefined for a single reporter
            sid, _ = present[0]
            dyn = self._dyn[sid]
            dyn.alpha, dyn.alpha_t_ms = 1.0, t_ms
            in_optimal.add(sid)
        elif len(present) >= 2:
            cfg = self.voting
            if cfg.k is not None and cfg.k > len(present):
                # configured set size, clamped to the sensors actually reporting
                cfg = replace(cfg, k=len(present))
            norm = normalize(present)
            scores = cumulative_scores(membership_matrix(norm, cfg))
            optimal = select_optimal(scores, present, cfg)
            in_optimal.update(optimal.sensor_ids)
            for sid, alpha in assign_accuracy(present, optimal, self.kalman).items():
                dyn = self._dyn[sid]
                dyn.alpha, dyn.alpha_t_ms = alpha, t_ms
        for spec in cohort:
            dyn = self._dyn[spec.sensor_id]
            dyn.rel = record_observation(dyn.rel, spec.sensor_id in in_optimal)

    def _close_reliability(self, t_ms: int) -> None:
        # interval lengths are measured in expected-sample units so a fully
        # consistent sensor sits on the Poisson mode at any cadence
        for sid in sorted(self._dyn):
            dyn = self._dyn[sid]
            dyn.rel = close_interval(dyn.rel, t_ms,
                                     seconds_per_unit=self._sensor_granularity_s[sid])

    # -- service activation --------------------------------------------------

    def activations_due(self, t_ms: int) -> list[ServiceSpec]:
        due = []
        for svc in self.services:
            period_ms = seconds_to_ms(svc.period_s)
            warmup = svc.k_l * seconds_to_ms(svc.delta_t_s)
            if self._due(t_ms, period_ms) and t_ms - self.start_ms >= warmup:
                due.append(svc)
        return due

    def _select(
        self, svc: ServiceSpec, mk: str, t_ms: int, live: list[SensorSpec]
    ) -> tuple[tuple[str, ...], list[TraceRow]]:
        ids = tuple(spec.sensor_id for spec in live)
        if self.mode is Mode.NO_SELECTION_FUSED:
            return ids, []
        if self.mode is Mode.TOPSIS_BASELINE:
            result = self._topsis.get((svc.service_id, mk))
            if result is None:
                return ids, []
        else:
            vectors = [
                self._state_vector(spec.sensor_id, t_ms, svc.qos.beta_source)
                for spec in live
            ]
            count = min(svc.qos.select_count, len(vectors))
            result = rank_and_select(vectors, svc.qos, count)
        rows = [
            TraceRow(
                t_ms=t_ms,
                service_id=svc.service_id,
                sensor_id=rec.sensor_id,
                d_m=rec.d_m,
                d_a=rec.d_a,
                d_ma=rec.d_ma,
                rank=result.order.index(rec.sensor_id) + 1,
                selected=rec.sensor_id in result.selected,
            )
            for rec in result.records
        ]
        return result.selected, rows

    def _window_series(
        self, svc: ServiceSpec, window: WindowSpec, selected: Sequence[str]
    ) -> WindowSeries:
        ticks = window_ticks(window)
        pred = AssociationPredicate(
            zone_of=self._pred.zone_of, temporal_tolerance_s=svc.gap_s
        )
        assoc_streams: list[SensorStream] = []
        for sid in sorted(selected):
            stream = self.streams[sid]
            zone = svc.zone if svc.zone is not None else self.specs[sid].zone
            _, subset = associate(stream.points, pred, window, zone)
            self.counters.points_processed += sum(
                1 for p in subset if window.t_a_ms < p.timestamp_ms <= window.t_b_ms
            )
            assoc_streams.append(
                SensorStream(
                    sensor_id=sid,
                    modality=stream.modality,
                    points=subset,
                    modality_tag=stream.modality_tag,
                    period_hint_s=stream.period_hint_s,
                )
            )
        grid = align(assoc_streams, ticks, svc.delta_t_s, svc.gap_s)
        fused = kalman_fuse_streams(grid, self.kalman)
        return WindowSeries(
            values=np.array(fused.values(), dtype=float),
            source_ids=tuple(sorted(selected)),
        )

    def _activate(self, svc: ServiceSpec, t_ms: int, result: CycleResult) -> None:
        window = form_window(t_ms, svc.k_l, svc.k_r, svc.delta_t_s)
        selected_by_mk: dict[str, tuple[str, ...]] = {}
        rows: list[TraceRow] = []
        for mk in svc.qos.modality_needs:
            live = self._live_cohort(svc, mk)
            if not live:
                raise ServiceDataError(f"no live sensors for modality {mk!r}")
            selected, mk_rows = self._select(svc, mk, t_ms, live)
            selected_by_mk[mk] = selected
            rows.extend(mk_rows)
        data = {
            mk: self._window_series(svc, window, selected)
            for mk, selected in selected_by_mk.items()
        }
        cache = self._cache_for(svc)
        components: dict[str, float] = {}
        missing: list[str] = []
        for fid in svc.features:
            fn = self.registry[fid]
            out = compute_feature(fn, window, data, cache)
            if out is None:
                missing.extend(fn.outputs)
                continue
            for name, value in zip(fn.outputs, out):
                components[name] = float(value)
        sensors_used = sorted({sid for sel in selected_by_mk.values() for sid in sel})
        provenance = tuple(sensors_used) + tuple(svc.features)
        result.features[svc.service_id] = FeatureVector(
            service_id=svc.service_id,
            t_ms=t_ms,
            components=components,
            provenance=provenance,
            missing=tuple(missing),
        )
        result.trace.extend(rows)

    # -- the cycle -----------------------------------------------------------

    def run_cycle(self, t_ms: int) -> CycleResult:
        """Advance cohort state and serve every service due at ``t_ms``."""
        self.counters.cycles += 1
        if self.mode in (Mode.UNIFIED, Mode.PER_SERVICE):
            for mk in sorted(self._cohorts):
                if self._due(t_ms, self._granularity_ms[mk]):
                    self._vote(mk, t_ms)
            if self._due(t_ms, self.reliability_interval_ms):
                self._close_reliability(t_ms)
        result = CycleResult()
        for svc in self.activations_due(t_ms):
            try:
                self._activate(svc, t_ms, result)
            except ServiceDataError as exc:
                result.errors[svc.service_id] = str(exc)
        for cache in self.caches():
            cache.evict_before(t_ms - self.cache_horizon_ms)
        return result

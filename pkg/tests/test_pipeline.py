import numpy as np
import pytest

from edgeprep.model import ConfigError, DataPoint, Modality, QosProfile
from edgeprep.pipeline import (
    AssociationPredicate,
    FeatureCache,
    FeatureFunction,
    Mode,
    Pipeline,
    ServiceSpec,
    WindowSeries,
    associate,
    build_feature_registry,
    compute_feature,
    form_window,
    window_ticks,
)
from edgeprep.harness import GeneratorSpec, generate_synthetic
from conftest import make_spec


def dp(t, v, sid="s1"):
    return DataPoint(timestamp_ms=t, value=v, sensor_id=sid)


class TestFormWindow:
    def test_direct_substitution(self):
        w = form_window(100_000, k_l=2, k_r=1, delta_t_s=5.0)
        assert w.t_a_ms == 90_000
        assert w.t_b_ms == 105_000
        assert w.width_ms == 15_000

    def test_causal_boundaries(self):
        assert form_window(100_000, 0, 2, 5.0).t_a_ms == 100_000
        assert form_window(100_000, 2, 0, 5.0).t_b_ms == 100_000

    def test_degenerate_window_rejected(self):
        with pytest.raises(ValueError):
            form_window(100_000, 0, 0, 5.0)
        with pytest.raises(ValueError):
            form_window(100_000, 1, 1, 0.0)

    def test_ticks_cover_the_half_open_window(self):
        w = form_window(10_000, 3, 0, 1.0)
        assert window_ticks(w) == (8000, 9000, 10_000)

    def test_identical_parameters_give_identical_membership(self):
        points = [dp(t, 1.0) for t in range(7000, 10_001, 500)]
        w1 = form_window(10_000, 3, 0, 1.0)
        w2 = form_window(10_000, 3, 0, 1.0)
        in1 = [p for p in points if w1.contains(p.timestamp_ms)]
        in2 = [p for p in points if w2.contains(p.timestamp_ms)]
        assert in1 == in2


class TestAssociate:
    pred = AssociationPredicate(zone_of=lambda sid: {"s1": "lab", "s2": "hall"}.get(sid, ""))

    def test_point_in_window_and_zone(self):
        w = form_window(10_000, 2, 0, 1.0)
        flag, subset = associate([dp(9000, 1.0, "s1")], self.pred, w, "lab")
        assert flag
        assert len(subset) == 1

    def test_wrong_zone_is_excluded(self):
        w = form_window(10_000, 2, 0, 1.0)
        flag, subset = associate([dp(9000, 1.0, "s2")], self.pred, w, "lab")
        assert not flag
        assert subset == ()

    def test_empty_point_set(self):
        w = form_window(10_000, 2, 0, 1.0)
        assert associate([], self.pred, w, "lab") == (False, ())

    def test_window_boundaries_are_half_open(self):
        w = form_window(10_000, 2, 0, 1.0)
        pts = [dp(8000, 1.0, "s1"), dp(8001, 2.0, "s1"), dp(10_000, 3.0, "s1"),
               dp(10_001, 4.0, "s1")]
        _, subset = associate(pts, self.pred, w, "lab")
        assert [p.timestamp_ms for p in subset] == [8001, 10_000]

    def test_enlarging_the_window_never_removes_points(self):
        pts = [dp(t, float(t), "s1") for t in range(6000, 12_001, 500)]
        small = form_window(10_000, 2, 0, 1.0)
        big = form_window(10_000, 4, 1, 1.0)
        _, inner = associate(pts, self.pred, small, "lab")
        _, outer = associate(pts, self.pred, big, "lab")
        assert set(inner) <= set(outer)


class TestComputeFeature:
    def make_fn(self, counter):
        def compute(data):
            counter["calls"] += 1
            return np.array([float(np.mean(data["temperature"].values))])

        return FeatureFunction(fid="temperature_mean", modalities=("temperature",),
                               kind="raw_stat", compute=compute)

    def data(self, values=(7.0, 7.0, 7.0), sources=("s1",)):
        return {"temperature": WindowSeries(np.array(values), tuple(sources))}

    def test_shared_key_computed_once(self):
        counter = {"calls": 0}
        fn = self.make_fn(counter)
        cache = FeatureCache()
        w = form_window(10_000, 3, 0, 1.0)
        first = compute_feature(fn, w, self.data(), cache)
        second = compute_feature(fn, w, self.data(), cache)
        assert counter["calls"] == 1
        assert cache.misses == 1 and cache.hits == 1
        assert np.array_equal(first, second)

    def test_fresh_cache_recomputes_identically(self):
        counter = {"calls": 0}
        fn = self.make_fn(counter)
        w = form_window(10_000, 3, 0, 1.0)
        first = compute_feature(fn, w, self.data(), FeatureCache())
        second = compute_feature(fn, w, self.data(), FeatureCache())
        assert counter["calls"] == 2
        assert np.array_equal(first, second)

    def test_mean_over_constant_window(self):
        fn = self.make_fn({"calls": 0})
        got = compute_feature(fn, form_window(10_000, 3, 0, 1.0), self.data(), FeatureCache())
        assert got.tolist() == [7.0]

    def test_missing_modality_marker(self):
        fn = self.make_fn({"calls": 0})
        cache = FeatureCache()
        w = form_window(10_000, 3, 0, 1.0)
        assert compute_feature(fn, w, {}, cache) is None
        empty = {"temperature": WindowSeries(np.array([]), ("s1",))}
        assert compute_feature(fn, w, empty, cache) is None
        assert cache.misses == 0 and cache.hits == 0

    def test_different_sensor_sets_do_not_collide(self):
        counter = {"calls": 0}
        fn = self.make_fn(counter)
        cache = FeatureCache()
        w = form_window(10_000, 3, 0, 1.0)
        compute_feature(fn, w, self.data(sources=("s1",)), cache)
        compute_feature(fn, w, self.data(sources=("s2",)), cache)
        assert counter["calls"] == 2

    def test_eviction_drops_old_windows(self):
        fn = self.make_fn({"calls": 0})
        cache = FeatureCache()
        compute_feature(fn, form_window(10_000, 3, 0, 1.0), self.data(), cache)
        assert len(cache) == 1
        cache.evict_before(20_000)
        assert len(cache) == 0
        assert cache.keys_seen  # history of keys is retained for accounting


class TestFeatureRegistry:
    def test_stat_features_resolve(self):
        registry = build_feature_registry(["temperature_mean", "co2_max", "motion_std"])
        assert set(registry) == {"temperature_mean", "co2_max", "motion_std"}
        assert registry["co2_max"].modalities == ("co2",)

    def test_presence_is_a_low_level_inference(self):
        registry = build_feature_registry(["presence"], presence_threshold=0.4)
        fn = registry["presence"]
        assert fn.kind == "low_level_inference"
        high = {"motion": WindowSeries(np.array([0.8, 0.9]), ("m1",))}
        low = {"motion": WindowSeries(np.array([0.1, 0.2]), ("m1",))}
        assert fn.compute(high).tolist() == [1.0]
        assert fn.compute(low).tolist() == [0.0]

    def test_unknown_feature_rejected(self):
        with pytest.raises(ConfigError):
            build_feature_registry(["sound_level"])

    def test_purity_contract(self):
        registry = build_feature_registry(["temperature_std"])
        fn = registry["temperature_std"]
        data = {"temperature": WindowSeries(np.array([1.0, 2.0, 4.0]), ("s1",))}
        assert np.array_equal(fn.compute(data), fn.compute(data))


def simple_service(service_id="svc", modalities=("temperature",), period_s=1.0,
                   features=("temperature_mean",), **kw):
    return ServiceSpec(
        qos=QosProfile(service_id=service_id, modality_needs=modalities),
        period_s=period_s,
        k_l=2,
        k_r=0,
        delta_t_s=1.0,
        features=features,
        **kw,
    )


def synth_streams(spec_map, duration_s=20.0, seed=1):
    gens = [
        GeneratorSpec(sensor_id=sid, modality=modality, base="constant", level=level,
                      noise_std=0.0, period_s=1.0, duration_s=duration_s)
        for sid, (modality, level) in spec_map.items()
    ]
    return generate_synthetic(gens, seed)


class TestPipeline:
    def test_singleton_cohorts_bypass_voting(self):
        sensors = [make_spec("t1"), make_spec("m1", Modality.MOTION)]
        service = simple_service(modalities=("motion", "temperature"),
                                 features=("temperature_mean", "motion_mean"))
        streams = synth_streams({"t1": ("temperature", 20.0), "m1": ("motion", 0.5)})
        pipeline = Pipeline(sensors, [service], streams)
        result = pipeline.run_cycle(5000)
        fv = result.features["svc"]
        assert fv.components["temperature_mean"] == pytest.approx(20.0)
        assert fv.components["motion_mean"] == pytest.approx(0.5)
        rows = {r.sensor_id: r for r in result.trace}
        assert rows["t1"].selected and rows["t1"].rank == 1

    def test_service_error_does_not_break_others(self):
        sensors = [make_spec("t1")]
        ok = simple_service("ok", ("temperature",))
        starved = simple_service("starved", ("co2",), features=("co2_mean",))
        streams = synth_streams({"t1": ("temperature", 20.0)})
        pipeline = Pipeline(sensors, [ok, starved], streams)
        result = pipeline.run_cycle(5000)
        assert "ok" in result.features
        assert "starved" in result.errors
        assert "co2" in result.errors["starved"]

    def test_shared_inference_computed_once(self):
        sensors = [make_spec("m1", Modality.MOTION), make_spec("m2", Modality.MOTION)]
        svc_a = simple_service("a", ("motion",), features=("motion_mean", "presence"))
        svc_b = simple_service("b", ("motion",), features=("presence",))
        streams = synth_streams({"m1": ("motion", 0.6), "m2": ("motion", 0.6)})
        pipeline = Pipeline(sensors, [svc_a, svc_b], streams, mode=Mode.UNIFIED)
        result = pipeline.run_cycle(5000)
        assert result.features["a"].components["presence"] == \
            result.features["b"].components["presence"]
        # presence shared (1 miss + 1 hit), motion_mean computed once
        assert pipeline.feature_invocations == 2
        assert pipeline.cache_hits == 1

    def test_per_service_mode_recomputes_shared_features(self):
        sensors = [make_spec("m1", Modality.MOTION), make_spec("m2", Modality.MOTION)]
        svc_a = simple_service("a", ("motion",), features=("presence",))
        svc_b = simple_service("b", ("motion",), features=("presence",))
        streams = synth_streams({"m1": ("motion", 0.6), "m2": ("motion", 0.6)})
        unified = Pipeline(sensors, [svc_a, svc_b], streams, mode=Mode.UNIFIED)
        per_service = Pipeline(sensors, [svc_a, svc_b], streams, mode=Mode.PER_SERVICE)
        r1 = unified.run_cycle(5000)
        r2 = per_service.run_cycle(5000)
        assert r1.features["a"] == r2.features["a"]
        assert r1.features["b"] == r2.features["b"]
        assert unified.feature_invocations == 1
        assert per_service.feature_invocations == 2

    def test_no_selection_mode_uses_every_live_sensor(self):
        sensors = [make_spec(f"t{i}") for i in (1, 2, 3)]
        service = simple_service()
        streams = synth_streams({f"t{i}": ("temperature", 20.0) for i in (1, 2, 3)})
        selective = Pipeline(sensors, [service], streams, mode=Mode.UNIFIED)
        fused_all = Pipeline(sensors, [service], streams, mode=Mode.NO_SELECTION_FUSED)
        r_sel = selective.run_cycle(5000)
        r_all = fused_all.run_cycle(5000)
        assert r_all.features["svc"].provenance[:3] == ("t1", "t2", "t3")
        assert len(r_sel.features["svc"].provenance) < len(r_all.features["svc"].provenance)
        assert fused_all.counters.points_processed > selective.counters.points_processed

    def test_unknown_stream_rejected(self):
        sensors = [make_spec("t1")]
        streams = synth_streams({"t1": ("temperature", 20.0), "tX": ("temperature", 1.0)})
        with pytest.raises(ConfigError):
            Pipeline(sensors, [simple_service()], streams)

    def test_feature_outside_declared_needs_rejected(self):
        sensors = [make_spec("t1")]
        bad = simple_service(modalities=("temperature",),
                             features=("temperature_mean", "presence"))
        streams = synth_streams({"t1": ("temperature", 20.0)})
        with pytest.raises(ConfigError):
            Pipeline(sensors, [bad], streams)

    def test_alpha_tracks_voted_outliers(self):
        sensors = [make_spec(f"t{i}") for i in (1, 2, 3)]
        streams = synth_streams({"t1": ("temperature", 20.0),
                                 "t2": ("temperature", 20.0),
                                 "t3": ("temperature", 28.0)})
        pipeline = Pipeline(sensors, [simple_service()], streams)
        pipeline.run_cycle(1000)
        alphas = {sid: pipeline._dyn[sid].alpha for sid in ("t1", "t2", "t3")}
        assert alphas["t1"] == 1.0 and alphas["t2"] == 1.0
        assert alphas["t3"] == pytest.approx(np.exp(-8.0), rel=1e-9)

    def test_zone_scoping_limits_the_cohort(self):
        sensors = [make_spec("t1", zone="lab"), make_spec("t2", zone="hall")]
        service = simple_service(zone="lab")
        streams = synth_streams({"t1": ("temperature", 20.0), "t2": ("temperature", 99.0)})
        pipeline = Pipeline(sensors, [service], streams)
        result = pipeline.run_cycle(5000)
        assert result.features["svc"].components["temperature_mean"] == pytest.approx(20.0)
        assert {r.sensor_id for r in result.trace} == {"t1"}

"""edgeprep: quality-aware preprocessing for shared sensor streams.

Redundant, heterogeneous sensor streams feed multiple collocated services.
This package scores sensors dynamically (fuzzy-voted accuracy, Poisson
consistency-based reliability), ranks and selects them against per-service
QoS targets, fuses and interpolates the surviving streams, and emits
per-service feature vectors through a unified pipeline that computes shared
intermediate inferences exactly once.
"""

from .model import (
    ATTRIBUTE_NAMES,
    ConfigError,
    DataPoint,
    Direction,
    Modality,
    QosProfile,
    SensorSpec,
    SensorStateVector,
    SensorStream,
    StaticAttr,
    UtopiaVector,
    ValidationReport,
    merge_streams,
    validate_spec,
)
from .voting import (
    MembershipMatrix,
    NormalizedMeasurements,
    OptimalSet,
    VotingConfig,
    assign_accuracy,
    cumulative_scores,
    membership_matrix,
    normalize,
    select_optimal,
)
from .reliability import (
    ReliabilityState,
    close_interval,
    compute_lambda,
    cumulative_reliability,
    interval_reliability,
    record_observation,
)
from .ranking import (
    RankingResult,
    SensorDistance,
    cosine_component,
    direction_aware_distance,
    euclidean_component,
    rank_and_select,
    scaling_coefficients,
    static_score,
    topsis_select,
)
from .fusion import (
    AlignedGrid,
    FusedStream,
    KalmanConfig,
    align,
    interpolate,
    kalman_fuse,
    kalman_fuse_streams,
)
from .pipeline import (
    AssociationPredicate,
    CycleResult,
    FeatureCache,
    FeatureFunction,
    FeatureVector,
    Mode,
    Pipeline,
    ServiceSpec,
    TraceRow,
    WindowSpec,
    associate,
    build_feature_registry,
    compute_feature,
    form_window,
    window_ticks,
)
from .harness import (
    FaultKind,
    FaultSpec,
    GeneratorSpec,
    ScenarioConfig,
    ScenarioReport,
    compare_modes,
    generate_synthetic,
    ingest_csv,
    inject_faults,
    load_scenario,
    run_scenario,
    write_streams_csv,
)

__version__ = "0.1.0"

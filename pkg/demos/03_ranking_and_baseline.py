"""Ranking sensors against a service's ideal attribute vector.

Three sensors with different accuracy/reliability trade-offs are ranked
twice: once with accuracy-priority weights, once with reliability-priority
weights.  The static TOPSIS baseline is shown for contrast; because it only
ever sees the attribute snapshot, its choice cannot react to the dynamic
scores changing.
"""

from edgeprep.model import QosProfile, SensorStateVector
from edgeprep.ranking import rank_and_select, topsis_select

cohort = [
    #                    alpha beta  gamma eps   kappa
    SensorStateVector("accurate_but_flaky", 0, 0.98, 0.30, 0.8, 0.7, 0.9),
    SensorStateVector("steady_but_coarse", 0, 0.75, 0.95, 0.5, 0.6, 0.8),
    SensorStateVector("balanced", 0, 0.85, 0.80, 0.7, 0.7, 0.8),
]


def show(title, result):
    print(f"{title}:")
    for rank, sid in enumerate(result.order, start=1):
        rec = result.record_for(sid)
        marker = " <- selected" if sid in result.selected else ""
        print(f"  {rank}. {sid:<20} d_M={rec.d_m:.3f} d_A={rec.d_a:.4f} "
              f"d_MA={rec.d_ma:.3f}{marker}")
    print()


accuracy_first = QosProfile(service_id="svc", weights=(5, 0.5, 1, 1, 1))
reliability_first = QosProfile(service_id="svc", weights=(0.5, 5, 1, 1, 1))

show("accuracy-priority weights", rank_and_select(cohort, accuracy_first, 1))
show("reliability-priority weights", rank_and_select(cohort, reliability_first, 1))
show("TOPSIS baseline (same snapshot, accuracy weights)",
     topsis_select(cohort, accuracy_first, 1))

print("swap the weights and the adaptive ranking swaps its choice;")
print("the baseline would keep re-ranking the same frozen snapshot forever.")

import pytest

from edgeprep.model import (
    Direction,
    Modality,
    QosProfile,
    SensorSpec,
    SensorStateVector,
    StaticAttr,
)


def make_spec(sid, modality=Modality.TEMPERATURE, zone="room",
              resolution=0.5, response=1.0, sensing_range=50.0, tag=""):
    return SensorSpec(
        sensor_id=sid,
        modality=modality,
        modality_tag=tag,
        zone=zone,
        static_attrs={
            "resolution": StaticAttr(resolution, Direction.COST),
            "response_time": StaticAttr(response, Direction.COST),
            "range": StaticAttr(sensing_range, Direction.BENEFIT),
        },
    )


def make_state(sid, alpha=1.0, beta=1.0, gamma=0.5, epsilon=0.5, kappa=0.5, t_ms=0):
    return SensorStateVector(sensor_id=sid, t_ms=t_ms, alpha=alpha, beta=beta,
                             gamma=gamma, epsilon=epsilon, kappa=kappa)


@pytest.fixture
def qos_all_ones():
    return QosProfile(service_id="svc")

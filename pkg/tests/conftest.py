import hypothesis
import pytest

from softslides.physics import (
    Particle,
    SimParams,
    SoftBody,
    Spring,
    SpringRole,
    Vec2,
    ViewBox,
    World,
)

hypothesis.settings.register_profile(
    "default",
    max_examples=60,
    deadline=None,
    derandomize=True,
)
hypothesis.settings.load_profile("default")


def huge_box() -> ViewBox:
    return ViewBox(min=Vec2(-1e9, -1e9), max=Vec2(1e9, 1e9))


def oscillator_world(h: float = 0.01) -> World:
    """Pinned anchor at the origin, unit mass at (1, 0) on a zero-rest
    unit-stiffness undamped spring: x(t) = cos(t) exactly."""
    body = SoftBody(
        particles=[
            Particle(id=0, position=Vec2(0.0, 0.0), pinned=True),
            Particle(id=1, position=Vec2(1.0, 0.0)),
        ],
        springs=[
            Spring(a=0, b=1, rest_length=0.0, stiffness=1.0, damping=0.0,
                   role=SpringRole.STRUCTURAL)
        ],
        dimensionality=1,
        layers=2,
    )
    params = SimParams(gravity=Vec2(0.0, 0.0), h=h, restitution=0.0)
    return World(bodies=[body], params=params, box=huge_box())


@pytest.fixture
def oscillator():
    return oscillator_world()

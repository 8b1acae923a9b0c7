"""Builder sequencing, navigation, key bindings, event delegation."""

import pytest
from hypothesis import given, strategies as st

from softslides.integrators import IntegratorKind
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
from softslides.presentation import (
    Anchor,
    BuildError,
    KeyEvent,
    NavigationError,
    ParamError,
    PointerDownEvent,
    PointerMoveEvent,
    PointerUpEvent,
    Presentation,
    PresentationBuilder,
    SimScene,
    Slide,
    TickEvent,
    Tidget,
    apply_param,
    dispatch,
    navigate,
    reset_scene,
)


def make_world(k=10.0, pa=(-0.5, 0.0), pb=(0.5, 0.0)):
    particles = [
        Particle(id=0, position=Vec2(*pa), mass=1.0),
        Particle(id=1, position=Vec2(*pb), mass=1.0),
    ]
    springs = [Spring(a=0, b=1, rest_length=1.0, stiffness=k, damping=0.5,
                      role=SpringRole.STRUCTURAL)]
    body = SoftBody(particles=particles, springs=springs, dimensionality=1)
    return World(bodies=[body], params=SimParams(),
                 box=ViewBox(min=Vec2(-2, -1.5), max=Vec2(2, 1.5)))


def make_presentation():
    b = PresentationBuilder()
    b.add_slide(Slide(id="intro", title="Intro", tidgets=[
        Tidget(lines=["a", "b", "c"], anchor=Anchor.TOP_LEFT),
        Tidget(lines=["x", "y"], anchor=Anchor.BOTTOM_RIGHT),
    ]))
    b.add_slide(Slide(id="demo", title="Demo",
                      scene=SimScene(world=make_world(),
                                     integrator=IntegratorKind.MIDPOINT)))
    b.add_slide(Slide(id="outro", title="Outro"))
    return b.finish()


def positions(world):
    return [(q.position.x, q.position.y) for b in world.bodies for q in b.particles]


# builder

def test_builder_preserves_order_and_enters_first_slide():
    p = make_presentation()
    assert [s.id for s in p.slides] == ["intro", "demo", "outro"]
    assert p.current == 0
    assert p.scene is None  # first slide has no scene


def test_builder_rejects_duplicate_id_at_add():
    b = PresentationBuilder()
    b.add_slide(Slide(id="s"))
    with pytest.raises(BuildError, match="'s'"):
        b.add_slide(Slide(id="s"))


def test_builder_rejects_empty():
    with pytest.raises(BuildError):
        PresentationBuilder().finish()


def test_live_scene_is_a_copy_of_the_template():
    p = make_presentation()
    navigate(p, "goto", index=1)
    template = p.slides[1].scene
    assert p.scene is not template
    assert p.scene.world is not template.world
    dispatch(p, TickEvent(dt=1 / 60))
    assert positions(p.scene.world) != positions(template.world)


# navigation

def test_next_prev_clamp():
    p = make_presentation()
    navigate(p, "prev")
    assert p.current == 0
    navigate(p, "end")
    assert p.current == 2
    navigate(p, "next")
    assert p.current == 2
    navigate(p, "home")
    assert p.current == 0


def test_goto_out_of_range():
    p = make_presentation()
    for bad in (-1, 3, None):
        with pytest.raises(NavigationError):
            navigate(p, "goto", index=bad)


def test_unknown_action():
    p = make_presentation()
    with pytest.raises(NavigationError):
        navigate(p, "sideways")


def test_entering_a_slide_resets_reveals_and_scene():
    p = make_presentation()
    dispatch(p, KeyEvent(code="b"))
    assert p.slides[0].tidgets[0].reveal_index == 1
    navigate(p, "goto", index=1)
    before = positions(p.slides[1].scene.world)
    for _ in range(5):
        dispatch(p, TickEvent(dt=1 / 60))
    assert positions(p.scene.world) != before
    navigate(p, "prev")
    assert p.slides[0].tidgets[0].reveal_index == 0
    navigate(p, "next")
    assert positions(p.scene.world) == before


def test_clamped_navigation_does_not_reenter():
    p = make_presentation()
    navigate(p, "goto", index=2)
    p.slides[2].tidgets.append(Tidget(lines=["late"]))
    dispatch(p, KeyEvent(code="b"))
    assert p.slides[2].tidgets[0].reveal_index == 1
    navigate(p, "next")  # clamped: stays, must not reset reveals
    assert p.slides[2].tidgets[0].reveal_index == 1


def test_goto_current_slide_reenters():
    p = make_presentation()
    dispatch(p, KeyEvent(code="b"))
    assert p.slides[0].tidgets[0].reveal_index == 1
    navigate(p, "goto", index=0)
    assert p.slides[0].tidgets[0].reveal_index == 0


# key bindings

def test_space_and_pagedown_advance():
    p = make_presentation()
    dispatch(p, KeyEvent(code="Space"))
    assert p.current == 1
    dispatch(p, KeyEvent(code="PageDown"))
    assert p.current == 2
    dispatch(p, KeyEvent(code="PageUp"))
    assert p.current == 1
    dispatch(p, KeyEvent(code="Home"))
    assert p.current == 0
    dispatch(p, KeyEvent(code="End"))
    assert p.current == 2


def test_integrator_keys():
    p = make_presentation()
    navigate(p, "goto", index=1)
    for code, kind in [("1", IntegratorKind.EXPLICIT_EULER),
                       ("2", IntegratorKind.MIDPOINT),
                       ("3", IntegratorKind.FEYNMAN),
                       ("4", IntegratorKind.RK4)]:
        dispatch(p, KeyEvent(code=code))
        assert p.scene.integrator is kind


def test_integrator_key_without_scene_is_noop():
    p = make_presentation()
    dispatch(p, KeyEvent(code="3"))
    assert p.scene is None


def test_tidget_toggle_is_an_involution():
    p = make_presentation()
    assert p.tidgets_enabled
    dispatch(p, KeyEvent(code="t"))
    assert not p.tidgets_enabled
    dispatch(p, KeyEvent(code="t"))
    assert p.tidgets_enabled


def test_reveal_fills_tidgets_in_order_and_caps():
    p = make_presentation()
    t0, t1 = p.slides[0].tidgets
    for expected in [(1, 0), (2, 0), (3, 0), (3, 1), (3, 2), (3, 2)]:
        dispatch(p, KeyEvent(code="b"))
        assert (t0.reveal_index, t1.reveal_index) == expected


def test_reset_key_restores_initial_positions_bitwise():
    p = make_presentation()
    navigate(p, "goto", index=1)
    initial = positions(p.slides[1].scene.world)
    for _ in range(10):
        dispatch(p, TickEvent(dt=1 / 60))
    dispatch(p, PointerDownEvent(x=0.5, y=0.0))
    dispatch(p, KeyEvent(code="r"))
    assert positions(p.scene.world) == initial
    assert p.scene.world.drag is None


def test_pause_toggle():
    p = make_presentation()
    navigate(p, "goto", index=1)
    dispatch(p, KeyEvent(code="p"))
    assert not p.scene.running
    frozen = positions(p.scene.world)
    dispatch(p, TickEvent(dt=1 / 60))
    assert positions(p.scene.world) == frozen
    dispatch(p, KeyEvent(code="p"))
    dispatch(p, TickEvent(dt=1 / 60))
    assert positions(p.scene.world) != frozen


def test_unknown_key_is_noop():
    p = make_presentation()
    dispatch(p, KeyEvent(code="z"))
    dispatch(p, KeyEvent(code="Escape"))
    assert p.current == 0 and p.tidgets_enabled


def test_on_key_override_consumes_before_defaults():
    seen = []

    def swallow_space(p, code):
        seen.append(code)
        return code == "Space"

    b = PresentationBuilder()
    b.add_slide(Slide(id="a", on_key=swallow_space))
    b.add_slide(Slide(id="b"))
    p = b.finish()
    dispatch(p, KeyEvent(code="Space"))
    assert p.current == 0  # consumed
    dispatch(p, KeyEvent(code="PageDown"))
    assert p.current == 1  # returned False: default ran
    assert seen == ["Space", "PageDown"]


# event delegation

def test_pointer_events_without_scene_are_noops():
    p = make_presentation()
    dispatch(p, PointerDownEvent(x=0.0, y=0.0))
    dispatch(p, PointerMoveEvent(x=1.0, y=1.0))
    dispatch(p, PointerUpEvent())
    assert p.scene is None


def test_pointer_drag_cycle_reaches_the_world():
    p = make_presentation()
    navigate(p, "goto", index=1)
    dispatch(p, PointerDownEvent(x=0.55, y=0.05))
    drag = p.scene.world.drag
    assert drag is not None and drag.particle == 1
    dispatch(p, PointerMoveEvent(x=1.0, y=0.5))
    assert (p.scene.world.drag.target.x, p.scene.world.drag.target.y) == (1.0, 0.5)
    dispatch(p, PointerUpEvent())
    assert p.scene.world.drag is None


def test_tick_requires_positive_dt():
    with pytest.raises(ValueError):
        TickEvent(dt=0.0)
    with pytest.raises(ValueError):
        TickEvent(dt=-1.0)


def test_tick_advances_by_substeps():
    p = make_presentation()
    navigate(p, "goto", index=1)
    assert p.scene.world.tick == 0
    dispatch(p, TickEvent(dt=1 / 60))
    assert p.scene.world.tick == p.scene.substeps_per_tick == 4


def test_numeric_fault_pauses_scene_and_is_recorded():
    b = PresentationBuilder()
    b.add_slide(Slide(id="hot", scene=SimScene(
        world=make_world(k=1e308, pb=(0.7, 0.0)))))
    p = b.finish()
    p.scene.world.params.h = 1e6  # force overflow on the first step
    dispatch(p, TickEvent(dt=1 / 60))
    assert p.scene.fault is not None
    assert not p.scene.running
    tick, particle = p.scene.fault
    assert tick == 0 and particle in (0, 1)
    frozen = positions(p.scene.world)
    dispatch(p, TickEvent(dt=1 / 60))  # faulted scene stays put
    assert positions(p.scene.world) == frozen


# steerable parameters

def test_apply_param_requires_scene():
    p = make_presentation()
    with pytest.raises(ParamError):
        apply_param(p, "gravity.y", -1.0)


def test_apply_param_unknown_path():
    p = make_presentation()
    navigate(p, "goto", index=1)
    with pytest.raises(ParamError, match="unknown"):
        apply_param(p, "gravity.z", 0.0)


@pytest.mark.parametrize("path,value", [
    ("gravity.y", -101.0),
    ("restitution", 1.5),
    ("drag.stiffness", -1.0),
    ("springs.stiffness_scale", 0.0),
    ("substeps", 0),
    ("substeps", 65),
])
def test_apply_param_range_rejections(path, value):
    p = make_presentation()
    navigate(p, "goto", index=1)
    with pytest.raises(ParamError):
        apply_param(p, path, value)


def test_apply_param_type_rejections():
    p = make_presentation()
    navigate(p, "goto", index=1)
    with pytest.raises(ParamError):
        apply_param(p, "gravity.y", "down")
    with pytest.raises(ParamError):
        apply_param(p, "restitution", True)
    with pytest.raises(ParamError):
        apply_param(p, "substeps", 2.5)


def test_apply_param_sets_values():
    p = make_presentation()
    navigate(p, "goto", index=1)
    apply_param(p, "gravity.x", 3.0)
    apply_param(p, "gravity.y", -1.0)
    apply_param(p, "restitution", 0.25)
    apply_param(p, "substeps", 8)
    w = p.scene.world
    assert (w.params.gravity.x, w.params.gravity.y) == (3.0, -1.0)
    assert w.params.restitution == 0.25
    assert p.scene.substeps_per_tick == 8


def test_spring_scales_are_absolute_not_compounding():
    p = make_presentation()
    navigate(p, "goto", index=1)
    base_k = p.slides[1].scene.world.bodies[0].springs[0].stiffness
    base_c = p.slides[1].scene.world.bodies[0].springs[0].damping
    apply_param(p, "springs.stiffness_scale", 3.0)
    apply_param(p, "springs.stiffness_scale", 2.0)
    apply_param(p, "springs.damping_scale", 0.5)
    s = p.scene.world.bodies[0].springs[0]
    assert s.stiffness == pytest.approx(2.0 * base_k)
    assert s.damping == pytest.approx(0.5 * base_c)


def test_reset_scene_clears_param_overrides():
    p = make_presentation()
    navigate(p, "goto", index=1)
    apply_param(p, "springs.stiffness_scale", 5.0)
    reset_scene(p)
    s = p.scene.world.bodies[0].springs[0]
    assert s.stiffness == p.slides[1].scene.world.bodies[0].springs[0].stiffness
    assert p.scene.stiffness_scale == 1.0


# fuzzing

NAV_KEYS = ["Space", "PageDown", "PageUp", "Home", "End", "t", "b", "r",
            "p", "1", "2", "3", "4", "q", "?"]


@given(st.lists(st.sampled_from(NAV_KEYS), max_size=80))
def test_key_fuzz_keeps_current_in_range(codes):
    p = make_presentation()
    for code in codes:
        dispatch(p, KeyEvent(code=code))
        assert 0 <= p.current < len(p.slides)


@given(st.lists(st.one_of(
    st.sampled_from(NAV_KEYS).map(lambda c: KeyEvent(code=c)),
    st.builds(PointerDownEvent,
              x=st.floats(-2, 2, allow_nan=False),
              y=st.floats(-1.5, 1.5, allow_nan=False)),
    st.builds(PointerMoveEvent,
              x=st.floats(-2, 2, allow_nan=False),
              y=st.floats(-1.5, 1.5, allow_nan=False)),
    st.just(PointerUpEvent()),
    st.just(TickEvent(dt=1 / 60)),
), max_size=60))
def test_dispatch_is_total(events):
    p = make_presentation()
    for ev in events:
        dispatch(p, ev)
    assert 0 <= p.current < len(p.slides)

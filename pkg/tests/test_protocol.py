"""Canonical JSON snapshots, command codec, wire framing, sessions."""

import io
import struct

import pytest
from hypothesis import given, strategies as st

from softslides.deck import default_deck, build_presentation
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
    PresentationBuilder,
    SimScene,
    Slide,
    Tidget,
)
from softslides.protocol import (
    MAX_FRAME_BYTES,
    TAG_COMMAND,
    TAG_ERROR,
    TAG_SNAPSHOT,
    BodyView,
    DragView,
    FrameSnapshot,
    KeyCmd,
    NavigateCmd,
    PauseCmd,
    PointerDownCmd,
    PointerMoveCmd,
    PointerUpCmd,
    ProtocolError,
    ResetCmd,
    RunCmd,
    Session,
    SetIntegratorCmd,
    SetParamCmd,
    TidgetView,
    capture,
    decode_command,
    decode_snapshot,
    encode_command,
    encode_error,
    encode_frame,
    encode_snapshot,
    iter_frames,
    read_frame,
    replay_commands,
    write_frame,
)


def golden_presentation():
    """Small fixed presentation with exactly representable coordinates."""
    particles = [
        Particle(id=0, position=Vec2(-0.5, 0.0), mass=1.0),
        Particle(id=1, position=Vec2(0.5, 0.0), mass=1.0),
    ]
    springs = [Spring(a=0, b=1, rest_length=0.5, stiffness=10.0, damping=0.5,
                      role=SpringRole.STRUCTURAL)]
    body = SoftBody(particles=particles, springs=springs, dimensionality=1)
    world = World(bodies=[body], params=SimParams(),
                  box=ViewBox(min=Vec2(-2, -1.5), max=Vec2(2, 1.5)))
    b = PresentationBuilder()
    b.add_slide(Slide(id="g", title="Golden",
                      tidgets=[Tidget(lines=["alpha", "beta"],
                                      anchor=Anchor.TOP_LEFT)],
                      scene=SimScene(world=world,
                                     integrator=IntegratorKind.MIDPOINT)))
    p = b.finish()
    p.slides[0].tidgets[0].reveal_index = 1
    return p


GOLDEN_BYTES = (
    b'{"tick":0,"slide":0,"title":"Golden",'
    b'"tidgets":[{"anchor":"top-left","lines":["alpha"]}],'
    b'"bodies":[{"pos":[[-0.5,0.0],[0.5,0.0]],"springs":[[0,1]],"stretch":[2.0]}],'
    b'"drag":null,"integrator":"midpoint","running":true}'
)


# snapshot encoding

def test_golden_snapshot_bytes():
    snap = capture(golden_presentation(), tick=0)
    assert encode_snapshot(snap) == GOLDEN_BYTES


def test_golden_decode_inverts_encode():
    snap = decode_snapshot(GOLDEN_BYTES)
    assert encode_snapshot(snap) == GOLDEN_BYTES
    assert snap.slide_title == "Golden"
    assert snap.bodies[0].stretch == [2.0]
    assert snap.integrator == "midpoint"
    assert snap.running is True


def test_capture_with_active_drag():
    from softslides.physics import begin_drag

    p = golden_presentation()
    begin_drag(p.scene.world, Vec2(0.5, 0.25))
    snap = capture(p, tick=3)
    assert snap.drag == DragView(body=0, particle=1, target=[0.5, 0.25])
    encoded = encode_snapshot(snap)
    assert b'"drag":{"body":0,"particle":1,"target":[0.5,0.25]}' in encoded
    assert decode_snapshot(encoded) == snap


def test_capture_respects_tidget_gating():
    p = golden_presentation()
    p.slides[0].tidgets[0].reveal_index = 2
    snap = capture(p, tick=0)
    assert snap.tidgets[0].lines == ["alpha", "beta"]
    p.slides[0].tidgets[0].visible = False
    assert capture(p, tick=0).tidgets == []
    p.slides[0].tidgets[0].visible = True
    p.tidgets_enabled = False
    assert capture(p, tick=0).tidgets == []


def test_capture_sceneless_slide():
    b = PresentationBuilder()
    b.add_slide(Slide(id="t", title="Text only"))
    snap = capture(b.finish(), tick=7)
    assert snap.bodies == []
    assert snap.integrator is None
    assert snap.running is False
    assert snap.drag is None
    encoded = encode_snapshot(snap)
    assert b'"integrator":null' in encoded
    assert decode_snapshot(encoded) == snap


def test_zero_rest_spring_reports_unit_stretch():
    particles = [
        Particle(id=0, position=Vec2(0.0, 0.0), mass=1.0, pinned=True),
        Particle(id=1, position=Vec2(1.0, 0.0), mass=1.0),
    ]
    springs = [Spring(a=0, b=1, rest_length=0.0, stiffness=1.0, damping=0.0,
                      role=SpringRole.STRUCTURAL)]
    world = World(bodies=[SoftBody(particles=particles, springs=springs,
                                   dimensionality=1)],
                  params=SimParams(), box=ViewBox())
    b = PresentationBuilder()
    b.add_slide(Slide(id="z", scene=SimScene(world=world)))
    snap = capture(b.finish(), tick=0)
    assert snap.bodies[0].stretch == [1.0]


def test_snapshot_equal_objects_encode_identically():
    a = capture(golden_presentation(), tick=0)
    b = capture(golden_presentation(), tick=0)
    assert a == b
    assert encode_snapshot(a) == encode_snapshot(b)


def test_snapshot_injective_on_differences():
    p = golden_presentation()
    base = encode_snapshot(capture(p, tick=0))
    assert encode_snapshot(capture(p, tick=1)) != base
    p.scene.world.bodies[0].particles[1].position = Vec2(0.5, 1e-12)
    assert encode_snapshot(capture(p, tick=0)) != base


finite = st.floats(allow_nan=False, allow_infinity=False, width=64)


@given(st.builds(
    FrameSnapshot,
    tick=st.integers(min_value=0, max_value=10**9),
    slide_index=st.integers(min_value=0, max_value=100),
    slide_title=st.text(max_size=40),
    tidgets=st.lists(st.builds(
        TidgetView,
        anchor=st.sampled_from([a.value for a in Anchor]),
        lines=st.lists(st.text(max_size=20), max_size=4)), max_size=3),
    bodies=st.lists(st.builds(
        BodyView,
        positions=st.lists(st.tuples(finite, finite).map(list), max_size=6),
        springs=st.lists(st.tuples(st.integers(0, 99), st.integers(0, 99)).map(list),
                         max_size=6),
        stretch=st.lists(finite, max_size=6)), max_size=3),
    drag=st.one_of(st.none(), st.builds(
        DragView,
        body=st.integers(0, 9),
        particle=st.integers(0, 99),
        target=st.tuples(finite, finite).map(list))),
    integrator=st.one_of(st.none(),
                         st.sampled_from([k.value for k in IntegratorKind])),
    running=st.booleans(),
))
def test_snapshot_roundtrip_property(snap):
    data = encode_snapshot(snap)
    back = decode_snapshot(data)
    assert back == snap
    assert encode_snapshot(back) == data


@pytest.mark.parametrize("data,needle", [
    (b"", "malformed JSON"),
    (b"[1,2]", "expected a JSON object"),
    (b'{"tick":0', "malformed JSON"),
    (b'{"slide":0}', "missing field 'tick'"),
    (b'{"tick":"0"}', "wrong type"),
    (b'{"tick":true}', "wrong type"),
    (GOLDEN_BYTES.replace(b'"drag":null,', b""), "missing field 'drag'"),
    (GOLDEN_BYTES.replace(b'"running":true', b'"running":1'), "wrong type"),
    (GOLDEN_BYTES.replace(b'"midpoint"', b'"rk5"'), "unknown integrator"),
    (GOLDEN_BYTES.replace(b"[0,1]", b"[0,1,2]"), "index pairs"),
    (GOLDEN_BYTES.replace(b"[0,1]", b"[0,true]"), "index pairs"),
    (GOLDEN_BYTES.replace(b"[2.0]", b"[NaN]"), "non-finite"),
    (GOLDEN_BYTES.replace(b"[[-0.5,0.0],[0.5,0.0]]",
                          b"[[-0.5,0.0],[Infinity,0.0]]"), "non-finite"),
    (GOLDEN_BYTES.replace(b"[-0.5,0.0]", b"[-0.5]"), "expected [x, y]"),
    (GOLDEN_BYTES.replace(b'["alpha"]', b"[42]"), "lines must be strings"),
    ("{\"tick\":0}".encode("utf-16"), "not UTF-8"),
])
def test_snapshot_decode_rejections(data, needle):
    with pytest.raises(ProtocolError) as err:
        decode_snapshot(data)
    assert needle in str(err.value)


def test_decode_error_carries_offset():
    with pytest.raises(ProtocolError) as err:
        decode_snapshot(b'{"tick":0,!}')
    assert err.value.offset == 10


# commands

ALL_COMMANDS = [
    NavigateCmd(action="next"),
    NavigateCmd(action="prev"),
    NavigateCmd(action="home"),
    NavigateCmd(action="end"),
    NavigateCmd(action="goto", index=4),
    KeyCmd(code="Space"),
    PointerDownCmd(x=0.5, y=-0.25),
    PointerMoveCmd(x=-1.5, y=1.0),
    PointerUpCmd(),
    SetIntegratorCmd(name="feynman"),
    SetParamCmd(path="gravity.y", value=-3.5),
    SetParamCmd(path="substeps", value=8),
    ResetCmd(),
    PauseCmd(),
    RunCmd(),
]


@pytest.mark.parametrize("cmd", ALL_COMMANDS, ids=lambda c: type(c).__name__ + str(getattr(c, "action", "")))
def test_command_roundtrip(cmd):
    data = encode_command(cmd)
    back = decode_command(data)
    assert back == cmd
    assert encode_command(back) == data


def test_set_param_preserves_int_vs_float():
    assert decode_command(b'{"cmd":"set_param","path":"substeps","value":8}').value == 8
    assert isinstance(decode_command(
        b'{"cmd":"set_param","path":"substeps","value":8}').value, int)
    assert isinstance(decode_command(
        b'{"cmd":"set_param","path":"restitution","value":0.5}').value, float)


@pytest.mark.parametrize("data,needle", [
    (b"{}", "missing field 'cmd'"),
    (b'{"cmd":"warp"}', "unknown command"),
    (b'{"cmd":"navigate","action":"spiral"}', "unknown action"),
    (b'{"cmd":"navigate","action":"goto"}', "missing field 'index'"),
    (b'{"cmd":"navigate","action":"goto","index":1.5}', "wrong type"),
    (b'{"cmd":"key"}', "missing field 'code'"),
    (b'{"cmd":"pointer_down","x":0.0}', "missing field 'y'"),
    (b'{"cmd":"pointer_down","x":NaN,"y":0.0}', "non-finite"),
    (b'{"cmd":"set_integrator","name":"verlet"}', "unknown integrator"),
    (b'{"cmd":"set_param","path":"gravity.y"}', "missing field 'value'"),
    (b'{"cmd":"set_param","path":"gravity.y","value":"down"}', "wrong type"),
    (b'{"cmd":"set_param","path":"gravity.y","value":Infinity}', "non-finite"),
])
def test_command_decode_rejections(data, needle):
    with pytest.raises(ProtocolError) as err:
        decode_command(data)
    assert needle in str(err.value)


def test_navigate_stray_index_on_non_goto_is_dropped():
    cmd = decode_command(b'{"cmd":"navigate","action":"next","index":3}')
    assert cmd == NavigateCmd(action="next", index=None)


# wire framing

def test_frame_roundtrip_all_tags():
    stream = io.BytesIO()
    write_frame(stream, TAG_SNAPSHOT, GOLDEN_BYTES)
    write_frame(stream, TAG_COMMAND, encode_command(ResetCmd()))
    write_frame(stream, TAG_ERROR, encode_error("nope"))
    stream.seek(0)
    frames = list(iter_frames(stream))
    assert frames == [
        (TAG_SNAPSHOT, GOLDEN_BYTES),
        (TAG_COMMAND, encode_command(ResetCmd())),
        (TAG_ERROR, encode_error("nope")),
    ]
    assert read_frame(stream) is None  # idempotent at EOF


def test_frame_layout_is_length_tag_payload():
    data = encode_frame(TAG_SNAPSHOT, b"abc")
    assert data == struct.pack(">I", 4) + b"S" + b"abc"


def test_frame_empty_payload():
    stream = io.BytesIO(encode_frame(TAG_COMMAND, b""))
    assert read_frame(stream) == (TAG_COMMAND, b"")


@pytest.mark.parametrize("data,needle", [
    (b"\x00\x00", "truncated frame header"),
    (struct.pack(">I", 10) + b"S12345", "truncated frame body"),
    (struct.pack(">I", 0) + b"S", "empty frame"),
    (struct.pack(">I", MAX_FRAME_BYTES + 1), "exceeds"),
    (struct.pack(">I", 2) + b"Xy", "unknown frame tag"),
])
def test_read_frame_rejections(data, needle):
    with pytest.raises(ProtocolError) as err:
        read_frame(io.BytesIO(data))
    assert needle in str(err.value)


def test_encode_frame_rejects_bad_tag_and_oversize():
    with pytest.raises(ProtocolError):
        encode_frame(b"Z", b"x")
    with pytest.raises(ProtocolError, match="too large"):
        encode_frame(TAG_SNAPSHOT, bytes(MAX_FRAME_BYTES))


# sessions

def deck_session():
    return Session(build_presentation(default_deck()))


def test_session_ticks_are_monotone():
    s = deck_session()
    snaps = [s.snapshot()] + [s.tick() for _ in range(5)]
    assert [x.tick for x in snaps] == list(range(6))


def test_session_command_visible_in_next_snapshot():
    s = deck_session()
    assert s.apply(NavigateCmd(action="goto", index=7)) is None
    assert s.apply(SetIntegratorCmd(name="rk4")) is None
    snap = s.tick()
    assert snap.slide_index == 7
    assert snap.integrator == "rk4"


def test_session_pause_and_run():
    s = deck_session()
    s.apply(NavigateCmd(action="goto", index=4))
    assert s.apply(PauseCmd()) is None
    before = encode_snapshot(s.tick())
    after = encode_snapshot(s.tick())
    # paused: geometry frozen, only the tick counter moves
    assert before.split(b',', 1)[1] == after.split(b',', 1)[1]
    assert s.apply(RunCmd()) is None
    resumed = encode_snapshot(s.tick())
    assert resumed.split(b',', 1)[1] != after.split(b',', 1)[1]


def test_session_rejects_pause_without_scene():
    s = deck_session()  # slide 0 is text
    err = s.apply(PauseCmd())
    assert err is not None and "scene" in err
    assert s.command_log == []


def test_failed_commands_leave_no_trace():
    a = deck_session()
    b = deck_session()
    assert b.apply(NavigateCmd(action="goto", index=99)) is not None
    assert b.apply(SetParamCmd(path="gravity.y", value=-5.0)) is not None  # no scene
    assert b.command_log == []
    stream_a = [encode_snapshot(a.tick()) for _ in range(4)]
    stream_b = [encode_snapshot(b.tick()) for _ in range(4)]
    assert stream_a == stream_b


def test_session_fault_surfaces():
    s = deck_session()
    assert s.fault() is None
    s.apply(NavigateCmd(action="goto", index=4))
    assert s.fault() is None


def test_replay_reproduces_live_stream():
    script = {
        0: [NavigateCmd(action="goto", index=4)],
        2: [PointerDownCmd(x=0.2, y=-0.8)],
        3: [PointerMoveCmd(x=0.8, y=0.4)],
        5: [PointerUpCmd(), SetIntegratorCmd(name="rk4")],
        7: [SetParamCmd(path="gravity.y", value=-2.0), KeyCmd(code="b")],
        9: [ResetCmd()],
    }
    ticks = 12
    live = Session(build_presentation(default_deck()))
    stream = [live.snapshot()]
    for k in range(ticks):
        for cmd in script.get(k, []):
            assert live.apply(cmd) is None
        stream.append(live.tick())

    replayed = replay_commands(build_presentation(default_deck()),
                               live.command_log, ticks)
    assert [encode_snapshot(s) for s in replayed] == \
        [encode_snapshot(s) for s in stream]


def test_snapshot_size_linear_in_body_units():
    from softslides import bodies as bodies_mod

    sizes = {}
    units = {}
    for n in (8, 16, 32, 64):
        cfg = bodies_mod.LodConfig(dimensionality=2, layers=2, n=n, radius=1.0,
                                   layer_gap=0.3, particle_mass=0.1,
                                   k_structural=50.0, k_radial=40.0,
                                   k_shear=20.0, c_uniform=1.0,
                                   center=Vec2(0.0, 0.0))
        body = bodies_mod.build(cfg)
        world = World(bodies=[body], params=SimParams(),
                      box=ViewBox(min=Vec2(-2, -2), max=Vec2(2, 2)))
        b = PresentationBuilder()
        b.add_slide(Slide(id="s", scene=SimScene(world=world)))
        p = b.finish()
        from softslides.presentation import TickEvent, dispatch
        for _ in range(3):
            dispatch(p, TickEvent(dt=1 / 60))  # roughen the float text
        sizes[n] = len(encode_snapshot(capture(p, tick=3)))
        units[n] = len(body.particles) + 2 * len(body.springs)
    for n in (16, 32, 64):
        growth = sizes[n] / sizes[8]
        linear = units[n] / units[8]
        assert growth <= 1.6 * linear
        assert growth >= 0.4 * linear

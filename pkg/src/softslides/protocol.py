"""Frame snapshots, commands, canonical JSON, and wire framing.

The renderer-facing surface of the simulation is a stream of frame
snapshots going out and a stream of commands coming in.  Snapshots use a
canonical JSON encoding: fixed key order, shortest round-trip float text,
no NaN or infinity.  Equal snapshots always encode to identical bytes,
which is what makes recorded traces byte-comparable across runs.

Wire framing is length-prefixed: a big-endian u32 frame length followed
by a one-byte tag ('S' snapshot, 'C' command, 'E' error) and the JSON
payload.
"""

from __future__ import annotations

import json
import math
import struct
from dataclasses import dataclass, field
from typing import BinaryIO, Optional, Union

from .integrators import IntegratorKind
from .presentation import (
    KeyEvent,
    NavigationError,
    ParamError,
    PointerDownEvent,
    PointerMoveEvent,
    PointerUpEvent,
    Presentation,
    TickEvent,
    apply_param,
    dispatch,
    navigate,
    reset_scene,
    set_integrator,
)

TAG_SNAPSHOT = b"S"
TAG_COMMAND = b"C"
TAG_ERROR = b"E"
MAX_FRAME_BYTES = 16 * 1024 * 1024

MIN_STRETCH_REST = 1e-12  # rest lengths at or below this report a stretch of 1


class ProtocolError(Exception):
    def __init__(self, message: str, offset: int = 0) -> None:
        super().__init__(message)
        self.offset = offset


# ---------------------------------------------------------------------------
# Snapshot model

@dataclass
class TidgetView:
    anchor: str
    lines: list[str]


@dataclass
class BodyView:
    positions: list[list[float]]
    springs: list[list[int]]
    stretch: list[float]


@dataclass
class DragView:
    body: int
    particle: int
    target: list[float]


@dataclass
class FrameSnapshot:
    tick: int
    slide_index: int
    slide_title: str
    tidgets: list[TidgetView] = field(default_factory=list)
    bodies: list[BodyView] = field(default_factory=list)
    drag: Optional[DragView] = None
    integrator: Optional[str] = None
    running: bool = False


def capture(p: Presentation, tick: int) -> FrameSnapshot:
    """Project the current presentation state into a frame snapshot."""
    slide = p.slides[p.current]
    tidgets: list[TidgetView] = []
    if p.tidgets_enabled:
        for t in slide.tidgets:
            if t.visible:
                tidgets.append(TidgetView(anchor=t.anchor.value, lines=list(t.lines[: t.reveal_index])))
    bodies: list[BodyView] = []
    drag: Optional[DragView] = None
    integrator: Optional[str] = None
    running = False
    if p.scene is not None:
        for body in p.scene.world.bodies:
            positions = [[pt.position.x, pt.position.y] for pt in body.particles]
            springs = [[s.a, s.b] for s in body.springs]
            stretch = []
            for s in body.springs:
                pa = body.particles[s.a].position
                pb = body.particles[s.b].position
                length = math.hypot(pb.x - pa.x, pb.y - pa.y)
                stretch.append(1.0 if s.rest_length <= MIN_STRETCH_REST else length / s.rest_length)
            bodies.append(BodyView(positions=positions, springs=springs, stretch=stretch))
        handle = p.scene.world.drag
        if handle is not None and handle.active:
            drag = DragView(
                body=handle.body,
                particle=handle.particle,
                target=[handle.target.x, handle.target.y],
            )
        integrator = p.scene.integrator.value
        running = p.scene.running
    return FrameSnapshot(
        tick=tick,
        slide_index=p.current,
        slide_title=slide.title,
        tidgets=tidgets,
        bodies=bodies,
        drag=drag,
        integrator=integrator,
        running=running,
    )


# ---------------------------------------------------------------------------
# Canonical JSON

def _dumps(obj) -> bytes:
    return json.dumps(obj, separators=(",", ":"), ensure_ascii=False, allow_nan=False).encode("utf-8")


def _reject_constant(token: str):
    raise ProtocolError(f"non-finite number {token!r} is not allowed")


def _loads(data: bytes):
    try:
        return json.loads(data.decode("utf-8"), parse_constant=_reject_constant)
    except UnicodeDecodeError as err:
        raise ProtocolError(f"payload is not UTF-8: {err.reason}", offset=err.start) from None
    except json.JSONDecodeError as err:
        raise ProtocolError(f"malformed JSON: {err.msg}", offset=err.pos) from None


def _need(obj: dict, key: str, kinds, what: str):
    if not isinstance(obj, dict) or key not in obj:
        raise ProtocolError(f"{what}: missing field {key!r}")
    value = obj[key]
    if isinstance(value, bool) and bool not in (kinds if isinstance(kinds, tuple) else (kinds,)):
        raise ProtocolError(f"{what}: field {key!r} has wrong type")
    if not isinstance(value, kinds):
        raise ProtocolError(f"{what}: field {key!r} has wrong type")
    return value


def _float_field(obj: dict, key: str, what: str) -> float:
    value = _need(obj, key, (int, float), what)
    value = float(value)
    if not math.isfinite(value):
        raise ProtocolError(f"{what}: field {key!r} must be finite")
    return value


def _float_pair(value, what: str) -> list[float]:
    if not isinstance(value, list) or len(value) != 2:
        raise ProtocolError(f"{what}: expected [x, y]")
    out = []
    for v in value:
        if isinstance(v, bool) or not isinstance(v, (int, float)):
            raise ProtocolError(f"{what}: coordinates must be numbers")
        f = float(v)
        if not math.isfinite(f):
            raise ProtocolError(f"{what}: coordinates must be finite")
        out.append(f)
    return out


def encode_snapshot(snap: FrameSnapshot) -> bytes:
    drag = None
    if snap.drag is not None:
        drag = {
            "body": snap.drag.body,
            "particle": snap.drag.particle,
            "target": [float(snap.drag.target[0]), float(snap.drag.target[1])],
        }
    obj = {
        "tick": snap.tick,
        "slide": snap.slide_index,
        "title": snap.slide_title,
        "tidgets": [{"anchor": t.anchor, "lines": t.lines} for t in snap.tidgets],
        "bodies": [
            {
                "pos": [[float(x), float(y)] for x, y in b.positions],
                "springs": [[a, bb] for a, bb in b.springs],
                "stretch": [float(s) for s in b.stretch],
            }
            for b in snap.bodies
        ],
        "drag": drag,
        "integrator": snap.integrator,
        "running": snap.running,
    }
    return _dumps(obj)


def decode_snapshot(data: bytes) -> FrameSnapshot:
    obj = _loads(data)
    if not isinstance(obj, dict):
        raise ProtocolError("snapshot: expected a JSON object")
    tick = _need(obj, "tick", int, "snapshot")
    slide = _need(obj, "slide", int, "snapshot")
    title = _need(obj, "title", str, "snapshot")
    tidgets = []
    for raw in _need(obj, "tidgets", list, "snapshot"):
        anchor = _need(raw, "anchor", str, "tidget")
        lines = _need(raw, "lines", list, "tidget")
        if not all(isinstance(s, str) for s in lines):
            raise ProtocolError("tidget: lines must be strings")
        tidgets.append(TidgetView(anchor=anchor, lines=list(lines)))
    bodies = []
    for raw in _need(obj, "bodies", list, "snapshot"):
        pos = [_float_pair(v, "body pos") for v in _need(raw, "pos", list, "body")]
        springs = []
        for pair in _need(raw, "springs", list, "body"):
            if (
                not isinstance(pair, list)
                or len(pair) != 2
                or not all(isinstance(i, int) and not isinstance(i, bool) for i in pair)
            ):
                raise ProtocolError("body: springs must be [a, b] index pairs")
            springs.append([pair[0], pair[1]])
        stretch = []
        for v in _need(raw, "stretch", list, "body"):
            if isinstance(v, bool) or not isinstance(v, (int, float)) or not math.isfinite(float(v)):
                raise ProtocolError("body: stretch must be finite numbers")
            stretch.append(float(v))
        bodies.append(BodyView(positions=pos, springs=springs, stretch=stretch))
    if "drag" not in obj:
        raise ProtocolError("snapshot: missing field 'drag'")
    drag = None
    if obj["drag"] is not None:
        raw = obj["drag"]
        drag = DragView(
            body=_need(raw, "body", int, "drag"),
            particle=_need(raw, "particle", int, "drag"),
            target=_float_pair(raw.get("target"), "drag target"),
        )
    if "integrator" not in obj:
        raise ProtocolError("snapshot: missing field 'integrator'")
    integrator = obj["integrator"]
    if integrator is not None:
        if not isinstance(integrator, str) or integrator not in {k.value for k in IntegratorKind}:
            raise ProtocolError(f"snapshot: unknown integrator {integrator!r}")
    running = _need(obj, "running", bool, "snapshot")
    return FrameSnapshot(
        tick=tick,
        slide_index=slide,
        slide_title=title,
        tidgets=tidgets,
        bodies=bodies,
        drag=drag,
        integrator=integrator,
        running=running,
    )


# ---------------------------------------------------------------------------
# Commands

@dataclass(frozen=True)
class NavigateCmd:
    action: str
    index: Optional[int] = None


@dataclass(frozen=True)
class KeyCmd:
    code: str


@dataclass(frozen=True)
class PointerDownCmd:
    x: float
    y: float


@dataclass(frozen=True)
class PointerMoveCmd:
    x: float
    y: float


@dataclass(frozen=True)
class PointerUpCmd:
    pass


@dataclass(frozen=True)
class SetIntegratorCmd:
    name: str


@dataclass(frozen=True)
class SetParamCmd:
    path: str
    value: Union[int, float]


@dataclass(frozen=True)
class ResetCmd:
    pass


@dataclass(frozen=True)
class PauseCmd:
    pass


@dataclass(frozen=True)
class RunCmd:
    pass


Command = Union[
    NavigateCmd,
    KeyCmd,
    PointerDownCmd,
    PointerMoveCmd,
    PointerUpCmd,
    SetIntegratorCmd,
    SetParamCmd,
    ResetCmd,
    PauseCmd,
    RunCmd,
]

_NAV_ACTIONS = ("next", "prev", "goto", "home", "end")


def encode_command(cmd: Command) -> bytes:
    if isinstance(cmd, NavigateCmd):
        obj = {"cmd": "navigate", "action": cmd.action}
        if cmd.index is not None:
            obj["index"] = cmd.index
    elif isinstance(cmd, KeyCmd):
        obj = {"cmd": "key", "code": cmd.code}
    elif isinstance(cmd, PointerDownCmd):
        obj = {"cmd": "pointer_down", "x": float(cmd.x), "y": float(cmd.y)}
    elif isinstance(cmd, PointerMoveCmd):
        obj = {"cmd": "pointer_move", "x": float(cmd.x), "y": float(cmd.y)}
    elif isinstance(cmd, PointerUpCmd):
        obj = {"cmd": "pointer_up"}
    elif isinstance(cmd, SetIntegratorCmd):
        obj = {"cmd": "set_integrator", "name": cmd.name}
    elif isinstance(cmd, SetParamCmd):
        obj = {"cmd": "set_param", "path": cmd.path, "value": cmd.value}
    elif isinstance(cmd, ResetCmd):
        obj = {"cmd": "reset"}
    elif isinstance(cmd, PauseCmd):
        obj = {"cmd": "pause"}
    elif isinstance(cmd, RunCmd):
        obj = {"cmd": "run"}
    else:
        raise ProtocolError(f"not a command: {cmd!r}")
    return _dumps(obj)


def decode_command(data: bytes) -> Command:
    obj = _loads(data)
    if not isinstance(obj, dict):
        raise ProtocolError("command: expected a JSON object")
    name = _need(obj, "cmd", str, "command")
    if name == "navigate":
        action = _need(obj, "action", str, "navigate")
        if action not in _NAV_ACTIONS:
            raise ProtocolError(f"navigate: unknown action {action!r}")
        index = None
        if action == "goto":
            index = _need(obj, "index", int, "navigate")
        return NavigateCmd(action=action, index=index)
    if name == "key":
        return KeyCmd(code=_need(obj, "code", str, "key"))
    if name == "pointer_down":
        return PointerDownCmd(x=_float_field(obj, "x", "pointer"), y=_float_field(obj, "y", "pointer"))
    if name == "pointer_move":
        return PointerMoveCmd(x=_float_field(obj, "x", "pointer"), y=_float_field(obj, "y", "pointer"))
    if name == "pointer_up":
        return PointerUpCmd()
    if name == "set_integrator":
        value = _need(obj, "name", str, "set_integrator")
        if value not in {k.value for k in IntegratorKind}:
            raise ProtocolError(f"set_integrator: unknown integrator {value!r}")
        return SetIntegratorCmd(name=value)
    if name == "set_param":
        path = _need(obj, "path", str, "set_param")
        value = _need(obj, "value", (int, float), "set_param")
        if isinstance(value, float) and not math.isfinite(value):
            raise ProtocolError("set_param: value must be finite")
        return SetParamCmd(path=path, value=value)
    if name == "reset":
        return ResetCmd()
    if name == "pause":
        return PauseCmd()
    if name == "run":
        return RunCmd()
    raise ProtocolError(f"command: unknown command {name!r}")


# ---------------------------------------------------------------------------
# Wire framing

def encode_frame(tag: bytes, payload: bytes) -> bytes:
    if tag not in (TAG_SNAPSHOT, TAG_COMMAND, TAG_ERROR):
        raise ProtocolError(f"unknown frame tag {tag!r}")
    if 1 + len(payload) > MAX_FRAME_BYTES:
        raise ProtocolError("frame too large")
    return struct.pack(">I", 1 + len(payload)) + tag + payload


def read_frame(stream: BinaryIO) -> Optional[tuple[bytes, bytes]]:
    """Read one framed message.  Returns None on a clean end of stream,
    raises on a truncated or oversized frame."""
    head = stream.read(4)
    if len(head) == 0:
        return None
    if len(head) < 4:
        raise ProtocolError("truncated frame header")
    (length,) = struct.unpack(">I", head)
    if length == 0:
        raise ProtocolError("empty frame")
    if length > MAX_FRAME_BYTES:
        raise ProtocolError(f"frame of {length} bytes exceeds the {MAX_FRAME_BYTES} byte limit")
    body = stream.read(length)
    if len(body) < length:
        raise ProtocolError("truncated frame body")
    tag = body[:1]
    if tag not in (TAG_SNAPSHOT, TAG_COMMAND, TAG_ERROR):
        raise ProtocolError(f"unknown frame tag {tag!r}", offset=4)
    return tag, body[1:]


def write_frame(stream: BinaryIO, tag: bytes, payload: bytes) -> None:
    stream.write(encode_frame(tag, payload))


def encode_error(message: str) -> bytes:
    return _dumps({"error": message})


# ---------------------------------------------------------------------------
# Session: one presentation driven by commands, one snapshot per tick

class Session:
    """Single-writer loop around a presentation.  Commands are applied in
    arrival order between ticks; each tick advances the scene by its fixed
    substeps and yields exactly one snapshot.  Applied commands are logged
    with the tick they preceded, which is enough to replay a session
    exactly."""

    def __init__(self, presentation: Presentation) -> None:
        self.presentation = presentation
        self.tick_count = 0
        self.command_log: list[tuple[int, Command]] = []

    def snapshot(self) -> FrameSnapshot:
        return capture(self.presentation, self.tick_count)

    def apply(self, cmd: Command) -> Optional[str]:
        """Apply one command.  Returns None on success or an error string;
        a failed command leaves the session unchanged and unlogged."""
        p = self.presentation
        try:
            if isinstance(cmd, NavigateCmd):
                navigate(p, cmd.action, cmd.index)
            elif isinstance(cmd, KeyCmd):
                dispatch(p, KeyEvent(cmd.code))
            elif isinstance(cmd, PointerDownCmd):
                dispatch(p, PointerDownEvent(cmd.x, cmd.y))
            elif isinstance(cmd, PointerMoveCmd):
                dispatch(p, PointerMoveEvent(cmd.x, cmd.y))
            elif isinstance(cmd, PointerUpCmd):
                dispatch(p, PointerUpEvent())
            elif isinstance(cmd, SetIntegratorCmd):
                set_integrator(p, IntegratorKind(cmd.name))
            elif isinstance(cmd, SetParamCmd):
                apply_param(p, cmd.path, cmd.value)
            elif isinstance(cmd, ResetCmd):
                reset_scene(p)
            elif isinstance(cmd, (PauseCmd, RunCmd)):
                if p.scene is None:
                    return "current slide has no scene"
                p.scene.running = isinstance(cmd, RunCmd)
            else:
                return f"unsupported command: {cmd!r}"
        except (NavigationError, ParamError, ValueError) as err:
            return str(err)
        self.command_log.append((self.tick_count, cmd))
        return None

    def tick(self) -> FrameSnapshot:
        dispatch(self.presentation, TickEvent(1.0 / 60.0))
        self.tick_count += 1
        return self.snapshot()

    def fault(self) -> Optional[tuple[int, int]]:
        scene = self.presentation.scene
        return None if scene is None else scene.fault


def replay_commands(
    presentation: Presentation,
    log: list[tuple[int, Command]],
    ticks: int,
) -> list[FrameSnapshot]:
    """Re-drive a fresh presentation from a command log.  Entry (k, cmd)
    is applied after snapshot k and before tick k+1, matching how the
    live session recorded it.  Returns ticks+1 snapshots."""
    session = Session(presentation)
    snaps = [session.snapshot()]
    queue = sorted(range(len(log)), key=lambda i: (log[i][0], i))
    cursor = 0
    for k in range(ticks):
        while cursor < len(queue) and log[queue[cursor]][0] <= k:
            session.apply(log[queue[cursor]][1])
            cursor += 1
        snaps.append(session.tick())
    return snaps


def iter_frames(stream: BinaryIO):
    """Yield (tag, payload) pairs until a clean end of stream."""
    while True:
        frame = read_frame(stream)
        if frame is None:
            return
        yield frame

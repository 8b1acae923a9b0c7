"""Slides, tidgets, navigation, and event delegation.

A presentation is an ordered list of slides built through a small builder.
Each slide may carry a simulation scene template; the presentation keeps a
live copy of the current slide's scene, re-created from the template every
time the slide is entered, so lecture flow is reproducible.  Input events
are delegated to the current slide: a per-slide key override may consume a
key before the default bindings run.
"""

from __future__ import annotations

import copy
import enum
from dataclasses import dataclass, field
from typing import Callable, Optional, Union

from . import physics
from .integrators import IntegratorKind
from .physics import SimulationFault, Vec2, World


class Anchor(enum.Enum):
    TOP_LEFT = "top-left"
    TOP_RIGHT = "top-right"
    BOTTOM_LEFT = "bottom-left"
    BOTTOM_RIGHT = "bottom-right"


@dataclass
class Tidget:
    lines: list[str]
    anchor: Anchor = Anchor.TOP_LEFT
    visible: bool = True
    reveal_index: int = 0


@dataclass
class SimScene:
    world: World
    integrator: IntegratorKind = IntegratorKind.EXPLICIT_EULER
    running: bool = True
    substeps_per_tick: int = 4
    stiffness_scale: float = 1.0
    damping_scale: float = 1.0
    fault: Optional[tuple[int, int]] = None  # (tick, particle) after a numeric fault


@dataclass
class Slide:
    id: str
    title: str = ""
    tidgets: list[Tidget] = field(default_factory=list)
    scene: Optional[SimScene] = None  # template; never stepped directly
    on_key: Optional[Callable[["Presentation", str], bool]] = None


@dataclass
class Presentation:
    slides: list[Slide]
    current: int = 0
    tidgets_enabled: bool = True
    scene: Optional[SimScene] = None  # live copy for the current slide


class BuildError(Exception):
    pass


class NavigationError(Exception):
    pass


class ParamError(Exception):
    pass


class PresentationBuilder:
    """Sequences slides in insertion order; ids must be unique."""

    def __init__(self) -> None:
        self._slides: list[Slide] = []
        self._ids: set[str] = set()

    def add_slide(self, slide: Slide) -> "PresentationBuilder":
        if slide.id in self._ids:
            raise BuildError(f"duplicate slide id: {slide.id!r}")
        self._ids.add(slide.id)
        self._slides.append(slide)
        return self

    def finish(self) -> Presentation:
        if not self._slides:
            raise BuildError("a presentation needs at least one slide")
        p = Presentation(slides=self._slides)
        _enter_slide(p, 0)
        return p


def _enter_slide(p: Presentation, index: int) -> None:
    p.current = index
    slide = p.slides[index]
    for t in slide.tidgets:
        t.reveal_index = 0
    p.scene = copy.deepcopy(slide.scene)


def reset_scene(p: Presentation) -> None:
    """Restore the current slide's scene to its declared initial state."""
    p.scene = copy.deepcopy(p.slides[p.current].scene)


def navigate(p: Presentation, action: str, index: Optional[int] = None) -> Presentation:
    """Move between slides.  Next/prev clamp at the ends (no wrap); goto
    takes an explicit index.  Entering a slide resets its tidget reveal
    and re-initializes its scene; a clamped next/prev does not re-enter."""
    n = len(p.slides)
    if action == "next":
        target = min(p.current + 1, n - 1)
    elif action == "prev":
        target = max(p.current - 1, 0)
    elif action == "home":
        target = 0
    elif action == "end":
        target = n - 1
    elif action == "goto":
        if index is None or not 0 <= index < n:
            raise NavigationError(f"goto index out of range: {index!r}")
        target = index
    else:
        raise NavigationError(f"unknown navigation action: {action!r}")
    if action == "goto" or target != p.current:
        _enter_slide(p, target)
    return p


# ---------------------------------------------------------------------------
# Input events

@dataclass(frozen=True)
class KeyEvent:
    code: str


@dataclass(frozen=True)
class PointerDownEvent:
    x: float
    y: float


@dataclass(frozen=True)
class PointerMoveEvent:
    x: float
    y: float


@dataclass(frozen=True)
class PointerUpEvent:
    pass


@dataclass(frozen=True)
class TickEvent:
    dt: float

    def __post_init__(self) -> None:
        if not self.dt > 0:
            raise ValueError("tick dt must be positive")


InputEvent = Union[KeyEvent, PointerDownEvent, PointerMoveEvent, PointerUpEvent, TickEvent]

INTEGRATOR_KEYS = {
    "1": IntegratorKind.EXPLICIT_EULER,
    "2": IntegratorKind.MIDPOINT,
    "3": IntegratorKind.FEYNMAN,
    "4": IntegratorKind.RK4,
}


def _reveal_next(slide: Slide) -> None:
    for t in slide.tidgets:
        if t.reveal_index < len(t.lines):
            t.reveal_index += 1
            return


def set_integrator(p: Presentation, kind: IntegratorKind) -> None:
    if p.scene is None:
        raise ParamError("current slide has no scene")
    p.scene.integrator = kind
    p.scene.world.invalidate_halfstep()


def _handle_key(p: Presentation, code: str) -> None:
    slide = p.slides[p.current]
    if slide.on_key is not None and slide.on_key(p, code):
        return
    if code in ("Space", "PageDown"):
        navigate(p, "next")
    elif code == "PageUp":
        navigate(p, "prev")
    elif code == "Home":
        navigate(p, "home")
    elif code == "End":
        navigate(p, "end")
    elif code == "t":
        p.tidgets_enabled = not p.tidgets_enabled
    elif code == "b":
        _reveal_next(slide)
    elif code == "r":
        reset_scene(p)
    elif code == "p":
        if p.scene is not None:
            p.scene.running = not p.scene.running
    elif code in INTEGRATOR_KEYS:
        if p.scene is not None:
            set_integrator(p, INTEGRATOR_KEYS[code])
    # any other key: no-op


def step_scene(scene: SimScene) -> None:
    """Advance a running scene by its fixed substep count.  A numeric
    fault pauses the scene and is recorded rather than raised, so the
    event loop can never be faulted from a slide."""
    if not scene.running or scene.fault is not None:
        return
    try:
        for _ in range(scene.substeps_per_tick):
            physics.step(scene.world, scene.integrator)
    except SimulationFault as err:
        scene.fault = (err.tick, err.particle)
        scene.running = False


def dispatch(p: Presentation, ev: InputEvent) -> Presentation:
    """Route one event to the current slide.  Total: pointer and tick
    events on a slide without a scene are no-ops, unknown keys are
    ignored, and simulation faults pause the scene instead of raising."""
    if isinstance(ev, KeyEvent):
        _handle_key(p, ev.code)
    elif isinstance(ev, PointerDownEvent):
        if p.scene is not None:
            physics.begin_drag(p.scene.world, Vec2(ev.x, ev.y))
    elif isinstance(ev, PointerMoveEvent):
        if p.scene is not None:
            physics.update_drag(p.scene.world, Vec2(ev.x, ev.y))
    elif isinstance(ev, PointerUpEvent):
        if p.scene is not None:
            physics.end_drag(p.scene.world)
    elif isinstance(ev, TickEvent):
        # dt is informational; stepping always uses the fixed timestep.
        if p.scene is not None:
            step_scene(p.scene)
    return p


# ---------------------------------------------------------------------------
# Steerable parameters (the panel's surface)

PARAM_RANGES: dict[str, tuple[float, float]] = {
    "gravity.x": (-100.0, 100.0),
    "gravity.y": (-100.0, 100.0),
    "restitution": (0.0, 1.0),
    "drag.stiffness": (0.0, 10000.0),
    "drag.damping": (0.0, 1000.0),
    "springs.stiffness_scale": (0.01, 100.0),
    "springs.damping_scale": (0.01, 100.0),
    "substeps": (1, 64),
}


def apply_param(p: Presentation, path: str, value) -> None:
    """Set one steerable parameter on the live scene, validating range.
    Spring scales are absolute factors against the slide's declared
    spring values."""
    if path not in PARAM_RANGES:
        raise ParamError(f"unknown parameter path: {path!r}")
    if p.scene is None:
        raise ParamError("current slide has no scene")
    lo, hi = PARAM_RANGES[path]
    if not isinstance(value, (int, float)) or isinstance(value, bool):
        raise ParamError(f"{path}: value must be a number")
    if not lo <= value <= hi:
        raise ParamError(f"{path}: {value!r} outside [{lo}, {hi}]")
    scene = p.scene
    world = scene.world
    params = world.params
    if path == "gravity.x":
        params.gravity = Vec2(float(value), params.gravity.y)
    elif path == "gravity.y":
        params.gravity = Vec2(params.gravity.x, float(value))
    elif path == "restitution":
        params.restitution = float(value)
    elif path == "drag.stiffness":
        params.drag_stiffness = float(value)
    elif path == "drag.damping":
        params.drag_damping = float(value)
    elif path == "substeps":
        if int(value) != value:
            raise ParamError("substeps: value must be an integer")
        scene.substeps_per_tick = int(value)
    elif path == "springs.stiffness_scale":
        scene.stiffness_scale = float(value)
        _rescale_springs(p)
    elif path == "springs.damping_scale":
        scene.damping_scale = float(value)
        _rescale_springs(p)
    world.invalidate_halfstep()


def _rescale_springs(p: Presentation) -> None:
    template = p.slides[p.current].scene
    assert template is not None and p.scene is not None
    physics.scale_spring_params(
        p.scene.world, template.world,
        stiffness_scale=p.scene.stiffness_scale,
        damping_scale=p.scene.damping_scale,
    )

"""Mass-spring world state, force model, view-box response, and stepping.

The world simulates in a plane.  Forces are linear Hooke springs with
damping projected along the spring axis, uniform gravity, and an optional
spring-damper coupling to a pointer (the drag handle).  Stepping packs the
particle state into a flat vector (``[x, y, vx, vy]`` per particle) and
hands it to one of the explicit integrators; collision response against
the view box is applied once per step, after integration.
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass, field
from typing import Optional

import numpy as np

from .integrators import DerivFn, HalfStepCarry, IntegratorKind, NumericFault, step_state

# Springs shorter than this contribute no force for that evaluation; the
# direction is undefined and the configuration is a recoverable transient.
DEGENERATE_LENGTH = 1e-9


@dataclass(frozen=True)
class Vec2:
    x: float = 0.0
    y: float = 0.0


class SpringRole(enum.Enum):
    STRUCTURAL = "structural"
    RADIAL = "radial"
    SHEAR = "shear"


@dataclass
class Particle:
    id: int
    position: Vec2
    velocity: Vec2 = Vec2(0.0, 0.0)
    force: Vec2 = Vec2(0.0, 0.0)
    mass: float = 1.0
    pinned: bool = False


@dataclass
class Spring:
    a: int
    b: int
    rest_length: float
    stiffness: float
    damping: float = 0.0
    role: SpringRole = SpringRole.STRUCTURAL


@dataclass
class SimParams:
    gravity: Vec2 = Vec2(0.0, -9.81)
    h: float = 1.0 / 240.0
    restitution: float = 0.5
    drag_stiffness: float = 40.0
    drag_damping: float = 2.0


@dataclass
class ViewBox:
    min: Vec2 = Vec2(-2.0, -1.5)
    max: Vec2 = Vec2(2.0, 1.5)


@dataclass
class SoftBody:
    particles: list[Particle]
    springs: list[Spring]
    dimensionality: int = 2
    layers: int = 2
    material: str = "elastic"


@dataclass
class DragHandle:
    body: int
    particle: int
    target: Vec2
    active: bool = True


@dataclass
class Diagnostics:
    force_evals: int = 0
    degenerate_springs: int = 0


class InvalidWorldError(Exception):
    pass


class SimulationFault(Exception):
    """Non-finite state after a step; the world is left at the last good
    state."""

    def __init__(self, tick: int, particle: int):
        self.tick = tick
        self.particle = particle
        super().__init__(f"non-finite state at tick {tick}, particle {particle}")


@dataclass
class _Structure:
    """Flattened per-world arrays that only change when bodies, springs,
    masses, or pin flags change."""

    mass: np.ndarray
    pinned: np.ndarray
    spring_a: np.ndarray
    spring_b: np.ndarray
    stiffness: np.ndarray
    damping: np.ndarray
    rest: np.ndarray
    offsets: list[int]  # global index of each body's first particle


@dataclass
class World:
    bodies: list[SoftBody]
    params: SimParams = field(default_factory=SimParams)
    box: ViewBox = field(default_factory=ViewBox)
    drag: Optional[DragHandle] = None
    tick: int = 0
    diagnostics: Diagnostics = field(default_factory=Diagnostics)
    # Leapfrog carry between steps; valid only while nothing outside the
    # integrator touches positions, velocities, or forces.
    halfstep: Optional[HalfStepCarry] = field(default=None, compare=False, repr=False)
    _structure: Optional[_Structure] = field(default=None, compare=False, repr=False)

    def touch_structure(self) -> None:
        """Drop cached arrays after mutating bodies, springs, masses, or
        pin flags in place."""
        self._structure = None
        self.halfstep = None

    def invalidate_halfstep(self) -> None:
        self.halfstep = None

    def particle_count(self) -> int:
        return sum(len(b.particles) for b in self.bodies)

    def spring_count(self) -> int:
        return sum(len(b.springs) for b in self.bodies)


def validate_world(world: World) -> None:
    """Raise InvalidWorldError on any violated structural invariant."""
    if world.tick < 0:
        raise InvalidWorldError("tick must be non-negative")
    p = world.params
    if not p.h > 0:
        raise InvalidWorldError("timestep h must be positive")
    if not 0.0 <= p.restitution <= 1.0:
        raise InvalidWorldError("restitution must be in [0, 1]")
    if p.drag_stiffness < 0:
        raise InvalidWorldError("drag stiffness must be non-negative")
    box = world.box
    if not (box.min.x < box.max.x and box.min.y < box.max.y):
        raise InvalidWorldError("view box must have positive extent")
    for bi, body in enumerate(world.bodies):
        n = len(body.particles)
        if n < 2:
            raise InvalidWorldError(f"body {bi}: needs at least 2 particles")
        for i, part in enumerate(body.particles):
            if part.id != i:
                raise InvalidWorldError(f"body {bi}: particle ids must be dense and ordered")
            if not part.mass > 0:
                raise InvalidWorldError(f"body {bi} particle {i}: mass must be positive")
            for v in (part.position.x, part.position.y, part.velocity.x, part.velocity.y):
                if not math.isfinite(v):
                    raise InvalidWorldError(f"body {bi} particle {i}: non-finite state")
            if part.pinned and not (
                box.min.x <= part.position.x <= box.max.x
                and box.min.y <= part.position.y <= box.max.y
            ):
                raise InvalidWorldError(f"body {bi} particle {i}: pinned outside the view box")
        for si, s in enumerate(body.springs):
            if s.a == s.b:
                raise InvalidWorldError(f"body {bi} spring {si}: self loop")
            if not (0 <= s.a < n and 0 <= s.b < n):
                raise InvalidWorldError(f"body {bi} spring {si}: endpoint out of range")
            if s.rest_length < 0:
                raise InvalidWorldError(f"body {bi} spring {si}: negative rest length")
            if not s.stiffness > 0:
                raise InvalidWorldError(f"body {bi} spring {si}: stiffness must be positive")
            if s.damping < 0:
                raise InvalidWorldError(f"body {bi} spring {si}: negative damping")
    if world.drag is not None and world.drag.active:
        d = world.drag
        if not (0 <= d.body < len(world.bodies)):
            raise InvalidWorldError("drag handle: body index out of range")
        if not (0 <= d.particle < len(world.bodies[d.body].particles)):
            raise InvalidWorldError("drag handle: particle index out of range")


def _structure_of(world: World) -> _Structure:
    if world._structure is not None:
        return world._structure
    offsets = []
    at = 0
    masses: list[float] = []
    pinned: list[bool] = []
    sa: list[int] = []
    sb: list[int] = []
    ks: list[float] = []
    cs: list[float] = []
    rs: list[float] = []
    for body in world.bodies:
        offsets.append(at)
        for part in body.particles:
            masses.append(part.mass)
            pinned.append(part.pinned)
        for s in body.springs:
            sa.append(at + s.a)
            sb.append(at + s.b)
            ks.append(s.stiffness)
            cs.append(s.damping)
            rs.append(s.rest_length)
        at += len(body.particles)
    world._structure = _Structure(
        mass=np.array(masses, dtype=np.float64),
        pinned=np.array(pinned, dtype=bool),
        spring_a=np.array(sa, dtype=np.intp),
        spring_b=np.array(sb, dtype=np.intp),
        stiffness=np.array(ks, dtype=np.float64),
        damping=np.array(cs, dtype=np.float64),
        rest=np.array(rs, dtype=np.float64),
        offsets=offsets,
    )
    return world._structure


def _pack(world: World) -> tuple[np.ndarray, np.ndarray]:
    pos = np.array(
        [(p.position.x, p.position.y) for b in world.bodies for p in b.particles],
        dtype=np.float64,
    ).reshape(-1, 2)
    vel = np.array(
        [(p.velocity.x, p.velocity.y) for b in world.bodies for p in b.particles],
        dtype=np.float64,
    ).reshape(-1, 2)
    return pos, vel


def all_positions(world: World) -> np.ndarray:
    """All particle positions as an (n, 2) array, bodies concatenated in
    order."""
    return _pack(world)[0]


def _unpack(world: World, pos: np.ndarray, vel: np.ndarray) -> None:
    i = 0
    for body in world.bodies:
        for part in body.particles:
            part.position = Vec2(float(pos[i, 0]), float(pos[i, 1]))
            part.velocity = Vec2(float(vel[i, 0]), float(vel[i, 1]))
            i += 1


def _drag_target_index(world: World) -> tuple[int, Optional[np.ndarray]]:
    if world.drag is None or not world.drag.active:
        return -1, None
    st = _structure_of(world)
    idx = st.offsets[world.drag.body] + world.drag.particle
    return idx, np.array([world.drag.target.x, world.drag.target.y], dtype=np.float64)


def _eval_forces(
    world: World,
    st: _Structure,
    pos: np.ndarray,
    vel: np.ndarray,
    drag_index: int,
    drag_target: Optional[np.ndarray],
) -> np.ndarray:
    """Gravity + spring + drag-handle forces at the given state.

    Spring force on endpoint a is [k*(|d| - r) + c*(dv . dhat)] * dhat with
    d = pos_b - pos_a; equal and opposite on b.  Degenerate springs
    (|d| below DEGENERATE_LENGTH) contribute nothing and are counted.
    """
    g = world.params.gravity
    forces = st.mass[:, None] * np.array([g.x, g.y], dtype=np.float64)[None, :]
    if len(st.spring_a):
        # Overflow to inf/nan is allowed here; the integrator's finiteness
        # check turns it into a SimulationFault.
        with np.errstate(over="ignore", invalid="ignore"):
            d = pos[st.spring_b] - pos[st.spring_a]
            length = np.sqrt(np.einsum("ij,ij->i", d, d))
            ok = length >= DEGENERATE_LENGTH
            bad = int(len(ok) - ok.sum())
            if bad:
                world.diagnostics.degenerate_springs += bad
            dhat = d / np.where(ok, length, 1.0)[:, None]
            dv = vel[st.spring_b] - vel[st.spring_a]
            mag = st.stiffness * (length - st.rest) + st.damping * np.einsum("ij,ij->i", dv, dhat)
            fs = np.where(ok, mag, 0.0)[:, None] * dhat
            np.add.at(forces, st.spring_a, fs)
            np.add.at(forces, st.spring_b, -fs)
    if drag_index >= 0:
        p = world.params
        forces[drag_index] += p.drag_stiffness * (drag_target - pos[drag_index])
        forces[drag_index] -= p.drag_damping * vel[drag_index]
    world.diagnostics.force_evals += 1
    return forces


def accumulate_forces(world: World) -> World:
    """Fill every particle's force accumulator from the current state.

    Pinned particles accumulate force too; it is ignored at integration.
    """
    st = _structure_of(world)
    pos, vel = _pack(world)
    drag_index, drag_target = _drag_target_index(world)
    forces = _eval_forces(world, st, pos, vel, drag_index, drag_target)
    i = 0
    for body in world.bodies:
        for part in body.particles:
            part.force = Vec2(float(forces[i, 0]), float(forces[i, 1]))
            i += 1
    return world


def _make_deriv(world: World, st: _Structure, drag_index: int, drag_target) -> DerivFn:
    def deriv(s: np.ndarray) -> np.ndarray:
        state = s.reshape(-1, 4)
        pos = state[:, :2]
        vel = state[:, 2:]
        forces = _eval_forces(world, st, pos, vel, drag_index, drag_target)
        out = np.empty_like(state)
        out[:, :2] = vel
        out[:, 2:] = forces / st.mass[:, None]
        out[st.pinned] = 0.0
        return out.reshape(-1)

    return deriv


def _resolve_collisions(world: World) -> bool:
    """Clamp escaped particles to the violated face and reflect the normal
    velocity component, scaled by the restitution.  Pinned particles are
    exempt (they never move).  Returns True if anything changed."""
    box = world.box
    e = world.params.restitution
    changed = False
    for body in world.bodies:
        for part in body.particles:
            if part.pinned:
                continue
            px, py = part.position.x, part.position.y
            vx, vy = part.velocity.x, part.velocity.y
            hit = False
            if px < box.min.x:
                px, vx, hit = box.min.x, -e * vx, True
            elif px > box.max.x:
                px, vx, hit = box.max.x, -e * vx, True
            if py < box.min.y:
                py, vy, hit = box.min.y, -e * vy, True
            elif py > box.max.y:
                py, vy, hit = box.max.y, -e * vy, True
            if hit:
                part.position = Vec2(px, py)
                part.velocity = Vec2(vx, vy)
                changed = True
    return changed


def resolve_viewbox_collision(world: World) -> World:
    if _resolve_collisions(world):
        world.invalidate_halfstep()
    return world


def step(world: World, integrator: IntegratorKind) -> World:
    """Advance the world by one fixed step of params.h under the named
    integrator, then apply collision response once and bump the tick.

    On a non-finite result the world is left untouched and a
    SimulationFault carrying the tick and offending particle is raised.
    """
    st = _structure_of(world)
    pos, vel = _pack(world)
    state = np.empty((len(st.mass), 4), dtype=np.float64)
    state[:, :2] = pos
    state[:, 2:] = vel
    drag_index, drag_target = _drag_target_index(world)
    f = _make_deriv(world, st, drag_index, drag_target)
    carry = world.halfstep if integrator is IntegratorKind.FEYNMAN else None
    try:
        s_new, carry_new = step_state(
            integrator, state.reshape(-1), f, world.params.h, carry, dim=2
        )
    except NumericFault as err:
        raise SimulationFault(world.tick, err.index // 4) from err
    new = s_new.reshape(-1, 4)
    new_pos, new_vel = new[:, :2].copy(), new[:, 2:].copy()
    # Pinned particles are bit-exactly stationary regardless of integrator.
    new_pos[st.pinned] = pos[st.pinned]
    new_vel[st.pinned] = 0.0
    _unpack(world, new_pos, new_vel)
    world.halfstep = carry_new if integrator is IntegratorKind.FEYNMAN else None
    if _resolve_collisions(world):
        world.invalidate_halfstep()
    world.tick += 1
    return world


def begin_drag(world: World, pointer: Vec2) -> World:
    """Attach the drag handle to the particle nearest the pointer.

    Exhaustive scan; ties break toward the lowest (body, particle) pair.
    """
    best: Optional[tuple[int, int]] = None
    best_d2 = math.inf
    for bi, body in enumerate(world.bodies):
        for pi, part in enumerate(body.particles):
            dx = part.position.x - pointer.x
            dy = part.position.y - pointer.y
            d2 = dx * dx + dy * dy
            if d2 < best_d2:
                best_d2 = d2
                best = (bi, pi)
    if best is None:
        raise InvalidWorldError("cannot drag: world has no particles")
    world.drag = DragHandle(body=best[0], particle=best[1], target=pointer)
    world.invalidate_halfstep()
    return world


def update_drag(world: World, pointer: Vec2) -> World:
    """Move the handle target; a no-op when no handle is active (the UI
    may race end/update)."""
    if world.drag is not None and world.drag.active:
        world.drag.target = pointer
        world.invalidate_halfstep()
    return world


def end_drag(world: World) -> World:
    """Clear the handle.  Idempotent."""
    if world.drag is not None:
        world.drag = None
        world.invalidate_halfstep()
    return world


def scale_spring_params(world: World, base: World, stiffness_scale: float = 1.0,
                        damping_scale: float = 1.0) -> None:
    """Set every spring's stiffness/damping to the corresponding spring of
    ``base`` times the given factors.  Used by the live parameter panel so
    sliders stay absolute against the slide's declared values."""
    for body, base_body in zip(world.bodies, base.bodies):
        for s, bs in zip(body.springs, base_body.springs):
            s.stiffness = bs.stiffness * stiffness_scale
            s.damping = bs.damping * damping_scale
    world.touch_structure()
